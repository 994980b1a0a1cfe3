#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "drrkit/error.hpp"
#include "drrkit/projector.hpp"
#include "drrkit/volume.hpp"

namespace drrkit {

/// Mean squared voxel difference.
double recon_loss(const Volume& v, const Volume& y);

/// Multi-view projection loss between two HU volumes: both are converted to
/// attenuation, projected under each of the three poses, and the per-view
/// mean absolute pixel differences are averaged.
double drr_loss(const Volume& v_hu, const Volume& y_hu, const ProjectionGeometry& g, std::span<const ViewPose> poses,
                double mu_water = kDefaultMuWater);

enum class ViewNorm {
  L2,        // r^2
  SmoothL1,  // r^2 / (2 delta) for |r| < delta, |r| - delta / 2 otherwise
  L1,        // |r|, sign subgradient
};

struct ViewTarget {
  ImageGrid2D image;
  ViewPose pose;
};

/// f(v) = mean over views of the per-pixel mean of norm(P v - target)
///        + lambda_re * mean((v - reference)^2).
/// v is in attenuation units; the projector is linear in v.
struct Objective {
  std::vector<ViewTarget> views;
  ProjectionGeometry geometry;
  ViewNorm norm = ViewNorm::L2;
  double huber_delta = 1e-3;
  std::optional<Volume> reference;
  double lambda_re = 0.0;

  void validate() const;
};

/// Projects `truth` under every pose to build the reference views.
Objective make_objective(const Volume& truth, const ProjectionGeometry& g, std::span<const ViewPose> poses,
                         ViewNorm norm = ViewNorm::L2);

struct ValueAndGradient {
  double value = 0.0;
  Volume gradient;
};

double objective_value(const Volume& v, const Objective& obj);
ValueAndGradient objective_gradient(const Volume& v, const Objective& obj);

/// Largest step that is safe for the L2 data term, from a power iteration on
/// the Gauss-Newton operator.
double suggest_step(const Objective& obj, const GridGeometry& grid, int iterations = 20);

struct OptSettings {
  double step = 1.0;
  int iterations = 100;
  bool clamp_nonnegative = true;
  double tolerance = 0.0;  // stop when (f_prev - f) <= tolerance * |f_prev|
  int log_every = 0;       // 0 disables the callback
  int max_halvings = 40;

  void validate() const;
};

struct TraceEntry {
  int iteration = 0;
  double objective = 0.0;
  double step = 0.0;
};

struct ReconResult {
  Volume volume;
  std::vector<TraceEntry> trace;
  bool converged = false;
};

/// Thrown when the objective turns non-finite; carries the trace so far.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& message, std::vector<TraceEntry> trace)
      : Error(ErrorCode::Diverged, "objective", message), trace_(std::move(trace)) {}
  const std::vector<TraceEntry>& trace() const { return trace_; }

 private:
  std::vector<TraceEntry> trace_;
};

/// Fixed-step gradient descent with optional projection onto v >= 0. A step
/// that raises the objective is halved and retried, so the trace never
/// increases.
ReconResult reconstruct_iterative(const Objective& obj, const Volume& init, const OptSettings& settings,
                                  const std::function<void(const TraceEntry&)>& log = {});

}  // namespace drrkit
