#include "drrkit/objective.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "drrkit/parallel.hpp"
#include "drrkit/simd/kernels.hpp"

namespace drrkit {

namespace {

void require_same_dims(const Volume& a, const Volume& b, const char* field) {
  if (!(a.dims() == b.dims())) throw Error(ErrorCode::GeometryMismatch, field, "volume dims differ");
}

double penalty(ViewNorm norm, double r, double delta) {
  switch (norm) {
    case ViewNorm::L2: return r * r;
    case ViewNorm::L1: return std::fabs(r);
    case ViewNorm::SmoothL1: {
      const double a = std::fabs(r);
      return a < delta ? r * r / (2.0 * delta) : a - 0.5 * delta;
    }
  }
  return 0.0;
}

double penalty_derivative(ViewNorm norm, double r, double delta) {
  switch (norm) {
    case ViewNorm::L2: return 2.0 * r;
    case ViewNorm::L1: return r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0);
    case ViewNorm::SmoothL1: return std::fabs(r) < delta ? r / delta : (r > 0.0 ? 1.0 : -1.0);
  }
  return 0.0;
}

}  // namespace

double recon_loss(const Volume& v, const Volume& y) {
  require_same_dims(v, y, "y");
  return simd::kernels().sum_sq_diff(v.data().data(), y.data().data(), v.size()) / static_cast<double>(v.size());
}

double drr_loss(const Volume& v_hu, const Volume& y_hu, const ProjectionGeometry& g, std::span<const ViewPose> poses,
                double mu_water) {
  require_same_dims(v_hu, y_hu, "y");
  if (poses.size() != 3) throw Error(ErrorCode::InvalidArgument, "poses", "exactly three poses are required");
  g.validate();
  const Volume mv = hu_to_attenuation(v_hu, mu_water);
  const Volume my = hu_to_attenuation(y_hu, mu_water);
  double total = 0.0;
  for (const ViewPose& pose : poses) {
    const ImageGrid2D pv = project(mv, g, pose);
    const ImageGrid2D py = project(my, g, pose);
    total += simd::kernels().sum_abs_diff(pv.data().data(), py.data().data(), pv.size()) /
             static_cast<double>(pv.size());
  }
  return total / 3.0;
}

void Objective::validate() const {
  if (views.empty()) throw Error(ErrorCode::InvalidArgument, "views", "at least one view is required");
  geometry.validate();
  for (std::size_t i = 0; i < views.size(); ++i)
    if (views[i].image.rows() != geometry.detector_rows || views[i].image.cols() != geometry.detector_cols)
      throw Error(ErrorCode::GeometryMismatch, "views", "view " + std::to_string(i) + " does not match the detector");
  if (norm == ViewNorm::SmoothL1 && !(huber_delta > 0.0))
    throw Error(ErrorCode::InvalidArgument, "huber_delta", "must be > 0");
  if (!(lambda_re >= 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda_re", "must be >= 0");
  if (lambda_re > 0.0 && !reference)
    throw Error(ErrorCode::InvalidArgument, "reference", "lambda_re > 0 needs a reference volume");
}

Objective make_objective(const Volume& truth, const ProjectionGeometry& g, std::span<const ViewPose> poses,
                         ViewNorm norm) {
  Objective obj;
  obj.geometry = g;
  obj.norm = norm;
  obj.views.resize(poses.size());
  parallel_for(0, poses.size(), [&](std::size_t i) { obj.views[i] = {project(truth, g, poses[i]), poses[i]}; });
  obj.validate();
  return obj;
}

namespace {

struct ViewContribution {
  double value = 0.0;
  Volume gradient;
};

ViewContribution evaluate_view(const Volume& v, const Objective& obj, std::size_t i, bool with_gradient) {
  const ViewTarget& view = obj.views[i];
  const ImageGrid2D pv = project(v, obj.geometry, view.pose);
  const double pixel_weight = 1.0 / static_cast<double>(pv.size());
  ImageGrid2D adjoint_input(pv.rows(), pv.cols(), pv.row_spacing(), pv.col_spacing());
  ViewContribution out;
  for (std::size_t p = 0; p < pv.size(); ++p) {
    const double r = pv[p] - view.image[p];
    out.value += penalty(obj.norm, r, obj.huber_delta);
    if (with_gradient) adjoint_input[p] = penalty_derivative(obj.norm, r, obj.huber_delta);
  }
  out.value *= pixel_weight;
  if (with_gradient) {
    for (auto& a : adjoint_input.data()) a *= pixel_weight;
    out.gradient = backproject(adjoint_input, obj.geometry, view.pose, v.geometry());
  }
  return out;
}

// Views are evaluated in batches of thread_count() with private buffers and
// folded into the total strictly in view order, so the reduction order is
// the same for every worker count.
ValueAndGradient evaluate(const Volume& v, const Objective& obj, bool with_gradient) {
  obj.validate();
  if (obj.reference) require_same_dims(v, *obj.reference, "reference");
  const std::size_t n_views = obj.views.size();
  const double view_weight = 1.0 / static_cast<double>(n_views);
  const auto& k = simd::kernels();

  ValueAndGradient out;
  if (with_gradient) out.gradient = Volume(v.geometry());
  double data_term = 0.0;
  const std::size_t batch = std::max<std::size_t>(1, thread_count());
  std::vector<ViewContribution> parts;
  for (std::size_t first = 0; first < n_views; first += batch) {
    const std::size_t last = std::min(n_views, first + batch);
    parts.assign(last - first, {});
    parallel_for(first, last, [&](std::size_t i) { parts[i - first] = evaluate_view(v, obj, i, with_gradient); });
    for (auto& part : parts) {
      data_term += part.value;
      if (with_gradient)
        k.axpy(out.gradient.data().data(), part.gradient.data().data(), view_weight, v.size());
    }
  }
  out.value = view_weight * data_term;

  if (obj.lambda_re > 0.0) {
    const Volume& ref = *obj.reference;
    const double n = static_cast<double>(v.size());
    out.value += obj.lambda_re * k.sum_sq_diff(v.data().data(), ref.data().data(), v.size()) / n;
    if (with_gradient) {
      const double scale = 2.0 * obj.lambda_re / n;
      auto g = out.gradient.data();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += scale * (v[i] - ref[i]);
    }
  }
  return out;
}

}  // namespace

double objective_value(const Volume& v, const Objective& obj) { return evaluate(v, obj, false).value; }

ValueAndGradient objective_gradient(const Volume& v, const Objective& obj) { return evaluate(v, obj, true); }

double suggest_step(const Objective& obj, const GridGeometry& grid, int iterations) {
  obj.validate();
  // Hessian of the L2 data term: (2 / (views * pixels)) sum P^T P.
  Objective quad = obj;
  quad.norm = ViewNorm::L2;
  for (auto& view : quad.views)
    for (auto& p : view.image.data()) p = 0.0;

  Volume x(grid, 1.0);
  double lambda = 0.0;
  for (int it = 0; it < iterations; ++it) {
    const double nx = std::sqrt(simd::kernels().dot(x.data().data(), x.data().data(), x.size()));
    if (!(nx > 0.0)) break;
    for (auto& e : x.data()) e /= nx;
    // Gradient of f at x with zero targets equals H x.
    Volume hx = objective_gradient(x, quad).gradient;
    lambda = simd::kernels().dot(x.data().data(), hx.data().data(), x.size());
    x = std::move(hx);
  }
  if (obj.lambda_re > 0.0) lambda += 2.0 * obj.lambda_re / static_cast<double>(grid.voxel_count());
  if (!(lambda > 0.0)) throw Error(ErrorCode::DegenerateGeometry, "views", "projection operator is zero on this grid");
  return 1.0 / (1.05 * lambda);
}

void OptSettings::validate() const {
  if (!(step > 0.0) || !std::isfinite(step)) throw Error(ErrorCode::InvalidArgument, "step", "must be > 0");
  if (iterations < 1) throw Error(ErrorCode::InvalidArgument, "iterations", "must be >= 1");
  if (!(tolerance >= 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerance", "must be >= 0");
  if (log_every < 0) throw Error(ErrorCode::InvalidArgument, "log_every", "must be >= 0");
  if (max_halvings < 0) throw Error(ErrorCode::InvalidArgument, "max_halvings", "must be >= 0");
}

ReconResult reconstruct_iterative(const Objective& obj, const Volume& init, const OptSettings& settings,
                                  const std::function<void(const TraceEntry&)>& log) {
  settings.validate();
  obj.validate();
  ReconResult result;
  result.volume = init;
  if (settings.clamp_nonnegative)
    for (auto& e : result.volume.data()) e = std::max(0.0, e);

  ValueAndGradient current = objective_gradient(result.volume, obj);
  double step = settings.step;
  result.trace.push_back({0, current.value, step});
  if (!std::isfinite(current.value)) throw DivergenceError("initial objective is not finite", result.trace);
  if (log && settings.log_every > 0) log(result.trace.back());

  const auto& k = simd::kernels();
  Volume candidate(init.geometry());
  for (int it = 1; it <= settings.iterations; ++it) {
    double value = 0.0;
    bool accepted = false;
    for (int halving = 0; halving <= settings.max_halvings; ++halving) {
      std::copy(result.volume.data().begin(), result.volume.data().end(), candidate.data().begin());
      k.axpy(candidate.data().data(), current.gradient.data().data(), -step, candidate.size());
      if (settings.clamp_nonnegative)
        for (auto& e : candidate.data()) e = std::max(0.0, e);
      value = objective_value(candidate, obj);
      if (std::isfinite(value) && value <= current.value) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (!std::isfinite(value)) throw DivergenceError("objective became non-finite", result.trace);
      // No descent even at the smallest step: stationary to working precision.
      result.converged = true;
      break;
    }

    const double previous = current.value;
    std::swap(result.volume, candidate);
    result.trace.push_back({it, value, step});
    if (log && settings.log_every > 0 && it % settings.log_every == 0) log(result.trace.back());
    if (previous - value <= settings.tolerance * std::fabs(previous)) {
      result.converged = true;
      break;
    }
    if (it < settings.iterations) current = objective_gradient(result.volume, obj);
  }
  return result;
}

}  // namespace drrkit
