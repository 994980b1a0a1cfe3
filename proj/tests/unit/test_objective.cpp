#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "drrkit/error.hpp"
#include "drrkit/objective.hpp"
#include "drrkit/parallel.hpp"
#include "drrkit/phantom.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace drrkit;

namespace {

GridGeometry centred_cube(std::size_t n, double s) {
  GridGeometry g;
  g.dims = {n, n, n};
  g.spacing = {s, s, s};
  const double o = -0.5 * s * static_cast<double>(n - 1);
  g.origin = {o, o, o};
  return g;
}

std::vector<ViewPose> random_poses(gen::Rng& rng, int n) {
  std::vector<ViewPose> p;
  for (int i = 0; i < n; ++i) p.push_back(gen::random_pose(rng, 1.0));
  return p;
}

double inner(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

TEST(ReconLoss, Examples) {
  gen::Rng rng(60);
  const GridGeometry g = centred_cube(4, 1.0);
  const Volume a = gen::random_volume(rng, g), b = gen::random_volume(rng, g);
  EXPECT_EQ(recon_loss(a, a), 0.0);
  Volume shifted = a;
  for (auto& x : shifted.data()) x += 0.75;
  EXPECT_NEAR(recon_loss(shifted, a), 0.5625, 1e-12);
  double direct = 0;
  for (std::size_t i = 0; i < a.size(); ++i) direct += (a[i] - b[i]) * (a[i] - b[i]);
  EXPECT_NEAR(recon_loss(a, b), direct / 64.0, 1e-12);
  EXPECT_THROW(recon_loss(a, Volume(centred_cube(3, 1.0))), Error);
}

TEST(DrrLoss, ZeroSymmetricAndOracle) {
  gen::Rng rng(61);
  const GridGeometry g = centred_cube(8, 1.0);
  const Volume v = gen::random_volume(rng, g, -1000, 500), y = gen::random_volume(rng, g, -1000, 500);
  const ProjectionGeometry pg = gen::random_projection(rng, g, ProjectionMode::ConeBeam, 10, 10);
  const StandardViews sv = standard_views();
  const std::vector<ViewPose> poses{sv.pa, sv.la, sv.ax};
  EXPECT_EQ(drr_loss(v, v, pg, poses), 0.0);
  EXPECT_DOUBLE_EQ(drr_loss(v, y, pg, poses), drr_loss(y, v, pg, poses));

  const Volume mv = hu_to_attenuation(v), my = hu_to_attenuation(y);
  double want = 0.0;
  for (const ViewPose& p : poses) {
    const ImageGrid2D a = oracle::project(mv, pg, p), b = oracle::project(my, pg, p);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::fabs(a[i] - b[i]);
    want += s / static_cast<double>(a.size());
  }
  want /= 3.0;
  EXPECT_NEAR(drr_loss(v, y, pg, poses), want, 1e-6 * want);
  EXPECT_THROW(drr_loss(v, y, pg, std::span(poses).first(2)), Error);
}

TEST(DrrLoss, NullSpaceDirection) {
  // A change invisible to all three projections (air clamped below -1000)
  // leaves the loss at zero even though the volumes differ.
  const GridGeometry g = centred_cube(6, 1.0);
  Volume v(g, -1000.0), y(g, -1000.0);
  y.at(0, 0, 0) = -1400.0;
  const ProjectionGeometry pg = default_geometry(g, ProjectionMode::Parallel, 8, 8);
  const StandardViews sv = standard_views();
  const std::vector<ViewPose> poses{sv.pa, sv.la, sv.ax};
  EXPECT_EQ(drr_loss(v, y, pg, poses), 0.0);
}

TEST(Objective, Validation) {
  Objective obj;
  EXPECT_THROW(obj.validate(), Error);
  const GridGeometry g = centred_cube(4, 1.0);
  const ProjectionGeometry pg = default_geometry(g, ProjectionMode::Parallel, 6, 6);
  const ViewPose poses[] = {ViewPose{}};
  obj = make_objective(Volume(g), pg, poses, ViewNorm::SmoothL1);
  obj.huber_delta = 0.0;
  EXPECT_THROW(obj.validate(), Error);
  obj.huber_delta = 1e-3;
  obj.lambda_re = -1.0;
  EXPECT_THROW(obj.validate(), Error);
  obj.lambda_re = 1.0;
  EXPECT_THROW(obj.validate(), Error);  // no reference
}

TEST(Objective, ZeroAtGeneratingVolume) {
  gen::Rng rng(62);
  const GridGeometry g = centred_cube(8, 1.0);
  const Volume truth = gen::random_volume(rng, g, 0, 0.02);
  const ProjectionGeometry pg = gen::random_projection(rng, g, ProjectionMode::Parallel, 10, 10);
  const auto poses = random_poses(rng, 4);
  const Objective obj = make_objective(truth, pg, poses);
  const ValueAndGradient vg = objective_gradient(truth, obj);
  EXPECT_EQ(vg.value, 0.0);
  for (double x : vg.gradient.data()) EXPECT_EQ(x, 0.0);
}

TEST(Objective, GradientMatchesFiniteDifferences) {
  gen::Rng rng(63);
  for (ViewNorm norm : {ViewNorm::L2, ViewNorm::SmoothL1, ViewNorm::L1}) {
    for (int trial = 0; trial < 3; ++trial) {
      const GridGeometry g = centred_cube(8, 1.0);
      const auto mode = trial % 2 ? ProjectionMode::ConeBeam : ProjectionMode::Parallel;
      const ProjectionGeometry pg = gen::random_projection(rng, g, mode, 10, 10);
      const auto poses = random_poses(rng, 3);
      Objective obj = make_objective(gen::random_volume(rng, g, 0, 0.02), pg, poses, norm);
      obj.huber_delta = 0.05;
      obj.reference = gen::random_volume(rng, g, 0, 0.02);
      obj.lambda_re = 0.3;
      const Volume v = gen::random_volume(rng, g, 0, 0.02), d = gen::random_volume(rng, g, -1, 1);
      // Exact L1 has kinks at zero residual; keep the stencil away from them.
      const double eps = norm == ViewNorm::L1 ? 1e-7 : 1e-3;
      Volume plus = v, minus = v;
      for (std::size_t i = 0; i < v.size(); ++i) {
        plus[i] += eps * d[i];
        minus[i] -= eps * d[i];
      }
      const double fd = (objective_value(plus, obj) - objective_value(minus, obj)) / (2 * eps);
      const double an = inner(objective_gradient(v, obj).gradient.data(), d.data());
      EXPECT_LT(std::fabs(fd - an) / std::max(std::fabs(an), 1e-12), norm == ViewNorm::L1 ? 1e-5 : 1e-3) << static_cast<int>(norm);
    }
  }
}

TEST(Objective, ScalingOfL2Gradient) {
  gen::Rng rng(64);
  const GridGeometry g = centred_cube(6, 1.0);
  const ProjectionGeometry pg = gen::random_projection(rng, g, ProjectionMode::Parallel, 8, 8);
  const auto poses = random_poses(rng, 2);
  const Objective obj = make_objective(gen::random_volume(rng, g), pg, poses);
  Objective doubled = obj;
  for (auto& view : doubled.views)
    for (auto& x : view.image.data()) x *= 2.0;
  Volume v = gen::random_volume(rng, g);
  const ValueAndGradient a = objective_gradient(v, obj);
  for (auto& x : v.data()) x *= 2.0;
  const ValueAndGradient b = objective_gradient(v, doubled);
  // f(2v; 2y) = 4 f(v; y) and its gradient in v is 2 grad f(v; y).
  EXPECT_NEAR(b.value, 4.0 * a.value, 1e-12 * b.value);
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_NEAR(b.gradient[i], 2.0 * a.gradient[i], 1e-12);
}

TEST(Objective, ThreadCountDoesNotChangeBits) {
  gen::Rng rng(65);
  const GridGeometry g = centred_cube(8, 1.0);
  const ProjectionGeometry pg = gen::random_projection(rng, g, ProjectionMode::ConeBeam, 10, 10);
  const auto poses = random_poses(rng, 7);
  const Objective obj = make_objective(gen::random_volume(rng, g), pg, poses, ViewNorm::SmoothL1);
  const Volume v = gen::random_volume(rng, g);
  const unsigned saved = thread_count();
  set_thread_count(1);
  const ValueAndGradient a = objective_gradient(v, obj);
  set_thread_count(3);
  const ValueAndGradient b = objective_gradient(v, obj);
  set_thread_count(8);
  const ValueAndGradient c = objective_gradient(v, obj);
  set_thread_count(saved);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.gradient, b.gradient);
  EXPECT_EQ(a.gradient, c.gradient);
}

TEST(Reconstruct, ZeroReferencesStayZero) {
  const GridGeometry g = centred_cube(6, 1.0);
  const ProjectionGeometry pg = default_geometry(g, ProjectionMode::Parallel, 8, 8);
  const StandardViews sv = standard_views();
  const ViewPose poses[] = {sv.pa, sv.la};
  const Objective obj = make_objective(Volume(g), pg, poses);
  OptSettings s;
  s.iterations = 5;
  const ReconResult r = reconstruct_iterative(obj, Volume(g), s);
  for (double x : r.volume.data()) EXPECT_EQ(x, 0.0);
}

TEST(Reconstruct, TraceNonIncreasingEvenWithHugeStep) {
  gen::Rng rng(66);
  const GridGeometry g = centred_cube(8, 1.0);
  const ProjectionGeometry pg = default_geometry(g, ProjectionMode::Parallel, 10, 10);
  const auto poses = random_poses(rng, 4);
  const Objective obj = make_objective(two_ellipsoid_phantom(8), pg, poses, ViewNorm::SmoothL1);
  OptSettings s;
  s.step = 1e6;
  s.iterations = 30;
  int logged = 0;
  s.log_every = 10;
  const ReconResult r = reconstruct_iterative(obj, Volume(g), s, [&](const TraceEntry&) { ++logged; });
  ASSERT_GE(r.trace.size(), 2u);
  for (std::size_t i = 1; i < r.trace.size(); ++i) EXPECT_LE(r.trace[i].objective, r.trace[i - 1].objective);
  EXPECT_LT(r.trace.back().objective, r.trace.front().objective);
  EXPECT_GE(logged, 1);
  for (double x : r.volume.data()) EXPECT_GE(x, 0.0);
}

TEST(Reconstruct, SuggestedStepDecreasesQuickly) {
  const GridGeometry g = centred_cube(12, 1.0);
  const ProjectionGeometry pg = default_geometry(g, ProjectionMode::Parallel, 16, 16);
  std::vector<ViewPose> poses;
  for (int i = 0; i < 8; ++i) poses.push_back({{0, 0, std::numbers::pi * i / 8.0}, {}});
  const Objective obj = make_objective(two_ellipsoid_phantom(12), pg, poses);
  OptSettings s;
  s.step = suggest_step(obj, g);
  s.iterations = 20;
  const ReconResult r = reconstruct_iterative(obj, Volume(g), s);
  EXPECT_LT(r.trace.back().objective, 0.2 * r.trace.front().objective);
  // A safe step never needs halving.
  for (const TraceEntry& e : r.trace) EXPECT_EQ(e.step, s.step);
}

TEST(Reconstruct, ToleranceStopsEarlyAndSettingsValidate) {
  const GridGeometry g = centred_cube(6, 1.0);
  const ProjectionGeometry pg = default_geometry(g, ProjectionMode::Parallel, 8, 8);
  const ViewPose poses[] = {ViewPose{}};
  const Objective obj = make_objective(two_ellipsoid_phantom(6), pg, poses);
  OptSettings s;
  s.step = suggest_step(obj, g);
  s.iterations = 1000;
  s.tolerance = 0.5;
  const ReconResult r = reconstruct_iterative(obj, Volume(g), s);
  EXPECT_TRUE(r.converged);
  EXPECT_LT(r.trace.size(), 1000u);

  OptSettings bad;
  bad.step = 0.0;
  EXPECT_THROW(reconstruct_iterative(obj, Volume(g), bad), Error);
  bad = {};
  bad.iterations = 0;
  EXPECT_THROW(reconstruct_iterative(obj, Volume(g), bad), Error);
}
