#include "drrkit/projector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "drrkit/error.hpp"
#include "drrkit/parallel.hpp"
#include "drrkit/random.hpp"

namespace drrkit {

void ProjectionGeometry::validate() const {
  if (detector_rows == 0) throw Error(ErrorCode::DegenerateGeometry, "detector_rows", "must be >= 1");
  if (detector_cols == 0) throw Error(ErrorCode::DegenerateGeometry, "detector_cols", "must be >= 1");
  if (!(row_spacing > 0.0) || !std::isfinite(row_spacing))
    throw Error(ErrorCode::DegenerateGeometry, "row_spacing", "must be finite and > 0");
  if (!(col_spacing > 0.0) || !std::isfinite(col_spacing))
    throw Error(ErrorCode::DegenerateGeometry, "col_spacing", "must be finite and > 0");
  if (!(ray_step > 0.0) || !std::isfinite(ray_step))
    throw Error(ErrorCode::DegenerateGeometry, "ray_step", "must be finite and > 0");
  if (mode == ProjectionMode::ConeBeam) {
    if (!(source_to_isocenter > 0.0))
      throw Error(ErrorCode::DegenerateGeometry, "source_to_isocenter", "must be > 0");
    if (!(source_to_isocenter < source_to_detector) || !std::isfinite(source_to_detector))
      throw Error(ErrorCode::DegenerateGeometry, "source_to_detector", "must exceed source_to_isocenter");
  }
}

ProjectionGeometry default_geometry(const GridGeometry& grid, ProjectionMode mode, std::size_t rows,
                                    std::size_t cols) {
  grid.validate();
  ProjectionGeometry g;
  g.mode = mode;
  g.detector_rows = rows;
  g.detector_cols = cols;
  g.ray_step = 0.5 * std::min({grid.spacing.x, grid.spacing.y, grid.spacing.z});
  const Vec3 e = grid.extent();
  const double largest = std::max({e.x, e.y, e.z});
  double magnification = 1.0;
  if (mode == ProjectionMode::ConeBeam) {
    const double near_face = g.source_to_isocenter - 0.5 * largest;
    if (!(near_face > 0.0))
      throw Error(ErrorCode::DegenerateGeometry, "source_to_isocenter", "volume reaches the source");
    magnification = g.source_to_detector / near_face;
  }
  const double span = 1.05 * largest * magnification;
  g.row_spacing = span / static_cast<double>(rows);
  g.col_spacing = span / static_cast<double>(cols);
  return g;
}

StandardViews standard_views() {
  const double quarter = 0.5 * std::numbers::pi;
  StandardViews v;
  v.pa = ViewPose{};
  v.la = ViewPose{{0.0, 0.0, quarter}, {}};
  v.ax = ViewPose{{quarter, 0.0, 0.0}, {}};
  return v;
}

void PerturbationSpec::validate() const {
  if (!(rotation_range >= 0.0) || !std::isfinite(rotation_range))
    throw Error(ErrorCode::InvalidArgument, "rotation_range", "must be finite and >= 0");
  if (!(translation_range >= 0.0) || !std::isfinite(translation_range))
    throw Error(ErrorCode::InvalidArgument, "translation_range", "must be finite and >= 0");
}

ViewPose sample_perturbed_pose(const ViewPose& base, const PerturbationSpec& spec, std::uint64_t draw_index) {
  spec.validate();
  auto offset = [&](int component, double range) {
    const double u = stream_uniform(spec.seed, draw_index * 6 + static_cast<std::uint64_t>(component));
    return range * (2.0 * u - 1.0);
  };
  ViewPose out = base;
  out.rotation.x += offset(0, spec.rotation_range);
  out.rotation.y += offset(1, spec.rotation_range);
  out.rotation.z += offset(2, spec.rotation_range);
  out.translation.x += offset(3, spec.translation_range);
  out.translation.y += offset(4, spec.translation_range);
  out.translation.z += offset(5, spec.translation_range);
  return out;
}

namespace {

struct Camera {
  Mat3 rotation;
  Vec3 center;  // posed isocenter in world
};

Camera make_camera(const GridGeometry& grid, const ViewPose& pose) {
  return {pose.matrix(), grid.isocenter() + pose.translation};
}

// Narrows [k_lo, k_hi] to samples whose index coordinate on one axis may lie
// in [-0.5, n - 0.5]. Padded by one sample; the kernels test each sample.
void clip_axis(double base, double dir, std::size_t n, double& k_lo, double& k_hi) {
  const double lo = -0.5, hi = static_cast<double>(n) - 0.5;
  if (dir == 0.0) {
    if (!(base >= lo && base <= hi)) {
      k_lo = 1.0;
      k_hi = 0.0;
    }
    return;
  }
  double a = (lo - base) / dir, b = (hi - base) / dir;
  if (a > b) std::swap(a, b);
  k_lo = std::max(k_lo, std::floor(a) - 1.0);
  k_hi = std::min(k_hi, std::ceil(b) + 1.0);
}

simd::RaySegment build_ray(const GridGeometry& grid, const ProjectionGeometry& g, const Camera& cam, std::size_t row,
                           std::size_t col) {
  const double u = (static_cast<double>(col) - 0.5 * static_cast<double>(g.detector_cols - 1)) * g.col_spacing;
  const double v = (static_cast<double>(row) - 0.5 * static_cast<double>(g.detector_rows - 1)) * g.row_spacing;
  const double h = g.ray_step;

  Vec3 anchor_cam, dir_cam;
  double k_lo = -std::numeric_limits<double>::infinity();
  double k_hi = std::numeric_limits<double>::infinity();
  if (g.mode == ProjectionMode::Parallel) {
    anchor_cam = {u, 0.0, v};
    dir_cam = {0.0, 1.0, 0.0};
  } else {
    const Vec3 source{0.0, -g.source_to_isocenter, 0.0};
    const Vec3 pixel{u, g.source_to_detector - g.source_to_isocenter, v};
    const Vec3 delta = pixel - source;
    const double length = norm(delta);
    dir_cam = (1.0 / length) * delta;
    const double t0 = dot(Vec3{} - source, dir_cam);
    anchor_cam = source + t0 * dir_cam;
    // Only the source-detector segment: 0 <= t0 + k h <= length.
    k_lo = std::ceil(-t0 / h);
    k_hi = std::floor((length - t0) / h);
  }

  const Vec3 anchor = cam.center + cam.rotation * anchor_cam;
  const Vec3 dir = cam.rotation * dir_cam;

  simd::RaySegment ray;
  const double base[3] = {(anchor.x - grid.origin.x) / grid.spacing.x, (anchor.y - grid.origin.y) / grid.spacing.y,
                          (anchor.z - grid.origin.z) / grid.spacing.z};
  const double step[3] = {h * dir.x / grid.spacing.x, h * dir.y / grid.spacing.y, h * dir.z / grid.spacing.z};
  const std::size_t n[3] = {grid.dims.width, grid.dims.height, grid.dims.depth};
  for (int a = 0; a < 3; ++a) {
    ray.base[a] = base[a];
    ray.dir[a] = step[a];
    clip_axis(base[a], step[a], n[a], k_lo, k_hi);
  }
  if (k_lo > k_hi) {
    ray.k_begin = ray.k_end = 0;
  } else {
    ray.k_begin = static_cast<std::int64_t>(k_lo);
    ray.k_end = static_cast<std::int64_t>(k_hi) + 1;
  }
  return ray;
}

simd::VolumeView view_of(const Volume& v) {
  return {v.data().data(), static_cast<std::int64_t>(v.dims().width), static_cast<std::int64_t>(v.dims().height),
          static_cast<std::int64_t>(v.dims().depth)};
}

}  // namespace

simd::RaySegment pixel_ray(const GridGeometry& grid, const ProjectionGeometry& g, const ViewPose& pose,
                           std::size_t row, std::size_t col) {
  return build_ray(grid, g, make_camera(grid, pose), row, col);
}

ImageGrid2D project(const Volume& v, const ProjectionGeometry& g, const ViewPose& pose) {
  g.validate();
  const GridGeometry& grid = v.geometry();
  const Camera cam = make_camera(grid, pose);
  const simd::KernelTable& k = simd::kernels();
  const simd::VolumeView vol = view_of(v);

  ImageGrid2D img(g.detector_rows, g.detector_cols, g.row_spacing, g.col_spacing);
  parallel_for(0, g.detector_rows, [&](std::size_t r) {
    for (std::size_t c = 0; c < g.detector_cols; ++c) {
      const simd::RaySegment ray = build_ray(grid, g, cam, r, c);
      img.at(r, c) = g.ray_step * k.ray_integrate(vol, ray);
    }
  });
  return img;
}

Volume backproject(const ImageGrid2D& img, const ProjectionGeometry& g, const ViewPose& pose,
                   const GridGeometry& target) {
  g.validate();
  target.validate();
  if (img.rows() != g.detector_rows || img.cols() != g.detector_cols)
    throw Error(ErrorCode::GeometryMismatch, "image", "image dims do not match detector dims");
  const Camera cam = make_camera(target, pose);
  const simd::KernelTable& k = simd::kernels();

  Volume out(target);
  double* dst = out.data().data();
  const auto nx = static_cast<std::int64_t>(target.dims.width);
  const auto ny = static_cast<std::int64_t>(target.dims.height);
  const auto nz = static_cast<std::int64_t>(target.dims.depth);
  // Serial scatter in row-major pixel order keeps the result bit-stable.
  for (std::size_t r = 0; r < g.detector_rows; ++r) {
    for (std::size_t c = 0; c < g.detector_cols; ++c) {
      const double value = img.at(r, c);
      if (value == 0.0) continue;
      k.ray_scatter(dst, nx, ny, nz, build_ray(target, g, cam, r, c), g.ray_step * value);
    }
  }
  return out;
}

}  // namespace drrkit
