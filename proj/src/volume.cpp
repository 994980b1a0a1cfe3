#include "drrkit/volume.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "drrkit/error.hpp"
#include "drrkit/parallel.hpp"

namespace drrkit {

void GridGeometry::validate() const {
  if (dims.depth == 0) throw Error(ErrorCode::InvalidArgument, "dims.depth", "must be >= 1");
  if (dims.height == 0) throw Error(ErrorCode::InvalidArgument, "dims.height", "must be >= 1");
  if (dims.width == 0) throw Error(ErrorCode::InvalidArgument, "dims.width", "must be >= 1");
  if (!(spacing.x > 0.0) || !std::isfinite(spacing.x))
    throw Error(ErrorCode::InvalidArgument, "spacing.x", "must be finite and > 0");
  if (!(spacing.y > 0.0) || !std::isfinite(spacing.y))
    throw Error(ErrorCode::InvalidArgument, "spacing.y", "must be finite and > 0");
  if (!(spacing.z > 0.0) || !std::isfinite(spacing.z))
    throw Error(ErrorCode::InvalidArgument, "spacing.z", "must be finite and > 0");
  if (!std::isfinite(origin.x) || !std::isfinite(origin.y) || !std::isfinite(origin.z))
    throw Error(ErrorCode::InvalidArgument, "origin", "must be finite");
}

Volume::Volume(const GridGeometry& geometry, double fill) : geometry_(geometry) {
  geometry_.validate();
  if (!std::isfinite(fill)) throw Error(ErrorCode::InvalidArgument, "fill", "must be finite");
  data_.assign(geometry_.voxel_count(), fill);
}

Volume::Volume(const GridGeometry& geometry, std::vector<double> data)
    : geometry_(geometry), data_(std::move(data)) {
  geometry_.validate();
  if (data_.size() != geometry_.voxel_count())
    throw Error(ErrorCode::DataSizeMismatch, "data",
                std::to_string(data_.size()) + " values for " + std::to_string(geometry_.voxel_count()) + " voxels");
  if (!std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); }))
    throw Error(ErrorCode::InvalidArgument, "data", "non-finite voxel value");
}

Mask::Mask(const GridGeometry& geometry, std::uint8_t fill) : geometry_(geometry) {
  geometry_.validate();
  data_.assign(geometry_.voxel_count(), fill ? 1 : 0);
}

Mask::Mask(const GridGeometry& geometry, std::vector<std::uint8_t> data)
    : geometry_(geometry), data_(std::move(data)) {
  geometry_.validate();
  if (data_.size() != geometry_.voxel_count())
    throw Error(ErrorCode::DataSizeMismatch, "data",
                std::to_string(data_.size()) + " values for " + std::to_string(geometry_.voxel_count()) + " voxels");
  for (auto& b : data_) b = b ? 1 : 0;
}

std::size_t Mask::count() const {
  return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), std::uint8_t{1}));
}

namespace {

void require_same_geometry(const Mask& a, const Mask& b) {
  if (!(a.geometry() == b.geometry())) throw Error(ErrorCode::GeometryMismatch, "mask", "mask geometries differ");
}

template <class Op>
Mask combine(const Mask& a, const Mask& b, Op op) {
  require_same_geometry(a, b);
  Mask out(a.geometry());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = op(a[i], b[i]) ? 1 : 0;
  return out;
}

}  // namespace

Mask mask_union(const Mask& a, const Mask& b) {
  return combine(a, b, [](auto x, auto y) { return x | y; });
}

Mask mask_intersection(const Mask& a, const Mask& b) {
  return combine(a, b, [](auto x, auto y) { return x & y; });
}

Mask mask_complement(const Mask& a) {
  Mask out(a.geometry());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] ? 0 : 1;
  return out;
}

bool mask_subset(const Mask& inner, const Mask& outer) {
  require_same_geometry(inner, outer);
  for (std::size_t i = 0; i < inner.size(); ++i)
    if (inner[i] && !outer[i]) return false;
  return true;
}

ImageGrid2D::ImageGrid2D(std::size_t rows, std::size_t cols, double row_spacing, double col_spacing, double fill)
    : rows_(rows), cols_(cols), row_spacing_(row_spacing), col_spacing_(col_spacing) {
  if (rows == 0) throw Error(ErrorCode::InvalidArgument, "rows", "must be >= 1");
  if (cols == 0) throw Error(ErrorCode::InvalidArgument, "cols", "must be >= 1");
  if (!(row_spacing > 0.0)) throw Error(ErrorCode::InvalidArgument, "row_spacing", "must be > 0");
  if (!(col_spacing > 0.0)) throw Error(ErrorCode::InvalidArgument, "col_spacing", "must be > 0");
  data_.assign(rows * cols, fill);
}

Volume hu_to_attenuation(const Volume& hu, double mu_water) {
  if (!(mu_water > 0.0)) throw Error(ErrorCode::InvalidArgument, "mu_water", "must be > 0");
  Volume out(hu.geometry());
  auto src = hu.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = std::max(0.0, mu_water * (1.0 + src[i] / 1000.0));
  return out;
}

Volume attenuation_to_hu(const Volume& mu, double mu_water) {
  if (!(mu_water > 0.0)) throw Error(ErrorCode::InvalidArgument, "mu_water", "must be > 0");
  Volume out(mu.geometry());
  auto src = mu.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = 1000.0 * (src[i] / mu_water - 1.0);
  return out;
}

namespace {

struct AxisWeights {
  std::size_t lo = 0;
  std::size_t hi = 0;
  double frac = 0.0;
};

// Clamp-to-edge inside [-0.5, n-0.5]; caller has already rejected outside.
inline AxisWeights axis_weights(double p, std::size_t n) {
  const double last = static_cast<double>(n - 1);
  const double c = std::min(std::max(p, 0.0), last);
  const double f = std::floor(c);
  AxisWeights w;
  w.lo = static_cast<std::size_t>(f);
  w.hi = std::min(w.lo + 1, n - 1);
  w.frac = c - f;
  return w;
}

inline bool inside_box(double p, std::size_t n) { return p >= -0.5 && p <= static_cast<double>(n) - 0.5; }

inline double lerp(double a, double b, double t) { return a + t * (b - a); }

}  // namespace

double sample_trilinear(const Volume& v, double z, double y, double x) {
  const Dims3& d = v.dims();
  if (!inside_box(z, d.depth) || !inside_box(y, d.height) || !inside_box(x, d.width)) return 0.0;
  const AxisWeights wz = axis_weights(z, d.depth);
  const AxisWeights wy = axis_weights(y, d.height);
  const AxisWeights wx = axis_weights(x, d.width);
  const GridGeometry& g = v.geometry();
  auto row = [&](std::size_t zi, std::size_t yi) {
    return lerp(v[g.linear(zi, yi, wx.lo)], v[g.linear(zi, yi, wx.hi)], wx.frac);
  };
  const double c0 = lerp(row(wz.lo, wy.lo), row(wz.lo, wy.hi), wy.frac);
  const double c1 = lerp(row(wz.hi, wy.lo), row(wz.hi, wy.hi), wy.frac);
  return lerp(c0, c1, wz.frac);
}

Volume resample_trilinear(const Volume& v, const Dims3& target) {
  if (target.depth == 0 || target.height == 0 || target.width == 0)
    throw Error(ErrorCode::InvalidArgument, "target_dims", "must be >= 1 on each axis");
  const GridGeometry& src = v.geometry();
  const Vec3 extent = src.extent();
  GridGeometry dst;
  dst.dims = target;
  dst.spacing = {extent.x / static_cast<double>(target.width), extent.y / static_cast<double>(target.height),
                 extent.z / static_cast<double>(target.depth)};
  // Same voxel-box lower corner as the source.
  const Vec3 box_min = src.origin - 0.5 * src.spacing;
  dst.origin = box_min + 0.5 * dst.spacing;

  // Output centre j maps to source index (j + 0.5) * n_src / n_dst - 0.5.
  const double rz = static_cast<double>(src.dims.depth) / static_cast<double>(target.depth);
  const double ry = static_cast<double>(src.dims.height) / static_cast<double>(target.height);
  const double rx = static_cast<double>(src.dims.width) / static_cast<double>(target.width);

  Volume out(dst);
  parallel_for(0, target.depth, [&](std::size_t z) {
    const double sz = (static_cast<double>(z) + 0.5) * rz - 0.5;
    for (std::size_t y = 0; y < target.height; ++y) {
      const double sy = (static_cast<double>(y) + 0.5) * ry - 0.5;
      for (std::size_t x = 0; x < target.width; ++x) {
        const double sx = (static_cast<double>(x) + 0.5) * rx - 0.5;
        out.at(z, y, x) = sample_trilinear(v, sz, sy, sx);
      }
    }
  });
  return out;
}

}  // namespace drrkit
