#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "drrkit/simd/kernels.hpp"

namespace drrkit::simd::detail {

// Defined by the per-ISA translation units.
extern const KernelTable scalar_table;
extern const KernelTable avx2_table;

struct Corners {
  std::int64_t index[8];
  double weight[8];
};

// Scalar reference for one sample; returns false when outside the voxel box.
inline bool sample_corners(std::int64_t nx, std::int64_t ny, std::int64_t nz, const RaySegment& ray, std::int64_t k,
                           Corners& out) {
  const double kd = static_cast<double>(k);
  const double p[3] = {ray.base[0] + kd * ray.dir[0], ray.base[1] + kd * ray.dir[1], ray.base[2] + kd * ray.dir[2]};
  const std::int64_t n[3] = {nx, ny, nz};
  std::int64_t lo[3], hi[3];
  double f[3], g[3];
  for (int a = 0; a < 3; ++a) {
    const double last = static_cast<double>(n[a] - 1);
    if (!(p[a] >= -0.5 && p[a] <= last + 0.5)) return false;
    const double c = std::min(std::max(p[a], 0.0), last);
    const double fl = std::floor(c);
    lo[a] = static_cast<std::int64_t>(fl);
    hi[a] = std::min<std::int64_t>(lo[a] + 1, n[a] - 1);
    f[a] = c - fl;
    g[a] = 1.0 - f[a];
  }
  for (int c = 0; c < 8; ++c) {
    const bool bx = c & 1, by = c & 2, bz = c & 4;
    const std::int64_t ix = bx ? hi[0] : lo[0];
    const std::int64_t iy = by ? hi[1] : lo[1];
    const std::int64_t iz = bz ? hi[2] : lo[2];
    out.index[c] = (iz * ny + iy) * nx + ix;
    out.weight[c] = ((bz ? f[2] : g[2]) * (by ? f[1] : g[1])) * (bx ? f[0] : g[0]);
  }
  return true;
}

inline double sample_value(const VolumeView& vol, const Corners& cs) {
  double s = 0.0;
  for (int c = 0; c < 8; ++c) s += cs.weight[c] * vol.data[cs.index[c]];
  return s;
}

}  // namespace drrkit::simd::detail
