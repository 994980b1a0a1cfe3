#pragma once

#include <cstdint>
#include <random>

#include "drrkit/projector.hpp"
#include "drrkit/volume.hpp"

namespace drrkit::gen {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
inline std::size_t uniform_int(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline GridGeometry random_grid(Rng& rng, std::size_t lo, std::size_t hi) {
  GridGeometry g;
  g.dims = {uniform_int(rng, lo, hi), uniform_int(rng, lo, hi), uniform_int(rng, lo, hi)};
  g.spacing = {uniform(rng, 0.6, 1.8), uniform(rng, 0.6, 1.8), uniform(rng, 0.6, 1.8)};
  g.origin = {uniform(rng, -20, 20), uniform(rng, -20, 20), uniform(rng, -20, 20)};
  return g;
}

inline Volume random_volume(Rng& rng, const GridGeometry& g, double lo = 0.0, double hi = 1.0) {
  Volume v(g);
  for (auto& e : v.data()) e = uniform(rng, lo, hi);
  return v;
}

inline Mask random_mask(Rng& rng, const GridGeometry& g, double density) {
  Mask m(g);
  std::bernoulli_distribution d(density);
  for (auto& e : m.data()) e = d(rng) ? 1 : 0;
  return m;
}

/// Union of a few random axis-aligned boxes; gives masks with real surfaces.
inline Mask random_blobs(Rng& rng, const GridGeometry& g, int count) {
  Mask m(g);
  const Dims3 d = g.dims;
  for (int b = 0; b < count; ++b) {
    const std::size_t z0 = uniform_int(rng, 0, d.depth - 1), z1 = uniform_int(rng, z0, d.depth - 1);
    const std::size_t y0 = uniform_int(rng, 0, d.height - 1), y1 = uniform_int(rng, y0, d.height - 1);
    const std::size_t x0 = uniform_int(rng, 0, d.width - 1), x1 = uniform_int(rng, x0, d.width - 1);
    for (std::size_t z = z0; z <= z1; ++z)
      for (std::size_t y = y0; y <= y1; ++y)
        for (std::size_t x = x0; x <= x1; ++x) m.at(z, y, x) = 1;
  }
  return m;
}

inline ViewPose random_pose(Rng& rng, double max_shift) {
  return {{uniform(rng, -3.2, 3.2), uniform(rng, -1.5, 1.5), uniform(rng, -3.2, 3.2)},
          {uniform(rng, -max_shift, max_shift), uniform(rng, -max_shift, max_shift),
           uniform(rng, -max_shift, max_shift)}};
}

/// Detector sized so a posed grid of this extent mostly lands on it.
inline ProjectionGeometry random_projection(Rng& rng, const GridGeometry& grid, ProjectionMode mode,
                                            std::size_t rows, std::size_t cols) {
  ProjectionGeometry g = default_geometry(grid, mode, rows, cols);
  g.source_to_isocenter = uniform(rng, 80.0, 150.0);
  g.source_to_detector = g.source_to_isocenter + uniform(rng, 60.0, 200.0);
  const Vec3 e = grid.extent();
  const double span = 1.2 * std::sqrt(e.x * e.x + e.y * e.y + e.z * e.z) *
                      (mode == ProjectionMode::ConeBeam ? g.source_to_detector / g.source_to_isocenter : 1.0);
  g.row_spacing = span / static_cast<double>(rows);
  g.col_spacing = span / static_cast<double>(cols);
  g.ray_step = uniform(rng, 0.3, 1.0);
  return g;
}

}  // namespace drrkit::gen
