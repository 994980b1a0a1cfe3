#include "drrkit/morphology.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "drrkit/error.hpp"
#include "drrkit/parallel.hpp"

namespace drrkit {

Mask threshold(const Volume& v, double t, ThresholdSense sense) {
  Mask out(v.geometry());
  auto src = v.data();
  for (std::size_t i = 0; i < src.size(); ++i)
    out[i] = (sense == ThresholdSense::Below ? src[i] < t : src[i] >= t) ? 1 : 0;
  return out;
}

Connectivity connectivity_from(int n) {
  switch (n) {
    case 6: return Connectivity::Six;
    case 18: return Connectivity::Eighteen;
    case 26: return Connectivity::TwentySix;
    default: throw Error(ErrorCode::InvalidArgument, "connectivity", "must be 6, 18 or 26, got " + std::to_string(n));
  }
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Squared distance transform of one line in place. f holds 0 at features,
// +inf elsewhere on the first pass and squared partial distances after.
void edt_line(double* f, std::size_t n, std::size_t stride, double w, std::vector<double>& buf_f,
              std::vector<std::size_t>& v, std::vector<double>& z) {
  buf_f.resize(n);
  for (std::size_t i = 0; i < n; ++i) buf_f[i] = f[i * stride];
  v.resize(n);
  z.resize(n + 1);
  std::size_t k = 0;
  bool any = false;
  for (std::size_t q = 0; q < n; ++q) {
    if (buf_f[q] == kInf) continue;
    const double xq = static_cast<double>(q) * w;
    if (!any) {
      v[0] = q;
      z[0] = -kInf;
      z[1] = kInf;
      k = 0;
      any = true;
      continue;
    }
    double s;
    while (true) {
      const double xv = static_cast<double>(v[k]) * w;
      s = ((buf_f[q] + xq * xq) - (buf_f[v[k]] + xv * xv)) / (2.0 * (xq - xv));
      if (s <= z[k] && k > 0) {
        --k;
        continue;
      }
      break;
    }
    if (s <= z[k]) {
      // k == 0 and the new parabola dominates everywhere.
      v[0] = q;
      z[0] = -kInf;
      z[1] = kInf;
      continue;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  if (!any) return;
  k = 0;
  for (std::size_t q = 0; q < n; ++q) {
    const double xq = static_cast<double>(q) * w;
    while (z[k + 1] < xq) ++k;
    const double d = xq - static_cast<double>(v[k]) * w;
    f[q * stride] = d * d + buf_f[v[k]];
  }
}

}  // namespace

std::vector<double> squared_distance_transform(const Mask& features, Vec3 scale) {
  const Dims3 d = features.dims();
  std::vector<double> dist(features.size());
  for (std::size_t i = 0; i < dist.size(); ++i) dist[i] = features[i] ? 0.0 : kInf;
  const std::size_t W = d.width, H = d.height, D = d.depth;
  double* base = dist.data();

  auto pass = [&](std::size_t lines, auto line_start, std::size_t n, std::size_t stride, double w) {
    parallel_for(0, lines, [&](std::size_t l) {
      std::vector<double> buf;
      std::vector<std::size_t> v;
      std::vector<double> z;
      edt_line(base + line_start(l), n, stride, w, buf, v, z);
    });
  };
  pass(D * H, [&](std::size_t l) { return l * W; }, W, 1, scale.x);
  pass(D * W, [&](std::size_t l) { return (l / W) * H * W + (l % W); }, H, W, scale.y);
  pass(H * W, [&](std::size_t l) { return l; }, D, H * W, scale.z);
  return dist;
}

Mask dilate_ball(const Mask& m, int radius) {
  if (radius < 0) throw Error(ErrorCode::InvalidArgument, "radius", "must be >= 0");
  if (radius == 0) return m;
  const auto dist = squared_distance_transform(m);
  const double r2 = static_cast<double>(radius) * radius;
  Mask out(m.geometry());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = dist[i] <= r2 ? 1 : 0;
  return out;
}

Mask erode_ball(const Mask& m, int radius) {
  if (radius < 0) throw Error(ErrorCode::InvalidArgument, "radius", "must be >= 0");
  if (radius == 0) return m;
  const auto dist = squared_distance_transform(mask_complement(m));
  const double r2 = static_cast<double>(radius) * radius;
  Mask out(m.geometry());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = dist[i] > r2 ? 1 : 0;
  return out;
}

Mask morph_close_3d(const Mask& m, int radius) {
  if (radius < 0) throw Error(ErrorCode::InvalidArgument, "radius", "must be >= 0");
  if (radius == 0) return m;
  // Work on a copy padded with r background voxels per side so the dilation
  // is not clipped; every voxel of the crop then sees its whole ball.
  const auto r = static_cast<std::size_t>(radius);
  const Dims3 d = m.dims();
  GridGeometry padded_geometry;
  padded_geometry.dims = {d.depth + 2 * r, d.height + 2 * r, d.width + 2 * r};
  Mask padded(padded_geometry);
  for (std::size_t z = 0; z < d.depth; ++z)
    for (std::size_t y = 0; y < d.height; ++y)
      std::copy_n(&m.data()[m.geometry().linear(z, y, 0)], d.width, &padded.data()[padded_geometry.linear(z + r, y + r, r)]);
  const Mask closed = erode_ball(dilate_ball(padded, radius), radius);
  Mask out(m.geometry());
  for (std::size_t z = 0; z < d.depth; ++z)
    for (std::size_t y = 0; y < d.height; ++y)
      std::copy_n(&closed.data()[padded_geometry.linear(z + r, y + r, r)], d.width, &out.data()[m.geometry().linear(z, y, 0)]);
  return out;
}

namespace {

std::vector<std::array<int, 3>> neighbour_offsets(Connectivity conn) {
  std::vector<std::array<int, 3>> out;
  for (int dz = -1; dz <= 1; ++dz)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const int manhattan = std::abs(dz) + std::abs(dy) + std::abs(dx);
        if (manhattan == 0) continue;
        if (conn == Connectivity::Six && manhattan > 1) continue;
        if (conn == Connectivity::Eighteen && manhattan > 2) continue;
        out.push_back({dz, dy, dx});
      }
  return out;
}

// Breadth-first fill of voxels equal to `value` starting at `start`; writes
// `label` into `labels` and returns the component size.
std::size_t flood(const Mask& m, std::size_t start, std::uint8_t value, std::int32_t label,
                  const std::vector<std::array<int, 3>>& offsets, std::vector<std::int32_t>& labels,
                  std::vector<std::size_t>& queue) {
  const Dims3 d = m.dims();
  const auto W = static_cast<long>(d.width), H = static_cast<long>(d.height), D = static_cast<long>(d.depth);
  queue.clear();
  queue.push_back(start);
  labels[start] = label;
  std::size_t head = 0;
  while (head < queue.size()) {
    const std::size_t i = queue[head++];
    const long x = static_cast<long>(i % d.width);
    const long y = static_cast<long>((i / d.width) % d.height);
    const long z = static_cast<long>(i / (d.width * d.height));
    for (const auto& o : offsets) {
      const long nz = z + o[0], ny = y + o[1], nx = x + o[2];
      if (nz < 0 || ny < 0 || nx < 0 || nz >= D || ny >= H || nx >= W) continue;
      const auto j = static_cast<std::size_t>((nz * H + ny) * W + nx);
      if (labels[j] != 0 || m[j] != value) continue;
      labels[j] = label;
      queue.push_back(j);
    }
  }
  return queue.size();
}

}  // namespace

Mask region_grow(const Mask& m, VoxelIndex seed, Connectivity conn) {
  const Dims3 d = m.dims();
  if (seed.z >= d.depth || seed.y >= d.height || seed.x >= d.width)
    throw Error(ErrorCode::InvalidArgument, "seed",
                "(" + std::to_string(seed.z) + "," + std::to_string(seed.y) + "," + std::to_string(seed.x) +
                    ") is outside the grid");
  const std::size_t start = m.geometry().linear(seed.z, seed.y, seed.x);
  std::vector<std::int32_t> labels(m.size(), 0);
  std::vector<std::size_t> queue;
  flood(m, start, m[start], 1, neighbour_offsets(conn), labels, queue);
  Mask out(m.geometry());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = labels[i] ? 1 : 0;
  return out;
}

ComponentLabels label_components(const Mask& m, Connectivity conn) {
  ComponentLabels out;
  out.labels.assign(m.size(), 0);
  const auto offsets = neighbour_offsets(conn);
  std::vector<std::size_t> queue;
  std::int32_t next = 0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (!m[i] || out.labels[i]) continue;
    out.sizes.push_back(flood(m, i, 1, ++next, offsets, out.labels, queue));
  }
  return out;
}

Mask measure_components(const Mask& m, Connectivity conn, double v_t_ml) {
  if (!(v_t_ml >= 0.0)) throw Error(ErrorCode::InvalidArgument, "v_t", "must be >= 0");
  const ComponentLabels comps = label_components(m, conn);
  const double voxel_ml = m.geometry().voxel_volume_ml();
  std::vector<std::uint8_t> keep(comps.sizes.size() + 1, 0);
  for (std::size_t l = 0; l < comps.sizes.size(); ++l)
    keep[l + 1] = static_cast<double>(comps.sizes[l]) * voxel_ml > v_t_ml ? 1 : 0;
  Mask out(m.geometry());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = keep[static_cast<std::size_t>(comps.labels[i])];
  return out;
}

}  // namespace drrkit
