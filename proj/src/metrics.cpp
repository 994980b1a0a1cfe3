#include "drrkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "drrkit/error.hpp"
#include "drrkit/morphology.hpp"
#include "drrkit/parallel.hpp"
#include "drrkit/simd/kernels.hpp"

namespace drrkit {

namespace {

void require_same_dims(const Volume& a, const Volume& b) {
  if (!(a.dims() == b.dims())) throw Error(ErrorCode::GeometryMismatch, "volume", "operand dims differ");
}

void require_same_geometry(const Mask& a, const Mask& b) {
  if (!(a.geometry() == b.geometry())) throw Error(ErrorCode::GeometryMismatch, "mask", "mask geometries differ");
}

}  // namespace

double cosine_similarity(const Volume& a, const Volume& b) {
  require_same_dims(a, b);
  const auto& k = simd::kernels();
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  const double aa = k.dot(pa, pa, a.size());
  const double bb = k.dot(pb, pb, b.size());
  if (!(aa > 0.0) || !(bb > 0.0)) throw Error(ErrorCode::UndefinedMetric, "cs", "zero-norm operand");
  const double c = k.dot(pa, pb, a.size()) / (std::sqrt(aa) * std::sqrt(bb));
  return std::clamp(c, -1.0, 1.0);
}

double psnr(const Volume& a, const Volume& b, double data_range) {
  require_same_dims(a, b);
  if (!(data_range > 0.0)) throw Error(ErrorCode::InvalidArgument, "data_range", "must be > 0");
  const double mse = simd::kernels().sum_sq_diff(a.data().data(), b.data().data(), a.size()) /
                     static_cast<double>(a.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(data_range * data_range / mse);
}

namespace {

// Sums over every fully contained w-window along one axis. `in` has dims
// (d0 slow, d1, d2 fast); axis 0/1/2 selects which extent shrinks.
std::vector<double> box_sum_axis(const std::vector<double>& in, const std::size_t dims[3], int axis, std::size_t w,
                                 std::size_t out_dims[3]) {
  for (int i = 0; i < 3; ++i) out_dims[i] = dims[i];
  out_dims[axis] = dims[axis] - w + 1;
  std::vector<double> out(out_dims[0] * out_dims[1] * out_dims[2], 0.0);
  const auto& k = simd::kernels();
  if (axis == 2) {
    const std::size_t rows = dims[0] * dims[1];
    parallel_for(0, rows, [&](std::size_t r) {
      const double* src = in.data() + r * dims[2];
      double* dst = out.data() + r * out_dims[2];
      for (std::size_t j = 0; j < w; ++j) k.axpy(dst, src + j, 1.0, out_dims[2]);
    });
  } else if (axis == 1) {
    parallel_for(0, dims[0], [&](std::size_t z) {
      for (std::size_t y = 0; y < out_dims[1]; ++y) {
        double* dst = out.data() + (z * out_dims[1] + y) * dims[2];
        for (std::size_t j = 0; j < w; ++j) k.axpy(dst, in.data() + (z * dims[1] + y + j) * dims[2], 1.0, dims[2]);
      }
    });
  } else {
    const std::size_t plane = dims[1] * dims[2];
    parallel_for(0, out_dims[0], [&](std::size_t z) {
      double* dst = out.data() + z * plane;
      for (std::size_t j = 0; j < w; ++j) k.axpy(dst, in.data() + (z + j) * plane, 1.0, plane);
    });
  }
  return out;
}

std::vector<double> box_sum(std::vector<double> f, const Dims3& d, std::size_t w) {
  std::size_t dims[3] = {d.depth, d.height, d.width};
  std::size_t next[3];
  for (int axis : {2, 1, 0}) {
    f = box_sum_axis(f, dims, axis, w, next);
    std::copy(next, next + 3, dims);
  }
  return f;
}

}  // namespace

double ssim(const Volume& a, const Volume& b, const SsimParams& params) {
  require_same_dims(a, b);
  const Dims3 d = a.dims();
  const std::size_t w = params.window;
  if (w == 0) throw Error(ErrorCode::InvalidArgument, "window", "must be >= 1");
  if (!(params.data_range > 0.0)) throw Error(ErrorCode::InvalidArgument, "data_range", "must be > 0");
  if (d.depth < w || d.height < w || d.width < w)
    throw Error(ErrorCode::InvalidArgument, "window", "volume is smaller than the SSIM window");

  const std::size_t n = a.size();
  std::vector<double> fa(a.data().begin(), a.data().end());
  std::vector<double> fb(b.data().begin(), b.data().end());
  std::vector<double> faa(n), fbb(n), fab(n);
  for (std::size_t i = 0; i < n; ++i) {
    faa[i] = fa[i] * fa[i];
    fbb[i] = fb[i] * fb[i];
    fab[i] = fa[i] * fb[i];
  }
  const auto sa = box_sum(std::move(fa), d, w);
  const auto sb = box_sum(std::move(fb), d, w);
  const auto saa = box_sum(std::move(faa), d, w);
  const auto sbb = box_sum(std::move(fbb), d, w);
  const auto sab = box_sum(std::move(fab), d, w);

  const double inv_n = 1.0 / static_cast<double>(w * w * w);
  const double c1 = (0.01 * params.data_range) * (0.01 * params.data_range);
  const double c2 = (0.03 * params.data_range) * (0.03 * params.data_range);
  double total = 0.0;
  for (std::size_t i = 0; i < sa.size(); ++i) {
    const double ma = sa[i] * inv_n, mb = sb[i] * inv_n;
    const double va = saa[i] * inv_n - ma * ma;
    const double vb = sbb[i] * inv_n - mb * mb;
    const double cov = sab[i] * inv_n - ma * mb;
    total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
  }
  return total / static_cast<double>(sa.size());
}

namespace {

struct Overlap {
  std::size_t a = 0, b = 0, both = 0;
};

Overlap overlap(const Mask& a, const Mask& b) {
  require_same_geometry(a, b);
  Overlap o;
  for (std::size_t i = 0; i < a.size(); ++i) {
    o.a += a[i];
    o.b += b[i];
    o.both += a[i] & b[i];
  }
  return o;
}

}  // namespace

double dice(const Mask& a, const Mask& b) {
  const Overlap o = overlap(a, b);
  if (o.a + o.b == 0) return 1.0;
  return 2.0 * static_cast<double>(o.both) / static_cast<double>(o.a + o.b);
}

double jaccard(const Mask& a, const Mask& b) {
  const Overlap o = overlap(a, b);
  const std::size_t uni = o.a + o.b - o.both;
  if (uni == 0) return 1.0;
  return static_cast<double>(o.both) / static_cast<double>(uni);
}

Mask surface_of(const Mask& m) {
  const Dims3 d = m.dims();
  Mask out(m.geometry());
  for (std::size_t z = 0; z < d.depth; ++z)
    for (std::size_t y = 0; y < d.height; ++y)
      for (std::size_t x = 0; x < d.width; ++x) {
        if (!m.at(z, y, x)) continue;
        const bool edge = z == 0 || y == 0 || x == 0 || z + 1 == d.depth || y + 1 == d.height || x + 1 == d.width;
        const bool exposed = edge || !m.at(z - 1, y, x) || !m.at(z + 1, y, x) || !m.at(z, y - 1, x) ||
                             !m.at(z, y + 1, x) || !m.at(z, y, x - 1) || !m.at(z, y, x + 1);
        out.at(z, y, x) = exposed ? 1 : 0;
      }
  return out;
}

namespace {

// Distances (mm) from each surface voxel of `from` to the surface of `to`.
std::vector<double> directed_distances(const Mask& from_surface, const Mask& to_surface) {
  const auto dist2 = squared_distance_transform(to_surface, from_surface.geometry().spacing);
  std::vector<double> out;
  for (std::size_t i = 0; i < from_surface.size(); ++i)
    if (from_surface[i]) out.push_back(std::sqrt(dist2[i]));
  return out;
}

double nearest_rank_p95(std::vector<double> d) {
  std::sort(d.begin(), d.end());
  const std::size_t rank = (95 * d.size() + 99) / 100;  // ceil(0.95 n), 1-based
  return d[rank - 1];
}

double mean(const std::vector<double>& d) {
  double s = 0.0;
  for (double x : d) s += x;
  return s / static_cast<double>(d.size());
}

}  // namespace

SurfaceDistances surface_distances(const Mask& a, const Mask& b) {
  require_same_geometry(a, b);
  if (a.empty()) throw Error(ErrorCode::UndefinedMetric, "a", "empty mask");
  if (b.empty()) throw Error(ErrorCode::UndefinedMetric, "b", "empty mask");
  const Mask sa = surface_of(a);
  const Mask sb = surface_of(b);
  const auto ab = directed_distances(sa, sb);
  const auto ba = directed_distances(sb, sa);
  SurfaceDistances out;
  out.hd95 = std::max(nearest_rank_p95(ab), nearest_rank_p95(ba));
  out.asd = 0.5 * (mean(ab) + mean(ba));
  return out;
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw Error(ErrorCode::InvalidArgument, "ys", "series lengths differ");
  if (xs.size() < 2) throw Error(ErrorCode::InvalidArgument, "xs", "need at least two samples");
  const std::size_t n = xs.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  std::vector<double> cx(n), cy(n);
  for (std::size_t i = 0; i < n; ++i) {
    cx[i] = xs[i] - mx;
    cy[i] = ys[i] - my;
  }
  const auto& k = simd::kernels();
  const double sxx = k.dot(cx.data(), cx.data(), n);
  const double syy = k.dot(cy.data(), cy.data(), n);
  if (!(sxx > 0.0)) throw Error(ErrorCode::UndefinedMetric, "xs", "constant series");
  if (!(syy > 0.0)) throw Error(ErrorCode::UndefinedMetric, "ys", "constant series");
  const double r = k.dot(cx.data(), cy.data(), n) / (std::sqrt(sxx) * std::sqrt(syy));
  return std::clamp(r, -1.0, 1.0);
}

double occupancy_ratio(double air_ml, double right_lung_ml, double left_lung_ml) {
  const double denom = air_ml + right_lung_ml + left_lung_ml;
  return denom > 0.0 ? air_ml / denom : 0.0;
}

QuantReport quantify(const SegResult& seg) {
  const double voxel_ml = seg.pneumothorax.geometry().voxel_volume_ml();
  std::size_t right = 0, left = 0, air = 0;
  for (std::size_t i = 0; i < seg.pneumothorax.size(); ++i) {
    const bool ptx = seg.pneumothorax[i] != 0;
    air += ptx;
    if (!ptx) {
      right += seg.right_lung[i];
      left += seg.left_lung[i];
    }
  }
  QuantReport q;
  q.right_lung_ml = static_cast<double>(right) * voxel_ml;
  q.left_lung_ml = static_cast<double>(left) * voxel_ml;
  q.air_ml = static_cast<double>(air) * voxel_ml;
  q.occupancy = occupancy_ratio(q.air_ml, q.right_lung_ml, q.left_lung_ml);
  return q;
}

}  // namespace drrkit
