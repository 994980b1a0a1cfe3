#include <cmath>

#include "ray_math.hpp"

namespace drrkit::simd {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_sq_diff_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double sum_abs_diff_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::fabs(a[i] - b[i]);
  return s;
}

void axpy_scalar(double* y, const double* x, double alpha, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double ray_integrate_scalar(const VolumeView& vol, const RaySegment& ray) {
  double sum = 0.0;
  detail::Corners cs;
  for (std::int64_t k = ray.k_begin; k < ray.k_end; ++k) {
    if (detail::sample_corners(vol.nx, vol.ny, vol.nz, ray, k, cs)) sum += detail::sample_value(vol, cs);
  }
  return sum;
}

void ray_scatter_scalar(double* out, std::int64_t nx, std::int64_t ny, std::int64_t nz, const RaySegment& ray,
                        double value) {
  detail::Corners cs;
  for (std::int64_t k = ray.k_begin; k < ray.k_end; ++k) {
    if (!detail::sample_corners(nx, ny, nz, ray, k, cs)) continue;
    for (int c = 0; c < 8; ++c) out[cs.index[c]] += value * cs.weight[c];
  }
}

}  // namespace

namespace detail {
const KernelTable scalar_table{Isa::Scalar,         dot_scalar,           sum_sq_diff_scalar, sum_abs_diff_scalar,
                               axpy_scalar,         ray_integrate_scalar, ray_scatter_scalar};
}

}  // namespace drrkit::simd
