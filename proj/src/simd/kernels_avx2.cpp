// Compiled with -mavx2 only; reached through the dispatch table after a
// runtime CPU check.
#include <immintrin.h>

#include <cmath>
#include <limits>

#include "ray_math.hpp"

namespace drrkit::simd {

namespace {

// Fixed reduction order: (l0 + l1) + (l2 + l3).
inline double hsum(__m256d v) {
  alignas(32) double l[4];
  _mm256_store_pd(l, v);
  return (l[0] + l[1]) + (l[2] + l[3]);
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  double s = hsum(acc);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_sq_diff_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double sum_abs_diff_avx2(const double* a, const double* b, std::size_t n) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, _mm256_andnot_pd(sign, d));
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += std::fabs(a[i] - b[i]);
  return s;
}

void axpy_avx2(double* y, const double* x, double alpha, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), _mm256_mul_pd(va, _mm256_loadu_pd(x + i))));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

struct Corners4 {
  __m128i index[8];
  __m256d weight[8];
  __m256d valid;
};

struct AxisLanes {
  __m128i lo, hi;
  __m256d f, g;
};

// Mirrors detail::sample_corners lane by lane.
inline void corners4(const std::int64_t n[3], const RaySegment& ray, std::int64_t k, Corners4& out) {
  const __m256d kd = _mm256_add_pd(_mm256_set1_pd(static_cast<double>(k)), _mm256_set_pd(3.0, 2.0, 1.0, 0.0));
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d lower = _mm256_set1_pd(-0.5);
  __m256d valid = _mm256_castsi256_pd(_mm256_set1_epi64x(-1));
  AxisLanes ax[3];
  for (int a = 0; a < 3; ++a) {
    const double last = static_cast<double>(n[a] - 1);
    const __m256d p = _mm256_add_pd(_mm256_set1_pd(ray.base[a]), _mm256_mul_pd(kd, _mm256_set1_pd(ray.dir[a])));
    valid = _mm256_and_pd(valid, _mm256_cmp_pd(p, lower, _CMP_GE_OQ));
    valid = _mm256_and_pd(valid, _mm256_cmp_pd(p, _mm256_set1_pd(last + 0.5), _CMP_LE_OQ));
    const __m256d c = _mm256_min_pd(_mm256_max_pd(p, zero), _mm256_set1_pd(last));
    const __m256d fl = _mm256_floor_pd(c);
    ax[a].lo = _mm256_cvttpd_epi32(fl);
    ax[a].hi = _mm_min_epi32(_mm_add_epi32(ax[a].lo, _mm_set1_epi32(1)), _mm_set1_epi32(static_cast<int>(n[a] - 1)));
    ax[a].f = _mm256_sub_pd(c, fl);
    ax[a].g = _mm256_sub_pd(one, ax[a].f);
  }
  const __m128i vnx = _mm_set1_epi32(static_cast<int>(n[0]));
  const __m128i vny = _mm_set1_epi32(static_cast<int>(n[1]));
  for (int c = 0; c < 8; ++c) {
    const bool bx = c & 1, by = c & 2, bz = c & 4;
    const __m128i ix = bx ? ax[0].hi : ax[0].lo;
    const __m128i iy = by ? ax[1].hi : ax[1].lo;
    const __m128i iz = bz ? ax[2].hi : ax[2].lo;
    out.index[c] = _mm_add_epi32(_mm_mullo_epi32(_mm_add_epi32(_mm_mullo_epi32(iz, vny), iy), vnx), ix);
    out.weight[c] = _mm256_mul_pd(_mm256_mul_pd(bz ? ax[2].f : ax[2].g, by ? ax[1].f : ax[1].g), bx ? ax[0].f : ax[0].g);
  }
  out.valid = valid;
}

bool fits_int32(std::int64_t nx, std::int64_t ny, std::int64_t nz) {
  return nx * ny * nz <= std::numeric_limits<std::int32_t>::max();
}

double ray_integrate_avx2(const VolumeView& vol, const RaySegment& ray) {
  if (!fits_int32(vol.nx, vol.ny, vol.nz)) return detail::scalar_table.ray_integrate(vol, ray);
  const std::int64_t n[3] = {vol.nx, vol.ny, vol.nz};
  __m256d acc = _mm256_setzero_pd();
  Corners4 cs;
  std::int64_t k = ray.k_begin;
  for (; k + 4 <= ray.k_end; k += 4) {
    corners4(n, ray, k, cs);
    __m256d s = _mm256_setzero_pd();
    for (int c = 0; c < 8; ++c)
      s = _mm256_add_pd(s, _mm256_mul_pd(cs.weight[c], _mm256_i32gather_pd(vol.data, cs.index[c], 8)));
    acc = _mm256_add_pd(acc, _mm256_and_pd(s, cs.valid));
  }
  double sum = hsum(acc);
  detail::Corners tail;
  for (; k < ray.k_end; ++k)
    if (detail::sample_corners(vol.nx, vol.ny, vol.nz, ray, k, tail)) sum += detail::sample_value(vol, tail);
  return sum;
}

void ray_scatter_avx2(double* out, std::int64_t nx, std::int64_t ny, std::int64_t nz, const RaySegment& ray,
                      double value) {
  if (!fits_int32(nx, ny, nz)) return detail::scalar_table.ray_scatter(out, nx, ny, nz, ray, value);
  const std::int64_t n[3] = {nx, ny, nz};
  Corners4 cs;
  alignas(32) double w[8][4];
  alignas(16) std::int32_t idx[8][4];
  std::int64_t k = ray.k_begin;
  for (; k + 4 <= ray.k_end; k += 4) {
    corners4(n, ray, k, cs);
    const int valid = _mm256_movemask_pd(cs.valid);
    if (valid == 0) continue;
    for (int c = 0; c < 8; ++c) {
      _mm256_store_pd(w[c], cs.weight[c]);
      _mm_store_si128(reinterpret_cast<__m128i*>(idx[c]), cs.index[c]);
    }
    // Sample order, then corner order: same accumulation as the scalar path.
    for (int lane = 0; lane < 4; ++lane) {
      if (!(valid & (1 << lane))) continue;
      for (int c = 0; c < 8; ++c) out[idx[c][lane]] += value * w[c][lane];
    }
  }
  detail::Corners tail;
  for (; k < ray.k_end; ++k) {
    if (!detail::sample_corners(nx, ny, nz, ray, k, tail)) continue;
    for (int c = 0; c < 8; ++c) out[tail.index[c]] += value * tail.weight[c];
  }
}

}  // namespace

namespace detail {
const KernelTable avx2_table{Isa::Avx2, dot_avx2,           sum_sq_diff_avx2, sum_abs_diff_avx2,
                             axpy_avx2, ray_integrate_avx2, ray_scatter_avx2};
}

}  // namespace drrkit::simd
