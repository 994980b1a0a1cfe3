#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

/// Data-parallel inner loops with a scalar reference implementation and
/// optional SIMD variants chosen at runtime.
///
/// Ray sampling contract shared by every variant: sample k of a ray sits at
/// index-space position p(k) = base + k * dir (computed as one multiply and
/// one add per axis, never fused). A sample contributes only when
/// -0.5 <= p <= n - 0.5 on every axis. Inside that box the position is
/// clamped to [0, n-1] and interpolated trilinearly; corner weights are
/// (wz * wy) * wx and corners are visited with x varying fastest. The
/// per-sample value is therefore bit-identical across variants; only the
/// order in which samples are accumulated along the ray may differ.
namespace drrkit::simd {

enum class Isa { Scalar, Avx2 };

std::string_view to_string(Isa isa);

/// True if the variant was compiled in and the CPU supports it.
bool isa_available(Isa isa);

/// Best available variant, honouring DRRKIT_ISA=scalar|avx2 when set.
Isa preferred_isa();

/// Process-wide selection; initialised from preferred_isa().
Isa active_isa();
/// Throws drrkit::Error(InvalidArgument) if `isa` is not available.
void set_active_isa(Isa isa);

struct VolumeView {
  const double* data = nullptr;
  std::int64_t nx = 0, ny = 0, nz = 0;
};

struct RaySegment {
  double base[3] = {0, 0, 0};  // x, y, z in voxel-index units
  double dir[3] = {0, 0, 0};
  std::int64_t k_begin = 0;  // samples k in [k_begin, k_end)
  std::int64_t k_end = 0;
};

struct KernelTable {
  Isa isa;
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum_sq_diff)(const double* a, const double* b, std::size_t n);
  double (*sum_abs_diff)(const double* a, const double* b, std::size_t n);
  /// y += alpha * x
  void (*axpy)(double* y, const double* x, double alpha, std::size_t n);
  /// Sum of interpolated samples along the ray (no step factor).
  double (*ray_integrate)(const VolumeView& vol, const RaySegment& ray);
  /// Adjoint of ray_integrate: adds value * weight into every corner touched.
  void (*ray_scatter)(double* out, std::int64_t nx, std::int64_t ny, std::int64_t nz, const RaySegment& ray,
                      double value);
};

const KernelTable& kernels();
const KernelTable& kernels(Isa isa);

}  // namespace drrkit::simd
