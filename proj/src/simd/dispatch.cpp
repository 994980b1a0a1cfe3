#include <atomic>
#include <cstdlib>
#include <string>

#include "drrkit/error.hpp"
#include "drrkit/simd/kernels.hpp"

namespace drrkit::simd {

namespace detail {
extern const KernelTable scalar_table;
#ifdef DRRKIT_HAVE_AVX2
extern const KernelTable avx2_table;
#endif
}  // namespace detail

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
  }
  return "unknown";
}

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2:
#if defined(DRRKIT_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

Isa preferred_isa() {
  if (const char* env = std::getenv("DRRKIT_ISA")) {
    const std::string want(env);
    if (want == "scalar") return Isa::Scalar;
    if (want == "avx2" && isa_available(Isa::Avx2)) return Isa::Avx2;
  }
  return isa_available(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar;
}

namespace {
std::atomic<int>& active_slot() {
  static std::atomic<int> slot{static_cast<int>(preferred_isa())};
  return slot;
}
}  // namespace

Isa active_isa() { return static_cast<Isa>(active_slot().load()); }

void set_active_isa(Isa isa) {
  if (!isa_available(isa))
    throw Error(ErrorCode::InvalidArgument, "isa", std::string(to_string(isa)) + " is not available on this host");
  active_slot().store(static_cast<int>(isa));
}

const KernelTable& kernels(Isa isa) {
#ifdef DRRKIT_HAVE_AVX2
  if (isa == Isa::Avx2 && isa_available(Isa::Avx2)) return detail::avx2_table;
#endif
  (void)isa;
  return detail::scalar_table;
}

const KernelTable& kernels() { return kernels(active_isa()); }

}  // namespace drrkit::simd
