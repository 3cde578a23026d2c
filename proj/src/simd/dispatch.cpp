#include <atomic>
#include <cstdlib>
#include <string>

#include "gbnn/error.hpp"
#include "simd/kernels_impl.hpp"

namespace gbnn::simd {
namespace {

bool cpu_has_avx2() {
#if defined(GBNN_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("popcnt");
#else
  return false;
#endif
}

const Kernels* initial_kernels() {
  const char* env = std::getenv("GBNN_SIMD");
  const auto requested = env ? parse_isa(env) : std::nullopt;
  if (requested == Isa::Scalar) return &scalar_kernels();
  if (const auto* fast = avx2_kernels()) return fast;
  return &scalar_kernels();
}

std::atomic<const Kernels*>& active_slot() {
  static std::atomic<const Kernels*> slot{initial_kernels()};
  return slot;
}

}  // namespace

const Kernels* avx2_kernels() {
#if defined(GBNN_HAVE_AVX2_TU)
  static const bool supported = cpu_has_avx2();
  return supported ? &avx2_kernel_table() : nullptr;
#else
  return nullptr;
#endif
}

const Kernels& active_kernels() { return *active_slot().load(std::memory_order_acquire); }

void use_isa(Isa isa) {
  if (isa == Isa::Scalar) {
    active_slot().store(&scalar_kernels(), std::memory_order_release);
    return;
  }
  const auto* fast = avx2_kernels();
  if (!fast) throw ConfigError("AVX2 kernels are not available on this machine");
  active_slot().store(fast, std::memory_order_release);
}

std::optional<Isa> parse_isa(std::string_view name) {
  if (name == "scalar") return Isa::Scalar;
  if (name == "avx2") return Isa::Avx2;
  return std::nullopt;
}

}  // namespace gbnn::simd
