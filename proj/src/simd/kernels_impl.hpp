#pragma once

#include "gbnn/simd.hpp"

namespace gbnn::simd {

inline constexpr std::size_t kBits = 64;

#if defined(GBNN_HAVE_AVX2_TU)
const Kernels& avx2_kernel_table();
#endif

}  // namespace gbnn::simd
