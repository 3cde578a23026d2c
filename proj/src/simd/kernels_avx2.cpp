// AVX2 variants. Compiled with -mavx2 -mpopcnt; only reached after the
// dispatcher has confirmed CPU support.

#include <immintrin.h>

#include <algorithm>
#include <bit>
#include <limits>

#include "simd/kernels_impl.hpp"

namespace gbnn::simd::avx2 {
namespace {

inline __m256i load(const Word* p) { return _mm256_loadu_si256(reinterpret_cast<const __m256i*>(p)); }

// Nibble-lookup population count (Mula), bytes summed into four 64-bit lanes.
inline __m256i popcount_lanes(__m256i v) {
  const __m256i lookup = _mm256_setr_epi8(0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4,
                                          0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4);
  const __m256i low = _mm256_set1_epi8(0x0f);
  const __m256i lo = _mm256_and_si256(v, low);
  const __m256i hi = _mm256_and_si256(_mm256_srli_epi16(v, 4), low);
  const __m256i bytes = _mm256_add_epi8(_mm256_shuffle_epi8(lookup, lo), _mm256_shuffle_epi8(lookup, hi));
  return _mm256_sad_epu8(bytes, _mm256_setzero_si256());
}

inline std::uint64_t horizontal_sum(__m256i acc) {
  alignas(32) std::uint64_t lanes[4];
  _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), acc);
  return lanes[0] + lanes[1] + lanes[2] + lanes[3];
}

}  // namespace

std::uint64_t and_popcount(std::span<const Word> a, std::span<const Word> b) {
  const std::size_t n = a.size();
  std::size_t i = 0;
  __m256i acc = _mm256_setzero_si256();
  for (; i + 4 <= n; i += 4) acc = _mm256_add_epi64(acc, popcount_lanes(_mm256_and_si256(load(&a[i]), load(&b[i]))));
  std::uint64_t total = horizontal_sum(acc);
  for (; i < n; ++i) total += static_cast<std::uint64_t>(_mm_popcnt_u64(a[i] & b[i]));
  return total;
}

bool and_any(std::span<const Word> a, std::span<const Word> b) {
  const std::size_t n = a.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    if (!_mm256_testz_si256(load(&a[i]), load(&b[i]))) return true;
  for (; i < n; ++i)
    if (a[i] & b[i]) return true;
  return false;
}

std::uint64_t popcount(std::span<const Word> a) {
  const std::size_t n = a.size();
  std::size_t i = 0;
  __m256i acc = _mm256_setzero_si256();
  for (; i + 4 <= n; i += 4) acc = _mm256_add_epi64(acc, popcount_lanes(load(&a[i])));
  std::uint64_t total = horizontal_sum(acc);
  for (; i < n; ++i) total += static_cast<std::uint64_t>(_mm_popcnt_u64(a[i]));
  return total;
}

bool equal(std::span<const Word> a, std::span<const Word> b) {
  const std::size_t n = a.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256i x = _mm256_xor_si256(load(&a[i]), load(&b[i]));
    if (!_mm256_testz_si256(x, x)) return false;
  }
  for (; i < n; ++i)
    if (a[i] != b[i]) return false;
  return true;
}

void add_bits(std::span<const Word> row, std::span<std::int32_t> counters) {
  const __m256i lane_bits = _mm256_setr_epi32(1, 2, 4, 8, 16, 32, 64, 128);
  for (std::size_t w = 0; w < row.size(); ++w) {
    Word bits = row[w];
    if (!bits) continue;
    std::int32_t* base = counters.data() + w * kBits;
    for (int byte = 0; byte < 8; ++byte, bits >>= 8) {
      const auto b = static_cast<int>(bits & 0xffU);
      if (!b) continue;
      auto* dst = reinterpret_cast<__m256i*>(base + byte * 8);
      const __m256i hit = _mm256_cmpeq_epi32(_mm256_and_si256(_mm256_set1_epi32(b), lane_bits), lane_bits);
      // hit lanes are -1, so subtracting adds one.
      _mm256_storeu_si256(dst, _mm256_sub_epi32(_mm256_loadu_si256(dst), hit));
    }
  }
}

void select_equal(std::span<const std::int32_t> scores, std::int32_t target, std::span<Word> out) {
  std::fill(out.begin(), out.end(), Word{0});
  const std::size_t n = scores.size();
  const __m256i t = _mm256_set1_epi32(target);
  std::size_t p = 0;
  for (; p + 8 <= n; p += 8) {
    const __m256i s = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(scores.data() + p));
    const auto mask = static_cast<unsigned>(_mm256_movemask_ps(_mm256_castsi256_ps(_mm256_cmpeq_epi32(s, t))));
    out[p / kBits] |= Word{mask} << (p % kBits);
  }
  for (; p < n; ++p)
    if (scores[p] == target) out[p / kBits] |= Word{1} << (p % kBits);
}

std::int32_t select_max(std::span<const std::int32_t> scores, std::span<Word> out) {
  const std::size_t n = scores.size();
  std::size_t p = 0;
  __m256i vmax = _mm256_set1_epi32(std::numeric_limits<std::int32_t>::min());
  for (; p + 8 <= n; p += 8)
    vmax = _mm256_max_epi32(vmax, _mm256_loadu_si256(reinterpret_cast<const __m256i*>(scores.data() + p)));
  alignas(32) std::int32_t lanes[8];
  _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), vmax);
  std::int32_t best = *std::max_element(lanes, lanes + 8);
  for (; p < n; ++p) best = std::max(best, scores[p]);
  select_equal(scores, best, out);
  return best;
}

}  // namespace gbnn::simd::avx2

namespace gbnn::simd {

const Kernels& avx2_kernel_table() {
  static const Kernels k{Isa::Avx2,       "avx2",           avx2::and_popcount, avx2::and_any,
                         avx2::popcount,  avx2::equal,      avx2::add_bits,     avx2::select_max,
                         avx2::select_equal};
  return k;
}

}  // namespace gbnn::simd
