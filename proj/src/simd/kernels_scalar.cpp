#include <algorithm>
#include <bit>
#include <limits>

#include "simd/kernels_impl.hpp"

namespace gbnn::simd::scalar {

std::uint64_t and_popcount(std::span<const Word> a, std::span<const Word> b) {
  std::uint64_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) n += static_cast<std::uint64_t>(std::popcount(a[i] & b[i]));
  return n;
}

bool and_any(std::span<const Word> a, std::span<const Word> b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] & b[i]) return true;
  return false;
}

std::uint64_t popcount(std::span<const Word> a) {
  std::uint64_t n = 0;
  for (Word w : a) n += static_cast<std::uint64_t>(std::popcount(w));
  return n;
}

bool equal(std::span<const Word> a, std::span<const Word> b) { return std::equal(a.begin(), a.end(), b.begin()); }

void add_bits(std::span<const Word> row, std::span<std::int32_t> counters) {
  for (std::size_t w = 0; w < row.size(); ++w)
    for (Word bits = row[w]; bits; bits &= bits - 1)
      ++counters[w * kBits + static_cast<std::size_t>(std::countr_zero(bits))];
}

void select_equal(std::span<const std::int32_t> scores, std::int32_t target, std::span<Word> out) {
  std::fill(out.begin(), out.end(), Word{0});
  for (std::size_t p = 0; p < scores.size(); ++p)
    if (scores[p] == target) out[p / kBits] |= Word{1} << (p % kBits);
}

std::int32_t select_max(std::span<const std::int32_t> scores, std::span<Word> out) {
  const auto best = *std::max_element(scores.begin(), scores.end());
  select_equal(scores, best, out);
  return best;
}

}  // namespace gbnn::simd::scalar

namespace gbnn::simd {

const Kernels& scalar_kernels() {
  static const Kernels k{Isa::Scalar,       "scalar",           scalar::and_popcount, scalar::and_any,
                         scalar::popcount,  scalar::equal,      scalar::add_bits,     scalar::select_max,
                         scalar::select_equal};
  return k;
}

}  // namespace gbnn::simd
