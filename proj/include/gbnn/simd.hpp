#pragma once

// Word-parallel bit kernels behind the scoring and selection loops.
//
// Every kernel has a portable scalar reference and, on x86-64, an AVX2
// variant. The variant is picked once at run time from the CPU features and
// the GBNN_SIMD environment variable (scalar | avx2 | auto); tests check the
// variants against each other on random inputs.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

namespace gbnn::simd {

using Word = std::uint64_t;

enum class Isa { Scalar, Avx2 };

struct Kernels {
  Isa isa;
  const char* name;

  /// popcount(a & b) over equal-length spans.
  std::uint64_t (*and_popcount)(std::span<const Word> a, std::span<const Word> b);
  /// (a & b) != 0 for some word.
  bool (*and_any)(std::span<const Word> a, std::span<const Word> b);
  std::uint64_t (*popcount)(std::span<const Word> a);
  bool (*equal)(std::span<const Word> a, std::span<const Word> b);
  /// counters[p] += 1 for every set bit p of row; counters.size() == 64 * row.size().
  void (*add_bits)(std::span<const Word> row, std::span<std::int32_t> counters);
  /// Sets bit p of out iff scores[p] equals the maximum of scores; clears the
  /// remaining bits of out. Returns the maximum. scores must be non-empty and
  /// out must hold ceil(scores.size() / 64) words.
  std::int32_t (*select_max)(std::span<const std::int32_t> scores, std::span<Word> out);
  /// Sets bit p of out iff scores[p] == target; clears the remaining bits.
  void (*select_equal)(std::span<const std::int32_t> scores, std::int32_t target, std::span<Word> out);
};

const Kernels& scalar_kernels();
/// Null when the AVX2 variant was not compiled in or the CPU lacks AVX2.
const Kernels* avx2_kernels();

/// Kernels used by the engine.
const Kernels& active_kernels();
/// Overrides the active variant; throws ConfigError when unavailable.
void use_isa(Isa isa);
std::optional<Isa> parse_isa(std::string_view name);

}  // namespace gbnn::simd
