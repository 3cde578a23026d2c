#include <doctest.h>

#include <bit>
#include <random>
#include <vector>

#include "gbnn/error.hpp"
#include "gbnn/simd.hpp"

using namespace gbnn;
using gbnn::simd::Kernels;
using gbnn::simd::Word;

namespace {

std::vector<Word> random_words(std::size_t n, std::mt19937_64& rng, int density) {
  std::vector<Word> v(n);
  // density 0..3: AND together fewer draws for denser words.
  for (auto& w : v) {
    w = rng();
    for (int d = density; d < 3; ++d) w &= rng();
  }
  return v;
}

std::vector<std::int32_t> random_scores(std::size_t n, std::mt19937_64& rng, int range) {
  std::uniform_int_distribution<std::int32_t> pick(-2, range);
  std::vector<std::int32_t> s(n);
  for (auto& x : s) x = pick(rng);
  return s;
}

// Straight from the kernel contracts.
std::uint64_t ref_and_popcount(const std::vector<Word>& a, const std::vector<Word>& b) {
  std::uint64_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (int bit = 0; bit < 64; ++bit) n += ((a[i] >> bit) & (b[i] >> bit) & 1U);
  return n;
}

std::vector<const Kernels*> variants() {
  std::vector<const Kernels*> v{&simd::scalar_kernels()};
  if (simd::avx2_kernels()) v.push_back(simd::avx2_kernels());
  return v;
}

}  // namespace

TEST_SUITE("simd") {
  TEST_CASE("isa names and selection") {
    CHECK(simd::parse_isa("scalar") == simd::Isa::Scalar);
    CHECK(simd::parse_isa("avx2") == simd::Isa::Avx2);
    CHECK_FALSE(simd::parse_isa("sse9").has_value());
    const auto before = simd::active_kernels().isa;
    simd::use_isa(simd::Isa::Scalar);
    CHECK(simd::active_kernels().isa == simd::Isa::Scalar);
    if (simd::avx2_kernels()) {
      simd::use_isa(simd::Isa::Avx2);
      CHECK(simd::active_kernels().isa == simd::Isa::Avx2);
    } else {
      CHECK_THROWS_AS(simd::use_isa(simd::Isa::Avx2), ConfigError);
    }
    simd::use_isa(before);
  }

  TEST_CASE("word kernels match the reference on every variant") {
    std::mt19937_64 rng(21);
    for (const auto* k : variants()) {
      CAPTURE(k->name);
      for (std::size_t len : {1u, 2u, 3u, 4u, 5u, 7u, 8u, 9u, 16u, 33u}) {
        for (int density = 0; density < 4; ++density) {
          const auto a = random_words(len, rng, density);
          const auto b = random_words(len, rng, density);
          CHECK(k->and_popcount(a, b) == ref_and_popcount(a, b));
          CHECK(k->popcount(a) == ref_and_popcount(a, a));
          CHECK(k->and_any(a, b) == (ref_and_popcount(a, b) != 0));
          CHECK(k->equal(a, a));
          auto c = a;
          c[rng() % len] ^= Word{1} << (rng() % 64);
          CHECK_FALSE(k->equal(a, c));
          const std::vector<Word> zeros(len, 0);
          CHECK_FALSE(k->and_any(a, zeros));
        }
      }
    }
  }

  TEST_CASE("add_bits accumulates every set bit") {
    std::mt19937_64 rng(22);
    for (const auto* k : variants()) {
      CAPTURE(k->name);
      for (std::size_t len : {1u, 2u, 3u, 8u, 13u}) {
        const auto row = random_words(len, rng, 1);
        auto counters = random_scores(len * 64, rng, 50);
        auto expected = counters;
        for (std::size_t p = 0; p < len * 64; ++p) expected[p] += (row[p / 64] >> (p % 64)) & 1U;
        k->add_bits(row, counters);
        CHECK(counters == expected);
      }
    }
  }

  TEST_CASE("select_max and select_equal") {
    std::mt19937_64 rng(23);
    for (const auto* k : variants()) {
      CAPTURE(k->name);
      for (std::size_t n : {1u, 3u, 7u, 8u, 9u, 31u, 64u, 65u, 128u, 200u}) {
        for (int range : {0, 2, 1000}) {
          const auto s = random_scores(n, rng, range);
          const auto words = (n + 63) / 64;
          std::vector<Word> out(words, ~Word{0});
          const auto best = k->select_max(s, out);
          std::int32_t ref_best = s[0];
          for (auto x : s) ref_best = std::max(ref_best, x);
          CHECK(best == ref_best);
          for (std::size_t p = 0; p < words * 64; ++p) {
            const bool bit = (out[p / 64] >> (p % 64)) & 1U;
            CHECK(bit == (p < n && s[p] == ref_best));
          }
          const auto target = s[rng() % n];
          std::vector<Word> eq(words, ~Word{0});
          k->select_equal(s, target, eq);
          for (std::size_t p = 0; p < words * 64; ++p) {
            const bool bit = (eq[p / 64] >> (p % 64)) & 1U;
            CHECK(bit == (p < n && s[p] == target));
          }
        }
      }
    }
  }

  TEST_CASE("variants agree with each other") {
    const auto* avx = simd::avx2_kernels();
    if (!avx) return;
    const auto& sc = simd::scalar_kernels();
    std::mt19937_64 rng(24);
    for (int t = 0; t < 2000; ++t) {
      const std::size_t len = 1 + rng() % 20;
      const auto a = random_words(len, rng, static_cast<int>(rng() % 4));
      const auto b = random_words(len, rng, static_cast<int>(rng() % 4));
      CHECK(sc.and_popcount(a, b) == avx->and_popcount(a, b));
      CHECK(sc.and_any(a, b) == avx->and_any(a, b));
      CHECK(sc.popcount(a) == avx->popcount(a));
      std::vector<std::int32_t> c1(len * 64, 3), c2(len * 64, 3);
      sc.add_bits(a, c1);
      avx->add_bits(a, c2);
      CHECK(c1 == c2);
      const auto n = 1 + rng() % (len * 64);
      const auto s = random_scores(n, rng, static_cast<int>(rng() % 10));
      std::vector<Word> o1((n + 63) / 64), o2((n + 63) / 64);
      CHECK(sc.select_max(s, o1) == avx->select_max(s, o2));
      CHECK(o1 == o2);
    }
  }
}
