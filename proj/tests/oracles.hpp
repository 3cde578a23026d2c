#pragma once

// Brute-force reference models for the unit and acceptance tests. Everything
// here works on plain byte vectors indexed by zero-based neuron, straight from
// the defining formulas, and shares no code with the library's kernels.

#include <cstdint>
#include <random>
#include <vector>

#include "gbnn/core.hpp"
#include "gbnn/storage.hpp"

namespace oracle {

using Bits = std::vector<std::uint8_t>;

struct Graph {
  std::uint32_t C = 0, L = 0;
  std::vector<Bits> w;  // n x n, zero diagonal

  std::size_t n() const { return std::size_t{C} * L; }
  std::size_t cluster(std::size_t i) const { return i / L; }
};

inline Graph empty_graph(std::uint32_t C, std::uint32_t L) {
  Graph g{C, L, {}};
  g.w.assign(g.n(), Bits(g.n(), 0));
  return g;
}

inline Graph from_messages(std::uint32_t C, std::uint32_t L, const std::vector<std::vector<std::uint32_t>>& msgs) {
  auto g = empty_graph(C, L);
  for (const auto& m : msgs)
    for (std::uint32_t a = 0; a < C; ++a)
      for (std::uint32_t b = 0; b < C; ++b)
        if (a != b) g.w[a * L + m[a] - 1][b * L + m[b] - 1] = 1;
  return g;
}

/// Symmetric random graph with empty within-cluster blocks.
inline Graph random_graph(std::uint32_t C, std::uint32_t L, double density, std::mt19937_64& rng) {
  auto g = empty_graph(C, L);
  std::bernoulli_distribution edge(density);
  for (std::size_t i = 0; i < g.n(); ++i)
    for (std::size_t j = i + 1; j < g.n(); ++j)
      if (g.cluster(i) != g.cluster(j) && edge(rng)) g.w[i][j] = g.w[j][i] = 1;
  return g;
}

inline Bits random_state(std::size_t n, double p, std::mt19937_64& rng) {
  std::bernoulli_distribution on(p);
  Bits v(n);
  for (auto& b : v) b = on(rng);
  return v;
}

inline gbnn::WeightMatrix to_matrix(const Graph& g) {
  gbnn::WeightMatrix w(gbnn::NetworkShape(g.C, g.L));
  for (std::size_t i = 0; i < g.n(); ++i)
    for (std::size_t j = i + 1; j < g.n(); ++j)
      if (g.w[i][j]) w.connect(i + 1, j + 1);
  return w;
}

inline gbnn::ActivationVector to_vector(const Graph& g, const Bits& v) {
  gbnn::ActivationVector out(gbnn::NetworkShape(g.C, g.L));
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i]) out.set(i + 1);
  return out;
}

inline Bits from_vector(const gbnn::ActivationVector& v) {
  Bits out(v.shape().total());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = v.active(i + 1);
  return out;
}

/// s_i = gamma v_i + sum_j w_ij v_j.
inline std::vector<std::int64_t> sum_of_sum_scores(const Graph& g, const Bits& v, std::int64_t gamma) {
  std::vector<std::int64_t> s(g.n(), 0);
  for (std::size_t i = 0; i < g.n(); ++i) {
    s[i] = gamma * v[i];
    for (std::size_t j = 0; j < g.n(); ++j) s[i] += g.w[i][j] * v[j];
  }
  return s;
}

/// Keep the neurons attaining their cluster's maximum.
inline Bits select_max(const Graph& g, const std::vector<std::int64_t>& s) {
  Bits out(g.n(), 0);
  for (std::uint32_t c = 0; c < g.C; ++c) {
    std::int64_t best = s[c * g.L];
    for (std::uint32_t l = 0; l < g.L; ++l) best = std::max(best, s[c * g.L + l]);
    for (std::uint32_t l = 0; l < g.L; ++l) out[c * g.L + l] = s[c * g.L + l] == best;
  }
  return out;
}

inline Bits sum_of_sum_step(const Graph& g, const Bits& v, std::int64_t gamma) {
  return select_max(g, sum_of_sum_scores(g, v, gamma));
}

/// s_i = sum over clusters of max_j v_j w'_ji, where w' carries gamma on the diagonal.
inline std::vector<std::int64_t> sum_of_max_scores(const Graph& g, const Bits& v, std::int64_t gamma) {
  std::vector<std::int64_t> s(g.n(), 0);
  for (std::size_t i = 0; i < g.n(); ++i)
    for (std::uint32_t c = 0; c < g.C; ++c) {
      std::int64_t best = 0;
      for (std::uint32_t l = 0; l < g.L; ++l) {
        const auto j = c * g.L + l;
        const std::int64_t weight = j == i ? gamma : g.w[j][i];
        best = std::max(best, v[j] * weight);
      }
      s[i] += best;
    }
  return s;
}

/// v_i' = [s_i == gamma + C - 1].
inline Bits sum_of_max_step(const Graph& g, const Bits& v, std::int64_t gamma) {
  const auto s = sum_of_max_scores(g, v, gamma);
  Bits out(g.n());
  for (std::size_t i = 0; i < g.n(); ++i) out[i] = s[i] == gamma + g.C - 1;
  return out;
}

/// Fixed point of the sum-of-max step and the number of steps to confirm it.
inline std::pair<Bits, std::uint32_t> sum_of_max_run(const Graph& g, Bits v, std::int64_t gamma) {
  std::uint32_t steps = 0;
  while (true) {
    auto next = sum_of_max_step(g, v, gamma);
    ++steps;
    if (next == v) return {v, steps};
    v = std::move(next);
  }
}

inline std::size_t count(const Bits& v) {
  std::size_t n = 0;
  for (auto b : v) n += b;
  return n;
}

}  // namespace oracle
