#pragma once

// Randomized property checks for the sum-of-max rule, shared by the unit
// suite and the acceptance binary. Each check returns the number of failing
// cases out of the cases it generated.

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "gbnn/core.hpp"
#include "gbnn/retrieval.hpp"
#include "gbnn/storage.hpp"
#include "oracles.hpp"

namespace props {

struct Tally {
  std::string name;
  std::size_t cases = 0;
  std::size_t failures = 0;
  bool ok() const { return cases > 0 && failures == 0; }
};

struct Instance {
  gbnn::NetworkShape shape;
  std::vector<gbnn::Message> stored;
  gbnn::WeightMatrix w;
  gbnn::SparseWeightView sparse;
  gbnn::Probe probe;          // erased version of stored[0]
  oracle::Graph graph;
};

inline Instance make_instance(std::uint32_t C, std::uint32_t L, std::mt19937_64& rng) {
  const gbnn::NetworkShape shape(C, L);
  std::uniform_int_distribution<gbnn::Symbol> pick(1, L);
  const std::size_t count = 1 + rng() % (C * L);
  std::vector<gbnn::Message> stored;
  std::vector<std::vector<std::uint32_t>> raw;
  gbnn::WeightMatrix w(shape);
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<gbnn::Symbol> sym(C);
    for (auto& x : sym) x = pick(rng);
    stored.emplace_back(sym);
    raw.push_back(sym);
    gbnn::store(w, stored.back());
  }
  std::vector<gbnn::Probe::Slot> slots(stored[0].symbols().begin(), stored[0].symbols().end());
  const auto e = static_cast<std::uint32_t>(rng() % (C + 1));
  std::vector<std::uint32_t> order(C);
  for (std::uint32_t i = 0; i < C; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  for (std::uint32_t i = 0; i < e; ++i) slots[order[i]].reset();
  auto sparse = gbnn::sparsify(w);
  return {shape, std::move(stored), std::move(w), std::move(sparse), gbnn::Probe(slots),
          oracle::from_messages(C, L, raw)};
}

inline gbnn::ActivationBatch one(const gbnn::ActivationVector& v) {
  gbnn::ActivationBatch b(v.shape(), 1);
  b.assign(0, v);
  return b;
}

inline gbnn::RetrievalConfig som_config(std::uint32_t gamma = 1) {
  gbnn::RetrievalConfig c;
  c.rule = gbnn::Rule::SumOfMax;
  c.gamma = gamma;
  return c;
}

/// Iterates single bail-out-early steps, returning every state visited.
inline std::vector<gbnn::ActivationVector> trajectory(const Instance& in, gbnn::ActivationVector v) {
  std::vector<gbnn::ActivationVector> states{v};
  while (true) {
    auto next = gbnn::sum_of_max_step(in.sparse, one(v)).vector(0);
    if (next == v) return states;
    states.push_back(next);
    v = std::move(next);
  }
}

/// Runs every property on `cases` instances drawn at C <= max_c, L <= max_l
/// (or exactly at those values when exact is set).
inline std::vector<Tally> run_all(std::size_t cases, std::uint32_t max_c, std::uint32_t max_l, bool exact,
                                  std::uint64_t seed) {
  using namespace gbnn;
  std::mt19937_64 rng(seed);
  Tally shrink{"monotone shrinkage"}, clique{"clique fixed point"}, ensemble{"ensemble containment"},
      sole{"sole-survivor persistence"}, converge{"unconditional convergence"},
      equiv{"bail-out-early equals direct evaluation"}, gammas{"gamma 1, 2, 7 give identical outcomes"};

  for (std::size_t t = 0; t < cases; ++t) {
    const auto C = exact ? max_c : 2 + static_cast<std::uint32_t>(rng() % (max_c - 1));
    const auto L = exact ? max_l : 1 + static_cast<std::uint32_t>(rng() % max_l);
    const auto in = make_instance(C, L, rng);
    const auto& s = in.shape;
    const auto v0 = encode_probe(s, in.probe, FillPolicy::ErasedOn);

    // Shrinkage and sole-survivor persistence along the trajectory.
    const auto traj = trajectory(in, v0);
    bool shrinks = true, persists = true;
    for (std::size_t k = 1; k < traj.size(); ++k) {
      for (std::size_t i = 1; i <= s.total(); ++i)
        if (traj[k].active(i) && !traj[k - 1].active(i)) shrinks = false;
      for (std::uint32_t c = 1; c <= C; ++c) {
        if (traj[k - 1].cluster_count(c) != 1) continue;
        for (std::size_t later = k; later < traj.size(); ++later)
          for (std::uint32_t l = 1; l <= L; ++l) {
            const auto i = neuron_index(s, c, l);
            if (traj[k - 1].active(i) && !traj[later].active(i)) persists = false;
          }
      }
    }
    ++shrink.cases;
    shrink.failures += !shrinks;
    ++sole.cases;
    sole.failures += !persists;

    // Converges, within the initial active count.
    const auto out = run_sum_of_max(in.sparse, one(v0), som_config());
    ++converge.cases;
    converge.failures += !(out.results[0].status == Status::Converged &&
                           out.results[0].iterations <= v0.count() &&
                           out.states.vector(0) == traj.back());

    // A stored message is a fixed point.
    const auto full = encode_message(s, in.stored[rng() % in.stored.size()]);
    const auto fixed = run_sum_of_max(in.sparse, one(full), som_config());
    ++clique.cases;
    clique.failures += !(fixed.states.vector(0) == full);

    // Every stored message consistent with the probe survives.
    const auto final_state = out.states.vector(0);
    bool contains = true;
    for (const auto& m : in.stored) {
      if (!in.probe.matches(m)) continue;
      for (std::uint32_t c = 1; c <= C; ++c)
        if (!final_state.active(neuron_index(s, c, m.symbol(c)))) contains = false;
    }
    ++ensemble.cases;
    ensemble.failures += !contains;

    // The step equals the direct evaluation for any state and gamma.
    const auto state = oracle::random_state(s.total(), 0.5, rng);
    const auto step = oracle::from_vector(sum_of_max_step(in.sparse, one(oracle::to_vector(in.graph, state))).vector(0));
    bool same = true;
    for (std::int64_t g : {1, 2, 7}) same = same && step == oracle::sum_of_max_step(in.graph, state, g);
    ++equiv.cases;
    equiv.failures += !same;

    bool invariant = true;
    for (std::uint32_t g : {2u, 7u}) {
      const auto other = run_sum_of_max(in.sparse, one(v0), som_config(g));
      invariant = invariant && other.states == out.states && other.results == out.results;
    }
    ++gammas.cases;
    gammas.failures += !invariant;
  }
  return {shrink, clique, ensemble, sole, converge, equiv, gammas};
}

}  // namespace props
