#pragma once

// Building blocks shared by the retrieval rules and the emulation.
// All neuron indices here are zero-based; score buffers use the padded layout
// where slot w*64+b belongs to bit b of activation word w.

#include <bit>
#include <chrono>
#include <functional>
#include <span>
#include <vector>

#include "gbnn/retrieval.hpp"
#include "gbnn/simd.hpp"

namespace gbnn::detail {

using WordSpan = std::span<Word>;
using ConstWordSpan = std::span<const Word>;
using ScoreSpan = std::span<std::int32_t>;

inline bool test_neuron(const NetworkShape& shape, ConstWordSpan v, std::size_t i0) noexcept {
  const auto c = i0 / shape.cluster_size();
  const auto local = i0 - c * shape.cluster_size();
  return (v[c * shape.words_per_cluster() + local / kWordBits] >> (local % kWordBits)) & 1U;
}

/// Picks between accumulating the rows of active neurons and a full
/// row-by-row popcount, whichever touches fewer words.
class ScoringPlan {
 public:
  explicit ScoringPlan(const WeightMatrix& w);
  bool prefer_accumulate(std::size_t active) const noexcept {
    return static_cast<double>(active) * (words_ + average_degree_) <= static_cast<double>(rows_ * words_);
  }

 private:
  double average_degree_;
  std::size_t rows_;
  std::size_t words_;
};

/// scores = W v + gamma v, accumulating the rows of active neurons.
void score_accumulate(const WeightMatrix& w, ConstWordSpan v, std::uint32_t gamma, ScoreSpan scores,
                      const simd::Kernels& k);
/// scores[j] = W v[j] + gamma v[j] for several columns, one pass over the rows.
void score_popcount_rows(const WeightMatrix& w, std::span<const ConstWordSpan> vs, std::uint32_t gamma,
                         std::span<const ScoreSpan> scores, const simd::Kernels& k);
/// Picks the cheaper path per column.
void score_sum_of_sum(const WeightMatrix& w, const ScoringPlan& plan, std::span<const ConstWordSpan> vs,
                      std::uint32_t gamma, std::span<const ScoreSpan> scores, const simd::Kernels& k);

void add_self_loop(ConstWordSpan v, std::int32_t gamma, ScoreSpan scores);

/// Keeps, in every cluster, the neurons whose score equals the cluster maximum.
void select_cluster_max(const NetworkShape& shape, std::span<const std::int32_t> scores, WordSpan out,
                        const simd::Kernels& k);

void count_clusters(const NetworkShape& shape, ConstWordSpan v, std::span<std::uint32_t> counts,
                    const simd::Kernels& k);

/// Bail-out-early test for the active zero-based neuron i0: every other
/// cluster must hold an active neighbour. Scanning a cluster stops at the
/// first hit and the neuron is abandoned at the first silent cluster.
bool bail_out_early(const SparseWeightView& w, ConstWordSpan v, const std::uint32_t* cluster_counts,
                    std::size_t i0) noexcept;

/// One bail-out-early step for a lockstep tile. Inactive neurons stay off;
/// clusters flagged in frozen[j] (may be null) are copied through.
void bail_out_tile(const SparseWeightView& w, std::span<const ConstWordSpan> cur, std::span<const WordSpan> next,
                   std::span<const std::uint32_t* const> cluster_counts,
                   std::span<const std::uint8_t* const> frozen);

/// Scores a tile of columns; built once per tile so it may own scratch space.
using TileScorer = std::function<void(std::span<const ConstWordSpan> states, std::span<const ScoreSpan> scores)>;
using ScorerFactory = std::function<TileScorer()>;

/// Max-selection iteration with period-2 detection (sum-of-sum, emulation).
RetrievalOutcome iterate_max_selection(const NetworkShape& shape, const ActivationBatch& v0,
                                       const RetrievalConfig& config, const ScorerFactory& make_scorer);

inline std::size_t tile_count(std::size_t columns, std::size_t batch) { return (columns + batch - 1) / batch; }

inline double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace gbnn::detail
