#include <algorithm>

#include "gbnn/error.hpp"
#include "retrieval/engine.hpp"

namespace gbnn::detail {

ScoringPlan::ScoringPlan(const WeightMatrix& w)
    : average_degree_(w.shape().total() ? 2.0 * static_cast<double>(w.edge_count()) / static_cast<double>(w.shape().total())
                                        : 0.0),
      rows_(w.shape().total()),
      words_(w.shape().words()) {}

void add_self_loop(ConstWordSpan v, std::int32_t gamma, ScoreSpan scores) {
  if (gamma == 0) return;
  for (std::size_t wi = 0; wi < v.size(); ++wi)
    for (Word bits = v[wi]; bits; bits &= bits - 1)
      scores[wi * kWordBits + static_cast<std::size_t>(std::countr_zero(bits))] += gamma;
}

void score_accumulate(const WeightMatrix& w, ConstWordSpan v, std::uint32_t gamma, ScoreSpan scores,
                      const simd::Kernels& k) {
  const auto& shape = w.shape();
  std::fill(scores.begin(), scores.end(), 0);
  // W is symmetric: summing the rows of the active neurons yields W v.
  for (std::size_t wi = 0; wi < v.size(); ++wi) {
    const auto c = wi / shape.words_per_cluster();
    const auto local_base = (wi % shape.words_per_cluster()) * kWordBits;
    for (Word bits = v[wi]; bits; bits &= bits - 1) {
      const auto j0 = c * shape.cluster_size() + local_base + static_cast<std::size_t>(std::countr_zero(bits));
      k.add_bits(w.row(j0), scores);
    }
  }
  add_self_loop(v, static_cast<std::int32_t>(gamma), scores);
}

void score_popcount_rows(const WeightMatrix& w, std::span<const ConstWordSpan> vs, std::uint32_t gamma,
                         std::span<const ScoreSpan> scores, const simd::Kernels& k) {
  const auto& shape = w.shape();
  for (auto s : scores) std::fill(s.begin(), s.end(), 0);
  for (std::size_t i0 = 0; i0 < shape.total(); ++i0) {
    const auto row = w.row(i0);
    const auto slot = shape.padded_index(i0);
    for (std::size_t j = 0; j < vs.size(); ++j)
      scores[j][slot] = static_cast<std::int32_t>(k.and_popcount(row, vs[j]));
  }
  for (std::size_t j = 0; j < vs.size(); ++j) add_self_loop(vs[j], static_cast<std::int32_t>(gamma), scores[j]);
}

void score_sum_of_sum(const WeightMatrix& w, const ScoringPlan& plan, std::span<const ConstWordSpan> vs,
                      std::uint32_t gamma, std::span<const ScoreSpan> scores, const simd::Kernels& k) {
  std::vector<ConstWordSpan> dense_v;
  std::vector<ScoreSpan> dense_s;
  for (std::size_t j = 0; j < vs.size(); ++j) {
    if (plan.prefer_accumulate(k.popcount(vs[j]))) {
      score_accumulate(w, vs[j], gamma, scores[j], k);
    } else {
      dense_v.push_back(vs[j]);
      dense_s.push_back(scores[j]);
    }
  }
  if (!dense_v.empty()) score_popcount_rows(w, dense_v, gamma, dense_s, k);
}

void select_cluster_max(const NetworkShape& shape, std::span<const std::int32_t> scores, WordSpan out,
                        const simd::Kernels& k) {
  const auto wpc = shape.words_per_cluster();
  for (std::size_t c = 0; c < shape.clusters(); ++c)
    k.select_max(scores.subspan(c * wpc * kWordBits, shape.cluster_size()), out.subspan(c * wpc, wpc));
}

void count_clusters(const NetworkShape& shape, ConstWordSpan v, std::span<std::uint32_t> counts,
                    const simd::Kernels& k) {
  const auto wpc = shape.words_per_cluster();
  for (std::size_t c = 0; c < shape.clusters(); ++c)
    counts[c] = static_cast<std::uint32_t>(k.popcount(v.subspan(c * wpc, wpc)));
}

}  // namespace gbnn::detail

namespace gbnn {

ScoreMatrix::ScoreMatrix(const NetworkShape& shape, std::size_t columns)
    : shape_(shape), columns_(columns), scores_(shape.padded_total() * columns, 0) {}

std::int32_t ScoreMatrix::at(std::size_t neuron, std::size_t k) const {
  neuron_position(shape_, neuron);
  if (k >= columns_) throw RangeError("score column out of range");
  return scores_[k * shape_.padded_total() + shape_.padded_index(neuron - 1)];
}

std::vector<std::int32_t> ScoreMatrix::column(std::size_t k) const {
  if (k >= columns_) throw RangeError("score column out of range");
  std::vector<std::int32_t> out(shape_.total());
  for (std::size_t i0 = 0; i0 < shape_.total(); ++i0) out[i0] = scores_[k * shape_.padded_total() + shape_.padded_index(i0)];
  return out;
}

ScoreMatrix sum_of_sum_scores(const WeightMatrix& w, const ActivationBatch& v, std::uint32_t gamma) {
  if (!(w.shape() == v.shape())) throw ShapeError("activation batch shape differs from weight matrix shape");
  ScoreMatrix s(w.shape(), v.size());
  const detail::ScoringPlan plan(w);
  std::vector<detail::ConstWordSpan> vs;
  std::vector<detail::ScoreSpan> ss;
  for (std::size_t k = 0; k < v.size(); ++k) {
    vs.push_back(v.column(k));
    ss.push_back(s.padded_column(k));
  }
  detail::score_sum_of_sum(w, plan, vs, gamma, ss, simd::active_kernels());
  return s;
}

ActivationBatch sum_of_sum_step(const WeightMatrix& w, const ActivationBatch& v, std::uint32_t gamma) {
  auto scores = sum_of_sum_scores(w, v, gamma);
  ActivationBatch next(v.shape(), v.size());
  const auto& k = simd::active_kernels();
  for (std::size_t c = 0; c < v.size(); ++c) detail::select_cluster_max(v.shape(), scores.padded_column(c), next.column(c), k);
  return next;
}

}  // namespace gbnn
