#include <algorithm>

#include "gbnn/error.hpp"
#include "gbnn/parallel.hpp"
#include "retrieval/engine.hpp"

namespace gbnn::detail {
namespace {

// Per-column iteration state for max-selection rules.
struct Column {
  std::size_t index = 0;
  std::vector<Word> prev, cur, next;
  std::vector<std::int32_t> scores;
  bool has_prev = false;
  std::uint32_t steps = 0;
};

}  // namespace

RetrievalOutcome iterate_max_selection(const NetworkShape& shape, const ActivationBatch& v0,
                                       const RetrievalConfig& config, const ScorerFactory& make_scorer) {
  config.validate();
  if (!(v0.shape() == shape)) throw ShapeError("probe batch shape differs from network shape");
  const auto start = std::chrono::steady_clock::now();
  const auto& kern = simd::active_kernels();
  const auto K = v0.size();

  RetrievalOutcome outcome{ActivationBatch(shape, K), std::vector<ProbeResult>(K), 0.0};

  parallel_for(tile_count(K, config.batch), config.workers, [&](std::size_t, std::size_t tile) {
    const auto first = tile * config.batch;
    const auto last = std::min(K, first + config.batch);
    auto scorer = make_scorer();

    std::vector<Column> live;
    live.reserve(last - first);
    for (auto k = first; k < last; ++k) {
      Column col;
      col.index = k;
      const auto src = v0.column(k);
      col.cur.assign(src.begin(), src.end());
      col.prev.resize(shape.words());
      col.next.resize(shape.words());
      col.scores.resize(shape.padded_total());
      live.push_back(std::move(col));
    }

    std::vector<ConstWordSpan> states;
    std::vector<ScoreSpan> scores;
    while (!live.empty()) {
      states.clear();
      scores.clear();
      for (auto& col : live) {
        states.emplace_back(col.cur);
        scores.emplace_back(col.scores);
      }
      scorer(states, scores);

      std::size_t kept = 0;
      for (auto& col : live) {
        select_cluster_max(shape, col.scores, col.next, kern);
        ++col.steps;
        auto& result = outcome.results[col.index];
        const std::vector<Word>* final_state = nullptr;

        if (kern.equal(col.next, col.cur)) {
          result = {Status::Converged, col.steps, false};
          final_state = &col.cur;
        } else if (col.has_prev && kern.equal(col.next, col.prev)) {
          // next == prev: the column alternates between cur and next from
          // here on. Report the state the capped run would stop in.
          const auto remaining = config.max_iters - col.steps;
          result = {Status::MaxItersExceeded, config.max_iters, true};
          final_state = (remaining % 2 == 0) ? &col.next : &col.cur;
        } else if (col.steps >= config.max_iters) {
          result = {Status::MaxItersExceeded, col.steps, false};
          final_state = &col.next;
        }

        if (final_state) {
          std::copy(final_state->begin(), final_state->end(), outcome.states.column(col.index).begin());
          continue;
        }
        std::swap(col.prev, col.cur);
        std::swap(col.cur, col.next);
        col.has_prev = true;
        if (&live[kept] != &col) live[kept] = std::move(col);
        ++kept;
      }
      live.resize(kept);
    }
  });

  outcome.wall_ms = elapsed_ms(start);
  return outcome;
}

}  // namespace gbnn::detail

namespace gbnn {

RetrievalOutcome run_sum_of_sum(const WeightMatrix& w, const ActivationBatch& v0, const RetrievalConfig& config) {
  const detail::ScoringPlan plan(w);
  const auto gamma = config.gamma;
  return detail::iterate_max_selection(w.shape(), v0, config, [&]() -> detail::TileScorer {
    return [&w, &plan, gamma](std::span<const detail::ConstWordSpan> states, std::span<const detail::ScoreSpan> scores) {
      detail::score_sum_of_sum(w, plan, states, gamma, scores, simd::active_kernels());
    };
  });
}

}  // namespace gbnn
