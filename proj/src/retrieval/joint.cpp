#include <algorithm>

#include "gbnn/error.hpp"
#include "gbnn/parallel.hpp"
#include "retrieval/bail_out_loop.hpp"
#include "retrieval/engine.hpp"

namespace gbnn {

RetrievalOutcome run_joint(const WeightMatrix& w, const SparseWeightView& sparse, const ActivationBatch& v0,
                           const RetrievalConfig& config) {
  config.validate();
  if (!(w.shape() == v0.shape()) || !(sparse.shape() == v0.shape()))
    throw ShapeError("probe batch shape differs from network shape");
  const auto start = std::chrono::steady_clock::now();
  const auto& shape = w.shape();
  const auto K = v0.size();
  const auto wpc = shape.words_per_cluster();
  RetrievalOutcome outcome{ActivationBatch(shape, K), std::vector<ProbeResult>(K), 0.0};

  parallel_for(detail::tile_count(K, config.batch), config.workers, [&](std::size_t, std::size_t tile) {
    const auto& kern = simd::active_kernels();
    const auto first = tile * config.batch;
    const auto last = std::min(K, first + config.batch);

    std::vector<std::int32_t> scores(shape.padded_total());
    std::vector<detail::BailOutColumn> live;
    live.reserve(last - first);
    for (auto k = first; k < last; ++k) {
      auto col = detail::BailOutColumn::start(shape, k, v0.column(k));
      detail::count_clusters(shape, col.cur, col.counts, kern);
      col.frozen.assign(shape.clusters(), 1);
      std::int32_t erased = 0;
      for (std::size_t c = 0; c < shape.clusters(); ++c)
        if (col.counts[c] == 0) {
          col.frozen[c] = 0;
          ++erased;
        }
      if (erased == 0) {
        outcome.results[k] = {Status::Converged, 0, false};
        std::copy(col.cur.begin(), col.cur.end(), outcome.states.column(k).begin());
        continue;
      }

      // The sum-of-sum pass, evaluated only where it is read: erased clusters
      // hold no active neuron, so their scores are the row sums of the known
      // neurons and the self-loop adds nothing.
      std::fill(scores.begin(), scores.end(), 0);
      for (std::size_t wi = 0; wi < shape.words(); ++wi) {
        const auto base = (wi / wpc) * shape.cluster_size() + (wi % wpc) * kWordBits;
        for (Word bits = col.cur[wi]; bits; bits &= bits - 1) {
          const auto row = w.row(base + static_cast<std::size_t>(std::countr_zero(bits)));
          for (std::size_t c = 0; c < shape.clusters(); ++c)
            if (!col.frozen[c])
              kern.add_bits(row.subspan(c * wpc, wpc),
                            std::span<std::int32_t>(scores).subspan(c * wpc * kWordBits, wpc * kWordBits));
        }
      }
      // In each erased cluster keep exactly the neurons with C-e signals.
      const auto target = static_cast<std::int32_t>(shape.clusters()) - erased;
      for (std::size_t c = 0; c < shape.clusters(); ++c) {
        if (col.frozen[c]) continue;
        kern.select_equal(std::span<const std::int32_t>(scores).subspan(c * wpc * kWordBits, shape.cluster_size()),
                          target, std::span<Word>(col.cur).subspan(c * wpc, wpc));
      }
      live.push_back(std::move(col));
    }
    detail::run_bail_out_columns(sparse, live, outcome);
  });

  outcome.wall_ms = detail::elapsed_ms(start);
  return outcome;
}

}  // namespace gbnn
