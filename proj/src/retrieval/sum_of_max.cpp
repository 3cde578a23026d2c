#include <algorithm>

#include "gbnn/error.hpp"
#include "gbnn/parallel.hpp"
#include "retrieval/bail_out_loop.hpp"
#include "retrieval/engine.hpp"

namespace gbnn::detail {

bool bail_out_early(const SparseWeightView& w, ConstWordSpan v, const std::uint32_t* cluster_counts,
                    std::size_t i0) noexcept {
  const auto& shape = w.shape();
  const std::size_t L = shape.cluster_size();
  const auto wpc = shape.words_per_cluster();
  const auto own = i0 / L;
  for (std::size_t c = 0; c < shape.clusters(); ++c) {
    if (c == own) continue;  // self-loop; i0 is active
    const auto active = cluster_counts[c];
    if (active == 0) return false;
    const auto seg = w.segment(i0, c);
    if (seg.empty()) return false;

    const auto block = v.subspan(c * wpc, wpc);
    const auto base = static_cast<std::uint32_t>(c * L);
    bool hit = false;
    if (std::size_t{active} * std::bit_width(seg.size()) < seg.size()) {
      // Few active neurons in this cluster: look each one up in the sorted list.
      for (std::size_t wi = 0; wi < wpc && !hit; ++wi)
        for (Word bits = block[wi]; bits; bits &= bits - 1) {
          const auto j0 = base + static_cast<std::uint32_t>(wi * kWordBits + std::countr_zero(bits));
          if (std::binary_search(seg.begin(), seg.end(), j0)) {
            hit = true;
            break;
          }
        }
    } else {
      for (const auto r : seg) {
        const auto local = r - base;
        if ((block[local / kWordBits] >> (local % kWordBits)) & 1U) {
          hit = true;
          break;
        }
      }
    }
    if (!hit) return false;
  }
  return true;
}

void bail_out_tile(const SparseWeightView& w, std::span<const ConstWordSpan> cur, std::span<const WordSpan> next,
                   std::span<const std::uint32_t* const> cluster_counts,
                   std::span<const std::uint8_t* const> frozen) {
  const auto& shape = w.shape();
  const auto wpc = shape.words_per_cluster();
  const std::size_t L = shape.cluster_size();
  // Word-major, column-minor: the sparse columns of the 64 neurons behind a
  // word stay hot in cache while every column of the tile visits them.
  for (std::size_t wi = 0; wi < shape.words(); ++wi) {
    const auto c = wi / wpc;
    const auto local_base = (wi % wpc) * kWordBits;
    for (std::size_t j = 0; j < cur.size(); ++j) {
      const Word bits_in = cur[j][wi];
      if (frozen[j] && frozen[j][c]) {
        next[j][wi] = bits_in;
        continue;
      }
      Word out = 0;
      for (Word bits = bits_in; bits; bits &= bits - 1) {
        const auto b = static_cast<std::size_t>(std::countr_zero(bits));
        if (bail_out_early(w, cur[j], cluster_counts[j], c * L + local_base + b)) out |= Word{1} << b;
      }
      next[j][wi] = out;
    }
  }
}

void run_bail_out_columns(const SparseWeightView& w, std::vector<BailOutColumn>& live, RetrievalOutcome& outcome) {
  const auto& shape = w.shape();
  const auto& kern = simd::active_kernels();
  std::vector<ConstWordSpan> cur;
  std::vector<WordSpan> next;
  std::vector<const std::uint32_t*> counts;
  std::vector<const std::uint8_t*> frozen;

  while (!live.empty()) {
    cur.clear();
    next.clear();
    counts.clear();
    frozen.clear();
    for (auto& col : live) {
      count_clusters(shape, col.cur, col.counts, kern);
      cur.emplace_back(col.cur);
      next.emplace_back(col.next);
      counts.push_back(col.counts.data());
      frozen.push_back(col.frozen.empty() ? nullptr : col.frozen.data());
    }
    bail_out_tile(w, cur, next, counts, frozen);

    std::size_t kept = 0;
    for (auto& col : live) {
      ++col.steps;
      // Frozen clusters are copied through, so a full compare only sees the
      // clusters that are still being updated.
      if (kern.equal(col.next, col.cur)) {
        outcome.results[col.index] = {Status::Converged, col.steps, false};
        std::copy(col.cur.begin(), col.cur.end(), outcome.states.column(col.index).begin());
        continue;
      }
      std::swap(col.cur, col.next);
      if (&live[kept] != &col) live[kept] = std::move(col);
      ++kept;
    }
    live.resize(kept);
  }
}

}  // namespace gbnn::detail

namespace gbnn {

ActivationBatch sum_of_max_step(const SparseWeightView& w, const ActivationBatch& v, const ClusterMask* frozen) {
  if (!(w.shape() == v.shape())) throw ShapeError("activation batch shape differs from weight matrix shape");
  if (frozen && (frozen->size() != v.size() || frozen->clusters() != v.shape().clusters()))
    throw ShapeError("frozen mask does not match the batch");
  const auto& shape = v.shape();
  ActivationBatch next(shape, v.size());
  std::vector<std::vector<std::uint32_t>> counts(v.size(), std::vector<std::uint32_t>(shape.clusters()));
  std::vector<detail::ConstWordSpan> cur_spans;
  std::vector<detail::WordSpan> next_spans;
  std::vector<const std::uint32_t*> count_ptrs;
  std::vector<const std::uint8_t*> frozen_ptrs;
  for (std::size_t k = 0; k < v.size(); ++k) {
    detail::count_clusters(shape, v.column(k), counts[k], simd::active_kernels());
    cur_spans.push_back(v.column(k));
    next_spans.push_back(next.column(k));
    count_ptrs.push_back(counts[k].data());
    frozen_ptrs.push_back(frozen ? frozen->row(k) : nullptr);
  }
  detail::bail_out_tile(w, cur_spans, next_spans, count_ptrs, frozen_ptrs);
  return next;
}

RetrievalOutcome run_sum_of_max(const SparseWeightView& w, const ActivationBatch& v0, const RetrievalConfig& config) {
  config.validate();
  if (!(w.shape() == v0.shape())) throw ShapeError("probe batch shape differs from network shape");
  const auto start = std::chrono::steady_clock::now();
  const auto& shape = w.shape();
  const auto K = v0.size();
  RetrievalOutcome outcome{ActivationBatch(shape, K), std::vector<ProbeResult>(K), 0.0};

  parallel_for(detail::tile_count(K, config.batch), config.workers, [&](std::size_t, std::size_t tile) {
    const auto first = tile * config.batch;
    const auto last = std::min(K, first + config.batch);
    std::vector<detail::BailOutColumn> live;
    live.reserve(last - first);
    for (auto k = first; k < last; ++k) live.push_back(detail::BailOutColumn::start(shape, k, v0.column(k)));
    detail::run_bail_out_columns(w, live, outcome);
  });

  outcome.wall_ms = detail::elapsed_ms(start);
  return outcome;
}

}  // namespace gbnn
