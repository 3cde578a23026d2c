#pragma once

#include <vector>

#include "retrieval/engine.hpp"

namespace gbnn::detail {

/// Lockstep state of one column under bail-out-early iteration.
struct BailOutColumn {
  std::size_t index = 0;
  std::vector<Word> cur, next;
  std::vector<std::uint32_t> counts;
  /// Per-cluster flags; empty means nothing is frozen.
  std::vector<std::uint8_t> frozen;
  std::uint32_t steps = 0;

  static BailOutColumn start(const NetworkShape& shape, std::size_t index, ConstWordSpan v0) {
    BailOutColumn col;
    col.index = index;
    col.cur.assign(v0.begin(), v0.end());
    col.next.resize(shape.words());
    col.counts.resize(shape.clusters());
    return col;
  }
};

/// Iterates the columns to their fixed points and writes states and results
/// into outcome. `steps` already held by a column are included in its count.
void run_bail_out_columns(const SparseWeightView& w, std::vector<BailOutColumn>& live, RetrievalOutcome& outcome);

}  // namespace gbnn::detail
