#pragma once

// Retrieval rules over batches of probes.
//
//  * sum-of-sum: score = gamma*v_i + (number of active neighbours), then keep
//    the per-cluster maxima (all ties survive). May oscillate.
//  * sum-of-max, evaluated by bail-out-early: an active neuron survives iff
//    every other cluster holds at least one active neighbour. Inactive neurons
//    stay inactive, so the active set only shrinks and the rule always
//    terminates.
//  * joint: one sum-of-sum pass from the erased->0 encoding keeps, in each
//    erased cluster, the neurons with exactly C-e signals; known clusters are
//    frozen and bail-out-early runs on the erased clusters until they stop
//    changing.
//
// Probes are decoded in lockstep tiles of `batch` columns; a column that has
// converged is frozen while the rest of its tile continues. Tiles are spread
// over worker threads and every column is computed independently, so results
// are identical for any batch size and worker count.

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "gbnn/core.hpp"
#include "gbnn/storage.hpp"

namespace gbnn {

enum class Rule { SumOfSum, SumOfMax, Joint, Emulated };

/// "sos", "som", "joint", "emu".
std::string_view rule_name(Rule rule);
std::optional<Rule> parse_rule(std::string_view name);
/// Erased clusters start all-on for sum-of-max and the emulation, all-off otherwise.
FillPolicy fill_policy(Rule rule);

struct RetrievalConfig {
  Rule rule = Rule::SumOfMax;
  std::uint32_t gamma = 1;
  /// Iteration cap for sum-of-sum and the emulation. Sum-of-max and joint run
  /// to their fixed point, which the shrinking active set guarantees.
  std::uint32_t max_iters = 20;
  std::uint64_t seed = 0;
  /// Columns decoded in lockstep; 1 is serial decoding.
  std::size_t batch = 128;
  /// 0 selects default_worker_count().
  std::size_t workers = 0;

  /// Throws ConfigError: max_iters >= 1, batch >= 1, gamma > 0 for sum-of-max and joint.
  void validate() const;
};

enum class Status { Converged, MaxItersExceeded };

struct ProbeResult {
  Status status = Status::Converged;
  std::uint32_t iterations = 0;
  /// A period-2 cycle was detected (sum-of-sum and emulation only).
  bool oscillation = false;

  bool operator==(const ProbeResult&) const = default;
};

struct RetrievalOutcome {
  ActivationBatch states;
  std::vector<ProbeResult> results;
  double wall_ms = 0.0;
};

/// Per-column integer scores, n per column.
class ScoreMatrix {
 public:
  ScoreMatrix(const NetworkShape& shape, std::size_t columns);

  const NetworkShape& shape() const noexcept { return shape_; }
  std::size_t size() const noexcept { return columns_; }

  /// Score of 1-based neuron in column k.
  std::int32_t at(std::size_t neuron, std::size_t k) const;
  /// Scores of column k in neuron order.
  std::vector<std::int32_t> column(std::size_t k) const;

  /// Padded storage of column k (one slot per activation bit).
  std::span<std::int32_t> padded_column(std::size_t k) noexcept {
    return {scores_.data() + k * shape_.padded_total(), shape_.padded_total()};
  }

 private:
  NetworkShape shape_;
  std::size_t columns_;
  std::vector<std::int32_t> scores_;
};

/// A set of clusters per column.
class ClusterMask {
 public:
  ClusterMask(std::size_t columns, std::uint32_t clusters, bool value = false);

  /// Clusters holding no active neuron in each column of v (the erased
  /// clusters of an erased->0 encoding).
  static ClusterMask empty_clusters(const ActivationBatch& v);

  std::size_t size() const noexcept { return columns_; }
  std::uint32_t clusters() const noexcept { return clusters_; }
  bool test(std::size_t k, std::uint32_t cluster) const { return bits_.at(k * clusters_ + cluster - 1) != 0; }
  void set(std::size_t k, std::uint32_t cluster, bool on = true) { bits_.at(k * clusters_ + cluster - 1) = on; }
  std::size_t count(std::size_t k) const;

  /// Zero-based row of flags for column k.
  const std::uint8_t* row(std::size_t k) const noexcept { return bits_.data() + k * clusters_; }

 private:
  std::size_t columns_;
  std::uint32_t clusters_;
  std::vector<std::uint8_t> bits_;
};

// --- sum-of-sum -----------------------------------------------------------

/// S = (W + gamma*I) V.
ScoreMatrix sum_of_sum_scores(const WeightMatrix& w, const ActivationBatch& v, std::uint32_t gamma);
/// One step: per column and cluster, keep the neurons attaining the maximum score.
ActivationBatch sum_of_sum_step(const WeightMatrix& w, const ActivationBatch& v, std::uint32_t gamma);
/// Iterates until a column repeats its previous state or max_iters steps have
/// run. A period-2 cycle stops the column early with MaxItersExceeded, the
/// oscillation flag, and the state the capped run would have ended in.
RetrievalOutcome run_sum_of_sum(const WeightMatrix& w, const ActivationBatch& v0, const RetrievalConfig& config);

// --- sum-of-max -----------------------------------------------------------

/// One bail-out-early step. Clusters set in `frozen` keep their values.
ActivationBatch sum_of_max_step(const SparseWeightView& w, const ActivationBatch& v,
                                const ClusterMask* frozen = nullptr);
RetrievalOutcome run_sum_of_max(const SparseWeightView& w, const ActivationBatch& v0, const RetrievalConfig& config);

// --- joint ----------------------------------------------------------------

/// v0 must be an erased->0 encoding; its all-off clusters are the erased ones.
/// Iterations count the bail-out-early steps (0 when nothing is erased).
RetrievalOutcome run_joint(const WeightMatrix& w, const SparseWeightView& sparse, const ActivationBatch& v0,
                           const RetrievalConfig& config);

// --- convergence ----------------------------------------------------------

/// Result of an OR-reduction evaluated as a balanced binary tree.
struct TreeReduction {
  bool any = false;
  /// Number of pairwise levels: ceil(log2(size)), 0 for size <= 1.
  std::size_t levels = 0;
};
TreeReduction tree_reduce_any(std::span<const std::uint8_t> flags);

/// True iff prev and next agree on every in-scope cluster. A null scope
/// compares everything. The per-(column, cluster) mismatch flags are combined
/// with tree_reduce_any.
bool convergence_check(const ActivationBatch& prev, const ActivationBatch& next, const ClusterMask* scope = nullptr);

}  // namespace gbnn
