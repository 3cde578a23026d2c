#pragma once

// Scenario runner: random corpora, erasure, decoding with any rule, success
// counting, gamma sweeps and CSV output.
//
// Seeding: repetition r of a scenario with seed s uses the repetition seed
// splitmix64(s + r). The corpus, the choice of test messages and the erasures
// are drawn from streams derived from that seed alone, so every rule and every
// gamma sees the same probes.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gbnn/core.hpp"
#include "gbnn/emulation.hpp"
#include "gbnn/retrieval.hpp"
#include "gbnn/storage.hpp"

namespace gbnn::bench {

std::uint64_t splitmix64(std::uint64_t x) noexcept;

enum class SuccessCounting {
  /// Only a unique read-off equal to the original counts.
  UniqueOnly,
  /// An ambiguous read-off counts when a seeded uniform pick equals the original.
  RandomChoice,
};

struct Scenario {
  std::string name = "custom";
  NetworkShape shape{8, 128};
  std::size_t stored = 5000;
  std::size_t probes = 3000;
  std::uint32_t erased = 3;
  std::uint32_t gamma = 2;
  Rule rule = Rule::SumOfSum;
  std::uint32_t max_iters = 20;
  std::uint64_t seed = 1;
  std::uint32_t repetitions = 5;
  /// Emulation basis; 0 means L+1.
  std::uint64_t theta = 0;
  std::optional<std::uint32_t> fixed_width;
  std::size_t batch = 128;
  std::size_t workers = 0;
  SuccessCounting counting = SuccessCounting::UniqueOnly;

  /// Throws ConfigError: stored >= 1, 1 <= probes <= stored, erased <= C, repetitions >= 1.
  void validate() const;
  std::uint64_t effective_theta() const noexcept { return theta ? theta : shape.cluster_size() + std::uint64_t{1}; }
  RetrievalConfig retrieval_config() const;

  /// C=8, L=128, 5000 stored, 3000 probes, gamma=2, 20 iterations, 5 repetitions.
  static Scenario scenario1();
  /// C=16, L=512, 50000 stored, 30000 probes, 7 erased clusters.
  static Scenario scenario2();
};

/// count i.i.d. uniform messages.
std::vector<Message> generate_corpus(const NetworkShape& shape, std::size_t count, std::uint64_t seed);

/// Erases e distinct clusters drawn uniformly without replacement.
Probe erase(const Message& msg, std::uint32_t e, std::uint64_t seed);

/// FNV-1a over the symbols of the corpus.
std::uint64_t corpus_hash(std::span<const Message> corpus);

/// Network, test messages and probes of one repetition.
struct PreparedRun {
  std::uint64_t seed = 0;
  std::uint64_t corpus_hash = 0;
  WeightMatrix w;
  SparseWeightView sparse;
  std::vector<Message> tests;
  std::vector<Probe> probes;
};

/// Builds repetition r of the scenario. Rule and gamma are not used.
PreparedRun prepare(const Scenario& s, std::uint32_t repetition);
/// Re-erases the same test messages with a different erasure count.
void reerase(PreparedRun& run, std::uint32_t erased);

/// Encodes the probes with the rule's fill policy and decodes them.
RetrievalOutcome decode(const PreparedRun& run, const Scenario& s);

struct RepetitionReport {
  std::uint32_t repetition = 0;
  std::uint64_t seed = 0;
  std::uint64_t corpus_hash = 0;
  double retrieval_rate = 0.0;
  double mean_iterations = 0.0;
  std::size_t oscillation_count = 0;
  double wall_ms = 0.0;
  /// 1 per successfully retrieved probe, in probe order.
  std::vector<std::uint8_t> successes;
};

struct RunReport {
  Scenario scenario;
  std::vector<RepetitionReport> repetitions;

  double retrieval_rate() const;
  /// Standard error of the mean rate over repetitions (0 for one repetition).
  double rate_std_error() const;
  double mean_iterations() const;
  std::size_t oscillation_count() const;
  double wall_ms() const;
};

/// Scores a decoded batch against the test messages.
RepetitionReport score(const PreparedRun& run, const Scenario& s, const RetrievalOutcome& outcome,
                       std::uint32_t repetition);

RunReport run_scenario(const Scenario& s);

/// Runs every (rule, erased, gamma) combination, preparing each repetition
/// once and reusing it.
std::vector<RunReport> run_grid(const Scenario& base, std::span<const Rule> rules,
                                std::span<const std::uint32_t> erasures, std::span<const std::uint32_t> gammas);

/// Sum-of-sum reports for each gamma on identical corpora and probes.
std::vector<RunReport> gamma_sweep(const Scenario& base, std::span<const std::uint32_t> gammas);

// --- CSV ------------------------------------------------------------------

struct CsvRow {
  std::string rule;
  std::uint32_t clusters = 0;
  std::uint32_t cluster_size = 0;
  std::size_t stored = 0;
  std::size_t probes = 0;
  std::uint32_t erased = 0;
  std::uint32_t gamma = 0;
  std::uint64_t theta = 0;
  std::uint32_t repetition = 0;
  std::uint64_t seed = 0;
  std::uint64_t corpus_hash = 0;
  double retrieval_rate = 0.0;
  double mean_iters = 0.0;
  std::size_t oscillation_count = 0;
  double wall_ms = 0.0;

  bool operator==(const CsvRow&) const = default;
};

extern const char* const kCsvHeader;

/// One row per (report, repetition), sorted by (rule, e, gamma, repetition).
std::vector<CsvRow> csv_rows(std::span<const RunReport> reports);
std::string format_row(const CsvRow& row);
/// Same as format_row without the trailing timing column.
std::string format_row_untimed(const CsvRow& row);

void emit_csv(std::span<const RunReport> reports, std::ostream& out);
void emit_csv(std::span<const RunReport> reports, const std::filesystem::path& path);
/// Throws FormatError on a malformed header or row.
std::vector<CsvRow> parse_csv(std::istream& in);

// --- acceptance bands -----------------------------------------------------

struct BandCheck {
  std::string description;
  bool passed = false;
};

/// Checks the retrieval-rate bands that apply to Scenario-1-shaped reports
/// (C=8, L=128, 5000 stored, 3000 probes, gamma=2). Other reports are ignored.
std::vector<BandCheck> check_bands(std::span<const RunReport> reports);

}  // namespace gbnn::bench
