#pragma once

// Shapes, neuron numbering and the packed activation encoding shared by every
// retrieval rule. Clusters, symbols and neurons are numbered from 1 at every
// public interface; probe/column indices inside a batch are numbered from 0.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gbnn {

using Symbol = std::uint32_t;
using Word = std::uint64_t;
inline constexpr std::size_t kWordBits = 64;

/// C clusters of L neurons each, n = C*L neurons in total.
///
/// Activations are stored as packed bits. Every cluster is padded to a whole
/// number of 64-bit words so that per-cluster work never straddles a word;
/// the padding bits are always zero.
class NetworkShape {
 public:
  NetworkShape(std::uint32_t clusters, std::uint32_t cluster_size);

  std::uint32_t clusters() const noexcept { return clusters_; }
  std::uint32_t cluster_size() const noexcept { return cluster_size_; }
  std::size_t total() const noexcept { return std::size_t{clusters_} * cluster_size_; }

  std::size_t words_per_cluster() const noexcept { return words_per_cluster_; }
  std::size_t words() const noexcept { return words_per_cluster_ * clusters_; }
  /// Length of a score vector laid out like the packed bits (one slot per bit).
  std::size_t padded_total() const noexcept { return words() * kWordBits; }

  /// Zero-based storage helpers used by the kernels.
  std::size_t padded_index(std::size_t neuron0) const noexcept {
    return (neuron0 / cluster_size_) * words_per_cluster_ * kWordBits + neuron0 % cluster_size_;
  }
  std::size_t cluster_of(std::size_t neuron0) const noexcept { return neuron0 / cluster_size_; }

  bool operator==(const NetworkShape&) const = default;

 private:
  std::uint32_t clusters_;
  std::uint32_t cluster_size_;
  std::size_t words_per_cluster_;
};

struct NeuronPosition {
  std::uint32_t cluster;
  std::uint32_t local;
  bool operator==(const NeuronPosition&) const = default;
};

/// (cluster-1)*L + local, all 1-based.
std::size_t neuron_index(const NetworkShape& shape, std::uint32_t cluster, std::uint32_t local);
NeuronPosition neuron_position(const NetworkShape& shape, std::size_t neuron);

/// A complete message: one symbol in 1..L per cluster.
class Message {
 public:
  Message() = default;
  explicit Message(std::vector<Symbol> symbols) : symbols_(std::move(symbols)) {}

  /// Comma-separated symbols, e.g. "9,4,3,10".
  static Message parse(std::string_view text);

  std::size_t size() const noexcept { return symbols_.size(); }
  std::span<const Symbol> symbols() const noexcept { return symbols_; }
  Symbol symbol(std::uint32_t cluster) const { return symbols_.at(cluster - 1); }

  void validate(const NetworkShape& shape) const;
  std::string to_string() const;

  auto operator<=>(const Message&) const = default;

 private:
  std::vector<Symbol> symbols_;
};

/// A partially erased message.
class Probe {
 public:
  using Slot = std::optional<Symbol>;

  Probe() = default;
  explicit Probe(std::vector<Slot> slots) : slots_(std::move(slots)) {}

  static Probe from_message(const Message& msg);
  /// Comma-separated symbols with `?` for erased slots, e.g. "9,4,?,10".
  static Probe parse(std::string_view text);

  std::size_t size() const noexcept { return slots_.size(); }
  std::span<const Slot> slots() const noexcept { return slots_; }
  const Slot& slot(std::uint32_t cluster) const { return slots_.at(cluster - 1); }
  bool erased(std::uint32_t cluster) const { return !slot(cluster).has_value(); }
  std::size_t erased_count() const noexcept;

  /// True when every known slot agrees with msg.
  bool matches(const Message& msg) const;

  void validate(const NetworkShape& shape) const;
  std::string to_string() const;

  bool operator==(const Probe&) const = default;

 private:
  std::vector<Slot> slots_;
};

/// Binary activation state of all n neurons.
class ActivationVector {
 public:
  explicit ActivationVector(const NetworkShape& shape);

  /// Parses '0'/'1' characters; whitespace is ignored.
  static ActivationVector from_bits(const NetworkShape& shape, std::string_view bits);

  const NetworkShape& shape() const noexcept { return shape_; }

  bool active(std::size_t neuron) const;
  void set(std::size_t neuron, bool on = true);

  std::size_t count() const noexcept;
  std::size_t cluster_count(std::uint32_t cluster) const;
  std::vector<std::size_t> active_neurons() const;

  std::span<const Word> words() const noexcept { return words_; }
  std::span<Word> words() noexcept { return words_; }

  /// One character per neuron; with grouped=true clusters are separated by spaces.
  std::string to_bit_string(bool grouped = false) const;

  bool operator==(const ActivationVector& other) const {
    return shape_ == other.shape_ && words_ == other.words_;
  }

 private:
  NetworkShape shape_;
  std::vector<Word> words_;
};

/// K activation vectors of one shape, stored column after column.
class ActivationBatch {
 public:
  ActivationBatch(const NetworkShape& shape, std::size_t columns);

  const NetworkShape& shape() const noexcept { return shape_; }
  std::size_t size() const noexcept { return columns_; }

  std::span<const Word> column(std::size_t k) const;
  std::span<Word> column(std::size_t k);

  ActivationVector vector(std::size_t k) const;
  void assign(std::size_t k, const ActivationVector& v);

  bool operator==(const ActivationBatch& other) const {
    return shape_ == other.shape_ && columns_ == other.columns_ && words_ == other.words_;
  }

 private:
  NetworkShape shape_;
  std::size_t columns_;
  std::vector<Word> words_;
};

/// How erased clusters are initialised: all-off (sum-of-sum, joint) or
/// all-on (sum-of-max, emulation).
enum class FillPolicy { ErasedOff, ErasedOn };

ActivationVector encode_message(const NetworkShape& shape, const Message& msg);
ActivationVector encode_probe(const NetworkShape& shape, const Probe& probe, FillPolicy fill);
ActivationBatch encode_probes(const NetworkShape& shape, std::span<const Probe> probes, FillPolicy fill);

/// Read-off of a converged state.
struct Extraction {
  enum class Kind { Unique, Ambiguous, Empty };

  Kind kind = Kind::Empty;
  /// Active symbols of each cluster, ascending; index c-1 holds cluster c.
  std::vector<std::vector<Symbol>> candidates;

  std::optional<Message> unique() const;
  /// True when msg can be assembled from the per-cluster candidates.
  bool contains(const Message& msg) const;
  /// Uniform pick per cluster. Requires kind != Empty.
  Message sample(std::mt19937_64& rng) const;
};

Extraction extract_messages(const ActivationVector& v);
Extraction extract_messages(const NetworkShape& shape, std::span<const Word> words);

}  // namespace gbnn
