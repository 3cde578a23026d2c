#pragma once

// Clique storage. A WeightMatrix is the symmetric binary adjacency of the
// C-partite network; each row is packed in the same per-cluster word layout
// as an ActivationVector so that row & activation is a plain word AND. The
// self-loop weight gamma is a retrieval parameter and is never stored.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "gbnn/core.hpp"

namespace gbnn {

class WeightMatrix {
 public:
  explicit WeightMatrix(const NetworkShape& shape);

  const NetworkShape& shape() const noexcept { return shape_; }
  std::uint64_t stored_count() const noexcept { return stored_count_; }

  /// 1-based neurons. The diagonal and within-cluster pairs are always false.
  bool connected(std::size_t i, std::size_t j) const;
  /// Inserts the undirected edge i--j. Throws RangeError for within-cluster pairs.
  void connect(std::size_t i, std::size_t j);

  /// Packed row of the zero-based neuron i0.
  std::span<const Word> row(std::size_t i0) const noexcept {
    return {bits_.data() + i0 * shape_.words(), shape_.words()};
  }

  /// Number of undirected edges.
  std::size_t edge_count() const noexcept;

  bool operator==(const WeightMatrix& other) const {
    return shape_ == other.shape_ && stored_count_ == other.stored_count_ && bits_ == other.bits_;
  }
  bool same_adjacency(const WeightMatrix& other) const {
    return shape_ == other.shape_ && bits_ == other.bits_;
  }

 private:
  friend void store(WeightMatrix&, const Message&);
  friend WeightMatrix load(std::istream&);

  void set_bit(std::size_t i0, std::size_t j0) noexcept;

  NetworkShape shape_;
  std::vector<Word> bits_;
  std::uint64_t stored_count_ = 0;
};

/// OR-inserts the clique of msg and counts one store call.
void store(WeightMatrix& w, const Message& msg);

/// True iff every edge of msg's clique is present.
bool recognize(const WeightMatrix& w, const Message& msg);

/// Column-compressed adjacency. Each column's row list is sorted and split
/// into one segment per cluster.
class SparseWeightView {
 public:
  const NetworkShape& shape() const noexcept { return shape_; }
  std::size_t nonzeros() const noexcept { return rows_.size(); }

  /// 1-based neurons.
  bool contains(std::size_t i, std::size_t j) const;
  /// 1-based row indices of column j, ascending.
  std::vector<std::size_t> column(std::size_t j) const;

  /// Zero-based rows of column j0 that lie in cluster c0, ascending.
  std::span<const std::uint32_t> segment(std::size_t j0, std::size_t c0) const noexcept {
    const auto at = j0 * shape_.clusters() + c0;
    return {rows_.data() + segment_start_[at], segment_start_[at + 1] - segment_start_[at]};
  }

  /// Dense rebuild; stored_count is not carried by the sparse view and is 0.
  WeightMatrix to_dense() const;

 private:
  friend SparseWeightView sparsify(const WeightMatrix&);
  explicit SparseWeightView(const NetworkShape& shape) : shape_(shape) {}

  NetworkShape shape_;
  std::vector<std::size_t> segment_start_;  // n*C + 1 offsets into rows_
  std::vector<std::uint32_t> rows_;
};

SparseWeightView sparsify(const WeightMatrix& w);

/// Binary image: "GBNNWMAT", version, C, L, stored_count (little endian),
/// then the strict upper triangle packed row-major, LSB first.
void save(const WeightMatrix& w, std::ostream& out);
WeightMatrix load(std::istream& in);
void save_file(const WeightMatrix& w, const std::filesystem::path& path);
WeightMatrix load_file(const std::filesystem::path& path);

inline constexpr std::uint32_t kWeightFormatVersion = 1;

}  // namespace gbnn
