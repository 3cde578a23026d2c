#pragma once

// Sum-of-max scoring emulated by a single weighted matrix product. Signals
// from cluster c are carried on the power theta^(c-1), so
//   u_i = sum_c a_c theta^(c-1),  a_c = active neighbours of i in cluster c,
// and the score is the number of nonzero base-theta digits of u_i. With
// theta = L+1 no digit can carry and the score equals the sum-of-max score
// (gamma = 1). Smaller bases save bits but may alias.

#include <cstdint>
#include <optional>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "gbnn/retrieval.hpp"
#include "gbnn/storage.hpp"

namespace gbnn {

using BigInt = boost::multiprecision::cpp_int;

/// Omega_ij = w_ij * theta^(cluster(j)-1), with a unit self-loop on the
/// diagonal. Entries are produced on demand from the binary weights.
class CarrierMatrix {
 public:
  CarrierMatrix(const WeightMatrix& w, std::uint64_t theta);

  const NetworkShape& shape() const noexcept { return weights_.shape(); }
  std::uint64_t theta() const noexcept { return theta_; }
  const WeightMatrix& weights() const noexcept { return weights_; }

  /// theta^(cluster-1) for a 1-based cluster.
  const BigInt& carrier(std::uint32_t cluster) const;
  /// Entry for 1-based neurons.
  BigInt entry(std::size_t i, std::size_t j) const;

 private:
  WeightMatrix weights_;
  std::uint64_t theta_;
  std::vector<BigInt> carriers_;
};

/// Throws ConfigError when theta < 2.
CarrierMatrix build_carrier(const WeightMatrix& w, std::uint64_t theta);

/// u = Omega v.
std::vector<BigInt> aggregate(const CarrierMatrix& omega, const ActivationVector& v);

/// Number of nonzero digits among the C lowest base-theta digits of u.
std::uint32_t decode_score(const BigInt& u, std::uint64_t theta, std::uint32_t clusters);
std::uint32_t decode_score(std::uint64_t u, std::uint64_t theta, std::uint32_t clusters);

/// Bits needed to hold the worst case u = sum_c L theta^(c-1).
std::uint64_t bits_required(std::uint32_t clusters, std::uint32_t cluster_size, std::uint64_t theta);
/// Bits needed when each cluster sends exactly one signal: u = sum_c theta^(c-1).
std::uint64_t bits_required_one_signal(std::uint32_t clusters, std::uint64_t theta);
/// log2 of the worst-case u rounded to the nearest integer.
std::uint64_t nominal_bits(std::uint32_t clusters, std::uint32_t cluster_size, std::uint64_t theta);
std::uint64_t nominal_bits_one_signal(std::uint32_t clusters, std::uint64_t theta);

struct EmulationConfig {
  std::uint64_t theta = 2;
  /// When set, every u_i must fit in this many bits or OverflowError is thrown.
  std::optional<std::uint32_t> fixed_width;
};

/// Max-selection iteration on decoded scores; probes are erased->1 encodings.
/// gamma in config is ignored (the self-loop carries weight 1).
RetrievalOutcome run_emulated(const WeightMatrix& w, const ActivationBatch& v0, const RetrievalConfig& config,
                              const EmulationConfig& emu);

}  // namespace gbnn
