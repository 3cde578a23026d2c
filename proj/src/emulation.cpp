#include "gbnn/emulation.hpp"

#include <cmath>
#include <string>

#include "gbnn/error.hpp"
#include "retrieval/engine.hpp"

namespace gbnn {
namespace {

void check_theta(std::uint64_t theta) {
  if (theta < 2) throw ConfigError("theta must be at least 2");
}

std::uint64_t bit_length(const BigInt& u) { return u == 0 ? 0 : boost::multiprecision::msb(u) + 1; }

double log2_of(const BigInt& u) {
  if (u == 0) return -INFINITY;
  const auto msb = boost::multiprecision::msb(u);
  // Keep 60 leading bits; the rest cannot move the result by a visible amount.
  const unsigned shift = msb > 60 ? static_cast<unsigned>(msb - 60) : 0U;
  const BigInt top = u >> shift;
  return std::log2(top.convert_to<double>()) + static_cast<double>(shift);
}

BigInt geometric_sum(std::uint32_t clusters, std::uint64_t theta) {
  BigInt sum = 0;
  BigInt power = 1;
  for (std::uint32_t c = 0; c < clusters; ++c) {
    sum += power;
    power *= theta;
  }
  return sum;
}

// a_c for neuron i0: active neighbours in each cluster, plus the self-loop.
template <typename Fn>
void for_each_signal(const NetworkShape& shape, std::span<const Word> row, std::span<const Word> v, std::size_t i0,
                     const simd::Kernels& k, Fn&& fn) {
  const auto wpc = shape.words_per_cluster();
  const auto own = i0 / shape.cluster_size();
  for (std::size_t c = 0; c < shape.clusters(); ++c) {
    auto a = k.and_popcount(row.subspan(c * wpc, wpc), v.subspan(c * wpc, wpc));
    if (c == own) a += detail::test_neuron(shape, v, i0) ? 1 : 0;
    fn(c, static_cast<std::uint64_t>(a));
  }
}

}  // namespace

CarrierMatrix::CarrierMatrix(const WeightMatrix& w, std::uint64_t theta) : weights_(w), theta_(theta) {
  check_theta(theta);
  BigInt power = 1;
  for (std::uint32_t c = 0; c < w.shape().clusters(); ++c) {
    carriers_.push_back(power);
    power *= theta;
  }
}

const BigInt& CarrierMatrix::carrier(std::uint32_t cluster) const {
  if (cluster < 1 || cluster > carriers_.size()) throw RangeError("cluster out of range");
  return carriers_[cluster - 1];
}

BigInt CarrierMatrix::entry(std::size_t i, std::size_t j) const {
  neuron_position(shape(), i);
  const auto pos = neuron_position(shape(), j);
  if (i == j || weights_.connected(i, j)) return carriers_[pos.cluster - 1];
  return 0;
}

CarrierMatrix build_carrier(const WeightMatrix& w, std::uint64_t theta) { return CarrierMatrix(w, theta); }

std::vector<BigInt> aggregate(const CarrierMatrix& omega, const ActivationVector& v) {
  const auto& shape = omega.shape();
  if (!(v.shape() == shape)) throw ShapeError("activation shape differs from carrier shape");
  const auto& k = simd::active_kernels();
  std::vector<BigInt> u(shape.total());
  for (std::size_t i0 = 0; i0 < shape.total(); ++i0)
    for_each_signal(shape, omega.weights().row(i0), v.words(), i0, k, [&](std::size_t c, std::uint64_t a) {
      if (a) u[i0] += omega.carrier(static_cast<std::uint32_t>(c + 1)) * a;
    });
  return u;
}

std::uint32_t decode_score(const BigInt& u, std::uint64_t theta, std::uint32_t clusters) {
  check_theta(theta);
  BigInt rest = u;
  std::uint32_t s = 0;
  for (std::uint32_t c = 0; c < clusters && rest != 0; ++c) {
    if (rest % theta != 0) ++s;
    rest /= theta;
  }
  return s;
}

std::uint32_t decode_score(std::uint64_t u, std::uint64_t theta, std::uint32_t clusters) {
  check_theta(theta);
  std::uint32_t s = 0;
  for (std::uint32_t c = 0; c < clusters && u != 0; ++c) {
    if (u % theta != 0) ++s;
    u /= theta;
  }
  return s;
}

std::uint64_t bits_required(std::uint32_t clusters, std::uint32_t cluster_size, std::uint64_t theta) {
  check_theta(theta);
  return bit_length(geometric_sum(clusters, theta) * cluster_size);
}

std::uint64_t bits_required_one_signal(std::uint32_t clusters, std::uint64_t theta) {
  check_theta(theta);
  return bit_length(geometric_sum(clusters, theta));
}

std::uint64_t nominal_bits(std::uint32_t clusters, std::uint32_t cluster_size, std::uint64_t theta) {
  check_theta(theta);
  const auto u = geometric_sum(clusters, theta) * cluster_size;
  return u == 0 ? 0 : static_cast<std::uint64_t>(std::llround(log2_of(u)));
}

std::uint64_t nominal_bits_one_signal(std::uint32_t clusters, std::uint64_t theta) {
  check_theta(theta);
  const auto u = geometric_sum(clusters, theta);
  return u == 0 ? 0 : static_cast<std::uint64_t>(std::llround(log2_of(u)));
}

RetrievalOutcome run_emulated(const WeightMatrix& w, const ActivationBatch& v0, const RetrievalConfig& config,
                              const EmulationConfig& emu) {
  check_theta(emu.theta);
  const auto& shape = w.shape();
  const auto theta = emu.theta;
  const auto C = shape.clusters();
  const auto needed = bits_required(C, shape.cluster_size(), theta);
  const auto width = emu.fixed_width;
  if (width && *width == 0) throw ConfigError("fixed width must be positive");
  const bool narrow = needed <= 64;

  std::vector<std::uint64_t> carriers64;
  std::vector<BigInt> carriers;
  {
    BigInt power = 1;
    for (std::uint32_t c = 0; c < C; ++c) {
      carriers.push_back(power);
      carriers64.push_back(narrow ? power.convert_to<std::uint64_t>() : 0);
      power *= theta;
    }
  }

  auto overflow = [&](std::size_t i0, std::uint64_t bits) {
    throw OverflowError("aggregate of neuron " + std::to_string(i0 + 1) + " needs " + std::to_string(bits) +
                        " bits, fixed width is " + std::to_string(*width));
  };

  return detail::iterate_max_selection(shape, v0, config, [&]() -> detail::TileScorer {
    return [&](std::span<const detail::ConstWordSpan> states, std::span<const detail::ScoreSpan> scores) {
      const auto& k = simd::active_kernels();
      BigInt big;
      for (std::size_t j = 0; j < states.size(); ++j) {
        auto out = scores[j];
        std::fill(out.begin(), out.end(), 0);
        for (std::size_t i0 = 0; i0 < shape.total(); ++i0) {
          const auto row = w.row(i0);
          std::uint32_t s = 0;
          if (narrow) {
            // The worst case fits in 64 bits, so this sum cannot wrap.
            std::uint64_t u = 0;
            for_each_signal(shape, row, states[j], i0, k, [&](std::size_t c, std::uint64_t a) { u += a * carriers64[c]; });
            if (width && std::bit_width(u) > *width) overflow(i0, std::bit_width(u));
            s = decode_score(u, theta, C);
          } else {
            big = 0;
            for_each_signal(shape, row, states[j], i0, k, [&](std::size_t c, std::uint64_t a) {
              if (a) big += carriers[c] * a;
            });
            if (width && bit_length(big) > *width) overflow(i0, bit_length(big));
            s = decode_score(big, theta, C);
          }
          out[shape.padded_index(i0)] = static_cast<std::int32_t>(s);
        }
      }
    };
  });
}

}  // namespace gbnn
