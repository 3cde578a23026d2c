#include <vector>

#include "gbnn/error.hpp"
#include "retrieval/engine.hpp"

namespace gbnn {

TreeReduction tree_reduce_any(std::span<const std::uint8_t> flags) {
  TreeReduction out;
  if (flags.empty()) return out;
  std::vector<std::uint8_t> level(flags.begin(), flags.end());
  // Each level ORs neighbouring pairs, halving the length.
  while (level.size() > 1) {
    const auto half = (level.size() + 1) / 2;
    for (std::size_t i = 0; i < half; ++i) {
      const auto right = 2 * i + 1 < level.size() ? level[2 * i + 1] : std::uint8_t{0};
      level[i] = static_cast<std::uint8_t>(level[2 * i] | right);
    }
    level.resize(half);
    ++out.levels;
  }
  out.any = level.front() != 0;
  return out;
}

bool convergence_check(const ActivationBatch& prev, const ActivationBatch& next, const ClusterMask* scope) {
  if (!(prev.shape() == next.shape()) || prev.size() != next.size())
    throw ShapeError("convergence check on batches of different shape");
  const auto& shape = prev.shape();
  if (scope && (scope->size() != prev.size() || scope->clusters() != shape.clusters()))
    throw ShapeError("convergence scope does not match the batch");

  const auto& kern = simd::active_kernels();
  const auto wpc = shape.words_per_cluster();
  std::vector<std::uint8_t> differs(prev.size() * shape.clusters(), 0);
  for (std::size_t k = 0; k < prev.size(); ++k) {
    const auto a = prev.column(k);
    const auto b = next.column(k);
    for (std::uint32_t c = 0; c < shape.clusters(); ++c) {
      if (scope && !scope->test(k, c + 1)) continue;
      differs[k * shape.clusters() + c] = !kern.equal(a.subspan(c * wpc, wpc), b.subspan(c * wpc, wpc));
    }
  }
  return !tree_reduce_any(differs).any;
}

}  // namespace gbnn
