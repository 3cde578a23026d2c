#include <string>

#include "gbnn/error.hpp"
#include "gbnn/retrieval.hpp"

namespace gbnn {

std::string_view rule_name(Rule rule) {
  switch (rule) {
    case Rule::SumOfSum: return "sos";
    case Rule::SumOfMax: return "som";
    case Rule::Joint: return "joint";
    case Rule::Emulated: return "emu";
  }
  return "?";
}

std::optional<Rule> parse_rule(std::string_view name) {
  if (name == "sos" || name == "sum-of-sum") return Rule::SumOfSum;
  if (name == "som" || name == "sum-of-max") return Rule::SumOfMax;
  if (name == "joint") return Rule::Joint;
  if (name == "emu" || name == "emulated") return Rule::Emulated;
  return std::nullopt;
}

FillPolicy fill_policy(Rule rule) {
  return (rule == Rule::SumOfMax || rule == Rule::Emulated) ? FillPolicy::ErasedOn : FillPolicy::ErasedOff;
}

void RetrievalConfig::validate() const {
  if (max_iters < 1) throw ConfigError("max_iters must be at least 1");
  if (batch < 1) throw ConfigError("batch must be at least 1");
  if ((rule == Rule::SumOfMax || rule == Rule::Joint) && gamma == 0)
    throw ConfigError(std::string(rule_name(rule)) + " needs a positive gamma");
}

ClusterMask::ClusterMask(std::size_t columns, std::uint32_t clusters, bool value)
    : columns_(columns), clusters_(clusters), bits_(columns * clusters, value ? 1 : 0) {}

ClusterMask ClusterMask::empty_clusters(const ActivationBatch& v) {
  const auto& shape = v.shape();
  ClusterMask mask(v.size(), shape.clusters());
  const auto wpc = shape.words_per_cluster();
  for (std::size_t k = 0; k < v.size(); ++k) {
    const auto col = v.column(k);
    for (std::uint32_t c = 0; c < shape.clusters(); ++c) {
      bool any = false;
      for (std::size_t w = 0; w < wpc; ++w) any = any || col[c * wpc + w] != 0;
      mask.set(k, c + 1, !any);
    }
  }
  return mask;
}

std::size_t ClusterMask::count(std::size_t k) const {
  std::size_t n = 0;
  for (std::uint32_t c = 0; c < clusters_; ++c) n += row(k)[c];
  return n;
}

}  // namespace gbnn
