#include "gbnn/core.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <limits>

#include "gbnn/error.hpp"

namespace gbnn {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n'))
    s.remove_suffix(1);
  return s;
}

template <typename F>
void for_each_field(std::string_view text, F&& f) {
  text = trim(text);
  if (text.empty()) throw FormatError("empty message text");
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    const auto field = trim(text.substr(start, comma == std::string_view::npos ? text.npos : comma - start));
    if (field.empty()) throw FormatError("empty field in '" + std::string(text) + "'");
    f(field);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
}

Symbol parse_symbol(std::string_view field) {
  Symbol value = 0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc{} || ptr != end) throw FormatError("bad symbol '" + std::string(field) + "'");
  return value;
}

void check_symbol(const NetworkShape& shape, std::size_t cluster0, Symbol s) {
  if (s < 1 || s > shape.cluster_size())
    throw RangeError("symbol " + std::to_string(s) + " in cluster " + std::to_string(cluster0 + 1) +
                     " outside 1.." + std::to_string(shape.cluster_size()));
}

void set_bit(std::span<Word> words, const NetworkShape& shape, std::size_t cluster0, std::size_t local0) {
  const auto w = cluster0 * shape.words_per_cluster() + local0 / kWordBits;
  words[w] |= Word{1} << (local0 % kWordBits);
}

}  // namespace

NetworkShape::NetworkShape(std::uint32_t clusters, std::uint32_t cluster_size)
    : clusters_(clusters), cluster_size_(cluster_size) {
  if (clusters < 2) throw RangeError("a network needs at least 2 clusters");
  if (cluster_size < 1) throw RangeError("cluster size must be at least 1");
  if (std::size_t{clusters} * cluster_size > std::numeric_limits<std::uint32_t>::max() / 2)
    throw RangeError("network too large");
  words_per_cluster_ = (cluster_size + kWordBits - 1) / kWordBits;
}

std::size_t neuron_index(const NetworkShape& shape, std::uint32_t cluster, std::uint32_t local) {
  if (cluster < 1 || cluster > shape.clusters())
    throw RangeError("cluster " + std::to_string(cluster) + " outside 1.." + std::to_string(shape.clusters()));
  if (local < 1 || local > shape.cluster_size())
    throw RangeError("neuron " + std::to_string(local) + " outside 1.." + std::to_string(shape.cluster_size()));
  return std::size_t{cluster - 1} * shape.cluster_size() + local;
}

NeuronPosition neuron_position(const NetworkShape& shape, std::size_t neuron) {
  if (neuron < 1 || neuron > shape.total())
    throw RangeError("neuron " + std::to_string(neuron) + " outside 1.." + std::to_string(shape.total()));
  const auto zero = neuron - 1;
  return {static_cast<std::uint32_t>(zero / shape.cluster_size() + 1),
          static_cast<std::uint32_t>(zero % shape.cluster_size() + 1)};
}

// ---------------------------------------------------------------------------

Message Message::parse(std::string_view text) {
  std::vector<Symbol> symbols;
  for_each_field(text, [&](std::string_view f) {
    if (f == "?") throw FormatError("erased slot in a complete message");
    symbols.push_back(parse_symbol(f));
  });
  return Message(std::move(symbols));
}

void Message::validate(const NetworkShape& shape) const {
  if (symbols_.size() != shape.clusters())
    throw ShapeError("message has " + std::to_string(symbols_.size()) + " symbols, network has " +
                     std::to_string(shape.clusters()) + " clusters");
  for (std::size_t c = 0; c < symbols_.size(); ++c) check_symbol(shape, c, symbols_[c]);
}

std::string Message::to_string() const {
  std::string out;
  for (std::size_t c = 0; c < symbols_.size(); ++c) {
    if (c) out += ',';
    out += std::to_string(symbols_[c]);
  }
  return out;
}

// ---------------------------------------------------------------------------

Probe Probe::from_message(const Message& msg) {
  std::vector<Slot> slots(msg.symbols().begin(), msg.symbols().end());
  return Probe(std::move(slots));
}

Probe Probe::parse(std::string_view text) {
  std::vector<Slot> slots;
  for_each_field(text, [&](std::string_view f) {
    if (f == "?")
      slots.emplace_back(std::nullopt);
    else
      slots.emplace_back(parse_symbol(f));
  });
  return Probe(std::move(slots));
}

std::size_t Probe::erased_count() const noexcept {
  return static_cast<std::size_t>(std::count(slots_.begin(), slots_.end(), std::nullopt));
}

bool Probe::matches(const Message& msg) const {
  if (msg.size() != slots_.size()) return false;
  for (std::size_t c = 0; c < slots_.size(); ++c)
    if (slots_[c] && *slots_[c] != msg.symbols()[c]) return false;
  return true;
}

void Probe::validate(const NetworkShape& shape) const {
  if (slots_.size() != shape.clusters())
    throw ShapeError("probe has " + std::to_string(slots_.size()) + " slots, network has " +
                     std::to_string(shape.clusters()) + " clusters");
  for (std::size_t c = 0; c < slots_.size(); ++c)
    if (slots_[c]) check_symbol(shape, c, *slots_[c]);
}

std::string Probe::to_string() const {
  std::string out;
  for (std::size_t c = 0; c < slots_.size(); ++c) {
    if (c) out += ',';
    out += slots_[c] ? std::to_string(*slots_[c]) : std::string("?");
  }
  return out;
}

// ---------------------------------------------------------------------------

ActivationVector::ActivationVector(const NetworkShape& shape) : shape_(shape), words_(shape.words(), 0) {}

ActivationVector ActivationVector::from_bits(const NetworkShape& shape, std::string_view bits) {
  ActivationVector v(shape);
  std::size_t neuron = 0;
  for (char ch : bits) {
    if (ch == ' ' || ch == '\t' || ch == '\n') continue;
    if (ch != '0' && ch != '1') throw FormatError("activation bits must be 0 or 1");
    ++neuron;
    if (neuron > shape.total()) throw ShapeError("too many activation bits");
    if (ch == '1') v.set(neuron);
  }
  if (neuron != shape.total()) throw ShapeError("too few activation bits");
  return v;
}

bool ActivationVector::active(std::size_t neuron) const {
  const auto [c, l] = neuron_position(shape_, neuron);
  const auto w = (c - 1) * shape_.words_per_cluster() + (l - 1) / kWordBits;
  return (words_[w] >> ((l - 1) % kWordBits)) & 1U;
}

void ActivationVector::set(std::size_t neuron, bool on) {
  const auto [c, l] = neuron_position(shape_, neuron);
  const auto w = (c - 1) * shape_.words_per_cluster() + (l - 1) / kWordBits;
  const Word mask = Word{1} << ((l - 1) % kWordBits);
  words_[w] = on ? (words_[w] | mask) : (words_[w] & ~mask);
}

std::size_t ActivationVector::count() const noexcept {
  std::size_t n = 0;
  for (Word w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

std::size_t ActivationVector::cluster_count(std::uint32_t cluster) const {
  if (cluster < 1 || cluster > shape_.clusters()) throw RangeError("cluster out of range");
  const auto wpc = shape_.words_per_cluster();
  std::size_t n = 0;
  for (std::size_t w = 0; w < wpc; ++w) n += static_cast<std::size_t>(std::popcount(words_[(cluster - 1) * wpc + w]));
  return n;
}

std::vector<std::size_t> ActivationVector::active_neurons() const {
  std::vector<std::size_t> out;
  const auto wpc = shape_.words_per_cluster();
  for (std::size_t c = 0; c < shape_.clusters(); ++c)
    for (std::size_t w = 0; w < wpc; ++w)
      for (Word bits = words_[c * wpc + w]; bits; bits &= bits - 1)
        out.push_back(c * shape_.cluster_size() + w * kWordBits + static_cast<std::size_t>(std::countr_zero(bits)) + 1);
  return out;
}

std::string ActivationVector::to_bit_string(bool grouped) const {
  std::string out;
  out.reserve(shape_.total() + shape_.clusters());
  for (std::size_t i = 1; i <= shape_.total(); ++i) {
    if (grouped && i > 1 && (i - 1) % shape_.cluster_size() == 0) out += ' ';
    out += active(i) ? '1' : '0';
  }
  return out;
}

// ---------------------------------------------------------------------------

ActivationBatch::ActivationBatch(const NetworkShape& shape, std::size_t columns)
    : shape_(shape), columns_(columns), words_(shape.words() * columns, 0) {}

std::span<const Word> ActivationBatch::column(std::size_t k) const {
  if (k >= columns_) throw RangeError("batch column out of range");
  return std::span<const Word>(words_).subspan(k * shape_.words(), shape_.words());
}

std::span<Word> ActivationBatch::column(std::size_t k) {
  if (k >= columns_) throw RangeError("batch column out of range");
  return std::span<Word>(words_).subspan(k * shape_.words(), shape_.words());
}

ActivationVector ActivationBatch::vector(std::size_t k) const {
  ActivationVector v(shape_);
  const auto src = column(k);
  std::copy(src.begin(), src.end(), v.words().begin());
  return v;
}

void ActivationBatch::assign(std::size_t k, const ActivationVector& v) {
  if (!(v.shape() == shape_)) throw ShapeError("activation vector shape differs from batch shape");
  std::copy(v.words().begin(), v.words().end(), column(k).begin());
}

// ---------------------------------------------------------------------------

ActivationVector encode_message(const NetworkShape& shape, const Message& msg) {
  msg.validate(shape);
  ActivationVector v(shape);
  for (std::size_t c = 0; c < shape.clusters(); ++c) set_bit(v.words(), shape, c, msg.symbols()[c] - 1);
  return v;
}

ActivationVector encode_probe(const NetworkShape& shape, const Probe& probe, FillPolicy fill) {
  probe.validate(shape);
  ActivationVector v(shape);
  for (std::size_t c = 0; c < shape.clusters(); ++c) {
    const auto& slot = probe.slots()[c];
    if (slot) {
      set_bit(v.words(), shape, c, *slot - 1);
    } else if (fill == FillPolicy::ErasedOn) {
      for (std::size_t l = 0; l < shape.cluster_size(); ++l) set_bit(v.words(), shape, c, l);
    }
  }
  return v;
}

ActivationBatch encode_probes(const NetworkShape& shape, std::span<const Probe> probes, FillPolicy fill) {
  ActivationBatch batch(shape, probes.size());
  for (std::size_t k = 0; k < probes.size(); ++k) batch.assign(k, encode_probe(shape, probes[k], fill));
  return batch;
}

// ---------------------------------------------------------------------------

std::optional<Message> Extraction::unique() const {
  if (kind != Kind::Unique) return std::nullopt;
  std::vector<Symbol> symbols;
  symbols.reserve(candidates.size());
  for (const auto& c : candidates) symbols.push_back(c.front());
  return Message(std::move(symbols));
}

bool Extraction::contains(const Message& msg) const {
  if (kind == Kind::Empty || msg.size() != candidates.size()) return false;
  for (std::size_t c = 0; c < candidates.size(); ++c)
    if (!std::binary_search(candidates[c].begin(), candidates[c].end(), msg.symbols()[c])) return false;
  return true;
}

Message Extraction::sample(std::mt19937_64& rng) const {
  if (kind == Kind::Empty) throw RangeError("cannot sample from an empty extraction");
  std::vector<Symbol> symbols;
  symbols.reserve(candidates.size());
  for (const auto& c : candidates) {
    std::uniform_int_distribution<std::size_t> pick(0, c.size() - 1);
    symbols.push_back(c[pick(rng)]);
  }
  return Message(std::move(symbols));
}

Extraction extract_messages(const NetworkShape& shape, std::span<const Word> words) {
  if (words.size() != shape.words()) throw ShapeError("activation words do not match shape");
  Extraction out;
  out.candidates.resize(shape.clusters());
  bool empty = false;
  bool ambiguous = false;
  const auto wpc = shape.words_per_cluster();
  for (std::size_t c = 0; c < shape.clusters(); ++c) {
    auto& cand = out.candidates[c];
    for (std::size_t w = 0; w < wpc; ++w)
      for (Word bits = words[c * wpc + w]; bits; bits &= bits - 1)
        cand.push_back(static_cast<Symbol>(w * kWordBits + static_cast<std::size_t>(std::countr_zero(bits)) + 1));
    if (cand.empty()) empty = true;
    if (cand.size() > 1) ambiguous = true;
  }
  out.kind = empty ? Extraction::Kind::Empty : ambiguous ? Extraction::Kind::Ambiguous : Extraction::Kind::Unique;
  return out;
}

Extraction extract_messages(const ActivationVector& v) { return extract_messages(v.shape(), v.words()); }

}  // namespace gbnn
