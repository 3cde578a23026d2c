#include "gbnn/storage.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "gbnn/error.hpp"

namespace gbnn {
namespace {

constexpr std::array<char, 8> kMagic{'G', 'B', 'N', 'N', 'W', 'M', 'A', 'T'};

std::size_t word_of(const NetworkShape& shape, std::size_t j0) {
  return (j0 / shape.cluster_size()) * shape.words_per_cluster() + (j0 % shape.cluster_size()) / kWordBits;
}

Word mask_of(const NetworkShape& shape, std::size_t j0) {
  return Word{1} << ((j0 % shape.cluster_size()) % kWordBits);
}

template <typename T>
void put_le(std::ostream& out, T value) {
  std::array<char, sizeof(T)> bytes{};
  for (std::size_t b = 0; b < sizeof(T); ++b) bytes[b] = static_cast<char>((value >> (8 * b)) & 0xffU);
  out.write(bytes.data(), bytes.size());
}

template <typename T>
T get_le(std::istream& in, const char* what) {
  std::array<unsigned char, sizeof(T)> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (in.gcount() != static_cast<std::streamsize>(bytes.size()))
    throw FormatError(std::string("truncated header field: ") + what);
  T value = 0;
  for (std::size_t b = 0; b < sizeof(T); ++b) value |= static_cast<T>(bytes[b]) << (8 * b);
  return value;
}

}  // namespace

WeightMatrix::WeightMatrix(const NetworkShape& shape) : shape_(shape), bits_(shape.total() * shape.words(), 0) {}

void WeightMatrix::set_bit(std::size_t i0, std::size_t j0) noexcept {
  bits_[i0 * shape_.words() + word_of(shape_, j0)] |= mask_of(shape_, j0);
}

bool WeightMatrix::connected(std::size_t i, std::size_t j) const {
  const auto pi = neuron_position(shape_, i);
  const auto pj = neuron_position(shape_, j);
  if (pi.cluster == pj.cluster) return false;
  return (bits_[(i - 1) * shape_.words() + word_of(shape_, j - 1)] & mask_of(shape_, j - 1)) != 0;
}

void WeightMatrix::connect(std::size_t i, std::size_t j) {
  const auto pi = neuron_position(shape_, i);
  const auto pj = neuron_position(shape_, j);
  if (pi.cluster == pj.cluster) throw RangeError("edges only exist between different clusters");
  set_bit(i - 1, j - 1);
  set_bit(j - 1, i - 1);
}

std::size_t WeightMatrix::edge_count() const noexcept {
  std::size_t n = 0;
  for (Word w : bits_) n += static_cast<std::size_t>(std::popcount(w));
  return n / 2;
}

void store(WeightMatrix& w, const Message& msg) {
  const auto& shape = w.shape();
  msg.validate(shape);
  const auto clusters = shape.clusters();
  for (std::uint32_t a = 0; a < clusters; ++a) {
    const auto ia = std::size_t{a} * shape.cluster_size() + msg.symbols()[a] - 1;
    for (std::uint32_t b = a + 1; b < clusters; ++b) {
      const auto ib = std::size_t{b} * shape.cluster_size() + msg.symbols()[b] - 1;
      w.set_bit(ia, ib);
      w.set_bit(ib, ia);
    }
  }
  ++w.stored_count_;
}

bool recognize(const WeightMatrix& w, const Message& msg) {
  const auto& shape = w.shape();
  msg.validate(shape);
  for (std::uint32_t a = 1; a <= shape.clusters(); ++a)
    for (std::uint32_t b = a + 1; b <= shape.clusters(); ++b)
      if (!w.connected(neuron_index(shape, a, msg.symbol(a)), neuron_index(shape, b, msg.symbol(b)))) return false;
  return true;
}

// ---------------------------------------------------------------------------

bool SparseWeightView::contains(std::size_t i, std::size_t j) const {
  const auto pi = neuron_position(shape_, i);
  neuron_position(shape_, j);
  const auto seg = segment(j - 1, pi.cluster - 1);
  return std::binary_search(seg.begin(), seg.end(), static_cast<std::uint32_t>(i - 1));
}

std::vector<std::size_t> SparseWeightView::column(std::size_t j) const {
  neuron_position(shape_, j);
  const auto C = shape_.clusters();
  std::vector<std::size_t> out;
  for (auto at = segment_start_[(j - 1) * C]; at < segment_start_[j * C]; ++at) out.push_back(rows_[at] + 1);
  return out;
}

WeightMatrix SparseWeightView::to_dense() const {
  WeightMatrix w(shape_);
  for (std::size_t j = 1; j <= shape_.total(); ++j)
    for (auto i : column(j))
      if (i < j) w.connect(i, j);
  return w;
}

SparseWeightView sparsify(const WeightMatrix& w) {
  const auto& shape = w.shape();
  const auto n = shape.total();
  const auto C = shape.clusters();
  const auto wpc = shape.words_per_cluster();
  SparseWeightView view(shape);
  view.segment_start_.reserve(n * C + 1);
  view.rows_.reserve(w.edge_count() * 2);
  // W is symmetric, so row j0 lists the nonzero rows of column j0.
  for (std::size_t j0 = 0; j0 < n; ++j0) {
    const auto row = w.row(j0);
    for (std::size_t c = 0; c < C; ++c) {
      view.segment_start_.push_back(view.rows_.size());
      for (std::size_t k = 0; k < wpc; ++k)
        for (Word bits = row[c * wpc + k]; bits; bits &= bits - 1)
          view.rows_.push_back(static_cast<std::uint32_t>(
              c * shape.cluster_size() + k * kWordBits + static_cast<std::size_t>(std::countr_zero(bits))));
    }
  }
  view.segment_start_.push_back(view.rows_.size());
  return view;
}

// ---------------------------------------------------------------------------

void save(const WeightMatrix& w, std::ostream& out) {
  const auto& shape = w.shape();
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(out, kWeightFormatVersion);
  put_le<std::uint32_t>(out, shape.clusters());
  put_le<std::uint32_t>(out, shape.cluster_size());
  put_le<std::uint64_t>(out, w.stored_count());

  const auto n = shape.total();
  std::vector<char> payload((n * (n - 1) / 2 + 7) / 8, 0);
  std::size_t bit = 0;
  for (std::size_t i0 = 0; i0 < n; ++i0) {
    const auto row = w.row(i0);
    for (std::size_t j0 = i0 + 1; j0 < n; ++j0, ++bit)
      if (row[word_of(shape, j0)] & mask_of(shape, j0))
        payload[bit / 8] = static_cast<char>(payload[bit / 8] | (1 << (bit % 8)));
  }
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!out) throw FormatError("failed to write weight matrix");
}

WeightMatrix load(std::istream& in) {
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (in.gcount() != static_cast<std::streamsize>(magic.size()) || magic != kMagic)
    throw FormatError("not a weight matrix image (bad magic)");
  const auto version = get_le<std::uint32_t>(in, "version");
  if (version != kWeightFormatVersion) throw FormatError("unsupported weight matrix version " + std::to_string(version));
  const auto clusters = get_le<std::uint32_t>(in, "clusters");
  const auto size = get_le<std::uint32_t>(in, "cluster size");
  const auto stored = get_le<std::uint64_t>(in, "stored count");

  std::optional<NetworkShape> parsed;
  try {
    parsed.emplace(clusters, size);
  } catch (const RangeError& e) {
    throw FormatError(std::string("invalid shape in header: ") + e.what());
  }
  const auto& shape = *parsed;
  const auto n = shape.total();
  std::vector<unsigned char> payload((n * (n - 1) / 2 + 7) / 8);
  in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
  if (in.gcount() != static_cast<std::streamsize>(payload.size())) throw FormatError("truncated weight payload");
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes after weight payload");

  WeightMatrix w(shape);
  std::size_t bit = 0;
  for (std::size_t i0 = 0; i0 < n; ++i0) {
    for (std::size_t j0 = i0 + 1; j0 < n; ++j0, ++bit) {
      if (!((payload[bit / 8] >> (bit % 8)) & 1U)) continue;
      if (shape.cluster_of(i0) == shape.cluster_of(j0)) throw FormatError("within-cluster edge in weight payload");
      w.set_bit(i0, j0);
      w.set_bit(j0, i0);
    }
  }
  const auto total_bits = payload.size() * 8;
  for (; bit < total_bits; ++bit)
    if ((payload[bit / 8] >> (bit % 8)) & 1U) throw FormatError("nonzero padding in weight payload");
  w.stored_count_ = stored;
  return w;
}

void save_file(const WeightMatrix& w, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  save(w, out);
}

WeightMatrix load_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return load(in);
}

}  // namespace gbnn
