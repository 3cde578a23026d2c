#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <random>
#include <sstream>

#include "gbnn/error.hpp"
#include "gbnn/storage.hpp"
#include "oracles.hpp"

using namespace gbnn;

namespace {

// The 9x9 matrix displayed for the four-message example, diagonal removed.
const int kExampleW[9][9] = {
    {0, 0, 0, 1, 0, 1, 1, 0, 0}, {0, 0, 0, 0, 1, 0, 1, 0, 0}, {0, 0, 0, 0, 1, 0, 1, 0, 0},
    {1, 0, 0, 0, 0, 0, 1, 0, 0}, {0, 1, 1, 0, 0, 0, 1, 0, 0}, {1, 0, 0, 0, 0, 0, 1, 0, 0},
    {1, 1, 1, 1, 1, 1, 0, 0, 0}, {0, 0, 0, 0, 0, 0, 0, 0, 0}, {0, 0, 0, 0, 0, 0, 0, 0, 0},
};

WeightMatrix example() {
  WeightMatrix w(NetworkShape(3, 3));
  for (const char* m : {"1,1,1", "2,2,1", "3,2,1", "1,3,1"}) store(w, Message::parse(m));
  return w;
}

std::vector<Message> random_corpus(const NetworkShape& s, std::size_t count, std::mt19937_64& rng) {
  std::uniform_int_distribution<Symbol> pick(1, s.cluster_size());
  std::vector<Message> out;
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<Symbol> sym(s.clusters());
    for (auto& x : sym) x = pick(rng);
    out.emplace_back(sym);
  }
  return out;
}

void check_structure(const WeightMatrix& w) {
  const auto& s = w.shape();
  for (std::size_t i = 1; i <= s.total(); ++i)
    for (std::size_t j = 1; j <= s.total(); ++j) {
      CHECK(w.connected(i, j) == w.connected(j, i));
      if (neuron_position(s, i).cluster == neuron_position(s, j).cluster) CHECK_FALSE(w.connected(i, j));
    }
}

}  // namespace

TEST_SUITE("storage") {
  TEST_CASE("single clique") {
    WeightMatrix w(NetworkShape(3, 3));
    store(w, Message::parse("1,1,1"));
    CHECK(w.edge_count() == 3);
    CHECK(w.connected(1, 4));
    CHECK(w.connected(7, 1));
    CHECK(w.connected(4, 7));
    CHECK(w.stored_count() == 1);
  }

  TEST_CASE("four-message example matrix") {
    const auto w = example();
    for (int i = 0; i < 9; ++i)
      for (int j = 0; j < 9; ++j) {
        CAPTURE(i);
        CAPTURE(j);
        CHECK(w.connected(i + 1, j + 1) == (kExampleW[i][j] == 1));
      }
    CHECK(recognize(w, Message::parse("2,2,1")));
    CHECK_FALSE(recognize(w, Message::parse("2,1,1")));
    CHECK(w.stored_count() == 4);
  }

  TEST_CASE("recognize agrees with a brute-force edge check") {
    const auto w = example();
    const auto g = oracle::from_messages(3, 3, {{1, 1, 1}, {2, 2, 1}, {3, 2, 1}, {1, 3, 1}});
    for (Symbol a = 1; a <= 3; ++a)
      for (Symbol b = 1; b <= 3; ++b)
        for (Symbol c = 1; c <= 3; ++c) {
          const std::size_t i = a - 1, j = 3 + b - 1, k = 6 + c - 1;
          const bool all = g.w[i][j] && g.w[i][k] && g.w[j][k];
          CHECK(recognize(w, Message({a, b, c})) == all);
        }
  }

  TEST_CASE("empty network recognizes nothing") {
    WeightMatrix w(NetworkShape(2, 4));
    for (Symbol a = 1; a <= 4; ++a)
      for (Symbol b = 1; b <= 4; ++b) CHECK_FALSE(recognize(w, Message({a, b})));
  }

  TEST_CASE("errors") {
    WeightMatrix w(NetworkShape(3, 3));
    CHECK_THROWS_AS(store(w, Message::parse("1,1")), ShapeError);
    CHECK_THROWS_AS(store(w, Message::parse("1,1,4")), RangeError);
    CHECK_THROWS_AS(w.connect(1, 2), RangeError);
    CHECK_THROWS_AS(w.connected(0, 1), RangeError);
  }

  TEST_CASE("idempotent and order independent") {
    const NetworkShape s(4, 6);
    std::mt19937_64 rng(31);
    for (int t = 0; t < 50; ++t) {
      auto corpus = random_corpus(s, 1 + rng() % 20, rng);
      WeightMatrix a(s);
      for (const auto& m : corpus) store(a, m);
      check_structure(a);
      std::shuffle(corpus.begin(), corpus.end(), rng);
      WeightMatrix b(s);
      for (const auto& m : corpus) store(b, m);
      CHECK(a == b);
      store(b, corpus.front());
      CHECK(a.same_adjacency(b));
      CHECK(b.stored_count() == a.stored_count() + 1);
      for (const auto& m : corpus) CHECK(recognize(a, m));
    }
  }

  TEST_CASE("store matches the oracle graph") {
    const NetworkShape s(5, 7);
    std::mt19937_64 rng(32);
    const auto corpus = random_corpus(s, 30, rng);
    std::vector<std::vector<std::uint32_t>> raw;
    WeightMatrix w(s);
    for (const auto& m : corpus) {
      store(w, m);
      raw.emplace_back(m.symbols().begin(), m.symbols().end());
    }
    const auto g = oracle::from_messages(5, 7, raw);
    for (std::size_t i = 0; i < g.n(); ++i)
      for (std::size_t j = 0; j < g.n(); ++j) CHECK(w.connected(i + 1, j + 1) == (g.w[i][j] == 1));
  }

  TEST_CASE("sparse view") {
    const auto w = example();
    const auto sp = sparsify(w);
    CHECK(sp.column(7) == std::vector<std::size_t>{1, 2, 3, 4, 5, 6});
    CHECK(sp.column(8).empty());
    CHECK(sp.nonzeros() == 2 * w.edge_count());
    CHECK(sparsify(WeightMatrix(NetworkShape(3, 3))).nonzeros() == 0);
  }

  TEST_CASE("sparse view agrees with the dense matrix everywhere") {
    std::mt19937_64 rng(33);
    for (int t = 0; t < 20; ++t) {
      const NetworkShape s(2 + rng() % 4, 1 + rng() % 70);
      const auto g = oracle::random_graph(s.clusters(), s.cluster_size(), 0.3, rng);
      const auto w = oracle::to_matrix(g);
      const auto sp = sparsify(w);
      for (std::size_t i = 1; i <= s.total(); ++i)
        for (std::size_t j = 1; j <= s.total(); ++j) CHECK(sp.contains(i, j) == w.connected(i, j));
      for (std::size_t j = 1; j <= s.total(); ++j) {
        const auto col = sp.column(j);
        CHECK(std::is_sorted(col.begin(), col.end()));
      }
      CHECK(sp.to_dense().same_adjacency(w));
    }
  }

  TEST_CASE("save and load") {
    const auto w = example();
    std::stringstream buf;
    save(w, buf);
    const auto image = buf.str();
    // Header: 8 magic, 4 version, 4 C, 4 L, 8 stored; 36 pairs in the upper triangle.
    CHECK(image.size() == 28 + 5);
    std::istringstream in(image);
    CHECK(load(in) == w);

    auto bad_magic = image;
    bad_magic[0] = 'X';
    std::istringstream a(bad_magic);
    CHECK_THROWS_AS(load(a), FormatError);

    std::istringstream b(image.substr(0, image.size() - 1));
    CHECK_THROWS_AS(load(b), FormatError);

    std::istringstream c(image + "x");
    CHECK_THROWS_AS(load(c), FormatError);

    auto bad_version = image;
    bad_version[8] = 9;
    std::istringstream d(bad_version);
    CHECK_THROWS_AS(load(d), FormatError);

    std::istringstream e(image.substr(0, 10));
    CHECK_THROWS_AS(load(e), FormatError);
  }

  TEST_CASE("save and load random networks through files") {
    std::mt19937_64 rng(34);
    const auto dir = std::filesystem::temp_directory_path();
    for (int t = 0; t < 10; ++t) {
      const NetworkShape s(2 + rng() % 5, 1 + rng() % 90);
      WeightMatrix w(s);
      for (const auto& m : random_corpus(s, rng() % 40, rng)) store(w, m);
      const auto path = dir / ("gbnn_storage_" + std::to_string(t) + ".bin");
      save_file(w, path);
      CHECK(load_file(path) == w);
      std::filesystem::remove(path);
    }
    CHECK_THROWS(load_file(dir / "gbnn_does_not_exist.bin"));
  }
}
