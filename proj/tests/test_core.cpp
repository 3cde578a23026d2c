#include <doctest.h>

#include <random>
#include <set>

#include "gbnn/core.hpp"
#include "gbnn/error.hpp"

using namespace gbnn;

TEST_SUITE("core") {
  TEST_CASE("shape invariants") {
    const NetworkShape s(4, 16);
    CHECK(s.total() == 64);
    CHECK(s.words_per_cluster() == 1);
    CHECK(NetworkShape(3, 130).words_per_cluster() == 3);
    CHECK_THROWS_AS(NetworkShape(1, 4), RangeError);
    CHECK_THROWS_AS(NetworkShape(3, 0), RangeError);
  }

  TEST_CASE("neuron_index") {
    const NetworkShape s(4, 16);
    CHECK(neuron_index(s, 1, 1) == 1);
    CHECK(neuron_index(s, 3, 5) == 37);
    CHECK(neuron_position(s, 64) == NeuronPosition{4, 16});
    CHECK_THROWS_AS(neuron_index(s, 5, 1), RangeError);
    CHECK_THROWS_AS(neuron_index(s, 1, 17), RangeError);
    CHECK_THROWS_AS(neuron_index(s, 0, 1), RangeError);
    CHECK_THROWS_AS(neuron_position(s, 0), RangeError);
    CHECK_THROWS_AS(neuron_position(s, 65), RangeError);
  }

  TEST_CASE("neuron_index is a bijection") {
    const NetworkShape s(3, 7);
    std::set<std::size_t> seen;
    for (std::uint32_t c = 1; c <= 3; ++c)
      for (std::uint32_t l = 1; l <= 7; ++l) {
        const auto i = neuron_index(s, c, l);
        CHECK(i >= 1);
        CHECK(i <= s.total());
        CHECK(neuron_position(s, i) == NeuronPosition{c, l});
        seen.insert(i);
      }
    CHECK(seen.size() == s.total());
  }

  TEST_CASE("message parsing and validation") {
    const auto m = Message::parse("9,4,3,10");
    CHECK(m.size() == 4);
    CHECK(m.symbol(1) == 9);
    CHECK(m.symbol(4) == 10);
    CHECK(m.to_string() == "9,4,3,10");
    CHECK_NOTHROW(m.validate(NetworkShape(4, 16)));
    CHECK_THROWS_AS(m.validate(NetworkShape(4, 9)), RangeError);
    CHECK_THROWS_AS(m.validate(NetworkShape(3, 16)), ShapeError);
    CHECK_THROWS(Message::parse("1,x,3"));
    CHECK_THROWS(Message::parse(""));
  }

  TEST_CASE("probe parsing") {
    const auto p = Probe::parse("9,?,3,?");
    CHECK(p.erased_count() == 2);
    CHECK(p.erased(2));
    CHECK_FALSE(p.erased(1));
    CHECK(*p.slot(3) == 3);
    CHECK(p.to_string() == "9,?,3,?");
    CHECK(p.matches(Message::parse("9,1,3,2")));
    CHECK_FALSE(p.matches(Message::parse("8,1,3,2")));
    CHECK(Probe::from_message(Message::parse("1,2")).erased_count() == 0);
  }

  TEST_CASE("encode_message example") {
    const NetworkShape s(4, 16);
    const auto v = encode_message(s, Message::parse("9,4,3,10"));
    CHECK(v.to_bit_string(true) == "0000000010000000 0001000000000000 0010000000000000 0000000001000000");
    CHECK(v.count() == 4);
    CHECK(encode_message(NetworkShape(2, 1), Message::parse("1,1")).to_bit_string() == "11");
    CHECK_THROWS_AS(encode_message(s, Message::parse("17,1,1,1")), RangeError);
  }

  TEST_CASE("encode_probe policies") {
    const NetworkShape s(3, 3);
    const auto p = Probe::parse("?,?,1");
    CHECK(encode_probe(s, p, FillPolicy::ErasedOff).to_bit_string() == "000000100");
    CHECK(encode_probe(s, p, FillPolicy::ErasedOn).to_bit_string() == "111111100");
    const auto full = Probe::parse("2,3,1");
    CHECK(encode_probe(s, full, FillPolicy::ErasedOff) == encode_probe(s, full, FillPolicy::ErasedOn));
    CHECK(encode_probe(s, full, FillPolicy::ErasedOff) == encode_message(s, Message::parse("2,3,1")));
  }

  TEST_CASE("activation vector bit string round trip and padding") {
    const NetworkShape s(3, 70);
    std::mt19937_64 rng(5);
    std::string bits;
    for (std::size_t i = 0; i < s.total(); ++i) bits.push_back(rng() & 1 ? '1' : '0');
    const auto v = ActivationVector::from_bits(s, bits);
    CHECK(v.to_bit_string() == bits);
    // Padding bits past L in each cluster stay clear.
    for (std::uint32_t c = 0; c < 3; ++c) CHECK((v.words()[c * 2 + 1] >> 6) == 0);
    CHECK_THROWS(ActivationVector::from_bits(s, "101"));
  }

  TEST_CASE("encode/extract round trip on random messages") {
    const NetworkShape s(6, 37);
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<Symbol> pick(1, 37);
    for (int t = 0; t < 1000; ++t) {
      std::vector<Symbol> sym(6);
      for (auto& x : sym) x = pick(rng);
      const Message m(sym);
      const auto v = encode_message(s, m);
      CHECK(v.count() == 6);
      for (std::uint32_t c = 1; c <= 6; ++c) CHECK(v.cluster_count(c) == 1);
      const auto ex = extract_messages(v);
      REQUIRE(ex.kind == Extraction::Kind::Unique);
      CHECK(*ex.unique() == m);
    }
  }

  TEST_CASE("extraction kinds") {
    const NetworkShape s(3, 3);
    CHECK(extract_messages(ActivationVector(s)).kind == Extraction::Kind::Empty);
    // Stored (1,3,1) and (1,3,2), probe (1,3,?): cluster 3 holds both.
    const auto v = ActivationVector::from_bits(s, "100 001 110");
    const auto ex = extract_messages(v);
    CHECK(ex.kind == Extraction::Kind::Ambiguous);
    CHECK(ex.candidates[2] == std::vector<Symbol>{1, 2});
    CHECK(ex.contains(Message::parse("1,3,2")));
    CHECK_FALSE(ex.contains(Message::parse("1,2,2")));
    CHECK_FALSE(ex.unique().has_value());
    std::mt19937_64 rng(1);
    std::set<Message> picks;
    for (int i = 0; i < 64; ++i) picks.insert(ex.sample(rng));
    CHECK(picks == std::set<Message>{Message::parse("1,3,1"), Message::parse("1,3,2")});
    CHECK_THROWS(extract_messages(ActivationVector(s)).sample(rng));
  }

  TEST_CASE("activation batch columns") {
    const NetworkShape s(3, 3);
    const std::vector<Probe> probes{Probe::parse("?,?,1"), Probe::parse("1,2,3")};
    const auto b = encode_probes(s, probes, FillPolicy::ErasedOn);
    CHECK(b.size() == 2);
    CHECK(b.vector(0).to_bit_string() == "111111100");
    CHECK(b.vector(1) == encode_message(s, Message::parse("1,2,3")));
    ActivationBatch c(s, 2);
    c.assign(0, b.vector(0));
    c.assign(1, b.vector(1));
    CHECK(c == b);
    CHECK_THROWS(c.assign(0, ActivationVector(NetworkShape(2, 3))));
  }
}
