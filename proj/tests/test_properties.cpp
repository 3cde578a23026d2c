#include <doctest.h>

#include "properties.hpp"

TEST_SUITE("properties") {
  TEST_CASE("sum-of-max properties on small networks") {
    for (const auto& t : props::run_all(1000, 4, 5, false, 7001)) {
      CAPTURE(t.name);
      CHECK(t.cases == 1000);
      CHECK(t.failures == 0);
    }
  }

  TEST_CASE("sum-of-max properties at C=8, L=32") {
    for (const auto& t : props::run_all(100, 8, 32, true, 7002)) {
      CAPTURE(t.name);
      CHECK(t.failures == 0);
    }
  }
}
