#include <cmath>
#include <set>

#include "discoflux/rng.hpp"
#include "doctest.h"

using namespace discoflux;

TEST_CASE("philox known-answer vectors") {
  using A4 = std::array<std::uint32_t, 4>;
  using A2 = std::array<std::uint32_t, 2>;
  CHECK(philox4x32_10(A4{0, 0, 0, 0}, A2{0, 0}) ==
        A4{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(philox4x32_10(A4{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                      A2{0xffffffffu, 0xffffffffu}) ==
        A4{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(philox4x32_10(A4{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                      A2{0xa4093822u, 0x299f31d0u}) ==
        A4{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams are reproducible and distinct") {
  RandomStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 100; ++i) {
    const auto x = a();
    CHECK(x == b());
    CHECK(x != c());
    CHECK(x != d());
    seen.insert(x);
  }
  CHECK(seen.size() == 100);
}

TEST_CASE("uniform and exponential moments") {
  RandomStream rng(1, 0);
  const int n = 200000;
  double su = 0.0, se = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    su += u;
    se += rng.exponential(4.0);
  }
  // 4-sigma bands: sd(U) = 1/sqrt(12), sd(Exp(4)) = 1/4.
  CHECK(std::abs(su / n - 0.5) < 4.0 / std::sqrt(12.0 * n));
  CHECK(std::abs(se / n - 0.25) < 4.0 * 0.25 / std::sqrt(static_cast<double>(n)));
}
