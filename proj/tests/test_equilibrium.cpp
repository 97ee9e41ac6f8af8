#include <cmath>

#include "discoflux/equilibrium.hpp"
#include "discoflux/errors.hpp"
#include "doctest.h"

using namespace discoflux;

namespace {

// Oracle: plain truncated summation of phi^n / g(n)! in long double.
long double series_z(const RateFunction& g, long double phi, int terms = 4000) {
  long double t = 1.0L, z = 1.0L;
  for (int n = 1; n < terms; ++n) {
    t *= phi / g(n);
    z += t;
    if (t < 1e-30L * z) break;
  }
  return z;
}

long double series_r(const RateFunction& g, long double phi, int terms = 4000) {
  long double t = 1.0L, z = 1.0L, s1 = 0.0L;
  for (int n = 1; n < terms; ++n) {
    t *= phi / g(n);
    z += t;
    s1 += n * t;
    if (t < 1e-30L * z && n > 10) break;
  }
  return s1 / z;
}

}  // namespace

TEST_CASE("partition function examples") {
  const EquilibriumTables ind(RateFunction::indicator());
  const EquilibriumTables id(RateFunction::identity());
  CHECK(ind.partition_function(0.0) == 1.0);
  CHECK(std::abs(ind.partition_function(0.5) - 2.0) < 1e-12);
  CHECK(std::abs(id.partition_function(1.0) - std::exp(1.0)) < 1e-12);
  CHECK(std::abs(ind.partition_function(0.5) - static_cast<double>(series_z(RateFunction::indicator(), 0.5L))) < 1e-12);
  CHECK(std::abs(id.partition_function(1.0) - static_cast<double>(series_z(RateFunction::identity(), 1.0L))) < 1e-12);
  CHECK_THROWS_AS(ind.partition_function(1.0), DomainError);
  CHECK_THROWS_AS(ind.partition_function(-0.1), DomainError);
}

TEST_CASE("mean occupation examples") {
  const EquilibriumTables ind(RateFunction::indicator());
  const EquilibriumTables id(RateFunction::identity());
  CHECK(ind.mean_occupation(0.0) == 0.0);
  CHECK(std::abs(ind.mean_occupation(0.5) - 1.0) < 1e-12);
  CHECK(std::abs(id.mean_occupation(0.7) - 0.7) < 1e-12);
  const RateFunction tab = RateFunction::table({0.5, 1.0, 1.7, 2.0});
  const EquilibriumTables t(tab);
  for (double phi : {0.1, 0.6, 1.2, 1.9}) {
    CHECK(t.mean_occupation(phi) == doctest::Approx(static_cast<double>(series_r(tab, phi))).epsilon(1e-11));
    CHECK(t.mean_rate(phi) == doctest::Approx(phi).epsilon(1e-11));
    CHECK(t.fugacity(t.mean_occupation(phi)) == doctest::Approx(phi).epsilon(1e-9));
  }
  double prev = -1.0;
  for (int i = 0; i < 100; ++i) {
    const double r = t.mean_occupation(1.99 * i / 100.0);
    CHECK(r > prev);
    prev = r;
  }
  CHECK_THROWS_AS(ind.fugacity(ind.max_density() * 2.0), RangeError);
}

TEST_CASE("variance matches the closed forms") {
  const EquilibriumTables ind(RateFunction::indicator());
  const EquilibriumTables id(RateFunction::identity());
  CHECK(ind.occupation_variance(0.5) == doctest::Approx(0.5 / 0.25).epsilon(1e-12));
  CHECK(id.occupation_variance(1.3) == doctest::Approx(1.3).epsilon(1e-12));
}

TEST_CASE("sample_site examples") {
  const RateFunction g = RateFunction::indicator();
  const EquilibriumTables ind(g);
  RandomStream rng(11, 0);
  for (int i = 0; i < 100; ++i) CHECK(ind.sample(0.0, rng) == 0);
  const int n = 100000;
  double s = 0.0, sg = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto k = ind.sample(0.5, rng);
    s += static_cast<double>(k);
    sg += g(k);
  }
  CHECK(std::abs(s / n - 1.0) < 0.02);
  // E[g(eta)] = phi; Bernoulli(1/2) band.
  CHECK(std::abs(sg / n - 0.5) < 4.0 * 0.5 / std::sqrt(static_cast<double>(n)));

  const EquilibriumTables id(RateFunction::identity());
  double sp = 0.0;
  for (int i = 0; i < n; ++i) sp += static_cast<double>(id.sample(0.7, rng));
  CHECK(std::abs(sp / n - 0.7) < 4.0 * std::sqrt(0.7 / n));

  const RateFunction tab = RateFunction::table({0.5, 1.0, 2.0});
  const EquilibriumTables t(tab);
  const double phi = 1.4;
  double st = 0.0, sgt = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto k = t.sample(phi, rng);
    st += static_cast<double>(k);
    sgt += tab(k);
  }
  const double sd = std::sqrt(t.occupation_variance(phi));
  CHECK(std::abs(st / n - t.mean_occupation(phi)) < 4.0 * sd / std::sqrt(static_cast<double>(n)));
  CHECK(std::abs(sgt / n - phi) < 0.02);
}
