#include <algorithm>
#include <cmath>
#include <vector>

#include "discoflux/errors.hpp"
#include "discoflux/flux_model.hpp"
#include "doctest.h"

using namespace discoflux;

namespace {

FluxModel step_model() {
  return FluxModel(SpeedField::piecewise_constant({0.0, 0.5}, {2.0, 1.0}), Closure::geometric(), "step");
}

// Independent oracle: composite Simpson quadrature of the unnormalized bump against lambda,
// split at every discontinuity of lambda so each panel sees a smooth integrand.
double simpson_panel(const SpeedField& speed, double eps, double x, double za, double zb, int n) {
  auto bump = [](double z) { return std::abs(z) < 1.0 ? std::exp(-1.0 / (1.0 - z * z)) : 0.0; };
  const auto& piece = speed.piece(speed.piece_index(wrap_unit(x - eps * 0.5 * (za + zb))));
  auto lam = [&](double z) { return piece.fn ? piece.fn(wrap_unit(x - eps * z)) : piece.value; };
  const double h = (zb - za) / n;
  double num = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double z = za + i * h;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    num += w * bump(z) * lam(z);
  }
  return num * h / 3.0;
}

double simpson_mollified(const SpeedField& speed, double eps, double x, int n = 20000) {
  std::vector<double> cuts{-1.0, 1.0};
  for (double b : speed.breakpoints()) {
    for (int shift = -1; shift <= 1; ++shift) {
      const double z = (x - b - shift) / eps;
      if (z > -1.0 && z < 1.0) cuts.push_back(z);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  double num = 0.0, den = 0.0;
  const SpeedField one = SpeedField::constant(1.0);
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    num += simpson_panel(speed, eps, x, cuts[k], cuts[k + 1], n);
    den += simpson_panel(one, eps, x, cuts[k], cuts[k + 1], n);
  }
  return num / den;
}

}  // namespace

TEST_CASE("eval_flux examples") {
  const FluxModel unit(SpeedField::constant(1.0), Closure::linear(), "unit");
  CHECK(eval_flux(unit, 0.3, 2.0) == doctest::Approx(2.0).epsilon(1e-15));
  const FluxModel m = step_model();
  CHECK(eval_flux(m, 0.25, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(eval_flux(m, 0.75, 1.0) == doctest::Approx(0.5).epsilon(1e-15));
  // Right-limit convention at breakpoints.
  CHECK(eval_flux(m, 0.5, 1.0) == doctest::Approx(0.5));
  CHECK(eval_flux(m, 0.0, 1.0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(eval_flux(m, 0.2, -1.0), DomainError);
}

TEST_CASE("mollifier kernel has unit mass and compact support") {
  const MollifierKernel k(0.05);
  double mass = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) mass += k(-0.05 + (i + 0.5) * 0.1 / n) * 0.1 / n;
  CHECK(std::abs(mass - 1.0) < 1e-8);
  CHECK(k(0.0500001) == 0.0);
  CHECK(k(-0.06) == 0.0);
  CHECK(k.cdf(1.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(k.cdf(0.0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("mollified speed examples") {
  const SpeedField c = SpeedField::constant(3.0);
  for (double x : {0.0, 0.1, 0.5, 0.99}) {
    CHECK(mollified_speed(c, MollifierKernel(0.1), x) == doctest::Approx(3.0).epsilon(1e-12));
  }
  const FluxModel m = step_model();
  const MollifierKernel k(0.01);
  CHECK(mollified_speed(m, k, 0.5) == doctest::Approx(1.5).epsilon(1e-10));
  CHECK(mollified_speed(m, k, 0.3) == 2.0);
  CHECK(mollified_speed(m, k, 0.8) == 1.0);
  for (double x : {0.495, 0.5, 0.503, 0.009, 0.995}) {
    const double oracle = simpson_mollified(m.speed(), 0.01, x);
    CHECK(mollified_speed(m, k, x) == doctest::Approx(oracle).epsilon(1e-8));
  }
}

TEST_CASE("mollified speed on a smooth piece") {
  SpeedField::Piece a{0.0, [](double x) { return 1.5 + 0.5 * std::sin(2.0 * M_PI * x); }};
  SpeedField::Piece b{1.0, {}};
  const SpeedField s({0.0, 0.5}, {a, b});
  const MollifierKernel k(0.05);
  for (double x : {0.2, 0.48, 0.5, 0.52, 0.03}) {
    CHECK(mollified_speed(s, k, x) == doctest::Approx(simpson_mollified(s, 0.05, x)).epsilon(1e-8));
  }
  CHECK(s.lower_bound() == doctest::Approx(1.0));
  CHECK(s.upper_bound() == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("mollified speed stays within bounds and converges off breakpoints") {
  const FluxModel m = step_model();
  for (double eps : {0.2, 0.1, 0.05}) {
    const MollifierKernel k(eps);
    for (int i = 0; i < 200; ++i) {
      const double v = mollified_speed(m, k, i / 200.0);
      CHECK(v >= 1.0 - 1e-14);
      CHECK(v <= 2.0 + 1e-14);
    }
  }
  const double x = 0.45;
  double prev = 1e9;
  for (double eps : {0.2, 0.1, 0.07, 0.06, 0.04}) {
    const double err = std::abs(mollified_speed(m, MollifierKernel(eps), x) - 2.0);
    CHECK(err <= prev);
    prev = err;
  }
  CHECK(prev == 0.0);
}

TEST_CASE("closure_from_rate examples") {
  const Closure id = closure_from_rate(RateFunction::identity());
  const Closure ind = closure_from_rate(RateFunction::indicator());
  CHECK(id(2.0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(ind(1.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(id(0.0) == 0.0);
  CHECK(ind(0.0) == 0.0);
  const auto tables = std::make_shared<const EquilibriumTables>(RateFunction::table({1.0, 1.5, 2.0}));
  const Closure tab = Closure::tabulated(tables);
  CHECK(tab(0.0) == 0.0);
  // The table route agrees with the closed forms.
  const Closure ind_tab = Closure::tabulated(std::make_shared<const EquilibriumTables>(RateFunction::indicator()));
  for (double rho : {0.1, 0.5, 1.0, 3.0, 10.0}) {
    CHECK(ind_tab(rho) == doctest::Approx(ind(rho)).epsilon(1e-10));
    CHECK(ind.inverse(ind(rho)) == doctest::Approx(rho).epsilon(1e-9));
    CHECK(tab.inverse(tab(rho)) == doctest::Approx(rho).epsilon(1e-9));
  }
  double prev = -1.0;
  for (int i = 0; i <= 100; ++i) {
    const double v = tab(0.1 * i);
    CHECK(v > prev);
    prev = v;
  }
  CHECK_THROWS_AS(ind.inverse(1.0), RangeError);
}

TEST_CASE("quadratic closures") {
  const FluxModel convex(SpeedField::piecewise_constant({0.0, 0.5}, {2.0, 1.0}), Closure::quadratic(1.0, +1), "cv");
  CHECK(convex.shape() == ClosureShape::Convex);
  CHECK(convex.m0() == 0.0);
  for (double x : {0.1, 0.7}) CHECK(convex.eval(x, 1.0) == 0.0);
  const Closure q = Closure::quadratic(1.0, -1);
  CHECK(q.inverse(-0.5, Branch::Plus) == doctest::Approx(2.0));
  CHECK(q.inverse(-0.5, Branch::Minus) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("rate function invariants") {
  const RateFunction t = RateFunction::table({0.5, 1.0, 2.0});
  CHECK(t(0) == 0.0);
  CHECK(t(2) == 1.0);
  CHECK(t(10) == 2.0);
  CHECK(RateFunction::parse("table:0.5,1,2")(3) == 2.0);
  CHECK(RateFunction::parse("identity")(7) == 7.0);
  CHECK_THROWS(RateFunction::table({2.0, 1.0}));
  CHECK_THROWS(RateFunction::table({0.0, 1.0}));
  CHECK_THROWS(RateFunction::parse("bogus"));
}
