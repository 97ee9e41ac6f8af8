#include <cmath>
#include <set>

#include "discoflux/errors.hpp"
#include "discoflux/steady_states.hpp"
#include "doctest.h"

using namespace discoflux;

namespace {

FluxModel step_model() {
  return FluxModel(SpeedField::piecewise_constant({0.0, 0.5}, {2.0, 1.0}), Closure::geometric(), "step");
}

// Closed form for h(rho) = rho/(1+rho): m = phi/(1-phi), phi = alpha/lambda.
double geometric_steady(double alpha, double lambda) {
  const double phi = alpha / lambda;
  return phi / (1.0 - phi);
}

// Oracle: plain bisection on lambda h(m) - alpha.
double bisect(const std::function<double(double)>& f, double a, double b) {
  for (int i = 0; i < 300; ++i) {
    const double m = 0.5 * (a + b);
    (f(m) < 0 ? a : b) = m;
  }
  return 0.5 * (a + b);
}

}  // namespace

TEST_CASE("solve_steady examples") {
  const FluxModel m = step_model();
  CHECK(std::abs(solve_steady(m, 0.5, 0.25) - 1.0 / 3.0) < 1e-10);
  CHECK(std::abs(solve_steady(m, 0.5, 0.75) - 1.0) < 1e-10);
  CHECK(std::abs(solve_steady(m, 0.5, 0.25) - geometric_steady(0.5, 2.0)) < 1e-12);
  const double oracle = bisect([](double r) { return 2.0 * r / (1.0 + r) - 0.7; }, 0.0, 50.0);
  CHECK(std::abs(solve_steady(m, 0.7, 0.1) - oracle) < 1e-10);
}

TEST_CASE("no-solution error carries position and attainable interval") {
  const FluxModel m = step_model();
  try {
    solve_steady(m, 1.5, 0.75);
    FAIL("expected NoSolutionError");
  } catch (const NoSolutionError& e) {
    CHECK(e.position() == 0.75);
    CHECK(e.attainable_lo() == doctest::Approx(0.0));
    CHECK(e.attainable_hi() == doctest::Approx(50.0 / 51.0));
  }
  try {
    steady_profile(m, 1.5, Grid1D(8));
    FAIL("expected NoSolutionError");
  } catch (const NoSolutionError& e) {
    CHECK(std::string(e.what()).find("cell 4") != std::string::npos);
  }
}

TEST_CASE("convex case at M0 returns the extremum on both branches") {
  const FluxModel cv(SpeedField::piecewise_constant({0.0, 0.5}, {2.0, 1.0}), Closure::quadratic(1.0, +1), "cv");
  for (double x : {0.2, 0.7}) {
    CHECK(solve_steady(cv, 0.0, x, Branch::Plus) == doctest::Approx(1.0));
    CHECK(solve_steady(cv, 0.0, x, Branch::Minus) == doctest::Approx(1.0));
  }
  // Branch ordering and flux residual for alpha > M0.
  for (double x : {0.2, 0.7}) {
    const double p = solve_steady(cv, 0.3, x, Branch::Plus);
    const double q = solve_steady(cv, 0.3, x, Branch::Minus);
    CHECK(p >= 1.0);
    CHECK(q <= 1.0);
    CHECK(std::abs(cv.eval(x, p) - 0.3) <= 1e-10);
    CHECK(std::abs(cv.eval(x, q) - 0.3) <= 1e-10);
  }
  CHECK_THROWS_AS(solve_steady(cv, -0.1, 0.2), NoSolutionError);
}

TEST_CASE("steady_profile examples") {
  const Grid1D g(64);
  const FluxModel c(SpeedField::constant(1.5), Closure::geometric(), "c");
  const Profile p = steady_profile(c, 0.6, g);
  CHECK((p.array() == p[0]).all());
  CHECK(p[0] == doctest::Approx(geometric_steady(0.6, 1.5)).epsilon(1e-12));

  const Profile s = steady_profile(step_model(), 0.5, g);
  std::set<double> values;
  for (int i = 0; i < g.n_cells(); ++i) values.insert(s[i]);
  CHECK(values.size() == 2);
  CHECK(std::abs(*values.begin() - 1.0 / 3.0) < 1e-10);
  CHECK(std::abs(*values.rbegin() - 1.0) < 1e-10);

  // Flux constancy across the discontinuity.
  const FluxModel m = step_model();
  for (int i = 0; i < 1000; ++i) {
    const double x = i / 1000.0;
    CHECK(std::abs(m.eval(x, solve_steady(m, 0.5, x)) - 0.5) <= 1e-10);
  }
}

TEST_CASE("envelope_alpha examples") {
  const FluxModel m = step_model();
  const Grid1D g(100);
  CHECK(envelope_alpha(m, g, Profile::Zero(100)) == 0.0);
  const double a1 = envelope_alpha(m, g, Profile::Ones(100));
  CHECK(a1 >= 1.0 - 1e-12);
  CHECK(a1 <= 1.01);
  // Oracle: dense alpha scan over attainable levels; past the capacity the envelope
  // saturates at sup lambda h(sup rho0).
  double scan = 1.0;
  for (int k = 0; k <= 2000; ++k) {
    const double alpha = k / 2000.0;
    try {
      if ((steady_profile(m, alpha, g).array() >= 1.0 - 1e-12).all()) {
        scan = alpha;
        break;
      }
    } catch (const NoSolutionError&) {
      break;
    }
  }
  CHECK(std::abs(a1 - scan) <= 0.01 * scan + 1e-3);
  const Profile mb = steady_profile(m, 0.4, g);
  CHECK(envelope_alpha(m, g, mb) == doctest::Approx(0.4).epsilon(0.01));
  const double ae = envelope_alpha(m, g, Profile::Constant(100, 0.8));
  CHECK((steady_profile(m, ae, g).array() >= 0.8 - 1e-12).all());
  Profile bad = Profile::Constant(100, -1.0);
  CHECK_THROWS_AS(envelope_alpha(m, g, bad), DomainError);
}

TEST_CASE("monotone in alpha and mollified consistency") {
  const FluxModel m = step_model();
  for (double x : {0.1, 0.3, 0.6, 0.9}) {
    double prev = -1.0;
    for (double a : {0.1, 0.2, 0.4, 0.6, 0.8}) {
      const double v = solve_steady(m, a, x);
      CHECK(v > prev);
      prev = v;
    }
  }
  const std::vector<double> xs = {0.1, 0.3, 0.45, 0.55, 0.7, 0.95};
  double prev = 1e9;
  for (double eps : {0.2, 0.1, 0.05, 0.025}) {
    const FluxModel me = m.mollified(eps);
    double worst = 0.0;
    for (double x : xs) worst = std::max(worst, std::abs(solve_steady(me, 0.5, x) - solve_steady(m, 0.5, x)));
    CHECK(worst <= prev);
    prev = worst;
  }
  CHECK(prev == 0.0);
}

TEST_CASE("family and cache") {
  const FluxModel m = step_model();
  const SteadyStateFamily fam(m, 0.5, Branch::Plus);
  CHECK(fam(0.25).value() == doctest::Approx(1.0 / 3.0));
  CHECK_FALSE(SteadyStateFamily(m, 1.5, Branch::Plus).valid(0.75));
  SteadyProfileCache cache(m);
  const Profile& a = cache.get(0.5, Grid1D(32));
  const Profile& b = cache.get(0.5, Grid1D(32));
  CHECK(&a == &b);
  CHECK(a == steady_profile(m, 0.5, Grid1D(32)));
}
