#include <cmath>

#include "discoflux/errors.hpp"
#include "discoflux/fv_solver.hpp"
#include "discoflux/riemann.hpp"
#include "discoflux/rng.hpp"
#include "discoflux/steady_states.hpp"
#include "doctest.h"

using namespace discoflux;

namespace {

FluxModel step_model() {
  return FluxModel(SpeedField::piecewise_constant({0.0, 0.5}, {2.0, 1.0}), Closure::geometric(), "step");
}

// Oracle: exact Godunov flux by dense minimization / maximization over the state interval.
double brute_godunov(const std::function<double(double)>& f, double a, double b) {
  const double lo = std::min(a, b), hi = std::max(a, b);
  double best = a <= b ? 1e300 : -1e300;
  for (int k = 0; k <= 20000; ++k) {
    const double v = f(lo + (hi - lo) * k / 20000.0);
    best = a <= b ? std::min(best, v) : std::max(best, v);
  }
  return best;
}

}  // namespace

TEST_CASE("interface_flux examples") {
  const FluxModel lin(SpeedField::constant(1.5), Closure::linear(), "lin");
  CHECK(interface_flux(lin, 0.3, 1.0, 1.0) == doctest::Approx(1.5));
  const FluxModel geo(SpeedField::constant(1.0), Closure::geometric(), "geo");
  CHECK(interface_flux(geo, 0.3, 1.0, 0.0) == doctest::Approx(0.5));
  CHECK(interface_flux(geo, 0.3, 0.0, 1.0) == 0.0);
  const auto f = [](double r) { return r / (1.0 + r); };
  CHECK(interface_flux(geo, 0.3, 1.0, 0.0) == doctest::Approx(brute_godunov(f, 1.0, 0.0)));
  CHECK(interface_flux(geo, 0.3, 0.0, 1.0) == doctest::Approx(brute_godunov(f, 0.0, 1.0)).scale(1.0));
}

TEST_CASE("godunov flux for convex and concave closures matches brute force") {
  for (int sign : {+1, -1}) {
    const Closure q = Closure::quadratic(1.0, sign);
    const auto f = [&](double r) { return 1.3 * q(r); };
    for (auto [a, b] : std::vector<std::pair<double, double>>{{0.0, 2.0}, {2.0, 0.0}, {0.2, 0.7}, {1.5, 1.2}, {0.5, 1.8}}) {
      CHECK(godunov_flux(q, 1.3, 1.3, a, b) == doctest::Approx(brute_godunov(f, a, b)).epsilon(1e-6));
    }
  }
}

TEST_CASE("step examples") {
  const FluxModel lin(SpeedField::constant(1.0), Closure::linear(), "lin");
  const Grid1D g(16);
  const FvSolver solver(lin, g);
  GridSolution flat = solver.wrap(Profile::Constant(16, 0.7), 0.0);
  CHECK(solver.step(flat, 0.5 * g.dx()).values == flat.values);

  Profile bump = Profile::Zero(16);
  bump[3] = 1.0;
  const GridSolution moved = solver.step(solver.wrap(bump, 0.0), g.dx());
  Profile expected = Profile::Zero(16);
  expected[4] = 1.0;
  CHECK((moved.values - expected).cwiseAbs().maxCoeff() < 1e-15);

  CHECK_THROWS_AS(solver.step(solver.wrap(bump, 0.0), 1.5 * g.dx()), CflError);
  try {
    solver.step(solver.wrap(bump, 0.0), 2.0 * g.dx());
  } catch (const CflError& e) {
    CHECK(e.admissible_dt() == doctest::Approx(g.dx()));
  }
}

TEST_CASE("mass conservation over many steps") {
  const FluxModel m = step_model().mollified(1.0 / 16.0);
  const Grid1D g(512);
  const FvSolver solver(m, g);
  RandomStream rng(3, 0);
  Profile p(512);
  for (int i = 0; i < 512; ++i) p[i] = 3.0 * rng.uniform();
  GridSolution s = solver.wrap(p, 0.0);
  const double m0 = s.mass();
  const double dt = solver.run_dt(p);
  for (int k = 0; k < 2000; ++k) s = solver.step(s, dt);
  CHECK(std::abs(s.mass() - m0) <= 1e-12);
}

TEST_CASE("solve examples") {
  const FluxModel m = step_model().mollified(1.0 / 32.0);
  const Grid1D g(256);
  const FvSolver solver(m, g);
  const Profile st = steady_profile(m, 0.5, g);
  const GridSolution out = solver.solve(st, 0.5);
  CHECK(l1_distance(out.values, st, g.dx()) <= 1e-8);
  CHECK(solver.solve(st, 0.0).values == st);
  CHECK_THROWS_AS(FvSolver(step_model().mollified(0.01), g).solve(st, 0.1), DomainError);
  CHECK_THROWS_AS(FvSolver(step_model(), g).solve(st, 0.1), DomainError);
}

TEST_CASE("linear closure Riemann plateau matches the exact fans") {
  // lambda 1 on [0, 0.5), 2 on [0.5, 1), rho0 = 1: a 0.5 plateau spreads right of 0.5 at speed 2.
  const FluxModel base(SpeedField::piecewise_constant({0.0, 0.5}, {1.0, 2.0}), Closure::linear(), "lin");
  const int n = 2048;
  const Grid1D g(n);
  const FluxModel m = base.mollified(8.0 * g.dx());
  const double t = 0.15;
  const GridSolution sol = FvSolver(m, g).solve(Profile::Ones(n), t);
  const TorusRiemannReference ref(base.speed(), base.closure(), {1.0, 1.0});
  Profile exact(n);
  for (int i = 0; i < n; ++i) exact[i] = ref.average(t, i * g.dx(), (i + 1) * g.dx(), 64);
  CHECK(l1_distance(sol.values, exact, g.dx()) <= 2.0 * std::sqrt(g.dx()));
  CHECK(sol.values[static_cast<int>(0.7 * n)] == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("maximum principle and L1 contraction") {
  const FluxModel m = step_model().mollified(1.0 / 16.0);
  const Grid1D g(256);
  const FvSolver solver(m, g);
  const Profile lo = steady_profile(m, 0.2, g);
  const Profile hi = steady_profile(m, 0.8, g);
  RandomStream rng(5, 0);
  for (int pair = 0; pair < 5; ++pair) {
    Profile a(256), b(256);
    for (int i = 0; i < 256; ++i) {
      a[i] = lo[i] + (hi[i] - lo[i]) * rng.uniform();
      b[i] = lo[i] + (hi[i] - lo[i]) * rng.uniform();
    }
    const double dt = std::min(solver.run_dt(a), solver.run_dt(b));
    GridSolution sa = solver.wrap(a, 0.0), sb = solver.wrap(b, 0.0);
    double prev = l1_distance(a, b, g.dx());
    for (int k = 0; k < 200; ++k) {
      sa = solver.step(sa, dt);
      sb = solver.step(sb, dt);
      const double d = l1_distance(sa.values, sb.values, g.dx());
      CHECK(d <= prev + 1e-14);
      prev = d;
    }
    CHECK((sa.values.array() <= hi.array() + 1e-8).all());
    CHECK((sa.values.array() >= lo.array() - 1e-8).all());
  }
}

TEST_CASE("restrict_to_coarse averages pairs") {
  Profile f(4);
  f << 1, 3, 5, 9;
  const Profile c = restrict_to_coarse(f);
  CHECK(c[0] == 2.0);
  CHECK(c[1] == 7.0);
}
