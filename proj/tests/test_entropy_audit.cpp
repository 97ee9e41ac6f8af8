#include <cmath>
#include <random>

#include "discoflux/entropy_audit.hpp"
#include "discoflux/equilibrium.hpp"
#include "discoflux/errors.hpp"
#include "discoflux/zrp.hpp"
#include "doctest.h"

using namespace discoflux;

namespace {

FluxModel step_model() {
  return FluxModel(SpeedField::piecewise_constant({0.0, 0.5}, {2.0, 1.0}), Closure::geometric(), "step");
}

Profile pieces(const Grid1D& g, double left, double right) {
  return sample_profile(g, [&](double x) { return x < 0.5 ? left : right; });
}

SolutionSeries constant_series(const Profile& p, const Grid1D& g, double horizon, int intervals) {
  SolutionSeries s{GridSolution{g, 0.0, p, "const", 0.0}, {}, horizon / intervals, horizon / intervals};
  for (int k = 0; k < intervals; ++k) s.midpoints.push_back(GridSolution{g, (k + 0.5) * s.interval, p, "const", 0.0});
  return s;
}

// Decreasing jump 3 -> 0.2 in the lambda = 1 region, moving at its Rankine-Hugoniot speed.
constexpr double kLeft = 3.0, kRight = 0.2, kStart = 0.7;
double h_geo(double r) { return r / (1.0 + r); }
double shock_speed() { return (h_geo(kRight) - h_geo(kLeft)) / (kRight - kLeft); }

double crafted_cell_average(double t, double a, double b) {
  if (b <= 0.5) return 0.5;
  const double xs = kStart + shock_speed() * t;
  if (b <= xs) return kLeft;
  if (a >= xs) return kRight;
  return ((xs - a) * kLeft + (b - xs) * kRight) / (b - a);
}

Profile crafted_profile(const Grid1D& g, double t) {
  Profile p(g.n_cells());
  for (int i = 0; i < g.n_cells(); ++i) p[i] = crafted_cell_average(t, i * g.dx(), (i + 1) * g.dx());
  return p;
}

}  // namespace

TEST_CASE("test functions are nonnegative bumps vanishing at the horizon") {
  const TestFunction j(0.5, 0.1, 0.4);
  CHECK(j(0.0, 0.5) == doctest::Approx(1.0));
  CHECK(j(0.4, 0.5) == 0.0);
  CHECK(j(0.1, 0.61) == 0.0);
  CHECK(j(0.1, 0.55) > 0.0);
  for (int k = 0; k < 50; ++k) CHECK(j(0.39 * k / 50.0, k / 50.0) >= 0.0);
  // Derivatives against central differences.
  const double h = 1e-6;
  CHECK(j.dx(0.1, 0.53) == doctest::Approx((j(0.1, 0.53 + h) - j(0.1, 0.53 - h)) / (2 * h)).epsilon(1e-6));
  CHECK(j.dt(0.1, 0.53) == doctest::Approx((j(0.1 + h, 0.53) - j(0.1 - h, 0.53)) / (2 * h)).epsilon(1e-6));
  CHECK(default_test_library(0.4).size() == 9);
  CHECK_THROWS_AS(TestFunction(0.05, 0.1, 0.4), DomainError);
}

TEST_CASE("steady solution has zero residual") {
  const FluxModel m = step_model();
  const Grid1D g(256);
  const Profile ma = steady_profile(m, 0.5, g);
  const SolutionSeries s = constant_series(ma, g, 0.4, 40);
  for (const auto& j : default_test_library(0.4)) {
    CHECK(entropy_residual(s, m, 0.5, Branch::Plus, j) == 0.0);
  }
}

TEST_CASE("residual is additive in the test function") {
  const FluxModel m = step_model().mollified(1.0 / 16.0);
  const Grid1D g(128);
  const FvSolver solver(m, g);
  const SolutionSeries s = solve_series(solver, pieces(g, 1.0 / 3.0, 2.0), 0.4, 40);
  const TestFunction j1(0.25, 0.1, 0.4), j2(0.7, 0.2, 0.4);
  for (double alpha : {0.3, 0.5, 0.8}) {
    const double sum = entropy_residual(s, m, alpha, Branch::Plus, j1) +
                       entropy_residual(s, m, alpha, Branch::Plus, j2);
    const double joint = entropy_residual(s, m, alpha, Branch::Plus, j1 + j2);
    CHECK(joint == doctest::Approx(sum).epsilon(1e-12).scale(1.0));
  }
  CHECK((j1 + j2).id() == j1.id() + "+" + j2.id());
}

TEST_CASE("sign form matches absolute form for increasing h") {
  const FluxModel m = step_model();
  for (double alpha : {0.2, 0.5, 0.9}) {
    for (double x : {0.1, 0.3, 0.6, 0.9}) {
      const double mx = solve_steady(m, alpha, x);
      for (int k = 0; k <= 100; ++k) {
        const double rho = 0.05 * k;
        const double f = m.eval(x, rho) - alpha;
        const double s = (rho > mx) - (rho < mx);
        CHECK(s * f == doctest::Approx(std::abs(f)).epsilon(1e-12).scale(1.0));
      }
    }
  }
}

TEST_CASE("solver output satisfies the adapted entropy inequality") {
  const FluxModel m = step_model().mollified(1.0 / 16.0);
  const Grid1D g(256);
  const FvSolver solver(m, g);
  const Profile rho0 = pieces(g, 1.0 / 3.0, 2.0);
  const SolutionSeries s = solve_series(solver, rho0, 0.4, 40);
  EntropyAuditor auditor(m, g);
  const EntropyReport rep = auditor.audit(s, alpha_library(m, g, rho0), default_test_library(0.4));
  CHECK(rep.rows.size() == 12 * 9);
  const double tol = 2.0 * (g.dx() + s.solver_dt);
  MESSAGE("min residual " << rep.min_residual() << " tol " << tol);
  CHECK(rep.min_residual() >= -tol);
}

TEST_CASE("weak form above the envelope") {
  const FluxModel m = step_model().mollified(1.0 / 16.0);
  const Grid1D g(256);
  const FvSolver solver(m, g);
  const Profile rho0 = pieces(g, 0.3, 0.6);
  const SolutionSeries s = solve_series(solver, rho0, 0.4, 40);
  const double env = envelope_alpha(m, g, rho0);
  const double alpha = std::min(1.1 * env, 0.95);
  const Profile ma = steady_profile(m, alpha, g);
  REQUIRE((ma.array() >= s.initial.values.array()).all());
  EntropyAuditor auditor(m, g);
  const double tol = 2.0 * (g.dx() + s.solver_dt);
  for (const auto& j : default_test_library(0.4)) {
    CHECK(std::abs(auditor.weak_form_residual(s, ma, alpha, j)) <= tol);
    CHECK(auditor.weak_form_residual(s, ma, alpha, j) ==
          doctest::Approx(auditor.residual_against(s, ma, alpha, j)).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("crafted non-entropic shock is rejected") {
  const FluxModel m = step_model();
  const Grid1D g(2048);
  const double horizon = 0.4;
  const int intervals = 400;
  SolutionSeries s{GridSolution{g, 0.0, crafted_profile(g, 0.0), "crafted", 0.0}, {},
                   horizon / intervals, horizon / intervals};
  for (int k = 0; k < intervals; ++k) {
    const double t = (k + 0.5) * s.interval;
    s.midpoints.push_back(GridSolution{g, t, crafted_profile(g, t), "crafted", 0.0});
  }
  const TestFunction j(0.75, 0.1, horizon);
  const double res = entropy_residual(s, m, 0.5, Branch::Plus, j);

  // Oracle: piecewise-constant states, so the residual is the shock line integral
  // of J (s [|rho - k|] - [q]) with k = m_0.5 = 1 on the lambda = 1 region.
  const double k = 1.0, alpha = 0.5, sp = shock_speed();
  auto q = [&](double r) { return ((r > k) - (r < k)) * (h_geo(r) - alpha); };
  const double jump = sp * (std::abs(kRight - k) - std::abs(kLeft - k)) - (q(kRight) - q(kLeft));
  double line = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double t = (i + 0.5) * horizon / n;
    line += j(t, kStart + sp * t) * horizon / n;
  }
  const double oracle = jump * line;
  MESSAGE("crafted residual " << res << " oracle " << oracle);
  CHECK(oracle < -0.01);
  CHECK(res < -0.01);
  CHECK(res == doctest::Approx(oracle).epsilon(0.05));
}

TEST_CASE("initial recovery") {
  const FluxModel m = step_model().mollified(1.0 / 16.0);
  const Grid1D g(256);
  const FvSolver solver(m, g);
  const Profile smooth = sample_profile(g, [](double x) { return 1.0 + 0.5 * std::sin(2 * M_PI * x); });
  CHECK(initial_recovery(solver.wrap(smooth, 0.0), smooth) == 0.0);
  double prev = 1e300;
  for (double t : {0.08, 0.04, 0.02}) {
    const double r = initial_recovery(solver.solve(smooth, t), smooth);
    CHECK(r < prev);
    prev = r;
  }
  const Profile ma = steady_profile(m, 0.5, g);
  CHECK(initial_recovery(solver.solve(ma, 0.2), ma) <= 1e-8);
  // Restricted window only integrates the requested cells.
  const Profile shifted = smooth + Profile::Constant(256, 0.1);
  CHECK(initial_recovery(solver.wrap(shifted, 0.0), smooth, 0.5, 0.25) == doctest::Approx(0.05));
}

TEST_CASE("young measure of identical profiles has zero variance") {
  YoungMeasureEstimate est(4, 0.0, 2.0);
  for (int r = 0; r < 40; ++r)
    for (int b = 0; b < 4; ++b) est.add(b, 0.25 * (b + 1));
  const auto sum = young_concentration(est);
  CHECK(sum.max_variance == 0.0);
  CHECK(sum.excluded_bins.empty());
  for (int b = 0; b < 4; ++b) {
    const auto hist = est.histogram(b);
    double mass = 0.0;
    for (double v : hist) mass += v;
    CHECK(mass == doctest::Approx(1.0));
  }
}

TEST_CASE("young concentration excludes empty bins and rejects small ensembles") {
  YoungMeasureEstimate est(3, 0.0, 1.0);
  for (int r = 0; r < 30; ++r) est.add(0, 0.01 * r);
  const auto sum = young_concentration(est);
  CHECK(sum.excluded_bins == std::vector<int>{1, 2});
  CHECK(std::isnan(sum.variances[1]));
  est.add(1, 0.5);
  CHECK_THROWS_AS(young_concentration(est), DomainError);
}

TEST_CASE("block-average variance at equilibrium") {
  const EquilibriumTables tables(RateFunction::indicator());
  const int n = 2000;
  const Eigen::VectorXd speeds = Eigen::VectorXd::Ones(n);
  const double alpha = 0.5;
  const double phi = alpha / 1.0;
  const double site_var = phi / ((1 - phi) * (1 - phi));
  RandomStream rng(11, 0);
  std::mt19937_64 oracle_rng(99);
  std::geometric_distribution<int> geo(1.0 - phi);

  auto estimate = [&](int l) {
    YoungMeasureEstimate est(1, 0.0, 10.0);
    YoungMeasureEstimate direct(1, 0.0, 10.0);
    for (int r = 0; r < 60; ++r) {
      const Configuration cfg = sample_invariant_measure(tables, speeds, alpha, rng);
      for (int u = 0; u < n; u += 2 * l + 1) est.add(0, block_average(cfg, u, l));
      for (int u = 0; u < n; u += 2 * l + 1) {
        double sum = 0.0;
        for (int v = 0; v < 2 * l + 1; ++v) sum += geo(oracle_rng);
        direct.add(0, sum / (2 * l + 1));
      }
    }
    return std::make_pair(est.variance(0), direct.variance(0));
  };
  const auto [v10, d10] = estimate(10);
  const auto [v20, d20] = estimate(20);
  CHECK(v10 == doctest::Approx(site_var / 21.0).epsilon(0.1));
  CHECK(v10 == doctest::Approx(d10).epsilon(0.15));
  CHECK(v20 / v10 == doctest::Approx(21.0 / 41.0).epsilon(0.3));
  CHECK(d20 / d10 == doctest::Approx(21.0 / 41.0).epsilon(0.3));
}
