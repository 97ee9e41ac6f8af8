#include "discoflux/entropy_audit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "discoflux/errors.hpp"

namespace discoflux {

namespace {

inline double periodic_offset(double x, double c) noexcept {
  double d = x - c;
  d -= std::round(d);
  return d;
}

inline double sgn(double v) noexcept { return (v > 0.0) - (v < 0.0); }

}  // namespace

double unit_bump(double z) noexcept {
  const double s = 1.0 - z * z;
  return s > 0.0 ? std::exp(1.0 - 1.0 / s) : 0.0;
}

double unit_bump_derivative(double z) noexcept {
  const double s = 1.0 - z * z;
  return s > 0.0 ? unit_bump(z) * (-2.0 * z / (s * s)) : 0.0;
}

// TestFunction ---------------------------------------------------------------

TestFunction::TestFunction(double center, double width, double horizon, std::string id)
    : id_(std::move(id)) {
  if (!(width > 0.0) || !(center - width > 0.0) || !(center + width < 1.0)) {
    throw DomainError("test function support must lie strictly inside (0, 1)");
  }
  if (!(horizon > 0.0)) throw DomainError("test function horizon must be positive");
  terms_.push_back(Term{1.0, center, width, horizon});
  if (id_.empty()) {
    std::ostringstream out;
    out << "c" << center << "_w" << width;
    id_ = out.str();
  }
}

double TestFunction::operator()(double t, double x) const {
  double v = 0.0;
  for (const auto& k : terms_) {
    if (t < 0.0 || t >= k.horizon) continue;
    v += k.coefficient * unit_bump(t / k.horizon) * unit_bump(periodic_offset(x, k.center) / k.width);
  }
  return v;
}

double TestFunction::dt(double t, double x) const {
  double v = 0.0;
  for (const auto& k : terms_) {
    if (t < 0.0 || t >= k.horizon) continue;
    v += k.coefficient * unit_bump_derivative(t / k.horizon) / k.horizon *
         unit_bump(periodic_offset(x, k.center) / k.width);
  }
  return v;
}

double TestFunction::dx(double t, double x) const {
  double v = 0.0;
  for (const auto& k : terms_) {
    if (t < 0.0 || t >= k.horizon) continue;
    v += k.coefficient * unit_bump(t / k.horizon) *
         unit_bump_derivative(periodic_offset(x, k.center) / k.width) / k.width;
  }
  return v;
}

double TestFunction::horizon() const noexcept {
  double h = 0.0;
  for (const auto& k : terms_) h = std::max(h, k.horizon);
  return h;
}

TestFunction operator+(const TestFunction& a, const TestFunction& b) {
  TestFunction sum;
  sum.terms_ = a.terms_;
  sum.terms_.insert(sum.terms_.end(), b.terms_.begin(), b.terms_.end());
  sum.id_ = a.id_ + "+" + b.id_;
  return sum;
}

std::vector<TestFunction> default_test_library(double horizon) {
  std::vector<TestFunction> lib;
  for (double c : {0.25, 0.5, 0.75}) {
    for (double w : {0.05, 0.1, 0.2}) lib.emplace_back(c, w, horizon);
  }
  return lib;
}

// Series ---------------------------------------------------------------------

SolutionSeries solve_series(const FvSolver& solver, const Profile& rho0, double horizon,
                            int intervals) {
  if (intervals <= 0) throw DomainError("series needs a positive interval count");
  SolutionSeries series{solver.wrap(rho0, 0.0), {}, horizon / intervals, solver.run_dt(rho0)};
  std::vector<double> times;
  for (int k = 0; k < intervals; ++k) times.push_back((k + 0.5) * series.interval);
  solver.solve(rho0, horizon, times, &series.midpoints);
  return series;
}

double EntropyReport::min_residual() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& r : rows) m = std::min(m, r.residual);
  return m;
}

// Auditor --------------------------------------------------------------------

EntropyAuditor::EntropyAuditor(const FluxModel& model, const Grid1D& grid)
    : model_(model), grid_(grid), speeds_(cell_speeds(model, grid)), cache_(model_) {}

double EntropyAuditor::integrate(const SolutionSeries& series, const Profile& m, double alpha,
                                 const TestFunction& test, bool fixed_sign) const {
  const Closure& h = model_.closure();
  const int n = grid_.n_cells();
  const double dx = grid_.dx();
  if (series.initial.values.size() != n) throw DomainError("series grid does not match auditor");
  const Profile x = grid_.centers();

  double total = 0.0;
  for (const auto& snap : series.midpoints) {
    const double t = snap.time;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      const double jt = test.dt(t, x[i]);
      const double jx = test.dx(t, x[i]);
      if (jt == 0.0 && jx == 0.0) continue;
      const double rho = snap.values[i];
      const double diff = rho - m[i];
      const double flux_gap = speeds_[i] * h(rho) - alpha;
      const double s = fixed_sign ? -1.0 : sgn(diff);
      const double mag = fixed_sign ? -diff : std::abs(diff);
      acc += mag * jt + s * flux_gap * jx;
    }
    total += series.interval * dx * acc;
  }
  double initial = 0.0;
  for (int i = 0; i < n; ++i) {
    const double diff = series.initial.values[i] - m[i];
    initial += (fixed_sign ? -diff : std::abs(diff)) * test(0.0, x[i]);
  }
  return total + dx * initial;
}

double EntropyAuditor::residual(const SolutionSeries& series, double alpha, Branch branch,
                                const TestFunction& test) {
  return integrate(series, cache_.get(alpha, grid_, branch), alpha, test, false);
}

double EntropyAuditor::residual_against(const SolutionSeries& series, const Profile& m,
                                        double alpha, const TestFunction& test) const {
  return integrate(series, m, alpha, test, false);
}

double EntropyAuditor::weak_form_residual(const SolutionSeries& series, const Profile& m,
                                          double alpha, const TestFunction& test) const {
  return integrate(series, m, alpha, test, true);
}

EntropyReport EntropyAuditor::audit(const SolutionSeries& series, const std::vector<double>& alphas,
                                    const std::vector<TestFunction>& library) {
  EntropyReport report;
  report.n_cells = grid_.n_cells();
  report.dx = grid_.dx();
  report.dt = series.solver_dt;
  report.epsilon = model_.epsilon();
  for (double alpha : alphas) {
    for (Branch b : audit_branches(model_)) {
      for (const auto& j : library) {
        report.rows.push_back({alpha, b, j.id(), residual(series, alpha, b, j)});
      }
    }
  }
  return report;
}

double entropy_residual(const SolutionSeries& series, const FluxModel& model, double alpha,
                        Branch branch, const TestFunction& test) {
  EntropyAuditor auditor(model, series.initial.grid);
  return auditor.residual(series, alpha, branch, test);
}

std::vector<Branch> audit_branches(const FluxModel& model) {
  if (model.shape() == ClosureShape::Increasing) return {Branch::Plus};
  return {Branch::Plus, Branch::Minus};
}

std::vector<double> alpha_library(const FluxModel& model, const Grid1D& grid, const Profile& rho0,
                                  int count) {
  const Profile speeds = cell_speeds(model, grid);
  const Closure& h = model.closure();
  const double m0 = model.m0();
  double top = 1.2 * envelope_alpha_from_speeds(h, m0, speeds, rho0);
  // Keep every level attainable at every cell.
  const double cap = h.shape() == ClosureShape::Concave ? speeds.minCoeff() * h.value_min()
                                                        : speeds.minCoeff() * h.value_max();
  if (h.shape() == ClosureShape::Concave) {
    top = std::max(top, 0.999 * cap);
  } else {
    top = std::min(top, m0 + 0.999 * (cap - m0));
  }
  std::vector<double> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) {
    out.push_back(count == 1 ? m0 : m0 + (top - m0) * k / (count - 1));
  }
  return out;
}

double initial_recovery(const GridSolution& sol, const Profile& rho0, double center,
                        double half_width) {
  double sum = 0.0;
  const Grid1D& g = sol.grid;
  for (int i = 0; i < g.n_cells(); ++i) {
    if (std::abs(periodic_offset(g.center(i), center)) <= half_width) {
      sum += std::abs(sol.values[i] - rho0[i]);
    }
  }
  return sum * g.dx();
}

// Young measures -------------------------------------------------------------

YoungMeasureEstimate::YoungMeasureEstimate(int bins, double value_lo, double value_hi,
                                           int histogram_cells)
    : samples_(static_cast<std::size_t>(bins)), lo_(value_lo), hi_(value_hi), cells_(histogram_cells) {
  if (bins <= 0 || histogram_cells <= 0 || !(value_hi > value_lo)) {
    throw DomainError("invalid Young-measure binning");
  }
}

void YoungMeasureEstimate::add(int bin, double value) { samples_.at(bin).push_back(value); }

double YoungMeasureEstimate::mean(int bin) const {
  const auto& s = samples_.at(bin);
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
}

double YoungMeasureEstimate::variance(int bin) const {
  const auto& s = samples_.at(bin);
  if (s.size() < 2) return s.empty() ? std::numeric_limits<double>::quiet_NaN() : 0.0;
  const double mu = mean(bin);
  double acc = 0.0;
  for (double v : s) acc += (v - mu) * (v - mu);
  return acc / static_cast<double>(s.size() - 1);
}

std::vector<double> YoungMeasureEstimate::histogram(int bin) const {
  const auto& s = samples_.at(bin);
  std::vector<double> mass(static_cast<std::size_t>(cells_), 0.0);
  if (s.empty()) return mass;
  for (double v : s) {
    int c = static_cast<int>(std::floor((v - lo_) / (hi_ - lo_) * cells_));
    mass[static_cast<std::size_t>(std::clamp(c, 0, cells_ - 1))] += 1.0;
  }
  for (double& m : mass) m /= static_cast<double>(s.size());
  return mass;
}

ConcentrationSummary young_concentration(const YoungMeasureEstimate& estimate,
                                         std::size_t min_ensemble) {
  ConcentrationSummary out;
  for (int b = 0; b < estimate.bins(); ++b) {
    const std::size_t n = estimate.count(b);
    if (n == 0) {
      out.excluded_bins.push_back(b);
      out.variances.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    if (n < min_ensemble) {
      throw DomainError("Young-measure concentration needs an ensemble of at least " +
                        std::to_string(min_ensemble));
    }
    const double v = estimate.variance(b);
    out.variances.push_back(v);
    out.max_variance = std::max(out.max_variance, v);
  }
  return out;
}

}  // namespace discoflux
