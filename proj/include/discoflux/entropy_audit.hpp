#ifndef DISCOFLUX_ENTROPY_AUDIT_HPP
#define DISCOFLUX_ENTROPY_AUDIT_HPP

#include <string>
#include <vector>

#include "discoflux/fv_solver.hpp"
#include "discoflux/steady_states.hpp"

namespace discoflux {

/// Smooth bump exp(1 - 1/(1 - z^2)) on (-1, 1), peak value 1 at z = 0.
double unit_bump(double z) noexcept;
double unit_bump_derivative(double z) noexcept;

/// Nonnegative test function J(t, x) = sum_k c_k tau(t / T_k) beta((x - x_k) / w_k).
///
/// tau is the right half of the unit bump, so J(0, x) > 0 and J vanishes for
/// t >= T. Spatial offsets are taken on the torus.
class TestFunction {
 public:
  TestFunction(double center, double width, double horizon, std::string id = {});

  double operator()(double t, double x) const;
  double dt(double t, double x) const;
  double dx(double t, double x) const;

  const std::string& id() const noexcept { return id_; }
  double horizon() const noexcept;

  /// Pointwise sum; ids are joined with '+'.
  friend TestFunction operator+(const TestFunction& a, const TestFunction& b);

  struct Term {
    double coefficient;
    double center;
    double width;
    double horizon;
  };
  const std::vector<Term>& terms() const noexcept { return terms_; }

 private:
  TestFunction() = default;
  std::vector<Term> terms_;
  std::string id_;
};

/// Three centers x three widths over the horizon.
std::vector<TestFunction> default_test_library(double horizon);

/// Solver output for the audit: rho at t = 0 and at the interval midpoints (k + 1/2) dt.
struct SolutionSeries {
  GridSolution initial;
  std::vector<GridSolution> midpoints;
  double interval = 0.0;
  double solver_dt = 0.0;

  double horizon() const noexcept { return interval * static_cast<double>(midpoints.size()); }
};

SolutionSeries solve_series(const FvSolver& solver, const Profile& rho0, double horizon,
                            int intervals);

struct EntropyRow {
  double alpha;
  Branch branch;
  std::string test_id;
  double residual;
};

struct EntropyReport {
  std::vector<EntropyRow> rows;
  int n_cells = 0;
  double dx = 0.0;
  double dt = 0.0;
  double epsilon = 0.0;

  double min_residual() const;
};

/// Discrete adapted-entropy residuals for one model/grid.
///
/// Midpoint quadrature in t (over the series' midpoints) and x (cell centers) of
///   |rho - m| dJ/dt + sgn(rho - m)(F(x, rho) - alpha) dJ/dx
/// plus the initial term |rho0 - m| J(0, x), with sgn(0) = 0.
class EntropyAuditor {
 public:
  EntropyAuditor(const FluxModel& model, const Grid1D& grid);

  double residual(const SolutionSeries& series, double alpha, Branch branch,
                  const TestFunction& test);
  /// Residual against a given reference profile m (F(x, m) = alpha expected).
  double residual_against(const SolutionSeries& series, const Profile& m, double alpha,
                          const TestFunction& test) const;
  /// Same integrand with sgn fixed to -1 (the weak form when m dominates rho).
  double weak_form_residual(const SolutionSeries& series, const Profile& m, double alpha,
                            const TestFunction& test) const;

  EntropyReport audit(const SolutionSeries& series, const std::vector<double>& alphas,
                      const std::vector<TestFunction>& library);

  const Profile& speeds() const noexcept { return speeds_; }
  const FluxModel& model() const noexcept { return model_; }

 private:
  double integrate(const SolutionSeries& series, const Profile& m, double alpha,
                   const TestFunction& test, bool fixed_sign) const;

  FluxModel model_;
  Grid1D grid_;
  Profile speeds_;
  SteadyProfileCache cache_;
};

double entropy_residual(const SolutionSeries& series, const FluxModel& model, double alpha,
                        Branch branch, const TestFunction& test);

/// `count` levels spanning [M0, 1.2 envelope_alpha(rho0)], kept inside the attainable range.
std::vector<double> alpha_library(const FluxModel& model, const Grid1D& grid, const Profile& rho0,
                                  int count = 12);

/// Branches audited for the model: plus only for increasing closures.
std::vector<Branch> audit_branches(const FluxModel& model);

/// L1 distance between rho(t_min) and rho0 over |x - center| <= half_width (periodic).
double initial_recovery(const GridSolution& sol, const Profile& rho0, double center = 0.5,
                        double half_width = 0.5);

/// Empirical law, per macro-cell bin, of block-average densities across an ensemble.
class YoungMeasureEstimate {
 public:
  YoungMeasureEstimate(int bins, double value_lo, double value_hi, int histogram_cells = 64);

  void add(int bin, double value);

  int bins() const noexcept { return static_cast<int>(samples_.size()); }
  std::size_t count(int bin) const { return samples_.at(bin).size(); }
  double mean(int bin) const;
  /// Unbiased sample variance.
  double variance(int bin) const;
  /// Histogram masses over [value_lo, value_hi] (edge cells absorb outliers); sums to 1.
  std::vector<double> histogram(int bin) const;

 private:
  std::vector<std::vector<double>> samples_;
  double lo_;
  double hi_;
  int cells_;
};

struct ConcentrationSummary {
  double max_variance = 0.0;
  std::vector<double> variances;  ///< NaN for excluded bins
  std::vector<int> excluded_bins;
};

/// Max over bins of Var[eta^l]; bins without samples are excluded and reported.
ConcentrationSummary young_concentration(const YoungMeasureEstimate& estimate,
                                         std::size_t min_ensemble = 30);

}  // namespace discoflux

#endif  // DISCOFLUX_ENTROPY_AUDIT_HPP
