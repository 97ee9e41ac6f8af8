#ifndef DISCOFLUX_RIEMANN_HPP
#define DISCOFLUX_RIEMANN_HPP

#include <vector>

#include "discoflux/flux_model.hpp"
#include "discoflux/grid.hpp"

namespace discoflux {

/// Exact solution of the Riemann problem with a speed jump at x = 0.
///
/// Left of the jump the state stays rho_left. The interface trace rho* keeps
/// the flux continuous: lambda_right h(rho*) = lambda_left h(rho_left). Right of
/// the jump a single classical wave joins rho* to rho_right under lambda_right h.
class RiemannSolution {
 public:
  enum class Wave { None, Shock, Rarefaction, Contact };

  RiemannSolution(double lambda_left, double lambda_right, const Closure& closure,
                  double rho_left, double rho_right);

  /// rho(t, x); x is measured from the speed jump.
  double operator()(double t, double x) const;

  double interface_trace() const noexcept { return rho_star_; }
  Wave wave() const noexcept { return wave_; }
  /// Speeds bounding the right wave (equal for shocks and contacts).
  double slowest_speed() const noexcept { return s_lo_; }
  double fastest_speed() const noexcept { return s_hi_; }

 private:
  double rarefaction_state(double xi) const;

  double lambda_right_;
  Closure closure_;
  double rho_left_;
  double rho_right_;
  double rho_star_;
  Wave wave_ = Wave::None;
  double s_lo_ = 0.0;
  double s_hi_ = 0.0;
};

/// Entropy-selected Riemann evaluator; increasing concave or linear h only.
/// UnsupportedRegimeError if lambda_left h(rho_left) is not attainable on the right.
RiemannSolution riemann_exact(double lambda_left, double lambda_right, const Closure& closure,
                              double rho_left, double rho_right);

/// Superposition of the Riemann fans at every breakpoint of a piecewise-constant
/// speed on the torus, for data that is constant on each speed piece. Valid while
/// no fan reaches the next breakpoint.
class TorusRiemannReference {
 public:
  TorusRiemannReference(const SpeedField& speed, const Closure& closure,
                        std::vector<double> piece_densities);

  double operator()(double t, double x) const;
  double valid_until() const noexcept { return valid_until_; }

  /// Mean of rho(t, .) over [a, b] by composite midpoint sampling.
  double average(double t, double a, double b, int samples = 4096) const;
  /// Averages over `bins` equal bins of [0, 1).
  Profile bin_averages(double t, int bins) const;

 private:
  SpeedField speed_;
  std::vector<RiemannSolution> fans_;
  double valid_until_;
};

}  // namespace discoflux

#endif  // DISCOFLUX_RIEMANN_HPP
