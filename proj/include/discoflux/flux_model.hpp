#ifndef DISCOFLUX_FLUX_MODEL_HPP
#define DISCOFLUX_FLUX_MODEL_HPP

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "discoflux/closure.hpp"

namespace discoflux {

/// Wraps a position onto the periodic domain [0, 1).
inline double wrap_unit(double x) noexcept {
  double y = x - std::floor(x);
  return y >= 1.0 ? 0.0 : y;
}

/// Piecewise speed lambda(x) on the torus [0, 1).
///
/// Piece i covers [b_i, b_{i+1}); the last piece wraps through 1 to b_0.
/// At a breakpoint the right limit is returned.
class SpeedField {
 public:
  struct Piece {
    double value = 1.0;                ///< used when `fn` is empty
    std::function<double(double)> fn;  ///< smooth evaluator on the piece (absolute x)
  };

  static SpeedField constant(double value);
  static SpeedField piecewise_constant(std::vector<double> breakpoints, std::vector<double> values);
  SpeedField(std::vector<double> breakpoints, std::vector<Piece> pieces);

  double operator()(double x) const;

  std::size_t piece_index(double x) const noexcept;
  const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }
  const Piece& piece(std::size_t i) const noexcept { return pieces_[i]; }
  std::size_t size() const noexcept { return pieces_.size(); }
  bool is_piecewise_constant() const noexcept;

  double lower_bound() const noexcept { return lo_; }
  double upper_bound() const noexcept { return hi_; }

  /// Distance from x to the nearest breakpoint on the torus.
  double distance_to_breakpoint(double x) const noexcept;

 private:
  std::vector<double> breakpoints_;
  std::vector<Piece> pieces_;
  double lo_ = 0;
  double hi_ = 0;
};

/// Normalized bump theta(z) = C exp(-1/(1 - z^2)) on [-1, 1], scaled to width eps.
class MollifierKernel {
 public:
  static constexpr int kNodes = 512;

  explicit MollifierKernel(double eps);

  double epsilon() const noexcept { return eps_; }
  /// Unit-mass reference kernel on [-1, 1].
  double reference(double z) const noexcept;
  /// theta_eps(y) = theta(y/eps)/eps, zero for |y| > eps.
  double operator()(double y) const noexcept { return reference(y / eps_) / eps_; }
  /// Mass of the reference kernel on [-1, z].
  double cdf(double z) const noexcept;

 private:
  double eps_;
  double norm_;
  std::array<double, kNodes + 1> cdf_table_{};
};

/// Flux F(x, rho) = lambda(x) h(rho), optionally mollified in x.
class FluxModel {
 public:
  FluxModel(SpeedField speed, Closure closure, std::string id = "model");

  /// Copy whose speed is lambda * theta_eps (eps > 0).
  FluxModel mollified(double eps) const;

  /// lambda(x), or (lambda * theta_eps)(x) for a mollified model.
  double speed_at(double x) const;
  double eval(double x, double rho) const;

  const SpeedField& speed() const noexcept { return speed_; }
  const Closure& closure() const noexcept { return closure_; }
  const std::optional<MollifierKernel>& kernel() const noexcept { return kernel_; }
  double epsilon() const noexcept { return kernel_ ? kernel_->epsilon() : 0.0; }
  ClosureShape shape() const noexcept { return closure_.shape(); }
  const std::string& id() const noexcept { return id_; }

  double lambda_lo() const noexcept { return speed_.lower_bound(); }
  double lambda_hi() const noexcept { return speed_.upper_bound(); }

  /// Flux level M0 at the extremum (convex/concave) or the minimal level
  /// lambda(x) h(rho_min) for increasing closures (0 for ZRP closures).
  double m0() const;

  /// Growth envelopes f(rho) <= |F(x, rho)| <= g(rho) (metadata only).
  double envelope_lower(double rho) const { return lambda_lo() * std::abs(closure_(rho)); }
  double envelope_upper(double rho) const { return lambda_hi() * std::abs(closure_(rho)); }

 private:
  SpeedField speed_;
  Closure closure_;
  std::optional<MollifierKernel> kernel_;
  std::string id_;
};

/// lambda(x) h(rho); DomainError outside the closure domain.
double eval_flux(const FluxModel& model, double x, double rho);

/// (lambda * theta_eps)(x) by piecewise quadrature split at the breakpoints.
double mollified_speed(const SpeedField& speed, const MollifierKernel& kernel, double x);
double mollified_speed(const FluxModel& model, const MollifierKernel& kernel, double x);

}  // namespace discoflux

#endif  // DISCOFLUX_FLUX_MODEL_HPP
