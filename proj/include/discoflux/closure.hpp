#ifndef DISCOFLUX_CLOSURE_HPP
#define DISCOFLUX_CLOSURE_HPP

#include <memory>
#include <string>

#include "discoflux/equilibrium.hpp"

namespace discoflux {

enum class ClosureShape { Increasing, Convex, Concave };
enum class Branch { Plus, Minus };

const char* to_string(Branch b) noexcept;

/// Macroscopic closure h(rho) of the flux F(x, rho) = lambda(x) h(rho).
///
/// Increasing closures come from the zero range process (h = R^{-1}); the
/// quadratic convex/concave closures cover the (H3) case with h(rho_m) = 0.
class Closure {
 public:
  enum class Kind { Linear, Geometric, Tabulated, Quadratic };

  /// h(rho) = rho, the closure of g(k) = k.
  static Closure linear(double rho_max = 50.0);
  /// h(rho) = rho / (1 + rho), the closure of g(k) = 1{k >= 1}.
  static Closure geometric(double rho_max = 50.0);
  /// h = R^{-1} evaluated through the partition-function series.
  static Closure tabulated(std::shared_ptr<const EquilibriumTables> tables, double rho_max = 50.0);
  /// h(rho) = +-(rho - rho_m)^2 / 2; convex for sign = +1, concave for sign = -1.
  static Closure quadratic(double rho_m, int sign, double half_width = 50.0);

  double operator()(double rho) const;
  double derivative(double rho) const;
  /// Density on the requested branch with h(rho) = value.
  double inverse(double value, Branch branch = Branch::Plus) const;

  Kind kind() const noexcept { return kind_; }
  ClosureShape shape() const noexcept;
  /// Strictly increasing and concave (or linear) on the whole domain.
  bool concave_or_linear() const noexcept { return kind_ == Kind::Linear || kind_ == Kind::Geometric; }
  bool is_linear() const noexcept { return kind_ == Kind::Linear; }

  double rho_min() const noexcept { return rho_lo_; }
  double rho_max() const noexcept { return rho_hi_; }
  /// Extremum location rho_m (convex/concave case) or rho_min (increasing case).
  double extremum() const noexcept { return rho_m_; }
  /// Range of h on the domain.
  double value_min() const;
  double value_max() const;

  std::string name() const;
  void check_domain(double rho) const;

 private:
  Closure(Kind kind, double lo, double hi, double rho_m, int sign,
          std::shared_ptr<const EquilibriumTables> tables);

  Kind kind_;
  double rho_lo_;
  double rho_hi_;
  double rho_m_;
  int sign_;
  std::shared_ptr<const EquilibriumTables> tables_;
};

/// h = R^{-1} for the rate g. Built-in rates map to their closed forms,
/// which agree with the tabulated series.
Closure closure_from_rate(const RateFunction& rate, double rho_max = 50.0);

}  // namespace discoflux

#endif  // DISCOFLUX_CLOSURE_HPP
