#ifndef DISCOFLUX_EQUILIBRIUM_HPP
#define DISCOFLUX_EQUILIBRIUM_HPP

#include <cstdint>
#include <vector>

#include "discoflux/rate.hpp"
#include "discoflux/rng.hpp"

namespace discoflux {

/// Power sums of the single-site weights t_n = phi^n / g(n)!.
struct SeriesMoments {
  double z = 0;   ///< sum t_n
  double s1 = 0;  ///< sum n t_n
  double s2 = 0;  ///< sum n^2 t_n
};

/// Single-site equilibrium toolbox of the zero range process for a rate g.
///
/// The site law at fugacity phi is P(n) = phi^n / (Z(phi) g(n)!) with
/// g(n)! = g(1)...g(n). For eventually constant g the series tail is summed in
/// closed form (geometric); otherwise it is truncated with a certified ratio
/// bound. R(phi) = phi Z'(phi)/Z(phi) is the mean occupation and h = R^{-1}.
class EquilibriumTables {
 public:
  /// `density_cap` bounds the tabulated range of R used to seed inversions.
  explicit EquilibriumTables(RateFunction rate, double fugacity_margin = 1e-6,
                             double density_cap = 100.0);

  const RateFunction& rate() const noexcept { return rate_; }

  /// Radius of convergence of Z (sup g); +inf for unbounded g.
  double radius() const noexcept { return rate_.limit(); }
  /// Largest admissible fugacity: radius * (1 - margin), or +inf.
  double fugacity_cap() const noexcept { return fugacity_cap_; }

  SeriesMoments moments(double phi) const;

  double partition_function(double phi) const { return moments(phi).z; }
  double partition_derivative(double phi) const;
  /// R(phi).
  double mean_occupation(double phi) const;
  double occupation_variance(double phi) const;
  /// E[g(eta)] under the site law; equals phi.
  double mean_rate(double phi) const;

  /// h(rho) = R^{-1}(rho).
  double fugacity(double rho) const;
  /// Largest density reachable below the fugacity cap (or the table cap).
  double max_density() const noexcept { return table_rho_.back(); }

  /// Inverse-CDF draw from the site law.
  std::int64_t sample(double phi, RandomStream& rng) const;

 private:
  void check_fugacity(double phi) const;

  RateFunction rate_;
  double fugacity_cap_;
  std::vector<double> table_phi_;
  std::vector<double> table_rho_;
};

}  // namespace discoflux

#endif  // DISCOFLUX_EQUILIBRIUM_HPP
