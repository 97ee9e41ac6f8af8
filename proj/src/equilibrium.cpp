#include "discoflux/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "discoflux/errors.hpp"

namespace discoflux {

namespace {
constexpr double kTailTolerance = 1e-14;
constexpr int kTableSize = 512;
}  // namespace

EquilibriumTables::EquilibriumTables(RateFunction rate, double fugacity_margin,
                                     double density_cap)
    : rate_(std::move(rate)) {
  const double r = radius();
  fugacity_cap_ = std::isfinite(r) ? r * (1.0 - fugacity_margin)
                                   : std::numeric_limits<double>::infinity();

  // Upper end of the inversion table: fugacity cap, or where R exceeds density_cap.
  double phi_hi = fugacity_cap_;
  if (!std::isfinite(phi_hi)) {
    phi_hi = 1.0;
    while (mean_occupation(phi_hi) < density_cap) phi_hi *= 2.0;
  } else if (mean_occupation(phi_hi) > density_cap) {
    double lo = 0.0, hi = phi_hi;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (mean_occupation(mid) < density_cap ? lo : hi) = mid;
    }
    phi_hi = hi;
  }
  table_phi_.resize(kTableSize + 1);
  table_rho_.resize(kTableSize + 1);
  for (int i = 0; i <= kTableSize; ++i) {
    // Quadratic clustering towards the cap where R is steepest.
    const double s = static_cast<double>(i) / kTableSize;
    table_phi_[i] = phi_hi * (1.0 - (1.0 - s) * (1.0 - s));
    table_rho_[i] = mean_occupation(table_phi_[i]);
  }
  for (int i = 1; i <= kTableSize; ++i) {
    if (!(table_rho_[i] > table_rho_[i - 1])) {
      throw DomainError("R is not strictly increasing on the tabulated fugacity range");
    }
  }
}

void EquilibriumTables::check_fugacity(double phi) const {
  if (!(phi >= 0.0)) throw DomainError("fugacity must be nonnegative");
  if (phi > fugacity_cap_) {
    throw DomainError("fugacity " + std::to_string(phi) +
                      " at or above the convergence radius bound " +
                      std::to_string(fugacity_cap_));
  }
}

SeriesMoments EquilibriumTables::moments(double phi) const {
  check_fugacity(phi);
  SeriesMoments m{1.0, 0.0, 0.0};
  if (phi == 0.0) return m;

  double term = 1.0;
  if (const auto c = rate_.constant_from()) {
    for (std::int64_t n = 1; n <= *c; ++n) {
      term *= phi / rate_(n);
      const double dn = static_cast<double>(n);
      m.z += term;
      m.s1 += dn * term;
      m.s2 += dn * dn * term;
    }
    // Exact geometric tail: t_{c+j} = t_c q^j.
    const double q = phi / rate_(*c);
    const double k = static_cast<double>(*c);
    const double a0 = q / (1.0 - q);
    const double a1 = q / ((1.0 - q) * (1.0 - q));
    const double a2 = q * (1.0 + q) / ((1.0 - q) * (1.0 - q) * (1.0 - q));
    m.z += term * a0;
    m.s1 += term * (k * a0 + a1);
    m.s2 += term * (k * k * a0 + 2.0 * k * a1 + a2);
    return m;
  }

  const std::int64_t cap = rate_.truncation_cap();
  for (std::int64_t n = 1; n <= cap; ++n) {
    term *= phi / rate_(n);
    const double dn = static_cast<double>(n);
    m.z += term;
    m.s1 += dn * term;
    m.s2 += dn * dn * term;
    const double q = phi / rate_(n + 1);
    if (q < 0.5) {
      // Ratio bound on the remaining n^2-weighted tail.
      const double bound = term * q / (1.0 - q) * (dn + 1.0 / (1.0 - q)) * (dn + 1.0 / (1.0 - q));
      if (bound < kTailTolerance * 1e-3 * m.z) return m;
    }
  }
  throw DomainError("partition series did not reach the tail tolerance within the truncation cap");
}

double EquilibriumTables::partition_derivative(double phi) const {
  const auto m = moments(phi);
  if (phi == 0.0) return rate_(1) > 0 ? 1.0 / rate_(1) : 0.0;
  return m.s1 / phi;
}

double EquilibriumTables::mean_occupation(double phi) const {
  const auto m = moments(phi);
  return m.s1 / m.z;
}

double EquilibriumTables::occupation_variance(double phi) const {
  const auto m = moments(phi);
  const double mean = m.s1 / m.z;
  return m.s2 / m.z - mean * mean;
}

double EquilibriumTables::mean_rate(double phi) const {
  check_fugacity(phi);
  // E[g(eta)] = sum g(n) phi^n/g(n)! / Z = phi Z / Z.
  return phi;
}

double EquilibriumTables::fugacity(double rho) const {
  if (!(rho >= 0.0)) throw DomainError("density must be nonnegative");
  if (rho == 0.0) return 0.0;
  if (rho > table_rho_.back()) {
    throw RangeError("density " + std::to_string(rho) + " beyond the reachable range of R (max " +
                     std::to_string(table_rho_.back()) + ")");
  }
  const auto it = std::lower_bound(table_rho_.begin(), table_rho_.end(), rho);
  const auto i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(1, it - table_rho_.begin()));
  double lo = table_phi_[i - 1], hi = table_phi_[i];
  double phi = lo + (hi - lo) * (rho - table_rho_[i - 1]) / (table_rho_[i] - table_rho_[i - 1]);
  // Safeguarded Newton with R'(phi) = Var/phi.
  for (int it = 0; it < 100; ++it) {
    const auto m = moments(phi);
    const double r = m.s1 / m.z;
    const double f = r - rho;
    if (std::abs(f) <= 1e-15 * std::max(1.0, rho)) return phi;
    (f < 0 ? lo : hi) = phi;
    const double var = m.s2 / m.z - r * r;
    double next = phi - f * phi / var;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == phi) return phi;
    phi = next;
  }
  return phi;
}

std::int64_t EquilibriumTables::sample(double phi, RandomStream& rng) const {
  const auto m = moments(phi);
  if (phi == 0.0) return 0;
  const double u = rng.uniform() * m.z;
  double cum = 1.0;
  if (u < cum) return 0;
  double term = 1.0;
  if (const auto c = rate_.constant_from()) {
    for (std::int64_t n = 1; n <= *c; ++n) {
      term *= phi / rate_(n);
      cum += term;
      if (u < cum) return n;
    }
    // Beyond c the law is geometric with ratio q.
    const double q = phi / rate_(*c);
    const double extra = std::floor(std::log(rng.uniform()) / std::log(q));
    return *c + 1 + static_cast<std::int64_t>(extra);
  }
  const std::int64_t cap = rate_.truncation_cap();
  for (std::int64_t n = 1; n <= cap; ++n) {
    term *= phi / rate_(n);
    cum += term;
    if (u < cum) return n;
  }
  return cap;
}

}  // namespace discoflux
