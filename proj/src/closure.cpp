#include "discoflux/closure.hpp"

#include <cmath>

#include "discoflux/errors.hpp"

namespace discoflux {

const char* to_string(Branch b) noexcept { return b == Branch::Plus ? "plus" : "minus"; }

Closure::Closure(Kind kind, double lo, double hi, double rho_m, int sign,
                 std::shared_ptr<const EquilibriumTables> tables)
    : kind_(kind), rho_lo_(lo), rho_hi_(hi), rho_m_(rho_m), sign_(sign), tables_(std::move(tables)) {}

Closure Closure::linear(double rho_max) { return Closure(Kind::Linear, 0.0, rho_max, 0.0, 1, nullptr); }

Closure Closure::geometric(double rho_max) {
  return Closure(Kind::Geometric, 0.0, rho_max, 0.0, 1, nullptr);
}

Closure Closure::tabulated(std::shared_ptr<const EquilibriumTables> tables, double rho_max) {
  if (!tables) throw DomainError("tabulated closure needs equilibrium tables");
  if (rho_max > tables->max_density()) {
    throw RangeError("closure density cap beyond the reachable range of R");
  }
  return Closure(Kind::Tabulated, 0.0, rho_max, 0.0, 1, std::move(tables));
}

Closure Closure::quadratic(double rho_m, int sign, double half_width) {
  if (sign != 1 && sign != -1) throw DomainError("quadratic closure sign must be +1 or -1");
  return Closure(Kind::Quadratic, rho_m - half_width, rho_m + half_width, rho_m, sign, nullptr);
}

ClosureShape Closure::shape() const noexcept {
  if (kind_ != Kind::Quadratic) return ClosureShape::Increasing;
  return sign_ > 0 ? ClosureShape::Convex : ClosureShape::Concave;
}

void Closure::check_domain(double rho) const {
  if (!(rho >= rho_lo_ - 1e-12) || !(rho <= rho_hi_ + 1e-12)) {
    throw DomainError("density " + std::to_string(rho) + " outside closure domain [" +
                      std::to_string(rho_lo_) + ", " + std::to_string(rho_hi_) + "]");
  }
}

double Closure::operator()(double rho) const {
  switch (kind_) {
    case Kind::Linear:
      if (rho < 0) check_domain(rho);
      return rho;
    case Kind::Geometric:
      if (rho < 0) check_domain(rho);
      return rho / (1.0 + rho);
    case Kind::Tabulated:
      return tables_->fugacity(rho);
    case Kind::Quadratic:
      break;
  }
  const double d = rho - rho_m_;
  return sign_ * 0.5 * d * d;
}

double Closure::derivative(double rho) const {
  switch (kind_) {
    case Kind::Linear:
      return 1.0;
    case Kind::Geometric:
      return 1.0 / ((1.0 + rho) * (1.0 + rho));
    case Kind::Tabulated: {
      const double phi = tables_->fugacity(rho);
      if (phi == 0.0) return tables_->rate()(1);
      return phi / tables_->occupation_variance(phi);
    }
    case Kind::Quadratic:
      break;
  }
  return sign_ * (rho - rho_m_);
}

double Closure::value_min() const {
  if (kind_ == Kind::Quadratic) {
    const double edge = sign_ * 0.5 * (rho_hi_ - rho_m_) * (rho_hi_ - rho_m_);
    return sign_ > 0 ? 0.0 : edge;
  }
  return (*this)(rho_lo_);
}

double Closure::value_max() const {
  if (kind_ == Kind::Quadratic) {
    const double edge = sign_ * 0.5 * (rho_hi_ - rho_m_) * (rho_hi_ - rho_m_);
    return sign_ > 0 ? edge : 0.0;
  }
  return (*this)(rho_hi_);
}

double Closure::inverse(double value, Branch branch) const {
  const double lo = value_min(), hi = value_max();
  if (!(value >= lo - 1e-15) || !(value <= hi + 1e-15)) {
    throw RangeError("closure value " + std::to_string(value) + " outside attainable range [" +
                     std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  switch (kind_) {
    case Kind::Linear:
      return value;
    case Kind::Geometric:
      return value / (1.0 - value);
    case Kind::Tabulated:
      return tables_->mean_occupation(value);
    case Kind::Quadratic:
      break;
  }
  const double d = std::sqrt(std::max(0.0, 2.0 * value * sign_));
  return branch == Branch::Plus ? rho_m_ + d : rho_m_ - d;
}

std::string Closure::name() const {
  switch (kind_) {
    case Kind::Linear:
      return "linear";
    case Kind::Geometric:
      return "geometric";
    case Kind::Tabulated:
      return "tabulated:" + tables_->rate().tag();
    case Kind::Quadratic:
      break;
  }
  return sign_ > 0 ? "convex_quadratic" : "concave_quadratic";
}

Closure closure_from_rate(const RateFunction& rate, double rho_max) {
  switch (rate.kind()) {
    case RateFunction::Kind::Indicator:
      return Closure::geometric(rho_max);
    case RateFunction::Kind::Identity:
      return Closure::linear(rho_max);
    case RateFunction::Kind::Table:
      break;
  }
  return Closure::tabulated(std::make_shared<const EquilibriumTables>(rate), rho_max);
}

}  // namespace discoflux
