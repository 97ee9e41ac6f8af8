#include "discoflux/riemann.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "discoflux/errors.hpp"

namespace discoflux {

RiemannSolution::RiemannSolution(double lambda_left, double lambda_right, const Closure& closure,
                                 double rho_left, double rho_right)
    : lambda_right_(lambda_right), closure_(closure), rho_left_(rho_left), rho_right_(rho_right) {
  if (closure.shape() != ClosureShape::Increasing || !closure.concave_or_linear()) {
    throw UnsupportedRegimeError("exact Riemann evaluator needs an increasing concave or linear h");
  }
  if (!(lambda_left > 0.0) || !(lambda_right > 0.0)) {
    throw DomainError("speeds must be positive");
  }
  closure.check_domain(rho_left);
  closure.check_domain(rho_right);

  const double alpha_in = lambda_left * closure(rho_left);
  const double level = alpha_in / lambda_right;
  if (!(level < closure.value_max())) {
    throw UnsupportedRegimeError("incoming flux " + std::to_string(alpha_in) +
                                 " exceeds the capacity of the right state (boundary layer)");
  }
  rho_star_ = closure.inverse(level);

  const double f_star = lambda_right * closure(rho_star_);
  const double f_right = lambda_right * closure(rho_right_);
  if (std::abs(rho_star_ - rho_right_) <= 1e-14 * std::max(1.0, rho_right_)) {
    wave_ = Wave::None;
  } else if (closure.is_linear()) {
    wave_ = Wave::Contact;
    s_lo_ = s_hi_ = lambda_right * closure.derivative(rho_right_);
  } else if (rho_star_ < rho_right_) {
    wave_ = Wave::Shock;
    s_lo_ = s_hi_ = (f_right - f_star) / (rho_right_ - rho_star_);
  } else {
    wave_ = Wave::Rarefaction;
    s_lo_ = lambda_right * closure.derivative(rho_star_);
    s_hi_ = lambda_right * closure.derivative(rho_right_);
  }
}

double RiemannSolution::rarefaction_state(double xi) const {
  // lambda_right h'(rho) = xi on [rho_right, rho_star]; h' is decreasing there.
  double lo = rho_right_, hi = rho_star_;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    (lambda_right_ * closure_.derivative(mid) > xi ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double RiemannSolution::operator()(double t, double x) const {
  if (x < 0.0) return rho_left_;
  if (t <= 0.0) return x > 0.0 ? rho_right_ : rho_star_;
  const double xi = x / t;
  switch (wave_) {
    case Wave::None:
      return rho_right_;
    case Wave::Shock:
    case Wave::Contact:
      return xi < s_lo_ ? rho_star_ : rho_right_;
    case Wave::Rarefaction:
      break;
  }
  if (xi <= s_lo_) return rho_star_;
  if (xi >= s_hi_) return rho_right_;
  return rarefaction_state(xi);
}

RiemannSolution riemann_exact(double lambda_left, double lambda_right, const Closure& closure,
                              double rho_left, double rho_right) {
  return RiemannSolution(lambda_left, lambda_right, closure, rho_left, rho_right);
}

TorusRiemannReference::TorusRiemannReference(const SpeedField& speed, const Closure& closure,
                                             std::vector<double> piece_densities)
    : speed_(speed) {
  if (!speed.is_piecewise_constant()) {
    throw UnsupportedRegimeError("torus Riemann reference needs piecewise-constant speed");
  }
  const std::size_t n = speed.size();
  if (piece_densities.size() != n) throw DomainError("one density per speed piece required");
  valid_until_ = std::numeric_limits<double>::infinity();
  const auto& b = speed.breakpoints();
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t left = (j + n - 1) % n;
    fans_.push_back(riemann_exact(speed.piece(left).value, speed.piece(j).value, closure,
                                  piece_densities[left], piece_densities[j]));
    const double length = j + 1 < n ? b[j + 1] - b[j] : b[0] + 1.0 - b[j];
    const double s = fans_.back().fastest_speed();
    if (s > 0.0) valid_until_ = std::min(valid_until_, length / s);
  }
}

double TorusRiemannReference::operator()(double t, double x) const {
  if (t > valid_until_) {
    throw UnsupportedRegimeError("Riemann fans interact after t = " + std::to_string(valid_until_));
  }
  const double y = wrap_unit(x);
  const std::size_t j = speed_.piece_index(y);
  double offset = y - speed_.breakpoints()[j];
  if (offset < 0.0) offset += 1.0;
  return fans_[j](t, offset);
}

double TorusRiemannReference::average(double t, double a, double b, int samples) const {
  const double h = (b - a) / samples;
  double sum = 0.0;
  for (int k = 0; k < samples; ++k) sum += (*this)(t, a + (k + 0.5) * h);
  return sum / samples;
}

Profile TorusRiemannReference::bin_averages(double t, int bins) const {
  Profile out(bins);
  for (int i = 0; i < bins; ++i) out[i] = average(t, double(i) / bins, double(i + 1) / bins);
  return out;
}

}  // namespace discoflux
