#include "discoflux/flux_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "discoflux/errors.hpp"
#include "discoflux/quadrature.hpp"

namespace discoflux {

namespace {

inline double raw_bump(double z) noexcept {
  const double s = 1.0 - z * z;
  return s > 0.0 ? std::exp(-1.0 / s) : 0.0;
}

}  // namespace

// SpeedField -----------------------------------------------------------------

SpeedField SpeedField::constant(double value) { return piecewise_constant({0.0}, {value}); }

SpeedField SpeedField::piecewise_constant(std::vector<double> breakpoints,
                                          std::vector<double> values) {
  std::vector<Piece> pieces;
  pieces.reserve(values.size());
  for (double v : values) pieces.push_back(Piece{v, {}});
  return SpeedField(std::move(breakpoints), std::move(pieces));
}

SpeedField::SpeedField(std::vector<double> breakpoints, std::vector<Piece> pieces)
    : breakpoints_(std::move(breakpoints)), pieces_(std::move(pieces)) {
  if (breakpoints_.empty() || breakpoints_.size() != pieces_.size()) {
    throw DomainError("speed field needs one piece per breakpoint");
  }
  for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
    if (!(breakpoints_[i] >= 0.0 && breakpoints_[i] < 1.0)) {
      throw DomainError("breakpoints must lie in [0, 1)");
    }
    if (i > 0 && !(breakpoints_[i] > breakpoints_[i - 1])) {
      throw DomainError("breakpoints must be strictly increasing");
    }
  }
  lo_ = std::numeric_limits<double>::infinity();
  hi_ = -lo_;
  const std::size_t n = pieces_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Piece& p = pieces_[i];
    if (!p.fn) {
      lo_ = std::min(lo_, p.value);
      hi_ = std::max(hi_, p.value);
      continue;
    }
    const double a = breakpoints_[i];
    const double b = i + 1 < n ? breakpoints_[i + 1] : breakpoints_[0] + 1.0;
    constexpr int kSamples = 4096;
    for (int k = 0; k <= kSamples; ++k) {
      const double x = a + (b - a) * k / kSamples;
      const double v = p.fn(k == kSamples ? std::nextafter(b, a) : x);
      lo_ = std::min(lo_, v);
      hi_ = std::max(hi_, v);
    }
  }
  if (!(lo_ > 0.0) || !std::isfinite(hi_)) {
    throw DomainError("speed must satisfy 0 < lambda_lo <= lambda <= lambda_hi < inf");
  }
}

std::size_t SpeedField::piece_index(double x) const noexcept {
  const double y = wrap_unit(x);
  const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), y);
  if (it == breakpoints_.begin()) return breakpoints_.size() - 1;
  return static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
}

double SpeedField::operator()(double x) const {
  const double y = wrap_unit(x);
  const Piece& p = pieces_[piece_index(y)];
  return p.fn ? p.fn(y) : p.value;
}

bool SpeedField::is_piecewise_constant() const noexcept {
  return std::all_of(pieces_.begin(), pieces_.end(), [](const Piece& p) { return !p.fn; });
}

double SpeedField::distance_to_breakpoint(double x) const noexcept {
  const double y = wrap_unit(x);
  double best = 1.0;
  for (double b : breakpoints_) {
    const double d = std::abs(y - b);
    best = std::min(best, std::min(d, 1.0 - d));
  }
  return best;
}

// MollifierKernel ------------------------------------------------------------

MollifierKernel::MollifierKernel(double eps) : eps_(eps) {
  if (!(eps > 0.0)) throw DomainError("mollifier scale must be positive");
  const auto& rule = gauss_legendre16<double>();
  cdf_table_[0] = 0.0;
  for (int k = 0; k < kNodes; ++k) {
    const double a = -1.0 + 2.0 * k / kNodes;
    const double b = -1.0 + 2.0 * (k + 1) / kNodes;
    cdf_table_[k + 1] = cdf_table_[k] + rule.integrate(raw_bump, a, b);
  }
  norm_ = cdf_table_[kNodes];
  for (double& v : cdf_table_) v /= norm_;
}

double MollifierKernel::reference(double z) const noexcept { return raw_bump(z) / norm_; }

double MollifierKernel::cdf(double z) const noexcept {
  if (z <= -1.0) return 0.0;
  if (z >= 1.0) return 1.0;
  const double pos = (z + 1.0) * 0.5 * kNodes;
  const int k = std::min(kNodes - 1, static_cast<int>(pos));
  const double a = -1.0 + 2.0 * k / kNodes;
  return cdf_table_[k] +
         gauss_legendre16<double>().integrate([this](double t) { return reference(t); }, a, z);
}

// FluxModel ------------------------------------------------------------------

FluxModel::FluxModel(SpeedField speed, Closure closure, std::string id)
    : speed_(std::move(speed)), closure_(std::move(closure)), id_(std::move(id)) {}

FluxModel FluxModel::mollified(double eps) const {
  FluxModel copy = *this;
  copy.kernel_.emplace(eps);
  return copy;
}

double FluxModel::speed_at(double x) const {
  return kernel_ ? mollified_speed(speed_, *kernel_, x) : speed_(x);
}

double FluxModel::eval(double x, double rho) const {
  closure_.check_domain(rho);
  return speed_at(x) * closure_(rho);
}

double FluxModel::m0() const {
  if (closure_.shape() != ClosureShape::Increasing) return 0.0;
  const double h0 = closure_(closure_.rho_min());
  return h0 >= 0.0 ? lambda_hi() * h0 : lambda_lo() * h0;
}

double eval_flux(const FluxModel& model, double x, double rho) {
  if (!(x >= 0.0 && x < 1.0)) throw DomainError("position must lie in [0, 1)");
  return model.eval(x, rho);
}

double mollified_speed(const SpeedField& speed, const MollifierKernel& kernel, double x) {
  const double eps = kernel.epsilon();
  // Kernel-coordinate split points z where x - eps z crosses a breakpoint.
  std::vector<double> cuts{-1.0, 1.0};
  for (double b : speed.breakpoints()) {
    const double base = (x - b) / eps;
    const int kmin = static_cast<int>(std::floor(x - eps - b)) - 1;
    const int kmax = static_cast<int>(std::ceil(x + eps - b)) + 1;
    for (int k = kmin; k <= kmax; ++k) {
      const double z = base - k / eps;
      if (z > -1.0 && z < 1.0) cuts.push_back(z);
    }
  }
  std::sort(cuts.begin(), cuts.end());

  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double za = cuts[i], zb = cuts[i + 1];
    if (!(zb > za)) continue;
    const auto& piece = speed.piece(speed.piece_index(x - eps * 0.5 * (za + zb)));
    if (!piece.fn) {
      total += piece.value * (kernel.cdf(zb) - kernel.cdf(za));
      continue;
    }
    total += integrate_adaptive<double>(
        [&](double z) { return piece.fn(wrap_unit(x - eps * z)) * kernel.reference(z); }, za, zb,
        1e-13);
  }
  return total;
}

double mollified_speed(const FluxModel& model, const MollifierKernel& kernel, double x) {
  return mollified_speed(model.speed(), kernel, x);
}

}  // namespace discoflux
