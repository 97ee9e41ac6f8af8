#include "discoflux/steady_states.hpp"

#include <algorithm>
#include <cmath>

#include "discoflux/errors.hpp"

namespace discoflux {

namespace {

struct Bracket {
  double lo;
  double hi;
  bool increasing;
};

Bracket branch_bracket(const Closure& closure, Branch branch) {
  switch (closure.shape()) {
    case ClosureShape::Increasing:
      return {closure.rho_min(), closure.rho_max(), true};
    case ClosureShape::Convex:
      return branch == Branch::Plus ? Bracket{closure.extremum(), closure.rho_max(), true}
                                    : Bracket{closure.rho_min(), closure.extremum(), false};
    case ClosureShape::Concave:
      break;
  }
  return branch == Branch::Plus ? Bracket{closure.extremum(), closure.rho_max(), false}
                                : Bracket{closure.rho_min(), closure.extremum(), true};
}

}  // namespace

double solve_steady_at_speed(const Closure& closure, double lambda, double alpha, Branch branch,
                             double x) {
  const Bracket br = branch_bracket(closure, branch);
  auto f = [&](double rho) { return lambda * closure(rho) - alpha; };
  const double f_lo = f(br.lo), f_hi = f(br.hi);
  const double att_lo = std::min(f_lo, f_hi) + alpha;
  const double att_hi = std::max(f_lo, f_hi) + alpha;
  const double tol = 1e-13 * std::max(1.0, std::abs(alpha));
  if (alpha < att_lo - tol || alpha > att_hi + tol) {
    throw NoSolutionError("flux level " + std::to_string(alpha) + " not attainable at x = " +
                              std::to_string(x) + "; attainable interval [" +
                              std::to_string(att_lo) + ", " + std::to_string(att_hi) + "]",
                          x, att_lo, att_hi);
  }
  if (std::abs(f_lo) <= tol) return br.lo;
  if (std::abs(f_hi) <= tol) return br.hi;

  // Orient so that g is increasing in rho on [a, b].
  const double sign = br.increasing ? 1.0 : -1.0;
  double a = br.lo, b = br.hi;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (a + b);
    const double fm = sign * f(mid);
    if (fm == 0.0) return mid;
    (fm < 0.0 ? a : b) = mid;
    if (b - a <= 1e-13 * std::max(1.0, std::abs(mid))) break;
  }
  // Secant polish inside the final bracket.
  double x0 = a, x1 = b;
  double f0 = f(x0), f1 = f(x1);
  double best = std::abs(f0) < std::abs(f1) ? x0 : x1;
  double best_res = std::min(std::abs(f0), std::abs(f1));
  for (int it = 0; it < 8 && best_res > 1e-12 * std::max(1.0, std::abs(alpha)) * 1e-2; ++it) {
    if (f1 == f0) break;
    const double x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
    if (!(x2 >= a && x2 <= b)) break;
    x0 = x1;
    f0 = f1;
    x1 = x2;
    f1 = f(x1);
    if (std::abs(f1) < best_res) {
      best_res = std::abs(f1);
      best = x1;
    }
  }
  return best;
}

double solve_steady(const FluxModel& model, double alpha, double x, Branch branch) {
  return solve_steady_at_speed(model.closure(), model.speed_at(x), alpha, branch, x);
}

Profile cell_speeds(const FluxModel& model, const Grid1D& grid) {
  return sample_profile(grid, [&](double x) { return model.speed_at(x); });
}

Profile steady_profile_from_speeds(const Closure& closure, const Profile& speeds, double alpha,
                                   Branch branch) {
  Profile out(speeds.size());
  const double dx = 1.0 / static_cast<double>(speeds.size());
  for (Eigen::Index i = 0; i < speeds.size(); ++i) {
    try {
      out[i] = solve_steady_at_speed(closure, speeds[i], alpha, branch, (i + 0.5) * dx);
    } catch (const NoSolutionError& e) {
      throw NoSolutionError(std::string(e.what()) + " (cell " + std::to_string(i) + ")",
                            e.position(), e.attainable_lo(), e.attainable_hi());
    }
  }
  return out;
}

Profile steady_profile(const FluxModel& model, double alpha, const Grid1D& grid, Branch branch) {
  return steady_profile_from_speeds(model.closure(), cell_speeds(model, grid), alpha, branch);
}

double envelope_alpha_from_speeds(const Closure& closure, double m0, const Profile& speeds,
                                  const Profile& rho) {
  for (Eigen::Index i = 0; i < rho.size(); ++i) closure.check_domain(rho[i]);

  const bool concave = closure.shape() == ClosureShape::Concave;
  // Level at which m^+ dominates every cell value.
  double far = m0;
  for (Eigen::Index i = 0; i < rho.size(); ++i) {
    if (closure.shape() != ClosureShape::Increasing && rho[i] <= closure.extremum()) continue;
    const double level = speeds[i] * closure(rho[i]);
    far = concave ? std::min(far, level) : std::max(far, level);
  }

  auto dominates = [&](double alpha) {
    for (Eigen::Index i = 0; i < rho.size(); ++i) {
      const double m = solve_steady_at_speed(closure, speeds[i], alpha, Branch::Plus);
      if (m < rho[i] - 1e-12 * std::max(1.0, std::abs(rho[i]))) return false;
    }
    return true;
  };

  double near = m0;
  if (dominates(near)) return near;
  while (std::abs(far - near) > 0.01 * std::max(std::abs(far), 1e-12)) {
    const double mid = 0.5 * (near + far);
    (dominates(mid) ? far : near) = mid;
  }
  return far;
}

double envelope_alpha(const FluxModel& model, const Grid1D& grid, const Profile& rho_profile) {
  return envelope_alpha_from_speeds(model.closure(), model.m0(), cell_speeds(model, grid),
                                    rho_profile);
}

std::optional<double> SteadyStateFamily::operator()(double x) const {
  try {
    return solve_steady(*model_, alpha_, x, branch_);
  } catch (const NoSolutionError&) {
    return std::nullopt;
  }
}

const Profile& SteadyProfileCache::get(double alpha, const Grid1D& grid, Branch branch) {
  std::lock_guard<std::mutex> lock(mutex_);
  const auto key = std::make_tuple(alpha, static_cast<int>(branch), grid.id());
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  auto sp = speeds_.find(grid.id());
  if (sp == speeds_.end()) sp = speeds_.emplace(grid.id(), cell_speeds(*model_, grid)).first;
  return cache_
      .emplace(key, steady_profile_from_speeds(model_->closure(), sp->second, alpha, branch))
      .first->second;
}

}  // namespace discoflux
