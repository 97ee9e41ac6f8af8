#include "discoflux/fv_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "discoflux/errors.hpp"
#include "discoflux/steady_states.hpp"

namespace discoflux {

double godunov_flux(const Closure& closure, double lambda_left, double lambda_right,
                    double rho_left, double rho_right) {
  if (closure.shape() == ClosureShape::Increasing) return lambda_left * closure(rho_left);
  const double lam = 0.5 * (lambda_left + lambda_right);
  const double a = std::min(rho_left, rho_right), b = std::max(rho_left, rho_right);
  const double fa = lam * closure(a), fb = lam * closure(b);
  const double fm = lam * closure(std::clamp(closure.extremum(), a, b));
  const bool convex = closure.shape() == ClosureShape::Convex;
  if (rho_left <= rho_right) return convex ? fm : std::min(fa, fb);
  return convex ? std::max(fa, fb) : fm;
}

double interface_flux(const FluxModel& model, double x_interface, double rho_left,
                      double rho_right) {
  model.closure().check_domain(rho_left);
  model.closure().check_domain(rho_right);
  const double lam = model.speed_at(x_interface);
  return godunov_flux(model.closure(), lam, lam, rho_left, rho_right);
}

FvSolver::FvSolver(const FluxModel& model, Grid1D grid, SolverOptions options)
    : model_(model), grid_(grid), options_(options) {
  center_speed_ = cell_speeds(model_, grid_);
  interface_speed_ = Profile(grid_.n_cells());
  for (int i = 0; i < grid_.n_cells(); ++i) interface_speed_[i] = model_.speed_at(grid_.interface(i));
}

double FvSolver::courant_unit_dt(double lo, double hi) const {
  const Closure& h = model_.closure();
  lo = std::max(lo, h.rho_min());
  hi = std::min(hi, h.rho_max());
  double slope = std::max(std::abs(h.derivative(lo)), std::abs(h.derivative(hi)));
  constexpr int kSamples = 256;
  for (int k = 1; k < kSamples; ++k) {
    slope = std::max(slope, std::abs(h.derivative(lo + (hi - lo) * k / kSamples)));
  }
  const double speed = model_.lambda_hi() * slope;
  return speed > 0.0 ? grid_.dx() / speed : std::numeric_limits<double>::infinity();
}

double FvSolver::run_dt(const Profile& rho0) const {
  const Closure& h = model_.closure();
  double lo = rho0.minCoeff(), hi = rho0.maxCoeff();
  if (h.shape() == ClosureShape::Increasing) {
    // Data above every attainable steady state has no envelope; fall back to the density cap.
    try {
      const double a_hi = envelope_alpha_from_speeds(h, model_.m0(), center_speed_, rho0);
      hi = std::max(hi, steady_profile_from_speeds(h, center_speed_, a_hi).maxCoeff());
    } catch (const NoSolutionError&) {
      hi = h.rho_max();
    }
    const double a_lo =
        (center_speed_.array() * rho0.unaryExpr([&](double r) { return h(r); }).array()).minCoeff();
    lo = std::min(lo, steady_profile_from_speeds(h, center_speed_, a_lo).minCoeff());
  } else {
    double level = 0.0;
    for (Eigen::Index i = 0; i < rho0.size(); ++i) {
      const double f = center_speed_[i] * h(rho0[i]);
      level = h.shape() == ClosureShape::Convex ? std::max(level, f) : std::min(level, f);
    }
    hi = std::max(hi, steady_profile_from_speeds(h, center_speed_, level, Branch::Plus).maxCoeff());
    lo = std::min(lo, steady_profile_from_speeds(h, center_speed_, level, Branch::Minus).minCoeff());
  }
  return options_.cfl * courant_unit_dt(lo, hi);
}

void FvSolver::advance(Profile& values, double dt) const {
  const Closure& h = model_.closure();
  const Eigen::Index n = values.size();
  Eigen::ArrayXd flux(n);
  if (h.shape() == ClosureShape::Increasing) {
    flux = center_speed_.array() * values.unaryExpr([&](double r) { return h(r); }).array();
  } else {
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Index j = i + 1 < n ? i + 1 : 0;
      flux[i] = godunov_flux(h, interface_speed_[i], interface_speed_[i], values[i], values[j]);
    }
  }
  Eigen::ArrayXd inflow(n);
  inflow << flux.tail(1), flux.head(n - 1);
  values.array() -= (dt / grid_.dx()) * (flux - inflow);
}

GridSolution FvSolver::wrap(const Profile& values, double time) const {
  return GridSolution{grid_, time, values, model_.id(), model_.epsilon()};
}

GridSolution FvSolver::step(const GridSolution& sol, double dt) const {
  if (!(sol.grid == grid_)) throw DomainError("solution grid does not match the solver grid");
  const double bound =
      options_.step_limit * courant_unit_dt(sol.values.minCoeff(), sol.values.maxCoeff());
  if (!(dt >= 0.0) || dt > bound * (1.0 + 1e-12)) {
    throw CflError("time step " + std::to_string(dt) + " violates the CFL bound " +
                       std::to_string(bound),
                   bound);
  }
  GridSolution next = sol;
  advance(next.values, dt);
  next.time += dt;
  return next;
}

GridSolution FvSolver::solve(const Profile& rho0, double t_end,
                             const std::vector<double>& snapshot_times,
                             std::vector<GridSolution>* snapshots) const {
  if (rho0.size() != grid_.n_cells()) throw DomainError("initial profile size mismatch");
  if (!(t_end >= 0.0)) throw DomainError("t_end must be nonnegative");
  if (model_.kernel()) {
    if (model_.epsilon() < 4.0 * grid_.dx() * (1.0 - 1e-12)) {
      throw DomainError("mollifier scale must satisfy eps >= 4 dx");
    }
  } else if (!(model_.speed().size() == 1 && !model_.speed().piece(0).fn)) {
    throw DomainError("solve needs a mollified model unless the speed is constant");
  }
  for (Eigen::Index i = 0; i < rho0.size(); ++i) model_.closure().check_domain(rho0[i]);

  const double dt = t_end > 0.0 ? run_dt(rho0) : 0.0;
  std::vector<double> targets;
  for (double s : snapshot_times) {
    if (s < 0.0 || s > t_end) throw DomainError("snapshot time outside [0, t_end]");
    targets.push_back(s);
  }
  if (!std::is_sorted(targets.begin(), targets.end())) {
    throw DomainError("snapshot times must be ascending");
  }
  const std::size_t n_snap = targets.size();
  targets.push_back(t_end);

  Profile values = rho0;
  double t = 0.0;
  for (std::size_t k = 0; k < targets.size(); ++k) {
    const double target = targets[k];
    while (target - t > 1e-14 * std::max(1.0, target)) {
      const double h = std::min(dt, target - t);
      advance(values, h);
      t = (h == dt) ? t + dt : target;
    }
    if (k < n_snap && snapshots) snapshots->push_back(wrap(values, target));
  }
  return wrap(values, t_end);
}

GridSolution step(const FluxModel& model, const GridSolution& sol, double dt,
                  SolverOptions options) {
  return FvSolver(model, sol.grid, options).step(sol, dt);
}

GridSolution solve(const FluxModel& model, const Profile& rho0, double t_end, const Grid1D& grid,
                   SolverOptions options) {
  return FvSolver(model, grid, options).solve(rho0, t_end);
}

double l1_distance(const Profile& a, const Profile& b, double dx) {
  return (a - b).cwiseAbs().sum() * dx;
}

Profile restrict_to_coarse(const Profile& fine) {
  if (fine.size() % 2 != 0) throw DomainError("fine profile must have an even cell count");
  const Eigen::Index n = fine.size() / 2;
  Profile coarse(n);
  for (Eigen::Index i = 0; i < n; ++i) coarse[i] = 0.5 * (fine[2 * i] + fine[2 * i + 1]);
  return coarse;
}

}  // namespace discoflux
