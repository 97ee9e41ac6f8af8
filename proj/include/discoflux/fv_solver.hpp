#ifndef DISCOFLUX_FV_SOLVER_HPP
#define DISCOFLUX_FV_SOLVER_HPP

#include <string>
#include <vector>

#include "discoflux/flux_model.hpp"
#include "discoflux/grid.hpp"

namespace discoflux {

/// Cell averages of rho^eps(t, .) on a periodic grid.
struct GridSolution {
  Grid1D grid;
  double time = 0.0;
  Profile values;
  std::string model_id;
  double epsilon = 0.0;

  double mass() const { return values.sum() * grid.dx(); }
};

/// Godunov flux for lambda_left h on the left and lambda_right h on the right.
///
/// Increasing h: every wave moves right, so the flux is lambda_left h(rho_left).
/// Convex/concave h (single speed): min over [rho_l, rho_r] if rho_l <= rho_r,
/// else max over [rho_r, rho_l].
double godunov_flux(const Closure& closure, double lambda_left, double lambda_right,
                    double rho_left, double rho_right);

/// Godunov value at x_interface with the model's (mollified) speed there.
double interface_flux(const FluxModel& model, double x_interface, double rho_left,
                      double rho_right);

struct SolverOptions {
  double cfl = 0.45;  ///< Courant number used by solve()
  double step_limit = 1.0;  ///< largest Courant number step() accepts
};

/// First-order conservative Godunov scheme for rho_t + (lambda_eps(x) h(rho))_x = 0.
///
/// For increasing h the flux leaving cell i is lambda_eps(x_i) h(rho_i), so the
/// cell-center steady profile m_alpha^eps is an exact discrete fixed point.
/// Convex/concave closures use the interface speed lambda_eps(x_{i+1/2}).
class FvSolver {
 public:
  FvSolver(const FluxModel& model, Grid1D grid, SolverOptions options = {});

  const Grid1D& grid() const noexcept { return grid_; }
  const FluxModel& model() const noexcept { return model_; }
  const Profile& center_speeds() const noexcept { return center_speed_; }
  const Profile& interface_speeds() const noexcept { return interface_speed_; }

  /// dx / (lambda_hi max|h'|) over [lo, hi]: the Courant-1 step.
  double courant_unit_dt(double lo, double hi) const;

  /// Fixed run step: cfl * dx / L with L taken over the adapted-envelope range of rho0.
  double run_dt(const Profile& rho0) const;

  /// One conservative update; CflError if dt exceeds the stability bound.
  GridSolution step(const GridSolution& sol, double dt) const;
  void advance(Profile& values, double dt) const;

  /// Marches from rho0 at t = 0 to t_end with the fixed run step. Snapshots at
  /// the requested times (ascending, within [0, t_end]) are appended to `snapshots`.
  GridSolution solve(const Profile& rho0, double t_end,
                     const std::vector<double>& snapshot_times = {},
                     std::vector<GridSolution>* snapshots = nullptr) const;

  GridSolution wrap(const Profile& values, double time) const;

 private:
  FluxModel model_;
  Grid1D grid_;
  SolverOptions options_;
  Profile center_speed_;
  Profile interface_speed_;
};

/// One step of the scheme for `model` on the solution's grid.
GridSolution step(const FluxModel& model, const GridSolution& sol, double dt,
                  SolverOptions options = {});

/// Solves the Cauchy problem on `grid`; requires eps >= 4 dx for mollified models.
GridSolution solve(const FluxModel& model, const Profile& rho0, double t_end, const Grid1D& grid,
                   SolverOptions options = {});

/// Cell-average L1 distance on a common grid.
double l1_distance(const Profile& a, const Profile& b, double dx);

/// Averages pairs of fine cells onto a grid with half as many cells.
Profile restrict_to_coarse(const Profile& fine);

}  // namespace discoflux

#endif  // DISCOFLUX_FV_SOLVER_HPP
