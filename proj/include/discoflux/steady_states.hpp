#ifndef DISCOFLUX_STEADY_STATES_HPP
#define DISCOFLUX_STEADY_STATES_HPP

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>

#include "discoflux/flux_model.hpp"
#include "discoflux/grid.hpp"

namespace discoflux {

/// Steady state m with lambda h(m) = alpha for a known local speed lambda.
///
/// Bracketed bisection on the monotone branch followed by a secant polish.
/// `x` only labels the error.
double solve_steady_at_speed(const Closure& closure, double lambda, double alpha, Branch branch,
                             double x = 0.0);

/// m_alpha^branch(x) solving F(x, m) = alpha.
double solve_steady(const FluxModel& model, double alpha, double x, Branch branch = Branch::Plus);

/// Per-cell steady states for given cell speeds.
Profile steady_profile_from_speeds(const Closure& closure, const Profile& speeds, double alpha,
                                   Branch branch = Branch::Plus);

/// Per-cell solve_steady at the grid's cell centers.
Profile steady_profile(const FluxModel& model, double alpha, const Grid1D& grid,
                       Branch branch = Branch::Plus);

/// Cell-center speeds lambda(x_i) (mollified if the model is).
Profile cell_speeds(const FluxModel& model, const Grid1D& grid);

/// Smallest alpha, to 1% granularity, with m_alpha^+ >= rho_profile cellwise.
double envelope_alpha(const FluxModel& model, const Grid1D& grid, const Profile& rho_profile);
double envelope_alpha_from_speeds(const Closure& closure, double m0, const Profile& speeds,
                                  const Profile& rho_profile);

/// x -> m_alpha^branch(x) for one flux level.
class SteadyStateFamily {
 public:
  SteadyStateFamily(const FluxModel& model, double alpha, Branch branch)
      : model_(&model), alpha_(alpha), branch_(branch) {}

  double alpha() const noexcept { return alpha_; }
  Branch branch() const noexcept { return branch_; }

  /// Empty where alpha is not attainable at x.
  std::optional<double> operator()(double x) const;
  bool valid(double x) const { return (*this)(x).has_value(); }

 private:
  const FluxModel* model_;
  double alpha_;
  Branch branch_;
};

/// Steady profiles keyed by (alpha, branch, grid); safe for concurrent readers.
class SteadyProfileCache {
 public:
  explicit SteadyProfileCache(const FluxModel& model) : model_(&model) {}
  const Profile& get(double alpha, const Grid1D& grid, Branch branch = Branch::Plus);

 private:
  const FluxModel* model_;
  std::mutex mutex_;
  std::map<std::tuple<double, int, std::string>, Profile> cache_;
  std::map<std::string, Profile> speeds_;
};

}  // namespace discoflux

#endif  // DISCOFLUX_STEADY_STATES_HPP
