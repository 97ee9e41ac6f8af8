#ifndef DISCOFLUX_ZRP_HPP
#define DISCOFLUX_ZRP_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "discoflux/equilibrium.hpp"
#include "discoflux/flux_model.hpp"
#include "discoflux/grid.hpp"
#include "discoflux/rng.hpp"

namespace discoflux {

/// Finite-range jump law p(z) with mean drift 1.
class JumpKernel {
 public:
  JumpKernel(std::vector<int> displacements, std::vector<double> probabilities);

  /// Totally asymmetric nearest neighbour, p(1) = 1.
  static JumpKernel nearest_neighbor() { return JumpKernel({1}, {1.0}); }

  int sample(RandomStream& rng) const;
  int range() const noexcept { return range_; }
  const std::vector<int>& displacements() const noexcept { return z_; }
  const std::vector<double>& probabilities() const noexcept { return p_; }

 private:
  std::vector<int> z_;
  std::vector<double> p_;
  std::vector<double> cumulative_;
  int range_ = 0;
};

/// Occupancies on the periodic lattice {0, ..., N-1}; site u sits at x = u/N.
struct Configuration {
  std::vector<std::int64_t> eta;
  std::int64_t total_particles = 0;
  double sim_time = 0.0;

  Configuration() = default;
  explicit Configuration(std::vector<std::int64_t> occupancies, double time = 0.0);

  int n_sites() const noexcept { return static_cast<int>(eta.size()); }
  /// Recounts the particles; true when the running total agrees.
  bool verify_total() const;
};

/// Binary-indexed cumulative sums of nonnegative site weights.
class RateIndex {
 public:
  RateIndex() = default;
  explicit RateIndex(const std::vector<double>& weights) { build(weights); }

  void build(const std::vector<double>& weights);
  void set(int i, double w);
  double weight(int i) const noexcept { return w_[static_cast<std::size_t>(i)]; }
  double total() const noexcept { return total_; }
  /// Sum recomputed from the stored weights.
  double recomputed_total() const;
  /// Smallest i whose prefix sum exceeds target (target in [0, total)).
  int find(double target) const noexcept;
  int size() const noexcept { return static_cast<int>(w_.size()); }

 private:
  std::vector<double> w_;
  std::vector<double> tree_;
  double total_ = 0.0;
  int top_bit_ = 0;
};

/// lambda_eps(u/N) for u = 0..N-1, eps = N^{-sigma}; sigma <= 0 keeps the raw speed.
Eigen::VectorXd site_speeds(const FluxModel& model, int n_sites, double sigma = 0.5);

struct StepResult {
  bool quiescent = false;
  double dt = 0.0;
  int source = -1;
  int target = -1;
};

/// Exact Gillespie simulation of the zero range process with rates N lambda(u/N) g(eta(u)).
class ZrpProcess {
 public:
  static constexpr std::int64_t kRebuildInterval = 1000000;

  ZrpProcess(RateFunction rate, Eigen::VectorXd speeds, JumpKernel kernel, Configuration cfg);

  const Configuration& configuration() const noexcept { return cfg_; }
  double time() const noexcept { return cfg_.sim_time; }
  std::int64_t events() const noexcept { return events_; }
  double total_rate() const noexcept { return index_.total(); }
  /// Total rate recomputed from the current occupancies.
  double fresh_total_rate() const;
  const Eigen::VectorXd& speeds() const noexcept { return speeds_; }

  /// One event; quiescent when no site can fire.
  StepResult gillespie_step(RandomStream& rng);
  /// Steps until sim_time >= t_target (the last event may overshoot; quiescent
  /// runs jump to t_target). Throws EventBudgetError beyond `event_budget` events.
  void run_until(double t_target, RandomStream& rng, std::int64_t event_budget = -1);

  /// Starts integrating eta(u) over time from the current instant.
  void track_occupation_time();
  /// Integral of eta(u) from the tracking start to the current time.
  double occupation_time(int u) const;
  /// Sets the clock to t (>= current time) without events; the next waiting time restarts.
  void advance_clock(double t);

 private:
  double site_rate(int u) const noexcept {
    return speeds_[u] * rate_(cfg_.eta[static_cast<std::size_t>(u)]);
  }
  void touch(int u);
  void move(int from, int to);

  RateFunction rate_;
  Eigen::VectorXd speeds_;
  JumpKernel kernel_;
  Configuration cfg_;
  RateIndex index_;
  std::int64_t events_ = 0;
  std::int64_t since_rebuild_ = 0;
  bool tracking_ = false;
  std::vector<double> occupation_;
  std::vector<double> last_change_;
};

StepResult gillespie_step(ZrpProcess& process, RandomStream& rng);
void run_until(ZrpProcess& process, double t_target, RandomStream& rng,
               std::int64_t event_budget = -1);

/// Draw from phi^n / (Z(phi) g(n)!).
std::int64_t sample_site(const EquilibriumTables& tables, double phi, RandomStream& rng);

/// Independent sites with fugacities phi[u].
Configuration sample_from_fugacities(const EquilibriumTables& tables,
                                     const std::vector<double>& fugacity, RandomStream& rng);

/// Independent sites with fugacity h(rho(u/N)); RangeError names the offending site.
Configuration sample_product_measure(const EquilibriumTables& tables,
                                     const std::function<double(double)>& rho, int n_sites,
                                     RandomStream& rng);

/// Invariant product measure at flux level alpha: fugacity alpha / lambda(u/N).
Configuration sample_invariant_measure(const EquilibriumTables& tables,
                                       const Eigen::VectorXd& speeds, double alpha,
                                       RandomStream& rng);

/// (2l+1)^{-1} sum_{|v-u|<=l} eta(v), periodic.
double block_average(const Configuration& cfg, int u, int l);
/// Block averages at every site (sliding window).
Eigen::VectorXd block_averages(const Configuration& cfg, int l);
/// N^{-1} sum_u J(u/N) eta(u).
double empirical_pairing(const Configuration& cfg, const std::function<double(double)>& J);

/// Means of `values` (indexed by site) over `bins` equal macro-cells.
Eigen::VectorXd bin_means(const Eigen::VectorXd& values, int bins);

}  // namespace discoflux

#endif  // DISCOFLUX_ZRP_HPP
