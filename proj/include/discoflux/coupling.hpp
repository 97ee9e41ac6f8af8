#ifndef DISCOFLUX_COUPLING_HPP
#define DISCOFLUX_COUPLING_HPP

#include <cstdint>
#include <vector>

#include "discoflux/closure.hpp"
#include "discoflux/entropy_audit.hpp"
#include "discoflux/zrp.hpp"

namespace discoflux {

enum class Channel { Joint, EtaOnly, XiOnly };

struct CoupledStep {
  bool quiescent = false;
  double dt = 0.0;
  Channel channel = Channel::Joint;
  int source = -1;
  int target = -1;
};

/// Basic coupling of two zero range processes (eta, xi) on one lattice.
///
/// Site u fires jointly at lambda min(g(eta), g(xi)) and alone in the larger
/// marginal at lambda |g(eta) - g(xi)|; all channels share the displacement law.
class CoupledProcess {
 public:
  CoupledProcess(RateFunction rate, Eigen::VectorXd speeds, JumpKernel kernel, Configuration eta,
                 Configuration xi);

  const Configuration& eta() const noexcept { return eta_; }
  const Configuration& xi() const noexcept { return xi_; }
  double time() const noexcept { return eta_.sim_time; }
  std::int64_t events() const noexcept { return events_; }
  const Eigen::VectorXd& speeds() const noexcept { return speeds_; }
  double total_rate() const noexcept { return joint_.total() + eta_only_.total() + xi_only_.total(); }
  double channel_rate(Channel c) const noexcept;

  /// With `check_order`, every event asserts eta <= xi at the touched sites.
  void set_order_check(bool on) noexcept { check_order_ = on; }

  CoupledStep coupled_step(RandomStream& rng);
  /// Unrealized events beyond the target are dropped; the clock ends at t_target.
  void run_until(double t_target, RandomStream& rng, std::int64_t event_budget = -1);

 private:
  void refresh(int u);
  void shift(std::vector<std::int64_t>& eta, int from, int to);
  void apply(Channel c, int source, int target);

  RateFunction rate_;
  Eigen::VectorXd speeds_;
  JumpKernel kernel_;
  Configuration eta_;
  Configuration xi_;
  RateIndex joint_;
  RateIndex eta_only_;
  RateIndex xi_only_;
  std::int64_t events_ = 0;
  std::int64_t since_rebuild_ = 0;
  bool check_order_ = false;
};

CoupledStep coupled_step(CoupledProcess& process, RandomStream& rng);

/// N^{-1} sum_u |eta(u) - xi(u)|.
double discrepancy(const CoupledProcess& process);
double discrepancy(const Configuration& eta, const Configuration& xi);

/// Number of pairs (u, u+z), p(z) > 0, whose discrepancies have opposite signs.
std::int64_t uncoupled_pairs(const Configuration& eta, const Configuration& xi,
                             const JumpKernel& kernel);

struct TraceRow {
  double t;
  double discrepancy;
  double uncoupled_pairs;
};

/// Discrepancy and uncoupled-pair count at ascending checkpoint times.
std::vector<TraceRow> record_trace(CoupledProcess& process, const JumpKernel& kernel,
                                   const std::vector<double>& times, RandomStream& rng);

struct CoupledFrame {
  double t;
  std::vector<std::int64_t> eta;
  std::vector<std::int64_t> xi;
};

/// Frames at t = 0 and at the midpoints (k + 1/2) horizon / intervals.
struct CoupledTrajectory {
  CoupledFrame initial;
  std::vector<CoupledFrame> midpoints;
  double interval = 0.0;
};

CoupledTrajectory record_trajectory(CoupledProcess& process, double horizon, int intervals,
                                    RandomStream& rng);

struct CoupledRecord {
  CoupledTrajectory trajectory;
  std::vector<TraceRow> trace;
};

/// One pass producing both the midpoint trajectory and the checkpoint trace.
CoupledRecord record_coupled(CoupledProcess& process, const JumpKernel& kernel, double horizon,
                             int intervals, const std::vector<double>& checkpoints,
                             RandomStream& rng);

/// Microscopic adapted-entropy functional of the coupled pair:
///   sum_k dt N^{-1} sum_u [J_t |eta^l - xi^l| + J_x lambda(u/N) |h(eta^l) - h(xi^l)|]
///   + N^{-1} sum_u J(0, u/N) |eta_0^l - xi_0^l|.
double microscopic_entropy(const CoupledTrajectory& trajectory, const TestFunction& test, int l,
                           const Eigen::VectorXd& speeds, const Closure& closure);

struct OrderTrace {
  std::int64_t events_checked = 0;
  double final_time = 0.0;
  bool preserved = true;
};

/// Runs `events` coupled events asserting eta <= xi after each one; OrderingBrokenError on violation.
OrderTrace ordered_preservation(CoupledProcess& process, std::int64_t events, RandomStream& rng);

/// Keeps each particle independently with probability `keep`; the result lies below cfg.
Configuration thin(const Configuration& cfg, double keep, RandomStream& rng);

}  // namespace discoflux

#endif  // DISCOFLUX_COUPLING_HPP
