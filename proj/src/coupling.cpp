#include "discoflux/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "discoflux/errors.hpp"

namespace discoflux {

namespace {

inline int wrap_site(int u, int n) noexcept { return ((u % n) + n) % n; }

Eigen::VectorXd block_profile(const std::vector<std::int64_t>& eta, int l) {
  return block_averages(Configuration(eta), l);
}

}  // namespace

CoupledProcess::CoupledProcess(RateFunction rate, Eigen::VectorXd speeds, JumpKernel kernel,
                               Configuration eta, Configuration xi)
    : rate_(std::move(rate)), speeds_(std::move(speeds)), kernel_(std::move(kernel)),
      eta_(std::move(eta)), xi_(std::move(xi)) {
  const int n = eta_.n_sites();
  if (n <= 0 || xi_.n_sites() != n || speeds_.size() != n) {
    throw DomainError("coupled marginals and speeds must share the lattice size");
  }
  if (kernel_.range() >= n) throw DomainError("jump range must be smaller than the lattice");
  xi_.sim_time = eta_.sim_time;
  const auto sz = static_cast<std::size_t>(n);
  joint_.build(std::vector<double>(sz, 0.0));
  eta_only_.build(std::vector<double>(sz, 0.0));
  xi_only_.build(std::vector<double>(sz, 0.0));
  for (int u = 0; u < n; ++u) refresh(u);
}

double CoupledProcess::channel_rate(Channel c) const noexcept {
  switch (c) {
    case Channel::Joint:
      return joint_.total();
    case Channel::EtaOnly:
      return eta_only_.total();
    case Channel::XiOnly:
      break;
  }
  return xi_only_.total();
}

void CoupledProcess::refresh(int u) {
  const auto su = static_cast<std::size_t>(u);
  const double ge = rate_(eta_.eta[su]);
  const double gx = rate_(xi_.eta[su]);
  const double lam = speeds_[u];
  joint_.set(u, lam * std::min(ge, gx));
  eta_only_.set(u, lam * std::max(ge - gx, 0.0));
  xi_only_.set(u, lam * std::max(gx - ge, 0.0));
}

void CoupledProcess::shift(std::vector<std::int64_t>& eta, int from, int to) {
  --eta[static_cast<std::size_t>(from)];
  ++eta[static_cast<std::size_t>(to)];
}

void CoupledProcess::apply(Channel c, int source, int target) {
  if (c != Channel::XiOnly) shift(eta_.eta, source, target);
  if (c != Channel::EtaOnly) shift(xi_.eta, source, target);
  refresh(source);
  refresh(target);
  ++events_;
  if (check_order_) {
    for (int u : {source, target}) {
      const auto su = static_cast<std::size_t>(u);
      if (eta_.eta[su] > xi_.eta[su]) {
        throw OrderingBrokenError("eta exceeds xi at site " + std::to_string(u) + " after event " +
                                  std::to_string(events_));
      }
    }
  }
  if (++since_rebuild_ >= ZrpProcess::kRebuildInterval) {
    const int n = eta_.n_sites();
    const auto sz = static_cast<std::size_t>(n);
    joint_.build(std::vector<double>(sz, 0.0));
    eta_only_.build(std::vector<double>(sz, 0.0));
    xi_only_.build(std::vector<double>(sz, 0.0));
    for (int u = 0; u < n; ++u) refresh(u);
    since_rebuild_ = 0;
  }
}

CoupledStep CoupledProcess::coupled_step(RandomStream& rng) {
  CoupledStep s;
  const double wj = joint_.total();
  const double we = eta_only_.total();
  const double wx = xi_only_.total();
  const double w = wj + we + wx;
  if (!(w > 0.0)) {
    s.quiescent = true;
    return s;
  }
  const int n = eta_.n_sites();
  s.dt = rng.exponential(static_cast<double>(n) * w);
  double pick = rng.uniform() * w;
  if (pick < wj) {
    s.channel = Channel::Joint;
    s.source = joint_.find(pick);
  } else if ((pick -= wj) < we || wx <= 0.0) {
    s.channel = Channel::EtaOnly;
    s.source = eta_only_.find(std::min(pick, std::nextafter(we, 0.0)));
  } else {
    s.channel = Channel::XiOnly;
    s.source = xi_only_.find(std::min(pick - we, std::nextafter(wx, 0.0)));
  }
  s.target = wrap_site(s.source + kernel_.sample(rng), n);
  eta_.sim_time += s.dt;
  xi_.sim_time = eta_.sim_time;
  apply(s.channel, s.source, s.target);
  return s;
}

void CoupledProcess::run_until(double t_target, RandomStream& rng, std::int64_t event_budget) {
  if (t_target < time()) throw DomainError("target time precedes the current time");
  const int n = eta_.n_sites();
  std::int64_t done = 0;
  while (true) {
    const double wj = joint_.total();
    const double we = eta_only_.total();
    const double wx = xi_only_.total();
    const double w = wj + we + wx;
    if (!(w > 0.0)) break;
    const double dt = rng.exponential(static_cast<double>(n) * w);
    if (time() + dt > t_target) break;
    if (event_budget >= 0 && done >= event_budget) {
      throw EventBudgetError("event budget exhausted at t = " + std::to_string(time()), time(),
                             static_cast<long long>(events_));
    }
    double pick = rng.uniform() * w;
    Channel c;
    int source;
    if (pick < wj) {
      c = Channel::Joint;
      source = joint_.find(pick);
    } else if ((pick -= wj) < we || wx <= 0.0) {
      c = Channel::EtaOnly;
      source = eta_only_.find(std::min(pick, std::nextafter(we, 0.0)));
    } else {
      c = Channel::XiOnly;
      source = xi_only_.find(std::min(pick - we, std::nextafter(wx, 0.0)));
    }
    const int target = wrap_site(source + kernel_.sample(rng), n);
    eta_.sim_time += dt;
    xi_.sim_time = eta_.sim_time;
    apply(c, source, target);
    ++done;
  }
  eta_.sim_time = t_target;
  xi_.sim_time = t_target;
}

CoupledStep coupled_step(CoupledProcess& process, RandomStream& rng) {
  return process.coupled_step(rng);
}

double discrepancy(const Configuration& eta, const Configuration& xi) {
  if (eta.n_sites() != xi.n_sites()) throw DomainError("configurations differ in size");
  std::int64_t sum = 0;
  for (std::size_t u = 0; u < eta.eta.size(); ++u) sum += std::abs(eta.eta[u] - xi.eta[u]);
  return static_cast<double>(sum) / eta.n_sites();
}

double discrepancy(const CoupledProcess& process) { return discrepancy(process.eta(), process.xi()); }

std::int64_t uncoupled_pairs(const Configuration& eta, const Configuration& xi,
                             const JumpKernel& kernel) {
  const int n = eta.n_sites();
  std::int64_t count = 0;
  for (int u = 0; u < n; ++u) {
    const auto a = eta.eta[static_cast<std::size_t>(u)] - xi.eta[static_cast<std::size_t>(u)];
    if (a == 0) continue;
    for (std::size_t k = 0; k < kernel.displacements().size(); ++k) {
      if (kernel.probabilities()[k] <= 0.0) continue;
      const auto v = static_cast<std::size_t>(wrap_site(u + kernel.displacements()[k], n));
      const auto b = eta.eta[v] - xi.eta[v];
      if ((a > 0 && b < 0) || (a < 0 && b > 0)) ++count;
    }
  }
  return count;
}

std::vector<TraceRow> record_trace(CoupledProcess& process, const JumpKernel& kernel,
                                   const std::vector<double>& times, RandomStream& rng) {
  std::vector<TraceRow> rows;
  rows.reserve(times.size());
  for (double t : times) {
    process.run_until(t, rng);
    rows.push_back({t, discrepancy(process),
                    static_cast<double>(uncoupled_pairs(process.eta(), process.xi(), kernel))});
  }
  return rows;
}

CoupledTrajectory record_trajectory(CoupledProcess& process, double horizon, int intervals,
                                    RandomStream& rng) {
  if (intervals <= 0 || !(horizon > 0.0)) throw DomainError("trajectory needs a positive horizon");
  CoupledTrajectory tr;
  tr.interval = horizon / intervals;
  const double t0 = process.time();
  tr.initial = {0.0, process.eta().eta, process.xi().eta};
  for (int k = 0; k < intervals; ++k) {
    const double t = (k + 0.5) * tr.interval;
    process.run_until(t0 + t, rng);
    tr.midpoints.push_back({t, process.eta().eta, process.xi().eta});
  }
  process.run_until(t0 + horizon, rng);
  return tr;
}

CoupledRecord record_coupled(CoupledProcess& process, const JumpKernel& kernel, double horizon,
                             int intervals, const std::vector<double>& checkpoints,
                             RandomStream& rng) {
  if (intervals <= 0 || !(horizon > 0.0)) throw DomainError("trajectory needs a positive horizon");
  CoupledRecord rec;
  auto& tr = rec.trajectory;
  tr.interval = horizon / intervals;
  const double t0 = process.time();
  tr.initial = {0.0, process.eta().eta, process.xi().eta};
  std::size_t c = 0;
  const double slack = 1e-12 * horizon;
  auto flush_checkpoints = [&](double upto) {
    for (; c < checkpoints.size() && checkpoints[c] <= upto + slack; ++c) {
      process.run_until(t0 + std::min(checkpoints[c], horizon), rng);
      rec.trace.push_back({checkpoints[c], discrepancy(process),
                           static_cast<double>(uncoupled_pairs(process.eta(), process.xi(), kernel))});
    }
  };
  for (int k = 0; k < intervals; ++k) {
    const double t = (k + 0.5) * tr.interval;
    flush_checkpoints(t);
    process.run_until(t0 + t, rng);
    tr.midpoints.push_back({t, process.eta().eta, process.xi().eta});
  }
  flush_checkpoints(horizon);
  if (c != checkpoints.size()) throw DomainError("checkpoints beyond the horizon");
  process.run_until(t0 + horizon, rng);
  return rec;
}

double microscopic_entropy(const CoupledTrajectory& trajectory, const TestFunction& test, int l,
                           const Eigen::VectorXd& speeds, const Closure& closure) {
  const int n = static_cast<int>(trajectory.initial.eta.size());
  if (speeds.size() != n) throw DomainError("speeds must match the lattice size");
  double total = 0.0;
  for (const auto& f : trajectory.midpoints) {
    const Eigen::VectorXd a = block_profile(f.eta, l);
    const Eigen::VectorXd b = block_profile(f.xi, l);
    double acc = 0.0;
    for (int u = 0; u < n; ++u) {
      const double x = static_cast<double>(u) / n;
      const double jt = test.dt(f.t, x);
      const double jx = test.dx(f.t, x);
      if (jt == 0.0 && jx == 0.0) continue;
      acc += jt * std::abs(a[u] - b[u]) + jx * speeds[u] * std::abs(closure(a[u]) - closure(b[u]));
    }
    total += trajectory.interval * acc / n;
  }
  const Eigen::VectorXd a0 = block_profile(trajectory.initial.eta, l);
  const Eigen::VectorXd b0 = block_profile(trajectory.initial.xi, l);
  double initial = 0.0;
  for (int u = 0; u < n; ++u) initial += test(0.0, static_cast<double>(u) / n) * std::abs(a0[u] - b0[u]);
  return total + initial / n;
}

OrderTrace ordered_preservation(CoupledProcess& process, std::int64_t events, RandomStream& rng) {
  for (std::size_t u = 0; u < process.eta().eta.size(); ++u) {
    if (process.eta().eta[u] > process.xi().eta[u]) {
      throw OrderingBrokenError("initial pair is not ordered at site " + std::to_string(u));
    }
  }
  process.set_order_check(true);
  OrderTrace trace;
  for (std::int64_t k = 0; k < events; ++k) {
    if (process.coupled_step(rng).quiescent) break;
    ++trace.events_checked;
  }
  process.set_order_check(false);
  trace.final_time = process.time();
  return trace;
}

Configuration thin(const Configuration& cfg, double keep, RandomStream& rng) {
  if (!(keep >= 0.0 && keep <= 1.0)) throw DomainError("keep probability must lie in [0, 1]");
  std::vector<std::int64_t> out(cfg.eta.size(), 0);
  for (std::size_t u = 0; u < cfg.eta.size(); ++u) {
    for (std::int64_t k = 0; k < cfg.eta[u]; ++k) out[u] += rng.uniform() < keep ? 1 : 0;
  }
  return Configuration(std::move(out), cfg.sim_time);
}

}  // namespace discoflux
