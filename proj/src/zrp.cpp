#include "discoflux/zrp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "discoflux/errors.hpp"

namespace discoflux {

// JumpKernel -----------------------------------------------------------------

JumpKernel::JumpKernel(std::vector<int> displacements, std::vector<double> probabilities)
    : z_(std::move(displacements)), p_(std::move(probabilities)) {
  if (z_.empty() || z_.size() != p_.size()) throw DomainError("jump kernel needs matching z and p");
  double mass = 0.0;
  double drift = 0.0;
  bool has_unit = false;
  for (std::size_t i = 0; i < z_.size(); ++i) {
    if (z_[i] == 0) throw DomainError("jump kernel must have p(0) = 0");
    if (!(p_[i] >= 0.0)) throw DomainError("jump probabilities must be nonnegative");
    mass += p_[i];
    drift += z_[i] * p_[i];
    range_ = std::max(range_, std::abs(z_[i]));
    if (z_[i] == 1 && p_[i] > 0.0) has_unit = true;
    cumulative_.push_back(mass);
  }
  if (std::abs(mass - 1.0) > 1e-12) throw DomainError("jump probabilities must sum to 1");
  if (std::abs(drift - 1.0) > 1e-12) throw DomainError("jump kernel mean drift must be 1");
  if (!has_unit) throw DomainError("jump kernel needs p(1) > 0");
}

int JumpKernel::sample(RandomStream& rng) const {
  if (z_.size() == 1) return z_[0];
  const double u = rng.uniform() * cumulative_.back();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  return z_[static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - cumulative_.begin(),
                                                              static_cast<std::ptrdiff_t>(z_.size()) - 1))];
}

// Configuration --------------------------------------------------------------

Configuration::Configuration(std::vector<std::int64_t> occupancies, double time)
    : eta(std::move(occupancies)), sim_time(time) {
  for (auto v : eta) {
    if (v < 0) throw DomainError("occupancies must be nonnegative");
    total_particles += v;
  }
}

bool Configuration::verify_total() const {
  return std::accumulate(eta.begin(), eta.end(), std::int64_t{0}) == total_particles;
}

// RateIndex ------------------------------------------------------------------

void RateIndex::build(const std::vector<double>& weights) {
  w_ = weights;
  const std::size_t n = w_.size();
  tree_.assign(n + 1, 0.0);
  for (std::size_t i = 1; i <= n; ++i) {
    tree_[i] += w_[i - 1];
    const std::size_t parent = i + (i & (~i + 1));
    if (parent <= n) tree_[parent] += tree_[i];
  }
  total_ = recomputed_total();
  top_bit_ = 1;
  while (static_cast<std::size_t>(top_bit_) * 2 <= n) top_bit_ *= 2;
}

void RateIndex::set(int i, double w) {
  const double delta = w - w_[static_cast<std::size_t>(i)];
  if (delta == 0.0) return;
  w_[static_cast<std::size_t>(i)] = w;
  total_ += delta;
  const std::size_t n = w_.size();
  for (std::size_t k = static_cast<std::size_t>(i) + 1; k <= n; k += k & (~k + 1)) tree_[k] += delta;
}

double RateIndex::recomputed_total() const { return std::accumulate(w_.begin(), w_.end(), 0.0); }

int RateIndex::find(double target) const noexcept {
  const int n = size();
  int pos = 0;
  for (int bit = top_bit_; bit > 0; bit >>= 1) {
    const int next = pos + bit;
    if (next <= n && tree_[static_cast<std::size_t>(next)] <= target) {
      pos = next;
      target -= tree_[static_cast<std::size_t>(next)];
    }
  }
  if (pos < n && w_[static_cast<std::size_t>(pos)] > 0.0) return pos;
  // Rounding pushed the target past the last positive weight.
  for (int i = std::min(pos, n - 1); i >= 0; --i) {
    if (w_[static_cast<std::size_t>(i)] > 0.0) return i;
  }
  return 0;
}

// Speeds ---------------------------------------------------------------------

Eigen::VectorXd site_speeds(const FluxModel& model, int n_sites, double sigma) {
  if (n_sites <= 0) throw DomainError("lattice needs a positive site count");
  Eigen::VectorXd out(n_sites);
  if (sigma <= 0.0) {
    for (int u = 0; u < n_sites; ++u) out[u] = model.speed()(static_cast<double>(u) / n_sites);
    return out;
  }
  const FluxModel smooth = FluxModel(model.speed(), model.closure(), model.id())
                               .mollified(std::pow(static_cast<double>(n_sites), -sigma));
  for (int u = 0; u < n_sites; ++u) out[u] = smooth.speed_at(static_cast<double>(u) / n_sites);
  return out;
}

// ZrpProcess -----------------------------------------------------------------

ZrpProcess::ZrpProcess(RateFunction rate, Eigen::VectorXd speeds, JumpKernel kernel,
                       Configuration cfg)
    : rate_(std::move(rate)), speeds_(std::move(speeds)), kernel_(std::move(kernel)),
      cfg_(std::move(cfg)) {
  const int n = cfg_.n_sites();
  if (n <= 0 || speeds_.size() != n) throw DomainError("speeds must match the lattice size");
  if (kernel_.range() >= n) throw DomainError("jump range must be smaller than the lattice");
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int u = 0; u < n; ++u) w[static_cast<std::size_t>(u)] = site_rate(u);
  index_.build(w);
}

double ZrpProcess::fresh_total_rate() const {
  double total = 0.0;
  for (int u = 0; u < cfg_.n_sites(); ++u) total += site_rate(u);
  return total;
}

void ZrpProcess::touch(int u) {
  if (!tracking_) return;
  const auto su = static_cast<std::size_t>(u);
  occupation_[su] += static_cast<double>(cfg_.eta[su]) * (cfg_.sim_time - last_change_[su]);
  last_change_[su] = cfg_.sim_time;
}

void ZrpProcess::move(int from, int to) {
  touch(from);
  touch(to);
  --cfg_.eta[static_cast<std::size_t>(from)];
  ++cfg_.eta[static_cast<std::size_t>(to)];
  index_.set(from, site_rate(from));
  index_.set(to, site_rate(to));
  ++events_;
  if (++since_rebuild_ >= kRebuildInterval) {
    std::vector<double> w(static_cast<std::size_t>(cfg_.n_sites()));
    for (int u = 0; u < cfg_.n_sites(); ++u) w[static_cast<std::size_t>(u)] = site_rate(u);
    index_.build(w);
    since_rebuild_ = 0;
  }
}

StepResult ZrpProcess::gillespie_step(RandomStream& rng) {
  StepResult r;
  const double w = index_.total();
  if (!(w > 0.0)) {
    r.quiescent = true;
    return r;
  }
  const int n = cfg_.n_sites();
  r.dt = rng.exponential(static_cast<double>(n) * w);
  r.source = index_.find(rng.uniform() * w);
  r.target = ((r.source + kernel_.sample(rng)) % n + n) % n;
  cfg_.sim_time += r.dt;
  move(r.source, r.target);
  return r;
}

void ZrpProcess::run_until(double t_target, RandomStream& rng, std::int64_t event_budget) {
  if (t_target < cfg_.sim_time) throw DomainError("target time precedes the current time");
  const int n = cfg_.n_sites();
  std::int64_t done = 0;
  while (true) {
    const double w = index_.total();
    if (!(w > 0.0)) break;
    const double dt = rng.exponential(static_cast<double>(n) * w);
    // Memorylessness: an event beyond the target is simply not realized.
    if (cfg_.sim_time + dt > t_target) break;
    if (event_budget >= 0 && done >= event_budget) {
      throw EventBudgetError("event budget exhausted at t = " + std::to_string(cfg_.sim_time),
                             cfg_.sim_time, static_cast<long long>(events_));
    }
    const int source = index_.find(rng.uniform() * w);
    const int target = ((source + kernel_.sample(rng)) % n + n) % n;
    cfg_.sim_time += dt;
    move(source, target);
    ++done;
  }
  cfg_.sim_time = t_target;
}

void ZrpProcess::track_occupation_time() {
  tracking_ = true;
  occupation_.assign(cfg_.eta.size(), 0.0);
  last_change_.assign(cfg_.eta.size(), cfg_.sim_time);
}

double ZrpProcess::occupation_time(int u) const {
  if (!tracking_) throw DomainError("occupation time is not tracked");
  const auto su = static_cast<std::size_t>(u);
  return occupation_[su] + static_cast<double>(cfg_.eta[su]) * (cfg_.sim_time - last_change_[su]);
}

void ZrpProcess::advance_clock(double t) {
  if (t < cfg_.sim_time) throw DomainError("clock cannot move backwards");
  cfg_.sim_time = t;
}

StepResult gillespie_step(ZrpProcess& process, RandomStream& rng) {
  return process.gillespie_step(rng);
}

void run_until(ZrpProcess& process, double t_target, RandomStream& rng, std::int64_t event_budget) {
  process.run_until(t_target, rng, event_budget);
}

// Sampling -------------------------------------------------------------------

std::int64_t sample_site(const EquilibriumTables& tables, double phi, RandomStream& rng) {
  return tables.sample(phi, rng);
}

Configuration sample_from_fugacities(const EquilibriumTables& tables,
                                     const std::vector<double>& fugacity, RandomStream& rng) {
  std::vector<std::int64_t> eta(fugacity.size());
  for (std::size_t u = 0; u < fugacity.size(); ++u) eta[u] = tables.sample(fugacity[u], rng);
  return Configuration(std::move(eta));
}

Configuration sample_product_measure(const EquilibriumTables& tables,
                                     const std::function<double(double)>& rho, int n_sites,
                                     RandomStream& rng) {
  std::vector<double> phi(static_cast<std::size_t>(n_sites));
  for (int u = 0; u < n_sites; ++u) {
    const double r = rho(static_cast<double>(u) / n_sites);
    if (!(r >= 0.0) || r > tables.max_density()) {
      throw RangeError("density " + std::to_string(r) + " at site " + std::to_string(u) +
                       " is outside the range of R");
    }
    phi[static_cast<std::size_t>(u)] = tables.fugacity(r);
  }
  return sample_from_fugacities(tables, phi, rng);
}

Configuration sample_invariant_measure(const EquilibriumTables& tables,
                                       const Eigen::VectorXd& speeds, double alpha,
                                       RandomStream& rng) {
  std::vector<double> phi(static_cast<std::size_t>(speeds.size()));
  for (Eigen::Index u = 0; u < speeds.size(); ++u) {
    const double f = alpha / speeds[u];
    if (!(f >= 0.0) || f > tables.fugacity_cap()) {
      throw RangeError("flux level not attainable at site " + std::to_string(u));
    }
    phi[static_cast<std::size_t>(u)] = f;
  }
  return sample_from_fugacities(tables, phi, rng);
}

// Observables ----------------------------------------------------------------

double block_average(const Configuration& cfg, int u, int l) {
  const int n = cfg.n_sites();
  if (l < 0 || 2 * l >= n) throw DomainError("block radius must satisfy 0 <= l < N/2");
  std::int64_t sum = 0;
  for (int k = -l; k <= l; ++k) sum += cfg.eta[static_cast<std::size_t>(((u + k) % n + n) % n)];
  return static_cast<double>(sum) / (2 * l + 1);
}

Eigen::VectorXd block_averages(const Configuration& cfg, int l) {
  const int n = cfg.n_sites();
  if (l < 0 || 2 * l >= n) throw DomainError("block radius must satisfy 0 <= l < N/2");
  Eigen::VectorXd out(n);
  std::int64_t window = 0;
  for (int k = -l; k <= l; ++k) window += cfg.eta[static_cast<std::size_t>((k + n) % n)];
  for (int u = 0; u < n; ++u) {
    out[u] = static_cast<double>(window) / (2 * l + 1);
    window += cfg.eta[static_cast<std::size_t>((u + l + 1) % n)];
    window -= cfg.eta[static_cast<std::size_t>((u - l + n) % n)];
  }
  return out;
}

double empirical_pairing(const Configuration& cfg, const std::function<double(double)>& J) {
  const int n = cfg.n_sites();
  double sum = 0.0;
  for (int u = 0; u < n; ++u) {
    if (cfg.eta[static_cast<std::size_t>(u)] != 0) {
      sum += J(static_cast<double>(u) / n) * static_cast<double>(cfg.eta[static_cast<std::size_t>(u)]);
    }
  }
  return sum / n;
}

Eigen::VectorXd bin_means(const Eigen::VectorXd& values, int bins) {
  const auto n = values.size();
  if (bins <= 0 || bins > n) throw DomainError("bin count must lie in [1, N]");
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(bins);
  Eigen::VectorXd count = Eigen::VectorXd::Zero(bins);
  for (Eigen::Index u = 0; u < n; ++u) {
    const auto b = static_cast<Eigen::Index>(u * bins / n);
    sum[b] += values[u];
    count[b] += 1.0;
  }
  return sum.cwiseQuotient(count);
}

}  // namespace discoflux
