#include "discoflux/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>

#include "discoflux/closure.hpp"
#include "discoflux/csv.hpp"
#include "discoflux/errors.hpp"
#include "discoflux/riemann.hpp"
#include "discoflux/steady_states.hpp"
#include "discoflux/zrp.hpp"

namespace discoflux {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double mean_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return xs.empty() ? kNaN : s / static_cast<double>(xs.size());
}

double std_of(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double mu = mean_of(xs);
  double s = 0.0;
  for (double x : xs) s += (x - mu) * (x - mu);
  return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

Eigen::VectorXd cells_to_bins(const Profile& cells, int bins) {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(bins);
  Eigen::VectorXd count = Eigen::VectorXd::Zero(bins);
  const Grid1D g(static_cast<int>(cells.size()));
  for (int i = 0; i < g.n_cells(); ++i) {
    const int b = std::min(bins - 1, static_cast<int>(std::floor(g.center(i) * bins)));
    sum[b] += cells[i];
    count[b] += 1.0;
  }
  return sum.cwiseQuotient(count);
}

bool riemann_eligible(const ExperimentConfig& cfg, const FluxModel& model) {
  return cfg.initial == "pieces" && model.speed().is_piecewise_constant() &&
         model.closure().concave_or_linear();
}

/// Time-t reference bin averages independent of N (exact fans or a fine-grid solve).
struct MacroReference {
  std::string kind;
  Eigen::VectorXd bins;
};

MacroReference macro_reference(const ExperimentConfig& cfg, const FluxModel& model) {
  if (riemann_eligible(cfg, model)) {
    try {
      TorusRiemannReference ref(model.speed(), model.closure(), cfg.rho_pieces);
      if (ref.valid_until() >= cfg.horizon) {
        return {"riemann_exact", ref.bin_averages(cfg.horizon, cfg.bins)};
      }
    } catch (const UnsupportedRegimeError&) {
      // fall through to the fine-grid solve
    }
  }
  const Grid1D grid(cfg.ref_cells);
  const FluxModel fine = model.mollified(8.0 * grid.dx());
  const FvSolver solver(fine, grid);
  const GridSolution sol = solver.solve(initial_cells(cfg, fine, grid), cfg.horizon);
  return {"fine_grid_" + std::to_string(cfg.ref_cells), cells_to_bins(sol.values, cfg.bins)};
}

/// Site expectations of the initial product measure (or of the invariant measure).
Eigen::VectorXd site_expectation(const ExperimentConfig& cfg, const FluxModel& model,
                                 const Eigen::VectorXd& speeds) {
  const int n = static_cast<int>(speeds.size());
  Eigen::VectorXd m(n);
  if (cfg.initial == "steady") {
    for (int u = 0; u < n; ++u) m[u] = model.closure().inverse(cfg.alpha / speeds[u]);
    return m;
  }
  const auto rho = initial_density(cfg, model);
  for (int u = 0; u < n; ++u) m[u] = rho(static_cast<double>(u) / n);
  return m;
}

Configuration sample_initial(const ExperimentConfig& cfg, const FluxModel& model,
                             const EquilibriumTables& tables, const Eigen::VectorXd& speeds,
                             RandomStream& rng) {
  if (cfg.initial == "steady") return sample_invariant_measure(tables, speeds, cfg.alpha, rng);
  return sample_product_measure(tables, initial_density(cfg, model), static_cast<int>(speeds.size()),
                                rng);
}

double l1_bins(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).cwiseAbs().mean();
}

double elapsed_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

FluxModel build_model(const ExperimentConfig& cfg) {
  SpeedField speed = cfg.lambda_values.size() == 1 && cfg.lambda_breaks.size() == 1
                         ? SpeedField::constant(cfg.lambda_values[0])
                         : SpeedField::piecewise_constant(cfg.lambda_breaks, cfg.lambda_values);
  if (cfg.closure == "convex") {
    return FluxModel(std::move(speed), Closure::quadratic(cfg.rho_m, +1, cfg.rho_max), "convex");
  }
  if (cfg.closure == "concave") {
    return FluxModel(std::move(speed), Closure::quadratic(cfg.rho_m, -1, cfg.rho_max), "concave");
  }
  const RateFunction rate = RateFunction::parse(cfg.rate);
  return FluxModel(std::move(speed), closure_from_rate(rate, cfg.rho_max), "zrp_" + rate.tag());
}

std::shared_ptr<const EquilibriumTables> build_tables(const ExperimentConfig& cfg) {
  if (cfg.closure != "rate") throw ConfigError("particle runs need closure = rate");
  return std::make_shared<const EquilibriumTables>(RateFunction::parse(cfg.rate));
}

std::function<double(double)> initial_density(const ExperimentConfig& cfg, const FluxModel& model) {
  if (cfg.initial == "constant") {
    const double c = cfg.rho_const;
    return [c](double) { return c; };
  }
  if (cfg.initial == "pieces") {
    const SpeedField speed = model.speed();
    const std::vector<double> rho = cfg.rho_pieces;
    if (rho.size() != speed.size()) throw ConfigError("rho_pieces needs one density per speed piece");
    return [speed, rho](double x) { return rho[speed.piece_index(wrap_unit(x))]; };
  }
  if (cfg.initial == "table") {
    const std::vector<double> table = cfg.rho_table;
    return [table](double x) {
      const auto n = table.size();
      return table[std::min(n - 1, static_cast<std::size_t>(wrap_unit(x) * static_cast<double>(n)))];
    };
  }
  if (cfg.initial == "steady") {
    const double alpha = cfg.alpha;
    auto shared = std::make_shared<FluxModel>(model);
    return [shared, alpha](double x) { return solve_steady(*shared, alpha, wrap_unit(x)); };
  }
  throw ConfigError("unknown initial data '" + cfg.initial + "'");
}

Profile initial_cells(const ExperimentConfig& cfg, const FluxModel& model, const Grid1D& grid) {
  if (cfg.initial == "steady") return steady_profile(model, cfg.alpha, grid);
  return sample_profile(grid, initial_density(cfg, model));
}

int block_radius_for(const ExperimentConfig& cfg, int n_sites) {
  if (cfg.l_schedule == "quarter") {
    return static_cast<int>(std::floor(std::pow(static_cast<double>(n_sites), 0.25) + 1e-12));
  }
  return cfg.block_radius;
}

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  if (count <= 0) return;
  const int workers = std::max(1, std::min(threads, count));
  std::atomic<int> next{0};
  std::exception_ptr first;
  std::mutex guard;
  auto work = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(guard);
        if (!first) first = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (first) std::rethrow_exception(first);
}

double HydroRow::l1_se() const {
  return replicas > 0 ? l1_std / std::sqrt(static_cast<double>(replicas)) : kNaN;
}

double HydroRow::pooled_variance() const { return mean_of(bin_variance); }

// Hydrodynamic ladder -------------------------------------------------------

ConvergenceReport run_hydro(const ExperimentConfig& cfg) {
  validate(cfg);
  const FluxModel model = build_model(cfg);
  const auto tables = build_tables(cfg);
  const RateFunction rate = RateFunction::parse(cfg.rate);

  ConvergenceReport report;
  MacroReference macro;
  if (cfg.initial == "steady") {
    report.reference = "steady_sites";
  } else {
    macro = macro_reference(cfg, model);
    report.reference = macro.kind;
  }

  const int ladder = static_cast<int>(cfg.n_ladder.size());
  const int m = cfg.replicas;
  report.rows.resize(static_cast<std::size_t>(ladder));

  struct ReplicaOut {
    Eigen::VectorXd bins;
    std::int64_t events = 0;
    std::string error;
  };
  std::vector<std::vector<ReplicaOut>> outs(static_cast<std::size_t>(ladder),
                                            std::vector<ReplicaOut>(static_cast<std::size_t>(m)));
  std::vector<Eigen::VectorXd> speeds(static_cast<std::size_t>(ladder));
  std::vector<std::string> setup_error(static_cast<std::size_t>(ladder));
  std::vector<double> wall(static_cast<std::size_t>(ladder), 0.0);

  for (int k = 0; k < ladder; ++k) {
    const int n = cfg.n_ladder[static_cast<std::size_t>(k)];
    HydroRow& row = report.rows[static_cast<std::size_t>(k)];
    row.run_id = cfg.initial + "_N" + std::to_string(n);
    row.n_sites = n;
    row.epsilon = cfg.sigma > 0.0 ? std::pow(static_cast<double>(n), -cfg.sigma) : 0.0;
    row.l = block_radius_for(cfg, n);
    row.replicas = m;
    row.t = cfg.horizon;
    try {
      if (cfg.bins > n) throw ConfigError("more bins than sites");
      speeds[static_cast<std::size_t>(k)] = site_speeds(model, n, cfg.sigma);
      if (cfg.initial == "steady") {
        row.reference_bins.clear();
        const Eigen::VectorXd ref =
            bin_means(site_expectation(cfg, model, speeds[static_cast<std::size_t>(k)]), cfg.bins);
        row.reference_bins.assign(ref.data(), ref.data() + ref.size());
      } else {
        row.reference_bins.assign(macro.bins.data(), macro.bins.data() + macro.bins.size());
      }
    } catch (const std::exception& e) {
      setup_error[static_cast<std::size_t>(k)] = e.what();
    }
  }

  // One ladder point at a time keeps wall_seconds meaningful per row.
  for (int k = 0; k < ladder; ++k) {
    if (!setup_error[static_cast<std::size_t>(k)].empty()) continue;
    const HydroRow& row = report.rows[static_cast<std::size_t>(k)];
    const Eigen::VectorXd& sp = speeds[static_cast<std::size_t>(k)];
    const auto start = std::chrono::steady_clock::now();
    parallel_for(m, cfg.threads, [&](int r) {
      ReplicaOut& out = outs[static_cast<std::size_t>(k)][static_cast<std::size_t>(r)];
      try {
        RandomStream rng(cfg.seed, replica_stream(static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(r)));
        ZrpProcess proc(rate, sp, JumpKernel::nearest_neighbor(),
                        sample_initial(cfg, model, *tables, sp, rng));
        proc.run_until(cfg.horizon, rng, cfg.event_budget);
        out.events = proc.events();
        out.bins = bin_means(block_averages(proc.configuration(), row.l), cfg.bins);
      } catch (const std::exception& e) {
        out.error = e.what();
      }
    });
    wall[static_cast<std::size_t>(k)] = elapsed_since(start);
  }

  for (int k = 0; k < ladder; ++k) {
    HydroRow& row = report.rows[static_cast<std::size_t>(k)];
    row.wall_seconds = wall[static_cast<std::size_t>(k)];
    if (!setup_error[static_cast<std::size_t>(k)].empty()) {
      row.error = setup_error[static_cast<std::size_t>(k)];
      row.l1_mean = row.l1_std = kNaN;
      continue;
    }
    const Eigen::Map<const Eigen::VectorXd> ref(row.reference_bins.data(),
                                                static_cast<Eigen::Index>(row.reference_bins.size()));
    std::vector<Eigen::VectorXd> good;
    for (const auto& out : outs[static_cast<std::size_t>(k)]) {
      if (!out.error.empty()) {
        if (row.error.empty()) row.error = out.error;
        continue;
      }
      row.events_total += out.events;
      row.l1_samples.push_back(l1_bins(out.bins, ref));
      good.push_back(out.bins);
    }
    row.l1_mean = mean_of(row.l1_samples);
    row.l1_std = std_of(row.l1_samples);
    row.bin_mean.assign(static_cast<std::size_t>(cfg.bins), kNaN);
    row.bin_variance.assign(static_cast<std::size_t>(cfg.bins), kNaN);
    if (good.size() >= 2) {
      for (int b = 0; b < cfg.bins; ++b) {
        std::vector<double> v;
        for (const auto& g : good) v.push_back(g[b]);
        row.bin_mean[static_cast<std::size_t>(b)] = mean_of(v);
        const double s = std_of(v);
        row.bin_variance[static_cast<std::size_t>(b)] = s * s;
      }
    }
  }
  return report;
}

double equilibrium_fluctuation(const ExperimentConfig& cfg, int n_sites) {
  validate(cfg);
  const FluxModel model = build_model(cfg);
  const auto tables = build_tables(cfg);
  const Eigen::VectorXd sp = site_speeds(model, n_sites, cfg.sigma);
  const Eigen::VectorXd ref = bin_means(site_expectation(cfg, model, sp), cfg.bins);
  const int l = block_radius_for(cfg, n_sites);
  std::vector<double> l1(static_cast<std::size_t>(cfg.replicas));
  // Stream ids above the ladder's keep these draws independent of run_hydro.
  const std::uint64_t base = std::uint64_t{1} << 20;
  parallel_for(cfg.replicas, cfg.threads, [&](int r) {
    RandomStream rng(cfg.seed, replica_stream(base + static_cast<std::uint64_t>(n_sites),
                                              static_cast<std::uint64_t>(r)));
    const Configuration c = sample_initial(cfg, model, *tables, sp, rng);
    l1[static_cast<std::size_t>(r)] = l1_bins(bin_means(block_averages(c, l), cfg.bins), ref);
  });
  return mean_of(l1);
}

// Epsilon study --------------------------------------------------------------

EpsilonReport run_epsilon_study(const ExperimentConfig& cfg) {
  validate(cfg);
  const FluxModel model = build_model(cfg);
  const int levels = cfg.eps_levels;
  std::vector<GridSolution> sols;
  std::vector<double> eps(static_cast<std::size_t>(levels));
  sols.reserve(static_cast<std::size_t>(levels));
  for (int k = 0; k < levels; ++k) {
    eps[static_cast<std::size_t>(k)] = cfg.eps0 * std::ldexp(1.0, -k);
    sols.push_back(GridSolution{Grid1D(std::max(1, static_cast<int>(std::lround(8.0 / eps[static_cast<std::size_t>(k)])))),
                                0.0, Profile(), model.id(), eps[static_cast<std::size_t>(k)]});
  }
  parallel_for(levels, cfg.threads, [&](int k) {
    const double e = eps[static_cast<std::size_t>(k)];
    const Grid1D grid = sols[static_cast<std::size_t>(k)].grid;
    const FluxModel mk = model.mollified(e);
    // Steady data uses each level's own m_alpha^eps.
    const Profile rho0 = initial_cells(cfg, mk, grid);
    sols[static_cast<std::size_t>(k)] = FvSolver(mk, grid).solve(rho0, cfg.horizon);
  });
  EpsilonReport report;
  for (int k = 0; k < levels; ++k) {
    const auto& s = sols[static_cast<std::size_t>(k)];
    double diff = kNaN;
    if (k + 1 < levels) {
      const auto& f = sols[static_cast<std::size_t>(k + 1)];
      if (f.grid.n_cells() != 2 * s.grid.n_cells()) throw DomainError("epsilon ladder grids must double");
      diff = l1_distance(s.values, restrict_to_coarse(f.values), s.grid.dx());
    }
    report.rows.push_back({eps[static_cast<std::size_t>(k)], s.grid.n_cells(), diff});
  }
  return report;
}

// Reports --------------------------------------------------------------------

void emit_report(const ConvergenceReport& report, const EpsilonReport* eps, const std::string& dir,
                 bool timing) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path root(dir);
  {
    CsvWriter w((root / "convergence.csv").string(),
                {"run_id", "N", "epsilon", "l", "M", "t", "l1_mean", "l1_std", "events_total",
                 "wall_seconds"});
    for (const auto& r : report.rows) {
      w.cell(r.run_id).cell(r.n_sites).cell(r.epsilon).cell(r.l).cell(r.replicas).cell(r.t);
      w.cell(r.l1_mean).cell(r.l1_std).cell(r.events_total).cell(timing ? r.wall_seconds : 0.0);
      w.end_row();
    }
    w.close();
  }
  {
    CsvWriter w((root / "young.csv").string(),
                {"run_id", "N", "bin", "x", "mean", "variance", "reference"});
    for (const auto& r : report.rows) {
      const auto bins = r.bin_variance.size();
      for (std::size_t b = 0; b < bins; ++b) {
        w.cell(r.run_id).cell(r.n_sites).cell(static_cast<std::int64_t>(b));
        w.cell((static_cast<double>(b) + 0.5) / static_cast<double>(bins));
        w.cell(r.bin_mean[b]).cell(r.bin_variance[b]);
        w.cell(b < r.reference_bins.size() ? r.reference_bins[b] : kNaN);
        w.end_row();
      }
    }
    w.close();
  }
  bool any_error = false;
  for (const auto& r : report.rows) any_error = any_error || !r.error.empty();
  if (any_error) {
    CsvWriter w((root / "errors.csv").string(), {"run_id", "N", "message"});
    for (const auto& r : report.rows) {
      if (r.error.empty()) continue;
      std::string msg = r.error;
      std::replace(msg.begin(), msg.end(), ',', ';');
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      w.cell(r.run_id).cell(r.n_sites).cell(msg);
      w.end_row();
    }
    w.close();
  }
  if (eps) {
    CsvWriter w((root / "epsilon_study.csv").string(), {"epsilon", "n_cells", "l1_difference"});
    for (const auto& r : eps->rows) {
      w.cell(r.epsilon).cell(r.n_cells).cell(r.l1_difference);
      w.end_row();
    }
    w.close();
  }
  std::ofstream plot(root / "convergence_plot.dat", std::ios::binary | std::ios::trunc);
  if (!plot) throw std::runtime_error("cannot open convergence_plot.dat");
  plot << "# reference " << report.reference << "\n";
  plot << "# series l1_mean: N l1_mean l1_std\n";
  for (const auto& r : report.rows) {
    plot << r.n_sites << ' ' << format_real(r.l1_mean) << ' ' << format_real(r.l1_std) << '\n';
  }
  plot << "\n\n# series young_pooled_variance: N variance\n";
  for (const auto& r : report.rows) plot << r.n_sites << ' ' << format_real(r.pooled_variance()) << '\n';
  if (eps) {
    plot << "\n\n# series epsilon_difference: epsilon l1_difference\n";
    for (const auto& r : eps->rows) {
      if (!std::isnan(r.l1_difference)) {
        plot << format_real(r.epsilon) << ' ' << format_real(r.l1_difference) << '\n';
      }
    }
  }
  plot.close();
  if (plot.fail()) throw std::runtime_error("writing convergence_plot.dat failed");
}

// Checks ---------------------------------------------------------------------

CheckOutcome check_convergence(const ConvergenceReport& report, double final_fraction) {
  CheckOutcome out;
  const auto& rows = report.rows;
  char buf[256];
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    const double band = 1.96 * std::hypot(rows[i].l1_se(), rows[i + 1].l1_se());
    const bool ok = rows[i + 1].l1_mean < rows[i].l1_mean + band;
    std::snprintf(buf, sizeof buf, "N=%d %.4g -> N=%d %.4g (band %.2g)%s; ", rows[i].n_sites,
                  rows[i].l1_mean, rows[i + 1].n_sites, rows[i + 1].l1_mean, band, ok ? "" : " RISES");
    out.detail += buf;
    out.pass = out.pass && ok;
  }
  if (rows.size() >= 2) {
    const double frac = rows.back().l1_mean / rows.front().l1_mean;
    std::snprintf(buf, sizeof buf, "last/first = %.4g (limit %.2g)", frac, final_fraction);
    out.detail += buf;
    out.pass = out.pass && frac < final_fraction;
  }
  for (const auto& r : rows) out.pass = out.pass && r.error.empty() && std::isfinite(r.l1_mean);
  return out;
}

CheckOutcome check_young(const ConvergenceReport& report, double max_ratio) {
  CheckOutcome out;
  char buf[160];
  int compared = 0;
  for (std::size_t i = 0; i + 1 < report.rows.size(); ++i) {
    const auto& a = report.rows[i];
    const auto& b = report.rows[i + 1];
    if (b.n_sites != 2 * a.n_sites) continue;
    const double ratio = b.pooled_variance() / a.pooled_variance();
    const bool ok = ratio <= max_ratio;
    std::snprintf(buf, sizeof buf, "Var(%d)/Var(%d) = %.4g%s; ", b.n_sites, a.n_sites, ratio,
                  ok ? "" : " TOO LARGE");
    out.detail += buf;
    out.pass = out.pass && ok;
    ++compared;
  }
  if (compared == 0) {
    out.pass = false;
    out.detail = "no doubling steps in the ladder";
  }
  return out;
}

CheckOutcome check_epsilon(const EpsilonReport& report, double max_ratio) {
  CheckOutcome out;
  char buf[160];
  std::vector<double> d;
  for (const auto& r : report.rows) {
    if (!std::isnan(r.l1_difference)) d.push_back(r.l1_difference);
  }
  if (d.size() < 2) {
    out.pass = false;
    out.detail = "fewer than two differences";
    return out;
  }
  for (std::size_t i = 0; i + 1 < d.size(); ++i) {
    const bool both_zero = d[i] <= 1e-14 && d[i + 1] <= 1e-14;
    const double ratio = both_zero ? 0.0 : d[i + 1] / d[i];
    const bool ok = both_zero || ratio <= max_ratio;
    std::snprintf(buf, sizeof buf, "d%zu/d%zu = %.4g%s; ", i + 1, i, ratio, ok ? "" : " TOO LARGE");
    out.detail += buf;
    out.pass = out.pass && ok;
  }
  return out;
}

}  // namespace discoflux
