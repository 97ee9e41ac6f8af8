// discoflux: conservation laws with discontinuous flux and their zero range particle systems.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "discoflux/config.hpp"
#include "discoflux/coupling.hpp"
#include "discoflux/csv.hpp"
#include "discoflux/entropy_audit.hpp"
#include "discoflux/errors.hpp"
#include "discoflux/fv_solver.hpp"
#include "discoflux/harness.hpp"
#include "discoflux/steady_states.hpp"
#include "discoflux/zrp.hpp"

namespace fs = std::filesystem;
using namespace discoflux;

namespace {

constexpr int kOk = 0;
constexpr int kError = 1;
constexpr int kCheckFailed = 2;

struct SharedFlags {
  std::string config;
  std::uint64_t seed = 0;
  std::string out;
  int threads = 0;
};

ExperimentConfig resolve(const SharedFlags& f, const CLI::App& sub) {
  ExperimentConfig cfg = f.config.empty() ? ExperimentConfig{} : load_config(f.config);
  if (sub.count("--seed")) cfg.seed = f.seed;
  if (sub.count("--out")) cfg.output = f.out;
  if (sub.count("--threads")) cfg.threads = f.threads;
  validate(cfg);
  fs::create_directories(cfg.output);
  return cfg;
}

FluxModel run_model(const ExperimentConfig& cfg) {
  const FluxModel base = build_model(cfg);
  return cfg.epsilon > 0.0 ? base.mollified(cfg.epsilon) : base;
}

std::string path_in(const ExperimentConfig& cfg, const std::string& name) {
  return (fs::path(cfg.output) / name).string();
}

int report(const char* name, const CheckOutcome& c) {
  std::fprintf(stderr, "%s: %s %s\n", name, c.pass ? "ok" : "FAILED", c.detail.c_str());
  return c.pass ? kOk : kCheckFailed;
}

int cmd_solve(const ExperimentConfig& cfg) {
  const FluxModel model = run_model(cfg);
  const Grid1D grid(cfg.cells);
  const FvSolver solver(model, grid);
  std::vector<double> times = cfg.snapshot_times;
  if (times.empty()) times.push_back(cfg.horizon);
  std::vector<GridSolution> snaps;
  solver.solve(initial_cells(cfg, model, grid), cfg.horizon, times, &snaps);
  CsvWriter index(path_in(cfg, "snapshots.csv"), {"k", "t", "file", "mass"});
  for (std::size_t k = 0; k < snaps.size(); ++k) {
    const std::string file = "snapshot_" + std::to_string(k) + ".csv";
    CsvWriter w(path_in(cfg, file), {"x", "rho"});
    for (int i = 0; i < grid.n_cells(); ++i) {
      w.cell(grid.center(i)).cell(snaps[k].values[i]);
      w.end_row();
    }
    w.close();
    index.cell(static_cast<std::int64_t>(k)).cell(snaps[k].time).cell(file).cell(snaps[k].mass());
    index.end_row();
  }
  index.close();
  return kOk;
}

int cmd_steady(const ExperimentConfig& cfg) {
  const FluxModel model = run_model(cfg);
  const Grid1D grid(cfg.cells);
  const bool two_branches = model.shape() != ClosureShape::Increasing;
  CsvWriter index(path_in(cfg, "steady_index.csv"), {"k", "alpha", "file"});
  for (std::size_t k = 0; k < cfg.alphas.size(); ++k) {
    const double alpha = cfg.alphas[k];
    const std::string file = "steady_" + std::to_string(k) + ".csv";
    CsvWriter w(path_in(cfg, file), {"x", "m_alpha_plus", "m_alpha_minus"});
    const SteadyStateFamily plus(model, alpha, Branch::Plus);
    const SteadyStateFamily minus(model, alpha, Branch::Minus);
    for (int i = 0; i < grid.n_cells(); ++i) {
      const double x = grid.center(i);
      const auto p = plus(x);
      const auto m = two_branches ? minus(x) : std::nullopt;
      w.cell(x).cell(p ? *p : std::nan("")).cell(m ? *m : std::nan(""));
      w.end_row();
    }
    w.close();
    index.cell(static_cast<std::int64_t>(k)).cell(alpha).cell(file);
    index.end_row();
  }
  index.close();
  return kOk;
}

int cmd_zrp(const ExperimentConfig& cfg) {
  const FluxModel model = build_model(cfg);
  const auto tables = build_tables(cfg);
  const int n = cfg.sites;
  const Eigen::VectorXd speeds = site_speeds(model, n, cfg.sigma);
  RandomStream rng(cfg.seed, replica_stream(0, 0));
  Configuration start =
      cfg.initial == "steady"
          ? sample_invariant_measure(*tables, speeds, cfg.alpha, rng)
          : sample_product_measure(*tables, initial_density(cfg, model), n, rng);
  const std::int64_t particles = start.total_particles;
  ZrpProcess proc(RateFunction::parse(cfg.rate), speeds, JumpKernel::nearest_neighbor(), std::move(start));
  std::vector<double> times = cfg.snapshot_times;
  if (times.empty()) times.push_back(cfg.horizon);
  const int l = block_radius_for(cfg, n);
  CsvWriter index(path_in(cfg, "zrp_index.csv"), {"k", "t", "events", "total_particles"});
  for (std::size_t k = 0; k < times.size(); ++k) {
    proc.run_until(times[k], rng, cfg.event_budget);
    const auto& c = proc.configuration();
    CsvWriter occ(path_in(cfg, "occupancy_" + std::to_string(k) + ".csv"), {"u", "eta"});
    for (int u = 0; u < n; ++u) {
      occ.cell(u).cell(c.eta[static_cast<std::size_t>(u)]);
      occ.end_row();
    }
    occ.close();
    const Eigen::VectorXd blocks = block_averages(c, l);
    CsvWriter blk(path_in(cfg, "block_" + std::to_string(k) + ".csv"), {"x", "eta_l"});
    for (int u = 0; u < n; ++u) {
      blk.cell(static_cast<double>(u) / n).cell(blocks[u]);
      blk.end_row();
    }
    blk.close();
    index.cell(static_cast<std::int64_t>(k)).cell(times[k]).cell(proc.events()).cell(c.total_particles);
    index.end_row();
  }
  index.close();
  const bool conserved = proc.configuration().total_particles == particles && proc.configuration().verify_total();
  if (cfg.checks && !conserved) {
    std::fprintf(stderr, "particle count changed\n");
    return kCheckFailed;
  }
  return kOk;
}

int cmd_couple(const ExperimentConfig& cfg) {
  const FluxModel model = build_model(cfg);
  const auto tables = build_tables(cfg);
  const RateFunction rate = RateFunction::parse(cfg.rate);
  const int n = cfg.sites;
  const int m = cfg.replicas;
  const Eigen::VectorXd speeds = site_speeds(model, n, cfg.sigma);
  const int l = block_radius_for(cfg, n);
  const int intervals = std::max(1, static_cast<int>(std::lround(50.0 * cfg.horizon)));
  std::vector<double> checkpoints;
  for (int k = 0; k < cfg.checkpoints; ++k) {
    checkpoints.push_back(cfg.checkpoints == 1 ? 0.0 : cfg.horizon * (double(k) / (cfg.checkpoints - 1)));
  }
  const auto library = default_test_library(cfg.horizon);
  std::vector<std::vector<TraceRow>> traces(static_cast<std::size_t>(m));
  std::vector<std::vector<double>> entropy(library.size(), std::vector<double>(static_cast<std::size_t>(m)));
  parallel_for(m, cfg.threads, [&](int r) {
    RandomStream rng(cfg.seed, replica_stream(0, static_cast<std::uint64_t>(r)));
    Configuration eta =
        cfg.initial == "steady"
            ? sample_invariant_measure(*tables, speeds, cfg.alpha, rng)
            : sample_product_measure(*tables, initial_density(cfg, model), n, rng);
    Configuration xi = sample_invariant_measure(*tables, speeds, cfg.couple_alpha, rng);
    const JumpKernel kernel = JumpKernel::nearest_neighbor();
    CoupledProcess proc(rate, speeds, kernel, std::move(eta), std::move(xi));
    const CoupledRecord rec = record_coupled(proc, kernel, cfg.horizon, intervals, checkpoints, rng);
    traces[static_cast<std::size_t>(r)] = rec.trace;
    for (std::size_t j = 0; j < library.size(); ++j) {
      entropy[j][static_cast<std::size_t>(r)] =
          microscopic_entropy(rec.trajectory, library[j], l, speeds, model.closure());
    }
  });

  bool pass = true;
  CsvWriter trace(path_in(cfg, "couple_trace.csv"), {"t", "discrepancy", "uncoupled_pairs"});
  double prev_mean = 0.0;
  double prev_se = 0.0;
  for (std::size_t k = 0; k < checkpoints.size(); ++k) {
    double s = 0.0, s2 = 0.0, pairs = 0.0;
    for (const auto& tr : traces) {
      s += tr[k].discrepancy;
      s2 += tr[k].discrepancy * tr[k].discrepancy;
      pairs += tr[k].uncoupled_pairs;
    }
    const double mean = s / m;
    const double se = std::sqrt(std::max(0.0, (s2 / m - mean * mean) * m / (m - 1)) / m);
    if (k > 0 && mean > prev_mean + 2.0 * std::hypot(se, prev_se)) pass = false;
    prev_mean = mean;
    prev_se = se;
    trace.cell(checkpoints[k]).cell(mean).cell(pairs / m);
    trace.end_row();
  }
  trace.close();
  for (std::size_t j = 0; j < library.size(); ++j) {
    CsvWriter w(path_in(cfg, "entropy_" + library[j].id() + ".csv"), {"replica", "value"});
    double s = 0.0, s2 = 0.0;
    for (int r = 0; r < m; ++r) {
      const double v = entropy[j][static_cast<std::size_t>(r)];
      s += v;
      s2 += v * v;
      w.cell(r).cell(v);
      w.end_row();
    }
    w.close();
    const double mean = s / m;
    const double se = std::sqrt(std::max(0.0, (s2 / m - mean * mean) * m / (m - 1)) / m);
    if (mean < -3.0 * se) pass = false;
  }
  if (cfg.checks && !pass) {
    std::fprintf(stderr, "coupling checks failed\n");
    return kCheckFailed;
  }
  return kOk;
}

int cmd_audit(const ExperimentConfig& cfg) {
  const FluxModel model = run_model(cfg);
  const Grid1D grid(cfg.cells);
  const FvSolver solver(model, grid);
  const Profile rho0 = initial_cells(cfg, model, grid);
  const SolutionSeries series = solve_series(solver, rho0, cfg.horizon, cfg.audit_intervals);
  EntropyAuditor auditor(model, grid);
  const EntropyReport rep = auditor.audit(series, alpha_library(model, grid, rho0, cfg.alpha_count),
                                          default_test_library(cfg.horizon));
  CsvWriter w(path_in(cfg, "audit.csv"), {"alpha", "branch", "J_id", "residual"});
  for (const auto& r : rep.rows) {
    w.cell(r.alpha).cell(std::string(to_string(r.branch))).cell(r.test_id).cell(r.residual);
    w.end_row();
  }
  w.close();
  std::fprintf(stderr, "audit: min residual %.6g, dx + dt = %.6g\n", rep.min_residual(),
               rep.dx + rep.dt);
  return kOk;
}

int cmd_hydro(const ExperimentConfig& cfg) {
  const ConvergenceReport rep = run_hydro(cfg);
  EpsilonReport eps;
  const bool with_eps = cfg.eps_levels > 0;
  if (with_eps) eps = run_epsilon_study(cfg);
  emit_report(rep, with_eps ? &eps : nullptr, cfg.output, cfg.timing);
  if (!cfg.checks) return kOk;
  int code = kOk;
  auto merge = [&code](int c) { code = std::max(code, c); };
  if (cfg.initial == "steady") {
    for (const auto& r : rep.rows) {
      const double sigma_eq = equilibrium_fluctuation(cfg, r.n_sites);
      CheckOutcome c;
      c.pass = r.error.empty() && r.l1_mean <= 5.0 * sigma_eq;
      char buf[128];
      std::snprintf(buf, sizeof buf, "N=%d l1 %.4g vs 5 sigma_eq %.4g", r.n_sites, r.l1_mean, 5.0 * sigma_eq);
      c.detail = buf;
      merge(report("stationarity", c));
    }
  } else if (rep.rows.size() >= 2) {
    merge(report("convergence", check_convergence(rep)));
    merge(report("young", check_young(rep)));
  }
  if (with_eps && cfg.eps_levels >= 3) merge(report("epsilon", check_epsilon(eps)));
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"discoflux: discontinuous-flux conservation laws and zero range particle systems"};
  app.require_subcommand(1);
  app.footer(config_help());
  SharedFlags flags;
  struct Entry {
    const char* name;
    const char* help;
    int (*run)(const ExperimentConfig&);
  };
  const std::vector<Entry> entries = {
      {"solve", "Godunov solve; writes snapshot_<k>.csv (x,rho) and snapshots.csv", cmd_solve},
      {"steady", "steady-state families; writes steady_<k>.csv (x,m_alpha_plus,m_alpha_minus)", cmd_steady},
      {"zrp", "single ZRP trajectory; writes occupancy_<k>.csv (u,eta) and block_<k>.csv (x,eta_l)", cmd_zrp},
      {"couple", "coupled ensembles; writes couple_trace.csv and entropy_<J>.csv", cmd_couple},
      {"audit", "adapted-entropy audit of a solve; writes audit.csv", cmd_audit},
      {"hydro", "N-ladder and epsilon study; writes convergence.csv, convergence_plot.dat, young.csv, epsilon_study.csv", cmd_hydro},
  };
  std::vector<CLI::App*> subs;
  for (const auto& e : entries) {
    CLI::App* sub = app.add_subcommand(e.name, e.help);
    sub->add_option("--config", flags.config, "key=value config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", flags.seed, "master seed (overrides the config)");
    sub->add_option("--out", flags.out, "output directory (overrides the config)");
    sub->add_option("--threads", flags.threads, "worker threads (overrides the config)")
        ->check(CLI::PositiveNumber);
    subs.push_back(sub);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kError;
  }
  try {
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (subs[i]->parsed()) return entries[i].run(resolve(flags, *subs[i]));
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kError;
  }
  return kError;
}
