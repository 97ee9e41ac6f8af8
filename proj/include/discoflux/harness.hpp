#ifndef DISCOFLUX_HARNESS_HPP
#define DISCOFLUX_HARNESS_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "discoflux/config.hpp"
#include "discoflux/equilibrium.hpp"
#include "discoflux/flux_model.hpp"
#include "discoflux/fv_solver.hpp"

namespace discoflux {

/// Unmollified flux model described by the config.
FluxModel build_model(const ExperimentConfig& cfg);
/// Equilibrium tables of the config's rate.
std::shared_ptr<const EquilibriumTables> build_tables(const ExperimentConfig& cfg);

/// rho0(x) for constant, pieces and table data; initial=steady uses m_alpha of `model`.
std::function<double(double)> initial_density(const ExperimentConfig& cfg, const FluxModel& model);
/// Cell values of rho0; initial=steady gives the discrete steady profile of `model`.
Profile initial_cells(const ExperimentConfig& cfg, const FluxModel& model, const Grid1D& grid);

int block_radius_for(const ExperimentConfig& cfg, int n_sites);

/// Runs fn(0..count-1) on `threads` workers; the first exception is rethrown.
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

/// Replica stream id: ladder index in the high word, replica in the low word.
inline std::uint64_t replica_stream(std::uint64_t ladder_index, std::uint64_t replica) {
  return (ladder_index << 32) | replica;
}

struct HydroRow {
  std::string run_id;
  int n_sites = 0;
  double epsilon = 0.0;
  int l = 0;
  int replicas = 0;
  double t = 0.0;
  double l1_mean = 0.0;
  double l1_std = 0.0;
  std::int64_t events_total = 0;
  double wall_seconds = 0.0;
  std::string error;
  std::vector<double> l1_samples;
  /// Per macro-cell mean and variance of the bin-averaged block densities across replicas.
  std::vector<double> bin_mean;
  std::vector<double> bin_variance;
  std::vector<double> reference_bins;

  /// Standard error of l1_mean.
  double l1_se() const;
  /// Mean over bins of the across-replica variance.
  double pooled_variance() const;
};

struct ConvergenceReport {
  std::vector<HydroRow> rows;
  std::string reference;
};

/// Particle ensembles along the N ladder against the macroscopic reference.
ConvergenceReport run_hydro(const ExperimentConfig& cfg);

/// Mean L1 of fresh invariant/product samples against the same reference (the
/// statistic's equilibrium noise floor) for lattice size n_sites.
double equilibrium_fluctuation(const ExperimentConfig& cfg, int n_sites);

struct EpsilonRow {
  double epsilon;
  int n_cells;
  /// ||rho^eps - rho^{eps/2}||_L1 on this level's grid; NaN on the last level.
  double l1_difference;
};

struct EpsilonReport {
  std::vector<EpsilonRow> rows;
};

/// eps_k = eps0 2^-k with dx = eps/8, solved to the horizon.
EpsilonReport run_epsilon_study(const ExperimentConfig& cfg);

/// Writes convergence.csv, convergence_plot.dat, young.csv and (if given) epsilon_study.csv.
void emit_report(const ConvergenceReport& report, const EpsilonReport* eps, const std::string& dir,
                 bool timing = true);

struct CheckOutcome {
  bool pass = true;
  std::string detail;
};

/// Errors decrease along the ladder modulo 1.96 combined standard errors, and the
/// last error is below `final_fraction` of the first.
CheckOutcome check_convergence(const ConvergenceReport& report, double final_fraction = 0.5);
/// Pooled bin variance ratio between consecutive doublings at most `max_ratio`.
CheckOutcome check_young(const ConvergenceReport& report, double max_ratio = 0.65);
/// Successive differences decrease with ratio at most `max_ratio`.
CheckOutcome check_epsilon(const EpsilonReport& report, double max_ratio = 0.9);

}  // namespace discoflux

#endif  // DISCOFLUX_HARNESS_HPP
