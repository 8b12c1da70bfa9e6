#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "mhgame/dynamics.hpp"
#include "mhgame/io.hpp"

namespace mhgame {

struct ExperimentSpec {
  std::vector<double> loads{0.1, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5};
  std::size_t processing_gain = 32;
  std::vector<double> operating_powers{0.01};  // q, W
  std::size_t realizations = 100;
  std::vector<ReceiverKind> receivers{ReceiverKind::MF, ReceiverKind::DE, ReceiverKind::MMSE};
  std::uint64_t seed = 1;
  std::filesystem::path out_dir = ".";
  double tolerance = 1e-6;
  std::size_t max_iterations = 500;
  double max_power = 100.0;      // W
  double noise_power = 5e-16;    // W
  double info_bits = 100;
  double packet_bits = 100;
  double rate = 1e5;             // bits/s
  unsigned threads = 0;          // 0: hardware concurrency

  void validate() const;
  GameConfig game_config(std::size_t users, double q) const;
  DynamicsOptions dynamics_options() const;
};

/// q grid from 1 mW to 10 W, one point per decade.
std::vector<double> default_q_grid();

std::size_t users_for_load(double load, std::size_t processing_gain);

/// Seed of realization r at K users, before any decorrelator resampling.
std::uint64_t realization_seed(std::uint64_t base_seed, std::size_t users, std::size_t realization);

struct SeededInstance {
  Instance instance;
  std::uint64_t seed = 0;     // seed that actually produced the instance
  std::size_t resamples = 0;  // draws rejected for a singular S^T S
};

/// Scenario and codes from one seed. When K <= N and the decorrelator is
/// needed, singular code books are rejected and a derived seed is drawn.
SeededInstance make_instance(std::size_t users, std::size_t processing_gain, std::uint64_t seed,
                             double noise_power, bool need_decorrelator);

struct RealizationResult {
  double load = 0.0;
  std::size_t users = 0;
  ReceiverKind receiver = ReceiverKind::MF;
  double operating_power = 0.0;
  std::size_t realization = 0;
  std::uint64_t scenario_seed = 0;
  double mean_utility = 0.0;
  double min_utility = 0.0;
  double mean_sinr = 0.0;
  bool converged = false;
  bool power_limited = false;
  std::size_t iterations = 0;
};

struct SweepRow {
  double load = 0.0;
  std::size_t users = 0;
  ReceiverKind receiver = ReceiverKind::MF;
  double operating_power = 0.0;
  double mean_utility = 0.0;
  double standard_error = 0.0;
  std::size_t used = 0;
  std::size_t excluded = 0;       // nonconverged realizations
  std::size_t power_limited = 0;  // counted within `used`
  std::uint64_t seed = 0;         // base seed; per-realization seeds are in the detail table
};

struct SweepResult {
  std::vector<SweepRow> rows;                     // ordered by (load, receiver, q)
  std::vector<RealizationResult> realizations;    // ordered by (load, receiver, q, realization)
  std::size_t resampled_instances = 0;

  const SweepRow* find(double load, ReceiverKind receiver, double q) const;
};

/// Mean equilibrium utility per (load, receiver, q). Each realization's user
/// mean is averaged across realizations; DE is skipped where K > N.
SweepResult run_load_sweep(const ExperimentSpec& spec);

struct QSweepRow {
  SweepRow row;
  double ratio_to_previous = 0.0;  // u(previous q) / u(q); 0 for the first q
};

/// Load sweep over a q grid spanning at least two decades, annotated with
/// the utility ratio between consecutive q values.
std::vector<QSweepRow> run_q_sweep(const ExperimentSpec& spec);

struct TraceRequest {
  std::size_t users = 16;
  ReceiverKind receiver = ReceiverKind::MF;
  double operating_power = 0.01;
  std::uint64_t seed = 1;  // scenario seed
};

struct TraceResult {
  SeededInstance instance;
  EquilibriumReport report;
};

TraceResult run_convergence_trace(const TraceRequest& request, const ExperimentSpec& spec);
TraceResult run_convergence_trace(const Instance& instance, const TraceRequest& request,
                                  const ExperimentSpec& spec);

/// Iteration at which the across-user mean utility is largest (first on ties).
std::size_t mean_utility_peak(const EquilibriumReport& report);

void write_sweep_csv(std::ostream& out, const SweepResult& result);
void write_realizations_csv(std::ostream& out, const SweepResult& result);
void write_q_sweep_csv(std::ostream& out, const std::vector<QSweepRow>& rows);
/// Plot-ready (x, y, series) table: load, mean utility, receiver@q.
void write_load_plot(std::ostream& out, const SweepResult& result);

struct RunConfig {
  ExperimentSpec spec;
  bool q_sweep = false;
  std::optional<TraceRequest> trace;
};

/// Reads a JSON config whose keys mirror the command-line flags.
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig parse_run_config(std::istream& in);

}  // namespace mhgame
