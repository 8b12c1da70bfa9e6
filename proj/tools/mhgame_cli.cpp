// Experiment runner: load sweeps, q sweeps and convergence traces.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mhgame/error.hpp"
#include "mhgame/experiment.hpp"

namespace {

std::ofstream open_output(const std::filesystem::path& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / name);
  if (!out) throw mhgame::Error(mhgame::ErrorCode::InvalidArgument, "cannot write " + (dir / name).string());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace mhgame;

  CLI::App app{"Power control and receiver selection game in multi-hop DS-CDMA networks"};

  std::string config_path;
  std::vector<double> loads;
  std::vector<double> q_grid;
  std::vector<std::string> receivers;
  std::size_t realizations = 0;
  std::uint64_t seed = 0;
  std::size_t processing_gain = 0;
  std::string out_dir;
  std::vector<std::string> trace;
  double tol = 0;
  std::size_t max_iter = 0;
  double pmax = 0;
  unsigned threads = 0;
  bool q_sweep = false;
  std::string scenario_file;
  bool save_scenario = false;

  app.add_option("--config", config_path, "JSON config file; keys mirror the flags")->check(CLI::ExistingFile);
  app.add_option("--load-grid", loads, "Loads K/N to sweep")->delimiter(',');
  app.add_option("--q-grid", q_grid, "Operating powers q in Watts")->delimiter(',');
  app.add_option("--receivers", receivers, "Receivers: MF, DE, MMSE")->delimiter(',');
  app.add_option("--realizations", realizations, "Scenarios per load")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "Base seed");
  app.add_option("--n", processing_gain, "Processing gain N")->check(CLI::PositiveNumber);
  app.add_option("--out-dir", out_dir, "Output directory (default: $MHGAME_OUT_DIR or .)");
  app.add_option("--trace", trace, "Single convergence trace: K,RECEIVER,Q,SEED")->delimiter(',')->expected(4);
  app.add_option("--tol", tol, "Relative power-change tolerance")->check(CLI::PositiveNumber);
  app.add_option("--max-iter", max_iter, "Iteration cap per dynamics run");
  app.add_option("--pmax", pmax, "Maximum transmit power in Watts")->check(CLI::PositiveNumber);
  app.add_option("--threads", threads, "Worker threads (0: all cores)");
  app.add_flag("--q-sweep", q_sweep, "Also write the q-sweep table with utility ratios");
  app.add_option("--scenario", scenario_file, "Instance file to trace instead of generating one")
      ->check(CLI::ExistingFile);
  app.add_flag("--save-scenario", save_scenario, "Write the traced instance to scenario.json");

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig run;
    if (const char* env = std::getenv("MHGAME_OUT_DIR")) run.spec.out_dir = env;
    if (!config_path.empty()) {
      const std::filesystem::path env_dir = run.spec.out_dir;
      run = load_run_config(config_path);
      if (run.spec.out_dir == ".") run.spec.out_dir = env_dir;
    }
    ExperimentSpec& spec = run.spec;
    if (app.count("--load-grid")) spec.loads = loads;
    if (app.count("--q-grid")) spec.operating_powers = q_grid;
    if (app.count("--receivers")) {
      spec.receivers.clear();
      for (const std::string& r : receivers) spec.receivers.push_back(parse_receiver(r));
    }
    if (app.count("--realizations")) spec.realizations = realizations;
    if (app.count("--seed")) spec.seed = seed;
    if (app.count("--n")) spec.processing_gain = processing_gain;
    if (app.count("--out-dir")) spec.out_dir = out_dir;
    if (app.count("--tol")) spec.tolerance = tol;
    if (app.count("--max-iter")) spec.max_iterations = max_iter;
    if (app.count("--pmax")) spec.max_power = pmax;
    if (app.count("--threads")) spec.threads = threads;
    if (q_sweep) run.q_sweep = true;
    // A single q cannot be swept; fall back to the 1 mW..10 W grid.
    if (run.q_sweep && spec.operating_powers.size() == 1) spec.operating_powers = default_q_grid();
    if (app.count("--trace")) {
      TraceRequest req;
      req.users = std::stoul(trace[0]);
      req.receiver = parse_receiver(trace[1]);
      req.operating_power = std::stod(trace[2]);
      req.seed = std::stoull(trace[3]);
      run.trace = req;
    }

    if (run.trace) {
      const TraceRequest& req = *run.trace;
      const TraceResult result = scenario_file.empty()
                                     ? run_convergence_trace(req, spec)
                                     : run_convergence_trace(load_instance(scenario_file), req, spec);
      const std::string name = "trace_" + std::string(to_string(req.receiver)) + ".csv";
      std::ofstream out = open_output(spec.out_dir, name);
      write_trajectory_csv(out, result.report, result.instance.seed);
      if (save_scenario)
        save_instance(spec.out_dir / "scenario.json", result.instance.instance.scenario, result.instance.instance.codes);
      std::cout << "trace: " << (result.report.converged ? "converged" : "not converged") << " after "
                << result.report.iterations << " iterations"
                << (result.report.power_limited ? " (power-limited)" : "") << ", mean utility peaks at t="
                << mean_utility_peak(result.report) << " -> " << (spec.out_dir / name).string() << '\n';
      return 0;
    }

    if (run.q_sweep) {
      const std::vector<QSweepRow> rows = run_q_sweep(spec);
      std::ofstream out = open_output(spec.out_dir, "q_sweep.csv");
      write_q_sweep_csv(out, rows);
      std::cout << "q sweep: " << rows.size() << " rows -> " << (spec.out_dir / "q_sweep.csv").string() << '\n';
      return 0;
    }

    const SweepResult sweep = run_load_sweep(spec);
    {
      std::ofstream out = open_output(spec.out_dir, "load_sweep.csv");
      write_sweep_csv(out, sweep);
    }
    {
      std::ofstream out = open_output(spec.out_dir, "load_sweep_realizations.csv");
      write_realizations_csv(out, sweep);
    }
    {
      std::ofstream out = open_output(spec.out_dir, "load_sweep_plot.csv");
      write_load_plot(out, sweep);
    }
    if (sweep.resampled_instances > 0)
      std::cerr << "note: " << sweep.resampled_instances << " code books resampled for a singular S^T S\n";
    std::cout << "load sweep: " << sweep.rows.size() << " rows -> " << (spec.out_dir / "load_sweep.csv").string()
              << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
