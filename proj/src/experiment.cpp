#include "mhgame/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>

#include <json.hpp>

#include "mhgame/csv.hpp"
#include "mhgame/error.hpp"
#include "mhgame/parallel.hpp"
#include "mhgame/rng.hpp"

namespace mhgame {

void ExperimentSpec::validate() const {
  if (loads.empty()) throw Error(ErrorCode::InvalidArgument, "load grid is empty");
  for (double b : loads)
    if (!(b > 0)) throw Error(ErrorCode::InvalidArgument, "loads must be positive");
  if (processing_gain < 1) throw Error(ErrorCode::InvalidArgument, "N must be at least 1");
  if (operating_powers.empty()) throw Error(ErrorCode::InvalidArgument, "q grid is empty");
  if (realizations < 1) throw Error(ErrorCode::InvalidArgument, "need at least one realization");
  if (receivers.empty()) throw Error(ErrorCode::InvalidArgument, "receiver set is empty");
  if (!(tolerance > 0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be positive");
  for (double b : loads) game_config(users_for_load(b, processing_gain), operating_powers.front()).validate();
  for (double q : operating_powers) game_config(1, q).validate();
}

GameConfig ExperimentSpec::game_config(std::size_t users, double q) const {
  GameConfig c = GameConfig::defaults(users, q);
  c.processing_gain = processing_gain;
  c.info_bits = info_bits;
  c.packet_bits = packet_bits;
  c.efficiency_exponent = packet_bits;
  c.rate = rate;
  c.max_power = max_power;
  return c;
}

DynamicsOptions ExperimentSpec::dynamics_options() const {
  DynamicsOptions o;
  o.tolerance = tolerance;
  o.max_iterations = max_iterations;
  return o;
}

std::vector<double> default_q_grid() { return {0.001, 0.01, 0.1, 1.0, 10.0}; }

std::size_t users_for_load(double load, std::size_t processing_gain) {
  const double k = std::round(load * static_cast<double>(processing_gain));
  if (!(k >= 1)) throw Error(ErrorCode::InvalidArgument, "load gives fewer than one user");
  return static_cast<std::size_t>(k);
}

std::uint64_t realization_seed(std::uint64_t base_seed, std::size_t users, std::size_t realization) {
  return derive_seed(base_seed, {static_cast<std::uint64_t>(Stream::Realization), users, realization});
}

SeededInstance make_instance(std::size_t users, std::size_t processing_gain, std::uint64_t seed,
                             double noise_power, bool need_decorrelator) {
  SeededInstance out{Instance{make_scenario(users, seed, noise_power), generate_codes(users, processing_gain, seed)},
                     seed, 0};
  need_decorrelator = need_decorrelator && users <= processing_gain;
  while (need_decorrelator && !out.instance.codes.decorrelator_available()) {
    if (++out.resamples > 1000) throw Error(ErrorCode::ReceiverUnavailable, "could not draw invertible codes");
    out.seed = derive_seed(seed, {out.resamples});
    out.instance = Instance{make_scenario(users, out.seed, noise_power), generate_codes(users, processing_gain, out.seed)};
  }
  return out;
}

const SweepRow* SweepResult::find(double load, ReceiverKind receiver, double q) const {
  for (const SweepRow& r : rows)
    if (r.load == load && r.receiver == receiver && r.operating_power == q) return &r;
  return nullptr;
}

namespace {

bool receiver_usable(ReceiverKind kind, std::size_t users, std::size_t processing_gain) {
  return kind != ReceiverKind::DE || users <= processing_gain;
}

RealizationResult summarize(const EquilibriumReport& report) {
  RealizationResult r;
  const TrajectoryPoint& last = report.final_point();
  const double n = static_cast<double>(last.utility.size());
  r.mean_utility = std::accumulate(last.utility.begin(), last.utility.end(), 0.0) / n;
  r.min_utility = *std::min_element(last.utility.begin(), last.utility.end());
  r.mean_sinr = std::accumulate(last.sinr.begin(), last.sinr.end(), 0.0) / n;
  r.converged = report.converged;
  r.power_limited = report.power_limited;
  r.iterations = report.iterations;
  return r;
}

}  // namespace

SweepResult run_load_sweep(const ExperimentSpec& spec) {
  spec.validate();
  const std::size_t loads = spec.loads.size();
  const bool wants_de =
      std::find(spec.receivers.begin(), spec.receivers.end(), ReceiverKind::DE) != spec.receivers.end();

  // One task per (load, realization); it builds the instance once and runs
  // every receiver and q on it, so receivers are compared on equal footing.
  struct TaskOutput {
    std::vector<RealizationResult> runs;
    std::size_t resamples = 0;
  };
  std::vector<TaskOutput> tasks(loads * spec.realizations);
  parallel_for(
      tasks.size(),
      [&](std::size_t task) {
        const std::size_t li = task / spec.realizations;
        const std::size_t r = task % spec.realizations;
        const double load = spec.loads[li];
        const std::size_t users = users_for_load(load, spec.processing_gain);
        const SeededInstance inst =
            make_instance(users, spec.processing_gain, realization_seed(spec.seed, users, r), spec.noise_power, wants_de);
        tasks[task].resamples = inst.resamples;
        for (ReceiverKind kind : spec.receivers) {
          if (!receiver_usable(kind, users, spec.processing_gain)) continue;
          for (double q : spec.operating_powers) {
            const GameConfig config = spec.game_config(users, q);
            const EquilibriumReport report =
                run_best_response_dynamics(inst.instance.scenario, inst.instance.codes, config,
                                           ReceiverPolicy::fixed(kind), default_initial_powers(config),
                                           spec.dynamics_options());
            RealizationResult res = summarize(report);
            res.load = load;
            res.users = users;
            res.receiver = kind;
            res.operating_power = q;
            res.realization = r;
            res.scenario_seed = inst.seed;
            tasks[task].runs.push_back(res);
          }
        }
      },
      spec.threads == 0 ? default_thread_count() : spec.threads);

  SweepResult result;
  for (const TaskOutput& t : tasks) result.resampled_instances += t.resamples;
  for (std::size_t li = 0; li < loads; ++li) {
    const double load = spec.loads[li];
    const std::size_t users = users_for_load(load, spec.processing_gain);
    for (ReceiverKind kind : spec.receivers) {
      if (!receiver_usable(kind, users, spec.processing_gain)) continue;
      for (double q : spec.operating_powers) {
        SweepRow row{.load = load, .users = users, .receiver = kind, .operating_power = q, .seed = spec.seed};
        std::vector<double> means;
        for (std::size_t r = 0; r < spec.realizations; ++r) {
          for (const RealizationResult& run : tasks[li * spec.realizations + r].runs) {
            if (run.receiver != kind || run.operating_power != q) continue;
            result.realizations.push_back(run);
            if (!run.converged) {
              ++row.excluded;
              continue;
            }
            means.push_back(run.mean_utility);
            row.power_limited += run.power_limited ? 1 : 0;
          }
        }
        row.used = means.size();
        if (!means.empty()) {
          const double n = static_cast<double>(means.size());
          row.mean_utility = std::accumulate(means.begin(), means.end(), 0.0) / n;
          double ss = 0.0;
          for (double m : means) ss += (m - row.mean_utility) * (m - row.mean_utility);
          row.standard_error = means.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
        } else {
          row.mean_utility = std::nan("");
          row.standard_error = std::nan("");
        }
        result.rows.push_back(row);
      }
    }
  }
  return result;
}

std::vector<QSweepRow> run_q_sweep(const ExperimentSpec& spec) {
  const auto [lo, hi] = std::minmax_element(spec.operating_powers.begin(), spec.operating_powers.end());
  if (spec.operating_powers.empty() || !(*lo > 0) || *hi / *lo < 100.0 * (1.0 - 1e-12))
    throw Error(ErrorCode::InvalidArgument, "q grid must be positive and span at least two decades");
  const SweepResult sweep = run_load_sweep(spec);
  std::vector<QSweepRow> out;
  for (const SweepRow& row : sweep.rows) {
    QSweepRow q{row, 0.0};
    if (!out.empty() && out.back().row.load == row.load && out.back().row.receiver == row.receiver)
      q.ratio_to_previous = out.back().row.mean_utility / row.mean_utility;
    out.push_back(q);
  }
  return out;
}

TraceResult run_convergence_trace(const Instance& instance, const TraceRequest& request,
                                  const ExperimentSpec& spec) {
  const std::size_t users = instance.scenario.users();
  const GameConfig config = spec.game_config(users, request.operating_power);
  TraceResult out{SeededInstance{instance, instance.scenario.seed, 0}, {}};
  out.report = run_best_response_dynamics(out.instance.instance.scenario, out.instance.instance.codes, config,
                                          ReceiverPolicy::fixed(request.receiver),
                                          default_initial_powers(config), spec.dynamics_options());
  return out;
}

TraceResult run_convergence_trace(const TraceRequest& request, const ExperimentSpec& spec) {
  const SeededInstance inst = make_instance(request.users, spec.processing_gain, request.seed, spec.noise_power,
                                            request.receiver == ReceiverKind::DE);
  TraceResult out = run_convergence_trace(inst.instance, request, spec);
  out.instance = inst;
  return out;
}

std::size_t mean_utility_peak(const EquilibriumReport& report) {
  std::size_t best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < report.trajectory.size(); ++t) {
    const auto& u = report.trajectory[t].utility;
    const double mean = std::accumulate(u.begin(), u.end(), 0.0) / static_cast<double>(u.size());
    if (mean > best_value) {
      best_value = mean;
      best = t;
    }
  }
  return report.trajectory[best].iteration;
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  out << "load,k,receiver,q,mean_utility,std_error,realizations,excluded,power_limited,seed\n";
  for (const SweepRow& r : result.rows)
    CsvRow(out) << r.load << r.users << to_string(r.receiver) << r.operating_power << r.mean_utility
                << r.standard_error << r.used << r.excluded << r.power_limited << r.seed;
}

void write_realizations_csv(std::ostream& out, const SweepResult& result) {
  out << "load,k,receiver,q,realization,scenario_seed,mean_utility,min_utility,mean_sinr,converged,"
         "power_limited,iterations\n";
  for (const RealizationResult& r : result.realizations)
    CsvRow(out) << r.load << r.users << to_string(r.receiver) << r.operating_power << r.realization
                << r.scenario_seed << r.mean_utility << r.min_utility << r.mean_sinr << r.converged
                << r.power_limited << r.iterations;
}

void write_q_sweep_csv(std::ostream& out, const std::vector<QSweepRow>& rows) {
  out << "q,receiver,load,k,mean_utility,std_error,ratio_to_previous_q,seed\n";
  for (const QSweepRow& r : rows)
    CsvRow(out) << r.row.operating_power << to_string(r.row.receiver) << r.row.load << r.row.users
                << r.row.mean_utility << r.row.standard_error << r.ratio_to_previous << r.row.seed;
}

void write_load_plot(std::ostream& out, const SweepResult& result) {
  out << "x,y,series\n";
  for (const SweepRow& r : result.rows)
    CsvRow(out) << r.load << r.mean_utility << std::string(to_string(r.receiver)) + "@q=" + format_double(r.operating_power);
}

RunConfig parse_run_config(std::istream& in) {
  using nlohmann::json;
  RunConfig cfg;
  ExperimentSpec& s = cfg.spec;
  try {
    json doc;
    in >> doc;
    if (doc.contains("load_grid")) s.loads = doc["load_grid"].get<std::vector<double>>();
    if (doc.contains("q_grid")) s.operating_powers = doc["q_grid"].get<std::vector<double>>();
    if (doc.contains("receivers")) {
      s.receivers.clear();
      for (const auto& name : doc["receivers"]) s.receivers.push_back(parse_receiver(name.get<std::string>()));
    }
    if (doc.contains("realizations")) s.realizations = doc["realizations"].get<std::size_t>();
    if (doc.contains("seed")) s.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("n")) s.processing_gain = doc["n"].get<std::size_t>();
    if (doc.contains("out_dir")) s.out_dir = doc["out_dir"].get<std::string>();
    if (doc.contains("tol")) s.tolerance = doc["tol"].get<double>();
    if (doc.contains("max_iter")) s.max_iterations = doc["max_iter"].get<std::size_t>();
    if (doc.contains("pmax")) s.max_power = doc["pmax"].get<double>();
    if (doc.contains("threads")) s.threads = doc["threads"].get<unsigned>();
    if (doc.contains("q_sweep")) cfg.q_sweep = doc["q_sweep"].get<bool>();
    if (doc.contains("trace")) {
      const json& t = doc["trace"];
      TraceRequest req;
      req.users = t.at("k").get<std::size_t>();
      req.receiver = parse_receiver(t.at("receiver").get<std::string>());
      req.operating_power = t.at("q").get<double>();
      req.seed = t.at("seed").get<std::uint64_t>();
      cfg.trace = req;
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("malformed config: ") + e.what());
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot read config " + path.string());
  return parse_run_config(in);
}

}  // namespace mhgame
