#include "mhgame/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "mhgame/csv.hpp"
#include "mhgame/error.hpp"

namespace mhgame {

namespace {

TrajectoryPoint evaluate(std::size_t t, const PowerProfile& profile, const Scenario& scenario,
                         const CodeBook& codes, const GameConfig& config) {
  TrajectoryPoint point{.iteration = t, .profile = profile, .sinr = {}, .utility = {}};
  const std::size_t n = profile.users();
  point.sinr.resize(n);
  point.utility.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const ReceiverKind kind = profile.receiver[k];
    point.sinr[k] = link_sinr(k, kind, profile.power, scenario, codes);
    const double q = operating_power(config, k, kind);
    // A silent user with no operating cost neither earns nor spends.
    point.utility[k] = profile.power[k] + q > 0 ? utility(point.sinr[k], profile.power[k], q, config) : 0.0;
  }
  return point;
}

void check_profile(const PowerProfile& profile, const Scenario& scenario, const GameConfig& config) {
  if (profile.power.size() != scenario.users() || profile.receiver.size() != scenario.users())
    throw Error(ErrorCode::InvalidArgument, "profile size must equal K");
  for (double p : profile.power)
    if (!(p >= 0) || p > config.max_power)
      throw Error(ErrorCode::InvalidArgument, "powers must lie in [0, P_max]");
}

}  // namespace

std::vector<double> default_initial_powers(const GameConfig& config) {
  return std::vector<double>(config.users, 0.0);
}

std::vector<BestResponse> best_response_map(const PowerProfile& profile, const Scenario& scenario,
                                            const CodeBook& codes, const GameConfig& config,
                                            const ReceiverPolicy& policy) {
  std::vector<BestResponse> out;
  out.reserve(profile.users());
  for (std::size_t k = 0; k < profile.users(); ++k)
    out.push_back(best_response_strategy(k, profile.power, scenario, codes, config, policy));
  return out;
}

double relative_change(const std::vector<double>& from, const std::vector<double>& to) {
  double worst = 0.0;
  for (std::size_t k = 0; k < from.size(); ++k) {
    const double diff = std::abs(to[k] - from[k]);
    if (diff == 0.0) continue;
    worst = std::max(worst, from[k] == 0.0 ? std::numeric_limits<double>::infinity() : diff / from[k]);
  }
  return worst;
}

EquilibriumReport run_best_response_dynamics(const Scenario& scenario, const CodeBook& codes,
                                             const GameConfig& config, const ReceiverPolicy& policy,
                                             std::vector<double> initial_powers,
                                             const DynamicsOptions& options) {
  config.validate();
  if (!(options.tolerance > 0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be positive");
  if (config.users != scenario.users() || codes.users() != scenario.users())
    throw Error(ErrorCode::InvalidArgument, "scenario, codes and config disagree on K");

  PowerProfile profile{std::move(initial_powers), std::vector<ReceiverKind>(scenario.users(), policy.preferred())};
  check_profile(profile, scenario, config);

  EquilibriumReport report;
  std::vector<std::size_t> clamp_streak(scenario.users(), 0);
  for (std::size_t t = 0;; ++t) {
    report.trajectory.push_back(evaluate(t, profile, scenario, codes, config));
    const std::vector<BestResponse> next = best_response_map(profile, scenario, codes, config, policy);

    PowerProfile candidate;
    candidate.power.reserve(next.size());
    for (std::size_t k = 0; k < next.size(); ++k) {
      candidate.power.push_back(next[k].power);
      candidate.receiver.push_back(next[k].receiver);
      clamp_streak[k] = next[k].clamped ? clamp_streak[k] + 1 : 0;
      if (clamp_streak[k] > options.power_limit_streak) report.power_limited = true;
    }

    const double change = relative_change(profile.power, candidate.power);
    const bool same_receivers = candidate.receiver == profile.receiver;
    report.iterations = t;
    report.fixed_point_residual = same_receivers ? change : std::numeric_limits<double>::infinity();
    if (same_receivers && change < options.tolerance) {
      report.converged = true;
      break;
    }
    if (t >= options.max_iterations) break;
    profile = std::move(candidate);
  }

  if (report.converged)
    report.pareto = pareto_probe(report.final_profile(), options.pareto_scale, scenario, codes, config);
  return report;
}

EquilibriumCheck verify_equilibrium(const PowerProfile& profile, const Scenario& scenario,
                                    const CodeBook& codes, const GameConfig& config,
                                    const ReceiverPolicy& policy, std::size_t grid_points) {
  check_profile(profile, scenario, config);
  grid_points = std::max<std::size_t>(grid_points, 200);
  const std::size_t n = profile.users();
  EquilibriumCheck check;
  check.power_deviation.resize(n);
  check.utility_gain.resize(n);

  for (std::size_t k = 0; k < n; ++k) {
    const double p = profile.power[k];
    const BestResponse br = best_response_strategy(k, profile.power, scenario, codes, config, policy);
    const double dev = std::abs(br.power - p);
    check.power_deviation[k] = dev == 0.0 ? 0.0 : (p == 0.0 ? std::numeric_limits<double>::infinity() : dev / p);

    const ReceiverKind own = profile.receiver[k];
    const double q_own = operating_power(config, k, own);
    const double current =
        p + q_own > 0 ? utility(link_sinr(k, own, profile.power, scenario, codes), p, q_own, config) : 0.0;

    // Log grid from well below the smaller of p and p~ up to P_max, plus a
    // fine linear grid within +-10% of the current power.
    const double anchor = std::min(p > 0 ? p : br.power, br.power);
    const double lo = std::max(anchor * 1e-6, config.max_power * 1e-300);
    const double log_lo = std::log(lo);
    const double log_hi = std::log(config.max_power);
    std::vector<double> candidates;
    candidates.reserve(grid_points + 101);
    for (std::size_t i = 0; i < grid_points; ++i)
      candidates.push_back(std::exp(log_lo + (log_hi - log_lo) * static_cast<double>(i) /
                                                static_cast<double>(grid_points - 1)));
    if (p > 0)
      for (int i = -50; i <= 50; ++i) candidates.push_back(std::min(config.max_power, p * (1.0 + 0.002 * i)));

    double best = current;
    for (ReceiverKind kind : kReceiverPreference) {
      if (!policy.allows(kind)) continue;
      if (kind == ReceiverKind::DE && !codes.decorrelator_available()) continue;
      const double g = gain_factor(kind, k, codes, profile.power, scenario.link_gains(k), scenario.noise_power);
      const double q = operating_power(config, k, kind);
      for (double x : candidates)
        if (x + q > 0) best = std::max(best, utility(x * g, x, q, config));
    }
    const double gain = best - current;
    check.utility_gain[k] =
        gain <= 0.0 ? 0.0 : (current == 0.0 ? std::numeric_limits<double>::infinity() : gain / current);
  }
  check.max_power_deviation = *std::max_element(check.power_deviation.begin(), check.power_deviation.end());
  check.max_utility_gain = *std::max_element(check.utility_gain.begin(), check.utility_gain.end());
  return check;
}

ParetoProbe pareto_probe(const PowerProfile& profile, double scale, const Scenario& scenario,
                         const CodeBook& codes, const GameConfig& config) {
  if (!(scale > 0) || !(scale < 1)) throw Error(ErrorCode::InvalidArgument, "scale must lie in (0, 1)");
  check_profile(profile, scenario, config);
  PowerProfile scaled = profile;
  for (double& p : scaled.power) p *= scale;
  const TrajectoryPoint before = evaluate(0, profile, scenario, codes, config);
  const TrajectoryPoint after = evaluate(0, scaled, scenario, codes, config);

  ParetoProbe probe;
  probe.scale = scale;
  probe.all_improved = true;
  for (std::size_t k = 0; k < profile.users(); ++k) {
    probe.utility_delta.push_back(after.utility[k] - before.utility[k]);
    probe.all_improved = probe.all_improved && after.utility[k] > before.utility[k];
  }
  return probe;
}

void write_trajectory_csv(std::ostream& out, const EquilibriumReport& report, std::uint64_t seed) {
  out << "t,k,receiver,power,sinr,utility,seed\n";
  for (const TrajectoryPoint& point : report.trajectory)
    for (std::size_t k = 0; k < point.profile.users(); ++k)
      CsvRow(out) << point.iteration << k << to_string(point.profile.receiver[k]) << point.profile.power[k]
                  << point.sinr[k] << point.utility[k] << seed;
}

}  // namespace mhgame
