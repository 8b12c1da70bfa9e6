#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "mhgame/game.hpp"

namespace mhgame {

struct PowerProfile {
  std::vector<double> power;
  std::vector<ReceiverKind> receiver;

  std::size_t users() const { return power.size(); }
};

struct TrajectoryPoint {
  std::size_t iteration = 0;
  PowerProfile profile;
  std::vector<double> sinr;
  std::vector<double> utility;
};

struct ParetoProbe {
  double scale = 1.0;
  bool all_improved = false;
  std::vector<double> utility_delta;  // u(scale * p) - u(p), per user
};

struct EquilibriumReport {
  std::vector<TrajectoryPoint> trajectory;
  bool converged = false;
  bool power_limited = false;
  std::size_t iterations = 0;
  double fixed_point_residual = 0.0;
  ParetoProbe pareto;

  const PowerProfile& final_profile() const { return trajectory.back().profile; }
  const TrajectoryPoint& final_point() const { return trajectory.back(); }
};

struct DynamicsOptions {
  double tolerance = 1e-6;
  std::size_t max_iterations = 500;
  // A user pinned at P_max for more than this many consecutive iterations
  // marks the run as power-limited.
  std::size_t power_limit_streak = 50;
  double pareto_scale = 0.99;
};

/// p(0) when none is given: every user silent, so powers ramp up.
std::vector<double> default_initial_powers(const GameConfig& config);

/// Best response of every user to the profile, all computed from the same p.
std::vector<BestResponse> best_response_map(const PowerProfile& profile, const Scenario& scenario,
                                            const CodeBook& codes, const GameConfig& config,
                                            const ReceiverPolicy& policy);

/// max_k |next_k - p_k| / p_k; 0/0 counts as 0 and x/0 as infinity.
double relative_change(const std::vector<double>& from, const std::vector<double>& to);

/// Synchronous iteration p(t) = p~(p(t-1)). Iteration t is recorded only
/// while p(t) is not yet a fixed point to within `tolerance`; the last
/// trajectory entry is the converged profile.
EquilibriumReport run_best_response_dynamics(const Scenario& scenario, const CodeBook& codes,
                                             const GameConfig& config, const ReceiverPolicy& policy,
                                             std::vector<double> initial_powers,
                                             const DynamicsOptions& options = {});

struct EquilibriumCheck {
  double max_power_deviation = 0.0;   // max_k |p~_k - p_k| / p_k
  double max_utility_gain = 0.0;      // max_k (best sampled u - u_k) / u_k
  std::vector<double> power_deviation;
  std::vector<double> utility_gain;
};

/// Recomputes each user's best response with the others held fixed and
/// searches a log-spaced power grid (>= 200 points per receiver) for any
/// profitable unilateral deviation.
EquilibriumCheck verify_equilibrium(const PowerProfile& profile, const Scenario& scenario,
                                    const CodeBook& codes, const GameConfig& config,
                                    const ReceiverPolicy& policy, std::size_t grid_points = 256);

/// Utilities at scale * p with receivers fixed, compared with those at p.
ParetoProbe pareto_probe(const PowerProfile& profile, double scale, const Scenario& scenario,
                         const CodeBook& codes, const GameConfig& config);

/// One row per (t, k): t,k,receiver,power,sinr,utility.
void write_trajectory_csv(std::ostream& out, const EquilibriumReport& report, std::uint64_t seed);

}  // namespace mhgame
