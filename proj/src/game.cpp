#include "mhgame/game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "mhgame/error.hpp"

namespace mhgame {

EfficiencyFunction::EfficiencyFunction(double exponent) : exponent_(exponent) {
  if (!(exponent > 1) || !std::isfinite(exponent))
    throw Error(ErrorCode::InvalidArgument, "efficiency exponent must be finite and exceed 1");
}

namespace {

void check_sinr(double gamma) {
  if (!(gamma >= 0)) throw Error(ErrorCode::InvalidArgument, "SINR must be >= 0");
}

// log(1 - e^{-gamma}), accurate for both small and large gamma.
double log_success(double gamma) { return std::log1p(-std::exp(-gamma)); }

}  // namespace

double EfficiencyFunction::value(double gamma) const {
  check_sinr(gamma);
  return std::exp(exponent_ * log_success(gamma));
}

double EfficiencyFunction::derivative(double gamma) const {
  check_sinr(gamma);
  return exponent_ * std::exp(-gamma + (exponent_ - 1.0) * log_success(gamma));
}

double EfficiencyFunction::second_derivative(double gamma) const {
  check_sinr(gamma);
  const double tail = std::exp(-gamma);
  const double base = exponent_ * std::exp(-gamma + (exponent_ - 2.0) * log_success(gamma));
  return base * ((exponent_ - 1.0) * tail + std::expm1(-gamma));
}

double EfficiencyFunction::inflection() const { return std::log(exponent_); }

bool ReceiverPolicy::allows(ReceiverKind kind) const {
  return std::find(allowed.begin(), allowed.end(), kind) != allowed.end();
}

ReceiverKind ReceiverPolicy::preferred() const {
  for (ReceiverKind kind : kReceiverPreference)
    if (allows(kind)) return kind;
  throw Error(ErrorCode::InvalidArgument, "receiver policy allows no receiver");
}

double operating_power(const GameConfig& config, std::size_t k, ReceiverKind kind) {
  const auto& per_receiver = config.receiver_operating_power[static_cast<std::size_t>(kind)];
  return per_receiver.empty() ? config.operating_power.at(k) : per_receiver.at(k);
}

double utility(double gamma, double power, double operating_power, const GameConfig& config) {
  if (!(power + operating_power > 0))
    throw Error(ErrorCode::UndefinedUtility, "p + q must be positive");
  const EfficiencyFunction f(config.efficiency_exponent);
  return config.info_bits / config.packet_bits * config.rate * f(gamma) / (power + operating_power);
}

double solve_target_sinr(double gain, double operating_power, const EfficiencyFunction& f) {
  if (!(gain > 0) || !std::isfinite(gain)) throw Error(ErrorCode::InvalidArgument, "gain factor must be positive");
  if (!(operating_power >= 0)) throw Error(ErrorCode::InvalidArgument, "operating power must be >= 0");
  const double offset = operating_power * gain;
  if (!std::isfinite(offset)) throw Error(ErrorCode::NumericFailure, "q * g overflows");

  // Dividing the condition by f and taking logs:
  //   log M + log(gamma + q g) - log(e^gamma - 1) = 0,
  // positive at the inflection point and decreasing beyond it.
  const double log_m = std::log(f.exponent());
  const auto residual = [&](double gamma) { return log_m + std::log(gamma + offset) - std::log(std::expm1(gamma)); };
  const auto slope = [&](double gamma) { return 1.0 / (gamma + offset) + 1.0 / std::expm1(-gamma); };

  double lo = f.inflection();
  double hi = 2.0 * lo;
  for (int i = 0; residual(hi) > 0; ++i) {
    if (i > 64)
      throw Error(ErrorCode::NumericFailure,
                  "no sign change in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    lo = hi;
    hi *= 2.0;
  }
  for (int i = 0; i < 200 && hi - lo > 1e-14 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (residual(mid) > 0 ? lo : hi) = mid;
  }
  double gamma = 0.5 * (lo + hi);
  const double polished = gamma - residual(gamma) / slope(gamma);
  if (polished >= lo && polished <= hi) gamma = polished;
  if (!std::isfinite(gamma) || hi - lo > 1e-9)
    throw Error(ErrorCode::NumericFailure,
                "bisection stalled in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return gamma;
}

double link_sinr(std::size_t k, ReceiverKind kind, std::span<const double> powers, const Scenario& scenario,
                 const CodeBook& codes) {
  return sinr(kind, k, codes, powers, scenario.link_gains(k), scenario.noise_power);
}

double link_utility(std::size_t k, ReceiverKind kind, std::span<const double> powers,
                    const Scenario& scenario, const CodeBook& codes, const GameConfig& config) {
  return utility(link_sinr(k, kind, powers, scenario, codes), powers[k], operating_power(config, k, kind),
                 config);
}

BestResponse best_response_power(std::size_t k, ReceiverKind kind, std::span<const double> powers,
                                 const Scenario& scenario, const CodeBook& codes, const GameConfig& config) {
  const double g = gain_factor(kind, k, codes, powers, scenario.link_gains(k), scenario.noise_power);
  if (!(g > 0) || !std::isfinite(g))
    throw Error(ErrorCode::NoViableTransmission, "user " + std::to_string(k) + " has no usable channel");
  const double q = operating_power(config, k, kind);
  const EfficiencyFunction f(config.efficiency_exponent);

  BestResponse br;
  br.receiver = kind;
  br.gain = g;
  br.target_sinr = solve_target_sinr(g, q, f);
  br.power = br.target_sinr / g;
  if (br.power > config.max_power) {
    br.power = config.max_power;
    br.clamped = true;
  }
  br.sinr = br.power * g;
  br.utility = utility(br.sinr, br.power, q, config);
  return br;
}

BestResponse best_response_strategy(std::size_t k, std::span<const double> powers, const Scenario& scenario,
                                    const CodeBook& codes, const GameConfig& config,
                                    const ReceiverPolicy& policy) {
  std::optional<BestResponse> best;
  for (ReceiverKind kind : kReceiverPreference) {
    if (!policy.allows(kind)) continue;
    if (kind == ReceiverKind::DE && !codes.decorrelator_available() && !policy.is_fixed()) continue;
    BestResponse candidate = best_response_power(k, kind, powers, scenario, codes, config);
    if (!best || candidate.utility > best->utility * (1.0 + 1e-12)) best = candidate;
  }
  if (!best) throw Error(ErrorCode::ReceiverUnavailable, "no allowed receiver is available");
  return *best;
}

}  // namespace mhgame
