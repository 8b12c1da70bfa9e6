#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mhgame/receivers.hpp"
#include "mhgame/scenario.hpp"

namespace mhgame {

/// Sigmoidal packet-success approximation f(gamma) = (1 - e^{-gamma})^M.
class EfficiencyFunction {
 public:
  explicit EfficiencyFunction(double exponent);

  double exponent() const { return exponent_; }
  double operator()(double gamma) const { return value(gamma); }
  double value(double gamma) const;
  double derivative(double gamma) const;
  double second_derivative(double gamma) const;
  /// gamma_0 = ln M: convex below, concave above.
  double inflection() const;

 private:
  double exponent_;
};

struct Strategy {
  double power = 0.0;
  ReceiverKind receiver = ReceiverKind::MMSE;
};

/// Which receivers a user may pick. A single entry pins the receiver.
struct ReceiverPolicy {
  std::vector<ReceiverKind> allowed;

  static ReceiverPolicy fixed(ReceiverKind kind) { return {{kind}}; }
  static ReceiverPolicy free_choice() { return {{ReceiverKind::MF, ReceiverKind::DE, ReceiverKind::MMSE}}; }
  bool is_fixed() const { return allowed.size() == 1; }
  bool allows(ReceiverKind kind) const;
  /// First allowed receiver in MMSE > DE > MF preference order.
  ReceiverKind preferred() const;
};

/// q_k for the given receiver, honoring per-receiver overrides.
double operating_power(const GameConfig& config, std::size_t k, ReceiverKind kind);

/// Bits per Joule: (L/M) R f(gamma) / (p + q).
double utility(double gamma, double power, double operating_power, const GameConfig& config);

/// Unique root gamma* > gamma_0 of f'(gamma) (gamma + q g) = f(gamma), the
/// first-order condition of max_p f(p g) / (p + q). With q g = 0 this is the
/// root of gamma f'(gamma) = f(gamma).
double solve_target_sinr(double gain, double operating_power, const EfficiencyFunction& f);

struct BestResponse {
  double power = 0.0;          // p~, clamped to [0, P_max]
  double target_sinr = 0.0;    // gamma* before clamping
  double gain = 0.0;           // g_k
  double sinr = 0.0;           // p~ * g_k
  double utility = 0.0;
  bool clamped = false;
  ReceiverKind receiver = ReceiverKind::MMSE;
};

/// Power vector as seen at user k's receiver: gains row of m(k). The
/// receiving node's own power does not matter because its gain entry is 0.
BestResponse best_response_power(std::size_t k, ReceiverKind kind, std::span<const double> powers,
                                 const Scenario& scenario, const CodeBook& codes, const GameConfig& config);

/// Best (receiver, power) pair over the allowed receivers; ties within 1e-12
/// relative resolve MMSE > DE > MF.
BestResponse best_response_strategy(std::size_t k, std::span<const double> powers, const Scenario& scenario,
                                    const CodeBook& codes, const GameConfig& config,
                                    const ReceiverPolicy& policy);

/// SINR and utility of user k under the given profile.
double link_sinr(std::size_t k, ReceiverKind kind, std::span<const double> powers, const Scenario& scenario,
                 const CodeBook& codes);
double link_utility(std::size_t k, ReceiverKind kind, std::span<const double> powers,
                    const Scenario& scenario, const CodeBook& codes, const GameConfig& config);

}  // namespace mhgame
