#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "mhgame/error.hpp"
#include "mhgame/game.hpp"
#include "support.hpp"

using namespace mhgame;
using mhgame::testing::star_scenario;

namespace {

// Plain bisection on the unrearranged condition f'(g)(g + c) - f(g) over
// [ln M, hi], written independently of the library's log-form solver.
double bisection_oracle(double c, double m) {
  auto h = [&](double g) {
    const double e = std::exp(-g);
    const double f = std::pow(1 - e, m);
    const double fp = m * e * std::pow(1 - e, m - 1);
    return fp * (g + c) - f;
  };
  double lo = std::log(m), hi = 20.0;
  while (h(hi) > 0) hi *= 2;
  for (int i = 0; i < 200 && hi - lo > 1e-13; ++i) {
    const double mid = 0.5 * (lo + hi);
    (h(mid) > 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("efficiency function endpoints and values") {
  const EfficiencyFunction f(100);
  CHECK(f(0.0) == 0.0);
  CHECK(f(60.0) == doctest::Approx(1.0).epsilon(1e-15));
  // (1 - e^{-6.48})^100 in 40-digit arithmetic
  CHECK(f(6.48) == doctest::Approx(0.8577017787641005).epsilon(1e-13));
  CHECK_THROWS_AS(f(-1e-3), Error);
  CHECK_THROWS_AS(EfficiencyFunction(1.0), Error);
}

TEST_CASE("efficiency derivative matches central differences") {
  const EfficiencyFunction f(100);
  for (double g : {0.5, 2.0, 4.6, 6.47, 10.0, 15.0}) {
    const double h = 1e-5 * g;
    const double fd = (f(g + h) - f(g - h)) / (2 * h);
    CHECK(std::abs(fd - f.derivative(g)) <= 1e-6 * f.derivative(g));
    const double fd2 = (f.derivative(g + h) - f.derivative(g - h)) / (2 * h);
    CHECK(std::abs(fd2 - f.second_derivative(g)) <= 1e-5 * (f.derivative(g) + std::abs(f.second_derivative(g))));
  }
}

TEST_CASE("inflection point at ln M") {
  const EfficiencyFunction f(100);
  CHECK(f.inflection() == doctest::Approx(4.605170185988091));
  CHECK(f.second_derivative(f.inflection() - 1e-3) > 0);
  CHECK(f.second_derivative(f.inflection() + 1e-3) < 0);
}

TEST_CASE("target SINR solver") {
  const EfficiencyFunction f(100);
  const double root = solve_target_sinr(1.0, 0.0, f);
  CHECK(std::abs(root - bisection_oracle(0.0, 100)) < 1e-6);
  CHECK(root == doctest::Approx(6.4746003795893581).epsilon(1e-12));
  CHECK(root > f.inflection());

  const double with_q = solve_target_sinr(1.0, 1.0, f);
  CHECK(std::abs(with_q - bisection_oracle(1.0, 100)) < 1e-6);
  CHECK(with_q == doctest::Approx(6.63985716202097).epsilon(1e-10));
  CHECK(with_q > root);

  double previous = 0;
  for (double e = -3; e <= 3; e += 0.05) {
    const double g = solve_target_sinr(1.0, std::pow(10.0, e), f);
    CHECK(g >= previous);
    previous = g;
  }
}

TEST_CASE("utility") {
  const GameConfig config = GameConfig::defaults(1, 0.01);
  CHECK(utility(0.0, 1.0, 0.01, config) == 0.0);
  CHECK(utility(80.0, 0.5, 0.5, config) == doctest::Approx(1e5));
  CHECK_THROWS_AS(utility(1.0, 0.0, 0.0, config), Error);
}

TEST_CASE("best response power for a unit-gain single user") {
  const Scenario s = star_scenario({1.0}, 1.0);
  const CodeBook codes = generate_codes(1, 8, 1);
  GameConfig config = GameConfig::defaults(1, 0.0);
  config.max_power = std::numeric_limits<double>::max();
  const std::vector<double> p{0.0};

  const BestResponse br = best_response_power(0, ReceiverKind::MF, p, s, codes, config);
  CHECK(br.gain == doctest::Approx(1.0));
  CHECK(br.power == doctest::Approx(bisection_oracle(0.0, 100)).epsilon(1e-9));
  CHECK_FALSE(br.clamped);

  config.max_power = 2.0;
  const BestResponse clamped = best_response_power(0, ReceiverKind::MF, p, s, codes, config);
  CHECK(clamped.power == 2.0);
  CHECK(clamped.clamped);
}

TEST_CASE("zero channel gain has no viable transmission") {
  Scenario s = star_scenario({1.0, 1.0}, 1.0);
  s.gains(2, 0) = 0.0;
  const CodeBook codes = generate_codes(2, 8, 1);
  const GameConfig config = GameConfig::defaults(2, 0.01);
  const std::vector<double> p{1.0, 1.0};
  try {
    best_response_power(0, ReceiverKind::MF, p, s, codes, config);
    FAIL("expected no-viable-transmission");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoViableTransmission);
  }
}

TEST_CASE("best response maximizes utility and satisfies the first-order condition") {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Scenario s = star_scenario({0.8, 0.3, 1.2, 0.5, 0.9}, 0.05);
  const CodeBook codes = generate_codes(5, 16, 7);
  for (double q : {0.0, 0.01, 1.0}) {
    const GameConfig config = GameConfig::defaults(5, q);
    const EfficiencyFunction f(config.efficiency_exponent);
    std::vector<double> p(5);
    for (double& x : p) x = unit(rng);
    for (ReceiverKind kind : kReceiverPreference) {
      for (std::size_t k = 0; k < 5; ++k) {
        const BestResponse br = best_response_power(k, kind, p, s, codes, config);
        REQUIRE_FALSE(br.clamped);
        const double g = br.gain;
        const double gamma = br.sinr;
        CHECK(br.power > f.inflection() / g);
        // first-order condition
        const double residual = f.derivative(gamma) * (gamma + q * g) - f(gamma);
        CHECK(std::abs(residual) < 1e-9);
        // derivative of utility in own power vanishes
        auto u = [&](double power) { return utility(power * g, power, q, config); };
        const double h = 1e-6 * br.power;
        const double slope = (u(br.power + h) - u(br.power - h)) / (2 * h);
        CHECK(std::abs(slope) * br.power < 1e-5 * br.utility);
        // unimodal: increasing below, decreasing above
        double last = 0;
        bool descending = false;
        for (int i = 1; i <= 400; ++i) {
          const double power = br.power * std::pow(10.0, -2 + 4.0 * i / 400);
          const double v = u(power);
          if (v < last) descending = true;
          else if (descending) CHECK(v <= last);
          last = v;
          CHECK(v <= br.utility * (1 + 1e-12));
        }
      }
    }
  }
}

TEST_CASE("receiver choice") {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> unit(0.1, 1.0);
  const Scenario s = star_scenario({0.8, 0.3, 1.2, 0.5, 0.9, 0.4}, 0.1);
  const CodeBook codes = generate_codes(6, 16, 3);
  const GameConfig config = GameConfig::defaults(6, 0.01);

  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> p(6);
    for (double& x : p) x = unit(rng);
    for (std::size_t k = 0; k < 6; ++k) {
      const BestResponse free = best_response_strategy(k, p, s, codes, config, ReceiverPolicy::free_choice());
      CHECK(free.receiver == ReceiverKind::MMSE);
      const BestResponse mf = best_response_strategy(k, p, s, codes, config, ReceiverPolicy::fixed(ReceiverKind::MF));
      const BestResponse direct = best_response_power(k, ReceiverKind::MF, p, s, codes, config);
      CHECK(mf.receiver == ReceiverKind::MF);
      CHECK(mf.power == direct.power);
      CHECK(mf.utility == direct.utility);
    }
  }

  SUBCASE("a lone user ties and picks MMSE") {
    const Scenario one = star_scenario({1.0}, 1.0);
    const CodeBook c = generate_codes(1, 8, 2);
    const std::vector<double> p{1.0};
    const GameConfig cfg = GameConfig::defaults(1, 0.01);
    CHECK(best_response_strategy(0, p, one, c, cfg, ReceiverPolicy::free_choice()).receiver == ReceiverKind::MMSE);
    const ReceiverPolicy no_mmse{{ReceiverKind::MF, ReceiverKind::DE}};
    CHECK(best_response_strategy(0, p, one, c, cfg, no_mmse).receiver == ReceiverKind::DE);
  }

  SUBCASE("free choice skips an unavailable decorrelator") {
    const Scenario crowded = star_scenario(std::vector<double>(10, 1.0), 0.1);
    const CodeBook c = generate_codes(10, 8, 2);
    const std::vector<double> p(10, 0.5);
    const GameConfig cfg = GameConfig::defaults(10, 0.01);
    CHECK(best_response_strategy(0, p, crowded, c, cfg, ReceiverPolicy::free_choice()).receiver == ReceiverKind::MMSE);
    CHECK_THROWS_AS(best_response_strategy(0, p, crowded, c, cfg, ReceiverPolicy::fixed(ReceiverKind::DE)), Error);
  }
}

TEST_CASE("best response is not monotone in other users' powers") {
  // Reported only: for the matched filter the best response grows with
  // interference, for the decorrelator it does not move at all.
  const Scenario s = star_scenario({1.0, 1.0}, 0.1);
  const CodeBook codes = generate_codes(2, 8, 5);
  const GameConfig config = GameConfig::defaults(2, 0.01);
  std::size_t decreases = 0;
  double last = 0;
  for (int i = 0; i < 50; ++i) {
    const std::vector<double> p{1.0, 0.01 * std::pow(1.2, i)};
    const double br = best_response_power(0, ReceiverKind::MF, p, s, codes, config).power;
    if (br < last) ++decreases;
    last = br;
  }
  MESSAGE("MF best-response decreases as interference grows: " << decreases);
  const std::vector<double> a{1.0, 0.1}, b{1.0, 10.0};
  CHECK(best_response_power(0, ReceiverKind::DE, a, s, codes, config).power ==
        doctest::Approx(best_response_power(0, ReceiverKind::DE, b, s, codes, config).power));
}
