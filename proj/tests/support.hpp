#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "mhgame/receivers.hpp"
#include "mhgame/scenario.hpp"

namespace mhgame::testing {

// Every user transmits straight to the access point, whose gain row is
// `ap_gains`. Other rows hold 1 so the scenario validates.
inline Scenario star_scenario(const std::vector<double>& ap_gains, double noise_power) {
  const std::size_t n = ap_gains.size();
  Scenario s;
  for (std::size_t k = 0; k < n; ++k) s.positions.push_back({1.0 + static_cast<double>(k), 0.0});
  s.next_hop.assign(n, n);
  s.gains = GainMatrix::Ones(static_cast<Eigen::Index>(n + 1), static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < n; ++k) {
    s.gains(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) = 0.0;
    s.gains(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k)) = ap_gains[k];
  }
  s.noise_power = noise_power;
  return s;
}

// Two length-4 codes with cross-correlation 1/2.
inline CodeBook half_correlated_pair() {
  Eigen::MatrixXi chips(4, 2);
  chips << 1, 1, 1, 1, 1, 1, 1, -1;
  return CodeBook(chips);
}

// Random link at one receiver: moderate dynamic range so that the generic
// filter formula stays well conditioned.
struct RandomLink {
  CodeBook codes;
  std::vector<double> powers;
  std::vector<double> gains;
  double noise_power;
};

inline RandomLink random_link(std::mt19937_64& rng, std::size_t users, std::size_t length) {
  std::uniform_real_distribution<double> log_unit(-1.0, 1.0);
  RandomLink link{generate_codes(users, length, rng()), {}, {}, 0.0};
  for (std::size_t j = 0; j < users; ++j) {
    link.powers.push_back(std::pow(10.0, log_unit(rng)));
    link.gains.push_back(std::pow(10.0, 0.5 * log_unit(rng)));
  }
  link.noise_power = std::pow(10.0, log_unit(rng));
  return link;
}

}  // namespace mhgame::testing
