#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mhgame {

struct Point {
  double x = 0.0;  // km
  double y = 0.0;  // km

  friend bool operator==(const Point&, const Point&) = default;
};

double distance(const Point& a, const Point& b);

// Node indices run 0..K-1; index K denotes the access point.
using NodeIndex = std::size_t;

using GainMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// The physical world of one experiment: placement, routing and fading.
///
/// `gains(m, j)` is the amplitude gain h_j^{(m)} from transmitter j to
/// receiver m, where m ranges over the K nodes plus the access point (row
/// K). Diagonal entries `gains(m, m)` are zero: a receiving node's own
/// transmission never reaches its own receiver.
struct Scenario {
  std::vector<Point> positions;
  Point access_point;
  std::vector<NodeIndex> next_hop;
  GainMatrix gains;
  double noise_power = 5e-16;  // W
  std::uint64_t seed = 0;

  std::size_t users() const { return positions.size(); }
  NodeIndex access_point_index() const { return positions.size(); }
  bool is_access_point(NodeIndex m) const { return m == positions.size(); }

  /// Gains of every transmitter as seen by user k's receiver m(k).
  std::span<const double> link_gains(std::size_t k) const;

  /// Number of hops from node k to the access point.
  std::size_t hops_to_access_point(std::size_t k) const;
};

/// Per-user, per-receiver-independent game parameters.
struct GameConfig {
  std::size_t users = 1;             // K
  std::size_t processing_gain = 32;  // N
  double info_bits = 100;            // L
  double packet_bits = 100;          // M
  double rate = 1e5;                 // R, bits/s
  std::vector<double> operating_power;  // q_k, W
  double max_power = 100.0;             // P_max, W
  double efficiency_exponent = 100;     // exponent of f
  // Optional per-receiver operating powers, indexed by receiver kind
  // (MF, DE, MMSE). An empty entry falls back to operating_power.
  std::array<std::vector<double>, 3> receiver_operating_power;

  static GameConfig defaults(std::size_t users, double q);
  void validate() const;
};

/// Converts a per-packet energy in Joules into an average power in Watts
/// given the packet length and transmission rate.
double joules_per_packet_to_watts(double joules, double packet_bits, double rate);

struct Topology {
  std::vector<Point> positions;
  Point access_point;
  double side = 0.0;  // km
};

/// Side of the placement square, sqrt(100 K) km.
double placement_side_km(std::size_t users);

/// Uniform i.i.d. placement in a square of area 100 K km^2 centered on the
/// access point at the origin. Placements within `min_separation_km` of
/// another node or the access point are redrawn.
Topology generate_topology(std::size_t users, std::uint64_t seed, double min_separation_km = 1e-3);

/// Each node forwards to the nearest node strictly closer to the access
/// point, or to the access point when that is nearest. Ties go to the
/// lower node index.
std::vector<NodeIndex> compute_routing(std::span<const Point> positions, const Point& access_point);

/// Rayleigh amplitude gain with mean 0.3 d^-2 (d in km).
double rayleigh_mean_gain(double distance_km);

/// Full (K+1) x K gain matrix; row K is the access point. Diagonal is zero.
GainMatrix sample_channel_gains(std::span<const Point> positions, const Point& access_point,
                                     std::uint64_t seed);

/// Draws `count` Rayleigh amplitudes for a single distance from the fading stream.
std::vector<double> sample_rayleigh(double distance_km, std::size_t count, std::uint64_t seed);

Scenario make_scenario(std::size_t users, std::uint64_t seed, double noise_power = 5e-16);

/// Throws Error(InvalidArgument) when any structural invariant is violated.
void validate(const Scenario& scenario);

}  // namespace mhgame
