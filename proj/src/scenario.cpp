#include "mhgame/scenario.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "mhgame/error.hpp"
#include "mhgame/rng.hpp"

namespace mhgame {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::ReceiverUnavailable: return "receiver-unavailable";
    case ErrorCode::SingularMatrix: return "singular-matrix";
    case ErrorCode::UndefinedUtility: return "undefined-utility";
    case ErrorCode::NumericFailure: return "numeric-failure";
    case ErrorCode::NoViableTransmission: return "no-viable-transmission";
  }
  return "unknown";
}

double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

std::span<const double> Scenario::link_gains(std::size_t k) const {
  if (k >= users()) throw Error(ErrorCode::InvalidArgument, "user index out of range");
  const NodeIndex m = next_hop[k];
  return {gains.data() + m * users(), users()};
}

std::size_t Scenario::hops_to_access_point(std::size_t k) const {
  std::size_t hops = 0;
  NodeIndex at = k;
  while (!is_access_point(at)) {
    at = next_hop.at(at);
    if (++hops > users()) throw Error(ErrorCode::InvalidArgument, "routing cycle");
  }
  return hops;
}

GameConfig GameConfig::defaults(std::size_t users, double q) {
  GameConfig c;
  c.users = users;
  c.operating_power.assign(users, q);
  return c;
}

void GameConfig::validate() const {
  if (users < 1) throw Error(ErrorCode::InvalidArgument, "K must be at least 1");
  if (processing_gain < 1) throw Error(ErrorCode::InvalidArgument, "N must be at least 1");
  if (!(info_bits > 0) || info_bits > packet_bits)
    throw Error(ErrorCode::InvalidArgument, "need 0 < L <= M");
  if (!(rate > 0)) throw Error(ErrorCode::InvalidArgument, "rate must be positive");
  if (!(max_power > 0)) throw Error(ErrorCode::InvalidArgument, "P_max must be positive");
  if (!(efficiency_exponent > 1))
    throw Error(ErrorCode::InvalidArgument, "efficiency exponent must exceed 1");
  if (operating_power.size() != users)
    throw Error(ErrorCode::InvalidArgument, "one operating power per user required");
  const auto check_powers = [](const std::vector<double>& qs) {
    for (double q : qs)
      if (!(q >= 0) || !std::isfinite(q))
        throw Error(ErrorCode::InvalidArgument, "operating power must be finite and >= 0");
  };
  check_powers(operating_power);
  for (const auto& per_receiver : receiver_operating_power) {
    if (!per_receiver.empty() && per_receiver.size() != users)
      throw Error(ErrorCode::InvalidArgument, "per-receiver operating powers need one entry per user");
    check_powers(per_receiver);
  }
}

double joules_per_packet_to_watts(double joules, double packet_bits, double rate) {
  if (!(packet_bits > 0) || !(rate > 0))
    throw Error(ErrorCode::InvalidArgument, "packet length and rate must be positive");
  return joules * rate / packet_bits;
}

double placement_side_km(std::size_t users) { return std::sqrt(100.0 * static_cast<double>(users)); }

Topology generate_topology(std::size_t users, std::uint64_t seed, double min_separation_km) {
  if (users == 0) throw Error(ErrorCode::InvalidArgument, "K must be at least 1");
  Topology topo;
  topo.side = placement_side_km(users);
  const double half = topo.side / 2.0;
  Rng rng = make_rng(seed, Stream::Placement);
  std::uniform_real_distribution<double> coord(-half, half);

  topo.positions.reserve(users);
  while (topo.positions.size() < users) {
    const Point p{coord(rng), coord(rng)};
    bool too_close = distance(p, topo.access_point) < min_separation_km;
    for (const Point& other : topo.positions) too_close = too_close || distance(p, other) < min_separation_km;
    if (!too_close) topo.positions.push_back(p);
  }
  return topo;
}

std::vector<NodeIndex> compute_routing(std::span<const Point> positions, const Point& access_point) {
  const std::size_t n = positions.size();
  std::vector<NodeIndex> next(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const double own = distance(positions[k], access_point);
    double best = distance(positions[k], access_point);
    NodeIndex choice = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == k || !(distance(positions[j], access_point) < own)) continue;
      const double d = distance(positions[j], positions[k]);
      // Ties keep the lower index; the access point (index K) loses every tie.
      if (d < best || (d == best && choice == n)) {
        best = d;
        choice = j;
      }
    }
    next[k] = choice;
  }
  return next;
}

double rayleigh_mean_gain(double distance_km) {
  if (!(distance_km > 0))
    throw Error(ErrorCode::InvalidArgument, "coincident transmitter and receiver");
  return 0.3 / (distance_km * distance_km);
}

namespace {

double draw_rayleigh(Rng& rng, double mean) {
  const double scale = mean / std::sqrt(std::numbers::pi / 2.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double u = 0.0;
  while (u == 0.0) u = unit(rng);
  return scale * std::sqrt(-2.0 * std::log(u));
}

}  // namespace

GainMatrix sample_channel_gains(std::span<const Point> positions, const Point& access_point,
                                std::uint64_t seed) {
  const std::size_t n = positions.size();
  GainMatrix g(n + 1, n);
  g.setZero();
  Rng rng = make_rng(seed, Stream::Fading);
  for (std::size_t m = 0; m <= n; ++m) {
    const Point& rx = m == n ? access_point : positions[m];
    for (std::size_t j = 0; j < n; ++j) {
      if (j == m) continue;
      g(m, j) = draw_rayleigh(rng, rayleigh_mean_gain(distance(positions[j], rx)));
    }
  }
  return g;
}

std::vector<double> sample_rayleigh(double distance_km, std::size_t count, std::uint64_t seed) {
  const double mean = rayleigh_mean_gain(distance_km);
  Rng rng = make_rng(seed, Stream::Fading);
  std::vector<double> out(count);
  for (double& h : out) h = draw_rayleigh(rng, mean);
  return out;
}

Scenario make_scenario(std::size_t users, std::uint64_t seed, double noise_power) {
  Topology topo = generate_topology(users, seed);
  Scenario s;
  s.positions = std::move(topo.positions);
  s.access_point = topo.access_point;
  s.next_hop = compute_routing(s.positions, s.access_point);
  s.gains = sample_channel_gains(s.positions, s.access_point, seed);
  s.noise_power = noise_power;
  s.seed = seed;
  return s;
}

void validate(const Scenario& s) {
  const std::size_t n = s.users();
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "scenario has no users");
  if (s.next_hop.size() != n) throw Error(ErrorCode::InvalidArgument, "next_hop size mismatch");
  if (static_cast<std::size_t>(s.gains.rows()) != n + 1 || static_cast<std::size_t>(s.gains.cols()) != n)
    throw Error(ErrorCode::InvalidArgument, "gain matrix must be (K+1) x K");
  if (!(s.noise_power >= 0)) throw Error(ErrorCode::InvalidArgument, "noise power must be >= 0");
  for (std::size_t k = 0; k < n; ++k) {
    if (s.next_hop[k] == k || s.next_hop[k] > n)
      throw Error(ErrorCode::InvalidArgument, "invalid next hop for node " + std::to_string(k));
    s.hops_to_access_point(k);
  }
  for (std::size_t m = 0; m <= n; ++m)
    for (std::size_t j = 0; j < n; ++j) {
      const double h = s.gains(m, j);
      if (m == j ? h != 0.0 : !(h > 0) || !std::isfinite(h))
        throw Error(ErrorCode::InvalidArgument, "gain entry out of range");
    }
}

}  // namespace mhgame
