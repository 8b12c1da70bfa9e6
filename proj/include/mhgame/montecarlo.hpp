#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include <Eigen/Dense>

#include "mhgame/receivers.hpp"
#include "mhgame/rng.hpp"
#include "mhgame/scenario.hpp"

namespace mhgame {

/// One chip-rate symbol interval at a receiver:
/// r = sum_j sqrt(p_j) h_j b_j s_j + w.
struct SymbolFrame {
  Eigen::VectorXd symbols;   // b, entries +-1
  Eigen::VectorXd noise;     // w, i.i.d. N(0, sigma^2) per chip
  Eigen::VectorXd received;  // r
};

SymbolFrame draw_frame(Rng& rng, const CodeBook& codes, std::span<const double> powers,
                       std::span<const double> gains, double noise_power);

struct SinrEstimate {
  double sinr = 0.0;
  double standard_error = 0.0;
  std::size_t frames = 0;
};

struct PacketEstimate {
  double success_rate = 0.0;
  double standard_error = 0.0;
  std::size_t packets = 0;
};

/// Frames are simulated in fixed-size chunks, each with its own derived
/// seed, and reduced in chunk order: the result depends only on the seed
/// and frame count, never on the worker count.
inline constexpr std::size_t kFramesPerChunk = 4096;

/// SINR at the output of the receiver's filter, estimated as the (known)
/// desired-term power over the sample variance of interference plus noise.
SinrEstimate empirical_sinr(ReceiverKind kind, std::size_t k, const CodeBook& codes,
                            std::span<const double> powers, std::span<const double> gains,
                            double noise_power, std::size_t frames, std::uint64_t seed,
                            unsigned threads = 0);

SinrEstimate empirical_sinr(ReceiverKind kind, std::size_t k, std::span<const double> powers,
                            const Scenario& scenario, const CodeBook& codes, std::size_t frames,
                            std::uint64_t seed, unsigned threads = 0);

/// Fraction of M-bit packets whose hard decisions sign(y) are all correct.
PacketEstimate empirical_packet_success(ReceiverKind kind, std::size_t k, const CodeBook& codes,
                                        std::span<const double> powers, std::span<const double> gains,
                                        double noise_power, std::size_t packet_bits, std::size_t packets,
                                        std::uint64_t seed, unsigned threads = 0);

PacketEstimate empirical_packet_success(ReceiverKind kind, std::size_t k, std::span<const double> powers,
                                        const Scenario& scenario, const CodeBook& codes,
                                        std::size_t packet_bits, std::size_t packets, std::uint64_t seed,
                                        unsigned threads = 0);

}  // namespace mhgame
