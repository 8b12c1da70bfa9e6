#include "mhgame/montecarlo.hpp"

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "mhgame/error.hpp"
#include "mhgame/parallel.hpp"

namespace mhgame {

SymbolFrame draw_frame(Rng& rng, const CodeBook& codes, std::span<const double> powers,
                       std::span<const double> gains, double noise_power) {
  const Eigen::Index users = static_cast<Eigen::Index>(codes.users());
  const Eigen::Index chips = static_cast<Eigen::Index>(codes.length());
  SymbolFrame frame{Eigen::VectorXd(users), Eigen::VectorXd(chips), Eigen::VectorXd::Zero(chips)};
  for (Eigen::Index j = 0; j < users; ++j) frame.symbols(j) = (rng() >> 63) ? 1.0 : -1.0;
  std::normal_distribution<double> gauss(0.0, std::sqrt(noise_power));
  for (Eigen::Index i = 0; i < chips; ++i) frame.noise(i) = gauss(rng);

  for (Eigen::Index j = 0; j < users; ++j) {
    const double amplitude = std::sqrt(powers[j]) * gains[j];
    if (amplitude != 0.0) frame.received.noalias() += amplitude * frame.symbols(j) * codes.codes().col(j);
  }
  frame.received += frame.noise;
  return frame;
}

namespace {

std::size_t resolve_threads(unsigned threads) { return threads == 0 ? default_thread_count() : threads; }

std::size_t chunk_count(std::size_t items, std::size_t per_chunk) { return (items + per_chunk - 1) / per_chunk; }

// Raw power sums of the interference-plus-noise term.
using MomentSums = std::array<double, 4>;

}  // namespace

SinrEstimate empirical_sinr(ReceiverKind kind, std::size_t k, const CodeBook& codes,
                            std::span<const double> powers, std::span<const double> gains,
                            double noise_power, std::size_t frames, std::uint64_t seed, unsigned threads) {
  if (frames < 1000) throw Error(ErrorCode::InvalidArgument, "need at least 1000 frames");
  const Eigen::VectorXd filter = receiver_filter(kind, k, codes, powers, gains, noise_power).coefficients;
  const double desired_gain = std::sqrt(powers[k]) * gains[k] * filter.dot(codes.codes().col(static_cast<Eigen::Index>(k)));

  const std::size_t chunks = chunk_count(frames, kFramesPerChunk);
  std::vector<MomentSums> partial(chunks, MomentSums{});
  parallel_for(
      chunks,
      [&](std::size_t c) {
        Rng rng = make_rng(seed, Stream::Frames, c);
        const std::size_t count = std::min(kFramesPerChunk, frames - c * kFramesPerChunk);
        MomentSums& sums = partial[c];
        for (std::size_t f = 0; f < count; ++f) {
          const SymbolFrame frame = draw_frame(rng, codes, powers, gains, noise_power);
          const double y = filter.dot(frame.received);
          const double z = y - desired_gain * frame.symbols(static_cast<Eigen::Index>(k));
          const double z2 = z * z;
          sums[0] += z;
          sums[1] += z2;
          sums[2] += z2 * z;
          sums[3] += z2 * z2;
        }
      },
      static_cast<unsigned>(resolve_threads(threads)));

  MomentSums total{};
  for (const MomentSums& s : partial)
    for (std::size_t i = 0; i < total.size(); ++i) total[i] += s[i];

  const double n = static_cast<double>(frames);
  const double mean = total[0] / n;
  const double m2 = total[1] / n - mean * mean;
  const double m4 = total[3] / n - 4.0 * mean * total[2] / n + 6.0 * mean * mean * total[1] / n -
                    3.0 * mean * mean * mean * mean;
  const double variance = m2 * n / (n - 1.0);
  const double variance_se = std::sqrt(std::max(m4 - m2 * m2, 0.0) / n);

  SinrEstimate est;
  est.frames = frames;
  est.sinr = desired_gain * desired_gain / variance;
  est.standard_error = est.sinr * variance_se / variance;
  return est;
}

SinrEstimate empirical_sinr(ReceiverKind kind, std::size_t k, std::span<const double> powers,
                            const Scenario& scenario, const CodeBook& codes, std::size_t frames,
                            std::uint64_t seed, unsigned threads) {
  return empirical_sinr(kind, k, codes, powers, scenario.link_gains(k), scenario.noise_power, frames, seed,
                        threads);
}

PacketEstimate empirical_packet_success(ReceiverKind kind, std::size_t k, const CodeBook& codes,
                                        std::span<const double> powers, std::span<const double> gains,
                                        double noise_power, std::size_t packet_bits, std::size_t packets,
                                        std::uint64_t seed, unsigned threads) {
  if (packets < 1000) throw Error(ErrorCode::InvalidArgument, "need at least 1000 packets");
  if (packet_bits < 1) throw Error(ErrorCode::InvalidArgument, "packets need at least one bit");
  const Eigen::VectorXd filter = receiver_filter(kind, k, codes, powers, gains, noise_power).coefficients;
  const Eigen::Index user = static_cast<Eigen::Index>(k);

  constexpr std::size_t kPacketsPerChunk = 256;
  const std::size_t chunks = chunk_count(packets, kPacketsPerChunk);
  std::vector<std::size_t> successes(chunks, 0);
  parallel_for(
      chunks,
      [&](std::size_t c) {
        Rng rng = make_rng(seed, Stream::Frames, c);
        const std::size_t count = std::min(kPacketsPerChunk, packets - c * kPacketsPerChunk);
        for (std::size_t p = 0; p < count; ++p) {
          bool intact = true;
          for (std::size_t bit = 0; bit < packet_bits; ++bit) {
            const SymbolFrame frame = draw_frame(rng, codes, powers, gains, noise_power);
            const double decision = filter.dot(frame.received) >= 0.0 ? 1.0 : -1.0;
            intact = intact && decision == frame.symbols(user);
          }
          if (intact) ++successes[c];
        }
      },
      static_cast<unsigned>(resolve_threads(threads)));

  std::size_t total = 0;
  for (std::size_t s : successes) total += s;
  PacketEstimate est;
  est.packets = packets;
  est.success_rate = static_cast<double>(total) / static_cast<double>(packets);
  est.standard_error = std::sqrt(est.success_rate * (1.0 - est.success_rate) / static_cast<double>(packets));
  return est;
}

PacketEstimate empirical_packet_success(ReceiverKind kind, std::size_t k, std::span<const double> powers,
                                        const Scenario& scenario, const CodeBook& codes,
                                        std::size_t packet_bits, std::size_t packets, std::uint64_t seed,
                                        unsigned threads) {
  return empirical_packet_success(kind, k, codes, powers, scenario.link_gains(k), scenario.noise_power,
                                  packet_bits, packets, seed, threads);
}

}  // namespace mhgame
