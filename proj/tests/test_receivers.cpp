#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "mhgame/error.hpp"
#include "mhgame/receivers.hpp"
#include "support.hpp"

using namespace mhgame;
using mhgame::testing::half_correlated_pair;
using mhgame::testing::random_link;

namespace {

// Independent MMSE reference: s^T A^{-1} s with A built explicitly and a
// full-pivot LU solve.
double mmse_reference(std::size_t k, const CodeBook& codes, const std::vector<double>& p,
                      const std::vector<double>& h, double noise) {
  const auto n = static_cast<Eigen::Index>(codes.length());
  Eigen::MatrixXd a = noise * Eigen::MatrixXd::Identity(n, n);
  for (std::size_t j = 0; j < codes.users(); ++j)
    if (j != k) a += p[j] * h[j] * h[j] * codes.code(j) * codes.code(j).transpose();
  const Eigen::VectorXd s = codes.code(k);
  return p[k] * h[k] * h[k] * s.dot(a.fullPivLu().solve(s));
}

}  // namespace

TEST_CASE("two-user hand instance") {
  const CodeBook codes = half_correlated_pair();
  CHECK(codes.rho(0, 1) == doctest::Approx(0.5));
  const std::vector<double> p{2.0, 4.0};
  const std::vector<double> h{1.0, 0.5};

  CHECK(std::abs(sinr(ReceiverKind::MF, 0, codes, p, h, 1.0) - 1.6) < 1e-10);
  CHECK(std::abs(sinr(ReceiverKind::DE, 0, codes, p, h, 1.0) - 1.5) < 1e-10);
  CHECK(std::abs(sinr(ReceiverKind::MMSE, 0, codes, p, h, 1.0) - 1.75) < 1e-10);

  SUBCASE("decorrelator filter") {
    const Eigen::VectorXd c = receiver_filter(ReceiverKind::DE, 0, codes, p, h, 1.0).coefficients;
    const Eigen::VectorXd expected = (codes.code(0) - 0.5 * codes.code(1)) / 0.75;
    CHECK((c - expected).norm() < 1e-12);
    CHECK(c.squaredNorm() == doctest::Approx(4.0 / 3.0));
    CHECK(std::abs(c.dot(codes.code(1))) < 1e-12);
  }
}

TEST_CASE("orthogonal codes: decorrelator equals the matched filter") {
  Eigen::MatrixXi chips(4, 2);
  chips << 1, 1, 1, -1, 1, 1, 1, -1;
  const CodeBook codes(chips);
  CHECK(codes.rho(0, 1) == 0.0);
  const std::vector<double> p{1.0, 3.0};
  const std::vector<double> h{0.7, 1.1};
  for (std::size_t k = 0; k < 2; ++k) {
    const Eigen::VectorXd c = receiver_filter(ReceiverKind::DE, k, codes, p, h, 0.2).coefficients;
    CHECK((c - codes.code(k)).norm() < 1e-12);
    const double mf = sinr(ReceiverKind::MF, k, codes, p, h, 0.2);
    CHECK(sinr(ReceiverKind::DE, k, codes, p, h, 0.2) == doctest::Approx(mf).epsilon(1e-12));
    CHECK(sinr(ReceiverKind::MMSE, k, codes, p, h, 0.2) == doctest::Approx(mf).epsilon(1e-12));
  }
}

TEST_CASE("MMSE with silent interferers is a matched filter") {
  const CodeBook codes = generate_codes(5, 16, 3);
  const std::vector<double> p{2.0, 0.0, 0.0, 0.0, 0.0};
  const std::vector<double> h{1.0, 1.0, 1.0, 1.0, 1.0};
  const Eigen::VectorXd c = receiver_filter(ReceiverKind::MMSE, 0, codes, p, h, 0.5).coefficients;
  const Eigen::VectorXd s = codes.code(0);
  CHECK((c - c.dot(s) * s).norm() < 1e-12 * c.norm());
}

TEST_CASE("single user: every receiver gives p h^2 / sigma^2") {
  const CodeBook codes = generate_codes(1, 8, 1);
  const std::vector<double> p{1.0};
  const std::vector<double> h{1.0};
  for (ReceiverKind kind : kReceiverPreference) {
    CHECK(sinr(kind, 0, codes, p, h, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
  }
  const std::vector<double> h2{2.0};
  for (ReceiverKind kind : kReceiverPreference) {
    CHECK(gain_factor(kind, 0, codes, p, h2, 1.0) == doctest::Approx(4.0).epsilon(1e-12));
  }
}

TEST_CASE("closed forms agree with the generic filter formula") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t users = 2 + static_cast<std::size_t>(rng() % 10);
    const auto link = random_link(rng, users, 16);
    for (std::size_t k = 0; k < users; ++k) {
      for (ReceiverKind kind : kReceiverPreference) {
        if (kind == ReceiverKind::DE && !link.codes.decorrelator_available()) continue;
        const Eigen::VectorXd c =
            receiver_filter(kind, k, link.codes, link.powers, link.gains, link.noise_power).coefficients;
        const double generic = filter_sinr(c, k, link.codes, link.powers, link.gains, link.noise_power);
        const double closed = sinr(kind, k, link.codes, link.powers, link.gains, link.noise_power);
        CHECK(std::abs(generic - closed) <= 1e-10 * closed);
      }
    }
  }
}

TEST_CASE("MMSE matches an independent LU solve and dominates") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t users = 2 + static_cast<std::size_t>(rng() % 12);
    const auto link = random_link(rng, users, 16);
    for (std::size_t k = 0; k < users; ++k) {
      const double mmse = sinr(ReceiverKind::MMSE, k, link.codes, link.powers, link.gains, link.noise_power);
      const double ref = mmse_reference(k, link.codes, link.powers, link.gains, link.noise_power);
      CHECK(std::abs(mmse - ref) <= 1e-10 * ref);
      const double mf = sinr(ReceiverKind::MF, k, link.codes, link.powers, link.gains, link.noise_power);
      CHECK(mmse >= mf * (1 - 1e-12));
      if (link.codes.decorrelator_available()) {
        const double de = sinr(ReceiverKind::DE, k, link.codes, link.powers, link.gains, link.noise_power);
        CHECK(mmse >= de * (1 - 1e-12));
      }
    }
  }
}

TEST_CASE("MMSE stays accurate at wide dynamic range") {
  // Noise far below the interference, as at the physical scales.
  const CodeBook codes = generate_codes(24, 32, 9);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> expo(-10.0, 2.0);
  std::vector<double> p(24), h(24);
  for (std::size_t j = 0; j < 24; ++j) {
    p[j] = std::pow(10.0, expo(rng));
    h[j] = std::pow(10.0, expo(rng) / 4 - 1);
  }
  for (std::size_t k = 0; k < 24; k += 5) {
    const double g = gain_factor(ReceiverKind::MMSE, k, codes, p, h, 5e-16);
    CHECK(std::isfinite(g));
    CHECK(g > 0);
    CHECK(g >= gain_factor(ReceiverKind::MF, k, codes, p, h, 5e-16) * (1 - 1e-9));
    CHECK(g >= gain_factor(ReceiverKind::DE, k, codes, p, h, 5e-16) * (1 - 1e-9));
  }
}

TEST_CASE("decorrelator nulls every interferer") {
  const CodeBook codes = generate_codes(10, 32, 12);
  REQUIRE(codes.decorrelator_available());
  std::vector<double> p(10, 1.0), h(10, 1.0);
  for (std::size_t k = 0; k < 10; ++k) {
    const Eigen::VectorXd c = receiver_filter(ReceiverKind::DE, k, codes, p, h, 1.0).coefficients;
    for (std::size_t j = 0; j < 10; ++j) {
      if (j == k) CHECK(c.dot(codes.code(j)) == doctest::Approx(1.0).epsilon(1e-12));
      else CHECK(std::abs(c.dot(codes.code(j))) < 1e-12);
    }
  }
}

TEST_CASE("SINR is linear in own power") {
  std::mt19937_64 rng(31);
  const auto link = random_link(rng, 6, 16);
  for (ReceiverKind kind : kReceiverPreference) {
    std::vector<double> p = link.powers;
    p[2] = 1.0;
    const double base = sinr(kind, 2, link.codes, p, link.gains, link.noise_power);
    CHECK(base == doctest::Approx(gain_factor(kind, 2, link.codes, p, link.gains, link.noise_power)));
    p[2] = 5.0;
    CHECK(sinr(kind, 2, link.codes, p, link.gains, link.noise_power) == doctest::Approx(5 * base).epsilon(1e-12));
  }
}

TEST_CASE("gain factor is the derivative of SINR in own power") {
  std::mt19937_64 rng(8);
  const auto link = random_link(rng, 8, 16);
  for (ReceiverKind kind : kReceiverPreference) {
    for (std::size_t k = 0; k < 8; ++k) {
      std::vector<double> p = link.powers;
      const double dp = 1e-6 * p[k];
      const double lo = sinr(kind, k, link.codes, p, link.gains, link.noise_power);
      p[k] += dp;
      const double hi = sinr(kind, k, link.codes, p, link.gains, link.noise_power);
      const double g = gain_factor(kind, k, link.codes, p, link.gains, link.noise_power);
      CHECK(std::abs((hi - lo) / dp - g) <= 1e-6 * g);
    }
  }
}

TEST_CASE("random codes") {
  const CodeBook codes = generate_codes(64, 32, 4);
  double sum_sq = 0;
  std::size_t pairs = 0;
  for (std::size_t k = 0; k < 64; ++k) {
    CHECK(codes.rho(k, k) == 1.0);
    CHECK(codes.code(k).squaredNorm() == doctest::Approx(1.0).epsilon(1e-15));
    for (std::size_t j = k + 1; j < 64; ++j) {
      sum_sq += codes.rho(k, j) * codes.rho(k, j);
      ++pairs;
    }
  }
  // E[rho^2] = 1/N
  CHECK(sum_sq / static_cast<double>(pairs) == doctest::Approx(1.0 / 32).epsilon(0.15));
  CHECK_FALSE(codes.decorrelator_available());
  CHECK_THROWS_AS(codes.gram_inverse(), Error);

  const CodeBook again = generate_codes(64, 32, 4);
  CHECK(again.chips() == codes.chips());
}

TEST_CASE("decorrelator is unavailable when K > N") {
  const CodeBook codes = generate_codes(40, 32, 2);
  std::vector<double> p(40, 1.0), h(40, 1.0);
  try {
    sinr(ReceiverKind::DE, 0, codes, p, h, 1.0);
    FAIL("expected receiver-unavailable");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ReceiverUnavailable);
  }
}

TEST_CASE("duplicate codes make the decorrelator unavailable") {
  Eigen::MatrixXi chips(4, 2);
  chips << 1, 1, -1, -1, 1, 1, 1, 1;
  const CodeBook codes(chips);
  CHECK_FALSE(codes.decorrelator_available());
}

TEST_CASE("noise-free MMSE with a singular covariance is an error") {
  const CodeBook codes = generate_codes(3, 8, 6);
  const std::vector<double> p{1.0, 1.0, 1.0};
  const std::vector<double> h{1.0, 1.0, 1.0};
  try {
    sinr(ReceiverKind::MMSE, 0, codes, p, h, 0.0);
    FAIL("expected singular-matrix");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SingularMatrix);
  }
}

TEST_CASE("receiver names") {
  CHECK(parse_receiver("mmse") == ReceiverKind::MMSE);
  CHECK(parse_receiver("De") == ReceiverKind::DE);
  CHECK(to_string(ReceiverKind::MF) == "MF");
  CHECK_THROWS_AS(parse_receiver("zf"), Error);
}
