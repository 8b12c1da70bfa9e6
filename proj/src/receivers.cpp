#include "mhgame/receivers.hpp"

#include <cmath>
#include <cctype>
#include <string>
#include <vector>

#include "mhgame/error.hpp"
#include "mhgame/rng.hpp"

namespace mhgame {

std::string_view to_string(ReceiverKind kind) {
  switch (kind) {
    case ReceiverKind::MF: return "MF";
    case ReceiverKind::DE: return "DE";
    case ReceiverKind::MMSE: return "MMSE";
  }
  return "?";
}

ReceiverKind parse_receiver(std::string_view name) {
  std::string upper(name);
  for (char& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (upper == "MF") return ReceiverKind::MF;
  if (upper == "DE") return ReceiverKind::DE;
  if (upper == "MMSE") return ReceiverKind::MMSE;
  throw Error(ErrorCode::InvalidArgument, "unknown receiver '" + std::string(name) + "'");
}

CodeBook::CodeBook(const Eigen::MatrixXi& chips) {
  if (chips.rows() < 1 || chips.cols() < 1)
    throw Error(ErrorCode::InvalidArgument, "code book needs N >= 1 and K >= 1");
  if ((chips.array().abs() != 1).any())
    throw Error(ErrorCode::InvalidArgument, "chips must be +1 or -1");

  const double n = static_cast<double>(chips.rows());
  codes_ = chips.cast<double>() / std::sqrt(n);
  // Integer Gram matrix keeps rho_kk == 1 exactly.
  const Eigen::MatrixXi gram = chips.transpose() * chips;
  rho_ = gram.cast<double>() / n;

  if (chips.cols() <= chips.rows()) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(rho_);
    // A zero pivot can slip past the rcond estimate, so check D directly.
    const Eigen::VectorXd pivots = ldlt.vectorD();
    if (ldlt.info() == Eigen::Success && pivots.minCoeff() > 1e-12 * pivots.maxCoeff() && ldlt.rcond() > 1e-12)
      gram_inverse_ = ldlt.solve(Eigen::MatrixXd::Identity(rho_.rows(), rho_.cols()));
  }
}

Eigen::MatrixXi CodeBook::chips() const {
  return codes_.unaryExpr([](double v) { return v > 0 ? 1 : -1; });
}

const Eigen::MatrixXd& CodeBook::gram_inverse() const {
  if (!gram_inverse_) {
    throw Error(ErrorCode::ReceiverUnavailable,
                users() > length() ? "decorrelator needs K <= N" : "S^T S is singular");
  }
  return *gram_inverse_;
}

CodeBook generate_codes(std::size_t users, std::size_t length, std::uint64_t seed) {
  if (users < 1 || length < 1) throw Error(ErrorCode::InvalidArgument, "K and N must be at least 1");
  Rng rng = make_rng(seed, Stream::Codes);
  Eigen::MatrixXi chips(length, users);
  for (Eigen::Index k = 0; k < chips.cols(); ++k)
    for (Eigen::Index i = 0; i < chips.rows(); ++i) chips(i, k) = (rng() >> 63) ? 1 : -1;
  return CodeBook(chips);
}

namespace {

void check_link(std::size_t k, const CodeBook& codes, std::span<const double> powers,
                std::span<const double> gains, double noise_power) {
  const std::size_t n = codes.users();
  if (k >= n) throw Error(ErrorCode::InvalidArgument, "user index out of range");
  if (powers.size() != n || gains.size() != n)
    throw Error(ErrorCode::InvalidArgument, "powers and gains need one entry per user");
  if (!(noise_power >= 0)) throw Error(ErrorCode::InvalidArgument, "noise power must be >= 0");
  if (!(powers[k] >= 0)) throw Error(ErrorCode::InvalidArgument, "own power must be >= 0");
}

struct MmseSolve {
  double quadratic;            // s_k^T A_k^{-1} s_k
  Eigen::VectorXd direction;   // A_k^{-1} s_k
};

// A_k = sigma^2 I + U U^T with U = [sqrt(p_j) h_j s_j]. For sigma^2 > 0 the
// quadratic form equals the ridge residual min_z |s - V z|^2 + |z|^2 scaled by
// 1/sigma^2 (V = U / sigma), which Householder QR of [V; I] delivers as a sum
// of squares. That stays accurate when strong interferers make A_k badly
// conditioned, where a direct solve loses digits.
MmseSolve solve_mmse(std::size_t k, const CodeBook& codes, std::span<const double> powers,
                     std::span<const double> gains, double noise_power) {
  const std::size_t n = codes.users();
  const Eigen::Index chips = static_cast<Eigen::Index>(codes.length());
  const Eigen::VectorXd s = codes.code(k);

  std::vector<Eigen::Index> active;
  for (std::size_t j = 0; j < n; ++j)
    if (j != k && powers[j] * gains[j] * gains[j] > 0) active.push_back(static_cast<Eigen::Index>(j));
  const Eigen::Index interferers = static_cast<Eigen::Index>(active.size());

  if (noise_power == 0.0) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(chips, chips);
    for (Eigen::Index j : active) {
      const double w = powers[j] * gains[j] * gains[j];
      a.noalias() += w * codes.codes().col(j) * codes.codes().col(j).transpose();
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
    if (interferers < chips || ldlt.info() != Eigen::Success || ldlt.rcond() < 1e-12)
      throw Error(ErrorCode::SingularMatrix, "MMSE interference matrix is singular without noise");
    Eigen::VectorXd x = ldlt.solve(s);
    return {s.dot(x), std::move(x)};
  }

  if (interferers == 0) return {s.squaredNorm() / noise_power, s / noise_power};

  Eigen::MatrixXd stacked = Eigen::MatrixXd::Zero(chips + interferers, interferers);
  for (Eigen::Index c = 0; c < interferers; ++c) {
    const Eigen::Index j = active[c];
    const double scale = std::sqrt(powers[j] / noise_power) * gains[j];
    stacked.col(c).head(chips) = scale * codes.codes().col(j);
    stacked(chips + c, c) = 1.0;
  }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(chips + interferers);
  rhs.head(chips) = s;

  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(stacked);
  Eigen::VectorXd projected = qr.householderQ().transpose() * rhs;
  projected.head(interferers).setZero();
  const double quadratic = projected.squaredNorm() / noise_power;
  const Eigen::VectorXd residual = qr.householderQ() * projected;
  return {quadratic, residual.head(chips) / noise_power};
}

double unit_power_sinr(ReceiverKind kind, std::size_t k, const CodeBook& codes,
                       std::span<const double> powers, std::span<const double> gains, double noise_power) {
  const double hk2 = gains[k] * gains[k];
  switch (kind) {
    case ReceiverKind::MF: {
      double interference = 0.0;
      for (std::size_t j = 0; j < codes.users(); ++j) {
        if (j == k) continue;
        const double r = codes.rho(k, j);
        interference += powers[j] * gains[j] * gains[j] * r * r;
      }
      return hk2 / (noise_power + interference);
    }
    case ReceiverKind::DE: {
      const Eigen::Index i = static_cast<Eigen::Index>(k);
      return hk2 / (noise_power * codes.gram_inverse()(i, i));
    }
    case ReceiverKind::MMSE:
      return hk2 * solve_mmse(k, codes, powers, gains, noise_power).quadratic;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown receiver kind");
}

}  // namespace

LinearFilter receiver_filter(ReceiverKind kind, std::size_t k, const CodeBook& codes,
                             std::span<const double> powers, std::span<const double> gains,
                             double noise_power) {
  check_link(k, codes, powers, gains, noise_power);
  LinearFilter filter{.coefficients = {}, .kind = kind, .user = k};
  switch (kind) {
    case ReceiverKind::MF:
      filter.coefficients = codes.code(k);
      break;
    case ReceiverKind::DE:
      filter.coefficients = codes.codes() * codes.gram_inverse().col(static_cast<Eigen::Index>(k));
      break;
    case ReceiverKind::MMSE: {
      MmseSolve solved = solve_mmse(k, codes, powers, gains, noise_power);
      const double amplitude = std::sqrt(powers[k]) * gains[k];
      // With no desired signal the scaling of the textbook MMSE vector is zero;
      // keep the direction A_k^{-1} s_k so the filter never nulls s_k.
      const double scale =
          amplitude == 0.0 ? 1.0 : amplitude / (1.0 + amplitude * amplitude * solved.quadratic);
      filter.coefficients = scale * solved.direction;
      break;
    }
  }
  return filter;
}

double filter_sinr(const Eigen::VectorXd& filter, std::size_t k, const CodeBook& codes,
                   std::span<const double> powers, std::span<const double> gains, double noise_power) {
  check_link(k, codes, powers, gains, noise_power);
  if (filter.size() != static_cast<Eigen::Index>(codes.length()))
    throw Error(ErrorCode::InvalidArgument, "filter length must equal N");
  const auto proj = [&](std::size_t j) { return filter.dot(codes.codes().col(static_cast<Eigen::Index>(j))); };
  const double desired = proj(k);
  double denominator = noise_power * filter.squaredNorm();
  for (std::size_t j = 0; j < codes.users(); ++j) {
    if (j == k) continue;
    const double c = proj(j);
    denominator += powers[j] * gains[j] * gains[j] * c * c;
  }
  return powers[k] * gains[k] * gains[k] * desired * desired / denominator;
}

double sinr(ReceiverKind kind, std::size_t k, const CodeBook& codes, std::span<const double> powers,
            std::span<const double> gains, double noise_power) {
  check_link(k, codes, powers, gains, noise_power);
  return powers[k] * unit_power_sinr(kind, k, codes, powers, gains, noise_power);
}

double gain_factor(ReceiverKind kind, std::size_t k, const CodeBook& codes, std::span<const double> powers,
                   std::span<const double> gains, double noise_power) {
  check_link(k, codes, powers, gains, noise_power);
  return unit_power_sinr(kind, k, codes, powers, gains, noise_power);
}

}  // namespace mhgame
