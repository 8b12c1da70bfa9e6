#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

#include <Eigen/Dense>

namespace mhgame {

enum class ReceiverKind { MF, DE, MMSE };

/// Tie-break preference when two receivers give the same utility.
inline constexpr std::array<ReceiverKind, 3> kReceiverPreference{ReceiverKind::MMSE, ReceiverKind::DE,
                                                                 ReceiverKind::MF};

std::string_view to_string(ReceiverKind kind);
ReceiverKind parse_receiver(std::string_view name);

/// K binary spreading sequences of length N with chips +-1/sqrt(N).
///
/// The decorrelator Gram inverse (S^T S)^{-1} is factored once at
/// construction when K <= N and S^T S is nonsingular; otherwise the
/// decorrelator is unavailable for this code book.
class CodeBook {
 public:
  /// `chips` is N x K with entries +-1; they are scaled by 1/sqrt(N).
  explicit CodeBook(const Eigen::MatrixXi& chips);

  std::size_t users() const { return static_cast<std::size_t>(codes_.cols()); }
  std::size_t length() const { return static_cast<std::size_t>(codes_.rows()); }

  const Eigen::MatrixXd& codes() const { return codes_; }
  Eigen::VectorXd code(std::size_t k) const { return codes_.col(static_cast<Eigen::Index>(k)); }
  const Eigen::MatrixXd& rho() const { return rho_; }
  double rho(std::size_t k, std::size_t j) const {
    return rho_(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j));
  }

  /// Signs of the chips (N x K, entries +-1), suitable for serialization.
  Eigen::MatrixXi chips() const;

  bool decorrelator_available() const { return gram_inverse_.has_value(); }
  /// (S^T S)^{-1}; throws receiver-unavailable if the decorrelator cannot be built.
  const Eigen::MatrixXd& gram_inverse() const;

 private:
  Eigen::MatrixXd codes_;
  Eigen::MatrixXd rho_;
  std::optional<Eigen::MatrixXd> gram_inverse_;
};

CodeBook generate_codes(std::size_t users, std::size_t length, std::uint64_t seed);

struct LinearFilter {
  Eigen::VectorXd coefficients;
  ReceiverKind kind = ReceiverKind::MF;
  std::size_t user = 0;
};

// All receiver functions take the view of a single receiver node: `powers`
// and `gains` hold p_j and h_j^{(m)} for every transmitter j. A zero gain
// (the receiving node itself) removes that transmitter from the sum.

LinearFilter receiver_filter(ReceiverKind kind, std::size_t k, const CodeBook& codes,
                             std::span<const double> powers, std::span<const double> gains,
                             double noise_power);

/// SINR of user k through an arbitrary linear filter.
double filter_sinr(const Eigen::VectorXd& filter, std::size_t k, const CodeBook& codes,
                   std::span<const double> powers, std::span<const double> gains, double noise_power);

/// Closed-form SINR of user k for the given receiver kind.
double sinr(ReceiverKind kind, std::size_t k, const CodeBook& codes, std::span<const double> powers,
            std::span<const double> gains, double noise_power);

/// SINR per unit of own power: sinr(p_k) = p_k * gain_factor. Independent of p_k.
double gain_factor(ReceiverKind kind, std::size_t k, const CodeBook& codes, std::span<const double> powers,
                   std::span<const double> gains, double noise_power);

}  // namespace mhgame
