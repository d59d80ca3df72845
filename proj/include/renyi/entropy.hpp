#pragma once

// Renyi entropies, Petz-Renyi divergences and Renyi coherent information.
// All logarithms are base 2.

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "renyi/error.hpp"
#include "renyi/linalg.hpp"
#include "renyi/qstate.hpp"

namespace renyi {

enum class Regime { BelowOne, ExactlyOne, AboveOne, Infinity };

/// Divergence order alpha in [0, 2] or infinity.
class RenyiOrder {
 public:
  RenyiOrder(double alpha) : alpha_(alpha) {  // NOLINT(google-explicit-constructor)
    if (std::isnan(alpha) || alpha < 0.0 || (alpha > 2.0 && !std::isinf(alpha))) {
      throw Error(ErrorKind::AlphaOutOfRange, "alpha = " + std::to_string(alpha) + " outside [0, 2] or infinity");
    }
  }

  static RenyiOrder infinity() { return RenyiOrder(kInf); }

  double alpha() const { return alpha_; }

  Regime regime() const {
    if (std::isinf(alpha_)) return Regime::Infinity;
    if (alpha_ == 1.0) return Regime::ExactlyOne;
    return alpha_ < 1.0 ? Regime::BelowOne : Regime::AboveOne;
  }

  /// beta = alpha / (2 alpha - 1) for alpha in [0.5, 1); infinity at 0.5.
  double beta() const {
    if (!(alpha_ >= 0.5 && alpha_ < 1.0)) {
      throw Error(ErrorKind::AlphaOutOfRange, "beta needs alpha in [0.5, 1), got " + std::to_string(alpha_));
    }
    if (alpha_ == 0.5) return kInf;
    return alpha_ / (2.0 * alpha_ - 1.0);
  }

 private:
  double alpha_;
};

/// Real number or +infinity.
struct ExtendedReal {
  double value = 0.0;

  static ExtendedReal infinite() { return {kInf}; }
  bool is_infinite() const { return std::isinf(value) && value > 0.0; }
  bool is_finite() const { return std::isfinite(value); }
  explicit operator double() const { return value; }

  friend bool operator==(const ExtendedReal&, const ExtendedReal&) = default;
};

/// Entropy orders may exceed 2 (S_beta and S_{1/(2-alpha)} appear in the bounds).
inline void check_entropy_order(double alpha) {
  if (std::isnan(alpha) || alpha < 0.0) {
    throw Error(ErrorKind::AlphaOutOfRange, "entropy order must be >= 0, got " + std::to_string(alpha));
  }
}

/// Orders this close to 1 are evaluated by the alpha = 1 limit; the 1/(alpha-1)
/// prefactor otherwise amplifies rounding in the log-trace.
inline constexpr double kNearOne = 1e-8;

inline double snap_order(double alpha) { return std::abs(alpha - 1.0) <= kNearOne ? 1.0 : alpha; }

/// log2 sum_i p_i^a over the strictly positive entries, evaluated stably.
inline double log2_power_sum(const RealVector& p, double a) {
  double top = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) top = std::max(top, p(i));
  if (top <= 0.0) return -kInf;
  CompensatedSum sum;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p(i) > 0.0) sum.add(std::pow(p(i) / top, a));
  }
  return a * std::log2(top) + std::log2(sum.value());
}

/// Renyi entropy of a probability vector. Entries below the zero cutoff are ignored.
inline double renyi_entropy_spectrum(const RealVector& spectrum, double alpha) {
  check_entropy_order(alpha);
  alpha = snap_order(alpha);
  const RealVector p = clipped_spectrum(spectrum);
  if (alpha == 0.0) {
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < p.size(); ++i) rank += p(i) > 0.0 ? 1 : 0;
    return std::log2(static_cast<double>(rank));
  }
  if (alpha == 1.0) {
    CompensatedSum sum;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      if (p(i) > 0.0) sum.add(-p(i) * std::log2(p(i)));
    }
    return sum.value();
  }
  if (std::isinf(alpha)) return -std::log2(p.maxCoeff());
  return log2_power_sum(p, alpha) / (1.0 - alpha);
}

inline double renyi_entropy_spectrum(const std::vector<double>& spectrum, double alpha) {
  return renyi_entropy_spectrum(Eigen::Map<const RealVector>(spectrum.data(), static_cast<Eigen::Index>(spectrum.size())),
                                alpha);
}

inline double renyi_entropy(const DensityMatrix& rho, double alpha) {
  return renyi_entropy_spectrum(hermitian_eigen(rho.matrix()).values, alpha);
}

/// Entropy of the marginal on `labels`.
inline double renyi_entropy(const DensityMatrix& rho, const std::vector<std::string>& labels, double alpha) {
  return renyi_entropy(partial_trace(rho, labels), alpha);
}

inline double von_neumann_entropy(const DensityMatrix& rho) { return renyi_entropy(rho, 1.0); }

namespace detail {

struct SpectralPair {
  RealVector r;
  RealVector s;
  Eigen::MatrixXd overlap;  // |<r_i|s_j>|^2
};

inline SpectralPair spectral_pair(const Matrix& rho, const Matrix& sigma) {
  const HermitianEigen er = hermitian_eigen(rho);
  const HermitianEigen es = hermitian_eigen(sigma);
  SpectralPair out;
  out.r = clipped_spectrum(er.values);
  out.s = clipped_spectrum(es.values);
  out.overlap = (er.vectors.adjoint() * es.vectors).cwiseAbs2();
  return out;
}

/// Weight of rho on the kernel of sigma above which the supports are incompatible.
inline constexpr double kSupportLeak = 1e-10;

inline double kernel_weight(const SpectralPair& sp) {
  double w = 0.0;
  for (Eigen::Index i = 0; i < sp.r.size(); ++i) {
    if (sp.r(i) <= 0.0) continue;
    for (Eigen::Index j = 0; j < sp.s.size(); ++j) {
      if (sp.s(j) <= 0.0) w += sp.r(i) * sp.overlap(i, j);
    }
  }
  return w;
}

/// Tr rho^alpha sigma^{1-alpha} with generalized powers on the supports.
inline double petz_trace(const SpectralPair& sp, double alpha) {
  CompensatedSum sum;
  for (Eigen::Index i = 0; i < sp.r.size(); ++i) {
    const double ra = generalized_pow(sp.r(i), alpha);
    if (ra == 0.0) continue;
    for (Eigen::Index j = 0; j < sp.s.size(); ++j) {
      const double sb = generalized_pow(sp.s(j), 1.0 - alpha);
      if (sb != 0.0) sum.add(ra * sb * sp.overlap(i, j));
    }
  }
  return sum.value();
}

inline void check_same_dims(const Matrix& rho, const Matrix& sigma) {
  if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "divergence arguments have different dimensions");
  }
}

}  // namespace detail

/// S(rho || sigma) = Tr rho (log rho - log sigma); +inf if supp rho is not inside supp sigma.
inline ExtendedReal relative_entropy(const Matrix& rho, const Matrix& sigma) {
  detail::check_same_dims(rho, sigma);
  const auto sp = detail::spectral_pair(rho, sigma);
  if (detail::kernel_weight(sp) > detail::kSupportLeak) return ExtendedReal::infinite();
  CompensatedSum sum;
  for (Eigen::Index i = 0; i < sp.r.size(); ++i) {
    if (sp.r(i) <= 0.0) continue;
    sum.add(sp.r(i) * std::log2(sp.r(i)));
    for (Eigen::Index j = 0; j < sp.s.size(); ++j) {
      if (sp.s(j) > 0.0) sum.add(-sp.r(i) * sp.overlap(i, j) * std::log2(sp.s(j)));
    }
  }
  return {sum.value()};
}

/// Q_alpha(rho || sigma) = sign(alpha - 1) Tr rho^alpha sigma^{1-alpha}.
inline ExtendedReal quasi_relative(const Matrix& rho, const Matrix& sigma, RenyiOrder order) {
  detail::check_same_dims(rho, sigma);
  const double alpha = order.alpha();
  if (std::isinf(alpha)) throw Error(ErrorKind::AlphaOutOfRange, "divergence order must be finite");
  const auto sp = detail::spectral_pair(rho, sigma);
  if (alpha > 1.0 && detail::kernel_weight(sp) > detail::kSupportLeak) return ExtendedReal::infinite();
  const double sign = alpha > 1.0 ? 1.0 : (alpha < 1.0 ? -1.0 : 0.0);
  return {sign * detail::petz_trace(sp, alpha)};
}

/// Petz-Renyi divergence S_alpha(rho || sigma) = log Tr rho^alpha sigma^{1-alpha} / (alpha - 1).
inline ExtendedReal renyi_relative(const Matrix& rho, const Matrix& sigma, RenyiOrder order) {
  detail::check_same_dims(rho, sigma);
  const double alpha = snap_order(order.alpha());
  if (std::isinf(alpha)) throw Error(ErrorKind::AlphaOutOfRange, "divergence order must be finite");
  if (alpha == 1.0) return relative_entropy(rho, sigma);
  const auto sp = detail::spectral_pair(rho, sigma);
  if (alpha > 1.0 && detail::kernel_weight(sp) > detail::kSupportLeak) return ExtendedReal::infinite();
  const double tr = detail::petz_trace(sp, alpha);
  if (!(tr > 0.0)) return ExtendedReal::infinite();
  return {std::log2(tr) / (alpha - 1.0)};
}

inline ExtendedReal quasi_relative(const DensityMatrix& rho, const DensityMatrix& sigma, RenyiOrder order) {
  return quasi_relative(rho.matrix(), sigma.matrix(), order);
}

inline ExtendedReal renyi_relative(const DensityMatrix& rho, const DensityMatrix& sigma, RenyiOrder order) {
  return renyi_relative(rho.matrix(), sigma.matrix(), order);
}

/// S(A|B) = S(AB) - S(B) with A = split.left, B = split.right.
inline double conditional_entropy(const DensityMatrix& rho, const BipartiteSplit& split) {
  split.validate(rho.dims());
  return von_neumann_entropy(rho) - renyi_entropy(rho, split.right, 1.0);
}

/// I(A:B) = S(A) + S(B) - S(AB).
inline double mutual_information(const DensityMatrix& rho, const BipartiteSplit& split) {
  split.validate(rho.dims());
  return renyi_entropy(rho, split.left, 1.0) + renyi_entropy(rho, split.right, 1.0) - von_neumann_entropy(rho);
}

namespace detail {

/// Tr_B rho^alpha as an operator on A, with its eigendecomposition.
inline HermitianEigen tilted_marginal(const DensityMatrix& rho, const BipartiteSplit& split, double alpha) {
  split.validate(rho.dims());
  const Matrix powered = matrix_power(rho.matrix(), alpha);
  return hermitian_eigen(partial_trace_matrix(powered, rho.dims(), split.left));
}

}  // namespace detail

/// I_alpha(A>B) = alpha/(alpha-1) log Tr [Tr_B rho^alpha]^{1/alpha}.
/// Its alpha -> 1 limit is S(A) - S(AB), i.e. -S(B|A) with the left group kept.
inline double coherent_information_renyi(const DensityMatrix& rho, const BipartiteSplit& split, RenyiOrder order) {
  const double alpha = snap_order(order.alpha());
  if (std::isinf(alpha)) throw Error(ErrorKind::AlphaOutOfRange, "coherent information needs finite alpha");
  if (alpha == 1.0) return -conditional_entropy(rho, BipartiteSplit{split.right, split.left});
  const HermitianEigen x = detail::tilted_marginal(rho, split, alpha);
  const RealVector vals = clipped_spectrum(x.values);
  if (alpha == 0.0) return -std::log2(vals.maxCoeff());
  return alpha / (alpha - 1.0) * log2_power_sum(vals, 1.0 / alpha);
}

struct SibsonResult {
  DensityMatrix sigma;
  double min_value = 0.0;
};

/// Minimizer over sigma^A of S_alpha(rho^{AB} || 1^A (x) sigma^B)-type objectives:
/// sigma* = X^{1/alpha} / Tr X^{1/alpha} with X = Tr_B rho^alpha, lives on A.
inline SibsonResult sibson_minimizer(const DensityMatrix& rho, const BipartiteSplit& split, RenyiOrder order) {
  const double alpha = order.alpha();
  if (alpha == 0.0 || alpha == 1.0 || std::isinf(alpha)) {
    throw Error(ErrorKind::AlphaOutOfRange, "Sibson minimizer needs alpha in (0, 2] minus {1}");
  }
  const HermitianEigen x = detail::tilted_marginal(rho, split, alpha);
  RealVector vals = clipped_spectrum(x.values);
  const double log_norm = log2_power_sum(vals, 1.0 / alpha);
  for (Eigen::Index i = 0; i < vals.size(); ++i) vals(i) = generalized_pow(vals(i), 1.0 / alpha);
  SibsonResult out{DensityMatrix::from_trusted(reassemble(x.vectors, vals), rho.dims().select(split.left),
                                               rho.tolerances()),
                   alpha / (alpha - 1.0) * log_norm};
  return out;
}

/// (1/(alpha-1)) log Tr [Tr_B rho^alpha] sigma^{1-alpha}: the objective Sibson's identity minimizes.
inline double sibson_objective(const DensityMatrix& rho, const BipartiteSplit& split, const Matrix& sigma_a,
                               RenyiOrder order) {
  const double alpha = order.alpha();
  const HermitianEigen x = detail::tilted_marginal(rho, split, alpha);
  const Matrix xm = reassemble(x.vectors, clipped_spectrum(x.values));
  const double tr = (xm * matrix_power(sigma_a, 1.0 - alpha)).trace().real();
  if (!(tr > 0.0)) return kInf;
  return std::log2(tr) / (alpha - 1.0);
}

}  // namespace renyi
