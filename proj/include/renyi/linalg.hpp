#pragma once

// Dense complex linear algebra shared by every module. Thin layer over Eigen.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "renyi/error.hpp"

namespace renyi {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Relative eigenvalue cutoff: eigenvalues below dim * 1e-12 * lambda_max count as zero.
inline constexpr double kZeroCutoffPerDim = 1e-12;

inline double log2_of(double x) { return std::log2(x); }

/// Eigendecomposition of a Hermitian matrix. Eigenvalues ascending.
struct HermitianEigen {
  RealVector values;
  Matrix vectors;

  double max_value() const { return values.size() ? values(values.size() - 1) : 0.0; }
  double min_value() const { return values.size() ? values(0) : 0.0; }
};

inline HermitianEigen hermitian_eigen(const Matrix& m) {
  const Matrix sym = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::InvalidArgument, "Hermitian eigensolver failed to converge");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

/// Zero cutoff eps_zero for an operator of dimension dim with top eigenvalue scale.
inline double zero_cutoff(Eigen::Index dim, double scale) {
  return static_cast<double>(dim) * kZeroCutoffPerDim * std::max(scale, 0.0);
}

/// Eigenvalues with everything below the zero cutoff (including tiny negatives) set to 0.
inline RealVector clipped_spectrum(const RealVector& values) {
  double top = 0.0;
  for (Eigen::Index i = 0; i < values.size(); ++i) top = std::max(top, values(i));
  const double cut = zero_cutoff(values.size(), top);
  RealVector out = values;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    if (out(i) < cut) out(i) = 0.0;
  }
  return out;
}

/// Scalar power with the generalized-inverse convention 0^p := 0 for every p.
inline double generalized_pow(double x, double p) {
  if (x <= 0.0) return 0.0;
  if (p == 0.0) return 1.0;
  return std::pow(x, p);
}

inline Matrix reassemble(const Matrix& vectors, const RealVector& values) {
  return vectors * values.cast<Complex>().asDiagonal() * vectors.adjoint();
}

/// H^p for Hermitian PSD H. Eigenvalues below eps_zero are exact zeros and map
/// to 0 for every p (support projector at p = 0, generalized inverse for p < 0).
inline Matrix matrix_power(const Matrix& h, double p, double psd_tol = 1e-9) {
  if (!std::isfinite(p)) throw Error(ErrorKind::InvalidArgument, "matrix_power exponent must be finite");
  if (h.rows() != h.cols()) throw Error(ErrorKind::DimensionMismatch, "matrix_power needs a square matrix");
  const HermitianEigen eig = hermitian_eigen(h);
  if (eig.min_value() < -psd_tol) {
    throw Error(ErrorKind::NegativeEigenvalue,
                "min eigenvalue " + std::to_string(eig.min_value()) + " below -psd_tol");
  }
  RealVector vals = clipped_spectrum(eig.values);
  for (Eigen::Index i = 0; i < vals.size(); ++i) vals(i) = generalized_pow(vals(i), p);
  return reassemble(eig.vectors, vals);
}

/// Kronecker product a (x) b.
inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

inline Vector kron(const Vector& a, const Vector& b) {
  Vector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

/// Largest |M - M^dagger| entry.
inline double hermiticity_defect(const Matrix& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

/// Neumaier-compensated sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace renyi
