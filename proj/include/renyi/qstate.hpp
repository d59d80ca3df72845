#pragma once

// Finite-dimensional quantum states, channels and instruments with named
// registers. Every bipartite split downstream is by register label.

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "renyi/error.hpp"
#include "renyi/linalg.hpp"
#include "renyi/random.hpp"

namespace renyi {

struct Factor {
  std::string label;
  int dim = 1;

  friend bool operator==(const Factor&, const Factor&) = default;
};

/// Ordered tensor factorization of a Hilbert space, e.g. [A:2, B:3].
class SubsystemDims {
 public:
  SubsystemDims() : factors_{{"A", 1}} {}

  explicit SubsystemDims(std::vector<Factor> factors) : factors_(std::move(factors)) {
    if (factors_.empty()) throw Error(ErrorKind::InvalidDims, "at least one register is required");
    std::set<std::string> seen;
    for (const auto& f : factors_) {
      if (f.dim < 1) throw Error(ErrorKind::InvalidDims, "register '" + f.label + "' has dim < 1");
      if (f.label.empty()) throw Error(ErrorKind::InvalidDims, "register labels must be nonempty");
      if (!seen.insert(f.label).second) throw Error(ErrorKind::InvalidDims, "duplicate register label '" + f.label + "'");
    }
  }

  SubsystemDims(std::initializer_list<Factor> factors) : SubsystemDims(std::vector<Factor>(factors)) {}

  /// Single register of dimension d.
  static SubsystemDims single(int d, std::string label = "A") { return SubsystemDims({{std::move(label), d}}); }

  const std::vector<Factor>& factors() const { return factors_; }
  std::size_t size() const { return factors_.size(); }

  Eigen::Index total_dim() const {
    Eigen::Index d = 1;
    for (const auto& f : factors_) d *= f.dim;
    return d;
  }

  bool contains(const std::string& label) const {
    return std::any_of(factors_.begin(), factors_.end(), [&](const Factor& f) { return f.label == label; });
  }

  std::size_t index_of(const std::string& label) const {
    for (std::size_t i = 0; i < factors_.size(); ++i) {
      if (factors_[i].label == label) return i;
    }
    throw Error(ErrorKind::UnknownLabel, "no register labelled '" + label + "'");
  }

  int dim_of(const std::string& label) const { return factors_[index_of(label)].dim; }

  std::vector<std::string> labels() const {
    std::vector<std::string> out;
    for (const auto& f : factors_) out.push_back(f.label);
    return out;
  }

  /// Row-major stride of each factor (first factor most significant).
  std::vector<Eigen::Index> strides() const {
    std::vector<Eigen::Index> s(factors_.size());
    Eigen::Index acc = 1;
    for (std::size_t i = factors_.size(); i-- > 0;) {
      s[i] = acc;
      acc *= factors_[i].dim;
    }
    return s;
  }

  /// Factors of `other` appended; clashing labels of `other` get primes (A -> A').
  SubsystemDims concat(const SubsystemDims& other) const {
    std::vector<Factor> out = factors_;
    std::set<std::string> used;
    for (const auto& f : factors_) used.insert(f.label);
    for (Factor f : other.factors_) {
      while (used.count(f.label)) f.label += "'";
      used.insert(f.label);
      out.push_back(std::move(f));
    }
    return SubsystemDims(std::move(out));
  }

  /// The listed registers, in the order given.
  SubsystemDims select(const std::vector<std::string>& labels) const {
    std::vector<Factor> out;
    for (const auto& l : labels) out.push_back(factors_[index_of(l)]);
    return SubsystemDims(std::move(out));
  }

  SubsystemDims relabeled(const std::vector<std::string>& labels) const {
    if (labels.size() != factors_.size()) throw Error(ErrorKind::InvalidDims, "relabel needs one label per register");
    std::vector<Factor> out = factors_;
    for (std::size_t i = 0; i < out.size(); ++i) out[i].label = labels[i];
    return SubsystemDims(std::move(out));
  }

  friend bool operator==(const SubsystemDims&, const SubsystemDims&) = default;

 private:
  std::vector<Factor> factors_;
};

/// Partition of the registers into two nonempty groups.
struct BipartiteSplit {
  std::vector<std::string> left;
  std::vector<std::string> right;

  /// `left` versus every other register of `dims`.
  static BipartiteSplit of(const SubsystemDims& dims, std::vector<std::string> left) {
    BipartiteSplit split;
    split.left = std::move(left);
    for (const auto& l : dims.labels()) {
      if (std::find(split.left.begin(), split.left.end(), l) == split.left.end()) split.right.push_back(l);
    }
    split.validate(dims);
    return split;
  }

  void validate(const SubsystemDims& dims) const {
    if (left.empty() || right.empty()) throw Error(ErrorKind::InvalidArgument, "bipartite split needs two nonempty groups");
    std::set<std::string> seen;
    for (const auto* group : {&left, &right}) {
      for (const auto& l : *group) {
        dims.index_of(l);
        if (!seen.insert(l).second) throw Error(ErrorKind::InvalidArgument, "register '" + l + "' appears twice in split");
      }
    }
    if (seen.size() != dims.size()) throw Error(ErrorKind::InvalidArgument, "bipartite split must cover every register");
  }
};

struct Tolerances {
  double herm_tol = 1e-9;
  double psd_tol = 1e-9;
  double trace_tol = 1e-9;
};

namespace detail {

/// Offsets into the full index space for every multi-index over `subset`.
inline std::vector<Eigen::Index> subset_offsets(const SubsystemDims& dims, const std::vector<std::size_t>& subset) {
  const auto strides = dims.strides();
  std::vector<Eigen::Index> offsets{0};
  for (std::size_t idx : subset) {
    const int d = dims.factors()[idx].dim;
    std::vector<Eigen::Index> next;
    next.reserve(offsets.size() * d);
    for (Eigen::Index base : offsets) {
      for (int v = 0; v < d; ++v) next.push_back(base + v * strides[idx]);
    }
    offsets = std::move(next);
  }
  return offsets;
}

inline std::vector<std::size_t> indices_of(const SubsystemDims& dims, const std::vector<std::string>& labels) {
  std::vector<std::size_t> out;
  for (const auto& l : labels) out.push_back(dims.index_of(l));
  return out;
}

/// Permutation p with new basis index i <- old index p[i] when factors are reordered.
inline std::vector<Eigen::Index> permutation_map(const SubsystemDims& dims, const std::vector<std::string>& order) {
  if (order.size() != dims.size()) throw Error(ErrorKind::InvalidArgument, "permutation must list every register once");
  const auto idx = indices_of(dims, order);
  std::set<std::size_t> unique(idx.begin(), idx.end());
  if (unique.size() != idx.size()) throw Error(ErrorKind::InvalidArgument, "permutation repeats a register");
  return subset_offsets(dims, idx);
}

}  // namespace detail

class PureState;

/// Hermitian PSD unit-trace operator on labelled registers.
class DensityMatrix {
 public:
  /// Checks Hermiticity, positivity and trace. Eigenvalues in [-psd_tol, 0) are
  /// clipped to zero and the result renormalized.
  static DensityMatrix validate(const Matrix& m, SubsystemDims dims, Tolerances tol = {}) {
    if (m.rows() != m.cols()) throw Error(ErrorKind::DimensionMismatch, "density matrix must be square");
    if (m.rows() != dims.total_dim()) {
      throw Error(ErrorKind::DimensionMismatch, "matrix size " + std::to_string(m.rows()) +
                                                    " does not match total_dim " + std::to_string(dims.total_dim()));
    }
    const double herm = hermiticity_defect(m);
    if (herm > tol.herm_tol) throw Error(ErrorKind::NotHermitian, "|M - M^dagger|_max = " + std::to_string(herm));
    Matrix h = 0.5 * (m + m.adjoint());
    const HermitianEigen eig = hermitian_eigen(h);
    if (eig.min_value() < -tol.psd_tol) {
      throw Error(ErrorKind::NotPSD, "min eigenvalue = " + std::to_string(eig.min_value()));
    }
    const double tr = h.trace().real();
    if (std::abs(tr - 1.0) > tol.trace_tol) {
      throw Error(ErrorKind::NotUnitTrace, "|Tr M - 1| = " + std::to_string(std::abs(tr - 1.0)));
    }
    if (eig.min_value() < 0.0) {
      RealVector vals = eig.values.cwiseMax(0.0);
      vals /= vals.sum();
      h = reassemble(eig.vectors, vals);
    } else {
      h /= Complex(tr, 0.0);
    }
    return DensityMatrix(std::move(h), std::move(dims), tol);
  }

  /// Wraps an operator produced by a valid operation; only hermitizes and renormalizes.
  static DensityMatrix from_trusted(const Matrix& m, SubsystemDims dims, Tolerances tol = {}) {
    Matrix h = 0.5 * (m + m.adjoint());
    const double tr = h.trace().real();
    if (!(tr > 0.0)) throw Error(ErrorKind::NotUnitTrace, "operator has nonpositive trace");
    h /= Complex(tr, 0.0);
    return DensityMatrix(std::move(h), std::move(dims), tol);
  }

  static DensityMatrix maximally_mixed(SubsystemDims dims) {
    const auto d = dims.total_dim();
    return DensityMatrix(Matrix::Identity(d, d) / static_cast<double>(d), std::move(dims), {});
  }

  const Matrix& matrix() const { return matrix_; }
  const SubsystemDims& dims() const { return dims_; }
  const Tolerances& tolerances() const { return tol_; }
  Eigen::Index dim() const { return matrix_.rows(); }

  /// Eigenvalues (ascending) after the zero cutoff.
  RealVector spectrum() const { return clipped_spectrum(hermitian_eigen(matrix_).values); }

  DensityMatrix relabeled(const std::vector<std::string>& labels) const {
    return DensityMatrix(matrix_, dims_.relabeled(labels), tol_);
  }

 private:
  DensityMatrix(Matrix m, SubsystemDims dims, Tolerances tol) : matrix_(std::move(m)), dims_(std::move(dims)), tol_(tol) {}

  Matrix matrix_;
  SubsystemDims dims_;
  Tolerances tol_;
};

/// Unit vector on labelled registers.
class PureState {
 public:
  static PureState validate(const Vector& amplitudes, SubsystemDims dims, Tolerances tol = {}) {
    if (amplitudes.size() != dims.total_dim()) {
      throw Error(ErrorKind::DimensionMismatch, "amplitude count " + std::to_string(amplitudes.size()) +
                                                    " does not match total_dim " + std::to_string(dims.total_dim()));
    }
    const double norm = amplitudes.norm();
    if (std::abs(norm - 1.0) > tol.trace_tol) {
      throw Error(ErrorKind::NotUnitTrace, "| |psi| - 1 | = " + std::to_string(std::abs(norm - 1.0)));
    }
    return PureState(amplitudes / norm, std::move(dims), tol);
  }

  /// Normalizes any nonzero vector.
  static PureState normalized(const Vector& amplitudes, SubsystemDims dims) {
    const double norm = amplitudes.norm();
    if (!(norm > 0.0)) throw Error(ErrorKind::NotUnitTrace, "zero vector cannot be normalized");
    return validate(amplitudes / norm, std::move(dims));
  }

  const Vector& amplitudes() const { return amplitudes_; }
  const SubsystemDims& dims() const { return dims_; }
  Eigen::Index dim() const { return amplitudes_.size(); }

  DensityMatrix density() const {
    return DensityMatrix::from_trusted(amplitudes_ * amplitudes_.adjoint(), dims_, tol_);
  }

  PureState relabeled(const std::vector<std::string>& labels) const {
    return PureState(amplitudes_, dims_.relabeled(labels), tol_);
  }

 private:
  PureState(Vector v, SubsystemDims dims, Tolerances tol) : amplitudes_(std::move(v)), dims_(std::move(dims)), tol_(tol) {}

  Vector amplitudes_;
  SubsystemDims dims_;
  Tolerances tol_;
};

/// Schmidt data of a bipartite pure state: psi = sum_i c_i |l_i>|r_i>.
struct SchmidtForm {
  std::vector<double> coefficients;  // nonincreasing, strictly positive
  std::vector<Vector> left_basis;
  std::vector<Vector> right_basis;
  SubsystemDims left_dims;
  SubsystemDims right_dims;

  std::size_t rank() const { return coefficients.size(); }

  std::vector<double> probabilities() const {
    std::vector<double> p;
    for (double c : coefficients) p.push_back(c * c);
    return p;
  }
};

// ---------------------------------------------------------------------------
// tensor products, reordering, partial trace

inline DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
  return DensityMatrix::from_trusted(kron(a.matrix(), b.matrix()), a.dims().concat(b.dims()), a.tolerances());
}

inline PureState tensor(const PureState& a, const PureState& b) {
  return PureState::normalized(kron(a.amplitudes(), b.amplitudes()), a.dims().concat(b.dims()));
}

/// Reorders registers; `order` lists every label once.
inline DensityMatrix permute(const DensityMatrix& rho, const std::vector<std::string>& order) {
  const auto map = detail::permutation_map(rho.dims(), order);
  const auto n = static_cast<Eigen::Index>(map.size());
  Matrix out(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) out(i, j) = rho.matrix()(map[i], map[j]);
  }
  return DensityMatrix::from_trusted(out, rho.dims().select(order), rho.tolerances());
}

inline PureState permute(const PureState& psi, const std::vector<std::string>& order) {
  const auto map = detail::permutation_map(psi.dims(), order);
  Vector out(static_cast<Eigen::Index>(map.size()));
  for (std::size_t i = 0; i < map.size(); ++i) out(static_cast<Eigen::Index>(i)) = psi.amplitudes()(map[i]);
  return PureState::normalized(out, psi.dims().select(order));
}

/// Partial trace of an arbitrary operator (no normalization). Surviving registers
/// stay in their original order; `kept_dims` receives their factorization.
inline Matrix partial_trace_matrix(const Matrix& m, const SubsystemDims& dims, const std::vector<std::string>& keep,
                                   SubsystemDims* kept_dims = nullptr) {
  if (keep.empty()) throw Error(ErrorKind::InvalidArgument, "partial_trace needs at least one register to keep");
  if (m.rows() != dims.total_dim() || m.cols() != dims.total_dim()) {
    throw Error(ErrorKind::DimensionMismatch, "operator size does not match registers");
  }
  for (const auto& l : keep) dims.index_of(l);
  std::vector<std::size_t> kept;
  std::vector<std::size_t> traced;
  std::vector<std::string> ordered_keep;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    const auto& label = dims.factors()[i].label;
    if (std::find(keep.begin(), keep.end(), label) != keep.end()) {
      kept.push_back(i);
      ordered_keep.push_back(label);
    } else {
      traced.push_back(i);
    }
  }
  const auto koff = detail::subset_offsets(dims, kept);
  const auto toff = detail::subset_offsets(dims, traced);
  const auto dk = static_cast<Eigen::Index>(koff.size());
  Matrix out = Matrix::Zero(dk, dk);
  for (Eigen::Index i = 0; i < dk; ++i) {
    for (Eigen::Index j = 0; j < dk; ++j) {
      Complex acc = 0.0;
      for (Eigen::Index t : toff) acc += m(koff[i] + t, koff[j] + t);
      out(i, j) = acc;
    }
  }
  if (kept_dims) *kept_dims = dims.select(ordered_keep);
  return out;
}

/// Reduced state on `keep`; surviving registers stay in their original order.
inline DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<std::string>& keep) {
  SubsystemDims kept;
  const Matrix out = partial_trace_matrix(rho.matrix(), rho.dims(), keep, &kept);
  return DensityMatrix::from_trusted(out, kept, rho.tolerances());
}

inline DensityMatrix partial_trace(const PureState& psi, const std::vector<std::string>& keep) {
  return partial_trace(psi.density(), keep);
}

/// Amplitudes reshaped into a (left dim) x (right dim) matrix.
inline Matrix bipartite_matrix(const PureState& psi, const BipartiteSplit& split) {
  split.validate(psi.dims());
  const auto loff = detail::subset_offsets(psi.dims(), detail::indices_of(psi.dims(), split.left));
  const auto roff = detail::subset_offsets(psi.dims(), detail::indices_of(psi.dims(), split.right));
  Matrix m(static_cast<Eigen::Index>(loff.size()), static_cast<Eigen::Index>(roff.size()));
  for (std::size_t i = 0; i < loff.size(); ++i) {
    for (std::size_t j = 0; j < roff.size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = psi.amplitudes()(loff[i] + roff[j]);
    }
  }
  return m;
}

namespace detail {

/// Multiplies v by the phase making its largest-magnitude entry real positive; returns the phase.
inline Complex fix_phase(Vector& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (std::abs(v(i)) > std::abs(v(best)) + 1e-12) best = i;
  }
  const double mag = std::abs(v(best));
  if (mag == 0.0) return 1.0;
  const Complex phase = std::conj(v(best)) / mag;
  v *= phase;
  return phase;
}

inline bool lexicographically_less(const Vector& a, const Vector& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (std::abs(a(i).real() - b(i).real()) > 1e-12) return a(i).real() < b(i).real();
    if (std::abs(a(i).imag() - b(i).imag()) > 1e-12) return a(i).imag() < b(i).imag();
  }
  return false;
}

}  // namespace detail

inline SchmidtForm schmidt(const PureState& psi, const BipartiteSplit& split) {
  const Matrix m = bipartite_matrix(psi, split);
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const RealVector s = svd.singularValues();
  const double cut = zero_cutoff(std::max(m.rows(), m.cols()), s.size() ? s(0) * s(0) : 0.0);

  struct Term {
    double c;
    Vector l;
    Vector r;
  };
  std::vector<Term> terms;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) * s(i) <= cut) continue;
    Vector l = svd.matrixU().col(i);
    Vector r = svd.matrixV().col(i).conjugate();
    const Complex phase = detail::fix_phase(l);
    r *= std::conj(phase);
    terms.push_back({s(i), std::move(l), std::move(r)});
  }
  std::stable_sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) {
    if (std::abs(a.c - b.c) > 1e-12) return a.c > b.c;
    return detail::lexicographically_less(a.l, b.l);
  });

  SchmidtForm form;
  form.left_dims = psi.dims().select(split.left);
  form.right_dims = psi.dims().select(split.right);
  for (auto& t : terms) {
    form.coefficients.push_back(t.c);
    form.left_basis.push_back(std::move(t.l));
    form.right_basis.push_back(std::move(t.r));
  }
  return form;
}

/// Canonical purification sum_i sqrt(l_i) |i>^R |v_i> with dim(R) = rank(rho); R comes first.
inline PureState purify(const DensityMatrix& rho, std::string env_label = "R") {
  const HermitianEigen eig = hermitian_eigen(rho.matrix());
  const RealVector vals = clipped_spectrum(eig.values);
  std::vector<Eigen::Index> support;
  for (Eigen::Index i = vals.size(); i-- > 0;) {
    if (vals(i) > 0.0) support.push_back(i);
  }
  const auto rank = static_cast<int>(support.size());
  while (rho.dims().contains(env_label)) env_label += "'";
  const SubsystemDims env({{env_label, rank}});
  const Eigen::Index d = rho.dim();
  Vector psi = Vector::Zero(rank * d);
  for (int k = 0; k < rank; ++k) {
    psi.segment(k * d, d) = std::sqrt(vals(support[k])) * eig.vectors.col(support[k]);
  }
  return PureState::normalized(psi, env.concat(rho.dims()));
}

/// Fidelity F = || sqrt(rho) sqrt(sigma) ||_1 (square-root convention), in [0, 1].
inline double fidelity(const Matrix& rho, const Matrix& sigma) {
  if (rho.rows() != sigma.rows()) throw Error(ErrorKind::DimensionMismatch, "fidelity needs equal dimensions");
  const Matrix product = matrix_power(rho, 0.5) * matrix_power(sigma, 0.5);
  Eigen::JacobiSVD<Matrix> svd(product);
  return std::clamp(svd.singularValues().sum(), 0.0, 1.0);
}

inline double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  return fidelity(rho.matrix(), sigma.matrix());
}

/// F(psi, rho) = sqrt(<psi|rho|psi>).
inline double fidelity(const PureState& psi, const DensityMatrix& rho) {
  if (psi.dim() != rho.dim()) throw Error(ErrorKind::DimensionMismatch, "fidelity needs equal dimensions");
  const double overlap = (psi.amplitudes().adjoint() * rho.matrix() * psi.amplitudes())(0, 0).real();
  return std::clamp(std::sqrt(std::max(overlap, 0.0)), 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// channels and instruments

namespace detail {

inline Matrix kraus_sum(const std::vector<Matrix>& kraus, Eigen::Index in_dim) {
  Matrix acc = Matrix::Zero(in_dim, in_dim);
  for (const auto& k : kraus) acc += k.adjoint() * k;
  return acc;
}

}  // namespace detail

/// Completely positive trace-preserving map in Kraus form.
class QuantumChannel {
 public:
  static QuantumChannel make(SubsystemDims input, SubsystemDims output, std::vector<Matrix> kraus, double psd_tol = 1e-9) {
    if (kraus.empty()) throw Error(ErrorKind::InvalidArgument, "channel needs at least one Kraus operator");
    for (const auto& k : kraus) {
      if (k.rows() != output.total_dim() || k.cols() != input.total_dim()) {
        throw Error(ErrorKind::DimensionMismatch, "Kraus operator shape does not match output x input");
      }
    }
    const double defect = (detail::kraus_sum(kraus, input.total_dim()) -
                           Matrix::Identity(input.total_dim(), input.total_dim()))
                              .cwiseAbs()
                              .maxCoeff();
    if (defect > psd_tol) throw Error(ErrorKind::NotTracePreserving, "|sum K^dagger K - 1|_max = " + std::to_string(defect));
    return QuantumChannel(std::move(input), std::move(output), std::move(kraus));
  }

  static QuantumChannel identity(const SubsystemDims& dims) {
    const auto d = dims.total_dim();
    return QuantumChannel(dims, dims, {Matrix::Identity(d, d)});
  }

  /// Complete dephasing in the computational basis.
  static QuantumChannel dephasing(const SubsystemDims& dims) {
    const auto d = dims.total_dim();
    std::vector<Matrix> kraus;
    for (Eigen::Index i = 0; i < d; ++i) {
      Matrix k = Matrix::Zero(d, d);
      k(i, i) = 1.0;
      kraus.push_back(std::move(k));
    }
    return QuantumChannel(dims, dims, std::move(kraus));
  }

  /// rho -> Tr(rho) tau.
  static QuantumChannel trace_and_replace(const SubsystemDims& input, const DensityMatrix& tau) {
    const HermitianEigen eig = hermitian_eigen(tau.matrix());
    const RealVector vals = clipped_spectrum(eig.values);
    std::vector<Matrix> kraus;
    for (Eigen::Index j = 0; j < vals.size(); ++j) {
      if (vals(j) <= 0.0) continue;
      for (Eigen::Index i = 0; i < input.total_dim(); ++i) {
        Matrix k = Matrix::Zero(tau.dim(), input.total_dim());
        k.col(i) = std::sqrt(vals(j)) * eig.vectors.col(j);
        kraus.push_back(std::move(k));
      }
    }
    return make(input, tau.dims(), std::move(kraus));
  }

  const SubsystemDims& input_dims() const { return input_; }
  const SubsystemDims& output_dims() const { return output_; }
  const std::vector<Matrix>& kraus() const { return kraus_; }

  Matrix apply(const Matrix& rho) const {
    if (rho.rows() != input_.total_dim()) throw Error(ErrorKind::DimensionMismatch, "channel input dimension mismatch");
    Matrix out = Matrix::Zero(output_.total_dim(), output_.total_dim());
    for (const auto& k : kraus_) out += k * rho * k.adjoint();
    return out;
  }

 private:
  QuantumChannel(SubsystemDims in, SubsystemDims out, std::vector<Matrix> kraus)
      : input_(std::move(in)), output_(std::move(out)), kraus_(std::move(kraus)) {}

  SubsystemDims input_;
  SubsystemDims output_;
  std::vector<Matrix> kraus_;
};

inline DensityMatrix apply_channel(const QuantumChannel& channel, const DensityMatrix& rho) {
  if (rho.dim() != channel.input_dims().total_dim()) {
    throw Error(ErrorKind::DimensionMismatch, "state dimension " + std::to_string(rho.dim()) +
                                                  " does not match channel input " +
                                                  std::to_string(channel.input_dims().total_dim()));
  }
  return DensityMatrix::from_trusted(channel.apply(rho.matrix()), channel.output_dims(), rho.tolerances());
}

namespace detail {

/// Moves `label` to the last position, applies the Kraus set there, restores order.
/// The register keeps its label and takes the output dimension.
inline Matrix apply_local_kraus(const DensityMatrix& rho, const std::string& label, const std::vector<Matrix>& kraus,
                                int out_dim, std::vector<std::string>& order_out, SubsystemDims& dims_out) {
  const auto labels = rho.dims().labels();
  std::vector<std::string> order;
  for (const auto& l : labels) {
    if (l != label) order.push_back(l);
  }
  order.push_back(label);
  const DensityMatrix moved = permute(rho, order);
  const Eigen::Index rest = moved.dim() / rho.dims().dim_of(label);
  const Matrix id = Matrix::Identity(rest, rest);
  Matrix out = Matrix::Zero(rest * out_dim, rest * out_dim);
  for (const auto& k : kraus) {
    const Matrix full = kron(id, k);
    out += full * moved.matrix() * full.adjoint();
  }
  std::vector<Factor> factors = moved.dims().factors();
  factors.back().dim = out_dim;
  dims_out = SubsystemDims(std::move(factors));
  order_out = labels;
  return out;
}

}  // namespace detail

/// Applies a single-register channel to register `label` of rho.
inline DensityMatrix apply_local_channel(const QuantumChannel& channel, const DensityMatrix& rho, const std::string& label) {
  if (channel.input_dims().total_dim() != rho.dims().dim_of(label)) {
    throw Error(ErrorKind::DimensionMismatch, "local channel input does not match register '" + label + "'");
  }
  std::vector<std::string> order;
  SubsystemDims moved_dims;
  const Matrix out = detail::apply_local_kraus(rho, label, channel.kraus(),
                                               static_cast<int>(channel.output_dims().total_dim()), order, moved_dims);
  return permute(DensityMatrix::from_trusted(out, moved_dims, rho.tolerances()), order);
}

/// Collection of CP maps whose sum is trace preserving.
class QuantumInstrument {
 public:
  static QuantumInstrument make(SubsystemDims input, SubsystemDims output, std::vector<std::vector<Matrix>> branches,
                                double psd_tol = 1e-9) {
    if (branches.empty()) throw Error(ErrorKind::InvalidArgument, "instrument needs at least one branch");
    std::vector<Matrix> all;
    for (const auto& b : branches) {
      for (const auto& k : b) {
        if (k.rows() != output.total_dim() || k.cols() != input.total_dim()) {
          throw Error(ErrorKind::DimensionMismatch, "Kraus operator shape does not match output x input");
        }
        all.push_back(k);
      }
    }
    const auto d = input.total_dim();
    const double defect = (detail::kraus_sum(all, d) - Matrix::Identity(d, d)).cwiseAbs().maxCoeff();
    if (defect > psd_tol) throw Error(ErrorKind::NotTracePreserving, "|sum K^dagger K - 1|_max = " + std::to_string(defect));
    return QuantumInstrument(std::move(input), std::move(output), std::move(branches));
  }

  /// Projective measurement in the computational basis.
  static QuantumInstrument computational_measurement(const SubsystemDims& dims) {
    const auto d = dims.total_dim();
    std::vector<std::vector<Matrix>> branches;
    for (Eigen::Index i = 0; i < d; ++i) {
      Matrix p = Matrix::Zero(d, d);
      p(i, i) = 1.0;
      branches.push_back({p});
    }
    return QuantumInstrument(dims, dims, std::move(branches));
  }

  const SubsystemDims& input_dims() const { return input_; }
  const SubsystemDims& output_dims() const { return output_; }
  const std::vector<std::vector<Matrix>>& branches() const { return branches_; }

 private:
  QuantumInstrument(SubsystemDims in, SubsystemDims out, std::vector<std::vector<Matrix>> branches)
      : input_(std::move(in)), output_(std::move(out)), branches_(std::move(branches)) {}

  SubsystemDims input_;
  SubsystemDims output_;
  std::vector<std::vector<Matrix>> branches_;
};

struct InstrumentOutcome {
  std::size_t branch = 0;
  double probability = 0.0;
  DensityMatrix state;
};

namespace detail {

inline std::vector<InstrumentOutcome> normalize_outcomes(std::vector<std::pair<std::size_t, Matrix>> raw,
                                                          const SubsystemDims& dims, const Tolerances& tol,
                                                          double p_floor) {
  std::vector<InstrumentOutcome> out;
  double total = 0.0;
  for (auto& [k, m] : raw) {
    const double p = m.trace().real();
    if (p < p_floor) continue;
    total += p;
    out.push_back({k, p, DensityMatrix::from_trusted(m, dims, tol)});
  }
  if (out.empty()) throw Error(ErrorKind::InvalidArgument, "every instrument outcome fell below p_floor");
  for (auto& o : out) o.probability /= total;
  return out;
}

}  // namespace detail

/// Outcomes (p_k, theta_k); branches with p_k < p_floor are dropped and the rest renormalized.
inline std::vector<InstrumentOutcome> apply_instrument(const QuantumInstrument& instrument, const DensityMatrix& rho,
                                                       double p_floor = 1e-12) {
  if (rho.dim() != instrument.input_dims().total_dim()) {
    throw Error(ErrorKind::DimensionMismatch, "state dimension does not match instrument input");
  }
  std::vector<std::pair<std::size_t, Matrix>> raw;
  const auto dout = instrument.output_dims().total_dim();
  for (std::size_t k = 0; k < instrument.branches().size(); ++k) {
    Matrix m = Matrix::Zero(dout, dout);
    for (const auto& kr : instrument.branches()[k]) m += kr * rho.matrix() * kr.adjoint();
    raw.emplace_back(k, std::move(m));
  }
  return detail::normalize_outcomes(std::move(raw), instrument.output_dims(), rho.tolerances(), p_floor);
}

/// Instrument acting on register `label` only (a unilocal instrument).
inline std::vector<InstrumentOutcome> apply_local_instrument(const QuantumInstrument& instrument, const DensityMatrix& rho,
                                                             const std::string& label, double p_floor = 1e-12) {
  if (instrument.input_dims().total_dim() != rho.dims().dim_of(label)) {
    throw Error(ErrorKind::DimensionMismatch, "local instrument input does not match register '" + label + "'");
  }
  const int out_dim = static_cast<int>(instrument.output_dims().total_dim());
  std::vector<std::pair<std::size_t, Matrix>> raw;
  std::vector<std::string> order;
  SubsystemDims moved_dims;
  for (std::size_t k = 0; k < instrument.branches().size(); ++k) {
    Matrix m = detail::apply_local_kraus(rho, label, instrument.branches()[k], out_dim, order, moved_dims);
    raw.emplace_back(k, std::move(m));
  }
  auto outcomes = detail::normalize_outcomes(std::move(raw), moved_dims, rho.tolerances(), p_floor);
  for (auto& o : outcomes) o.state = permute(o.state, order);
  return outcomes;
}

// ---------------------------------------------------------------------------
// random ensembles

namespace detail {

inline Matrix ginibre(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Matrix g(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double re = standard_normal(rng);
      const double im = standard_normal(rng);
      g(i, j) = Complex(re, im);
    }
  }
  return g;
}

/// Haar-like isometry of shape rows x cols (rows >= cols) from a Gaussian QR.
inline Matrix random_isometry(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  const Matrix g = ginibre(rows, cols, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(rows, cols);
  const Matrix r = qr.matrixQR().topLeftCorner(cols, cols).triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < cols; ++j) {
    const Complex d = r(j, j);
    if (std::abs(d) > 0.0) q.col(j) *= d / std::abs(d);
  }
  return q;
}

}  // namespace detail

/// rho = G G^dagger / Tr with G a total_dim x rank complex Gaussian matrix.
inline DensityMatrix random_density(const SubsystemDims& dims, int rank, std::uint64_t seed) {
  if (rank < 1 || rank > dims.total_dim()) {
    throw Error(ErrorKind::InvalidRank, "rank " + std::to_string(rank) + " outside [1, " +
                                            std::to_string(dims.total_dim()) + "]");
  }
  Rng rng(seed);
  const Matrix g = detail::ginibre(dims.total_dim(), rank, rng);
  return DensityMatrix::from_trusted(g * g.adjoint(), dims);
}

inline DensityMatrix random_density(const SubsystemDims& dims, std::uint64_t seed) {
  return random_density(dims, static_cast<int>(dims.total_dim()), seed);
}

inline PureState random_pure(const SubsystemDims& dims, std::uint64_t seed) {
  Rng rng(seed);
  const Matrix g = detail::ginibre(dims.total_dim(), 1, rng);
  return PureState::normalized(g.col(0), dims);
}

/// Channel from the Stinespring dilation of a random isometry in -> out (x) env(kraus_count).
inline QuantumChannel random_channel(const SubsystemDims& input, const SubsystemDims& output, int kraus_count,
                                     std::uint64_t seed) {
  const auto din = input.total_dim();
  const auto dout = output.total_dim();
  if (kraus_count < 1 || dout * kraus_count < din) {
    throw Error(ErrorKind::InvalidRank, "need kraus_count >= 1 and kraus_count * out_dim >= in_dim");
  }
  Rng rng(seed);
  const Matrix v = detail::random_isometry(dout * kraus_count, din, rng);
  std::vector<Matrix> kraus;
  for (int j = 0; j < kraus_count; ++j) kraus.push_back(v.block(j * dout, 0, dout, din));
  return QuantumChannel::make(input, output, std::move(kraus));
}

/// Instrument with `outcomes` branches of `kraus_per_outcome` Kraus operators each.
inline QuantumInstrument random_instrument(const SubsystemDims& dims, int outcomes, int kraus_per_outcome,
                                           std::uint64_t seed) {
  const auto d = dims.total_dim();
  const int total = outcomes * kraus_per_outcome;
  if (outcomes < 1 || kraus_per_outcome < 1 || d * total < d) {
    throw Error(ErrorKind::InvalidRank, "instrument needs at least one outcome and one Kraus operator per outcome");
  }
  Rng rng(seed);
  const Matrix v = detail::random_isometry(d * total, d, rng);
  std::vector<std::vector<Matrix>> branches(outcomes);
  for (int j = 0; j < total; ++j) branches[j / kraus_per_outcome].push_back(v.block(j * d, 0, d, d));
  return QuantumInstrument::make(dims, dims, std::move(branches));
}

// ---------------------------------------------------------------------------
// named states

/// |Phi_K> = sum_i |ii> / sqrt(K) on registers A, B.
inline PureState maximally_entangled(int k, const std::string& a = "A", const std::string& b = "B") {
  Vector v = Vector::Zero(static_cast<Eigen::Index>(k) * k);
  for (int i = 0; i < k; ++i) v(i * k + i) = 1.0 / std::sqrt(static_cast<double>(k));
  return PureState::normalized(v, SubsystemDims({{a, k}, {b, k}}));
}

/// sum_i sqrt(p_i) |ii> on A, B with dim = number of weights.
inline PureState schmidt_state(const std::vector<double>& weights, const std::string& a = "A", const std::string& b = "B") {
  const int k = static_cast<int>(weights.size());
  if (k < 1) throw Error(ErrorKind::InvalidArgument, "schmidt state needs at least one weight");
  Vector v = Vector::Zero(static_cast<Eigen::Index>(k) * k);
  for (int i = 0; i < k; ++i) {
    if (weights[i] < 0.0) throw Error(ErrorKind::InvalidArgument, "schmidt weights must be nonnegative");
    v(i * k + i) = std::sqrt(weights[i]);
  }
  return PureState::normalized(v, SubsystemDims({{a, k}, {b, k}}));
}

/// Computational basis vector |index> on the given registers.
inline PureState basis_state(const SubsystemDims& dims, Eigen::Index index) {
  Vector v = Vector::Zero(dims.total_dim());
  v(index) = 1.0;
  return PureState::normalized(v, dims);
}

inline DensityMatrix diagonal_state(const std::vector<double>& probs, const std::string& label = "A") {
  RealVector p(static_cast<Eigen::Index>(probs.size()));
  for (std::size_t i = 0; i < probs.size(); ++i) p(static_cast<Eigen::Index>(i)) = probs[i];
  return DensityMatrix::validate(p.cast<Complex>().asDiagonal(), SubsystemDims::single(static_cast<int>(probs.size()), label));
}

}  // namespace renyi
