#pragma once

// Renyi relative entropy of entanglement E_alpha(A:B): coherent-information
// lower bounds, the pure-state sandwich, the fidelity-perturbed bound, the
// van Dam-Hayden inequality and a feasible-point estimator of the infimum.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "renyi/entropy.hpp"
#include "renyi/error.hpp"
#include "renyi/linalg.hpp"
#include "renyi/parallel.hpp"
#include "renyi/qstate.hpp"
#include "renyi/random.hpp"

namespace renyi {

struct ProductTerm {
  double weight = 0.0;
  Vector a;
  Vector b;
};

/// sigma = sum_i w_i |a_i><a_i| (x) |b_i><b_i|, with A = left registers, B = right.
struct SeparableDecomposition {
  std::vector<ProductTerm> terms;
  SubsystemDims left_dims;
  SubsystemDims right_dims;

  Matrix assemble() const {
    const auto d = left_dims.total_dim() * right_dims.total_dim();
    Matrix sigma = Matrix::Zero(d, d);
    for (const auto& t : terms) {
      const Vector v = kron(t.a, t.b);
      sigma.noalias() += t.weight * (v * v.adjoint());
    }
    return sigma;
  }

  DensityMatrix density() const {
    return DensityMatrix::validate(assemble(), left_dims.concat(right_dims));
  }

  void validate(double tol = 1e-9) const {
    double total = 0.0;
    for (const auto& t : terms) {
      if (!(t.weight > 0.0)) throw Error(ErrorKind::InvalidArgument, "separable term weight must be positive");
      if (t.a.size() != left_dims.total_dim() || t.b.size() != right_dims.total_dim()) {
        throw Error(ErrorKind::DimensionMismatch, "separable term vector has wrong dimension");
      }
      if (std::abs(t.a.norm() - 1.0) > tol || std::abs(t.b.norm() - 1.0) > tol) {
        throw Error(ErrorKind::NotUnitTrace, "separable term vector is not unit norm");
      }
      total += t.weight;
    }
    if (std::abs(total - 1.0) > tol) throw Error(ErrorKind::NotUnitTrace, "separable weights do not sum to 1");
  }
};

struct RreeEstimate {
  double alpha = 0.0;
  double upper_estimate = kInf;
  double analytic_lower = -kInf;
  std::optional<double> analytic_upper;
  SeparableDecomposition witness;
  std::vector<std::pair<int, double>> optimizer_trace;
  bool weak_guarantee = false;  // alpha < 1: coherent-information lower bound not proven there
  int restarts_run = 0;
  int best_restart = -1;        // -1 when an unoptimized seed won
};

struct RreeConfig {
  int terms_count = 0;  // 0 selects (d_A d_B)^2
  int restarts = 4;
  int max_iters = 300;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  double seed_mixing = 1e-6;
};

namespace detail {

inline BipartiteSplit swapped(const BipartiteSplit& s) { return {s.right, s.left}; }

inline void check_rree_alpha(double alpha) {
  if (std::isnan(alpha) || alpha < 0.0 || alpha > 2.0) {
    throw Error(ErrorKind::AlphaOutOfRange, "alpha = " + std::to_string(alpha) + " outside [0, 2]");
  }
}

}  // namespace detail

/// max{I_alpha(A>B), I_alpha(B>A)}.
inline double rree_lower(const DensityMatrix& rho, const BipartiteSplit& split, RenyiOrder order) {
  detail::check_rree_alpha(order.alpha());
  return std::max(coherent_information_renyi(rho, split, order),
                  coherent_information_renyi(rho, detail::swapped(split), order));
}

struct RreeBounds {
  double lower = 0.0;
  double upper = 0.0;
};

/// (S_{1/alpha}(A), S_{2-alpha}(A)) for a pure state.
inline RreeBounds rree_bounds_pure(const PureState& psi, const BipartiteSplit& split, RenyiOrder order) {
  const double alpha = order.alpha();
  detail::check_rree_alpha(alpha);
  split.validate(psi.dims());
  const DensityMatrix rho_a = partial_trace(psi, split.left);
  const double inv = alpha == 0.0 ? kInf : 1.0 / alpha;
  return {renyi_entropy(rho_a, inv), renyi_entropy(rho_a, 2.0 - alpha)};
}

/// (2 alpha/(alpha-1)) log F + S_{1/(2-alpha)}(A)_psi, valid when F(psi, rho) >= f_val.
inline double lemma5_lower(const PureState& psi, const DensityMatrix& rho, const BipartiteSplit& split,
                           RenyiOrder order, double f_val) {
  const double alpha = order.alpha();
  if (!(alpha > 1.0 && alpha <= 2.0)) {
    throw Error(ErrorKind::AlphaOutOfRange, "fidelity-perturbed bound needs alpha in (1, 2]");
  }
  if (std::isnan(f_val) || f_val < 0.0 || f_val > 1.0) {
    throw Error(ErrorKind::InvalidArgument, "fidelity value must lie in (0, 1]");
  }
  const double actual = fidelity(psi, rho);
  if (actual < f_val - 1e-12) {
    throw Error(ErrorKind::FidelityPreconditionFailed,
                "F(psi, rho) = " + std::to_string(actual) + " < " + std::to_string(f_val));
  }
  split.validate(psi.dims());
  const double order_a = alpha == 2.0 ? kInf : 1.0 / (2.0 - alpha);
  const double s = renyi_entropy(partial_trace(psi, split.left), order_a);
  if (f_val == 0.0) return -kInf;
  return 2.0 * alpha / (alpha - 1.0) * std::log2(f_val) + s;
}

/// S_alpha(rho) - S_beta(sigma) - (2 alpha/(1-alpha)) log F(rho, sigma); nonnegative by van Dam-Hayden.
inline double van_dam_hayden_gap(const DensityMatrix& rho, const DensityMatrix& sigma, RenyiOrder order) {
  const double beta = order.beta();
  const double alpha = order.alpha();
  const double f = fidelity(rho, sigma);
  if (f <= 0.0) return kInf;
  return renyi_entropy(rho, alpha) - renyi_entropy(sigma, beta) - 2.0 * alpha / (1.0 - alpha) * std::log2(f);
}

namespace detail {

/// sigma -> S_alpha(rho || sigma) with its matrix gradient H (dS = Re Tr H dsigma).
class DivergenceObjective {
 public:
  DivergenceObjective(const Matrix& rho, double alpha) : alpha_(alpha) {
    if (alpha == 1.0) {
      x_ = rho;
      const RealVector r = clipped_spectrum(hermitian_eigen(rho).values);
      CompensatedSum c;
      for (Eigen::Index i = 0; i < r.size(); ++i) {
        if (r(i) > 0.0) c.add(r(i) * std::log2(r(i)));
      }
      const_term_ = c.value();
    } else {
      x_ = matrix_power(rho, alpha);
    }
    x_ = 0.5 * (x_ + x_.adjoint());
    leak_ = kSupportLeak * std::max(x_.trace().real(), 1e-300);
  }

  double operator()(const Matrix& sigma, Matrix* grad) const {
    const HermitianEigen eig = hermitian_eigen(sigma);
    const Eigen::Index d = sigma.rows();
    const double cut = zero_cutoff(d, eig.max_value());
    const Matrix y = eig.vectors.adjoint() * x_ * eig.vectors;
    RealVector s = eig.values;
    double acc = 0.0;
    for (Eigen::Index k = 0; k < d; ++k) {
      const double ykk = y(k, k).real();
      if (s(k) <= cut) {
        if ((alpha_ >= 1.0) && ykk > leak_) return kInf;
        s(k) = std::max(cut, 1e-300);
        continue;
      }
      acc += (alpha_ == 1.0 ? -std::log2(s(k)) : std::pow(s(k), 1.0 - alpha_)) * ykk;
    }
    double value = 0.0;
    double scale = 0.0;
    if (alpha_ == 1.0) {
      value = const_term_ + acc;
      scale = -1.0 / std::numbers::ln2;
    } else {
      if (!(acc > 0.0)) return kInf;
      value = std::log2(acc) / (alpha_ - 1.0);
      scale = 1.0 / ((alpha_ - 1.0) * acc * std::numbers::ln2);
    }
    if (grad) {
      Matrix gamma(d, d);
      for (Eigen::Index j = 0; j < d; ++j) {
        for (Eigen::Index k = 0; k < d; ++k) gamma(j, k) = divided_difference(s(j), s(k));
      }
      *grad = scale * (eig.vectors * gamma.cwiseProduct(y) * eig.vectors.adjoint());
    }
    return value;
  }

 private:
  // g(t) = t^{1-alpha}, or ln t at alpha = 1.
  double divided_difference(double sj, double sk) const {
    const double d = (sj - sk) / sk;
    if (alpha_ == 1.0) {
      if (d == 0.0) return 1.0 / sk;
      if (std::abs(d) < 0.5) return std::log1p(d) / (d * sk);
      return (std::log(sj) - std::log(sk)) / (sj - sk);
    }
    const double p = 1.0 - alpha_;
    if (d == 0.0) return p * std::pow(sk, -alpha_);
    if (std::abs(d) < 0.5) return std::pow(sk, p - 1.0) * std::expm1(p * std::log1p(d)) / d;
    return (std::pow(sj, p) - std::pow(sk, p)) / (sj - sk);
  }

  double alpha_;
  Matrix x_;
  double const_term_ = 0.0;
  double leak_ = 0.0;
};

/// Real parameter vector theta: per term [u, Re x, Im x, Re y, Im y];
/// w_i = u_i^2 / sum u^2, a_i = x_i/|x_i|, b_i = y_i/|y_i|.
class ProductParametrization {
 public:
  ProductParametrization(Eigen::Index da, Eigen::Index db, int terms) : da_(da), db_(db), terms_(terms) {}

  Eigen::Index size() const { return stride() * terms_; }
  int terms() const { return terms_; }

  Vector x_of(const RealVector& th, int i) const {
    const Eigen::Index o = stride() * i + 1;
    Vector x(da_);
    for (Eigen::Index p = 0; p < da_; ++p) x(p) = Complex(th(o + p), th(o + da_ + p));
    return x;
  }

  Vector y_of(const RealVector& th, int i) const {
    const Eigen::Index o = stride() * i + 1 + 2 * da_;
    Vector y(db_);
    for (Eigen::Index r = 0; r < db_; ++r) y(r) = Complex(th(o + r), th(o + db_ + r));
    return y;
  }

  double u_of(const RealVector& th, int i) const { return th(stride() * i); }

  void set(RealVector& th, int i, double u, const Vector& x, const Vector& y) const {
    const Eigen::Index o = stride() * i;
    th(o) = u;
    for (Eigen::Index p = 0; p < da_; ++p) {
      th(o + 1 + p) = x(p).real();
      th(o + 1 + da_ + p) = x(p).imag();
    }
    for (Eigen::Index r = 0; r < db_; ++r) {
      th(o + 1 + 2 * da_ + r) = y(r).real();
      th(o + 1 + 2 * da_ + db_ + r) = y(r).imag();
    }
  }

  /// Normalized decomposition; terms with degenerate vectors or weights are dropped.
  std::vector<ProductTerm> terms_of(const RealVector& th) const {
    double su = 0.0;
    for (int i = 0; i < terms_; ++i) su += u_of(th, i) * u_of(th, i);
    std::vector<ProductTerm> out;
    for (int i = 0; i < terms_; ++i) {
      const double w = su > 0.0 ? u_of(th, i) * u_of(th, i) / su : 0.0;
      Vector x = x_of(th, i);
      Vector y = y_of(th, i);
      const double nx = x.norm();
      const double ny = y.norm();
      if (!(w > 0.0) || !(nx > 0.0) || !(ny > 0.0)) continue;
      out.push_back({w, x / nx, y / ny});
    }
    return out;
  }

  Matrix sigma_of(const RealVector& th) const {
    const Eigen::Index d = da_ * db_;
    Matrix sigma = Matrix::Zero(d, d);
    double total = 0.0;
    for (const auto& t : terms_of(th)) {
      const Vector v = kron(t.a, t.b);
      sigma.noalias() += t.weight * (v * v.adjoint());
      total += t.weight;
    }
    if (total > 0.0) sigma /= total;
    return sigma;
  }

  /// Pulls the matrix gradient H back to theta.
  RealVector pullback(const RealVector& th, const Matrix& h) const {
    RealVector g = RealVector::Zero(size());
    double su = 0.0;
    for (int i = 0; i < terms_; ++i) su += u_of(th, i) * u_of(th, i);
    if (!(su > 0.0)) return g;
    std::vector<double> c(terms_, 0.0);
    std::vector<double> w(terms_, 0.0);
    double mean_c = 0.0;
    for (int i = 0; i < terms_; ++i) {
      const Vector x = x_of(th, i);
      const Vector y = y_of(th, i);
      const double nx = x.norm();
      const double ny = y.norm();
      if (!(nx > 0.0) || !(ny > 0.0)) continue;
      const Vector a = x / nx;
      const Vector b = y / ny;
      const Vector v = kron(a, b);
      const Vector z = h * v;
      c[i] = v.dot(z).real();
      w[i] = u_of(th, i) * u_of(th, i) / su;
      mean_c += w[i] * c[i];
      Vector ma = Vector::Zero(da_);
      Vector mb = Vector::Zero(db_);
      for (Eigen::Index p = 0; p < da_; ++p) {
        for (Eigen::Index r = 0; r < db_; ++r) {
          ma(p) += std::conj(b(r)) * z(p * db_ + r);
          mb(r) += std::conj(a(p)) * z(p * db_ + r);
        }
      }
      const Vector gx = 2.0 * w[i] * (ma - c[i] * a) / nx;
      const Vector gy = 2.0 * w[i] * (mb - c[i] * b) / ny;
      const Eigen::Index o = stride() * i;
      for (Eigen::Index p = 0; p < da_; ++p) {
        g(o + 1 + p) = gx(p).real();
        g(o + 1 + da_ + p) = gx(p).imag();
      }
      for (Eigen::Index r = 0; r < db_; ++r) {
        g(o + 1 + 2 * da_ + r) = gy(r).real();
        g(o + 1 + 2 * da_ + db_ + r) = gy(r).imag();
      }
    }
    for (int i = 0; i < terms_; ++i) g(stride() * i) = 2.0 * u_of(th, i) / su * (c[i] - mean_c);
    return g;
  }

 private:
  Eigen::Index stride() const { return 1 + 2 * da_ + 2 * db_; }

  Eigen::Index da_;
  Eigen::Index db_;
  int terms_;
};

struct RestartOutcome {
  RealVector theta;
  double value = kInf;
  std::vector<std::pair<int, double>> trace;
  bool diverged = false;
};

/// L-BFGS with Armijo backtracking. Fifty halvings without sufficient decrease,
/// after a steepest-descent retry, end the run as stationary.
template <typename FG>
RestartOutcome lbfgs_minimize(FG&& fg, RealVector theta, int max_iters) {
  constexpr int kMemory = 10;
  constexpr int kMaxHalvings = 50;
  constexpr double kArmijo = 1e-4;
  RestartOutcome out;
  RealVector g;
  double f = fg(theta, &g);
  if (std::isnan(f) || !g.allFinite()) {
    out.diverged = true;
    out.theta = theta;
    return out;
  }
  out.trace.emplace_back(0, f);
  if (!std::isfinite(f)) {
    out.theta = theta;
    out.value = f;
    return out;
  }
  std::vector<RealVector> ss;
  std::vector<RealVector> ys;
  int flat = 0;
  for (int it = 1; it <= max_iters; ++it) {
    if (g.norm() < 1e-12) break;
    bool accepted = false;
    RealVector theta_new;
    RealVector g_new;
    double f_new = f;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      RealVector d = -g;
      double t = 1.0;
      if (!ss.empty()) {
        std::vector<double> rho(ss.size());
        std::vector<double> al(ss.size());
        RealVector q = g;
        for (std::size_t k = ss.size(); k-- > 0;) {
          rho[k] = 1.0 / ys[k].dot(ss[k]);
          al[k] = rho[k] * ss[k].dot(q);
          q -= al[k] * ys[k];
        }
        q *= ss.back().dot(ys.back()) / ys.back().squaredNorm();
        for (std::size_t k = 0; k < ss.size(); ++k) {
          const double be = rho[k] * ys[k].dot(q);
          q += (al[k] - be) * ss[k];
        }
        d = -q;
        if (!(g.dot(d) < 0.0)) {
          ss.clear();
          ys.clear();
          d = -g;
        }
      }
      if (ss.empty()) t = std::min(1.0, 1.0 / g.norm());
      const double slope = g.dot(d);
      for (int h = 0; h < kMaxHalvings; ++h, t *= 0.5) {
        RealVector cand = theta + t * d;
        RealVector gc;
        const double fc = fg(cand, &gc);
        if (std::isfinite(fc) && gc.allFinite() && fc <= f + kArmijo * t * slope) {
          theta_new = std::move(cand);
          g_new = std::move(gc);
          f_new = fc;
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        if (ss.empty()) break;
        ss.clear();
        ys.clear();
      }
    }
    if (!accepted) break;
    RealVector s = theta_new - theta;
    RealVector y = g_new - g;
    if (s.dot(y) > 1e-12 * s.norm() * y.norm()) {
      ss.push_back(std::move(s));
      ys.push_back(std::move(y));
      if (static_cast<int>(ss.size()) > kMemory) {
        ss.erase(ss.begin());
        ys.erase(ys.begin());
      }
    }
    const double decrease = f - f_new;
    theta = std::move(theta_new);
    g = std::move(g_new);
    f = f_new;
    out.trace.emplace_back(it, f);
    flat = decrease <= 1e-13 * (1.0 + std::abs(f)) ? flat + 1 : 0;
    if (flat >= 5) break;
  }
  out.theta = std::move(theta);
  out.value = f;
  return out;
}

/// Seed decompositions for the optimizer, in left (x) right ordering.
inline std::vector<std::vector<ProductTerm>> structured_seeds(const DensityMatrix& ordered, const BipartiteSplit& split) {
  std::vector<std::vector<ProductTerm>> seeds;
  const RealVector spec = clipped_spectrum(hermitian_eigen(ordered.matrix()).values);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < spec.size(); ++i) rank += spec(i) > 0.0 ? 1 : 0;
  if (rank == 1) {
    const HermitianEigen eig = hermitian_eigen(ordered.matrix());
    const PureState psi = PureState::normalized(eig.vectors.col(eig.values.size() - 1), ordered.dims());
    const SchmidtForm form = schmidt(psi, split);
    std::vector<ProductTerm> terms;
    for (std::size_t i = 0; i < form.rank(); ++i) {
      terms.push_back({form.coefficients[i] * form.coefficients[i], form.left_basis[i], form.right_basis[i]});
    }
    seeds.push_back(std::move(terms));
  }
  const HermitianEigen ea = hermitian_eigen(partial_trace(ordered, split.left).matrix());
  const HermitianEigen eb = hermitian_eigen(partial_trace(ordered, split.right).matrix());
  std::vector<ProductTerm> dephased;
  std::vector<ProductTerm> marginal;
  for (Eigen::Index a = 0; a < ea.values.size(); ++a) {
    for (Eigen::Index b = 0; b < eb.values.size(); ++b) {
      const Vector va = ea.vectors.col(a);
      const Vector vb = eb.vectors.col(b);
      const Vector v = kron(va, vb);
      const double w = (v.adjoint() * ordered.matrix() * v)(0, 0).real();
      if (w > 0.0) dephased.push_back({w, va, vb});
      const double m = std::max(ea.values(a), 0.0) * std::max(eb.values(b), 0.0);
      if (m > 0.0) marginal.push_back({m, va, vb});
    }
  }
  if (!dephased.empty()) seeds.push_back(std::move(dephased));
  if (!marginal.empty()) seeds.push_back(std::move(marginal));
  for (auto& s : seeds) {
    double total = 0.0;
    for (const auto& t : s) total += t.weight;
    for (auto& t : s) t.weight /= total;
  }
  return seeds;
}

inline Vector random_unit(Eigen::Index d, Rng& rng) {
  Vector v(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double re = standard_normal(rng);
    const double im = standard_normal(rng);
    v(i) = Complex(re, im);
  }
  return v / v.norm();
}

/// Seed padded to exactly `terms` entries: (1 - eps) seed + eps spread over the
/// computational product basis and random product vectors.
inline RealVector pack_seed(const ProductParametrization& par, std::vector<ProductTerm> seed, Eigen::Index da,
                            Eigen::Index db, double eps, Rng& rng) {
  const int terms = par.terms();
  std::sort(seed.begin(), seed.end(), [](const ProductTerm& x, const ProductTerm& y) { return x.weight > y.weight; });
  if (static_cast<int>(seed.size()) > terms) seed.resize(terms);
  const int pads = terms - static_cast<int>(seed.size());
  std::vector<ProductTerm> all;
  for (auto& t : seed) all.push_back({(pads > 0 ? 1.0 - eps : 1.0) * t.weight, t.a, t.b});
  for (int k = 0; k < pads; ++k) {
    Vector a;
    Vector b;
    if (k < da * db) {
      a = Vector::Zero(da);
      b = Vector::Zero(db);
      a(k / db) = 1.0;
      b(k % db) = 1.0;
    } else {
      a = random_unit(da, rng);
      b = random_unit(db, rng);
    }
    all.push_back({eps / pads, a, b});
  }
  RealVector th(par.size());
  for (int i = 0; i < terms; ++i) par.set(th, i, std::sqrt(all[i].weight), all[i].a, all[i].b);
  return th;
}

inline RealVector random_theta(const ProductParametrization& par, Eigen::Index da, Eigen::Index db, Rng& rng) {
  RealVector th(par.size());
  for (int i = 0; i < par.terms(); ++i) {
    const double u = standard_normal(rng);
    const Vector a = random_unit(da, rng);
    const Vector b = random_unit(db, rng);
    par.set(th, i, u, a, b);
  }
  return th;
}

}  // namespace detail

/// Feasible-point upper estimate of E_alpha(A:B) = inf over separable sigma of S_alpha(rho || sigma).
inline RreeEstimate rree_estimate(const DensityMatrix& rho, const BipartiteSplit& split, RenyiOrder order,
                                  const RreeConfig& config = {}) {
  const double alpha = order.alpha();
  detail::check_rree_alpha(alpha);
  split.validate(rho.dims());
  if (config.restarts < 0 || config.max_iters < 0 || config.terms_count < 0) {
    throw Error(ErrorKind::InvalidArgument, "estimator configuration values must be nonnegative");
  }
  std::vector<std::string> order_labels = split.left;
  order_labels.insert(order_labels.end(), split.right.begin(), split.right.end());
  const DensityMatrix ordered = permute(rho, order_labels);
  const BipartiteSplit ordered_split{split.left, split.right};
  const Eigen::Index da = ordered.dims().select(split.left).total_dim();
  const Eigen::Index db = ordered.dims().select(split.right).total_dim();
  const int terms = config.terms_count > 0 ? config.terms_count : static_cast<int>(da * db * da * db);

  const detail::DivergenceObjective objective(ordered.matrix(), alpha);
  const detail::ProductParametrization par(da, db, terms);
  auto fg = [&](const RealVector& th, RealVector* grad) {
    Matrix h;
    const double v = objective(par.sigma_of(th), grad ? &h : nullptr);
    if (grad) *grad = std::isfinite(v) ? par.pullback(th, h) : RealVector::Zero(th.size());
    return v;
  };

  const auto seeds = detail::structured_seeds(ordered, ordered_split);
  const int restarts = std::max(config.restarts, 1);
  const auto outcomes = parallel_map(static_cast<std::size_t>(restarts), config.jobs, [&](std::size_t r) {
    Rng rng(derive_seed(config.seed, r));
    const RealVector th0 = r < seeds.size() ? detail::pack_seed(par, seeds[r], da, db, config.seed_mixing, rng)
                                            : detail::random_theta(par, da, db, rng);
    return detail::lbfgs_minimize(fg, th0, config.max_iters);
  });

  RreeEstimate est;
  est.alpha = alpha;
  est.weak_guarantee = alpha < 1.0;
  est.restarts_run = restarts;
  est.analytic_lower = rree_lower(rho, split, order);
  {
    const RealVector spec = clipped_spectrum(hermitian_eigen(ordered.matrix()).values);
    if ((spec.array() > 0.0).count() == 1) {
      const HermitianEigen eig = hermitian_eigen(ordered.matrix());
      const PureState psi = PureState::normalized(eig.vectors.col(eig.values.size() - 1), ordered.dims());
      est.analytic_upper = rree_bounds_pure(psi, ordered_split, order).upper;
    }
  }

  struct Candidate {
    double value;
    std::vector<ProductTerm> terms;
    int restart;
  };
  std::vector<Candidate> candidates;
  bool all_diverged = true;
  for (std::size_t r = 0; r < outcomes.size(); ++r) {
    if (!outcomes[r].diverged) all_diverged = false;
    if (outcomes[r].diverged || outcomes[r].theta.size() == 0) continue;
    candidates.push_back({0.0, par.terms_of(outcomes[r].theta), static_cast<int>(r)});
  }
  for (const auto& s : seeds) candidates.push_back({0.0, s, -1});
  if (all_diverged && candidates.size() == seeds.size() && seeds.empty()) {
    throw Error(ErrorKind::OptimizerDiverged, "every restart produced NaN");
  }

  const SubsystemDims left_dims = ordered.dims().select(split.left);
  const SubsystemDims right_dims = ordered.dims().select(split.right);
  int best = -1;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    SeparableDecomposition dec{candidates[c].terms, left_dims, right_dims};
    double total = 0.0;
    for (const auto& t : dec.terms) total += t.weight;
    for (auto& t : dec.terms) t.weight /= total;
    candidates[c].terms = dec.terms;
    candidates[c].value = renyi_relative(ordered.matrix(), dec.assemble(), order).value;
    if (std::isfinite(candidates[c].value) && (best < 0 || candidates[c].value < candidates[best].value)) {
      best = static_cast<int>(c);
    }
  }
  if (best < 0) {
    if (all_diverged) throw Error(ErrorKind::OptimizerDiverged, "every restart produced NaN");
    throw Error(ErrorKind::SupportIncompatible, "every candidate separable state has S_alpha = +inf");
  }

  est.upper_estimate = candidates[best].value;
  est.best_restart = candidates[best].restart;
  est.witness = {candidates[best].terms, left_dims, right_dims};
  const auto& trace_src = est.best_restart >= 0 ? outcomes[est.best_restart].trace : outcomes.front().trace;
  double running = kInf;
  for (const auto& [it, v] : trace_src) {
    running = std::min(running, v);
    est.optimizer_trace.emplace_back(it, running);
  }
  const int last = est.optimizer_trace.empty() ? 0 : est.optimizer_trace.back().first + 1;
  if (est.upper_estimate < running) est.optimizer_trace.emplace_back(last, est.upper_estimate);
  return est;
}

}  // namespace renyi
