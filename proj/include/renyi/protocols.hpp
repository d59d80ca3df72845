#pragma once

// Exact achievability simulators: typical-subspace Schumacher compression and
// type-class entanglement concentration, plus the bound-vs-protocol harness.

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "renyi/converse.hpp"
#include "renyi/error.hpp"
#include "renyi/linalg.hpp"
#include "renyi/qstate.hpp"

namespace renyi {

using BigInt = boost::multiprecision::cpp_int;

/// log2 of a positive big integer, accurate to double precision.
inline double big_log2(const BigInt& x) {
  if (x <= 0) return -kInf;
  const auto msb = static_cast<long>(boost::multiprecision::msb(x));
  if (msb < 1000) return std::log2(x.convert_to<double>());
  const long shift = msb - 62;
  const BigInt top = x >> shift;
  return std::log2(top.convert_to<double>()) + static_cast<double>(shift);
}

/// floor(2^e) for e >= 0. Exponents within 1e-9 of an integer are snapped to it.
inline BigInt floor_pow2(double e) {
  if (std::isnan(e) || e < 0.0) throw Error(ErrorKind::RateOutOfRange, "exponent must be >= 0");
  const double r = std::round(e);
  if (std::abs(e - r) <= 1e-9) return BigInt(1) << static_cast<unsigned>(r);
  const double whole = std::floor(e);
  if (whole < 52.0) return BigInt(static_cast<unsigned long long>(std::floor(std::exp2(e))));
  const auto mant = static_cast<unsigned long long>(std::floor(std::exp2(e - whole + 52.0)));
  return BigInt(mant) << static_cast<unsigned>(whole - 52.0);
}

/// Strings of n symbols with counts k: n!/(k_1! ... k_d!) of them, each with probability prod lambda_i^{k_i}.
struct SpectrumTypeClass {
  std::vector<int> counts;
  BigInt multiplicity;
  double log2_multiplicity = 0.0;
  double log2_probability = -kInf;  // of one string

  double probability() const { return std::exp2(log2_probability); }
  /// Total weight multiplicity * probability.
  double mass() const { return std::isfinite(log2_probability) ? std::exp2(log2_multiplicity + log2_probability) : 0.0; }
};

inline constexpr long kMaxCopies = 10000;

namespace detail {

inline void check_probabilities(const std::vector<double>& p) {
  if (p.empty()) throw Error(ErrorKind::InvalidArgument, "probability vector is empty");
  double total = 0.0;
  for (double x : p) {
    if (std::isnan(x) || x < 0.0) throw Error(ErrorKind::NotPSD, "probabilities must be nonnegative");
    total += x;
  }
  if (std::abs(total - 1.0) > 1e-9) throw Error(ErrorKind::NotUnitTrace, "probabilities sum to " + std::to_string(total));
}

inline void check_copies(long n) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "n must be a positive integer");
  if (n > kMaxCopies) throw Error(ErrorKind::TooLarge, "n = " + std::to_string(n) + " exceeds 10^4");
}

inline void enumerate_types(const std::vector<double>& log2_lambda, int pos, int remaining, std::vector<int>& counts,
                            const BigInt& mult, double log2_prob, std::vector<SpectrumTypeClass>& out) {
  const int d = static_cast<int>(log2_lambda.size());
  if (pos == d - 1) {
    counts[pos] = remaining;
    double lp = log2_prob;
    if (remaining > 0) lp = std::isinf(log2_lambda[pos]) ? -kInf : lp + remaining * log2_lambda[pos];
    out.push_back({counts, mult, big_log2(mult), lp});
    return;
  }
  BigInt binom = 1;  // C(remaining, k)
  for (int k = 0; k <= remaining; ++k) {
    if (k > 0) binom = binom * (remaining - k + 1) / k;
    counts[pos] = k;
    double lp = log2_prob;
    if (k > 0) lp = std::isinf(log2_lambda[pos]) ? -kInf : lp + k * log2_lambda[pos];
    enumerate_types(log2_lambda, pos + 1, remaining - k, counts, mult * binom, lp, out);
  }
}

}  // namespace detail

/// All type classes of lambda^{(x) n}, in lexicographic order of counts.
inline std::vector<SpectrumTypeClass> type_classes(const std::vector<double>& lambda, long n) {
  detail::check_probabilities(lambda);
  detail::check_copies(n);
  const int d = static_cast<int>(lambda.size());
  double classes = 1.0;
  for (int i = 1; i < d; ++i) classes = classes * static_cast<double>(n + i) / i;
  if (classes > 2e6) throw Error(ErrorKind::TooLarge, "too many type classes to enumerate");
  std::vector<double> log2_lambda;
  for (double x : lambda) log2_lambda.push_back(x > 0.0 ? std::log2(x) : -kInf);
  std::vector<SpectrumTypeClass> out;
  std::vector<int> counts(d, 0);
  detail::enumerate_types(log2_lambda, 0, static_cast<int>(n), counts, BigInt(1), 0.0, out);
  return out;
}

struct ProtocolRunResult {
  std::string protocol;
  long n = 0;
  double rate = 0.0;
  double eta = 0.0;                          // kept eigenvalue mass (Schumacher)
  double fidelity_lower = 0.0;               // achievable guarantee
  std::optional<double> fidelity_exact;      // exact evaluation when available
  std::optional<double> postselected_fidelity;  // sqrt(eta): overlap of the renormalized kept branch
  std::optional<double> success_prob;
  std::optional<double> expected_yield;      // E[log M_k] for concentration
  std::vector<std::pair<double, double>> yield_distribution;  // (log2 M_k, p_k)
  std::string kept_dimension;                // floor(2^{nR}) or L, decimal
};

namespace detail {

/// Snaps n*rate to an integer when within 1e-9, and to n log d at the top.
inline double total_bits(long n, double rate, double log_d) {
  double e = static_cast<double>(n) * rate;
  const double top = static_cast<double>(n) * log_d;
  if (std::abs(e - top) <= 1e-9) e = top;
  const double r = std::round(e);
  if (std::abs(e - r) <= 1e-9) e = r;
  return e;
}

}  // namespace detail

/// Kept mass eta: sum of the floor(2^{nR}) largest eigenvalues of rho^{(x) n}.
/// The guarantee fidelity_lower is eta (F >= <Psi|P|Psi> = eta); sqrt(eta) is reported separately.
inline ProtocolRunResult schumacher_mass(const std::vector<double>& lambda, long n, double rate) {
  detail::check_probabilities(lambda);
  detail::check_copies(n);
  const double log_d = std::log2(static_cast<double>(lambda.size()));
  if (std::isnan(rate) || rate < -1e-12 || rate > log_d + 1e-9) {
    throw Error(ErrorKind::RateOutOfRange, "rate " + std::to_string(rate) + " outside [0, log d]");
  }
  const double bits = detail::total_bits(n, std::max(rate, 0.0), log_d);
  ProtocolRunResult res;
  res.protocol = "schumacher";
  res.n = n;
  res.rate = rate;
  const auto d = static_cast<unsigned>(lambda.size());
  const BigInt keep = bits == static_cast<double>(n) * log_d ? boost::multiprecision::pow(BigInt(d), static_cast<unsigned>(n))
                                                              : floor_pow2(bits);
  res.kept_dimension = keep.str();
  auto classes = type_classes(lambda, n);
  std::stable_sort(classes.begin(), classes.end(), [](const SpectrumTypeClass& a, const SpectrumTypeClass& b) {
    return a.log2_probability > b.log2_probability;
  });
  CompensatedSum eta;
  BigInt left = keep;
  for (const auto& c : classes) {
    if (left <= 0 || !std::isfinite(c.log2_probability)) break;
    if (c.multiplicity <= left) {
      eta.add(c.mass());
      left -= c.multiplicity;
    } else {
      eta.add(std::exp2(big_log2(left) + c.log2_probability));
      left = 0;
    }
  }
  res.eta = std::clamp(eta.value(), 0.0, 1.0);
  res.fidelity_lower = res.eta;
  res.postselected_fidelity = std::sqrt(res.eta);
  return res;
}

inline constexpr Eigen::Index kMaxExactDim = 64;

/// Dense evaluation of the keep-top-L compression of rho^{(x) n} with the
/// complement aborted to the top eigenvector; F(Omega^{RA}, Psi^{RA}) exactly.
inline ProtocolRunResult schumacher_exact_small(const DensityMatrix& rho, long n, double rate) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "n must be a positive integer");
  const Eigen::Index d = rho.dim();
  double full = 1.0;
  for (long i = 0; i < n; ++i) full *= static_cast<double>(d);
  if (full > static_cast<double>(kMaxExactDim)) {
    throw Error(ErrorKind::TooLarge, "d^n = " + std::to_string(full) + " exceeds 64 for the dense simulator");
  }
  const HermitianEigen eig = hermitian_eigen(rho.matrix());
  std::vector<double> lambda;
  for (Eigen::Index i = 0; i < d; ++i) lambda.push_back(std::max(eig.values(i), 0.0));
  double total = 0.0;
  for (double x : lambda) total += x;
  for (double& x : lambda) x /= total;
  ProtocolRunResult res = schumacher_mass(lambda, n, rate);

  // rho^{(x) n} in the product eigenbasis: eigenvector for string s is (x)_j v_{s_j}.
  const auto dn = static_cast<Eigen::Index>(full);
  Matrix vectors = Matrix::Identity(1, 1);
  RealVector probs = RealVector::Ones(1);
  for (long c = 0; c < n; ++c) {
    vectors = kron(vectors, eig.vectors);
    RealVector next(probs.size() * d);
    for (Eigen::Index i = 0; i < probs.size(); ++i) {
      for (Eigen::Index j = 0; j < d; ++j) next(i * d + j) = probs(i) * lambda[j];
    }
    probs = next;
  }
  std::vector<Eigen::Index> order(dn);
  for (Eigen::Index i = 0; i < dn; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return probs(a) > probs(b); });
  const auto keep = std::stoll(res.kept_dimension);

  // Purification Psi = sum_s sqrt(p_s) |s>_R |e_s>_A as an R x A coefficient matrix.
  const Matrix coeff = probs.cwiseSqrt().cast<Complex>().asDiagonal() * vectors.transpose();
  auto overlap = [&](const Matrix& k) {  // <Psi| (1 (x) K) |Psi>
    const Matrix applied = coeff * k.transpose();
    return coeff.conjugate().cwiseProduct(applied).sum();
  };
  Matrix projector = Matrix::Zero(dn, dn);
  for (Eigen::Index i = 0; i < std::min<Eigen::Index>(keep, dn); ++i) {
    const Vector v = vectors.col(order[i]);
    projector += v * v.adjoint();
  }
  CompensatedSum f2;
  f2.add(std::norm(overlap(projector)));
  const Vector fallback = vectors.col(order[0]);
  for (Eigen::Index i = keep; i < dn; ++i) {
    const Matrix k = fallback * vectors.col(order[i]).adjoint();
    f2.add(std::norm(overlap(k)));
  }
  res.fidelity_exact = std::clamp(std::sqrt(std::max(f2.value(), 0.0)), 0.0, 1.0);
  return res;
}

/// What Alice's local measurement resolves: strings with equal probability
/// (eigenspaces of rho_A^{(x) n}) or the finer type classes.
enum class ConcentrationClasses { Eigenvalue, Type };

namespace detail {

/// Merges type classes whose single-string probabilities agree to 1e-9 in log2.
inline std::vector<SpectrumTypeClass> merge_equal_probability(std::vector<SpectrumTypeClass> classes) {
  std::stable_sort(classes.begin(), classes.end(), [](const SpectrumTypeClass& a, const SpectrumTypeClass& b) {
    return a.log2_probability > b.log2_probability;
  });
  std::vector<SpectrumTypeClass> out;
  for (auto& c : classes) {
    if (!out.empty() && std::isfinite(c.log2_probability) &&
        std::abs(out.back().log2_probability - c.log2_probability) <= 1e-9) {
      out.back().multiplicity += c.multiplicity;
      out.back().log2_multiplicity = big_log2(out.back().multiplicity);
    } else {
      out.push_back(std::move(c));
    }
  }
  return out;
}

}  // namespace detail

/// Concentration of sum_i sqrt(p_i)|ii>^{(x) n} against a fixed target Phi_L, L = floor(2^{logL}):
/// measure the class k, keep the uniform state of dimension M_k.
/// fidelity_lower = sum_k p_k min(1, sqrt(M_k/L)); fidelity_exact = F(Phi_L, sum_k p_k omega_k).
inline ProtocolRunResult concentrate_simulate(const std::vector<double>& schmidt_probs, long n, double logL,
                                              ConcentrationClasses grouping = ConcentrationClasses::Eigenvalue) {
  detail::check_probabilities(schmidt_probs);
  detail::check_copies(n);
  if (std::isnan(logL) || logL < 0.0) throw Error(ErrorKind::RateOutOfRange, "logL must be >= 0");
  const BigInt target = floor_pow2(logL);
  const double log_target = big_log2(target);
  ProtocolRunResult res;
  res.protocol = "concentrate";
  res.n = n;
  res.rate = logL / static_cast<double>(n);
  res.kept_dimension = target.str();
  auto classes = type_classes(schmidt_probs, n);
  if (grouping == ConcentrationClasses::Eigenvalue) classes = detail::merge_equal_probability(std::move(classes));
  std::stable_sort(classes.begin(), classes.end(),
                   [](const SpectrumTypeClass& a, const SpectrumTypeClass& b) { return a.mass() > b.mass(); });
  CompensatedSum f_avg;
  CompensatedSum f_sq;
  CompensatedSum success;
  CompensatedSum yield;
  for (const auto& c : classes) {
    const double p = c.mass();
    if (p <= 0.0) continue;
    const bool enough = c.multiplicity >= target;
    const double ratio_log = c.log2_multiplicity - log_target;
    f_avg.add(enough ? p : p * std::exp2(0.5 * ratio_log));
    f_sq.add(enough ? p : p * std::exp2(ratio_log));
    if (enough) success.add(p);
    yield.add(p * c.log2_multiplicity);
    res.yield_distribution.emplace_back(c.log2_multiplicity, p);
  }
  res.fidelity_lower = std::clamp(f_avg.value(), 0.0, 1.0);
  res.fidelity_exact = std::clamp(std::sqrt(std::max(f_sq.value(), 0.0)), 0.0, 1.0);
  res.success_prob = std::clamp(success.value(), 0.0, 1.0);
  res.expected_yield = yield.value();
  return res;
}

struct ConfrontRow {
  long n = 0;
  double rate = 0.0;
  std::optional<double> achieved;        // fidelity_lower
  std::optional<double> achieved_exact;  // fidelity_exact
  std::optional<double> postselected;    // sqrt(eta), informational
  ConverseBoundResult bound;
  double bound_fidelity = 1.0;           // 2^{log F bound}
  bool violation = false;
};

struct ConfrontReport {
  TheoremId theorem = TheoremId::Schumacher;
  bool bound_only = false;
  std::vector<ConfrontRow> rows;
  int violations = 0;
  /// First n whose bound is non-vacuous and below the achieved fidelity's side, or -1.
  long crossover_n = -1;
};

inline constexpr double kConfrontTol = 1e-9;

/// Pairs simulator results with bounds on the same (n, rate) grid. Merge theorems
/// have no simulator and produce bound-only rows.
inline ConfrontReport confront_bounds(TheoremId id, const std::vector<ProtocolRunResult>& runs,
                                      const std::vector<ConverseBoundResult>& bounds) {
  ConfrontReport rep;
  rep.theorem = id;
  rep.bound_only = runs.empty();
  if (!runs.empty() && runs.size() != bounds.size()) {
    throw Error(ErrorKind::InvalidArgument, "protocol and bound series have different lengths");
  }
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    ConfrontRow row;
    row.bound = bounds[i];
    row.n = bounds[i].n;
    row.rate = bounds[i].rate;
    row.bound_fidelity = std::exp2(bounds[i].log_fidelity_bound);
    if (!runs.empty()) {
      const auto& r = runs[i];
      if (r.n != bounds[i].n || std::abs(r.rate - bounds[i].rate) > 1e-9) {
        throw Error(ErrorKind::InvalidArgument, "protocol and bound grids do not match at index " + std::to_string(i));
      }
      row.achieved = r.fidelity_lower;
      row.achieved_exact = r.fidelity_exact;
      row.postselected = r.postselected_fidelity;
      if (!bounds[i].vacuous) {
        const double limit = row.bound_fidelity + kConfrontTol;
        row.violation = r.fidelity_lower > limit || (r.fidelity_exact && *r.fidelity_exact > limit);
      }
    }
    if (row.violation) ++rep.violations;
    if (rep.crossover_n < 0 && !bounds[i].vacuous) rep.crossover_n = row.n;
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

/// Throws BoundViolation with the full term breakdown of the first violating row.
inline void require_no_violations(const ConfrontReport& rep) {
  for (const auto& row : rep.rows) {
    if (!row.violation) continue;
    std::ostringstream os;
    os.precision(12);
    os << to_string(rep.theorem) << " n=" << row.n << " rate=" << row.rate << " alpha=" << row.bound.alpha
       << " achieved=" << row.achieved.value_or(-1.0);
    if (row.achieved_exact) os << " achieved_exact=" << *row.achieved_exact;
    os << " bound=2^" << row.bound.log_fidelity_bound << "=" << row.bound_fidelity;
    for (const auto& [k, v] : row.bound.term_breakdown) os << " " << k << "=" << v;
    throw Error(ErrorKind::BoundViolation, os.str());
  }
}

/// Schumacher or concentration series at a fixed per-copy rate, bounds optimized over alpha.
inline ConfrontReport confront_series(TheoremId id, const std::vector<double>& spectrum, const std::vector<long>& ns,
                                      double rate) {
  std::map<std::string, RealVector> spectra;
  spectra["A"] = Eigen::Map<const RealVector>(spectrum.data(), static_cast<Eigen::Index>(spectrum.size()));
  const ConverseInput in = ConverseInput::from_spectra(spectra);
  std::vector<ProtocolRunResult> runs;
  std::vector<ConverseBoundResult> bounds;
  for (long n : ns) {
    if (id == TheoremId::Schumacher) {
      runs.push_back(schumacher_mass(spectrum, n, rate));
    } else if (id == TheoremId::Concentrate) {
      runs.push_back(concentrate_simulate(spectrum, n, rate * static_cast<double>(n)));
    } else {
      throw Error(ErrorKind::InvalidArgument, "confront_series needs a theorem with a simulator");
    }
    bounds.push_back(optimize_alpha(id, in, n, rates_for(id, rate, n)));
  }
  return confront_bounds(id, runs, bounds);
}

}  // namespace renyi
