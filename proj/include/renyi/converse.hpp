#pragma once

// Strong-converse bounds log F <= n * zeta(alpha) * bracket(alpha) for state
// merging, entanglement concentration and Schumacher compression. Only
// single-copy marginal spectra enter; n is a scalar multiplier.

#include <array>
#include <cmath>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "renyi/entropy.hpp"
#include "renyi/error.hpp"
#include "renyi/qstate.hpp"

namespace renyi {

enum class TheoremId { MergeEnt, MergeCc, Concentrate, Schumacher };

inline constexpr std::array<TheoremId, 4> kAllTheorems = {TheoremId::MergeEnt, TheoremId::MergeCc,
                                                          TheoremId::Concentrate, TheoremId::Schumacher};

constexpr std::string_view to_string(TheoremId id) noexcept {
  switch (id) {
    case TheoremId::MergeEnt: return "merge_ent";
    case TheoremId::MergeCc: return "merge_cc";
    case TheoremId::Concentrate: return "concentrate";
    case TheoremId::Schumacher: return "schumacher";
  }
  return "unknown";
}

inline TheoremId parse_theorem(std::string_view name) {
  for (TheoremId id : kAllTheorems) {
    if (to_string(id) == name) return id;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown theorem '" + std::string(name) + "'");
}

struct AlphaInterval {
  double lo;
  double hi;
  bool lo_open;
  bool hi_open;

  bool contains(double a) const {
    return (lo_open ? a > lo : a >= lo) && (hi_open ? a < hi : a <= hi);
  }
};

/// (1, 2] for merge_ent and concentrate, (0.5, 1) for merge_cc and schumacher.
constexpr AlphaInterval alpha_interval(TheoremId id) {
  if (id == TheoremId::MergeEnt || id == TheoremId::Concentrate) return {1.0, 2.0, true, false};
  return {0.5, 1.0, true, true};
}

/// Total resources in bits; the bound reads the entry its theorem needs.
struct RateParams {
  double logK = 0.0;
  double logL = 0.0;
  double logX = 0.0;
  double logB = 0.0;
};

/// Marginal spectra of the state a theorem is evaluated on, keyed by register group.
class ConverseInput {
 public:
  /// Tripartite pure state on registers A, B, R (merge theorems).
  static ConverseInput tripartite(const PureState& psi) {
    for (const char* l : {"A", "B", "R"}) {
      if (!psi.dims().contains(l)) throw Error(ErrorKind::MissingRegister, std::string("merge theorems need register ") + l);
    }
    if (psi.dims().size() != 3) throw Error(ErrorKind::InvalidDims, "merge theorems need exactly registers A, B, R");
    ConverseInput in;
    const DensityMatrix rho = psi.density();
    for (const auto& group : std::vector<std::vector<std::string>>{{"A"}, {"B"}, {"R"}, {"A", "B"}, {"A", "R"}}) {
      in.add(group, partial_trace(rho, group));
    }
    return in;
  }

  /// Bipartite pure state with a register A (concentration).
  static ConverseInput bipartite(const PureState& psi) {
    if (!psi.dims().contains("A")) throw Error(ErrorKind::MissingRegister, "concentration needs register A");
    if (psi.dims().size() < 2) throw Error(ErrorKind::InvalidDims, "concentration needs a bipartite state");
    ConverseInput in;
    in.add({"A"}, partial_trace(psi, {"A"}));
    return in;
  }

  /// Source state, all registers treated as A (compression).
  static ConverseInput source(const DensityMatrix& rho) {
    ConverseInput in;
    in.spectra_["A"] = hermitian_eigen(rho.matrix()).values;
    return in;
  }

  /// Directly from spectra, e.g. {"A": p} for a diagonal source.
  static ConverseInput from_spectra(std::map<std::string, RealVector> spectra) {
    ConverseInput in;
    in.spectra_ = std::move(spectra);
    return in;
  }

  bool has(const std::string& key) const { return spectra_.count(key) != 0; }

  double entropy(const std::string& key, double order) const {
    const auto it = spectra_.find(key);
    if (it == spectra_.end()) throw Error(ErrorKind::MissingRegister, "no marginal '" + key + "' in converse input");
    return renyi_entropy_spectrum(it->second, order);
  }

  const std::map<std::string, RealVector>& spectra() const { return spectra_; }

 private:
  void add(const std::vector<std::string>& group, const DensityMatrix& marginal) {
    std::string key;
    for (const auto& g : group) key += g;
    spectra_[key] = hermitian_eigen(marginal.matrix()).values;
  }

  std::map<std::string, RealVector> spectra_;
};

struct ConverseBoundResult {
  TheoremId theorem = TheoremId::Schumacher;
  double alpha = 0.0;
  long n = 1;
  std::map<std::string, double> rate_params;
  double rate = 0.0;  // resource per copy entering the bracket
  double log_fidelity_bound = 0.0;
  double exponent_per_copy = 0.0;
  std::map<std::string, double> term_breakdown;
  bool vacuous = false;
};

namespace detail {

inline void check_nonnegative(const char* name, double v) {
  if (std::isnan(v) || v < 0.0) throw Error(ErrorKind::RateOutOfRange, std::string(name) + " must be >= 0");
}

inline ConverseBoundResult finish(ConverseBoundResult r, double coefficient, double bracket) {
  r.exponent_per_copy = coefficient * bracket;
  r.log_fidelity_bound = static_cast<double>(r.n) * r.exponent_per_copy;
  r.vacuous = r.exponent_per_copy >= 0.0;
  r.term_breakdown["coefficient"] = coefficient;
  r.term_breakdown["bracket"] = bracket;
  return r;
}

}  // namespace detail

/// Evaluates the bound of `id` at order alpha for n copies.
inline ConverseBoundResult converse_bound(TheoremId id, const ConverseInput& in, double alpha, long n,
                                          const RateParams& rates) {
  const AlphaInterval iv = alpha_interval(id);
  if (std::isnan(alpha) || !iv.contains(alpha)) {
    throw Error(ErrorKind::AlphaOutOfRange, std::string(to_string(id)) + " needs alpha in " +
                                                (iv.lo_open ? "(" : "[") + std::to_string(iv.lo) + ", " +
                                                std::to_string(iv.hi) + (iv.hi_open ? ")" : "]"));
  }
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "n must be a positive integer");
  const double nd = static_cast<double>(n);
  ConverseBoundResult r;
  r.theorem = id;
  r.alpha = alpha;
  r.n = n;
  switch (id) {
    case TheoremId::MergeEnt: {
      detail::check_nonnegative("logK", rates.logK);
      detail::check_nonnegative("logL", rates.logL);
      r.rate_params = {{"logK", rates.logK}, {"logL", rates.logL}};
      r.rate = (rates.logK - rates.logL) / nd;
      const double sb = in.entropy("B", 2.0 - alpha);
      const double sab = in.entropy("AB", alpha == 2.0 ? kInf : 1.0 / (2.0 - alpha));
      r.term_breakdown = {{"S_{2-alpha}(B)", sb}, {"S_{1/(2-alpha)}(AB)", sab}};
      const double bracket = r.rate + sb - sab;
      return detail::finish(std::move(r), (alpha - 1.0) / (2.0 * alpha), bracket);
    }
    case TheoremId::MergeCc: {
      detail::check_nonnegative("logX", rates.logX);
      r.rate_params = {{"logX", rates.logX}};
      r.rate = rates.logX / nd;
      const double beta = RenyiOrder(alpha).beta();
      const double sa = in.entropy("A", beta);
      const double sr = in.entropy("R", beta);
      const double sar = in.entropy("AR", alpha);
      r.term_breakdown = {{"S_beta(A)", sa}, {"S_beta(R)", sr}, {"S_alpha(AR)", sar}, {"beta", beta}};
      const double bracket = r.rate - sa - sr + sar;
      return detail::finish(std::move(r), (1.0 - alpha) / (4.0 * alpha), bracket);
    }
    case TheoremId::Concentrate: {
      detail::check_nonnegative("logL", rates.logL);
      r.rate_params = {{"logL", rates.logL}};
      r.rate = rates.logL / nd;
      const double sa = in.entropy("A", 2.0 - alpha);
      r.term_breakdown = {{"S_{2-alpha}(A)", sa}};
      const double bracket = sa - r.rate;
      return detail::finish(std::move(r), (alpha - 1.0) / (2.0 * alpha), bracket);
    }
    case TheoremId::Schumacher: {
      detail::check_nonnegative("logB", rates.logB);
      r.rate_params = {{"logB", rates.logB}};
      r.rate = rates.logB / nd;
      const double beta = RenyiOrder(alpha).beta();
      const double sa = in.entropy("A", beta);
      r.term_breakdown = {{"S_beta(A)", sa}, {"beta", beta}};
      const double bracket = r.rate - sa;
      return detail::finish(std::move(r), (1.0 - alpha) / (2.0 * alpha), bracket);
    }
  }
  throw Error(ErrorKind::InvalidArgument, "unknown theorem");
}

inline ConverseBoundResult merge_ent_bound(const PureState& psi, double alpha, long n, double logK, double logL) {
  return converse_bound(TheoremId::MergeEnt, ConverseInput::tripartite(psi), alpha, n, {logK, logL, 0.0, 0.0});
}

inline ConverseBoundResult merge_cc_bound(const PureState& psi, double alpha, long n, double logX) {
  return converse_bound(TheoremId::MergeCc, ConverseInput::tripartite(psi), alpha, n, {0.0, 0.0, logX, 0.0});
}

inline ConverseBoundResult concentrate_bound(const PureState& psi, double alpha, long n, double logL) {
  return converse_bound(TheoremId::Concentrate, ConverseInput::bipartite(psi), alpha, n, {0.0, logL, 0.0, 0.0});
}

inline ConverseBoundResult schumacher_bound(const DensityMatrix& rho, double alpha, long n, double logB) {
  return converse_bound(TheoremId::Schumacher, ConverseInput::source(rho), alpha, n, {0.0, 0.0, 0.0, logB});
}

/// The alpha -> 1 value of the bracket: rate - S(A|B), rate - I(A:R), S(A) - rate, rate - S(A).
inline double von_neumann_bracket(TheoremId id, const ConverseInput& in, double rate) {
  switch (id) {
    case TheoremId::MergeEnt: return rate + in.entropy("B", 1.0) - in.entropy("AB", 1.0);
    case TheoremId::MergeCc: return rate - in.entropy("A", 1.0) - in.entropy("R", 1.0) + in.entropy("AR", 1.0);
    case TheoremId::Concentrate: return in.entropy("A", 1.0) - rate;
    case TheoremId::Schumacher: return rate - in.entropy("A", 1.0);
  }
  throw Error(ErrorKind::InvalidArgument, "unknown theorem");
}

/// Per-copy rates scaled to totals for n copies.
inline RateParams rates_for(TheoremId id, double rate, long n) {
  const double total = rate * static_cast<double>(n);
  RateParams p;
  switch (id) {
    case TheoremId::MergeEnt: p.logK = total; break;
    case TheoremId::MergeCc: p.logX = total; break;
    case TheoremId::Concentrate: p.logL = total; break;
    case TheoremId::Schumacher: p.logB = total; break;
  }
  return p;
}

struct AlphaSearchConfig {
  int grid_points = 200;
  int golden_iters = 80;
  double inset = 1e-6;
};

/// Searchable closed interval: open endpoints are inset.
inline std::pair<double, double> search_interval(TheoremId id, double inset = 1e-6) {
  const AlphaInterval iv = alpha_interval(id);
  return {iv.lo_open ? iv.lo + inset : iv.lo, iv.hi_open ? iv.hi - inset : iv.hi};
}

/// Most negative exponent over the theorem's alpha interval: grid scan then golden section.
inline ConverseBoundResult optimize_alpha(TheoremId id, const ConverseInput& in, long n, const RateParams& rates,
                                          const AlphaSearchConfig& cfg = {}) {
  const auto [lo, hi] = search_interval(id, cfg.inset);
  const int m = std::max(cfg.grid_points, 2);
  auto eval = [&](double a) { return converse_bound(id, in, a, n, rates); };
  ConverseBoundResult best = eval(lo);
  int best_idx = 0;
  for (int i = 1; i < m; ++i) {
    const double a = i == m - 1 ? hi : lo + (hi - lo) * i / (m - 1);
    ConverseBoundResult r = eval(a);
    if (r.exponent_per_copy < best.exponent_per_copy) {
      best = std::move(r);
      best_idx = i;
    }
  }
  auto grid_at = [&](int i) { return i <= 0 ? lo : (i >= m - 1 ? hi : lo + (hi - lo) * i / (m - 1)); };
  double a = grid_at(best_idx - 1);
  double b = grid_at(best_idx + 1);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = eval(c).exponent_per_copy;
  double fd = eval(d).exponent_per_copy;
  for (int it = 0; it < cfg.golden_iters && b - a > 1e-12; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = eval(c).exponent_per_copy;
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = eval(d).exponent_per_copy;
    }
  }
  ConverseBoundResult refined = eval(fc < fd ? c : d);
  if (refined.exponent_per_copy < best.exponent_per_copy) best = std::move(refined);
  return best;
}

}  // namespace renyi
