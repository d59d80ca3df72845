#pragma once

// Randomized audits of the entropy and entanglement inequalities. Each check
// maps a per-trial seed to a margin that must be >= -tolerance.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "renyi/entanglement.hpp"
#include "renyi/entropy.hpp"
#include "renyi/error.hpp"
#include "renyi/parallel.hpp"
#include "renyi/qstate.hpp"
#include "renyi/random.hpp"

namespace renyi {

struct CheckFailure {
  std::uint64_t seed = 0;
  double margin = 0.0;
};

struct CheckReport {
  std::string check_id;
  int trials = 0;
  double worst_margin = kInf;  // +inf when every margin was +inf
  std::vector<CheckFailure> failures;
  double tolerance = 0.0;
  bool expect_failure = false;  // harness self-test
  std::map<std::string, std::string> config;

  bool passed() const { return expect_failure ? !failures.empty() : failures.empty(); }
};

struct CheckConfig {
  int trials = 0;  // 0 selects the check's default
  std::uint64_t seed = 0;
  unsigned jobs = 1;
};

inline constexpr double kExactTol = 1e-9;
inline constexpr double kEstimatorTol = 1e-6;

namespace checks {

inline int pick(Rng& rng, int lo, int hi) { return uniform_int(rng, lo, hi); }

/// Random state with random rank, drawn from a seed derived from rng.
inline DensityMatrix any_state(const SubsystemDims& dims, Rng& rng, bool full_rank = false) {
  const int d = static_cast<int>(dims.total_dim());
  const int rank = full_rank ? d : pick(rng, 1, d);
  return random_density(dims, rank, rng());
}

inline std::vector<double> random_probs(int k, Rng& rng) {
  std::vector<double> p(k);
  double total = 0.0;
  for (double& x : p) {
    const double g = standard_normal(rng);
    x = g * g + 1e-3;
    total += x;
  }
  for (double& x : p) x /= total;
  return p;
}

/// rho^{RX} = sum_x p_x rho_x (x) |x><x|.
inline DensityMatrix random_cq(int dr, int dx, Rng& rng) {
  const auto p = random_probs(dx, rng);
  const SubsystemDims r = SubsystemDims::single(dr, "R");
  Matrix m = Matrix::Zero(dr * dx, dr * dx);
  for (int x = 0; x < dx; ++x) {
    Matrix proj = Matrix::Zero(dx, dx);
    proj(x, x) = 1.0;
    m += p[x] * kron(any_state(r, rng).matrix(), proj);
  }
  return DensityMatrix::from_trusted(m, SubsystemDims({{"R", dr}, {"X", dx}}));
}

inline const std::vector<double> kDpiAlphas = {0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0};
inline const std::vector<double> kCqAlphas = {0.0, 0.25, 0.5, 0.75, 1.25, 1.5, 1.75, 2.0};
inline const std::vector<double> kAboveOneAlphas = {1.25, 1.5, 2.0};
inline const std::vector<double> kVdhAlphas = {0.5, 0.6, 0.75, 0.9};

/// S_alpha(rho||sigma) - S_alpha(E rho||E sigma), minimized over the alpha grid; +inf LHS passes.
inline double dpi_margin(std::uint64_t seed) {
  Rng rng(seed);
  const int din = pick(rng, 2, 4);
  const int dout = pick(rng, 2, 4);
  const int kmin = (din + dout - 1) / dout;
  const int kc = pick(rng, kmin, std::max(kmin, 4));
  const SubsystemDims in = SubsystemDims::single(din);
  const DensityMatrix rho = any_state(in, rng);
  const DensityMatrix sigma = any_state(in, rng);
  const QuantumChannel ch = random_channel(in, SubsystemDims::single(dout), kc, rng());
  const DensityMatrix er = apply_channel(ch, rho);
  const DensityMatrix es = apply_channel(ch, sigma);
  double worst = kInf;
  for (double a : kDpiAlphas) {
    const double lhs = renyi_relative(rho, sigma, a).value;
    if (std::isinf(lhs)) continue;
    worst = std::min(worst, lhs - renyi_relative(er, es, a).value);
  }
  return worst;
}

/// Both sides of log|X| >= S_a(RX) - S_a(R) >= 0.
inline double cq_entropy_margin(std::uint64_t seed) {
  Rng rng(seed);
  const int dx = pick(rng, 2, 4);
  const int dr = pick(rng, 2, 3);
  const DensityMatrix cq = random_cq(dr, dx, rng);
  double worst = kInf;
  for (double a : kCqAlphas) {
    const double diff = renyi_entropy(cq, a) - renyi_entropy(cq, {"R"}, a);
    worst = std::min({worst, std::log2(static_cast<double>(dx)) - diff, diff});
  }
  return worst;
}

/// log|X| - S_a(R) + S_a(R|X) with S_a(R|X) = -I_a(X>R), alpha > 1.
inline double cq_conditional_margin(std::uint64_t seed) {
  Rng rng(seed);
  const int dx = pick(rng, 2, 4);
  const int dr = pick(rng, 2, 3);
  const DensityMatrix cq = random_cq(dr, dx, rng);
  const BipartiteSplit x_vs_r{{"X"}, {"R"}};
  double worst = kInf;
  for (double a : kAboveOneAlphas) {
    const double cond = -coherent_information_renyi(cq, x_vs_r, a);
    worst = std::min(worst, std::log2(static_cast<double>(dx)) - renyi_entropy(cq, {"R"}, a) + cond);
  }
  return worst;
}

/// F(rho, tau(x)rho_B) - F(rho, tau(x)sigma)^2, and the same with tau = rho_A.
inline double fidelity_product_margin(std::uint64_t seed) {
  Rng rng(seed);
  const int db = pick(rng, 2, 3);
  const SubsystemDims ab({{"A", 2}, {"B", db}});
  const DensityMatrix rho = any_state(ab, rng);
  const DensityMatrix tau = any_state(SubsystemDims::single(2, "A"), rng);
  const DensityMatrix sigma = any_state(SubsystemDims::single(db, "B"), rng);
  const DensityMatrix ra = partial_trace(rho, {"A"});
  const DensityMatrix rb = partial_trace(rho, {"B"});
  const double f7 = fidelity(rho, tensor(tau, rb));
  const double g7 = fidelity(rho, tensor(tau, sigma));
  const double f9 = fidelity(rho, tensor(ra, rb));
  const double g9 = fidelity(rho, tensor(ra, sigma));
  return std::min(f7 - g7 * g7, f9 - g9 * g9);
}

inline double vdh_margin(std::uint64_t seed) {
  Rng rng(seed);
  const int d = pick(rng, 2, 6);
  const SubsystemDims dims = SubsystemDims::single(d);
  const DensityMatrix rho = any_state(dims, rng);
  const DensityMatrix sigma = any_state(dims, rng);
  double worst = kInf;
  for (double a : kVdhAlphas) worst = std::min(worst, van_dam_hayden_gap(rho, sigma, a));
  return worst;
}

inline SubsystemDims small_bipartite(Rng& rng) {
  static const std::vector<std::pair<int, int>> shapes = {{2, 2}, {2, 3}, {3, 3}};
  const auto [da, db] = shapes[pick(rng, 0, 2)];
  return SubsystemDims({{"A", da}, {"B", db}});
}

inline RreeConfig check_estimator_config(std::uint64_t seed) {
  RreeConfig cfg;
  cfg.restarts = 2;
  cfg.max_iters = 100;
  cfg.seed = seed;
  return cfg;
}

/// Pure-state sandwich S_{1/a}(A) <= estimate <= S_{2-a}(A), plus lower <= estimate.
inline double pure_sandwich_margin(std::uint64_t seed) {
  Rng rng(seed);
  const SubsystemDims dims = small_bipartite(rng);
  const PureState psi = random_pure(dims, rng());
  const BipartiteSplit split{{"A"}, {"B"}};
  const DensityMatrix rho = psi.density();
  double worst = kInf;
  for (double a : kAboveOneAlphas) {
    const RreeBounds b = rree_bounds_pure(psi, split, a);
    const RreeEstimate est = rree_estimate(rho, split, a, check_estimator_config(rng()));
    worst = std::min({worst, est.upper_estimate - b.lower, b.upper - est.upper_estimate,
                      est.upper_estimate - est.analytic_lower});
  }
  return worst;
}

/// I_a(A>B)_rho - lemma5_lower(psi, rho, a, F(psi, rho)) with F >= 0.5.
inline double fidelity_perturbed_margin(std::uint64_t seed) {
  Rng rng(seed);
  const int db = pick(rng, 2, 3);
  const SubsystemDims dims({{"A", 2}, {"B", db}});
  const PureState psi = random_pure(dims, rng());
  const DensityMatrix noise = any_state(dims, rng);
  const double t = 0.75 * uniform01(rng);
  const DensityMatrix rho = DensityMatrix::from_trusted((1.0 - t) * psi.density().matrix() + t * noise.matrix(), dims);
  const double f = fidelity(psi, rho);
  const BipartiteSplit split{{"A"}, {"B"}};
  double worst = kInf;
  for (double a : kAboveOneAlphas) {
    worst = std::min(worst, coherent_information_renyi(rho, split, a) - lemma5_lower(psi, rho, split, a, f));
  }
  return worst;
}

/// Local channel on B: rree_lower(E rho) <= estimate(rho).
inline double local_channel_margin(std::uint64_t seed) {
  Rng rng(seed);
  const SubsystemDims dims({{"A", 2}, {"B", 2}});
  const DensityMatrix rho = any_state(dims, rng);
  const QuantumChannel ch = random_channel(SubsystemDims::single(2, "B"), SubsystemDims::single(2, "B"),
                                           pick(rng, 1, 3), rng());
  const DensityMatrix out = apply_local_channel(ch, rho, "B");
  const BipartiteSplit split{{"A"}, {"B"}};
  double worst = kInf;
  for (double a : kAboveOneAlphas) {
    const RreeEstimate est = rree_estimate(rho, split, a, check_estimator_config(rng()));
    worst = std::min(worst, est.upper_estimate - rree_lower(out, split, a));
  }
  return worst;
}

/// Two-outcome instrument on A: sum_k p_k rree_lower(theta_k) <= estimate(rho).
inline double instrument_average_margin(std::uint64_t seed) {
  Rng rng(seed);
  const SubsystemDims dims({{"A", 2}, {"B", 2}});
  const DensityMatrix rho = any_state(dims, rng);
  const QuantumInstrument inst = random_instrument(SubsystemDims::single(2, "A"), 2, pick(rng, 1, 2), rng());
  const auto outcomes = apply_local_instrument(inst, rho, "A");
  const BipartiteSplit split{{"A"}, {"B"}};
  double worst = kInf;
  for (double a : kAboveOneAlphas) {
    const RreeEstimate est = rree_estimate(rho, split, a, check_estimator_config(rng()));
    double avg = 0.0;
    for (const auto& o : outcomes) avg += o.probability * rree_lower(o.state, split, a);
    worst = std::min(worst, est.upper_estimate - avg);
  }
  return worst;
}

/// Data processing with the inequality deliberately reversed; must fail.
inline double inverted_margin(std::uint64_t seed) {
  const double m = dpi_margin(seed);
  return std::isinf(m) ? -1.0 : -m - 1e-3;
}

}  // namespace checks

struct CheckDefinition {
  std::string id;
  int default_trials;
  double tolerance;
  bool expect_failure;
  bool in_default_set;
  std::function<double(std::uint64_t)> margin;
};

inline const std::vector<CheckDefinition>& check_registry() {
  static const std::vector<CheckDefinition> registry = {
      {"dpi", 500, kExactTol, false, true, checks::dpi_margin},
      {"lemma10", 500, kExactTol, false, true, checks::cq_entropy_margin},
      {"lemmaA1", 500, kExactTol, false, true, checks::cq_conditional_margin},
      {"fidelity_product", 1000, kExactTol, false, true, checks::fidelity_product_margin},
      {"vdh", 1000, kExactTol, false, true, checks::vdh_margin},
      {"lemma4", 100, kEstimatorTol, false, true, checks::pure_sandwich_margin},
      {"lemma5", 200, kExactTol, false, true, checks::fidelity_perturbed_margin},
      {"lemma3_surrogate", 30, kEstimatorTol, false, true, checks::instrument_average_margin},
      {"lemma2_surrogate", 30, kEstimatorTol, false, true, checks::local_channel_margin},
      {"selftest_inverted", 20, kExactTol, true, false, checks::inverted_margin},
  };
  return registry;
}

inline const CheckDefinition& find_check(const std::string& id) {
  for (const auto& c : check_registry()) {
    if (c.id == id) return c;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown check '" + id + "'");
}

inline std::vector<std::string> default_check_ids() {
  std::vector<std::string> ids;
  for (const auto& c : check_registry()) {
    if (c.in_default_set) ids.push_back(c.id);
  }
  return ids;
}

/// Runs one check. Trial t uses seed derive_seed(config.seed, t); the result is
/// independent of config.jobs.
inline CheckReport run_check(const std::string& id, const CheckConfig& config = {}) {
  const CheckDefinition& def = find_check(id);
  const int trials = config.trials > 0 ? config.trials : def.default_trials;
  const auto margins = parallel_map(static_cast<std::size_t>(trials), config.jobs, [&](std::size_t t) {
    return def.margin(derive_seed(config.seed, t));
  });
  CheckReport rep;
  rep.check_id = id;
  rep.trials = trials;
  rep.tolerance = def.tolerance;
  rep.expect_failure = def.expect_failure;
  rep.config = {{"seed", std::to_string(config.seed)}, {"trials", std::to_string(trials)}};
  for (int t = 0; t < trials; ++t) {
    const double m = margins[t];
    if (std::isinf(m) && m > 0.0) continue;
    if (std::isnan(m) || m < rep.worst_margin) rep.worst_margin = std::isnan(m) ? -kInf : m;
    if (std::isnan(m) || m < -def.tolerance) rep.failures.push_back({derive_seed(config.seed, t), m});
  }
  return rep;
}

inline std::vector<CheckReport> run_checks(const std::vector<std::string>& ids, const CheckConfig& config = {}) {
  std::vector<CheckReport> out;
  for (const auto& id : ids) out.push_back(run_check(id, config));
  return out;
}

}  // namespace renyi
