#pragma once

// Command-line frontend. run_cli() is the whole program; main() only forwards argv.
// Exit codes: 0 success, 1 usage error, 2 check failure or bound violation,
// 3 numerical validation error.

#include <CLI11.hpp>

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "renyi/converse.hpp"
#include "renyi/entanglement.hpp"
#include "renyi/entropy.hpp"
#include "renyi/error.hpp"
#include "renyi/io.hpp"
#include "renyi/parallel.hpp"
#include "renyi/propcheck.hpp"
#include "renyi/protocols.hpp"
#include "renyi/qstate.hpp"

namespace renyi {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitCheckFailed = 2;
inline constexpr int kExitNumerical = 3;

namespace cli {

struct Options {
  std::string state_file;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::string dims = "A:2,B:2";
  std::string format = "text";
  std::string out;
  unsigned jobs = 1;

  std::string alpha;
  std::string n = "1";
  std::string rate;
  std::optional<double> logK, logL, logX, logB;
  std::string regs;
  std::string left = "A";
  std::string spectrum;
  std::string sigma_preset;
  std::string sigma_file;
  bool optimize_alpha = false;
  bool exact = false;
  std::string classes = "eigenvalue";

  int restarts = 4;
  int terms = 0;
  int max_iters = 300;
  std::string witness_out;

  int trials = 0;
  std::vector<std::string> check_ids;
  std::string target;  // theorem or protocol positional
};

/// Non-ParseError usage problems detected after CLI11 parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::uint64_t resolve_seed(const Options& o) {
  if (o.seed) return *o.seed;
  if (const char* env = std::getenv("RENYI_CONVERSE_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw UsageError("RENYI_CONVERSE_SEED='" + std::string(env) + "' is not an unsigned integer");
    }
  }
  return 0;
}

inline SubsystemDims parse_dims(const std::string& spec) {
  std::vector<Factor> factors;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw UsageError("--dims entries look like LABEL:DIM, got '" + item + "'");
    const double d = parse_double(item.substr(colon + 1), "--dims");
    if (d != std::floor(d) || d < 1 || d > 64) throw UsageError("--dims: dimension must be an integer in [1, 64]");
    factors.push_back({item.substr(0, colon), static_cast<int>(d)});
  }
  return SubsystemDims(std::move(factors));
}

/// Exactly one of --state, --preset, or (for a random state) --seed.
inline LoadedState load_state(const Options& o, bool required = true) {
  if (!o.state_file.empty() && !o.preset.empty()) throw UsageError("give only one of --state and --preset");
  if (!o.state_file.empty()) return load_state_file(o.state_file);
  if (!o.preset.empty()) return parse_preset(o.preset);
  if (o.seed) {
    LoadedState s;
    s.rho = random_density(parse_dims(o.dims), *o.seed);
    s.source = "random(seed=" + std::to_string(*o.seed) + ")";
    return s;
  }
  if (required) throw UsageError("no state given: add --state FILE, --preset NAME or --seed N");
  return {};
}

inline std::vector<std::string> split_labels(const std::string& spec) {
  std::vector<std::string> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

/// Registers whose marginal single-register commands act on: --regs, else A of a multipartite state, else all.
inline DensityMatrix marginal_for(const LoadedState& s, const Options& o) {
  if (!o.regs.empty()) return partial_trace(s.rho, split_labels(o.regs));
  if (s.rho.dims().size() > 1 && s.rho.dims().contains("A")) return partial_trace(s.rho, {"A"});
  return s.rho;
}

inline std::string marginal_name(const LoadedState& s, const Options& o) {
  if (!o.regs.empty()) return o.regs;
  if (s.rho.dims().size() > 1 && s.rho.dims().contains("A")) return "A";
  std::string all;
  for (const auto& l : s.rho.dims().labels()) all += l;
  return all;
}

inline std::vector<double> spectrum_vector(const DensityMatrix& rho) {
  const RealVector v = clipped_spectrum(hermitian_eigen(rho.matrix()).values);
  std::vector<double> out;
  double total = 0.0;
  for (Eigen::Index i = v.size(); i-- > 0;) {
    out.push_back(v(i));
    total += v(i);
  }
  for (double& x : out) x /= total;
  return out;
}

inline void require_format(const Options& o, std::initializer_list<const char*> allowed) {
  for (const char* f : allowed) {
    if (o.format == f) return;
  }
  throw UsageError("--format " + o.format + " is not available for this command");
}

// ---------------------------------------------------------------------------
// commands; each writes to `os` and returns an exit code

inline int cmd_entropy(const Options& o, std::ostream& os) {
  require_format(o, {"text", "json", "csv"});
  const LoadedState s = load_state(o);
  const DensityMatrix marg = marginal_for(s, o);
  const std::string name = marginal_name(s, o);
  const auto alphas = parse_range(o.alpha.empty() ? "1" : o.alpha, "--alpha");
  std::optional<LoadedState> sigma;
  if (!o.sigma_preset.empty() || !o.sigma_file.empty()) {
    Options so;
    so.preset = o.sigma_preset;
    so.state_file = o.sigma_file;
    sigma = load_state(so);
    if (sigma->rho.dim() != s.rho.dim()) throw Error(ErrorKind::DimensionMismatch, "--sigma state has a different dimension");
  }
  std::optional<BipartiteSplit> split;
  if (s.rho.dims().size() > 1 && s.rho.dims().contains(o.left)) split = BipartiteSplit::of(s.rho.dims(), split_labels(o.left));

  Json rows = Json::array();
  std::ostringstream text;
  if (o.format == "csv") os << "alpha,entropy,coherent_information,relative_entropy\n";
  for (double a : alphas) {
    const double ent = renyi_entropy(marg, a);
    std::optional<double> coh;
    std::optional<double> rel;
    const bool divergence_order = a >= 0.0 && a <= 2.0;
    if (split && divergence_order) coh = coherent_information_renyi(s.rho, *split, a);
    if (sigma && divergence_order) rel = renyi_relative(s.rho, sigma->rho, a).value;
    if (o.format == "json") {
      Json j = {{"alpha", number_json(a)}, {"registers", name}, {"entropy", number_json(ent)}};
      j["coherent_information"] = coh ? number_json(*coh) : Json(nullptr);
      j["relative_entropy"] = rel ? number_json(*rel) : Json(nullptr);
      rows.push_back(std::move(j));
    } else if (o.format == "csv") {
      os << format_number(a) << "," << format_number(ent) << "," << (coh ? format_number(*coh) : "") << ","
         << (rel ? format_number(*rel) : "") << "\n";
    } else {
      os << "S_" << format_short(a, 6) << "(" << name << ") = " << format_short(ent);
      if (coh) os << "  I_" << format_short(a, 6) << "(" << o.left << ">rest) = " << format_short(*coh);
      if (rel) os << "  S_" << format_short(a, 6) << "(rho||sigma) = " << format_short(*rel);
      os << "\n";
    }
  }
  if (o.format == "json") os << rows.dump(2) << "\n";
  return kExitOk;
}

inline int cmd_rree(const Options& o, std::ostream& os) {
  require_format(o, {"text", "json"});
  const LoadedState s = load_state(o);
  const BipartiteSplit split = BipartiteSplit::of(s.rho.dims(), split_labels(o.left));
  const auto alphas = parse_range(o.alpha.empty() ? "2" : o.alpha, "--alpha");
  RreeConfig cfg;
  cfg.restarts = o.restarts;
  cfg.terms_count = o.terms;
  cfg.max_iters = o.max_iters;
  cfg.seed = resolve_seed(o);
  cfg.jobs = o.jobs;
  Json rows = Json::array();
  Json witnesses = Json::array();
  for (double a : alphas) {
    const RreeEstimate est = rree_estimate(s.rho, split, a, cfg);
    if (o.format == "json") {
      rows.push_back(to_json(est));
    } else {
      os << "alpha=" << format_short(a, 6) << "  lower=" << format_short(est.analytic_lower)
         << "  upper=" << (est.analytic_upper ? format_short(*est.analytic_upper) : std::string("n/a"))
         << "  estimate=" << format_short(est.upper_estimate) << (est.weak_guarantee ? "  (alpha<1: weak guarantee)" : "")
         << "\n";
    }
    witnesses.push_back({{"alpha", a}, {"terms", witness_to_json(est.witness)}});
  }
  if (o.format == "json") os << rows.dump(2) << "\n";
  if (!o.witness_out.empty()) {
    std::ofstream w(o.witness_out);
    if (!w) throw UsageError("cannot write --witness-out '" + o.witness_out + "'");
    w << witnesses.dump(2) << "\n";
  }
  return kExitOk;
}

inline ConverseInput converse_input(TheoremId id, const LoadedState& s, const Options& o) {
  if (id == TheoremId::MergeEnt || id == TheoremId::MergeCc) {
    if (!s.pure) throw Error(ErrorKind::InvalidArgument, "merge theorems need a pure state on A, B, R");
    return ConverseInput::tripartite(*s.pure);
  }
  if (id == TheoremId::Concentrate) {
    if (!s.pure) throw Error(ErrorKind::InvalidArgument, "concentration needs a pure bipartite state");
    return ConverseInput::bipartite(*s.pure);
  }
  return ConverseInput::source(marginal_for(s, o));
}

/// Rate grid: --rate (per copy), or the single total given by --logK/--logL/--logX/--logB.
inline std::vector<std::optional<double>> rate_grid(const Options& o) {
  if (!o.rate.empty()) {
    if (o.logK || o.logL || o.logX || o.logB) throw UsageError("give either --rate or --logK/--logL/--logX/--logB, not both");
    std::vector<std::optional<double>> out;
    for (double r : parse_range(o.rate, "--rate")) out.emplace_back(r);
    return out;
  }
  if (!(o.logK || o.logL || o.logX || o.logB)) throw UsageError("missing rate: add --rate R or a --logK/--logL/--logX/--logB total");
  return {std::nullopt};
}

inline RateParams explicit_rates(const Options& o) {
  return {o.logK.value_or(0.0), o.logL.value_or(0.0), o.logX.value_or(0.0), o.logB.value_or(0.0)};
}

inline int cmd_converse(const Options& o, std::ostream& os) {
  require_format(o, {"text", "json", "csv"});
  const TheoremId id = parse_theorem(o.target);
  const LoadedState s = load_state(o);
  const ConverseInput in = converse_input(id, s, o);
  if (o.alpha.empty() && !o.optimize_alpha) throw UsageError("missing --alpha (or pass --optimize-alpha)");
  const std::vector<double> alphas = o.optimize_alpha ? std::vector<double>{0.0} : parse_range(o.alpha, "--alpha");
  const auto ns = parse_int_range(o.n, "--n");
  const auto rates = rate_grid(o);
  struct Point {
    std::optional<double> rate;
    long n;
    double alpha;
  };
  std::vector<Point> grid;
  for (const auto& r : rates) {
    for (long n : ns) {
      for (double a : alphas) grid.push_back({r, n, a});
    }
  }
  const auto results = parallel_map(grid.size(), o.jobs, [&](std::size_t i) {
    const Point& p = grid[i];
    const RateParams rp = p.rate ? rates_for(id, *p.rate, p.n) : explicit_rates(o);
    return o.optimize_alpha ? optimize_alpha(id, in, p.n, rp) : converse_bound(id, in, p.alpha, p.n, rp);
  });
  if (o.format == "csv") {
    os << kConverseCsvHeader << "\n";
    for (const auto& r : results) os << csv_row(r) << "\n";
  } else if (o.format == "json") {
    Json arr = Json::array();
    for (const auto& r : results) arr.push_back(to_json(r));
    os << arr.dump(2) << "\n";
  } else {
    for (const auto& r : results) {
      os << to_string(r.theorem) << "  alpha=" << format_short(r.alpha, 8) << "  n=" << r.n
         << "  rate=" << format_short(r.rate) << "  exponent/copy=" << format_short(r.exponent_per_copy)
         << "  log F <= " << format_short(r.log_fidelity_bound) << (r.vacuous ? "  (vacuous)" : "") << "\n";
    }
  }
  return kExitOk;
}

inline std::vector<double> protocol_spectrum(const std::string& protocol, const Options& o) {
  if (!o.spectrum.empty()) return parse_list(o.spectrum, "--spectrum");
  const LoadedState s = load_state(o);
  if (protocol == "concentrate") {
    if (!s.pure) throw Error(ErrorKind::InvalidArgument, "concentration needs a pure bipartite state or --spectrum");
    return spectrum_vector(partial_trace(s.rho, {s.rho.dims().contains("A") ? "A" : s.rho.dims().labels().front()}));
  }
  return spectrum_vector(marginal_for(s, o));
}

inline ProtocolRunResult run_protocol(const std::string& protocol, const std::vector<double>& spec, long n,
                                      std::optional<double> rate, const Options& o) {
  if (protocol == "schumacher") {
    if (!rate) throw UsageError("simulate schumacher needs --rate");
    if (o.exact) {
      double dim = 1.0;
      for (long i = 0; i < n; ++i) dim *= static_cast<double>(spec.size());
      if (dim <= static_cast<double>(kMaxExactDim)) {
        RealVector p(static_cast<Eigen::Index>(spec.size()));
        for (std::size_t i = 0; i < spec.size(); ++i) p(static_cast<Eigen::Index>(i)) = spec[i];
        const DensityMatrix rho = DensityMatrix::validate(p.cast<Complex>().asDiagonal(),
                                                          SubsystemDims::single(static_cast<int>(spec.size())));
        return schumacher_exact_small(rho, n, *rate);
      }
    }
    return schumacher_mass(spec, n, *rate);
  }
  if (protocol == "concentrate") {
    const double logL = rate ? *rate * static_cast<double>(n) : o.logL.value_or(0.0);
    const auto grouping = o.classes == "type" ? ConcentrationClasses::Type : ConcentrationClasses::Eigenvalue;
    return concentrate_simulate(spec, n, logL, grouping);
  }
  throw UsageError("unknown protocol '" + protocol + "' (use schumacher or concentrate)");
}

inline int cmd_simulate(const Options& o, std::ostream& os) {
  require_format(o, {"text", "json", "csv"});
  if (o.target != "schumacher" && o.target != "concentrate") {
    throw UsageError("unknown protocol '" + o.target + "' (use schumacher or concentrate)");
  }
  const auto spec = protocol_spectrum(o.target, o);
  const auto ns = parse_int_range(o.n, "--n");
  const auto rates = rate_grid(o);
  std::vector<std::pair<std::optional<double>, long>> grid;
  for (const auto& r : rates) {
    for (long n : ns) grid.emplace_back(r, n);
  }
  const auto results = parallel_map(grid.size(), o.jobs, [&](std::size_t i) {
    return run_protocol(o.target, spec, grid[i].second, grid[i].first, o);
  });
  if (o.format == "csv") {
    os << kProtocolCsvHeader << "\n";
    for (const auto& r : results) os << csv_row(r) << "\n";
  } else if (o.format == "json") {
    Json arr = Json::array();
    for (const auto& r : results) arr.push_back(to_json(r));
    os << arr.dump(2) << "\n";
  } else {
    for (const auto& r : results) {
      os << r.protocol << "  n=" << r.n << "  rate=" << format_short(r.rate);
      if (r.protocol == "schumacher") os << "  eta=" << format_short(r.eta);
      os << "  fidelity_lower=" << format_short(r.fidelity_lower);
      if (r.fidelity_exact) os << "  fidelity_exact=" << format_short(*r.fidelity_exact);
      if (r.postselected_fidelity) os << "  sqrt(eta)=" << format_short(*r.postselected_fidelity);
      if (r.success_prob) os << "  success_prob=" << format_short(*r.success_prob);
      os << "\n";
    }
  }
  return kExitOk;
}

inline int cmd_confront(const Options& o, std::ostream& os) {
  require_format(o, {"text", "json", "csv"});
  const TheoremId id = parse_theorem(o.target);
  const auto ns = parse_int_range(o.n, "--n");
  const auto rates = rate_grid(o);
  const bool simulated = id == TheoremId::Schumacher || id == TheoremId::Concentrate;
  std::vector<std::pair<std::optional<double>, long>> grid;
  for (const auto& r : rates) {
    for (long n : ns) grid.emplace_back(r, n);
  }
  std::vector<ConfrontReport> reports;
  if (simulated) {
    const std::string protocol = id == TheoremId::Schumacher ? "schumacher" : "concentrate";
    const auto spec = protocol_spectrum(protocol, o);
    std::map<std::string, RealVector> spectra;
    spectra["A"] = Eigen::Map<const RealVector>(spec.data(), static_cast<Eigen::Index>(spec.size()));
    const ConverseInput in = ConverseInput::from_spectra(spectra);
    const auto pairs = parallel_map(grid.size(), o.jobs, [&](std::size_t i) {
      const auto& [r, n] = grid[i];
      const RateParams rp = r ? rates_for(id, *r, n) : explicit_rates(o);
      return std::make_pair(run_protocol(protocol, spec, n, r, o), optimize_alpha(id, in, n, rp));
    });
    std::vector<ProtocolRunResult> runs;
    std::vector<ConverseBoundResult> bounds;
    for (const auto& [run, bound] : pairs) {
      runs.push_back(run);
      bounds.push_back(bound);
    }
    reports.push_back(confront_bounds(id, runs, bounds));
  } else {
    const LoadedState s = load_state(o);
    const ConverseInput in = converse_input(id, s, o);
    const auto bounds = parallel_map(grid.size(), o.jobs, [&](std::size_t i) {
      const auto& [r, n] = grid[i];
      return optimize_alpha(id, in, n, r ? rates_for(id, *r, n) : explicit_rates(o));
    });
    reports.push_back(confront_bounds(id, {}, bounds));
  }
  const ConfrontReport& rep = reports.front();
  if (o.format == "csv") {
    os << kConfrontCsvHeader << "\n";
    for (const auto& row : rep.rows) os << csv_row(rep.theorem, row) << "\n";
  } else if (o.format == "json") {
    os << to_json(rep).dump(2) << "\n";
  } else {
    os << to_string(rep.theorem) << (rep.bound_only ? "  (bound-only: no simulator)" : "") << "\n";
    for (const auto& row : rep.rows) {
      os << "  n=" << row.n << "  rate=" << format_short(row.rate) << "  alpha*=" << format_short(row.bound.alpha, 8)
         << "  bound F<=" << format_short(row.bound_fidelity);
      if (row.achieved) os << "  achieved=" << format_short(*row.achieved);
      if (row.achieved_exact) os << "  achieved_exact=" << format_short(*row.achieved_exact);
      os << (row.bound.vacuous ? "  vacuous" : "") << (row.violation ? "  VIOLATION" : "") << "\n";
    }
    os << "violations: " << rep.violations << "\n";
  }
  return rep.violations > 0 ? kExitCheckFailed : kExitOk;
}

inline int cmd_check(const Options& o, std::ostream& os) {
  require_format(o, {"text", "json"});
  const std::vector<std::string> ids = o.check_ids.empty() ? default_check_ids() : o.check_ids;
  for (const auto& id : ids) find_check(id);
  CheckConfig cfg;
  cfg.trials = o.trials;
  cfg.seed = resolve_seed(o);
  cfg.jobs = o.jobs;
  const auto reports = run_checks(ids, cfg);
  bool ok = true;
  for (const auto& r : reports) ok = ok && r.passed();
  if (o.format == "json") {
    Json arr = Json::array();
    for (const auto& r : reports) arr.push_back(to_json(r));
    os << arr.dump(2) << "\n";
  } else {
    for (const auto& r : reports) os << to_json(r).dump() << "\n";
    os << "\n" << std::left;
    os << "check                 trials  worst_margin        tolerance  failures  result\n";
    for (const auto& r : reports) {
      char line[160];
      std::snprintf(line, sizeof line, "%-21s %6d  %-18s  %-9s  %8zu  %s\n", r.check_id.c_str(), r.trials,
                    format_short(r.worst_margin, 6).c_str(), format_short(r.tolerance, 2).c_str(), r.failures.size(),
                    r.passed() ? (r.expect_failure ? "PASS (failed as expected)" : "PASS") : "FAIL");
      os << line;
    }
  }
  return ok ? kExitOk : kExitCheckFailed;
}

inline void add_state_options(CLI::App* sub, Options& o) {
  sub->add_option("--state", o.state_file, "State JSON file {dims, vector|matrix}");
  sub->add_option("--preset", o.preset, "bell, phi(K), ghz(n), werner(p), schmidt(p1,..), diag(p1,..), merge_demo");
  sub->add_option("--dims", o.dims, "Registers of a --seed random state, e.g. A:2,B:3");
  sub->add_option("--regs", o.regs, "Registers of the marginal to use, e.g. A or A,B");
}

inline void add_output_options(CLI::App* sub, Options& o) {
  sub->add_option("--format", o.format, "text | json | csv")->check(CLI::IsMember({"text", "json", "csv"}));
  sub->add_option("--out", o.out, "Write output to this file instead of stdout");
  sub->add_option("--jobs", o.jobs, "Worker threads (output does not depend on it)")->check(CLI::Range(1u, 256u));
  sub->add_option("--seed", o.seed, "Random seed (also selects a random state when no other source is given)");
}

inline void add_rate_options(CLI::App* sub, Options& o) {
  sub->add_option("--n", o.n, "Copies: N or START:STOP:STEP");
  sub->add_option("--rate", o.rate, "Rate per copy in bits: R or START:STOP:STEP");
  sub->add_option("--logK", o.logK, "Total log K (bits)");
  sub->add_option("--logL", o.logL, "Total log L (bits)");
  sub->add_option("--logX", o.logX, "Total log |X| (bits)");
  sub->add_option("--logB", o.logB, "Total log |B| (bits)");
}

}  // namespace cli

/// Runs the command line `args` (without the program name).
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  using namespace cli;
  Options o;
  CLI::App app{"Renyi entropy, entanglement and strong-converse calculator", "renyi_converse"};
  app.require_subcommand(1);

  auto* entropy = app.add_subcommand("entropy", "Renyi entropy, divergence to --sigma-*, coherent information");
  add_state_options(entropy, o);
  add_output_options(entropy, o);
  entropy->add_option("--alpha", o.alpha, "Order: A or START:STOP:STEP (default 1)");
  entropy->add_option("--left", o.left, "Registers on the A side of the coherent information (default A)");
  entropy->add_option("--sigma-preset", o.sigma_preset, "Second argument of the divergence, as a preset");
  entropy->add_option("--sigma-state", o.sigma_file, "Second argument of the divergence, as a state file");

  auto* rree = app.add_subcommand("rree", "Renyi relative entropy of entanglement: bounds and estimate");
  add_state_options(rree, o);
  add_output_options(rree, o);
  rree->add_option("--alpha", o.alpha, "Order: A or START:STOP:STEP (default 2)");
  rree->add_option("--left", o.left, "Registers on the A side (default A)");
  rree->add_option("--restarts", o.restarts, "Optimizer restarts")->check(CLI::Range(1, 1000));
  rree->add_option("--terms", o.terms, "Product terms in the separable ansatz (0: (dA dB)^2)")->check(CLI::Range(0, 100000));
  rree->add_option("--max-iters", o.max_iters, "Iterations per restart")->check(CLI::Range(0, 1000000));
  rree->add_option("--witness-out", o.witness_out, "Write the separable witness as JSON");

  auto* converse = app.add_subcommand("converse", "Strong-converse log-fidelity bound");
  converse->add_option("theorem", o.target, "merge_ent | merge_cc | concentrate | schumacher")->required();
  add_state_options(converse, o);
  add_output_options(converse, o);
  add_rate_options(converse, o);
  converse->add_option("--alpha", o.alpha, "Order: A or START:STOP:STEP");
  converse->add_flag("--optimize-alpha", o.optimize_alpha, "Minimize the exponent over alpha");

  auto* simulate = app.add_subcommand("simulate", "Exact achievability simulation");
  simulate->add_option("protocol", o.target, "schumacher | concentrate")->required();
  add_state_options(simulate, o);
  add_output_options(simulate, o);
  add_rate_options(simulate, o);
  simulate->add_option("--spectrum", o.spectrum, "Spectrum or Schmidt probabilities, e.g. 0.9,0.1");
  simulate->add_flag("--exact", o.exact, "Dense channel evaluation when d^n <= 64 (schumacher)");
  simulate->add_option("--classes", o.classes, "concentrate: measure eigenvalue classes (default) or type classes")
      ->check(CLI::IsMember({"eigenvalue", "type"}));

  auto* confront = app.add_subcommand("confront", "Achieved fidelity against the optimized converse bound");
  confront->add_option("theorem", o.target, "schumacher | concentrate | merge_ent | merge_cc")->required();
  add_state_options(confront, o);
  add_output_options(confront, o);
  add_rate_options(confront, o);
  confront->add_option("--spectrum", o.spectrum, "Spectrum or Schmidt probabilities, e.g. 0.9,0.1");

  auto* check = app.add_subcommand("check", "Randomized inequality audits");
  check->add_option("ids", o.check_ids, "Check ids (default: all except selftest_inverted)");
  add_output_options(check, o);
  check->add_option("--trials", o.trials, "Trials per check (0: default)")->check(CLI::Range(0, 10000000));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    err << "fix: run 'renyi_converse --help' or 'renyi_converse <command> --help' for the accepted flags\n";
    return kExitUsage;
  }

  std::ostringstream buffer;
  int code = kExitOk;
  const auto* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  try {
    if (name == "entropy") code = cmd_entropy(o, buffer);
    else if (name == "rree") code = cmd_rree(o, buffer);
    else if (name == "converse") code = cmd_converse(o, buffer);
    else if (name == "simulate") code = cmd_simulate(o, buffer);
    else if (name == "confront") code = cmd_confront(o, buffer);
    else if (name == "check") code = cmd_check(o, buffer);
  } catch (const UsageError& e) {
    err << "usage error (" << name << "): " << e.what() << "\n";
    err << "fix: run 'renyi_converse " << name << " --help'\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << name << ": " << e.what() << "\n";
    if (e.kind() == ErrorKind::BoundViolation) return kExitCheckFailed;
    if (!e.is_numerical()) {
      err << "fix: run 'renyi_converse " << name << " --help'\n";
      return kExitUsage;
    }
    return kExitNumerical;
  }

  if (!o.out.empty()) {
    std::ofstream f(o.out, std::ios::binary);
    if (!f) {
      err << "usage error: cannot write --out '" << o.out << "'\n";
      return kExitUsage;
    }
    f << buffer.str();
  } else {
    out << buffer.str();
  }
  return code;
}

inline int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace renyi
