#pragma once

// State files, named presets, grid ranges and JSON/CSV serialization.

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "renyi/converse.hpp"
#include "renyi/entanglement.hpp"
#include "renyi/error.hpp"
#include "renyi/propcheck.hpp"
#include "renyi/protocols.hpp"
#include "renyi/qstate.hpp"

namespace renyi {

using Json = nlohmann::json;

/// A state as loaded from a file or preset; `pure` is set when it was given as a vector.
struct LoadedState {
  DensityMatrix rho = DensityMatrix::maximally_mixed(SubsystemDims::single(1));
  std::optional<PureState> pure;
  std::string source;
};

// ---------------------------------------------------------------------------
// number formatting and ranges

/// Shortest round-trip decimal for a double; "inf", "-inf", "nan" otherwise.
inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

/// Fixed significant digits for human-readable output.
inline std::string format_short(double x, int digits = 10) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

inline double parse_double(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    if (s == "inf" || s == "infinity") return kInf;
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw Error(ErrorKind::ParseError, what + ": '" + s + "' is not a number");
  }
  if (used != s.size()) throw Error(ErrorKind::ParseError, what + ": trailing characters in '" + s + "'");
  return v;
}

/// "x" or "a:b:step" (inclusive, values a + i*step rounded to 12 decimals).
inline std::vector<double> parse_range(const std::string& spec, const std::string& what) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.size() == 1) {
    const double v = parse_double(parts[0], what);
    if (std::isnan(v)) throw Error(ErrorKind::ParseError, what + " must be finite");
    return {v};
  }
  if (parts.size() != 3) throw Error(ErrorKind::ParseError, what + ": expected VALUE or START:STOP:STEP, got '" + spec + "'");
  const double a = parse_double(parts[0], what);
  const double b = parse_double(parts[1], what);
  const double step = parse_double(parts[2], what);
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(step) || step <= 0.0 || b < a) {
    throw Error(ErrorKind::ParseError, what + ": range needs finite START <= STOP and STEP > 0");
  }
  const double count = std::floor((b - a) / step + 1e-9);
  if (count > 1e6) throw Error(ErrorKind::ParseError, what + ": range has more than 10^6 points");
  std::vector<double> out;
  for (long i = 0; i <= static_cast<long>(count); ++i) {
    out.push_back(std::round((a + static_cast<double>(i) * step) * 1e12) / 1e12);
  }
  return out;
}

inline std::vector<long> parse_int_range(const std::string& spec, const std::string& what) {
  std::vector<long> out;
  for (double v : parse_range(spec, what)) {
    if (v != std::floor(v)) throw Error(ErrorKind::ParseError, what + " must be an integer, got " + format_number(v));
    out.push_back(static_cast<long>(v));
  }
  return out;
}

inline std::vector<double> parse_list(const std::string& spec, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) throw Error(ErrorKind::ParseError, what + ": empty entry in '" + spec + "'");
    out.push_back(parse_double(item.substr(b, e - b + 1), what));
  }
  if (out.empty()) throw Error(ErrorKind::ParseError, what + ": empty list");
  return out;
}

// ---------------------------------------------------------------------------
// presets

namespace detail {

inline LoadedState from_pure(PureState psi, std::string source) {
  LoadedState s;
  s.rho = psi.density();
  s.pure = std::move(psi);
  s.source = std::move(source);
  return s;
}

inline int positive_int(double v, const std::string& what) {
  if (v != std::floor(v) || v < 1.0 || v > 64.0) throw Error(ErrorKind::ParseError, what + " must be an integer in [1, 64]");
  return static_cast<int>(v);
}

}  // namespace detail

/// bell, phi(K), ghz(n), werner(p), schmidt(p1,...,pk), diag(p1,...,pk), merge_demo.
inline LoadedState parse_preset(const std::string& spec) {
  const auto open = spec.find('(');
  const std::string name = spec.substr(0, open);
  std::vector<double> args;
  if (open != std::string::npos) {
    if (spec.back() != ')') throw Error(ErrorKind::ParseError, "preset '" + spec + "' is missing ')'");
    args = parse_list(spec.substr(open + 1, spec.size() - open - 2), "preset argument");
  }
  auto expect_args = [&](std::size_t n) {
    if (args.size() != n) {
      throw Error(ErrorKind::ParseError, "preset " + name + " takes " + std::to_string(n) + " argument(s)");
    }
  };
  if (name == "bell") {
    expect_args(0);
    return detail::from_pure(maximally_entangled(2), spec);
  }
  if (name == "phi") {
    expect_args(1);
    return detail::from_pure(maximally_entangled(detail::positive_int(args[0], "phi(K)")), spec);
  }
  if (name == "ghz") {
    expect_args(1);
    const int n = detail::positive_int(args[0], "ghz(n)");
    if (n < 2 || n > 8) throw Error(ErrorKind::ParseError, "ghz(n) needs 2 <= n <= 8");
    static const char* labels[] = {"A", "B", "R", "C", "D", "E", "G", "H"};
    std::vector<Factor> factors;
    for (int i = 0; i < n; ++i) factors.push_back({labels[i], 2});
    const SubsystemDims dims(factors);
    Vector v = Vector::Zero(dims.total_dim());
    v(0) = v(dims.total_dim() - 1) = 1.0 / std::sqrt(2.0);
    return detail::from_pure(PureState::normalized(v, dims), spec);
  }
  if (name == "werner") {
    expect_args(1);
    const double p = args[0];
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::ParseError, "werner(p) needs p in [0, 1]");
    Vector singlet = Vector::Zero(4);
    singlet(1) = 1.0 / std::sqrt(2.0);
    singlet(2) = -1.0 / std::sqrt(2.0);
    const Matrix m = p * singlet * singlet.adjoint() + (1.0 - p) * Matrix::Identity(4, 4) / 4.0;
    LoadedState s;
    s.rho = DensityMatrix::validate(m, SubsystemDims({{"A", 2}, {"B", 2}}));
    s.source = spec;
    return s;
  }
  if (name == "schmidt") {
    if (args.empty()) throw Error(ErrorKind::ParseError, "schmidt(...) needs at least one weight");
    double total = 0.0;
    for (double a : args) total += a;
    if (std::abs(total - 1.0) > 1e-9) throw Error(ErrorKind::ParseError, "schmidt weights must sum to 1");
    return detail::from_pure(schmidt_state(args), spec);
  }
  if (name == "diag") {
    if (args.empty()) throw Error(ErrorKind::ParseError, "diag(...) needs at least one probability");
    LoadedState s;
    s.rho = diagonal_state(args);
    s.source = spec;
    return s;
  }
  if (name == "merge_demo") {
    expect_args(0);
    // Phi_2 on A R, |0> on B, registers ordered A, B, R.
    const SubsystemDims dims({{"A", 2}, {"B", 2}, {"R", 2}});
    Vector v = Vector::Zero(8);
    v(0) = 1.0 / std::sqrt(2.0);  // |0 0 0>
    v(5) = 1.0 / std::sqrt(2.0);  // |1 0 1>
    return detail::from_pure(PureState::normalized(v, dims), spec);
  }
  throw Error(ErrorKind::ParseError,
              "unknown preset '" + name + "' (try bell, phi(K), ghz(n), werner(p), schmidt(...), diag(...), merge_demo)");
}

// ---------------------------------------------------------------------------
// JSON

inline Json complex_to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

inline Complex complex_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw Error(ErrorKind::ParseError, "complex entries must be [re, im] pairs");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

inline Json vector_to_json(const Vector& v) {
  Json arr = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(complex_to_json(v(i)));
  return arr;
}

inline Json dims_to_json(const SubsystemDims& dims) {
  Json arr = Json::array();
  for (const auto& f : dims.factors()) arr.push_back({{"label", f.label}, {"dim", f.dim}});
  return arr;
}

inline SubsystemDims dims_from_json(const Json& j) {
  if (!j.is_array()) throw Error(ErrorKind::ParseError, "'dims' must be an array of {label, dim}");
  std::vector<Factor> factors;
  for (const auto& f : j) {
    if (!f.contains("label") || !f.contains("dim")) throw Error(ErrorKind::ParseError, "each dims entry needs label and dim");
    factors.push_back({f["label"].get<std::string>(), f["dim"].get<int>()});
  }
  return SubsystemDims(std::move(factors));
}

/// {"dims": [...], "matrix": [[[re, im], ...], ...]}.
inline Json state_to_json(const DensityMatrix& rho) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < rho.dim(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < rho.dim(); ++j) row.push_back(complex_to_json(rho.matrix()(i, j)));
    rows.push_back(std::move(row));
  }
  return {{"dims", dims_to_json(rho.dims())}, {"matrix", std::move(rows)}};
}

/// {"dims": [...], "vector": [[re, im], ...]}.
inline Json state_to_json(const PureState& psi) {
  return {{"dims", dims_to_json(psi.dims())}, {"vector", vector_to_json(psi.amplitudes())}};
}

inline LoadedState state_from_json(const Json& j, std::string source) {
  if (!j.is_object() || !j.contains("dims")) throw Error(ErrorKind::ParseError, "state JSON needs a 'dims' field");
  const SubsystemDims dims = dims_from_json(j["dims"]);
  try {
    if (j.contains("vector")) {
      Vector v(static_cast<Eigen::Index>(j["vector"].size()));
      for (std::size_t i = 0; i < j["vector"].size(); ++i) v(static_cast<Eigen::Index>(i)) = complex_from_json(j["vector"][i]);
      return detail::from_pure(PureState::validate(v, dims), std::move(source));
    }
    if (j.contains("matrix")) {
      const Json& rows = j["matrix"];
      const auto n = static_cast<Eigen::Index>(rows.size());
      Matrix m(n, n);
      for (Eigen::Index r = 0; r < n; ++r) {
        if (static_cast<Eigen::Index>(rows[r].size()) != n) throw Error(ErrorKind::DimensionMismatch, "matrix is not square");
        for (Eigen::Index c = 0; c < n; ++c) m(r, c) = complex_from_json(rows[r][c]);
      }
      LoadedState s;
      s.rho = DensityMatrix::validate(m, dims);
      s.source = std::move(source);
      return s;
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("malformed state JSON: ") + e.what());
  }
  throw Error(ErrorKind::ParseError, "state JSON needs 'vector' or 'matrix'");
}

inline LoadedState load_state_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open state file '" + path + "'");
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::ParseError, "state file '" + path + "' is not valid JSON: " + e.what());
  }
  return state_from_json(j, path);
}

/// Finite doubles as numbers; infinities as the strings "inf" / "-inf".
inline Json number_json(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

/// [{weight, a_vec, b_vec}, ...].
inline Json witness_to_json(const SeparableDecomposition& dec) {
  Json terms = Json::array();
  for (const auto& t : dec.terms) {
    terms.push_back({{"weight", t.weight}, {"a_vec", vector_to_json(t.a)}, {"b_vec", vector_to_json(t.b)}});
  }
  return terms;
}

inline Json to_json(const RreeEstimate& e) {
  Json trace = Json::array();
  for (const auto& [it, v] : e.optimizer_trace) trace.push_back({it, number_json(v)});
  Json j = {{"alpha", e.alpha},
            {"analytic_lower", number_json(e.analytic_lower)},
            {"upper_estimate", number_json(e.upper_estimate)},
            {"weak_guarantee", e.weak_guarantee},
            {"restarts", e.restarts_run},
            {"best_restart", e.best_restart},
            {"witness_terms", e.witness.terms.size()},
            {"optimizer_trace", std::move(trace)}};
  j["analytic_upper"] = e.analytic_upper ? number_json(*e.analytic_upper) : Json(nullptr);
  return j;
}

inline Json to_json(const ConverseBoundResult& r) {
  Json rates = Json::object();
  for (const auto& [k, v] : r.rate_params) rates[k] = number_json(v);
  Json terms = Json::object();
  for (const auto& [k, v] : r.term_breakdown) terms[k] = number_json(v);
  return {{"theorem", std::string(to_string(r.theorem))},
          {"alpha", r.alpha},
          {"n", r.n},
          {"rate", number_json(r.rate)},
          {"rate_params", std::move(rates)},
          {"exponent_per_copy", number_json(r.exponent_per_copy)},
          {"log_F_bound", number_json(r.log_fidelity_bound)},
          {"vacuous", r.vacuous},
          {"term_breakdown", std::move(terms)}};
}

inline Json to_json(const ProtocolRunResult& r) {
  Json j = {{"protocol", r.protocol}, {"n", r.n}, {"rate", number_json(r.rate)}, {"fidelity_lower", r.fidelity_lower},
            {"kept_dimension", r.kept_dimension}};
  if (r.protocol == "schumacher") j["eta"] = r.eta;
  if (r.fidelity_exact) j["fidelity_exact"] = *r.fidelity_exact;
  if (r.postselected_fidelity) j["postselected_fidelity"] = *r.postselected_fidelity;
  if (r.success_prob) j["success_prob"] = *r.success_prob;
  if (r.expected_yield) j["expected_yield"] = *r.expected_yield;
  return j;
}

inline Json to_json(const CheckReport& r) {
  Json fails = Json::array();
  for (const auto& f : r.failures) fails.push_back({{"seed", f.seed}, {"margin", number_json(f.margin)}});
  return {{"check_id", r.check_id},       {"trials", r.trials},       {"worst_margin", number_json(r.worst_margin)},
          {"tolerance", r.tolerance},     {"failures", std::move(fails)}, {"expect_failure", r.expect_failure},
          {"passed", r.passed()},         {"config", r.config}};
}

inline Json to_json(const ConfrontReport& rep) {
  Json rows = Json::array();
  for (const auto& row : rep.rows) {
    Json j = {{"n", row.n},
              {"rate", number_json(row.rate)},
              {"alpha", row.bound.alpha},
              {"log_F_bound", number_json(row.bound.log_fidelity_bound)},
              {"bound_fidelity", number_json(row.bound_fidelity)},
              {"vacuous", row.bound.vacuous},
              {"violation", row.violation}};
    j["achieved"] = row.achieved ? Json(*row.achieved) : Json(nullptr);
    if (row.achieved_exact) j["achieved_exact"] = *row.achieved_exact;
    if (row.postselected) j["postselected_fidelity"] = *row.postselected;
    rows.push_back(std::move(j));
  }
  return {{"theorem", std::string(to_string(rep.theorem))},
          {"bound_only", rep.bound_only},
          {"violations", rep.violations},
          {"crossover_n", rep.crossover_n},
          {"rows", std::move(rows)}};
}

// ---------------------------------------------------------------------------
// CSV

inline constexpr const char* kConverseCsvHeader = "theorem,alpha,n,rate,exponent_per_copy,log_F_bound,vacuous";
inline constexpr const char* kProtocolCsvHeader =
    "protocol,n,rate,eta,fidelity_lower,fidelity_exact,postselected_fidelity,success_prob";
inline constexpr const char* kConfrontCsvHeader =
    "theorem,n,rate,alpha,log_F_bound,bound_fidelity,vacuous,achieved,achieved_exact,violation";

inline std::string csv_row(const ConverseBoundResult& r) {
  return std::string(to_string(r.theorem)) + "," + format_number(r.alpha) + "," + std::to_string(r.n) + "," +
         format_number(r.rate) + "," + format_number(r.exponent_per_copy) + "," + format_number(r.log_fidelity_bound) +
         "," + (r.vacuous ? "true" : "false");
}

inline std::string csv_row(const ProtocolRunResult& r) {
  auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
  return r.protocol + "," + std::to_string(r.n) + "," + format_number(r.rate) + "," +
         (r.protocol == "schumacher" ? format_number(r.eta) : std::string()) + "," + format_number(r.fidelity_lower) +
         "," + opt(r.fidelity_exact) + "," + opt(r.postselected_fidelity) + "," + opt(r.success_prob);
}

inline std::string csv_row(TheoremId id, const ConfrontRow& row) {
  auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
  return std::string(to_string(id)) + "," + std::to_string(row.n) + "," + format_number(row.rate) + "," +
         format_number(row.bound.alpha) + "," + format_number(row.bound.log_fidelity_bound) + "," +
         format_number(row.bound_fidelity) + "," + (row.bound.vacuous ? "true" : "false") + "," + opt(row.achieved) +
         "," + opt(row.achieved_exact) + "," + (row.violation ? "true" : "false");
}

}  // namespace renyi
