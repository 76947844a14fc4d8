#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rigiditylab/cochain.hpp"
#include "rigiditylab/common.hpp"
#include "rigiditylab/gaps.hpp"
#include "rigiditylab/reps.hpp"
#include "rigiditylab/rigidity.hpp"
#include "rigiditylab/tame.hpp"
#include "rigiditylab/words.hpp"

namespace rigiditylab {

using Json = nlohmann::json;

inline constexpr const char* kToolName = "rigiditylab";
inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr std::uint64_t kDefaultSeed = 1729;

// ---------------------------------------------------------------------------
// Scenario parsing.  Every accessor carries the JSON path of the field it is
// reading so that a malformed scenario is rejected with a pointer to the
// offending field and nothing else.

namespace detail {

inline const Json& require_field(const Json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) throw ValidationError(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ValidationError(path + "/" + key, "required field is missing");
  return *it;
}

inline const Json* optional_field(const Json& obj, const char* key) {
  if (!obj.is_object()) return nullptr;
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

inline double as_num(const Json& j, const std::string& path) {
  if (!j.is_number()) throw ValidationError(path, "expected a number");
  return j.get<double>();
}

inline long as_int(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ValidationError(path, "expected an integer");
  return j.get<long>();
}

inline std::uint64_t as_seed(const Json& j, const std::string& path) {
  if (!j.is_number_integer() || (j.is_number_integer() && !j.is_number_unsigned() && j.get<long long>() < 0))
    throw ValidationError(path, "expected a nonnegative integer");
  return j.get<std::uint64_t>();
}

inline bool as_bool(const Json& j, const std::string& path) {
  if (!j.is_boolean()) throw ValidationError(path, "expected a boolean");
  return j.get<bool>();
}

inline std::string as_str(const Json& j, const std::string& path) {
  if (!j.is_string()) throw ValidationError(path, "expected a string");
  return j.get<std::string>();
}

inline const Json& as_array(const Json& j, const std::string& path) {
  if (!j.is_array()) throw ValidationError(path, "expected an array");
  return j;
}

inline std::string idx(const std::string& path, std::size_t i) {
  return path + "/" + std::to_string(i);
}

// Task parameters live under "params"; absent fields fall back to defaults.
inline double param_num(const Json& scenario, const char* key, double fallback) {
  const Json* params = optional_field(scenario, "params");
  if (!params) return fallback;
  const Json* v = optional_field(*params, key);
  return v ? as_num(*v, std::string("params/") + key) : fallback;
}

inline long param_int(const Json& scenario, const char* key, long fallback) {
  const Json* params = optional_field(scenario, "params");
  if (!params) return fallback;
  const Json* v = optional_field(*params, key);
  return v ? as_int(*v, std::string("params/") + key) : fallback;
}

inline bool param_flag(const Json& scenario, const char* key, bool fallback) {
  const Json* params = optional_field(scenario, "params");
  if (!params) return fallback;
  const Json* v = optional_field(*params, key);
  return v ? as_bool(*v, std::string("params/") + key) : fallback;
}

}  // namespace detail

inline cx parse_complex(const Json& j, const std::string& path) {
  const Json& a = detail::as_array(j, path);
  if (a.size() != 2) throw ValidationError(path, "complex entries are [re, im] pairs");
  return {detail::as_num(a[0], detail::idx(path, 0)), detail::as_num(a[1], detail::idx(path, 1))};
}

inline Mat parse_matrix(const Json& j, const std::string& path) {
  const Json& rows = detail::as_array(j, path);
  if (rows.empty()) throw ValidationError(path, "matrix needs at least one row");
  const std::size_t n = rows.size();
  Mat m(Eigen::Index(n), 0);
  for (std::size_t r = 0; r < n; ++r) {
    const std::string rpath = detail::idx(path, r);
    const Json& row = detail::as_array(rows[r], rpath);
    if (r == 0) m.resize(Eigen::Index(n), Eigen::Index(row.size()));
    if (row.size() != std::size_t(m.cols()))
      throw ValidationError(rpath, "rows must have equal length");
    for (std::size_t c = 0; c < row.size(); ++c)
      m(Eigen::Index(r), Eigen::Index(c)) = parse_complex(row[c], detail::idx(rpath, c));
  }
  return m;
}

inline Word parse_word(const Json& j, const std::string& path) {
  const Json& a = detail::as_array(j, path);
  Word w;
  w.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    w.push_back(int(detail::as_int(a[i], detail::idx(path, i))));
  return w;
}

inline Presentation parse_presentation(const Json& j, const std::string& path) {
  Presentation p;
  p.generators = int(detail::as_int(detail::require_field(j, "generators", path), path + "/generators"));
  const Json& rel = detail::as_array(detail::require_field(j, "relators", path), path + "/relators");
  for (std::size_t i = 0; i < rel.size(); ++i)
    p.relators.push_back(parse_word(rel[i], detail::idx(path + "/relators", i)));
  validate_presentation(p);
  return p;
}

inline std::vector<AxisAngle> parse_rotations(const Json& j, const std::string& path) {
  const Json& a = detail::as_array(j, path);
  std::vector<AxisAngle> out;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::string rpath = detail::idx(path, i);
    const Json& axis = detail::as_array(detail::require_field(a[i], "axis", rpath), rpath + "/axis");
    if (axis.size() != 3) throw ValidationError(rpath + "/axis", "axis must have three components");
    AxisAngle rot;
    for (int c = 0; c < 3; ++c)
      rot.axis[std::size_t(c)] = detail::as_num(axis[std::size_t(c)], detail::idx(rpath + "/axis", std::size_t(c)));
    rot.angle = detail::as_num(detail::require_field(a[i], "angle", rpath), rpath + "/angle");
    out.push_back(rot);
  }
  return out;
}

// Representation constructors: {"kind": "matrices" | "su2" | "torus" | "sum"}.
inline UnitaryRep parse_rep(const Json& j, const std::string& path) {
  std::string kind = detail::as_str(detail::require_field(j, "kind", path), path + "/kind");
  if (kind == "matrices") {
    const Json& gens = detail::as_array(detail::require_field(j, "generators", path), path + "/generators");
    if (gens.empty()) throw ValidationError(path + "/generators", "at least one generator is required");
    UnitaryRep rep;
    for (std::size_t i = 0; i < gens.size(); ++i) {
      const std::string gpath = detail::idx(path + "/generators", i);
      Mat m = parse_matrix(gens[i], gpath);
      if (m.rows() != m.cols()) throw ValidationError(gpath, "generator matrices must be square");
      if (i == 0) rep.dim = int(m.rows());
      if (int(m.rows()) != rep.dim)
        throw ValidationError(gpath, "generator matrices must share one dimension");
      rep.gens.push_back(std::move(m));
    }
    return rep;
  }
  if (kind == "su2") {
    double spin = detail::as_num(detail::require_field(j, "spin", path), path + "/spin");
    std::vector<AxisAngle> rot =
        parse_rotations(detail::require_field(j, "rotations", path), path + "/rotations");
    return su2_irrep(spin, rot).rep;
  }
  if (kind == "torus") {
    const Json& th = detail::as_array(detail::require_field(j, "theta", path), path + "/theta");
    std::vector<double> theta;
    for (std::size_t i = 0; i < th.size(); ++i)
      theta.push_back(detail::as_num(th[i], detail::idx(path + "/theta", i)));
    const Json& wt = detail::as_array(detail::require_field(j, "weight", path), path + "/weight");
    std::vector<long> weight;
    for (std::size_t i = 0; i < wt.size(); ++i)
      weight.push_back(detail::as_int(wt[i], detail::idx(path + "/weight", i)));
    return torus_weight_rep(theta, weight);
  }
  if (kind == "sum") {
    const Json& parts = detail::as_array(detail::require_field(j, "parts", path), path + "/parts");
    if (parts.empty()) throw ValidationError(path + "/parts", "at least one summand is required");
    std::vector<UnitaryRep> reps;
    for (std::size_t i = 0; i < parts.size(); ++i)
      reps.push_back(parse_rep(parts[i], detail::idx(path + "/parts", i)));
    return direct_sum(reps);
  }
  throw ValidationError(path + "/kind", "unknown representation kind '" + kind + "'");
}

// Graded family spec: rotations plus a spin range, realized through the SU(2)
// irreducible tower.
inline GradedModule parse_family(const Json& scenario, const std::string& path) {
  const Json& fam = detail::require_field(scenario, "family", "scenario");
  std::vector<AxisAngle> rot =
      parse_rotations(detail::require_field(fam, "rotations", path), path + "/rotations");
  double max_spin = detail::as_num(detail::require_field(fam, "max_spin", path), path + "/max_spin");
  double min_spin = 0.0;
  if (const Json* ms = detail::optional_field(fam, "min_spin"))
    min_spin = detail::as_num(*ms, path + "/min_spin");
  if (const Json* o = detail::optional_field(scenario, "params"))
    if (const Json* v = detail::optional_field(*o, "max_spin"))
      max_spin = detail::as_num(*v, "params/max_spin");
  return su2_family(rot, max_spin, min_spin);
}

// ---------------------------------------------------------------------------
// Report assembly.  Every numeric carries the tolerance it was computed at as
// a {"tol", "value"} pair; non-finite values serialize as strings so the
// report stays valid JSON.

inline Json json_number(double x) {
  if (std::isfinite(x)) return Json(x);
  if (std::isnan(x)) return Json("nan");
  return Json(x > 0 ? "inf" : "-inf");
}

inline Json tv(double value, double tol) {
  return Json{{"tol", json_number(tol)}, {"value", json_number(value)}};
}

inline Json tv(int value, double tol) { return Json{{"tol", json_number(tol)}, {"value", value}}; }

inline Json tv(long value, double tol) { return Json{{"tol", json_number(tol)}, {"value", value}}; }

inline Json matrix_json(const Mat& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      row.push_back(Json::array({m(r, c).real(), m(r, c).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::string fnv1a_digest(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 1099511628211ULL;
  }
  std::ostringstream out;
  out << "fnv1a64:" << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

struct Report {
  std::string task;
  Json doc;
};

namespace detail {

struct TaskContext {
  const Json& scenario;
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;
};

inline Json run_check(TaskContext& ctx) {
  Presentation p = parse_presentation(require_field(ctx.scenario, "presentation", "scenario"),
                                      "presentation");
  UnitaryRep rep = parse_rep(require_field(ctx.scenario, "representation", "scenario"),
                             "representation");
  double tol = param_num(ctx.scenario, "tol", 1e-10);
  RepCheck check = check_rep(p, rep, tol);
  Json residuals = Json::array();
  for (double r : check.relator_residuals) residuals.push_back(tv(r, tol));
  if (!check.pass) ctx.warnings.push_back("representation fails the action check at tolerance");
  return Json{{"max_relator", tv(check.max_relator, tol)},
              {"max_unitarity", tv(check.max_unitarity, tol)},
              {"pass", check.pass},
              {"relator_residuals", residuals}};
}

inline Json run_cohomology(TaskContext& ctx) {
  Presentation p = parse_presentation(require_field(ctx.scenario, "presentation", "scenario"),
                                      "presentation");
  UnitaryRep rep = parse_rep(require_field(ctx.scenario, "representation", "scenario"),
                             "representation");
  double rank_tol = param_num(ctx.scenario, "rank_tol", kDefaultRankTol);
  CochainComplex c = build_complex(p, rep);
  CohomologyReport r = cohomology_dims(c, rank_tol);
  if (r.near_threshold)
    ctx.warnings.push_back("a singular value sits near the rank threshold; dimensions are sensitive to rank_tol");
  return Json{{"h0", tv(r.h0, rank_tol)},
              {"h1", tv(r.h1, rank_tol)},
              {"near_threshold", r.near_threshold},
              {"rank_d0", tv(r.rank_d0, rank_tol)},
              {"rank_d1", tv(r.rank_d1, rank_tol)}};
}

inline Json run_split(TaskContext& ctx) {
  Presentation p = parse_presentation(require_field(ctx.scenario, "presentation", "scenario"),
                                      "presentation");
  UnitaryRep rep = parse_rep(require_field(ctx.scenario, "representation", "scenario"),
                             "representation");
  double rank_tol = param_num(ctx.scenario, "rank_tol", kDefaultRankTol);
  CochainComplex c = build_complex(p, rep);
  CohomologyReport dims = cohomology_dims(c, rank_tol);
  SplitOperators split = build_splitting(c, rank_tol);
  double harmonic_norm = op_norm(harmonic_projector(c, rank_tol));
  Json out{{"h1", tv(dims.h1, rank_tol)},
           {"harmonic_norm", tv(harmonic_norm, rank_tol)},
           {"residual", tv(split.residual, rank_tol)}};
  if (param_flag(ctx.scenario, "emit_matrices", false)) {
    out["D1"] = matrix_json(split.D1);
    out["D2"] = matrix_json(split.D2);
  }
  return out;
}

inline Json run_tame_fit(TaskContext& ctx) {
  double rank_tol = param_num(ctx.scenario, "rank_tol", kDefaultRankTol);
  std::vector<FitPoint> points;
  double sigma_tol = 0.0;
  if (const Json* pts = optional_field(ctx.scenario, "points")) {
    const Json& arr = as_array(*pts, "points");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string ppath = idx("points", i);
      const Json& pair = as_array(arr[i], ppath);
      if (pair.size() != 2) throw ValidationError(ppath, "points are [lambda, sigma] pairs");
      points.push_back({as_num(pair[0], idx(ppath, 0)), as_num(pair[1], idx(ppath, 1)), false});
    }
  } else {
    GradedModule family = parse_family(ctx.scenario, "family");
    sigma_tol = rank_tol;
    for (const GradedComponent& comp : family.components) {
      if (comp.trivial) {
        points.push_back({comp.lambda, 0.0, true});
        continue;
      }
      GapEntry gap = generator_gap_bounds(comp.rep, rank_tol);
      points.push_back({comp.lambda, gap.delta_lo, false});
    }
  }
  TameFit fit = fit_tame_constants(points);
  Json rows = Json::array();
  for (const FitPoint& pt : fit.points)
    rows.push_back(Json{{"lambda", tv(pt.lambda, 0.0)}, {"sigma", tv(pt.sigma, sigma_tol)}});
  return Json{{"alpha", tv(fit.alpha, 0.0)},
              {"epsilon", tv(fit.epsilon, sigma_tol)},
              {"rows", rows},
              {"slope", tv(fit.slope, 0.0)},
              {"slope_cap", tv(fit.slope_cap, 0.0)}};
}

inline Json run_tame_probe(TaskContext& ctx) {
  GradedModule family = parse_family(ctx.scenario, "family");
  std::string op_name = "identity";
  if (const Json* op = optional_field(ctx.scenario, "operator"))
    op_name = as_str(*op, "operator");
  ComponentOperator op;
  if (op_name == "identity")
    op = identity_op();
  else if (op_name == "multiply")
    op = multiply_lambda_op(family);
  else if (op_name == "d0")
    op = d0_op(family);
  else
    throw ValidationError("operator", "unknown operator '" + op_name + "'");
  int samples = int(param_int(ctx.scenario, "samples", 3));
  int k_min = int(param_int(ctx.scenario, "k_min", 0));
  int k_max = int(param_int(ctx.scenario, "k_max", 3));
  int window = int(param_int(ctx.scenario, "window", 4));
  ProbeReport probe = tame_degree_probe(op, family, samples, k_min, k_max, window, ctx.seed);
  if (!probe.tame_in_window)
    ctx.warnings.push_back("operator gains exceed the tameness window");
  Json constants = Json::array();
  for (const auto& [k, c] : probe.constants)
    constants.push_back(Json{{"constant", tv(c, 0.0)}, {"k", k}});
  Json gains = Json::array();
  for (double g : probe.component_gain) gains.push_back(tv(g, 0.0));
  return Json{{"component_gain", gains},
              {"constants", constants},
              {"degree", tv(probe.degree, 0.0)},
              {"slope", tv(probe.slope, 0.0)},
              {"tame_in_window", probe.tame_in_window}};
}

inline Json run_gap_sweep(TaskContext& ctx) {
  std::vector<AxisAngle> rot =
      parse_rotations(require_field(ctx.scenario, "rotations", "scenario"), "rotations");
  double max_spin = param_num(ctx.scenario, "max_spin", 10.0);
  double rank_tol = param_num(ctx.scenario, "rank_tol", kDefaultRankTol);
  DolgopyatReport sweep = dolgopyat_sweep(rot, max_spin, rank_tol);
  if (sweep.gap_failure)
    ctx.warnings.push_back("a sweep row has no positive certified gap");
  Json rows = Json::array();
  for (const SweepRow& row : sweep.rows)
    rows.push_back(Json{{"delta_hi", tv(row.delta_hi, rank_tol)},
                        {"delta_lo", tv(row.delta_lo, rank_tol)},
                        {"j", tv(row.spin, 0.0)},
                        {"lambda", tv(row.lambda, 0.0)},
                        {"witness", tv(row.witness, 0.0)}});
  return Json{{"eps0", tv(sweep.eps0, rank_tol)}, {"gap_failure", sweep.gap_failure}, {"rows", rows}};
}

inline Json run_net(TaskContext& ctx) {
  std::vector<AxisAngle> rot =
      parse_rotations(require_field(ctx.scenario, "rotations", "scenario"), "rotations");
  int radius = int(param_int(ctx.scenario, "radius", 4));
  int probe_size = int(param_int(ctx.scenario, "probe_size", kDefaultProbeSize));
  double dedup_tol = param_num(ctx.scenario, "dedup_tol", 1e-9);
  NetGrowthReport net = net_growth_experiment(rot, radius, probe_size, dedup_tol);
  double bias = net.rows.empty() ? 0.0 : net.rows.front().probe_bias;
  Json rows = Json::array();
  for (const NetReport& row : net.rows)
    rows.push_back(Json{{"ball", tv(long(row.ball_size), dedup_tol)},
                        {"eps", tv(row.eps_hat, row.probe_bias)},
                        {"n", tv(row.radius, 0.0)}});
  return Json{{"fit_constant", tv(net.fit_constant, bias)},
              {"probe_size", tv(net.probe_size, 0.0)},
              {"rows", rows}};
}

inline Json run_averaging(TaskContext& ctx) {
  UnitaryRep rep = parse_rep(require_field(ctx.scenario, "representation", "scenario"),
                             "representation");
  const Json& words_json = as_array(require_field(ctx.scenario, "words", "scenario"), "words");
  std::vector<Word> words;
  for (std::size_t i = 0; i < words_json.size(); ++i)
    words.push_back(parse_word(words_json[i], idx("words", i)));
  double rank_tol = param_num(ctx.scenario, "rank_tol", kDefaultRankTol);
  AveragingCertificate cert = averaging_lower_bound(rep, words, rank_tol);
  if (!cert.pass)
    ctx.warnings.push_back("averaging certificate failed: smallest nonzero singular value is below the pairwise-gap hypothesis");
  Json gaps = Json::array();
  for (double g : cert.pair_gaps) gaps.push_back(tv(g, 1e-10));
  Json words_echo = Json::array();
  for (const Word& w : cert.words) words_echo.push_back(Json(w));
  return Json{{"eta", tv(cert.eta, 1e-10)},
              {"eta_augmented", tv(cert.eta_augmented, 1e-10)},
              {"pair_gaps", gaps},
              {"pass", cert.pass},
              {"pass_augmented", cert.pass_augmented},
              {"sigma_plus_min", tv(cert.sigma_plus_min, rank_tol)},
              {"slack", tv(kAveragingSlack, 0.0)},
              {"words", words_echo}};
}

inline Json run_torus(TaskContext& ctx) {
  const Json& th = as_array(require_field(ctx.scenario, "theta", "scenario"), "theta");
  std::vector<double> theta;
  for (std::size_t i = 0; i < th.size(); ++i) theta.push_back(as_num(th[i], idx("theta", i)));
  int weight_bound = int(param_int(ctx.scenario, "weight_bound", 100));
  int alpha_max = int(param_int(ctx.scenario, "alpha", 4));
  DiophantineReport scan = torus_gap_scan(theta, weight_bound, alpha_max);
  Json rows = Json::array();
  for (const DiophantineRow& row : scan.rows)
    rows.push_back(Json{{"alpha", tv(row.alpha, 0.0)},
                        {"eps", tv(row.eps, 1e-12)},
                        {"minimizer", Json(row.minimizer)}});
  return Json{{"excluded", tv(scan.excluded, 0.0)},
              {"rows", rows},
              {"scanned", tv(scan.scanned, 0.0)},
              {"weight_bound", tv(scan.weight_bound, 0.0)}};
}

inline ActionTuple parse_target(TaskContext& ctx, const Presentation& p, const ActionTuple& base) {
  const Json& target = require_field(ctx.scenario, "target", "scenario");
  if (optional_field(target, "kind")) return make_action(parse_rep(target, "target"));
  if (const Json* perturb = optional_field(target, "perturb")) {
    std::string mode_name =
        as_str(require_field(*perturb, "mode", "target/perturb"), "target/perturb/mode");
    PerturbMode mode;
    if (mode_name == "planted")
      mode = PerturbMode::planted;
    else if (mode_name == "centralizer")
      mode = PerturbMode::centralizer;
    else if (mode_name == "raw")
      mode = PerturbMode::raw;
    else
      throw ValidationError("target/perturb/mode", "unknown perturbation mode '" + mode_name + "'");
    double magnitude = as_num(require_field(*perturb, "magnitude", "target/perturb"),
                              "target/perturb/magnitude");
    std::uint64_t seed = ctx.seed;
    if (const Json* s = optional_field(*perturb, "seed")) seed = as_seed(*s, "target/perturb/seed");
    return perturb_action(p, base, mode, magnitude, seed);
  }
  throw ValidationError("target", "expected a representation constructor or a perturb spec");
}

inline Json run_rigidity_solve(TaskContext& ctx) {
  Presentation p = parse_presentation(require_field(ctx.scenario, "presentation", "scenario"),
                                      "presentation");
  ActionTuple base = make_action(
      parse_rep(require_field(ctx.scenario, "representation", "scenario"), "representation"));
  ActionTuple target = parse_target(ctx, p, base);
  NewtonOptions opts;
  opts.tol = param_num(ctx.scenario, "tol", opts.tol);
  opts.rank_tol = param_num(ctx.scenario, "rank_tol", opts.rank_tol);
  opts.max_iter = int(param_int(ctx.scenario, "max_iter", opts.max_iter));
  ConjugacyResult res = weil_newton(p, base, target, opts);
  if (res.projected_only)
    ctx.warnings.push_back("target is not an action within tolerance; only the projected equation was solved");
  if (!res.converged) ctx.warnings.push_back("solver did not reach the stopping tolerance");
  Json history = Json::array();
  for (double r : res.history) history.push_back(tv(r, opts.tol));
  Json out{{"action_residual", tv(res.action_residual, opts.action_tol)},
           {"converged", res.converged},
           {"history", history},
           {"iterations", tv(res.iterations, 0.0)},
           {"obstruction", tv(res.obstruction, opts.rank_tol)},
           {"projected_only", res.projected_only}};
  if (param_flag(ctx.scenario, "emit_matrices", false)) out["u"] = matrix_json(res.u);
  return out;
}

inline Json run_rigidity_deform(TaskContext& ctx) {
  Presentation p = parse_presentation(require_field(ctx.scenario, "presentation", "scenario"),
                                      "presentation");
  ActionTuple base = make_action(
      parse_rep(require_field(ctx.scenario, "representation", "scenario"), "representation"));
  Mat z0 = parse_matrix(require_field(ctx.scenario, "z0", "scenario"), "z0");
  const Json& phi_json = as_array(require_field(ctx.scenario, "phi", "scenario"), "phi");
  std::vector<long> phi;
  for (std::size_t i = 0; i < phi_json.size(); ++i)
    phi.push_back(as_int(phi_json[i], idx("phi", i)));
  DeformationFamily family = deformation_family(p, base, z0, phi);
  std::vector<double> ts;
  if (const Json* params = optional_field(ctx.scenario, "params"))
    if (const Json* list = optional_field(*params, "ts")) {
      const Json& arr = as_array(*list, "params/ts");
      for (std::size_t i = 0; i < arr.size(); ++i)
        ts.push_back(as_num(arr[i], idx("params/ts", i)));
    }
  if (ts.empty()) {
    long count = param_int(ctx.scenario, "sample_count", 20);
    if (count < 2) throw ValidationError("params/sample_count", "at least two samples are required");
    for (long i = 0; i < count; ++i)
      ts.push_back(-1.0 + 2.0 * double(i) / double(count - 1));
  }
  double worst = 0.0;
  Json rows = Json::array();
  for (double t : ts) {
    double r = relator_residual(p, family.sample(t));
    worst = std::max(worst, r);
    rows.push_back(Json{{"relator_residual", tv(r, 1e-12)}, {"t", tv(t, 0.0)}});
  }
  return Json{{"max_residual", tv(worst, 1e-12)}, {"samples", rows}};
}

}  // namespace detail

inline const std::vector<std::string>& scenario_tasks() {
  static const std::vector<std::string> tasks = {
      "check",     "cohomology", "split",          "tame-fit",        "tame-probe", "gap-sweep",
      "net",       "averaging",  "torus",          "rigidity-solve",  "rigidity-deform"};
  return tasks;
}

inline Report run_scenario(const Json& scenario) {
  if (!scenario.is_object()) throw ValidationError("scenario", "expected a JSON object");
  std::string task = detail::as_str(detail::require_field(scenario, "task", "scenario"), "task");
  const auto& tasks = scenario_tasks();
  if (std::find(tasks.begin(), tasks.end(), task) == tasks.end())
    throw ValidationError("task", "unknown task '" + task + "'");
  if (scenario.contains("params") && !scenario.at("params").is_object())
    throw ValidationError("params", "expected an object");
  std::uint64_t seed = kDefaultSeed;
  if (const Json* s = detail::optional_field(scenario, "seed")) seed = detail::as_seed(*s, "seed");

  detail::TaskContext ctx{scenario, seed, {}};
  Json results;
  if (task == "check")
    results = detail::run_check(ctx);
  else if (task == "cohomology")
    results = detail::run_cohomology(ctx);
  else if (task == "split")
    results = detail::run_split(ctx);
  else if (task == "tame-fit")
    results = detail::run_tame_fit(ctx);
  else if (task == "tame-probe")
    results = detail::run_tame_probe(ctx);
  else if (task == "gap-sweep")
    results = detail::run_gap_sweep(ctx);
  else if (task == "net")
    results = detail::run_net(ctx);
  else if (task == "averaging")
    results = detail::run_averaging(ctx);
  else if (task == "torus")
    results = detail::run_torus(ctx);
  else if (task == "rigidity-solve")
    results = detail::run_rigidity_solve(ctx);
  else
    results = detail::run_rigidity_deform(ctx);

  Report report;
  report.task = task;
  report.doc = Json{{"input_digest", fnv1a_digest(scenario.dump())},
                    {"results", std::move(results)},
                    {"seed", seed},
                    {"task", task},
                    {"tool", Json{{"name", kToolName}, {"version", kToolVersion}}},
                    {"warnings", Json(ctx.warnings)}};
  return report;
}

inline std::string render_report(const Report& report) { return report.doc.dump(2) + "\n"; }

inline bool has_table(const std::string& task) {
  return task == "gap-sweep" || task == "net" || task == "tame-fit";
}

namespace detail {

inline std::string csv_num(const Json& tv_node) {
  const Json& v = tv_node.at("value");
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

}  // namespace detail

// Fixed per-task tables: (j, lambda, delta_lo, delta_hi), (n, ball, eps),
// (lambda, sigma).  Non-tabular tasks yield an empty string.
inline std::string render_csv(const Report& report) {
  std::ostringstream out;
  const Json& results = report.doc.at("results");
  if (report.task == "gap-sweep") {
    out << "j,lambda,delta_lo,delta_hi\n";
    for (const Json& row : results.at("rows"))
      out << detail::csv_num(row.at("j")) << ',' << detail::csv_num(row.at("lambda")) << ','
          << detail::csv_num(row.at("delta_lo")) << ',' << detail::csv_num(row.at("delta_hi"))
          << '\n';
  } else if (report.task == "net") {
    out << "n,ball,eps\n";
    for (const Json& row : results.at("rows"))
      out << detail::csv_num(row.at("n")) << ',' << detail::csv_num(row.at("ball")) << ','
          << detail::csv_num(row.at("eps")) << '\n';
  } else if (report.task == "tame-fit") {
    out << "lambda,sigma\n";
    for (const Json& row : results.at("rows"))
      out << detail::csv_num(row.at("lambda")) << ',' << detail::csv_num(row.at("sigma")) << '\n';
  }
  return out.str();
}

}  // namespace rigiditylab
