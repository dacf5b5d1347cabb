#include "manidel/report.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>

namespace manidel {

using nlohmann::json;

namespace {

// JSON has no infinity; keep the value readable.
json num(double x) {
  if (std::isfinite(x)) return x;
  return std::isnan(x) ? json("nan") : json(x > 0 ? "inf" : "-inf");
}

json vec(const Point& p) {
  json out = json::array();
  for (Eigen::Index d = 0; d < p.size(); ++d) out.push_back(num(p[d]));
  return out;
}

}  // namespace

json params_json(const AlgorithmParams& p) {
  json c = json::array();
  for (const Constraint& k : p.constraints)
    c.push_back({{"name", k.name}, {"lhs", num(k.lhs)}, {"rhs", num(k.rhs)}, {"ok", k.ok}});
  return {{"m", p.m},
          {"mu0", p.mu0},
          {"rho0", p.rho0},
          {"rho_tilde0", p.rho_tilde0},
          {"gamma0", num(p.gamma0)},
          {"delta0", num(p.delta0)},
          {"alpha0", num(p.alpha0)},
          {"alpha_tilde0", num(p.alpha_tilde0)},
          {"xi0", p.xi0},
          {"nu0", p.nu0},
          {"C", num(p.C)},
          {"max_attempts", p.max_attempts},
          {"seed", p.seed},
          {"p2_prune", p.p2_prune},
          {"certified", p.certified()},
          {"overridden", p.overridden},
          {"constraints", c},
          {"constraints_hold", p.constraints_hold()}};
}

json forbidden_json(const std::vector<ForbiddenConfig>& scan) {
  json out = json::array();
  for (const ForbiddenConfig& f : scan)
    out.push_back({{"patch", f.patch_id},
                   {"simplex", f.simplex},
                   {"witness_vertex", f.witness_vertex},
                   {"witness_center", vec(f.witness_center)},
                   {"witness_radius", num(f.witness_radius)},
                   {"witness_distance", num(f.witness_distance)}});
  return out;
}

json run_report_json(const RunReport& r) {
  json attempts = json::array(), disp = json::array(), delta = json::array();
  for (const auto& [l, n] : r.attempts) attempts.push_back({l, n});
  for (const auto& [l, d] : r.displacement) disp.push_back({l, num(d)});
  for (const auto& [l, d] : r.delta) delta.push_back({l, num(d)});
  double max_disp = 0.0;
  for (const auto& [l, d] : r.displacement) max_disp = std::max(max_disp, d);
  json out{{"params", params_json(r.params)},
           {"attempts", attempts},
           {"mean_attempts", r.mean_attempts},
           {"max_attempts_used", r.max_attempts_used},
           {"displacement_over_eps", disp},
           {"max_displacement_over_eps", max_disp},
           {"delta", delta},
           {"scan_run", r.scan_run},
           {"seconds", r.seconds}};
  if (r.scan_run) {
    out["scan_empty"] = r.scan_empty();
    out["forbidden"] = forbidden_json(r.scan);
  }
  return out;
}

json validation_json(const ValidationReport& r) {
  json issues = json::array();
  for (const ValidationIssue& v : r.issues)
    issues.push_back({{"check", v.check},
                      {"i", v.i},
                      {"j", v.j},
                      {"magnitude", num(v.magnitude)},
                      {"warning", v.warning},
                      {"detail", v.detail}});
  return {{"ok", r.ok()},
          {"patches_checked", r.patches_checked},
          {"transitions_checked", r.transitions_checked},
          {"max_distortion", num(r.max_distortion)},
          {"issues", issues}};
}

json lemma_json(const LemmaReport& r) {
  json outcomes = json::array();
  for (const LemmaOutcome& o : r.outcomes)
    outcomes.push_back({{"name", o.name},
                        {"checked", o.checked},
                        {"skipped", o.skipped},
                        {"violations", o.violations},
                        {"worst_ratio", num(o.worst_ratio)}});
  return {{"k", r.k},
          {"xi0", r.xi0},
          {"trials", r.trials},
          {"seed", r.seed},
          {"total_violations", r.total_violations()},
          {"outcomes", outcomes}};
}

json hoop_json(const HoopDistortionReport& r) {
  return {{"trials", r.trials},
          {"checked", r.checked},
          {"skipped", r.skipped},
          {"thickness_violations", r.thickness_violations},
          {"radius_violations", r.radius_violations},
          {"distance_violations", r.distance_violations},
          {"total_violations", r.total_violations()},
          {"worst_distance_ratio", num(r.worst_distance_ratio)},
          {"worst_radius_ratio", num(r.worst_radius_ratio)},
          {"report_only", r.report_only}};
}

json manifold_json(const ManifoldReport& r) {
  json out{{"ok", r.ok()},
           {"is_pure", r.is_pure},
           {"ridge_degrees_ok", r.ridge_degrees_ok},
           {"links_ok", r.links_ok},
           {"partial", r.partial},
           {"euler_characteristic", r.euler_characteristic},
           {"bad_links", r.bad_links},
           {"bad_ridges", r.bad_ridges}};
  if (r.star_consistency_ok) out["star_consistency_ok"] = *r.star_consistency_ok;
  return out;
}

json consistency_json(const ConsistencyReport& r) {
  json mm = json::array();
  for (const StarMismatch& m : r.mismatches)
    mm.push_back({{"i", m.i}, {"j", m.j}, {"only_in_i", m.only_in_i}, {"only_in_j", m.only_in_j}});
  return {{"ok", r.ok()}, {"pairs_checked", r.pairs_checked}, {"mismatches", mm}};
}

json protection_json(const ProtectionSweep& s) {
  json f = json::array();
  for (const ProtectionFailure& p : s.failures)
    f.push_back({{"patch", p.patch},
                 {"simplex", p.simplex},
                 {"margin", num(p.margin)},
                 {"thickness", num(p.thickness)},
                 {"protected", p.protected_ok},
                 {"good", p.good_ok}});
  return {{"ok", s.ok()},
          {"checked", s.checked},
          {"min_margin_over_delta", num(s.min_margin_over_delta)},
          {"failures", f}};
}

json oracle_json(const OracleDiff& d) {
  return {{"empty", d.empty()}, {"only_in_complex", d.only_in_complex}, {"only_in_oracle", d.only_in_oracle}};
}

json metric_summary_json(const PLMetric& m) {
  double min_eig = std::numeric_limits<double>::infinity();
  for (const auto& [s, e] : m.min_gram_eigenvalue) min_eig = std::min(min_eig, e);
  json fb = json::array();
  for (const auto& [i, j] : m.fallback_edges) fb.push_back({i, j});
  return {{"edges", m.edge_lengths.size()},
          {"min_normalized_gram_eigenvalue", num(min_eig)},
          {"fallback_edges", fb}};
}

void write_json(const json& doc, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  out << doc.dump(2) << '\n';
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path);
}

LogLevel log_level() {
  const char* env = std::getenv("MANIDEL_LOG");
  if (!env) return LogLevel::Warn;
  std::string v(env);
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
  if (v == "error") return LogLevel::Error;
  if (v == "info") return LogLevel::Info;
  if (v == "debug") return LogLevel::Debug;
  return LogLevel::Warn;
}

void log(LogLevel level, const std::string& message) {
  static const LogLevel threshold = log_level();
  if (level > threshold) return;
  static const char* names[] = {"error", "warn", "info", "debug"};
  std::cerr << "[manidel " << names[static_cast<int>(level)] << "] " << message << '\n';
}

}  // namespace manidel
