#include "manidel/atlas.hpp"
#include "manidel/complex.hpp"
#include "manidel/perturbation.hpp"
#include "manidel/report.hpp"
#include "manidel/simplex.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

using namespace manidel;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Options {
  std::uint64_t seed = 1;
  std::optional<double> mu0, rho0, gamma0, alpha0, alpha_tilde0, delta0;
  bool certified = false;
  bool p2 = false;
  int jobs = 1;
  std::string out;
  std::string config;
  // generate
  std::string kind = "torus";
  int n = 200;
  double radius = 1.0;
  // run / verify / export
  std::string atlas_path;
  std::string complex_path;
  std::string format = "json";
  bool force = false;
  // lemmas
  std::vector<int> ks{2, 3};
  std::int64_t trials = 10000;
  double xi0 = 1e-6;
  std::int64_t hoop_trials = 1000;
};

// Flat-key JSON config; values apply only where the flag was not given.
void apply_config(CLI::App& app, Options& o) {
  if (o.config.empty()) return;
  std::ifstream in(o.config);
  if (!in) throw Error(ErrorKind::Io, "cannot read config " + o.config);
  json cfg;
  try {
    cfg = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Io, std::string("config JSON: ") + e.what());
  }
  auto given = [&](const std::string& flag) {
    if (auto* opt = app.get_option_no_throw("--" + flag); opt && opt->count() > 0) return true;
    for (CLI::App* sub : app.get_subcommands())
      if (auto* opt = sub->get_option_no_throw("--" + flag); opt && opt->count() > 0) return true;
    return false;
  };
  std::map<std::string, std::function<void(const json&)>> setters{
      {"seed", [&](const json& v) { o.seed = v.get<std::uint64_t>(); }},
      {"mu0", [&](const json& v) { o.mu0 = v.get<double>(); }},
      {"rho0", [&](const json& v) { o.rho0 = v.get<double>(); }},
      {"gamma0", [&](const json& v) { o.gamma0 = v.get<double>(); }},
      {"alpha0", [&](const json& v) { o.alpha0 = v.get<double>(); }},
      {"alpha-tilde0", [&](const json& v) { o.alpha_tilde0 = v.get<double>(); }},
      {"delta0", [&](const json& v) { o.delta0 = v.get<double>(); }},
      {"certified", [&](const json& v) { o.certified = v.get<bool>(); }},
      {"p2", [&](const json& v) { o.p2 = v.get<bool>(); }},
      {"jobs", [&](const json& v) { o.jobs = v.get<int>(); }},
      {"out", [&](const json& v) { o.out = v.get<std::string>(); }},
      {"n", [&](const json& v) { o.n = v.get<int>(); }},
      {"radius", [&](const json& v) { o.radius = v.get<double>(); }},
      {"trials", [&](const json& v) { o.trials = v.get<std::int64_t>(); }},
      {"xi0", [&](const json& v) { o.xi0 = v.get<double>(); }},
      {"hoop-trials", [&](const json& v) { o.hoop_trials = v.get<std::int64_t>(); }},
  };
  for (const auto& [key, value] : cfg.items()) {
    std::string flag = key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    const auto it = setters.find(flag);
    if (it == setters.end()) {
      log(LogLevel::Warn, "ignoring unknown config key " + key);
      continue;
    }
    if (!given(flag)) it->second(value);
  }
}

AlgorithmParams resolve_params(const Atlas& a, const Options& o) {
  const double mu0 = o.mu0.value_or(a.mu0);
  AlgorithmParams p;
  if (o.certified) {
    const double rho0 = o.rho0.value_or(default_rho0(mu0, a.xi0_declared, a.nu0));
    p = derive_params(a.m, mu0, rho0, a.xi0_declared, a.nu0);
  } else {
    ParamOverrides custom;
    custom.gamma0 = o.gamma0;
    custom.alpha0 = o.alpha0;
    custom.alpha_tilde0 = o.alpha_tilde0;
    custom.delta0 = o.delta0;
    p = practical_params(a.m, mu0, a.xi0_declared, a.nu0, o.rho0, custom);
  }
  p.seed = o.seed;
  p.p2_prune = o.p2;
  return p;
}

double max_eps(const Atlas& a) {
  double e = 0.0;
  for (const auto& [i, p] : a.patches) e = std::max(e, p.eps);
  return e;
}

fs::path out_dir(const Options& o, const std::string& fallback) {
  fs::path d = o.out.empty() ? fs::path(fallback) : fs::path(o.out);
  fs::create_directories(d);
  return d;
}

// Checks that need the atlas and its stars. Returns true when all pass.
bool verify_atlas(const Atlas& a, const AlgorithmParams& params, const AbstractComplex* given, int jobs,
                  json& rep, std::optional<AbstractComplex>* assembled = nullptr,
                  std::optional<PLMetric>* metric_out = nullptr) {
  bool ok = true;
  const auto scan = scan_all(a, params, jobs);
  rep["forbidden"] = {{"empty", scan.empty()}, {"configurations", forbidden_json(scan)}};
  ok = ok && scan.empty();
  log(LogLevel::Info, "forbidden scan: " + std::to_string(scan.size()) + " configurations");

  const StarMap stars = build_stars(a);
  const ConsistencyReport cons = check_star_consistency(stars, a.m);
  rep["star_consistency"] = consistency_json(cons);
  ok = ok && cons.ok();
  const ProtectionSweep sweep = protection_sweep(a, stars, params);
  rep["protection"] = protection_json(sweep);
  ok = ok && sweep.ok();

  std::optional<AbstractComplex> c;
  if (given) {
    c = *given;
  } else if (cons.ok()) {
    c = assemble(stars, a.m);
  } else {
    // Report what the union would look like even though assembly is refused.
    SimplexSet all;
    for (const auto& [i, st] : stars) all.insert(st.begin(), st.end());
    rep["union_of_stars_euler_characteristic"] = complex_from_simplices(a.m, all).euler_characteristic();
  }
  if (c) {
    ManifoldReport mr = manifold_check(*c);
    mr.star_consistency_ok = cons.ok();
    rep["manifold"] = manifold_json(mr);
    ok = ok && mr.ok();
    try {
      const PLMetric metric = assign_pl_metric(a, *c);
      rep["metric"] = metric_summary_json(metric);
      if (a.fixture && a.fixture->kind == "sphere") {
        const GeodesicCheck g = sphere_geodesic_check(a, metric);
        rep["geodesic"] = {{"max_relative_error", g.max_relative_error}, {"bound", g.bound}, {"ok", g.ok()}};
        ok = ok && g.ok();
      }
      if (metric_out) *metric_out = metric;
    } catch (const Error& e) {
      rep["metric"] = {{"error", e.what()}};
      ok = false;
    }
    if (a.fixture && a.fixture->kind == "torus" && a.m == 2) {
      const OracleDiff d = oracle_compare(*c, torus_delaunay_oracle(a));
      rep["torus_oracle"] = oracle_json(d);
      ok = ok && d.empty();
    }
  }
  if (assembled) *assembled = c;
  rep["ok"] = ok;
  return ok;
}

int cmd_generate(const Options& o) {
  const double mu0 = o.mu0.value_or(0.5);
  Atlas a = o.kind == "torus" ? build_flat_torus(o.n, mu0, o.seed)
                              : build_sphere_exp(o.n, o.radius, mu0, o.seed);
  const std::string path = o.out.empty() ? o.kind + ".atlas.json" : o.out;
  write_atlas(a, path);
  log(LogLevel::Info, "wrote " + path);
  std::cout << path << '\n';
  return 0;
}

int cmd_run(const Options& o) {
  Atlas a = read_atlas(o.atlas_path);
  const fs::path dir = out_dir(o, "manidel_out");
  json rep;
  ValidationOptions vo;
  vo.seed = o.seed;
  vo.jobs = o.jobs;
  const ValidationReport val = validate_input(a, vo);
  rep["validation"] = validation_json(val);
  if (!val.ok()) {
    log(LogLevel::Error, "input validation failed");
    rep["ok"] = false;
    write_json(rep, (dir / "report.json").string());
    return 1;
  }
  const AlgorithmParams params = resolve_params(a, o);
  if (o.certified) {
    // exp charts on a sphere of radius r distort by 6^3 eps^2 / r^2
    const bool sphere = a.fixture && a.fixture->kind == "sphere";
    const double xi_per_eps2 = sphere ? 216.0 / (a.fixture->radius * a.fixture->radius) : 0.0;
    require_certified(params, max_eps(a), a.tol, xi_per_eps2);
  }
  RunOptions ro;
  ro.scan_after = false;
  ro.jobs = o.jobs;
  const RunReport run = run_extended(a, params, ro);
  rep["run"] = run_report_json(run);
  std::optional<AbstractComplex> c;
  std::optional<PLMetric> metric;
  const bool ok = verify_atlas(a, params, nullptr, o.jobs, rep["verify"], &c, &metric);
  rep["ok"] = ok;
  write_atlas(a, (dir / "atlas_perturbed.json").string());
  if (c) {
    write_complex_json(*c, metric ? &*metric : nullptr, (dir / "complex.json").string());
    if (a.m <= 3) write_complex_off(*c, export_coordinates(a), (dir / "complex.off").string());
  }
  write_json(rep, (dir / "report.json").string());
  std::cout << (ok ? "PASS" : "FAIL") << ' ' << (dir / "report.json").string() << '\n';
  return ok ? 0 : 1;
}

int cmd_verify(const Options& o) {
  const Atlas a = read_atlas(o.atlas_path);
  const auto [c, metric] = read_complex_json(o.complex_path);
  const AlgorithmParams params = resolve_params(a, o);
  json rep;
  rep["params"] = params_json(params);
  const bool ok = verify_atlas(a, params, &c, o.jobs, rep);
  if (!metric.edge_lengths.empty()) {
    PLMetric m = metric;
    try {
      check_realizable(c, m);
      rep["stored_metric"] = metric_summary_json(m);
    } catch (const Error& e) {
      rep["stored_metric"] = {{"error", e.what()}};
    }
  }
  const fs::path dir = out_dir(o, "manidel_verify");
  write_json(rep, (dir / "verify.json").string());
  std::cout << (ok ? "PASS" : "FAIL") << ' ' << (dir / "verify.json").string() << '\n';
  return ok ? 0 : 1;
}

int cmd_lemmas(const Options& o) {
  json rep;
  bool ok = true;
  json lemma = json::array();
  for (int k : o.ks) {
    LemmaOptions lo;
    lo.k = k;
    lo.trials = o.trials;
    lo.xi0 = o.xi0;
    lo.seed = o.seed;
    const LemmaReport r = check_distortion_lemmas(lo);
    lemma.push_back(lemma_json(r));
    ok = ok && r.total_violations() == 0;
  }
  rep["distortion_lemmas"] = lemma;
  if (!o.atlas_path.empty()) {
    const Atlas a = read_atlas(o.atlas_path);
    const AlgorithmParams params = resolve_params(a, o);
    const HoopDistortionReport h = hoop_distortion_check(a, o.hoop_trials, params, o.seed);
    rep["hoop_distortion"] = hoop_json(h);
    rep["params"] = params_json(params);
    ok = ok && h.total_violations() == 0;
  }
  rep["ok"] = ok;
  const fs::path dir = out_dir(o, "manidel_lemmas");
  write_json(rep, (dir / "lemmas.json").string());
  std::cout << (ok ? "PASS" : "FAIL") << ' ' << (dir / "lemmas.json").string() << '\n';
  return ok ? 0 : 1;
}

int cmd_export(const Options& o) {
  const auto [c, metric] = read_complex_json(o.complex_path);
  if (!o.force) {
    const ManifoldReport mr = manifold_check(c);
    if (!mr.ok()) {
      log(LogLevel::Error, "complex fails the manifold check; pass --force to export anyway");
      return 1;
    }
  }
  const std::string path = o.out.empty() ? "complex." + o.format : o.out;
  if (o.format == "off") {
    if (o.atlas_path.empty()) throw Error(ErrorKind::InvalidInput, "OFF export needs --atlas for coordinates");
    write_complex_off(c, export_coordinates(read_atlas(o.atlas_path)), path);
  } else {
    write_complex_json(c, metric.edge_lengths.empty() ? nullptr : &metric, path);
  }
  std::cout << path << '\n';
  return 0;
}

void add_param_flags(CLI::App* sub, Options& o) {
  sub->add_option("--mu0", o.mu0, "separation ratio mu0");
  sub->add_option("--rho0", o.rho0, "perturbation radius ratio rho0");
  sub->add_option("--gamma0", o.gamma0, "thickness bound Gamma0 (overrides; non-certified)");
  sub->add_option("--alpha0", o.alpha0, "flat hoop constant alpha0 (override)");
  sub->add_option("--alpha-tilde0", o.alpha_tilde0, "hoop constant alpha~0 (override)");
  sub->add_option("--delta0", o.delta0, "protection ratio delta0 (override)");
  sub->add_flag("--certified", o.certified, "use the derived constants and refuse infeasible ones");
  sub->add_flag("--p2", o.p2, "keep only forbidden configurations whose facets have radius < 2 eps");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"manidel: Delaunay triangulation of manifolds from coordinate patches"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--seed", o.seed, "RNG seed")->capture_default_str();
  app.add_option("--jobs", o.jobs, "threads for verification sweeps")->capture_default_str();
  app.add_option("--out", o.out, "output file or directory");
  app.add_option("--config", o.config, "JSON config with flat keys; flags take precedence");

  auto* gen = app.add_subcommand("generate", "build a fixture atlas");
  gen->add_option("kind", o.kind, "torus or sphere")->required()->check(CLI::IsMember({"torus", "sphere"}));
  gen->add_option("--n", o.n, "number of points")->capture_default_str();
  gen->add_option("--radius", o.radius, "sphere radius")->capture_default_str();
  gen->add_option("--mu0", o.mu0, "separation ratio mu0");

  auto* run = app.add_subcommand("run", "perturb, assemble and certify");
  run->add_option("atlas", o.atlas_path, "atlas JSON")->required()->check(CLI::ExistingFile);
  add_param_flags(run, o);

  auto* ver = app.add_subcommand("verify", "re-check a complex against its atlas");
  ver->add_option("complex", o.complex_path, "complex JSON")->required()->check(CLI::ExistingFile);
  ver->add_option("atlas", o.atlas_path, "perturbed atlas JSON")->required()->check(CLI::ExistingFile);
  add_param_flags(ver, o);

  auto* lem = app.add_subcommand("lemmas", "property checks of the distortion inequalities");
  lem->add_option("--k", o.ks, "simplex dimensions")->capture_default_str();
  lem->add_option("--trials", o.trials, "trials per dimension")->capture_default_str();
  lem->add_option("--xi0", o.xi0, "distortion bound")->capture_default_str();
  lem->add_option("--atlas", o.atlas_path, "atlas for the hoop distortion check")->check(CLI::ExistingFile);
  lem->add_option("--hoop-trials", o.hoop_trials, "hoop distortion trials")->capture_default_str();
  add_param_flags(lem, o);

  auto* exp = app.add_subcommand("export", "write a complex as JSON or OFF");
  exp->add_option("complex", o.complex_path, "complex JSON")->required()->check(CLI::ExistingFile);
  exp->add_option("--format", o.format, "json or off")->check(CLI::IsMember({"json", "off"}));
  exp->add_option("--atlas", o.atlas_path, "atlas providing vertex coordinates")->check(CLI::ExistingFile);
  exp->add_flag("--force", o.force, "skip the manifold check");

  CLI11_PARSE(app, argc, argv);
  try {
    apply_config(app, o);
    if (gen->parsed()) return cmd_generate(o);
    if (run->parsed()) return cmd_run(o);
    if (ver->parsed()) return cmd_verify(o);
    if (lem->parsed()) return cmd_lemmas(o);
    if (exp->parsed()) return cmd_export(o);
  } catch (const Error& e) {
    log(LogLevel::Error, e.what());
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
