#include "manidel/perturbation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

namespace manidel {

bool AlgorithmParams::constraints_hold() const {
  return std::all_of(constraints.begin(), constraints.end(), [](const Constraint& c) { return c.ok; });
}

NetParams AlgorithmParams::perturbed(double eps) const {
  return perturbed_net_params(mu0, eps, rho_tilde0);
}

double AlgorithmParams::delta(double eps) const {
  const NetParams np = perturbed(eps);
  return delta0 * np.mu * np.eps;
}

double derivation_constant(int m, double mu0) {
  const double e = 4.0 * m * m + 5.0 * m + 21.0;
  return std::pow(static_cast<double>(m), 1.5) * std::pow(2.0 / mu0, e);
}

double default_rho0(double mu0, double xi0, double nu0) {
  return mu0 / (4.0 * (1.0 + nu0) * (1.0 + xi0));
}

namespace {

double alpha0_formula(double gamma0, double mu0) { return 0x1p13 * gamma0 / std::pow(mu0, 3); }

double alpha_tilde0_formula(int m, double gamma0, double mu0) {
  return 0x1p16 * std::pow(static_cast<double>(m), 1.5) * gamma0 / std::pow(mu0, 3);
}

void add(std::vector<Constraint>& out, std::string name, double lhs, double rhs) {
  out.push_back({std::move(name), lhs, rhs, lhs <= rhs});
}

}  // namespace

AlgorithmParams derive_params(int m, double mu0, double rho0, double xi0, double nu0,
                              const ParamOverrides& overrides) {
  if (m < 1 || m > 8) throw Error(ErrorKind::InfeasibleParams, "m must lie in [1, 8]");
  if (!(mu0 > 0.0 && mu0 <= 1.0)) throw Error(ErrorKind::InfeasibleParams, "mu0 must lie in (0, 1]");
  if (!(rho0 > 0.0))
    throw Error(ErrorKind::InfeasibleParams, "rho0 must be positive, otherwise Gamma0 = rho0/C = 0");
  if (xi0 < 0.0 || nu0 < 0.0) throw Error(ErrorKind::InfeasibleParams, "xi0 and nu0 must be >= 0");
  AlgorithmParams p;
  p.m = m;
  p.mu0 = mu0;
  p.rho0 = rho0;
  p.xi0 = xi0;
  p.nu0 = nu0;
  p.rho_tilde0 = (1.0 + nu0) * (1.0 + xi0) * rho0;
  if (p.rho_tilde0 > mu0 / 4.0 * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "rho~0 = " << p.rho_tilde0 << " exceeds mu0/4 = " << mu0 / 4.0;
    throw Error(ErrorKind::InfeasibleParams, msg.str());
  }
  p.C = derivation_constant(m, mu0);
  const double gamma_formula = rho0 / p.C;
  p.gamma0 = gamma_formula;
  if (overrides.gamma0) {
    p.gamma0 = *overrides.gamma0;
    p.overridden.push_back("gamma0");
  }
  if (!(p.gamma0 > 0.0))
    throw Error(ErrorKind::InfeasibleParams, "Gamma0 = rho0/C underflows to zero");
  p.delta0 = std::pow(p.gamma0, m + 1);
  if (overrides.delta0) {
    p.delta0 = *overrides.delta0;
    p.overridden.push_back("delta0");
  }
  p.alpha0 = alpha0_formula(p.gamma0, mu0);
  if (overrides.alpha0) {
    p.alpha0 = *overrides.alpha0;
    p.overridden.push_back("alpha0");
  }
  p.alpha_tilde0 = alpha_tilde0_formula(m, p.gamma0, mu0);
  if (overrides.alpha_tilde0) {
    p.alpha_tilde0 = *overrides.alpha_tilde0;
    p.overridden.push_back("alpha_tilde0");
  }

  // log-space so that the bound can underflow to zero without NaNs.
  const double xi_bound = std::exp((4.0 * m + 2.0) * std::log(gamma_formula) - std::log(16.0));
  add(p.constraints, "xi0 <= (rho0/C)^(4m+2) / 16", xi0, xi_bound);
  add(p.constraints, "nu0 <= (1 - xi0)/(1 + xi0)", nu0, (1.0 - xi0) / (1.0 + xi0));
  add(p.constraints, "rho~0 <= mu0/4", p.rho_tilde0, mu0 / 4.0);
  add(p.constraints, "delta0 <= Gamma0^(m+1)", p.delta0, std::pow(p.gamma0, m + 1));
  add(p.constraints, "Gamma0 <= 2 mu0^2 / 75", p.gamma0, 2.0 * mu0 * mu0 / 75.0);
  add(p.constraints, "xi0 <= (Gamma0^(2m+1) / 4)^2", xi0, std::pow(std::pow(p.gamma0, 2 * m + 1) / 4.0, 2));
  add(p.constraints, "xi0 <= Gamma0^(2m+1) mu0^2 / 2^12", xi0,
      std::pow(p.gamma0, 2 * m + 1) * mu0 * mu0 / 4096.0);
  return p;
}

AlgorithmParams practical_params(int m, double mu0, double xi0, double nu0, std::optional<double> rho0,
                                 const ParamOverrides& custom) {
  const double g = custom.gamma0.value_or(kPracticalGamma0);
  ParamOverrides ov;
  ov.gamma0 = g;
  ov.delta0 = custom.delta0.value_or(std::pow(g, m + 1));
  ov.alpha0 = custom.alpha0.value_or(alpha0_formula(g, mu0) * kPracticalAlphaScale);
  ov.alpha_tilde0 = custom.alpha_tilde0.value_or(alpha_tilde0_formula(m, g, mu0) * kPracticalAlphaScale);
  return derive_params(m, mu0, rho0.value_or(default_rho0(mu0, xi0, nu0)), xi0, nu0, ov);
}

void require_certified(const AlgorithmParams& p, double eps, const Tolerances& tol, double xi_per_eps2) {
  std::ostringstream msg;
  bool bad = false;
  if (!p.certified()) {
    msg << "overridden parameters:";
    for (const auto& o : p.overridden) msg << ' ' << o;
    msg << "; ";
    bad = true;
  }
  for (const auto& c : p.constraints) {
    if (c.ok) continue;
    msg << c.name << " fails (" << c.lhs << " > " << c.rhs << "); ";
    bad = true;
  }
  const NetParams np = p.perturbed(eps);
  const double delta = p.delta(eps);
  const double resolution = tol.ball * np.eps;
  if (!(delta > resolution)) {
    msg << "delta = " << delta << " is below the empty-ball resolution " << resolution
        << " of a patch with eps = " << eps << " (delta/eps = " << delta / eps
        << " does not depend on eps, so no sampling density fixes this); ";
    bad = true;
  }
  if (xi_per_eps2 > 0.0) {
    const double m = p.m;
    const double log_g = std::log(p.gamma0);
    const double log_xi = std::min({(4.0 * m + 2.0) * std::log(p.rho0 / p.C) - std::log(16.0),
                                    2.0 * ((2.0 * m + 1.0) * log_g - std::log(4.0)),
                                    (2.0 * m + 1.0) * log_g + 2.0 * std::log(p.mu0) - 12.0 * std::log(2.0)});
    const double log_eps = 0.5 * (log_xi - std::log(xi_per_eps2));
    if (std::log(eps) > log_eps) {
      msg << "distortion xi0 = " << xi_per_eps2 * eps * eps << " at eps = " << eps
          << " needs eps <= 10^" << log_eps / std::log(10.0) << "; ";
      bad = true;
    }
  }
  const double shell = 2.0 * p.alpha_tilde0 * eps;
  if (!(shell > std::numeric_limits<double>::epsilon() * eps)) {
    msg << "shell width 2 alpha~0 eps = " << shell << " is below double precision; ";
    bad = true;
  }
  if (bad) throw Error(ErrorKind::InfeasibleParams, "certified mode refused: " + msg.str());
}

// ---- S_i and the circumsphere shells ----

namespace {

std::vector<Label> labels_near(const Patch& p, Label exclude, const Point& centre, double r) {
  std::vector<Label> out;
  for (const auto& [l, x] : p.points)
    if (l != exclude && (x - centre).norm() <= r) out.push_back(l);
  return out;
}

double neighborhood_radius(double mu0, double eps) { return (5.0 + 1.5 * mu0) * eps; }

// Circumball of an m-simplex in R^m from the square system P^T c = b.
template <int M>
bool square_ball(const std::vector<const Point*>& v, double rank_tol, Point& centre, double& radius) {
  Eigen::Matrix<double, M, M> p;
  Eigen::Matrix<double, M, 1> b;
  double diam2 = 0.0;
  for (int k = 1; k <= M; ++k) {
    p.col(k - 1) = (*v[k] - *v[0]);
    b[k - 1] = 0.5 * p.col(k - 1).squaredNorm();
    diam2 = std::max(diam2, p.col(k - 1).squaredNorm());
  }
  for (int a = 1; a <= M; ++a)
    for (int c = a + 1; c <= M; ++c) diam2 = std::max(diam2, (*v[a] - *v[c]).squaredNorm());
  const double det = p.determinant();
  if (!(std::abs(det) > rank_tol * std::pow(diam2, 0.5 * M))) return false;
  const Eigen::Matrix<double, M, 1> c = p.transpose().partialPivLu().solve(b);
  centre = *v[0] + c;
  radius = c.norm();
  return true;
}

bool fast_ball(const std::vector<const Point*>& v, const Tolerances& tol, Point& centre, double& radius) {
  const int m = static_cast<int>(v[0]->size());
  if (m == 2) return square_ball<2>(v, tol.rank, centre, radius);
  if (m == 3) return square_ball<3>(v, tol.rank, centre, radius);
  Simplex s;
  for (std::size_t k = 0; k < v.size(); ++k) {
    s.labels.push_back(static_cast<Label>(k));
    s.points.push_back(*v[k]);
  }
  try {
    const CircumBall b = circumcenter_radius(s, tol);
    centre = b.center;
    radius = b.radius;
    return true;
  } catch (const Error&) {
    return false;
  }
}

}  // namespace

std::vector<SimplexKey> neighborhood_complex(const Patch& p, Label i, double mu0, const Point& centre) {
  const std::vector<Label> near = labels_near(p, i, centre, neighborhood_radius(mu0, p.eps));
  std::vector<SimplexKey> out;
  const std::size_t m = static_cast<std::size_t>(p.dim());
  for_each_combination(near.size(), m + 1, [&](const std::vector<std::size_t>& idx) {
    SimplexKey k;
    for (std::size_t t : idx) k.push_back(near[t]);
    out.push_back(std::move(k));
  });
  return out;
}

std::vector<SimplexKey> neighborhood_complex(const Atlas& a, Label i) {
  const Patch& p = a.patch(i);
  return neighborhood_complex(p, i, a.mu0, p.origin);
}

ShellSet::ShellSet(const Patch& p, const std::vector<SimplexKey>& simplices, double threshold,
                   const Tolerances& tol)
    : simplices_(simplices), threshold_(threshold) {
  std::vector<const Point*> v;
  Point c;
  double r = 0.0;
  for (std::size_t s = 0; s < simplices_.size(); ++s) {
    v.clear();
    for (Label l : simplices_[s]) v.push_back(&p.at(l));
    if (fast_ball(v, tol, c, r)) shells_.push_back({c, r, s});
  }
}

ShellSet::ShellSet(const Patch& p, const std::vector<Label>& labels, double threshold, const Ball& reach,
                   const Tolerances& tol)
    : threshold_(threshold) {
  const std::size_t m = static_cast<std::size_t>(p.dim());
  std::vector<const Point*> pts;
  for (Label l : labels) pts.push_back(&p.at(l));
  std::vector<const Point*> v(m + 1);
  Point c;
  double r = 0.0;
  for_each_combination(labels.size(), m + 1, [&](const std::vector<std::size_t>& idx) {
    for (std::size_t k = 0; k <= m; ++k) v[k] = pts[idx[k]];
    if (!fast_ball(v, tol, c, r)) return;
    if (std::abs((reach.center - c).norm() - r) > reach.radius + threshold_) return;
    SimplexKey key;
    for (std::size_t t : idx) key.push_back(labels[t]);
    shells_.push_back({c, r, simplices_.size()});
    simplices_.push_back(std::move(key));
  });
}

void ShellSet::restrict_to(const Point& centre, double reach) {
  std::erase_if(shells_, [&](const Shell& sh) {
    return std::abs((centre - sh.center).norm() - sh.radius) > reach + threshold_;
  });
}

GoodPerturbation ShellSet::test(const Point& x) const {
  for (const Shell& sh : shells_) {
    const double d = std::abs((x - sh.center).norm() - sh.radius);
    if (d <= threshold_) return {false, Rejection{simplices_[sh.simplex], d}};
  }
  return {};
}

GoodPerturbation is_good_perturbation(const Atlas& a, Label i, const Point& x,
                                      const AlgorithmParams& params) {
  const Patch& p = a.patch(i);
  ShellSet shells(p, neighborhood_complex(a, i), 2.0 * params.alpha_tilde0 * p.eps, a.tol);
  return shells.test(x);
}

namespace {

// Shared loop of both algorithms: draw in B(centre, rho0 eps) until good.
Point draw_good(const ShellSet& shells, const Point& centre, double radius, std::int64_t max_attempts,
                Rng& rng, std::int64_t& attempts, Label label) {
  GoodPerturbation last;
  for (attempts = 1; attempts <= max_attempts; ++attempts) {
    Point x = rng.in_ball(centre, radius);
    last = shells.test(x);
    if (last.good) return x;
  }
  std::ostringstream msg;
  msg << "no good perturbation for label " << label << " after " << max_attempts << " attempts";
  if (last.witness) {
    msg << "; last shell from simplex {";
    for (std::size_t k = 0; k < last.witness->simplex.size(); ++k)
      msg << (k ? "," : "") << last.witness->simplex[k];
    msg << "} at distance " << last.witness->distance << " <= " << shells.threshold();
  }
  attempts = max_attempts;
  throw Error(ErrorKind::AttemptsExhausted, msg.str());
}

}  // namespace

PerturbOutcome perturb_point(Atlas& a, Label i, const AlgorithmParams& params, Rng& rng) {
  const Patch& p = a.patch(i);
  const Point centre = p.origin;
  const double eps = p.eps;
  const ShellSet shells(p, labels_near(p, i, centre, neighborhood_radius(a.mu0, eps)),
                        2.0 * params.alpha_tilde0 * eps, Ball{centre, params.rho0 * eps}, a.tol);
  PerturbOutcome out;
  out.shells = shells.size();
  out.x = draw_good(shells, centre, params.rho0 * eps, params.max_attempts, rng, out.attempts, i);
  propagate_point(a, i, out.x);
  return out;
}

namespace {

void summarise(RunReport& rep) {
  double total = 0.0;
  for (const auto& [l, n] : rep.attempts) {
    total += static_cast<double>(n);
    rep.max_attempts_used = std::max(rep.max_attempts_used, n);
  }
  rep.mean_attempts = rep.attempts.empty() ? 0.0 : total / static_cast<double>(rep.attempts.size());
}

}  // namespace

RunReport run_extended(Atlas& a, const AlgorithmParams& params, const RunOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  RunReport rep;
  rep.params = params;
  for (Label i : a.labels()) {
    Rng rng(mix_seed(params.seed, static_cast<std::uint64_t>(i)));
    const Point before = a.patch(i).origin;
    const PerturbOutcome out = perturb_point(a, i, params, rng);
    rep.attempts.emplace_back(i, out.attempts);
    rep.displacement.emplace_back(i, (out.x - before).norm() / a.patch(i).eps);
  }
  for (const auto& [i, p] : a.patches) rep.delta.emplace_back(i, params.delta(p.eps));
  summarise(rep);
  if (opts.scan_after) {
    rep.scan = scan_all(a, params, opts.jobs);
    rep.scan_run = true;
  }
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

RunReport run_flat(Patch& p, const Ball& region, const AlgorithmParams& params, const RunOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  RunReport rep;
  rep.params = params;
  const std::map<Label, Point> original = p.points;
  const double eps = p.eps;
  const Tolerances tol{};
  for (const auto& [l, centre] : original) {
    Rng rng(mix_seed(params.seed, static_cast<std::uint64_t>(l)));
    const ShellSet shells(p, labels_near(p, l, centre, neighborhood_radius(params.mu0, eps)),
                          2.0 * params.alpha0 * eps, Ball{centre, params.rho0 * eps}, tol);
    std::int64_t attempts = 0;
    const Point x = draw_good(shells, centre, params.rho0 * eps, params.max_attempts, rng, attempts, l);
    p.points[l] = x;
    rep.attempts.emplace_back(l, attempts);
    rep.displacement.emplace_back(l, (x - centre).norm() / eps);
  }
  const NetParams np = perturbed_net_params(params.mu0, eps, params.rho0);
  const double delta = params.delta0 * np.mu * np.eps;
  rep.delta.emplace_back(p.id, delta);
  summarise(rep);
  if (opts.scan_after) {
    ScanOptions so;
    so.p2_prune = params.p2_prune;
    so.diameter_bound = 2.5 * (1.0 + 0.5 * params.delta0 * params.mu0) * np.eps;
    rep.scan = forbidden_scan(p, region, np.eps, delta, params.gamma0, so);
    for (auto& f : rep.scan) f.patch_id = p.id;
    rep.scan_run = true;
  }
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

// ---- hoop property ----

bool hoop_check(const Simplex& s, double alpha, const Tolerances& tol) {
  if (s.dim() < 1) return false;
  for (std::size_t v = 0; v < s.size(); ++v) {
    const Simplex facet = s.without(v);
    if (facet.dim() >= 1 && is_degenerate(facet, tol)) return false;
    const CircumBall ball = circumcenter_radius(facet, tol);
    const double d = distance_to_circumsphere(s.points[v], facet, tol);
    if (d > alpha * ball.radius + tol.lin * longest_edge(s)) return false;
  }
  return true;
}

namespace {

// Random k-simplex inscribed in a (k-1)-sphere of radius r about c inside a
// random k-flat of R^m.
Simplex inscribed_simplex(Rng& rng, const Point& c, double r, int k, Eigen::MatrixXd& basis) {
  const int m = static_cast<int>(c.size());
  Eigen::MatrixXd g(m, k);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < k; ++b) g(a, b) = rng.normal();
  basis = g.householderQr().householderQ() * Eigen::MatrixXd::Identity(m, k);
  std::vector<Point> pts;
  for (int v = 0; v <= k; ++v) {
    Point u = k == 1 ? Point::Constant(1, v == 0 ? 1.0 : -1.0) : rng.unit_vector(k);
    pts.push_back(c + r * basis * u);
  }
  return Simplex::from_points(std::move(pts));
}

}  // namespace

HoopDistortionReport hoop_distortion_check(const Atlas& a, std::int64_t trials,
                                           const AlgorithmParams& params, std::uint64_t seed) {
  HoopDistortionReport rep;
  rep.trials = trials;
  const int m = a.m;
  const double xi0 = a.xi0_declared;
  const double g = params.gamma0;
  rep.report_only = !(xi0 <= std::pow(std::pow(g, 2 * m + 1) / 4.0, 2));
  Rng rng(mix_seed(seed, 0x4009));
  const std::vector<Label> labels = a.labels();
  if (labels.empty()) return rep;
  constexpr double kSlack = 1e-9;

  for (std::int64_t t = 0; t < trials; ++t) {
    const Label i = labels[rng.index(labels.size())];
    const Patch& pi = a.patch(i);
    std::vector<Label> near;
    for (const auto& [j, xj] : pi.points)
      if (j != i && a.has_transition(i, j) && (xj - pi.origin).norm() <= 6.0 * pi.eps) near.push_back(j);
    if (near.empty()) {
      ++rep.skipped;
      continue;
    }
    const Label j = near[rng.index(near.size())];
    const Transition& tr = a.transition(i, j);
    const Patch& pj = a.patch(j);
    const int k = 1 + static_cast<int>(rng.index(static_cast<std::size_t>(m)));

    // Good facet sigma with R < 2 eps_i inside Q'_i, and a vertex on the
    // alpha0-hoop of its circumsphere.
    const double r = pi.eps * rng.uniform(0.5, 2.0) * (1.0 - 1e-9);
    const Point c = rng.in_ball(pi.origin, std::max(0.0, 6.0 * pi.eps - 2.0 * r));
    Eigen::MatrixXd basis;
    const Simplex sigma = inscribed_simplex(rng, c, r, k, basis);
    if (is_degenerate(sigma) || !is_gamma_good(sigma, g)) {
      ++rep.skipped;
      continue;
    }
    const Point on_sphere =
        c + r * basis * (k == 1 ? Point::Constant(1, rng.uniform() < 0.5 ? 1.0 : -1.0) : rng.unit_vector(k));
    const Point p = on_sphere + params.alpha0 * r * rng.uniform() * rng.unit_vector(m);

    if (!(xi0 <= std::pow(std::pow(g, k) / 4.0, 2))) {
      ++rep.skipped;
      continue;
    }
    bool inside = tr.in_domain(p);
    for (const Point& v : sigma.points) inside = inside && tr.in_domain(v);
    if (!inside) {
      ++rep.skipped;
      continue;
    }
    Simplex mapped = sigma;
    try {
      for (Point& v : mapped.points) v = tr.fn->forward(v);
    } catch (const Error&) {
      ++rep.skipped;
      continue;
    }
    const Point pm = tr.fn->forward(p);
    ++rep.checked;

    const double kk = static_cast<double>(k);
    const double thick_bound = 2.0 / (5.0 * std::sqrt(kk)) * std::pow(g, k);
    if (thickness(mapped) < thick_bound * (1.0 - kSlack)) ++rep.thickness_violations;

    const double r_bound =
        2.0 * (1.0 + 16.0 * std::pow(kk, 1.5) * xi0 / std::pow(g, 3 * k)) * (1.0 + a.nu0) * pj.eps;
    double r_mapped = std::numeric_limits<double>::infinity();
    try {
      r_mapped = circumcenter_radius(mapped).radius;
    } catch (const Error&) {
    }
    rep.worst_radius_ratio = std::max(rep.worst_radius_ratio, r_mapped / r_bound);
    if (r_mapped > r_bound * (1.0 + kSlack)) ++rep.radius_violations;

    const double alpha_raw =
        (params.alpha0 * (1.0 + xi0) + 12.0 * std::pow(kk, 1.5) * std::sqrt(xi0) / std::pow(g, 2 * k)) *
        (1.0 + a.nu0);
    const double d_bound = 2.0 * alpha_raw * pj.eps;
    double d = std::numeric_limits<double>::infinity();
    try {
      d = distance_to_diametric_sphere(pm, mapped);
    } catch (const Error&) {
    }
    rep.worst_distance_ratio = std::max(rep.worst_distance_ratio, d / d_bound);
    if (d > d_bound * (1.0 + kSlack) + 1e-15 * pj.eps) ++rep.distance_violations;
  }
  return rep;
}

}  // namespace manidel
