#include "manidel/atlas.hpp"
#include "manidel/random.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <set>
#include <thread>

namespace manidel {

Rigid::Rigid(Eigen::MatrixXd rotation, Point shift)
    : rotation_(std::move(rotation)), shift_(std::move(shift)) {
  const Eigen::Index m = rotation_.rows();
  if (rotation_.cols() != m || shift_.size() != m)
    throw Error(ErrorKind::InvalidInput, "rigid transition shape mismatch");
  const double err = (rotation_.transpose() * rotation_ - Eigen::MatrixXd::Identity(m, m)).norm();
  if (err > 1e-9) throw Error(ErrorKind::InvalidInput, "rigid transition is not orthogonal");
}

Tabulated::Tabulated(std::vector<Point> from, std::vector<Point> to)
    : from_(std::move(from)), to_(std::move(to)) {
  if (from_.empty() || from_.size() != to_.size())
    throw Error(ErrorKind::InvalidInput, "tabulated transition needs matched, non-empty pairs");
}

Point Tabulated::displacement(const Point& x) const {
  Point num = Point::Zero(x.size());
  double den = 0.0;
  for (std::size_t k = 0; k < from_.size(); ++k) {
    const double d2 = (x - from_[k]).squaredNorm();
    if (d2 == 0.0) return to_[k] - from_[k];
    const double w = 1.0 / d2;
    num += w * (to_[k] - from_[k]);
    den += w;
  }
  return num / den;
}

Point Tabulated::forward(const Point& x) const { return x + displacement(x); }

Point Tabulated::inverse(const Point& y) const {
  Point x = y - displacement(y);
  for (int it = 0; it < 200; ++it) {
    const Point next = y - displacement(x);
    const double step = (next - x).norm();
    x = next;
    if (step <= 1e-15 * (1.0 + y.norm())) break;
  }
  return x;
}

Eigen::Vector3d sphere_exp(const SphereFrame& f, double radius, const Point& u) {
  const double r = u.norm();
  const Eigen::Vector3d c = f.col(0);
  if (r == 0.0) return radius * c;
  const Eigen::Vector3d dir = (u[0] * f.col(1) + u[1] * f.col(2)) / r;
  const double theta = r / radius;
  return radius * (std::cos(theta) * c + std::sin(theta) * dir);
}

Point sphere_log(const SphereFrame& f, double radius, const Eigen::Vector3d& x) {
  const Eigen::Vector3d unit = x.normalized();
  const Eigen::Vector3d c = f.col(0);
  const double a = unit.dot(f.col(1));
  const double b = unit.dot(f.col(2));
  const double s = std::hypot(a, b);
  const double theta = std::atan2(s, unit.dot(c));
  if (theta > M_PI - 1e-9) throw Error(ErrorKind::OutOfDomain, "antipode of an exponential chart");
  Point u(2);
  if (s == 0.0) {
    u.setZero();
  } else {
    u << a / s, b / s;
    u *= radius * theta;
  }
  return u;
}

bool Transition::in_domain(const Point& x, double slack) const {
  return std::all_of(domain.begin(), domain.end(),
                     [&](const Ball& b) { return b.contains(x, slack); });
}

std::vector<Label> Atlas::labels() const {
  std::vector<Label> out;
  for (const auto& kv : patches) out.push_back(kv.first);
  return out;
}

Patch& Atlas::patch(Label i) {
  auto it = patches.find(i);
  if (it == patches.end()) throw Error(ErrorKind::UnknownLabel, "no patch " + std::to_string(i));
  return it->second;
}

const Patch& Atlas::patch(Label i) const {
  auto it = patches.find(i);
  if (it == patches.end()) throw Error(ErrorKind::UnknownLabel, "no patch " + std::to_string(i));
  return it->second;
}

std::vector<Label> Atlas::neighbors(Label i) const {
  std::vector<Label> out;
  for (const auto& kv : patch(i).points)
    if (kv.first != i) out.push_back(kv.first);
  return out;
}

const Transition& Atlas::transition(Label i, Label j) const {
  auto it = transitions.find({i, j});
  if (it == transitions.end())
    throw Error(ErrorKind::UnknownLabel,
                "no transition " + std::to_string(i) + "->" + std::to_string(j));
  return it->second;
}

Eigen::VectorXd Atlas::embed(Label l) const {
  if (!fixture) throw Error(ErrorKind::InvalidInput, "atlas has no built-in embedding");
  if (fixture->kind == "torus") {
    Eigen::VectorXd x = own(l);
    for (Eigen::Index d = 0; d < x.size(); ++d) x[d] -= std::floor(x[d]);
    return x;
  }
  if (fixture->kind == "sphere") return sphere_exp(fixture->frames.at(l), fixture->radius, own(l));
  throw Error(ErrorKind::InvalidInput, "unknown fixture kind " + fixture->kind);
}

namespace {

// Rejection sample from the intersection of balls, drawing from the first.
std::optional<Point> sample_in(const std::vector<Ball>& balls, Rng& rng, int tries = 200) {
  for (int t = 0; t < tries; ++t) {
    Point x = rng.in_ball(balls[0].center, balls[0].radius);
    bool ok = true;
    for (std::size_t b = 1; b < balls.size() && ok; ++b) ok = balls[b].contains(x);
    if (ok) return x;
  }
  return std::nullopt;
}

// The region on which the distortion bound constrains phi_ij, intersected with U_ij.
std::vector<Ball> required_region(const Atlas& a, Label i, Label j, const Transition& t) {
  const Patch& pi = a.patch(i);
  std::vector<Ball> balls{{pi.origin, 6.0 * pi.eps}};
  if (pi.contains(j)) balls.push_back({pi.at(j), 9.0 * pi.eps});
  for (const Ball& b : t.domain) balls.push_back(b);
  return balls;
}

}  // namespace

double estimate_distortion(const Atlas& a, Label i, Label j, const DistortionOptions& opts) {
  const Transition& t = a.transition(i, j);
  const std::vector<Ball> region = required_region(a, i, j, t);
  Rng rng(mix_seed(opts.seed, static_cast<std::uint64_t>(i) * 1000003ULL + static_cast<std::uint64_t>(j)));
  double worst = 0.0;
  for (int s = 0; s < opts.samples; ++s) {
    auto x = sample_in(region, rng);
    auto y = sample_in(region, rng);
    if (!x || !y) break;
    const double di = (*x - *y).norm();
    if (di <= 1e-12 * a.patch(i).eps) continue;
    const double dj = (t.fn->forward(*x) - t.fn->forward(*y)).norm();
    worst = std::max(worst, std::abs(di - dj) / di);
  }
  return worst;
}

bool ValidationReport::ok() const {
  return std::none_of(issues.begin(), issues.end(), [](const auto& v) { return !v.warning; });
}

int ValidationReport::failures(const std::string& check) const {
  return static_cast<int>(std::count_if(issues.begin(), issues.end(), [&](const auto& v) {
    return !v.warning && v.check == check;
  }));
}

namespace {

Point sphere_point(Rng& rng, const Ball& b) { return b.center + b.radius * rng.unit_vector(static_cast<int>(b.center.size())); }

// Largest excursion of (A ∩ B) outside the balls of `domain`, from samples of
// the boundary of A ∩ B; the farthest point of a convex set from a ball
// centre lies on its boundary.
double coverage_gap(const Ball& a, const Ball& b, const std::vector<Ball>& domain, int samples,
                    Rng& rng) {
  auto inside = [](const Ball& x, const Ball& d) { return (x.center - d.center).norm() + x.radius <= d.radius; };
  if (std::all_of(domain.begin(), domain.end(), [&](const Ball& d) { return inside(a, d) || inside(b, d); }))
    return 0.0;
  double gap = 0.0;
  for (const Ball* face : {&a, &b}) {
    const Ball& other = face == &a ? b : a;
    for (int s = 0; s < samples; ++s) {
      const Point x = sphere_point(rng, *face);
      if (!other.contains(x)) continue;
      for (const Ball& d : domain) gap = std::max(gap, (x - d.center).norm() - d.radius);
    }
  }
  return gap;
}

}  // namespace

namespace {

struct PatchFindings {
  std::vector<ValidationIssue> issues;
  int transitions_checked = 0;
  int clipped_nets = 0;
  int clipped_domains = 0;
  double max_distortion = 0.0;
};

PatchFindings validate_patch(const Atlas& a, Label i, const Patch& pi, const ValidationOptions& opts) {
  PatchFindings out;
  auto fail = [&](std::string check, Label fi, Label fj, double mag, std::string detail) {
    out.issues.push_back({std::move(check), fi, fj, mag, false, std::move(detail)});
  };
  Rng rng(mix_seed(mix_seed(opts.seed, 0x7a11a5), static_cast<std::uint64_t>(i)));
  if (pi.dim() != a.m) {
    fail("dimension", i, -1, pi.dim(), "patch dimension differs from m");
    return out;
  }
  if (!pi.contains(i)) {
    fail("centre", i, -1, 0.0, "patch does not hold its own centre");
    return out;
  }

  // Net condition on B(p_i, 8 eps_i), clipped to the injective part of the chart.
  double net_radius = 8.0 * pi.eps;
  if (net_radius > pi.chart_radius - pi.eps) {
    net_radius = pi.chart_radius - pi.eps;
    ++out.clipped_nets;
  }
  const NetCertificate cert =
      certify_net(pi, {pi.origin, net_radius}, a.mu0, pi.eps, opts.grid_fraction * pi.eps);
  if (!cert.dense_ok)
    fail("net_density", i, -1, cert.worst_uncovered / pi.eps, "uncovered point in B(p_i, 8 eps_i)");
  if (!cert.separated_ok) fail("net_separation", i, -1, cert.mu, "separation below mu0 eps_i");

  // Labels the algorithm moves through transitions out of this chart.
  std::vector<std::pair<Label, const Point*>> movable;
  for (const auto& [l, xl] : pi.points)
    if ((xl - pi.origin).norm() <= 6.0 * pi.eps) movable.emplace_back(l, &xl);

  for (const auto& [j, xj] : pi.points) {
    if (j == i) continue;
    if (!a.patches.count(j)) {
      fail("unknown_label", i, j, 0.0, "neighbour without a patch");
      continue;
    }
    const Patch& pj = a.patch(j);
    if (!pj.contains(i)) fail("neighbor_symmetry", i, j, 0.0, "j in N_i but i not in N_j");

    const double dij = (xj - pi.origin).norm();
    if (dij <= 6.0 * pi.eps) {
      const double diff = std::abs(pi.eps - pj.eps);
      const double bound = a.nu0 * std::min(pi.eps, pj.eps);
      if (diff > bound * (1.0 + 1e-12) + 1e-15)
        fail("eps_ratio", i, j, diff / std::min(pi.eps, pj.eps), "|eps_i - eps_j| > nu0 min");
    }

    auto tit = a.transitions.find({i, j});
    if (tit == a.transitions.end()) {
      if (dij <= 6.0 * pi.eps) fail("missing_transition", i, j, dij / pi.eps, "p_j in B(p_i, 6 eps_i)");
      continue;
    }
    const Transition& t = tit->second;
    ++out.transitions_checked;
    const double slack = a.tol.trans * pi.eps;

    // B(p_i, 6 eps_i) ∩ B(p_j, 9 eps_i) ⊆ U_ij.
    if (dij <= 15.0 * pi.eps) {
      double r9 = 9.0 * pi.eps;
      if (r9 > pi.chart_radius) {
        r9 = pi.chart_radius;
        ++out.clipped_domains;
      }
      const double gap =
          coverage_gap({pi.origin, 6.0 * pi.eps}, {xj, r9}, t.domain, opts.boundary_samples, rng);
      if (gap > slack) fail("transition_domain", i, j, gap / pi.eps, "required region leaves U_ij");
    }

    // phi_ij o psi_i = psi_j, and P_j holds every label it should.
    for (const auto& [l, xl] : movable) {
      if (!t.in_domain(*xl, slack)) continue;
      Point yl;
      try {
        yl = t.fn->forward(*xl);
      } catch (const Error&) {
        fail("compatibility", i, j, 0.0, "label " + std::to_string(l) + " has no image");
        continue;
      }
      if (pj.contains(l)) {
        const double err = (yl - pj.at(l)).norm();
        if (err > slack)
          fail("compatibility", i, j, err / pi.eps, "label " + std::to_string(l) + " disagrees across charts");
      } else if ((yl - pj.origin).norm() < std::min(8.0 * pj.eps, pj.chart_radius - pj.eps)) {
        fail("compatibility", i, j, 0.0, "label " + std::to_string(l) + " missing from patch " + std::to_string(j));
      }
    }

    // Round trip on the required region.
    const std::vector<Ball> region = required_region(a, i, j, t);
    double round_trip = 0.0;
    for (int s = 0; s < 8; ++s) {
      auto x = sample_in(region, rng);
      if (!x) break;
      round_trip = std::max(round_trip, (t.fn->inverse(t.fn->forward(*x)) - *x).norm());
    }
    if (round_trip > slack) fail("round_trip", i, j, round_trip / pi.eps, "inverse o forward != id");

    if (opts.check_distortion && dij <= 6.0 * pi.eps) {
      const double xi = estimate_distortion(a, i, j, {opts.distortion_samples, mix_seed(opts.seed, 0xd157)});
      out.max_distortion = std::max(out.max_distortion, xi);
      if (xi > a.xi0_declared * (1.0 + 1e-9) + 1e-12)
        fail("distortion", i, j, xi, "sampled distortion exceeds declared xi0");
    }
  }
  return out;
}

}  // namespace

ValidationReport validate_input(const Atlas& a, const ValidationOptions& opts) {
  std::vector<std::pair<Label, const Patch*>> patches;
  for (const auto& [i, p] : a.patches) patches.emplace_back(i, &p);
  std::vector<PatchFindings> found(patches.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < patches.size(); t = next++)
      found[t] = validate_patch(a, patches[t].first, *patches[t].second, opts);
  };
  const int threads = std::max(1, std::min<int>(opts.jobs, static_cast<int>(patches.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  ValidationReport rep;
  int clipped_nets = 0, clipped_domains = 0;
  for (PatchFindings& f : found) {
    ++rep.patches_checked;
    rep.transitions_checked += f.transitions_checked;
    rep.max_distortion = std::max(rep.max_distortion, f.max_distortion);
    clipped_nets += f.clipped_nets;
    clipped_domains += f.clipped_domains;
    for (auto& issue : f.issues) rep.issues.push_back(std::move(issue));
  }
  if (clipped_nets > 0)
    rep.issues.push_back({"net_domain_clipped", -1, -1, static_cast<double>(clipped_nets), true,
                          "net checked on B(p_i, chart_radius - eps_i) where 8 eps_i exceeds the chart"});
  if (clipped_domains > 0)
    rep.issues.push_back({"transition_domain_clipped", -1, -1, static_cast<double>(clipped_domains), true,
                          "B(p_j, 9 eps_i) clipped to the chart radius"});
  return rep;
}

std::vector<PointUpdate> propagate_point(Atlas& a, Label i, const Point& x) {
  Patch& pi = a.patch(i);
  if (x.size() != pi.dim()) throw Error(ErrorKind::InvalidInput, "point dimension mismatch");
  std::vector<PointUpdate> updates{{i, x}};
  for (const auto& [j, pj] : a.patches) {
    if (j == i || !pj.contains(i)) continue;
    auto tit = a.transitions.find({i, j});
    if (tit == a.transitions.end())
      throw Error(ErrorKind::OutOfDomain,
                  "no transition " + std::to_string(i) + "->" + std::to_string(j));
    if (!tit->second.in_domain(x, a.tol.trans * pi.eps))
      throw Error(ErrorKind::OutOfDomain,
                  "point leaves U_" + std::to_string(i) + "," + std::to_string(j));
    updates.push_back({j, tit->second.fn->forward(x)});
  }
  for (const auto& u : updates) a.patch(u.patch).points[i] = u.coords;
  return updates;
}

Atlas planar_atlas(const std::map<Label, Point>& points, double eps, double mu0) {
  if (points.empty()) throw Error(ErrorKind::InvalidInput, "empty point set");
  Atlas a;
  a.m = static_cast<int>(points.begin()->second.size());
  a.mu0 = mu0;
  auto identity = std::make_shared<Translation>(Point::Zero(a.m));
  for (const auto& [l, x] : points) {
    Patch p;
    p.id = l;
    p.eps = eps;
    p.origin = x;
    p.points = points;
    a.patches.emplace(l, std::move(p));
  }
  for (const auto& kv1 : points)
    for (const auto& kv2 : points)
      if (kv1.first != kv2.first) a.transitions[{kv1.first, kv2.first}] = {identity, {}};
  return a;
}

}  // namespace manidel
