#include "manidel/perturbation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <set>
#include <thread>

namespace manidel {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Minimal circumball of a facet and an orthonormal frame whose first k
// columns span its affine directions.
struct FacetBall {
  Point c0;
  double r0 = 0.0;
  double t_max = 0.0;  // sqrt(r_max^2 - r0^2)
  double r_max = 0.0;
  int k = 0;
  int codim = 0;
  Eigen::MatrixXd frame;
};

bool make_facet(const Simplex& s, double r_max, const Tolerances& tol, FacetBall& fb) {
  const int m = s.ambient_dim();
  fb.k = s.dim();
  fb.codim = m - fb.k;
  fb.r_max = r_max;
  if (fb.k == 0) {
    fb.c0 = s.points[0];
    fb.r0 = 0.0;
    fb.frame = Eigen::MatrixXd::Identity(m, m);
  } else {
    if (fb.k > m) return false;
    CircumBall b;
    try {
      b = circumcenter_radius(s, tol);
    } catch (const Error&) {
      return false;
    }
    fb.c0 = b.center;
    fb.r0 = b.radius;
    fb.frame = edge_matrix(s).householderQr().householderQ();
  }
  if (!(fb.r0 < r_max)) return false;
  fb.t_max = std::sqrt(r_max * r_max - fb.r0 * fb.r0);
  return true;
}

// Cheap lower bound on |N| / (d + R) over all admissible centres.
double lower_bound(const FacetBall& fb, const Point& p) {
  const Point v = p - fb.c0;
  const double v2 = v.squaredNorm();
  if (fb.codim == 0) return std::abs(std::sqrt(v2) - fb.r0);
  const Eigen::VectorXd y = fb.frame.transpose() * v;
  const double h = y.tail(fb.codim).norm();
  const double num = std::max(0.0, std::abs(v2 - fb.r0 * fb.r0) - 2.0 * h * fb.t_max);
  return num / (std::sqrt(v2) + fb.t_max + fb.r_max);
}

// Normal unit vector orthogonal to u (both in normal-space coordinates).
Eigen::VectorXd orthogonal_unit(const Eigen::VectorXd& u) {
  Eigen::Index best = 0;
  for (Eigen::Index a = 1; a < u.size(); ++a)
    if (std::abs(u[a]) < std::abs(u[best])) best = a;
  Eigen::VectorXd e = Eigen::VectorXd::Zero(u.size());
  e[best] = 1.0;
  e -= e.dot(u) * u;
  return e.normalized();
}

double facet_witness(const FacetBall& fb, const Point& p, Point* center, double* radius) {
  const Point v = p - fb.c0;
  const double v2 = v.squaredNorm();
  auto set = [&](const Point& c, double r) {
    if (center) *center = c;
    if (radius) *radius = r;
  };
  if (fb.codim == 0) {
    set(fb.c0, fb.r0);
    return std::abs(std::sqrt(v2) - fb.r0);
  }
  const Eigen::VectorXd y = fb.frame.transpose() * v;
  const Eigen::VectorXd yn = y.tail(fb.codim);
  const double h = yn.norm();
  const double kk = v2 - fb.r0 * fb.r0;
  const Eigen::MatrixXd normal = fb.frame.rightCols(fb.codim);
  const double scale = std::max({std::sqrt(v2), fb.r_max, 1e-300});

  if (h <= 1e-14 * scale) {
    // N is constant in w; only d + R can grow, so push |w| to the boundary.
    if (std::abs(kk) <= 1e-15 * scale * scale) {
      set(fb.c0, fb.r0);
      return 0.0;
    }
    Eigen::VectorXd dir = Eigen::VectorXd::Zero(fb.codim);
    dir[0] = 1.0;
    set(fb.c0 + fb.t_max * normal * dir, fb.r_max);
    return std::abs(kk) / (std::sqrt(v2 + fb.t_max * fb.t_max) + fb.r_max);
  }
  const Eigen::VectorXd u = yn / h;
  const double t_star = kk / (2.0 * h);
  if (std::abs(t_star) < fb.t_max) {
    set(fb.c0 + t_star * normal * u, std::sqrt(fb.r0 * fb.r0 + t_star * t_star));
    return 0.0;
  }
  const double tm = fb.t_max;
  auto f = [&](double t) {
    const double num = std::abs(kk - 2.0 * h * t);
    if (fb.codim == 1) {
      const double d = std::sqrt(std::max(0.0, v2 - 2.0 * h * t + t * t));
      return num / (d + std::sqrt(fb.r0 * fb.r0 + t * t));
    }
    const double d = std::sqrt(std::max(0.0, v2 - 2.0 * h * t + tm * tm));
    return num / (d + fb.r_max);
  };
  constexpr int kSamples = 64;
  int best = 0;
  double best_val = kInf;
  for (int s = 0; s <= kSamples; ++s) {
    const double val = f(-tm + 2.0 * tm * s / kSamples);
    if (val < best_val) {
      best_val = val;
      best = s;
    }
  }
  double lo = -tm + 2.0 * tm * std::max(0, best - 1) / kSamples;
  double hi = -tm + 2.0 * tm * std::min(kSamples, best + 1) / kSamples;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 80; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = f(x2);
    }
  }
  double t = 0.5 * (lo + hi);
  double val = f(t);
  if (best_val < val) {
    t = -tm + 2.0 * tm * best / kSamples;
    val = best_val;
  }
  Eigen::VectorXd w = t * u;
  double r = std::sqrt(fb.r0 * fb.r0 + t * t);
  if (fb.codim >= 2) {
    w += std::sqrt(std::max(0.0, tm * tm - t * t)) * orthogonal_unit(u);
    r = fb.r_max;
  }
  set(fb.c0 + normal * w, r);
  return val;
}

std::vector<int> intersect(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

}  // namespace

double witness_distance(const Simplex& facet, const Point& p, double r_max, Point* center, double* radius,
                        const Tolerances& tol) {
  FacetBall fb;
  if (!make_facet(facet, r_max, tol, fb)) return kInf;
  return facet_witness(fb, p, center, radius);
}

std::vector<ForbiddenConfig> forbidden_scan(const Patch& p, const Ball& region, double eps_prime,
                                            double delta, double gamma0, const ScanOptions& opts) {
  std::vector<Label> labels;
  std::vector<Point> pts;
  for (const auto& [l, x] : p.points)
    if ((x - region.center).norm() <= region.radius) {
      labels.push_back(l);
      pts.push_back(x);
    }
  const int n = static_cast<int>(pts.size());
  const int m = p.dim();
  const double diam = (opts.diameter_bound > 0.0 ? opts.diameter_bound : 2.5 * eps_prime);

  std::vector<std::vector<int>> adj(n);
  if (n > 0) {
    const PointGrid grid(pts, diam);
    for (int a = 0; a < n; ++a) {
      for (std::size_t b : grid.within(pts[a], diam))
        if (static_cast<int>(b) != a && (pts[a] - pts[b]).norm() < diam) adj[a].push_back(static_cast<int>(b));
      std::sort(adj[a].begin(), adj[a].end());
    }
  }

  std::vector<ForbiddenConfig> found;
  std::set<SimplexKey> tested;
  std::vector<int> clique;

  auto examine = [&](const std::vector<int>& common) {
    Simplex sigma;
    for (int c : clique) {
      sigma.labels.push_back(labels[c]);
      sigma.points.push_back(pts[c]);
    }
    FacetBall fb;
    if (!make_facet(sigma, eps_prime, opts.tol, fb)) return;
    for (int q : common) {
      if (lower_bound(fb, pts[q]) > delta) continue;
      Point centre;
      double radius = 0.0;
      const double w = facet_witness(fb, pts[q], &centre, &radius);
      if (!(w <= delta)) continue;
      SimplexKey key(sigma.labels);
      key.push_back(labels[q]);
      std::sort(key.begin(), key.end());
      if (!tested.insert(key).second) continue;
      Simplex tau;
      for (Label l : key) {
        tau.labels.push_back(l);
        tau.points.push_back(p.at(l));
      }
      if (!is_flake(tau, gamma0, opts.tol)) continue;
      if (opts.p2_prune) {
        bool small = true;
        for (std::size_t v = 0; v < tau.size() && small; ++v) {
          const Simplex f = tau.without(v);
          if (f.dim() >= 1 && (is_degenerate(f, opts.tol) ||
                               !(circumcenter_radius(f, opts.tol).radius < 2.0 * eps_prime)))
            small = false;
        }
        if (!small) continue;
      }
      found.push_back({key, labels[q], centre, radius, w, p.id});
    }
  };

  // Cliques of 2..m+1 mutually close points, grown in increasing index order.
  auto grow = [&](auto&& self, const std::vector<int>& ext, const std::vector<int>& common) -> void {
    if (clique.size() >= 2) examine(common);
    if (static_cast<int>(clique.size()) == m + 1) return;
    for (int c : ext) {
      if (!clique.empty() && c <= clique.back()) continue;
      clique.push_back(c);
      std::vector<int> next_common = clique.size() == 1 ? adj[c] : intersect(common, adj[c]);
      std::erase(next_common, c);
      std::vector<int> next_ext;
      for (int e : next_common)
        if (e > c) next_ext.push_back(e);
      self(self, next_ext, next_common);
      clique.pop_back();
    }
  };
  std::vector<int> all(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a) all[a] = a;
  grow(grow, all, {});
  std::sort(found.begin(), found.end(),
            [](const ForbiddenConfig& x, const ForbiddenConfig& y) { return x.simplex < y.simplex; });
  return found;
}

std::vector<ForbiddenConfig> forbidden_scan(const Atlas& a, Label i, const AlgorithmParams& params) {
  const Patch& p = a.patch(i);
  const NetParams np = params.perturbed(p.eps);
  ScanOptions so;
  so.p2_prune = params.p2_prune;
  so.tol = a.tol;
  so.diameter_bound = 2.5 * (1.0 + 0.5 * params.delta0 * params.mu0) * np.eps;
  auto out = forbidden_scan(p, p.region_of_interest(), np.eps, params.delta(p.eps), params.gamma0, so);
  for (auto& f : out) f.patch_id = i;
  return out;
}

std::vector<ForbiddenConfig> scan_all(const Atlas& a, const AlgorithmParams& params, int jobs) {
  const std::vector<Label> labels = a.labels();
  std::vector<std::vector<ForbiddenConfig>> per(labels.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < labels.size(); t = next++) per[t] = forbidden_scan(a, labels[t], params);
  };
  const int threads = std::max(1, std::min<int>(jobs, static_cast<int>(labels.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  std::vector<ForbiddenConfig> out;
  for (auto& v : per) out.insert(out.end(), v.begin(), v.end());
  return out;
}

}  // namespace manidel
