#include "manidel/atlas.hpp"
#include "manidel/random.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <map>

namespace manidel {
namespace {

constexpr int kAnnulusAttempts = 30;
constexpr int kSeedRetries = 64;
constexpr int kBisections = 60;

// Points of a blue-noise sample together with the sampling radius that
// produced them.
struct Sample {
  std::vector<Eigen::Vector3d> points;  // torus uses the first two coordinates
  double r = 0.0;
};

// Shrinks or grows r until `draw` returns exactly n points. `draw` must be
// deterministic in (r, seed).
Sample sample_exact(int n, double r_guess, std::uint64_t seed,
                    const std::function<std::vector<Eigen::Vector3d>(double, std::uint64_t)>& draw,
                    const std::function<bool(const Sample&)>& accept) {
  for (int attempt = 0; attempt < kSeedRetries; ++attempt) {
    const std::uint64_t s = mix_seed(seed, static_cast<std::uint64_t>(attempt));
    double lo = 0.5 * r_guess, hi = 2.0 * r_guess;
    for (int b = 0; b < kBisections; ++b) {
      const double r = 0.5 * (lo + hi);
      Sample out{draw(r, s), r};
      const int count = static_cast<int>(out.points.size());
      if (count == n) {
        if (accept(out)) return out;
        break;
      }
      if (count > n)
        lo = r;
      else
        hi = r;
      // The count jumps past n here; another seed is cheaper than waiting.
      if (hi - lo < 1e-6 * r) break;
    }
  }
  throw Error(ErrorKind::SamplingFailed,
              "could not draw a net with exactly " + std::to_string(n) + " points");
}

// ---- flat torus ----

Eigen::Vector2d wrap(Eigen::Vector2d d) {
  d[0] -= std::round(d[0]);
  d[1] -= std::round(d[1]);
  return d;
}

class TorusGrid {
 public:
  explicit TorusGrid(double r) : g_(std::max(1, static_cast<int>(std::floor(1.0 / r)))), r_(r) {
    cells_.assign(static_cast<std::size_t>(g_) * g_, {});
  }
  bool free(const Eigen::Vector2d& x, const std::vector<Eigen::Vector2d>& pts) const {
    const int reach = static_cast<int>(std::ceil(r_ * g_));
    const auto [cx, cy] = cell(x);
    for (int dx = -reach; dx <= reach; ++dx)
      for (int dy = -reach; dy <= reach; ++dy)
        for (int idx : cells_[index(cx + dx, cy + dy)])
          if (wrap(pts[idx] - x).norm() < r_) return false;
    return true;
  }
  void add(const Eigen::Vector2d& x, int idx) {
    const auto [cx, cy] = cell(x);
    cells_[index(cx, cy)].push_back(idx);
  }
  // Distance to the nearest point, searching rings until a hit is certain.
  double nearest(const Eigen::Vector2d& x, const std::vector<Eigen::Vector2d>& pts) const {
    const auto [cx, cy] = cell(x);
    double best = std::numeric_limits<double>::infinity();
    for (int ring = 0; ring <= g_; ++ring) {
      for (int dx = -ring; dx <= ring; ++dx)
        for (int dy = -ring; dy <= ring; ++dy) {
          if (std::max(std::abs(dx), std::abs(dy)) != ring) continue;
          for (int idx : cells_[index(cx + dx, cy + dy)])
            best = std::min(best, wrap(pts[idx] - x).norm());
        }
      if (best <= static_cast<double>(ring) / g_) break;
    }
    return best;
  }

 private:
  std::pair<int, int> cell(const Eigen::Vector2d& x) const {
    return {std::min(g_ - 1, static_cast<int>(x[0] * g_)), std::min(g_ - 1, static_cast<int>(x[1] * g_))};
  }
  std::size_t index(int cx, int cy) const {
    cx = ((cx % g_) + g_) % g_;
    cy = ((cy % g_) + g_) % g_;
    return static_cast<std::size_t>(cx) * g_ + cy;
  }
  int g_;
  double r_;
  std::vector<std::vector<int>> cells_;
};

Eigen::Vector2d unit_square(Eigen::Vector2d x) {
  x[0] -= std::floor(x[0]);
  x[1] -= std::floor(x[1]);
  return x;
}

std::vector<Eigen::Vector2d> torus_poisson(double r, std::uint64_t seed) {
  Rng rng(seed);
  TorusGrid grid(r);
  std::vector<Eigen::Vector2d> pts;
  auto push = [&](const Eigen::Vector2d& x) {
    grid.add(x, static_cast<int>(pts.size()));
    pts.push_back(x);
  };
  push({rng.uniform(), rng.uniform()});
  std::vector<int> active{0};
  while (!active.empty()) {
    const std::size_t k = rng.index(active.size());
    const Eigen::Vector2d base = pts[active[k]];
    bool found = false;
    for (int t = 0; t < kAnnulusAttempts; ++t) {
      const double ang = rng.uniform(0.0, 2.0 * M_PI);
      const double rad = r * std::sqrt(rng.uniform(1.0, 4.0));
      const Eigen::Vector2d c = unit_square(base + rad * Eigen::Vector2d(std::cos(ang), std::sin(ang)));
      if (grid.free(c, pts)) {
        active.push_back(static_cast<int>(pts.size()));
        push(c);
        found = true;
        break;
      }
    }
    if (!found) {
      active[k] = active.back();
      active.pop_back();
    }
  }
  // Fill pass: darts over the whole square close remaining gaps.
  const int darts = static_cast<int>(40.0 / (r * r));
  for (int t = 0; t < darts; ++t) {
    const Eigen::Vector2d c(rng.uniform(), rng.uniform());
    if (grid.free(c, pts)) push(c);
  }
  return pts;
}

double torus_cover(const std::vector<Eigen::Vector2d>& pts, double r) {
  TorusGrid grid(r);
  for (std::size_t i = 0; i < pts.size(); ++i) grid.add(pts[i], static_cast<int>(i));
  const int steps = static_cast<int>(std::ceil(10.0 / r));
  double worst = 0.0;
  for (int a = 0; a < steps; ++a)
    for (int b = 0; b < steps; ++b)
      worst = std::max(worst, grid.nearest({(a + 0.5) / steps, (b + 0.5) / steps}, pts));
  return worst;
}

// ---- sphere ----

double geodesic(const Eigen::Vector3d& a, const Eigen::Vector3d& b, double radius) {
  const double c = std::clamp(a.dot(b) / (radius * radius), -1.0, 1.0);
  return radius * std::acos(c);
}

// Dense cell grid over the cube [-radius, radius]^3.
class SphereGrid {
 public:
  SphereGrid(double cell, double radius)
      : cell_(cell), radius_(radius), g_(static_cast<int>(std::ceil(2.0 * radius / cell)) + 1),
        cells_(static_cast<std::size_t>(g_) * g_ * g_) {}
  void add(const Eigen::Vector3d& x, int idx) {
    const auto c = key(x);
    cells_[flat(c[0], c[1], c[2])].push_back(idx);
  }
  template <typename F>
  void visit(const Eigen::Vector3d& x, int reach, F&& f) const {
    const auto c = key(x);
    for (int dx = std::max(0, c[0] - reach); dx <= std::min(g_ - 1, c[0] + reach); ++dx)
      for (int dy = std::max(0, c[1] - reach); dy <= std::min(g_ - 1, c[1] + reach); ++dy)
        for (int dz = std::max(0, c[2] - reach); dz <= std::min(g_ - 1, c[2] + reach); ++dz)
          for (int idx : cells_[flat(dx, dy, dz)]) f(idx);
  }
  double cell() const { return cell_; }
  int extent() const { return g_; }

 private:
  std::array<int, 3> key(const Eigen::Vector3d& x) const {
    std::array<int, 3> c;
    for (int d = 0; d < 3; ++d)
      c[d] = std::clamp(static_cast<int>(std::floor((x[d] + radius_) / cell_)), 0, g_ - 1);
    return c;
  }
  std::size_t flat(int x, int y, int z) const {
    return (static_cast<std::size_t>(x) * g_ + y) * g_ + z;
  }
  double cell_;
  double radius_;
  int g_;
  std::vector<std::vector<int>> cells_;
};

SphereFrame frame_at(const Eigen::Vector3d& x) {
  const Eigen::Vector3d c = x.normalized();
  int axis = 0;
  for (int d = 1; d < 3; ++d)
    if (std::abs(c[d]) < std::abs(c[axis])) axis = d;
  Eigen::Vector3d a = Eigen::Vector3d::Zero();
  a[axis] = 1.0;
  const Eigen::Vector3d e1 = (a - a.dot(c) * c).normalized();
  const Eigen::Vector3d e2 = c.cross(e1);
  SphereFrame f;
  f.col(0) = c;
  f.col(1) = e1;
  f.col(2) = e2;
  return f;
}

Eigen::Vector3d random_on_sphere(Rng& rng, double radius) {
  return radius * Eigen::Vector3d(rng.unit_vector(3));
}

std::vector<Eigen::Vector3d> sphere_poisson(double r, double radius, std::uint64_t seed) {
  Rng rng(seed);
  const double chord = 2.0 * radius * std::sin(std::min(r / (2.0 * radius), M_PI / 2));
  SphereGrid grid(chord, radius);
  std::vector<Eigen::Vector3d> pts;
  auto free = [&](const Eigen::Vector3d& x) {
    bool ok = true;
    grid.visit(x, 1, [&](int idx) {
      if (ok && geodesic(pts[idx], x, radius) < r) ok = false;
    });
    return ok;
  };
  auto push = [&](const Eigen::Vector3d& x) {
    grid.add(x, static_cast<int>(pts.size()));
    pts.push_back(x);
  };
  push(random_on_sphere(rng, radius));
  std::vector<int> active{0};
  while (!active.empty()) {
    const std::size_t k = rng.index(active.size());
    const SphereFrame f = frame_at(pts[active[k]]);
    bool found = false;
    for (int t = 0; t < kAnnulusAttempts; ++t) {
      const double ang = rng.uniform(0.0, 2.0 * M_PI);
      const double rad = r * std::sqrt(rng.uniform(1.0, 4.0));
      Point u(2);
      u << rad * std::cos(ang), rad * std::sin(ang);
      const Eigen::Vector3d c = sphere_exp(f, radius, u);
      if (free(c)) {
        active.push_back(static_cast<int>(pts.size()));
        push(c);
        found = true;
        break;
      }
    }
    if (!found) {
      active[k] = active.back();
      active.pop_back();
    }
  }
  const int darts = static_cast<int>(40.0 * 4.0 * M_PI * radius * radius / (r * r));
  for (int t = 0; t < darts; ++t) {
    const Eigen::Vector3d c = random_on_sphere(rng, radius);
    if (free(c)) push(c);
  }
  return pts;
}

// Geodesic covering radius over a Fibonacci lattice of test points.
double sphere_cover(const std::vector<Eigen::Vector3d>& pts, double radius, double r) {
  const double chord = 2.0 * radius * std::sin(std::min(r / (2.0 * radius), M_PI / 2));
  SphereGrid grid(chord, radius);
  for (std::size_t i = 0; i < pts.size(); ++i) grid.add(pts[i], static_cast<int>(i));
  const int tests = std::max(20000, static_cast<int>(400.0 * radius * radius / (r * r)));
  const double golden = M_PI * (3.0 - std::sqrt(5.0));
  double worst = 0.0;
  for (int t = 0; t < tests; ++t) {
    const double z = 1.0 - 2.0 * (t + 0.5) / tests;
    const double s = std::sqrt(1.0 - z * z);
    const Eigen::Vector3d x = radius * Eigen::Vector3d(s * std::cos(golden * t), s * std::sin(golden * t), z);
    double best = std::numeric_limits<double>::infinity();
    for (int reach = 2; !std::isfinite(best) || best > (reach - 1) * grid.cell(); ++reach) {
      grid.visit(x, reach, [&](int idx) { best = std::min(best, geodesic(pts[idx], x, radius)); });
      if (reach > grid.extent()) break;
    }
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace

Atlas build_flat_torus(int n, double mu0, std::uint64_t seed) {
  if (n < 20) throw Error(ErrorKind::SamplingFailed, "torus fixture needs n >= 20");
  if (!(mu0 > 0.0 && mu0 <= 1.0)) throw Error(ErrorKind::InvalidInput, "mu0 must lie in (0, 1]");
  constexpr double kCoverFraction = 0.85;

  double eps = 0.0;
  auto draw = [](double r, std::uint64_t s) {
    std::vector<Eigen::Vector3d> out;
    for (const auto& p : torus_poisson(r, s)) out.emplace_back(p[0], p[1], 0.0);
    return out;
  };
  auto accept = [&](const Sample& smp) {
    std::vector<Eigen::Vector2d> pts;
    for (const auto& p : smp.points) pts.emplace_back(p[0], p[1]);
    eps = torus_cover(pts, smp.r) / kCoverFraction;
    return smp.r >= mu0 * eps && 7.0 * eps < 0.5;
  };
  const Sample smp = sample_exact(n, std::sqrt(0.6 / n), seed, draw, accept);

  Atlas a;
  a.m = 2;
  a.mu0 = mu0;
  a.nu0 = 0.0;
  a.xi0_declared = 0.0;
  a.fixture = FixtureInfo{"torus", 1.0, {}};
  const double chart_radius = 0.5 - eps;
  std::map<std::pair<long, long>, std::shared_ptr<const TransitionFn>> shifts;
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector2d pi = smp.points[i].head<2>();
    Patch p;
    p.id = i;
    p.eps = eps;
    p.origin = pi;
    p.chart_radius = chart_radius;
    for (int l = 0; l < n; ++l) {
      const Eigen::Vector2d d = wrap(smp.points[l].head<2>() - pi);
      if (d.norm() < chart_radius) p.points[l] = pi + d;
    }
    for (const auto& [j, xj] : p.points) {
      if (j == i) continue;
      const Eigen::Vector2d shift = smp.points[j].head<2>() - xj;
      const std::pair<long, long> key{std::lround(shift[0]), std::lround(shift[1])};
      auto& fn = shifts[key];
      if (!fn) fn = std::make_shared<Translation>(Point(Eigen::Vector2d(key.first, key.second)));
      a.transitions[{i, j}] = {fn, {{pi, 0.5}, {xj, 0.5}}};
    }
    a.patches.emplace(i, std::move(p));
  }
  return a;
}

Atlas build_sphere_exp(int n, double radius, double mu0, std::uint64_t seed) {
  if (n < 20) throw Error(ErrorKind::SamplingFailed, "sphere fixture needs n >= 20");
  if (!(radius > 0.0)) throw Error(ErrorKind::InvalidInput, "sphere radius must be positive");
  if (!(mu0 > 0.0 && mu0 <= 1.0)) throw Error(ErrorKind::InvalidInput, "mu0 must lie in (0, 1]");
  // Chart distances stretch tangentially by up to r / sin(r) at radius r,
  // so density needs headroom over the geodesic covering radius.
  constexpr double kCoverFraction = 0.75;

  double eps = 0.0;
  auto draw = [radius](double r, std::uint64_t s) { return sphere_poisson(r, radius, s); };
  auto accept = [&](const Sample& smp) {
    eps = sphere_cover(smp.points, radius, smp.r) / kCoverFraction;
    return smp.r >= mu0 * eps && 10.0 * eps < 0.9 * M_PI * radius;
  };
  const Sample smp =
      sample_exact(n, std::sqrt(0.6 * 4.0 * M_PI * radius * radius / n), seed, draw, accept);

  Atlas a;
  a.m = 2;
  a.mu0 = mu0;
  a.nu0 = 0.0;
  a.xi0_declared = 216.0 * eps * eps / (radius * radius);
  FixtureInfo info{"sphere", radius, {}};
  for (int i = 0; i < n; ++i) info.frames[i] = frame_at(smp.points[i]);

  const double chart_radius = 10.0 * eps;
  for (int i = 0; i < n; ++i) {
    const SphereFrame& fi = info.frames[i];
    Patch p;
    p.id = i;
    p.eps = eps;
    p.origin = Point::Zero(2);
    p.chart_radius = chart_radius;
    for (int l = 0; l < n; ++l)
      if (geodesic(smp.points[i], smp.points[l], radius) < 9.0 * eps)
        p.points[l] = sphere_log(fi, radius, smp.points[l]);
    for (const auto& [j, xj] : p.points) {
      if (j == i) continue;
      auto fn = std::make_shared<SphereExp>(fi, info.frames[j], radius);
      a.transitions[{i, j}] = {fn, {{p.origin, chart_radius}, {xj, chart_radius}}};
    }
    a.patches.emplace(i, std::move(p));
  }
  a.fixture = std::move(info);
  return a;
}

}  // namespace manidel
