#include "manidel/patch_delaunay.hpp"

#include <algorithm>
#include <cmath>

namespace manidel {

const Point& Patch::at(Label label) const {
  auto it = points.find(label);
  if (it == points.end())
    throw Error(ErrorKind::UnknownLabel,
                "label " + std::to_string(label) + " not in patch " + std::to_string(id));
  return it->second;
}

Simplex Patch::simplex(const SimplexKey& key) const {
  Simplex s;
  for (Label l : key) {
    s.labels.push_back(l);
    s.points.push_back(at(l));
  }
  return s;
}

std::vector<Label> Patch::labels_within(const Point& c, double r) const {
  std::vector<Label> out;
  for (const auto& [label, x] : points)
    if ((x - c).norm() <= r) out.push_back(label);
  return out;
}

PointGrid::PointGrid(const std::vector<Point>& points, double cell)
    : points_(points), cell_(cell), dim_(points.empty() ? 0 : static_cast<int>(points[0].size())) {
  if (!(cell > 0.0)) throw Error(ErrorKind::InvalidInput, "grid cell must be positive");
  for (std::size_t i = 0; i < points_.size(); ++i) cells_[cell_of(points_[i])].push_back(i);
}

std::vector<long long> PointGrid::cell_of(const Point& x) const {
  std::vector<long long> c(dim_);
  for (int d = 0; d < dim_; ++d) c[d] = static_cast<long long>(std::floor(x[d] / cell_));
  return c;
}

std::vector<std::size_t> PointGrid::within(const Point& x, double r) const {
  std::vector<std::size_t> out;
  if (points_.empty()) return out;
  const long long reach = static_cast<long long>(std::ceil(r / cell_));
  const std::vector<long long> base = cell_of(x);
  std::vector<long long> offset(dim_, -reach);
  std::vector<long long> key(dim_);
  for (;;) {
    for (int d = 0; d < dim_; ++d) key[d] = base[d] + offset[d];
    auto it = cells_.find(key);
    if (it != cells_.end())
      for (std::size_t i : it->second)
        if ((points_[i] - x).norm() <= r) out.push_back(i);
    int d = 0;
    while (d < dim_ && offset[d] == reach) offset[d++] = -reach;
    if (d == dim_) break;
    ++offset[d];
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

struct PatchIndex {
  std::vector<Label> labels;
  std::vector<Point> points;
  PointGrid grid;

  PatchIndex(const Patch& p, double cell)
      : labels(collect_labels(p)), points(collect_points(p)), grid(points, cell) {}

  static std::vector<Label> collect_labels(const Patch& p) {
    std::vector<Label> out;
    for (const auto& kv : p.points) out.push_back(kv.first);
    return out;
  }
  static std::vector<Point> collect_points(const Patch& p) {
    std::vector<Point> out;
    for (const auto& kv : p.points) out.push_back(kv.second);
    return out;
  }

  // No point other than the vertices lies in the open ball shrunk by slack.
  bool empty_ball(const CircumBall& ball, const std::vector<std::size_t>& vertices,
                  double slack) const {
    for (std::size_t q : grid.within(ball.center, ball.radius)) {
      if (std::find(vertices.begin(), vertices.end(), q) != vertices.end()) continue;
      if ((points[q] - ball.center).norm() < ball.radius - slack) return false;
    }
    return true;
  }
};

double cutoff_of(const Patch& p, const DelaunayOptions& opts) {
  const double c = opts.radius_cutoff > 0.0 ? opts.radius_cutoff : 1.25 * p.eps;
  if (!(c > 0.0)) throw Error(ErrorKind::InvalidInput, "patch needs a positive sampling radius");
  return c;
}

struct CandidateScan {
  bool any_nondegenerate = false;
};

// Tests the m-simplex `vertices` (indices into the patch index) and inserts it
// when it has an empty circumball centred in the region.
void test_candidate(const PatchIndex& index, const std::vector<std::size_t>& vertices,
                    const Ball& region, double cutoff, double slack, const Tolerances& tol,
                    SimplexSet& out, CandidateScan& scan) {
  Simplex s;
  for (std::size_t v : vertices) {
    s.labels.push_back(index.labels[v]);
    s.points.push_back(index.points[v]);
  }
  if (is_degenerate(s, tol)) return;
  CircumBall ball;
  try {
    ball = circumcenter_radius(s, tol);
  } catch (const Error&) {
    return;
  }
  scan.any_nondegenerate = true;
  if (ball.radius >= cutoff) return;
  if (!region.contains(ball.center)) return;
  if (!index.empty_ball(ball, vertices, slack)) return;
  out.insert(make_key(s.labels));
}

}  // namespace

SimplexSet close_under_faces(const SimplexSet& simplices) {
  SimplexSet out;
  for (const SimplexKey& s : simplices) {
    const std::size_t n = s.size();
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
      SimplexKey f;
      for (std::size_t i = 0; i < n; ++i)
        if (mask & (1u << i)) f.push_back(s[i]);
      out.insert(std::move(f));
    }
  }
  return out;
}

SimplexSet simplices_of_dim(const SimplexSet& simplices, int dim) {
  SimplexSet out;
  for (const auto& s : simplices)
    if (static_cast<int>(s.size()) == dim + 1) out.insert(s);
  return out;
}

SimplexSet delaunay_complex(const Patch& p, const Ball& region, const DelaunayOptions& opts) {
  const int m = p.dim();
  if (static_cast<int>(p.points.size()) < m + 1)
    throw Error(ErrorKind::DegeneratePatch, "fewer than m+1 points in patch");
  const double cutoff = cutoff_of(p, opts);
  const double slack = opts.tol.ball * p.eps;
  PatchIndex index(p, cutoff);
  SimplexSet tops;
  CandidateScan scan;
  std::vector<std::size_t> vertices;
  for (std::size_t a = 0; a < index.points.size(); ++a) {
    std::vector<std::size_t> nbrs;
    for (std::size_t q : index.grid.within(index.points[a], 2.0 * cutoff))
      if (q > a) nbrs.push_back(q);
    for_each_combination(nbrs.size(), static_cast<std::size_t>(m),
                         [&](const std::vector<std::size_t>& combo) {
                           vertices.assign(1, a);
                           for (std::size_t c : combo) vertices.push_back(nbrs[c]);
                           test_candidate(index, vertices, region, cutoff, slack, opts.tol, tops,
                                          scan);
                         });
  }
  if (!scan.any_nondegenerate)
    throw Error(ErrorKind::DegeneratePatch, "no non-degenerate m-simplex among candidates");
  return close_under_faces(tops);
}

SimplexSet star(const Patch& p, Label label, const Ball& region, const DelaunayOptions& opts) {
  const int m = p.dim();
  const Point& centre = p.at(label);
  const double cutoff = cutoff_of(p, opts);
  const double slack = opts.tol.ball * p.eps;
  PatchIndex index(p, cutoff);
  const std::size_t self = static_cast<std::size_t>(
      std::lower_bound(index.labels.begin(), index.labels.end(), label) - index.labels.begin());
  std::vector<std::size_t> nbrs;
  for (std::size_t q : index.grid.within(centre, 2.0 * cutoff))
    if (q != self) nbrs.push_back(q);
  SimplexSet tops;
  CandidateScan scan;
  std::vector<std::size_t> vertices;
  for_each_combination(nbrs.size(), static_cast<std::size_t>(m),
                       [&](const std::vector<std::size_t>& combo) {
                         vertices.assign(1, self);
                         for (std::size_t c : combo) vertices.push_back(nbrs[c]);
                         test_candidate(index, vertices, region, cutoff, slack, opts.tol, tops,
                                        scan);
                       });
  SimplexSet out = close_under_faces(tops);
  out.insert(SimplexKey{label});
  return out;
}

double protection_margin(const Patch& p, const SimplexKey& s, const Tolerances& tol) {
  const CircumBall ball = circumcenter_radius(p.simplex(s), tol);
  double margin = std::numeric_limits<double>::infinity();
  for (const auto& [label, x] : p.points) {
    if (std::binary_search(s.begin(), s.end(), label)) continue;
    margin = std::min(margin, (x - ball.center).norm() - ball.radius);
  }
  return margin;
}

bool is_delta_protected(const Patch& p, const SimplexKey& s, double delta, const Tolerances& tol) {
  return protection_margin(p, s, tol) - tol.ball * p.eps > delta;
}

NetCertificate certify_net(const std::vector<Point>& points, const Ball& domain, double mu,
                           double eps, double grid_step) {
  if (!(grid_step > 0.0) || !(eps > 0.0))
    throw Error(ErrorKind::InvalidInput, "certify_net needs positive eps and grid step");
  NetCertificate cert;
  cert.eps = eps;
  const int m = static_cast<int>(domain.center.size());
  PointGrid grid(points, eps);

  // Density: walk the grid over the bounding box of the domain.
  const long long steps = static_cast<long long>(std::ceil(domain.radius / grid_step));
  std::vector<long long> offset(m, -steps);
  double worst = 0.0;
  Point x(m);
  for (;;) {
    for (int d = 0; d < m; ++d) x[d] = domain.center[d] + offset[d] * grid_step;
    if ((x - domain.center).norm() <= domain.radius) {
      double nearest = std::numeric_limits<double>::infinity();
      for (std::size_t q : grid.within(x, eps)) nearest = std::min(nearest, (points[q] - x).norm());
      if (!std::isfinite(nearest))
        for (const Point& q : points) nearest = std::min(nearest, (q - x).norm());
      worst = std::max(worst, nearest);
    }
    int d = 0;
    while (d < m && offset[d] == steps) offset[d++] = -steps;
    if (d == m) break;
    ++offset[d];
  }
  cert.worst_uncovered = worst;
  cert.certified_density = worst + grid_step * std::sqrt(static_cast<double>(m)) / 2.0;
  cert.dense_ok = worst < eps;

  // Separation among points that can matter for the domain.
  double min_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points.size(); ++i) {
    if ((points[i] - domain.center).norm() > domain.radius + eps) continue;
    for (std::size_t j : grid.within(points[i], 2.0 * eps))
      if (j != i) min_dist = std::min(min_dist, (points[i] - points[j]).norm());
  }
  cert.min_distance = min_dist;
  cert.mu = min_dist / eps;
  cert.separated_ok = min_dist >= mu * eps;
  return cert;
}

NetCertificate certify_net(const Patch& p, const Ball& domain, double mu, double eps,
                           double grid_step) {
  std::vector<Point> pts;
  for (const auto& kv : p.points) pts.push_back(kv.second);
  return certify_net(pts, domain, mu, eps, grid_step);
}

NetParams perturbed_net_params(double mu, double eps, double rho0) {
  if (rho0 < 0.0 || rho0 > mu / 4.0)
    throw Error(ErrorKind::InvalidInput, "perturbation bound rho0 must lie in [0, mu/4]");
  return {(mu - 2.0 * rho0) / (1.0 + rho0), (1.0 + rho0) * eps};
}

}  // namespace manidel
