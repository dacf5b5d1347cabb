#include "manidel/complex.hpp"

#include <array>
#include <cmath>

namespace manidel {

namespace {

struct Tri {
  std::array<int, 3> v;
  Eigen::Vector2d centre;
  double r2;
};

Tri make_tri(const std::vector<Eigen::Vector2d>& pts, int a, int b, int c) {
  const Eigen::Vector2d& A = pts[a];
  const Eigen::Vector2d B = pts[b] - A, C = pts[c] - A;
  const double d = 2.0 * (B.x() * C.y() - B.y() * C.x());
  const double b2 = B.squaredNorm(), c2 = C.squaredNorm();
  const Eigen::Vector2d u((C.y() * b2 - B.y() * c2) / d, (B.x() * c2 - C.x() * b2) / d);
  return {{a, b, c}, A + u, u.squaredNorm()};
}

}  // namespace

AbstractComplex torus_delaunay_oracle(const std::map<Label, Eigen::Vector2d>& points) {
  // Lift: copies within half a period of the unit square.
  std::vector<Eigen::Vector2d> pts;
  std::vector<Label> label;
  std::vector<bool> base;
  for (const auto& [l, x] : points)
    for (int dx = -1; dx <= 1; ++dx)
      for (int dy = -1; dy <= 1; ++dy) {
        const Eigen::Vector2d y = x + Eigen::Vector2d(dx, dy);
        if (y.x() < -0.5 || y.x() > 1.5 || y.y() < -0.5 || y.y() > 1.5) continue;
        pts.push_back(y);
        label.push_back(l);
        base.push_back(dx == 0 && dy == 0);
      }
  const int n = static_cast<int>(pts.size());
  pts.emplace_back(-100.0, -100.0);
  pts.emplace_back(100.0, -100.0);
  pts.emplace_back(0.5, 100.0);

  std::vector<Tri> tris{make_tri(pts, n, n + 1, n + 2)};
  for (int p = 0; p < n; ++p) {
    std::vector<Tri> keep;
    std::map<std::pair<int, int>, int> boundary;
    for (const Tri& t : tris) {
      if ((pts[p] - t.centre).squaredNorm() < t.r2) {
        for (int e = 0; e < 3; ++e) {
          const int a = t.v[e], b = t.v[(e + 1) % 3];
          ++boundary[{std::min(a, b), std::max(a, b)}];
        }
      } else {
        keep.push_back(t);
      }
    }
    for (const auto& [e, count] : boundary)
      if (count == 1) keep.push_back(make_tri(pts, e.first, e.second, p));
    tris = std::move(keep);
  }

  SimplexSet top;
  for (const Tri& t : tris) {
    if (t.v[0] >= n || t.v[1] >= n || t.v[2] >= n) continue;
    if (!base[t.v[0]] && !base[t.v[1]] && !base[t.v[2]]) continue;
    top.insert(make_key({label[t.v[0]], label[t.v[1]], label[t.v[2]]}));
  }
  return complex_from_simplices(2, top);
}

AbstractComplex torus_delaunay_oracle(const Atlas& a) {
  if (!a.fixture || a.fixture->kind != "torus" || a.m != 2)
    throw Error(ErrorKind::InvalidInput, "torus oracle needs a flat torus fixture atlas");
  std::map<Label, Eigen::Vector2d> pts;
  for (Label l : a.labels()) {
    const Eigen::VectorXd x = a.embed(l);
    pts[l] = Eigen::Vector2d(x[0], x[1]);
  }
  return torus_delaunay_oracle(pts);
}

}  // namespace manidel
