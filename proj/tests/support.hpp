#pragma once

#include "manidel/common.hpp"
#include "manidel/random.hpp"
#include "manidel/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

namespace testsupport {

using manidel::Label;
using manidel::Point;
using manidel::Rng;
using manidel::Simplex;

inline Point pt(std::initializer_list<double> xs) {
  Point p(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) p[i++] = x;
  return p;
}

inline Simplex simplex(std::initializer_list<std::initializer_list<double>> rows) {
  std::vector<Point> pts;
  for (const auto& r : rows) pts.push_back(pt(r));
  return Simplex::from_points(std::move(pts));
}

// k+1 points uniform in the unit ball of R^m.
inline Simplex random_simplex(Rng& rng, int k, int m) {
  std::vector<Point> pts;
  for (int i = 0; i <= k; ++i) pts.push_back(rng.in_ball(Point::Zero(m), 1.0));
  return Simplex::from_points(std::move(pts));
}

// Distance from x to the affine hull of `pts` by Gram-Schmidt.
inline double affine_distance(const Point& x, const std::vector<Point>& pts) {
  Point r = x - pts[0];
  std::vector<Point> basis;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    Point v = pts[i] - pts[0];
    for (const Point& b : basis) v -= v.dot(b) * b;
    const double n = v.norm();
    if (n > 1e-14) basis.push_back(v / n);
  }
  for (const Point& b : basis) r -= r.dot(b) * b;
  return r.norm();
}

// Thickness straight from the definition: min altitude / (k * diameter).
inline double thickness_oracle(const Simplex& s) {
  const int k = s.dim();
  if (k == 0) return 1.0;
  double diam = 0.0;
  for (std::size_t a = 0; a < s.size(); ++a)
    for (std::size_t b = a + 1; b < s.size(); ++b) diam = std::max(diam, (s.points[a] - s.points[b]).norm());
  double alt = std::numeric_limits<double>::infinity();
  for (std::size_t v = 0; v < s.size(); ++v) {
    std::vector<Point> rest;
    for (std::size_t u = 0; u < s.size(); ++u)
      if (u != v) rest.push_back(s.points[u]);
    alt = std::min(alt, affine_distance(s.points[v], rest));
  }
  return alt / (k * diam);
}

// Circumcentre via barycentric weights from the Cayley-Menger system.
inline std::pair<Point, double> circumball_oracle(const Simplex& s) {
  const int n = static_cast<int>(s.size());
  Eigen::MatrixXd cm = Eigen::MatrixXd::Zero(n + 1, n + 1);
  for (int a = 0; a < n; ++a) {
    cm(0, a + 1) = cm(a + 1, 0) = 1.0;
    for (int b = 0; b < n; ++b) cm(a + 1, b + 1) = (s.points[a] - s.points[b]).squaredNorm();
  }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
  rhs[0] = 1.0;
  const Eigen::VectorXd sol = cm.fullPivLu().solve(rhs);
  Point c = Point::Zero(s.points[0].size());
  for (int a = 0; a < n; ++a) c += sol[a + 1] * s.points[a];
  return {c, std::sqrt(std::max(0.0, -sol[0] / 2.0))};
}

// All subsets of {0..n-1} with at least `min_size` elements.
inline std::vector<std::vector<std::size_t>> subsets(std::size_t n, std::size_t min_size) {
  std::vector<std::vector<std::size_t>> out;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    std::vector<std::size_t> s;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (1u << i)) s.push_back(i);
    if (s.size() >= min_size) out.push_back(s);
  }
  return out;
}

// Empty-circle Delaunay triangles of a planar point list by brute force over
// all triples; cocircular ties are kept.
inline std::set<std::vector<int>> brute_delaunay_2d(const std::vector<Eigen::Vector2d>& p, double slack = 1e-12) {
  std::set<std::vector<int>> out;
  const int n = static_cast<int>(p.size());
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      for (int c = b + 1; c < n; ++c) {
        const Eigen::Vector2d B = p[b] - p[a], C = p[c] - p[a];
        const double d = 2.0 * (B.x() * C.y() - B.y() * C.x());
        if (std::abs(d) < 1e-14) continue;
        const Eigen::Vector2d u((C.y() * B.squaredNorm() - B.y() * C.squaredNorm()) / d,
                                (B.x() * C.squaredNorm() - C.x() * B.squaredNorm()) / d);
        const Eigen::Vector2d centre = p[a] + u;
        const double r = u.norm();
        bool empty = true;
        for (int q = 0; q < n && empty; ++q)
          if (q != a && q != b && q != c && (p[q] - centre).norm() < r - slack) empty = false;
        if (empty) out.insert({a, b, c});
      }
  return out;
}

}  // namespace testsupport
