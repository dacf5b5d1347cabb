#pragma once

#include "manidel/common.hpp"
#include "manidel/simplex.hpp"

#include <limits>
#include <map>
#include <set>
#include <vector>

namespace manidel {

struct Ball {
  Point center;
  double radius = 0.0;
  bool contains(const Point& x, double slack = 0.0) const {
    return (x - center).norm() <= radius + slack;
  }
};

// One coordinate chart: labels mapped to points of R^m.
struct Patch {
  Label id = 0;
  double eps = 0.0;
  // Unperturbed position of the centre point p_i.
  Point origin;
  // Radius about `origin` on which the chart is injective.
  double chart_radius = std::numeric_limits<double>::infinity();
  std::map<Label, Point> points;

  int dim() const { return static_cast<int>(origin.size()); }
  bool contains(Label label) const { return points.count(label) != 0; }
  const Point& at(Label label) const;
  Simplex simplex(const SimplexKey& key) const;
  std::vector<Label> labels_within(const Point& c, double r) const;
  // Q'_i: current points within 6 eps of the unperturbed centre.
  Ball region_of_interest() const { return {origin, 6.0 * eps}; }
};

using SimplexSet = std::set<SimplexKey>;

struct DelaunayOptions {
  // Candidate m-simplices need a circumradius below this; 0 means 1.25 eps,
  // which bounds Delaunay radii of any perturbed net with rho0 <= mu0/4.
  double radius_cutoff = 0.0;
  Tolerances tol{};
};

// Closed under faces; every m-simplex has an empty open circumball centred in
// `region`.
SimplexSet delaunay_complex(const Patch& p, const Ball& region, const DelaunayOptions& opts = {});

// The m-simplices of the complex that contain `label`, plus their faces.
SimplexSet star(const Patch& p, Label label, const Ball& region, const DelaunayOptions& opts = {});

SimplexSet close_under_faces(const SimplexSet& simplices);
SimplexSet simplices_of_dim(const SimplexSet& simplices, int dim);

// Smallest d(q, C) - R over points q not in s.
double protection_margin(const Patch& p, const SimplexKey& s, const Tolerances& tol = kDefaultTolerances);

bool is_delta_protected(const Patch& p, const SimplexKey& s, double delta,
                        const Tolerances& tol = kDefaultTolerances);

struct NetCertificate {
  bool dense_ok = false;
  double worst_uncovered = 0.0;    // max over grid of the distance to the point set
  double certified_density = 0.0;  // worst_uncovered + grid_step * sqrt(m) / 2
  bool separated_ok = false;
  double min_distance = 0.0;
  double mu = 0.0;                 // min_distance / eps
  double eps = 0.0;
};

// Density on a grid of pitch grid_step over `domain`; separation from pairs
// closer than 2 eps among the points within eps of the domain.
NetCertificate certify_net(const std::vector<Point>& points, const Ball& domain, double mu,
                           double eps, double grid_step);
NetCertificate certify_net(const Patch& p, const Ball& domain, double mu, double eps,
                           double grid_step);

struct NetParams {
  double mu = 0.0;
  double eps = 0.0;
};

// Net parameters after a rho0*eps perturbation.
NetParams perturbed_net_params(double mu, double eps, double rho0);

// Uniform-cell hash of points in R^m for radius queries.
class PointGrid {
 public:
  PointGrid(const std::vector<Point>& points, double cell);
  std::vector<std::size_t> within(const Point& x, double r) const;
  const std::vector<Point>& points() const { return points_; }

 private:
  std::vector<long long> cell_of(const Point& x) const;
  std::vector<Point> points_;
  double cell_;
  int dim_;
  std::map<std::vector<long long>, std::vector<std::size_t>> cells_;
};

// Calls f on every k-subset of {0..n-1} in lexicographic order.
template <typename F>
void for_each_combination(std::size_t n, std::size_t k, F&& f) {
  if (k > n) return;
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  for (;;) {
    f(static_cast<const std::vector<std::size_t>&>(idx));
    if (k == 0) return;
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + (i - 1)) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace manidel
