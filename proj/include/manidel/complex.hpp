#pragma once

#include "manidel/atlas.hpp"
#include "manidel/common.hpp"
#include "manidel/patch_delaunay.hpp"
#include "manidel/perturbation.hpp"

#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace manidel {

using StarMap = std::map<Label, SimplexSet>;

struct AbstractComplex {
  int m = 0;
  SimplexSet simplices;  // face-closed
  StarMap stars;         // i -> simplices containing i, with their faces

  std::vector<Label> vertices() const;
  SimplexSet of_dim(int k) const;
  // Sum over k of (-1)^k times the number of k-simplices.
  long euler_characteristic() const;
};

// star(p'_i; Del(P'_i)) for every patch, keyed by global label.
StarMap build_stars(const Atlas& a, const DelaunayOptions& opts = {});

struct StarMismatch {
  Label i = -1;
  Label j = -1;
  std::vector<SimplexKey> only_in_i;  // m-simplices of star(i) containing j, absent from star(j)
  std::vector<SimplexKey> only_in_j;
};

struct ConsistencyReport {
  std::vector<StarMismatch> mismatches;
  std::size_t pairs_checked = 0;
  bool ok() const { return mismatches.empty(); }
};

// For every edge {i, j} of star(i): the m-simplices of star(i) containing j
// must equal those of star(j) containing i.
ConsistencyReport check_star_consistency(const StarMap& stars, int m);

// Union of the stars; throws InconsistentStars when they disagree.
AbstractComplex assemble(const StarMap& stars, int m);

// Closes `simplices` under faces and indexes stars.
AbstractComplex complex_from_simplices(int m, const SimplexSet& simplices);

struct ManifoldReport {
  bool is_pure = false;
  bool ridge_degrees_ok = false;
  bool links_ok = false;
  // Links are only fully recognised for m <= 3.
  bool partial = false;
  std::optional<bool> star_consistency_ok;
  long euler_characteristic = 0;
  std::vector<Label> bad_links;
  std::vector<SimplexKey> bad_ridges;
  bool ok() const {
    return is_pure && ridge_degrees_ok && links_ok && star_consistency_ok.value_or(true);
  }
};

ManifoldReport manifold_check(const AbstractComplex& c);

struct PLMetric {
  std::map<std::pair<Label, Label>, double> edge_lengths;
  std::map<SimplexKey, double> min_gram_eigenvalue;  // divided by the longest edge squared
  std::vector<std::pair<Label, Label>> fallback_edges;  // d_j unavailable, used d_i alone
  double length(Label i, Label j) const;
};

// l_ij = (d_i + d_j) / 2 with chart distances; throws NotRealizable listing
// every simplex whose Gram matrix is not positive definite.
PLMetric assign_pl_metric(const Atlas& a, const AbstractComplex& c, const Tolerances& tol = kDefaultTolerances);
// Checks realizability of an explicit metric.
void check_realizable(const AbstractComplex& c, PLMetric& metric, const Tolerances& tol = kDefaultTolerances);

struct GeodesicCheck {
  double max_relative_error = 0.0;  // max over edges of |l - great-circle| / l
  double bound = 0.0;               // 6 Lambda (6 eps)^2 with Lambda = 1 / radius^2
  std::size_t edges = 0;
  bool ok() const { return max_relative_error <= bound; }
};

// Edge lengths against great-circle distances of the embedded sphere fixture.
GeodesicCheck sphere_geodesic_check(const Atlas& a, const PLMetric& metric);

struct OracleDiff {
  std::vector<SimplexKey> only_in_complex;
  std::vector<SimplexKey> only_in_oracle;
  bool empty() const { return only_in_complex.empty() && only_in_oracle.empty(); }
};

// Symmetric difference of the m-simplex sets.
OracleDiff oracle_compare(const AbstractComplex& c, const AbstractComplex& oracle);

// Delaunay triangulation of a point set on the unit flat torus, from the 3x3
// periodic lift. Points are indexed by label.
AbstractComplex torus_delaunay_oracle(const std::map<Label, Eigen::Vector2d>& points);
// Same, using the current positions of a torus fixture atlas.
AbstractComplex torus_delaunay_oracle(const Atlas& a);

struct ProtectionFailure {
  Label patch = -1;
  SimplexKey simplex;
  double margin = 0.0;     // protection margin
  double thickness = 0.0;
  bool protected_ok = false;
  bool good_ok = false;
};

struct ProtectionSweep {
  std::size_t checked = 0;
  std::vector<ProtectionFailure> failures;
  double min_margin_over_delta = std::numeric_limits<double>::infinity();
  bool ok() const { return failures.empty(); }
};

// Every m-simplex of every star: delta-protected in its patch and Gamma0-good.
ProtectionSweep protection_sweep(const Atlas& a, const StarMap& stars, const AlgorithmParams& params);

// JSON {m, vertices, simplices, edge_lengths:[[i, j, l]]}.
std::string complex_to_json(const AbstractComplex& c, const PLMetric* metric = nullptr);
std::pair<AbstractComplex, PLMetric> complex_from_json(const std::string& text);
void write_complex_json(const AbstractComplex& c, const PLMetric* metric, const std::string& path);
std::pair<AbstractComplex, PLMetric> read_complex_json(const std::string& path);

// ASCII OFF of the m-simplices with one coordinate row per vertex (padded to
// three columns). Requires m <= 3.
std::string complex_to_off(const AbstractComplex& c, const std::map<Label, Point>& coords);
void write_complex_off(const AbstractComplex& c, const std::map<Label, Point>& coords, const std::string& path);
// Embedding used for OFF: torus fundamental domain, sphere ambient, else chart
// coordinates of each label in its own patch.
std::map<Label, Point> export_coordinates(const Atlas& a);

}  // namespace manidel
