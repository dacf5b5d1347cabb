#pragma once

#include "manidel/common.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace manidel {

// An ordered list of labelled vertices in R^m. Degenerate configurations are
// representable; queries that need a circumcentre report DegenerateSimplex.
struct Simplex {
  std::vector<Label> labels;
  std::vector<Point> points;

  Simplex() = default;
  Simplex(std::vector<Label> l, std::vector<Point> p);
  // Labels 0..k in order.
  static Simplex from_points(std::vector<Point> p);

  int dim() const { return static_cast<int>(points.size()) - 1; }
  int ambient_dim() const { return points.empty() ? 0 : static_cast<int>(points[0].size()); }
  std::size_t size() const { return points.size(); }

  Simplex without(std::size_t vertex) const;
  Simplex face(std::span<const std::size_t> vertices) const;
  // Index of a label, or size() when absent.
  std::size_t index_of(Label label) const;
};

struct CircumBall {
  Point center;
  double radius = 0.0;
};

// m x k matrix whose i-th column is p_i - p_0.
Eigen::MatrixXd edge_matrix(const Simplex& s);

double longest_edge(const Simplex& s);
double shortest_edge(const Simplex& s);

// Smallest singular value of the edge matrix; 0 when k > m.
double smallest_singular_value(const Simplex& s);

bool is_degenerate(const Simplex& s, const Tolerances& tol = kDefaultTolerances);

// Distance from vertex `vertex` to the affine hull of the opposite facet.
double altitude(const Simplex& s, std::size_t vertex,
                const Tolerances& tol = kDefaultTolerances);

double thickness(const Simplex& s, const Tolerances& tol = kDefaultTolerances);

// Centre of the smallest circumscribing ball (it lies in the affine hull).
CircumBall circumcenter_radius(const Simplex& s, const Tolerances& tol = kDefaultTolerances);

// Every face sigma^j (j >= 0) satisfies thickness >= gamma0^j.
bool is_gamma_good(const Simplex& s, double gamma0, const Tolerances& tol = kDefaultTolerances);

// Not gamma0-good, while every facet is.
bool is_flake(const Simplex& s, double gamma0, const Tolerances& tol = kDefaultTolerances);

// Distance from a point to the diametric sphere of s (the boundary of the
// smallest circumscribing ball).
double distance_to_diametric_sphere(const Point& x, const Simplex& s,
                                    const Tolerances& tol = kDefaultTolerances);

// Distance from a point to the circumsphere of s inside its affine hull.
double distance_to_circumsphere(const Point& x, const Simplex& s,
                                const Tolerances& tol = kDefaultTolerances);

class EdgeLengths {
 public:
  explicit EdgeLengths(int k);
  static EdgeLengths of(const Simplex& s);

  int dim() const { return k_; }
  double operator()(int i, int j) const { return table_(i, j); }
  void set(int i, int j, double length);
  const Eigen::MatrixXd& table() const { return table_; }

 private:
  int k_;
  Eigen::MatrixXd table_;
};

struct GramResult {
  Eigen::MatrixXd gram;
  bool positive_definite = false;
  // Upper triangular U with U^T U = gram when positive definite.
  Eigen::MatrixXd factor;
  double min_eigenvalue = 0.0;
};

GramResult gram_from_edge_lengths(const EdgeLengths& e, const Tolerances& tol = kDefaultTolerances);

// Numeric checks of the simplex distortion inequalities on random simplices.
struct LemmaOutcome {
  std::string name;
  std::int64_t checked = 0;
  std::int64_t skipped = 0;     // precondition not met by the sample
  std::int64_t violations = 0;
  double worst_ratio = 0.0;     // max lhs / rhs over checked samples
};

struct LemmaReport {
  int k = 0;
  double xi0 = 0.0;
  std::int64_t trials = 0;
  std::uint64_t seed = 0;
  std::vector<LemmaOutcome> outcomes;
  std::int64_t total_violations() const;
};

struct LemmaOptions {
  std::int64_t trials = 10000;
  int k = 2;
  double xi0 = 1e-6;
  std::uint64_t seed = 1;
  double thickness_floor = 0.02;
  // Relative slack on every right-hand side, absorbing rounding.
  double slack = 1e-9;
};

LemmaReport check_distortion_lemmas(const LemmaOptions& opts);

}  // namespace manidel
