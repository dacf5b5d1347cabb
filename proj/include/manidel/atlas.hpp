#pragma once

#include "manidel/common.hpp"
#include "manidel/patch_delaunay.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace manidel {

// Chart change phi_ij and its inverse phi_ji.
class TransitionFn {
 public:
  virtual ~TransitionFn() = default;
  virtual Point forward(const Point& x) const = 0;
  virtual Point inverse(const Point& y) const = 0;
  virtual std::string kind() const = 0;
};

// y = x + shift
class Translation final : public TransitionFn {
 public:
  explicit Translation(Point shift) : shift_(std::move(shift)) {}
  Point forward(const Point& x) const override { return x + shift_; }
  Point inverse(const Point& y) const override { return y - shift_; }
  std::string kind() const override { return "translation"; }
  const Point& shift() const { return shift_; }

 private:
  Point shift_;
};

// y = rotation * x + shift, rotation orthogonal.
class Rigid final : public TransitionFn {
 public:
  Rigid(Eigen::MatrixXd rotation, Point shift);
  Point forward(const Point& x) const override { return rotation_ * x + shift_; }
  Point inverse(const Point& y) const override { return rotation_.transpose() * (y - shift_); }
  std::string kind() const override { return "rigid"; }
  const Eigen::MatrixXd& rotation() const { return rotation_; }
  const Point& shift() const { return shift_; }

 private:
  Eigen::MatrixXd rotation_;
  Point shift_;
};

// Matched pairs (x_k, y_k). The displacement y - x is interpolated with
// inverse-distance weights |x - x_k|^-2, exact at the nodes; the inverse runs
// the fixed-point iteration x <- y - displacement(x).
class Tabulated final : public TransitionFn {
 public:
  Tabulated(std::vector<Point> from, std::vector<Point> to);
  Point forward(const Point& x) const override;
  Point inverse(const Point& y) const override;
  std::string kind() const override { return "tabulated"; }
  const std::vector<Point>& from() const { return from_; }
  const std::vector<Point>& to() const { return to_; }

 private:
  Point displacement(const Point& x) const;
  std::vector<Point> from_, to_;
};

// Tangent frame of an exponential chart on a round sphere: columns are the
// unit centre c and an orthonormal basis e1, e2 of the tangent plane.
using SphereFrame = Eigen::Matrix3d;

// Ambient point of the sphere of `radius` at chart coordinates u.
Eigen::Vector3d sphere_exp(const SphereFrame& f, double radius, const Point& u);
// Chart coordinates of an ambient point; OutOfDomain at the antipode.
Point sphere_log(const SphereFrame& f, double radius, const Eigen::Vector3d& x);

// log_j o exp_i through ambient coordinates.
class SphereExp final : public TransitionFn {
 public:
  SphereExp(SphereFrame from, SphereFrame to, double radius)
      : from_(from), to_(to), radius_(radius) {}
  Point forward(const Point& x) const override {
    return sphere_log(to_, radius_, sphere_exp(from_, radius_, x));
  }
  Point inverse(const Point& y) const override {
    return sphere_log(from_, radius_, sphere_exp(to_, radius_, y));
  }
  std::string kind() const override { return "sphere_exp"; }
  const SphereFrame& from() const { return from_; }
  const SphereFrame& to() const { return to_; }
  double radius() const { return radius_; }

 private:
  SphereFrame from_, to_;
  double radius_;
};

// phi_ij with domain U_ij, an intersection of balls in chart i.
struct Transition {
  std::shared_ptr<const TransitionFn> fn;
  std::vector<Ball> domain;
  bool in_domain(const Point& x, double slack = 0.0) const;
};

struct FixtureInfo {
  std::string kind;  // "torus" or "sphere"
  double radius = 1.0;
  std::map<Label, SphereFrame> frames;
};

struct Atlas {
  int m = 2;
  double mu0 = 0.5;
  double nu0 = 0.0;
  double xi0_declared = 0.0;
  std::map<Label, Patch> patches;
  std::map<std::pair<Label, Label>, Transition> transitions;
  std::optional<FixtureInfo> fixture;
  Tolerances tol{};

  int n() const { return static_cast<int>(patches.size()); }
  std::vector<Label> labels() const;
  Patch& patch(Label i);
  const Patch& patch(Label i) const;
  // N_i without i itself.
  std::vector<Label> neighbors(Label i) const;
  bool has_transition(Label i, Label j) const { return transitions.count({i, j}) != 0; }
  const Transition& transition(Label i, Label j) const;
  // Current coordinates of label l in its own chart.
  const Point& own(Label l) const { return patch(l).at(l); }
  // Ambient embedding of label l for the built-in fixtures: a point of the
  // unit square for the torus, of R^3 for the sphere.
  Eigen::VectorXd embed(Label l) const;
};

struct DistortionOptions {
  int samples = 256;
  std::uint64_t seed = 1;
};

// Max over sampled pairs in B(p_i, 6 eps_i) ∩ B(p_j, 9 eps_i) ∩ U_ij of
// |d_i - d_j o phi| / d_i.
double estimate_distortion(const Atlas& a, Label i, Label j, const DistortionOptions& opts = {});

struct ValidationIssue {
  std::string check;
  Label i = -1;
  Label j = -1;
  double magnitude = 0.0;
  bool warning = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  int patches_checked = 0;
  int transitions_checked = 0;
  double max_distortion = 0.0;
  bool ok() const;
  int failures(const std::string& check) const;
};

struct ValidationOptions {
  double grid_fraction = 0.25;  // density grid pitch over eps_i
  int distortion_samples = 64;
  int boundary_samples = 256;
  std::uint64_t seed = 1;
  bool check_distortion = true;
  int jobs = 1;
};

ValidationReport validate_input(const Atlas& a, const ValidationOptions& opts = {});

struct PointUpdate {
  Label patch;
  Point coords;
};

// Moves label i to x in chart i and to phi_ij(x) in every chart j holding i.
// Nothing is written if some required U_ij misses x.
std::vector<PointUpdate> propagate_point(Atlas& a, Label i, const Point& x);

// Unit flat torus, one nearest-image chart per sample.
Atlas build_flat_torus(int n, double mu0, std::uint64_t seed);

// Round sphere with azimuthal-equidistant (inverse exponential) charts.
Atlas build_sphere_exp(int n, double radius, double mu0, std::uint64_t seed);

// Planar point set: every label gets a copy of the whole set as its patch,
// joined by identity transitions.
Atlas planar_atlas(const std::map<Label, Point>& points, double eps, double mu0);

// JSON interchange.
std::string atlas_to_json(const Atlas& a);
Atlas atlas_from_json(const std::string& text);
void write_atlas(const Atlas& a, const std::string& path);
Atlas read_atlas(const std::string& path);

}  // namespace manidel
