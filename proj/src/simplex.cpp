#include "manidel/simplex.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>

namespace manidel {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DegenerateFacet: return "DegenerateFacet";
    case ErrorKind::DegenerateSimplex: return "DegenerateSimplex";
    case ErrorKind::DegeneratePatch: return "DegeneratePatch";
    case ErrorKind::UnknownLabel: return "UnknownLabel";
    case ErrorKind::OutOfDomain: return "OutOfDomain";
    case ErrorKind::SamplingFailed: return "SamplingFailed";
    case ErrorKind::InfeasibleParams: return "InfeasibleParams";
    case ErrorKind::AttemptsExhausted: return "AttemptsExhausted";
    case ErrorKind::InconsistentStars: return "InconsistentStars";
    case ErrorKind::NotRealizable: return "NotRealizable";
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

SimplexKey make_key(std::vector<Label> labels) {
  std::sort(labels.begin(), labels.end());
  return labels;
}

Simplex::Simplex(std::vector<Label> l, std::vector<Point> p)
    : labels(std::move(l)), points(std::move(p)) {
  if (labels.size() != points.size())
    throw Error(ErrorKind::InvalidInput, "simplex labels and points differ in count");
}

Simplex Simplex::from_points(std::vector<Point> p) {
  std::vector<Label> l(p.size());
  std::iota(l.begin(), l.end(), 0);
  return Simplex(std::move(l), std::move(p));
}

Simplex Simplex::without(std::size_t vertex) const {
  Simplex out;
  for (std::size_t i = 0; i < size(); ++i) {
    if (i == vertex) continue;
    out.labels.push_back(labels[i]);
    out.points.push_back(points[i]);
  }
  return out;
}

Simplex Simplex::face(std::span<const std::size_t> vertices) const {
  Simplex out;
  for (std::size_t v : vertices) {
    out.labels.push_back(labels.at(v));
    out.points.push_back(points.at(v));
  }
  return out;
}

std::size_t Simplex::index_of(Label label) const {
  auto it = std::find(labels.begin(), labels.end(), label);
  return static_cast<std::size_t>(it - labels.begin());
}

Eigen::MatrixXd edge_matrix(const Simplex& s) {
  const int k = s.dim();
  Eigen::MatrixXd p(s.ambient_dim(), std::max(k, 0));
  for (int i = 1; i <= k; ++i) p.col(i - 1) = s.points[i] - s.points[0];
  return p;
}

double longest_edge(const Simplex& s) {
  double best = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = i + 1; j < s.size(); ++j)
      best = std::max(best, (s.points[i] - s.points[j]).norm());
  return best;
}

double shortest_edge(const Simplex& s) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = i + 1; j < s.size(); ++j)
      best = std::min(best, (s.points[i] - s.points[j]).norm());
  return best;
}

double smallest_singular_value(const Simplex& s) {
  const int k = s.dim();
  if (k < 1) return 0.0;
  if (k > s.ambient_dim()) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(edge_matrix(s));
  return svd.singularValues()(k - 1);
}

bool is_degenerate(const Simplex& s, const Tolerances& tol) {
  if (s.dim() < 1) return false;
  const double delta = longest_edge(s);
  if (delta == 0.0) return true;
  return smallest_singular_value(s) < tol.rank * delta;
}

double altitude(const Simplex& s, std::size_t vertex, const Tolerances& tol) {
  if (s.dim() < 1) throw Error(ErrorKind::InvalidInput, "altitude needs k >= 1");
  Simplex facet = s.without(vertex);
  const Point& p = s.points.at(vertex);
  if (facet.size() == 1) return (p - facet.points[0]).norm();
  if (is_degenerate(facet, tol))
    throw Error(ErrorKind::DegenerateFacet, "facet opposite the vertex is degenerate");
  Eigen::MatrixXd f = edge_matrix(facet);
  Eigen::VectorXd v = p - facet.points[0];
  Eigen::VectorXd coeff = f.colPivHouseholderQr().solve(v);
  return (v - f * coeff).norm();
}

double thickness(const Simplex& s, const Tolerances& tol) {
  const int k = s.dim();
  if (k <= 0) return 1.0;
  if (k > s.ambient_dim()) return 0.0;
  if (is_degenerate(s, tol)) return 0.0;
  const double delta = longest_edge(s);
  double min_alt = std::numeric_limits<double>::infinity();
  for (std::size_t v = 0; v < s.size(); ++v) min_alt = std::min(min_alt, altitude(s, v, tol));
  return std::clamp(min_alt / (k * delta), 0.0, 1.0);
}

CircumBall circumcenter_radius(const Simplex& s, const Tolerances& tol) {
  if (s.size() == 0) throw Error(ErrorKind::InvalidInput, "empty simplex");
  if (s.dim() == 0) return {s.points[0], 0.0};
  if (is_degenerate(s, tol))
    throw Error(ErrorKind::DegenerateSimplex, "no circumcentre for a degenerate simplex");
  const Eigen::MatrixXd p = edge_matrix(s);
  const Eigen::MatrixXd gram = p.transpose() * p;
  const Eigen::VectorXd b = 0.5 * gram.diagonal();
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorKind::DegenerateSimplex, "circumcentre normal equations not positive definite");
  const Eigen::VectorXd lambda = llt.solve(b);
  const Eigen::VectorXd offset = p * lambda;
  CircumBall ball{s.points[0] + offset, offset.norm()};
  const double delta = longest_edge(s);
  for (const Point& q : s.points) {
    if (std::abs((q - ball.center).norm() - ball.radius) > tol.lin * delta)
      throw Error(ErrorKind::DegenerateSimplex, "circumcentre residual above tolerance");
  }
  return ball;
}

bool is_gamma_good(const Simplex& s, double gamma0, const Tolerances& tol) {
  const std::size_t n = s.size();
  if (n > 20) throw Error(ErrorKind::InvalidInput, "simplex too large for face enumeration");
  std::vector<std::size_t> idx;
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    const int count = std::popcount(mask);
    if (count < 2) continue;
    idx.clear();
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (1u << i)) idx.push_back(i);
    const int j = count - 1;
    if (thickness(s.face(idx), tol) < std::pow(gamma0, j)) return false;
  }
  return true;
}

bool is_flake(const Simplex& s, double gamma0, const Tolerances& tol) {
  if (s.dim() < 1) return false;
  // With every facet good, s is bad exactly when its own thickness fails.
  if (thickness(s, tol) >= std::pow(gamma0, s.dim())) return false;
  for (std::size_t v = 0; v < s.size(); ++v)
    if (!is_gamma_good(s.without(v), gamma0, tol)) return false;
  return true;
}

double distance_to_diametric_sphere(const Point& x, const Simplex& s, const Tolerances& tol) {
  const CircumBall ball = circumcenter_radius(s, tol);
  return std::abs((x - ball.center).norm() - ball.radius);
}

double distance_to_circumsphere(const Point& x, const Simplex& s, const Tolerances& tol) {
  const CircumBall ball = circumcenter_radius(s, tol);
  const Eigen::VectorXd v = x - ball.center;
  if (s.dim() == 0) return v.norm();
  const Eigen::MatrixXd p = edge_matrix(s);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(p);
  const Eigen::MatrixXd basis =
      qr.householderQ() * Eigen::MatrixXd::Identity(p.rows(), p.cols());
  const Eigen::VectorXd along = basis * (basis.transpose() * v);
  const double normal = (v - along).norm();
  const double radial = along.norm() - ball.radius;
  return std::hypot(normal, radial);
}

EdgeLengths::EdgeLengths(int k) : k_(k), table_(Eigen::MatrixXd::Zero(k + 1, k + 1)) {
  if (k < 0) throw Error(ErrorKind::InvalidInput, "negative simplex dimension");
}

EdgeLengths EdgeLengths::of(const Simplex& s) {
  EdgeLengths e(s.dim());
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = i + 1; j < s.size(); ++j)
      e.set(static_cast<int>(i), static_cast<int>(j), (s.points[i] - s.points[j]).norm());
  return e;
}

void EdgeLengths::set(int i, int j, double length) {
  if (i == j || !(length > 0.0) || !std::isfinite(length))
    throw Error(ErrorKind::InvalidInput, "edge lengths must be positive and finite");
  table_(i, j) = length;
  table_(j, i) = length;
}

GramResult gram_from_edge_lengths(const EdgeLengths& e, const Tolerances& tol) {
  const int k = e.dim();
  GramResult r;
  r.gram.resize(k, k);
  for (int i = 1; i <= k; ++i)
    for (int j = 1; j <= k; ++j) {
      const double a = e(0, i), b = e(0, j), c = e(i, j);
      r.gram(i - 1, j - 1) = 0.5 * (a * a + b * b - c * c);
    }
  if (k == 0) {
    r.positive_definite = true;
    r.factor.resize(0, 0);
    return r;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(r.gram, Eigen::EigenvaluesOnly);
  r.min_eigenvalue = eig.eigenvalues()(0);

  // Plain Cholesky with an explicit pivot floor so that singular Gram
  // matrices (collinear lengths) are rejected rather than factored.
  const double scale = r.gram.diagonal().maxCoeff();
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(k, k);
  r.positive_definite = scale > 0.0;
  for (int j = 0; j < k && r.positive_definite; ++j) {
    double d = r.gram(j, j) - l.row(j).head(j).squaredNorm();
    if (d <= tol.psd * scale) {
      r.positive_definite = false;
      break;
    }
    l(j, j) = std::sqrt(d);
    for (int i = j + 1; i < k; ++i)
      l(i, j) = (r.gram(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / l(j, j);
  }
  if (r.positive_definite) r.factor = l.transpose();
  return r;
}

std::int64_t LemmaReport::total_violations() const {
  std::int64_t total = 0;
  for (const auto& o : outcomes) total += o.violations;
  return total;
}

}  // namespace manidel
