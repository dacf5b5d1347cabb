#include "manidel/random.hpp"
#include "manidel/simplex.hpp"

#include <algorithm>
#include <cmath>

namespace manidel {
namespace {

struct Tally {
  LemmaOutcome out;
  double slack;

  explicit Tally(std::string name, double s) : slack(s) { out.name = std::move(name); }

  // lhs <= rhs, with relative slack and an absolute floor at `scale`.
  void check(double lhs, double rhs, double scale) {
    ++out.checked;
    if (rhs > 0.0) out.worst_ratio = std::max(out.worst_ratio, lhs / rhs);
    if (lhs > rhs * (1.0 + slack) + 1e-12 * scale) ++out.violations;
  }
  void skip() { ++out.skipped; }
};

// Vertices uniform in the unit ball of R^k, resampled until the simplex is at
// least `floor` thick.
Simplex random_thick_simplex(Rng& rng, int k, double floor) {
  const Point origin = Point::Zero(k);
  for (;;) {
    std::vector<Point> pts;
    for (int i = 0; i <= k; ++i) pts.push_back(rng.in_ball(origin, 1.0));
    Simplex s = Simplex::from_points(std::move(pts));
    if (thickness(s) >= floor) return s;
  }
}

double max_edge_change(const Simplex& a, const Simplex& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j)
      worst = std::max(worst, std::abs((a.points[i] - a.points[j]).norm() -
                                       (b.points[i] - b.points[j]).norm()));
  return worst;
}

// Move the vertex realising the smallest altitude to position 1, so that the
// upper singular-value bound applies with p_0 as origin.
Simplex min_altitude_second(const Simplex& s) {
  std::size_t best = 0;
  double best_alt = altitude(s, 0);
  for (std::size_t v = 1; v < s.size(); ++v) {
    const double a = altitude(s, v);
    if (a < best_alt) {
      best_alt = a;
      best = v;
    }
  }
  Simplex out = s;
  if (best == 0) {
    std::swap(out.points[0], out.points[1]);
    std::swap(out.labels[0], out.labels[1]);
  } else if (best != 1) {
    std::swap(out.points[1], out.points[best]);
    std::swap(out.labels[1], out.labels[best]);
  }
  return out;
}

}  // namespace

LemmaReport check_distortion_lemmas(const LemmaOptions& opts) {
  if (opts.trials < 1 || opts.k < 1)
    throw Error(ErrorKind::InvalidInput, "lemma checks need trials >= 1 and k >= 1");
  const int k = opts.k;
  const double sk = std::sqrt(static_cast<double>(k));
  Rng rng(mix_seed(opts.seed, static_cast<std::uint64_t>(k)));

  Tally sing_lower("a_singular_value_lower", opts.slack);
  Tally sing_upper("a_singular_value_upper", opts.slack);
  Tally crude_radius("b_crude_radius", opts.slack);
  Tally gram_entries("c_gram_error_entries", opts.slack);
  Tally gram_norm("c_gram_error_norm", opts.slack);
  Tally thick("d_thickness_under_distortion", opts.slack);
  Tally radius("e_circumradius_drift", opts.slack);
  Tally centre("f_circumcentre_drift", opts.slack);
  Tally align("g_close_alignment", opts.slack);

  for (std::int64_t t = 0; t < opts.trials; ++t) {
    const Simplex s = min_altitude_second(random_thick_simplex(rng, k, opts.thickness_floor));
    const double ups = thickness(s);
    const double delta = longest_edge(s);
    const Eigen::MatrixXd p = edge_matrix(s);
    const double sigma_k = smallest_singular_value(s);
    const CircumBall ball = circumcenter_radius(s);

    sing_lower.check(sk * ups * delta, sigma_k, delta);
    sing_upper.check(sigma_k, k * ups * delta, delta);
    crude_radius.check(ball.radius, delta / (2.0 * ups), delta);

    // Edge-length perturbation: each vertex moves by at most xi*delta/2.
    const double xi_target = opts.xi0 * rng.uniform();
    Simplex moved = s;
    for (auto& q : moved.points) q += rng.in_ball(Point::Zero(k), 0.5 * xi_target * delta);
    const double xi = max_edge_change(s, moved) / delta;
    const Eigen::MatrixXd pt = edge_matrix(moved);

    if (xi <= 2.0 / 3.0) {
      const Eigen::MatrixXd e = pt.transpose() * pt - p.transpose() * p;
      gram_entries.check(e.cwiseAbs().maxCoeff(), 4.0 * xi * delta * delta, delta * delta);
      Eigen::JacobiSVD<Eigen::MatrixXd> svd_e(e);
      gram_norm.check(svd_e.singularValues()(0), 4.0 * k * xi * delta * delta, delta * delta);

      // Polar factor of A = P~ P^{-1}.
      const Eigen::MatrixXd a = pt * p.inverse();
      Eigen::JacobiSVD<Eigen::MatrixXd> svd_a(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
      const Eigen::MatrixXd phi = svd_a.matrixU() * svd_a.matrixV().transpose();
      Eigen::JacobiSVD<Eigen::MatrixXd> svd_d(pt - phi * p);
      align.check(svd_d.singularValues()(0), 4.0 * sk * xi * delta / (ups * ups), delta);
    } else {
      gram_entries.skip();
      gram_norm.skip();
      align.skip();
    }

    if (xi <= std::pow(ups / 2.0, 2)) {
      const double eta2 = 4.0 * xi / (ups * ups);
      thick.check((1.0 - eta2) * sigma_k, smallest_singular_value(moved), delta);
    } else {
      thick.skip();
    }

    if (xi <= std::pow(ups / 4.0, 2)) {
      const double r_moved = circumcenter_radius(moved).radius;
      radius.check(std::abs(r_moved - ball.radius),
                   16.0 * std::pow(k, 1.5) * ball.radius * xi / std::pow(ups, 3), ball.radius);
    } else {
      radius.skip();
    }

    // Affine map x -> Q (I + H) x + b with symmetric H; its metric distortion
    // on all of R^k is exactly the spectral norm of H.
    const double xi_map_target = opts.xi0 * rng.uniform();
    Eigen::MatrixXd h(k, k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j <= i; ++j) h(i, j) = h(j, i) = rng.normal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig_h(h);
    const double h_norm = eig_h.eigenvalues().cwiseAbs().maxCoeff();
    if (h_norm > 0.0) h *= xi_map_target / h_norm;
    const double xi_map = xi_map_target;
    Eigen::MatrixXd g(k, k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) g(i, j) = rng.normal();
    const Eigen::MatrixXd q = g.householderQr().householderQ();
    const Eigen::MatrixXd lin = q * (Eigen::MatrixXd::Identity(k, k) + h);
    const Point shift = rng.in_ball(Point::Zero(k), 1.0);
    auto phi_map = [&](const Point& x) -> Point { return lin * x + shift; };

    if (xi_map <= std::pow(ups / 4.0, 2)) {
      Simplex mapped = s;
      for (auto& v : mapped.points) v = phi_map(v);
      const CircumBall mapped_ball = circumcenter_radius(mapped);
      const double lhs = (phi_map(ball.center) - mapped_ball.center).norm();
      const double rhs = std::sqrt(42.0 * k * k * xi_map / std::pow(ups, 3)) * ball.radius;
      centre.check(lhs, rhs, ball.radius);
    } else {
      centre.skip();
    }
  }

  LemmaReport report;
  report.k = k;
  report.xi0 = opts.xi0;
  report.trials = opts.trials;
  report.seed = opts.seed;
  for (Tally* tally : {&sing_lower, &sing_upper, &crude_radius, &gram_entries, &gram_norm,
                       &thick, &radius, &centre, &align})
    report.outcomes.push_back(tally->out);
  return report;
}

}  // namespace manidel
