#include "support.hpp"

#include "manidel/complex.hpp"
#include "manidel/perturbation.hpp"

#include <doctest.h>

using namespace manidel;
using namespace testsupport;

namespace {

struct TorusRun {
  Atlas atlas;
  AlgorithmParams params;
  RunReport report;
};

const TorusRun& torus_run() {
  static const TorusRun r = [] {
    TorusRun t{build_flat_torus(200, 0.5, 1), practical_params(2, 0.5), {}};
    t.params.seed = 1;
    t.report = run_extended(t.atlas, t.params);
    return t;
  }();
  return r;
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("torus run: few attempts, small moves, empty scan") {
  const TorusRun& t = torus_run();
  CHECK(t.report.attempts.size() == 200);
  CHECK(t.report.mean_attempts <= 2.0);
  CHECK(t.report.scan_run);
  CHECK(t.report.scan_empty());
  for (const auto& [i, d] : t.report.displacement) CHECK(d <= t.params.rho0 * (1 + 1e-12));
}

TEST_CASE("torus run: every chart agrees on every moved point") {
  const Atlas& a = torus_run().atlas;
  double worst = 0.0;
  for (const auto& [key, tr] : a.transitions) {
    const auto [i, j] = key;
    const Patch& pi = a.patch(i);
    const Patch& pj = a.patch(j);
    for (const auto& [l, x] : pi.points) {
      if (!pj.contains(l) || (x - pi.origin).norm() > 6.0 * pi.eps || !tr.in_domain(x)) continue;
      worst = std::max(worst, (tr.fn->forward(x) - pj.at(l)).norm() / pi.eps);
    }
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("torus run: perturbed patches are still nets") {
  const TorusRun& t = torus_run();
  for (Label i : t.atlas.labels()) {
    const Patch& p = t.atlas.patch(i);
    const NetParams np = t.params.perturbed(p.eps);
    // density is only attested where the chart holds every point within eps'
    const Ball domain{p.origin, std::min(6.0 * p.eps, p.chart_radius - np.eps)};
    const NetCertificate c = certify_net(p, domain, np.mu, np.eps, p.eps / 8);
    CHECK_MESSAGE(c.dense_ok, "patch " << i);
    CHECK_MESSAGE(c.separated_ok, "patch " << i);
  }
}

TEST_CASE("torus run: assembled complex is the periodic Delaunay triangulation") {
  const TorusRun& t = torus_run();
  const StarMap stars = build_stars(t.atlas);
  const ConsistencyReport cons = check_star_consistency(stars, 2);
  REQUIRE(cons.ok());
  const AbstractComplex c = assemble(stars, 2);
  ManifoldReport mr = manifold_check(c);
  mr.star_consistency_ok = true;
  CHECK(mr.ok());
  CHECK(c.euler_characteristic() == 0);
  CHECK(c.of_dim(2).size() == 400);
  CHECK(oracle_compare(c, torus_delaunay_oracle(t.atlas)).empty());

  const ProtectionSweep sweep = protection_sweep(t.atlas, stars, t.params);
  CHECK(sweep.ok());
  CHECK(sweep.min_margin_over_delta >= 1.0);

  const PLMetric metric = assign_pl_metric(t.atlas, c);
  CHECK(metric.fallback_edges.empty());
  for (const auto& [e, l] : metric.edge_lengths) {
    const Patch& p = t.atlas.patch(e.first);
    CHECK(l == doctest::Approx((p.at(e.second) - p.at(e.first)).norm()).epsilon(1e-12));
  }
}

}  // TEST_SUITE
