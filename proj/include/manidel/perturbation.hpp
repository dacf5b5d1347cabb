#pragma once

#include "manidel/atlas.hpp"
#include "manidel/common.hpp"
#include "manidel/patch_delaunay.hpp"
#include "manidel/random.hpp"
#include "manidel/simplex.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace manidel {

// A named inequality among the parameters, evaluated at derivation time.
struct Constraint {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool ok = false;
};

struct ParamOverrides {
  std::optional<double> gamma0;
  std::optional<double> delta0;
  std::optional<double> alpha0;
  std::optional<double> alpha_tilde0;
};

struct AlgorithmParams {
  int m = 2;
  double mu0 = 0.5;
  double rho0 = 0.0;
  double rho_tilde0 = 0.0;
  double gamma0 = 0.0;
  double delta0 = 0.0;
  double alpha0 = 0.0;
  double alpha_tilde0 = 0.0;
  double xi0 = 0.0;
  double nu0 = 0.0;
  double C = 0.0;
  std::int64_t max_attempts = 10000;
  std::uint64_t seed = 1;
  std::vector<std::string> overridden;
  std::vector<Constraint> constraints;
  bool p2_prune = false;

  bool certified() const { return overridden.empty(); }
  bool constraints_hold() const;
  NetParams perturbed(double eps) const;
  // delta = delta0 mu' eps'_i.
  double delta(double eps) const;
};

// C = m^{3/2} (2/mu0)^{4m^2+5m+21}, computed in log space.
double derivation_constant(int m, double mu0);

// Largest rho0 allowed by rho~0 <= mu0/4.
double default_rho0(double mu0, double xi0, double nu0);

// Fills every constant from (m, mu0, rho0, xi0, nu0); overrides replace the
// derived value and mark the run non-certified. Throws InfeasibleParams when
// the inputs themselves are out of range (rho0 <= 0, rho~0 > mu0/4, ...).
AlgorithmParams derive_params(int m, double mu0, double rho0, double xi0 = 0.0, double nu0 = 0.0,
                              const ParamOverrides& overrides = {});

// Desk-scale preset: Gamma0 = 0.01, delta0 = Gamma0^{m+1}, and the hoop
// constants at 2^-32 of their formula values. Entries of `custom` replace
// the preset; a custom Gamma0 also feeds the constants derived from it.
AlgorithmParams practical_params(int m, double mu0, double xi0 = 0.0, double nu0 = 0.0,
                                 std::optional<double> rho0 = std::nullopt,
                                 const ParamOverrides& custom = {});
inline constexpr double kPracticalGamma0 = 0.01;
inline constexpr double kPracticalAlphaScale = 0x1p-32;

// Throws InfeasibleParams unless every derivation constraint holds and
// delta is resolvable in double precision for a patch of radius eps. When the
// atlas distortion scales as xi0 = xi_per_eps2 * eps^2 (curved fixtures), the
// message also states the eps the distortion constraints would need.
void require_certified(const AlgorithmParams& p, double eps, const Tolerances& tol = kDefaultTolerances,
                       double xi_per_eps2 = 0.0);

// S_i: label sets of m-simplices among the labels of patch i within
// (5 + 3 mu0 / 2) eps_i of p_i, excluding i.
std::vector<SimplexKey> neighborhood_complex(const Atlas& a, Label i);
std::vector<SimplexKey> neighborhood_complex(const Patch& p, Label i, double mu0,
                                             const Point& centre);

struct Rejection {
  SimplexKey simplex;
  double distance = 0.0;  // |d(x, C) - R|
};

struct GoodPerturbation {
  bool good = true;
  std::optional<Rejection> witness;
};

// Circumspheres of the m-simplices of S_i, optionally restricted to those
// that can come within `threshold` of B(centre, reach).
class ShellSet {
 public:
  ShellSet(const Patch& p, const std::vector<SimplexKey>& simplices, double threshold,
           const Tolerances& tol = kDefaultTolerances);
  // All m-simplices over `labels`, keeping only shells that can come within
  // `threshold` of `reach`. Never materialises the full simplex list.
  ShellSet(const Patch& p, const std::vector<Label>& labels, double threshold, const Ball& reach,
           const Tolerances& tol = kDefaultTolerances);
  void restrict_to(const Point& centre, double reach);
  GoodPerturbation test(const Point& x) const;
  std::size_t size() const { return shells_.size(); }
  double threshold() const { return threshold_; }

 private:
  struct Shell {
    Point center;
    double radius;
    std::size_t simplex;
  };
  std::vector<SimplexKey> simplices_;
  std::vector<Shell> shells_;
  double threshold_;
};

// No m-simplex of the current S_i has its circumsphere within 2 alpha~0 eps_i of x.
GoodPerturbation is_good_perturbation(const Atlas& a, Label i, const Point& x,
                                      const AlgorithmParams& params);

struct PerturbOutcome {
  Point x;
  std::int64_t attempts = 0;
  std::size_t shells = 0;
};

// Draws x uniform in the closed ball B(p_i, rho0 eps_i) about the unperturbed
// centre until x is good, then propagates it.
PerturbOutcome perturb_point(Atlas& a, Label i, const AlgorithmParams& params, Rng& rng);

struct ForbiddenConfig {
  SimplexKey simplex;
  Label witness_vertex = -1;
  Point witness_center;
  double witness_radius = 0.0;
  double witness_distance = 0.0;
  Label patch_id = -1;
};

struct ScanOptions {
  bool p2_prune = false;
  // Candidate diameter bound; 0 means 2.5 eps'.
  double diameter_bound = 0.0;
  Tolerances tol{};
};

// Forbidden configurations among the points of `p` inside `region`.
std::vector<ForbiddenConfig> forbidden_scan(const Patch& p, const Ball& region, double eps_prime,
                                            double delta, double gamma0,
                                            const ScanOptions& opts = {});
// Q'_i = P'_i ∩ B(p_i, 6 eps_i), with eps'_i and delta of patch i.
std::vector<ForbiddenConfig> forbidden_scan(const Atlas& a, Label i, const AlgorithmParams& params);

// Smallest |d(p, C) - R| over circumscribing balls B(C, R) of `facet` with
// R < r_max, or +inf when none exists.
double witness_distance(const Simplex& facet, const Point& p, double r_max,
                        Point* center = nullptr, double* radius = nullptr,
                        const Tolerances& tol = kDefaultTolerances);

bool hoop_check(const Simplex& s, double alpha, const Tolerances& tol = kDefaultTolerances);

struct HoopDistortionReport {
  std::int64_t trials = 0;
  std::int64_t checked = 0;
  std::int64_t skipped = 0;  // precondition on xi0 fails or sample leaves U_ij
  std::int64_t thickness_violations = 0;
  std::int64_t radius_violations = 0;
  std::int64_t distance_violations = 0;
  double worst_distance_ratio = 0.0;
  double worst_radius_ratio = 0.0;
  bool report_only = false;  // certified precondition on xi0 fails
  std::int64_t total_violations() const {
    return thickness_violations + radius_violations + distance_violations;
  }
};

HoopDistortionReport hoop_distortion_check(const Atlas& a, std::int64_t trials,
                                           const AlgorithmParams& params, std::uint64_t seed);

struct RunReport {
  AlgorithmParams params;
  std::vector<std::pair<Label, std::int64_t>> attempts;
  std::vector<std::pair<Label, double>> displacement;  // |p'_i - p_i| / eps_i
  std::vector<std::pair<Label, double>> delta;          // per patch
  std::vector<ForbiddenConfig> scan;
  bool scan_run = false;
  double mean_attempts = 0.0;
  std::int64_t max_attempts_used = 0;
  double seconds = 0.0;
  bool scan_empty() const { return scan.empty(); }
};

struct RunOptions {
  bool scan_after = true;
  int jobs = 1;
};

RunReport run_extended(Atlas& a, const AlgorithmParams& params, const RunOptions& opts = {});
std::vector<ForbiddenConfig> scan_all(const Atlas& a, const AlgorithmParams& params, int jobs = 1);

// The single-patch algorithm with threshold 2 alpha0 eps; the scan covers
// `region`.
RunReport run_flat(Patch& p, const Ball& region, const AlgorithmParams& params,
                   const RunOptions& opts = {});

}  // namespace manidel
