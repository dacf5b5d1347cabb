#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace manidel {

using Label = int;
using Point = Eigen::VectorXd;

enum class ErrorKind {
  DegenerateFacet,
  DegenerateSimplex,
  DegeneratePatch,
  UnknownLabel,
  OutOfDomain,
  SamplingFailed,
  InfeasibleParams,
  AttemptsExhausted,
  InconsistentStars,
  NotRealizable,
  InvalidInput,
  Io,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Relative tolerances. Each is multiplied by the natural length scale of the
// query (longest edge, sampling radius, ...).
struct Tolerances {
  double rank = 1e-12;   // degeneracy: sigma_k(P) < rank * longest edge
  double lin = 1e-9;     // linear-solve residuals
  double ball = 1e-9;    // empty-ball comparisons, times eps
  double trans = 1e-9;   // transition round trips, times eps_i
  double psd = 1e-12;    // Cholesky pivots, times the largest diagonal entry
};

inline constexpr Tolerances kDefaultTolerances{};

// Sorted label set identifying an abstract simplex.
using SimplexKey = std::vector<Label>;

SimplexKey make_key(std::vector<Label> labels);

}  // namespace manidel
