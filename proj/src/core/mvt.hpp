#ifndef ELPARETO_MVT_HPP
#define ELPARETO_MVT_HPP

#include <cstdint>

#include "linalg.hpp"

namespace elp {

// Quasi-Monte Carlo settings for multivariate t probabilities.  The point
// set is a deterministic function of (n_points, n_shifts, seed), so repeated
// evaluations with the same config are bit-reproducible and a likelihood
// built on top of them is a smooth deterministic function of the parameters.
struct QmcConfig {
  int n_points = 8192;
  std::uint64_t seed = 0x454C50415245544FULL;
  int n_shifts = 8;

  void validate() const;
};

struct MvtProblem {
  Vector upper;     // entries may be +inf
  double dof = 1.0; // nu > 0
  Vector location;
  Matrix scale;     // symmetric positive (semi-)definite
};

struct MvtResult {
  double probability = 0.0;
  double error_estimate = 0.0;
};

// P(X <= upper) for X ~ t_nu(location, scale), by separation-of-variables
// QMC (Genz-Bretz) over a randomized Richtmyer lattice.  Components whose
// scale diagonal vanishes are treated as the rho -> 1 limit: dropped when
// the limit is strictly above the location, probability zero when strictly
// below, and a factor 1/2 on the boundary.
MvtResult mvt_cdf(const MvtProblem& problem, const QmcConfig& cfg);

// Log density of t_nu(location, scale) at x.
double mvt_logpdf(const Vector& x, double dof, const Vector& location,
                  const PdMatrix& scale);

}  // namespace elp

#endif
