#ifndef ELPARETO_SIMULATE_HPP
#define ELPARETO_SIMULATE_HPP

#include <cstdint>

#include "exponent.hpp"

namespace elp {

enum class RiskKind { WeightedMax, WeightedMin, WeightedSum, Sup };

// Homogeneous risk functional over a fixed site set, with threshold weights.
struct RiskFunctional {
  RiskKind kind = RiskKind::WeightedMax;
  Vector weights;  // thresholds u > 0; ignored for Sup

  void validate(int dim) const;
  double operator()(const Vector& f) const;
  // c with ell(f) <= c * max_j f_j
  double bound_coeff() const;
};

struct SimBatch {
  Matrix draws;  // n x D, standard scale
  std::uint64_t seed = 0;
  long long poisson_points = 0;  // points generated (Poisson-based samplers)
  long long proposals = 0;       // proposals (acceptance-rejection)
};

// Upper bound b = {E(U_1)_+^alpha}^{-1} for the spectral components.
double bound_b(int dim, double alpha);

// Exact extremal-t (standard max-stable, unit Frechet margins) simulation.
SimBatch simulate_extremal_t(const EllipticalModel& model, int n,
                             std::uint64_t seed,
                             long long iteration_cap = 10000000LL);

// Exact standard ell-Pareto simulation from the Poisson points with
// Q <= b * c_ell / u0.
SimBatch simulate_pareto_poisson(const EllipticalModel& model,
                                 const RiskFunctional& ell, int n,
                                 std::uint64_t seed, double u0 = 1.0,
                                 long long iteration_cap = 10000000LL);

// Exact standard ell-Pareto simulation by acceptance-rejection.
SimBatch simulate_pareto_ar(const EllipticalModel& model,
                            const RiskFunctional& ell, int n,
                            std::uint64_t seed);

// ell-Pareto draws, method chosen by functional kind (acceptance-rejection
// for the componentwise max, Poisson points otherwise).
SimBatch simulate_pareto(const EllipticalModel& model, const RiskFunctional& ell,
                         int n, std::uint64_t seed);

// Conditional simulation: T_alpha of a (d+alpha)-dof t vector.  Negative
// components are clamped to zero unless clamp_negative is false.
SimBatch simulate_conditional(const EllipticalModel& model,
                              const Matrix& cond_sites, const Vector& cond_values,
                              const Matrix& target_sites, int n,
                              std::uint64_t seed, bool clamp_negative = true);

}  // namespace elp

#endif
