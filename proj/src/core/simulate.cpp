#include "simulate.hpp"

#include <cassert>
#include <cmath>
#include <limits>

#include "errors.hpp"
#include "rng.hpp"
#include "special.hpp"

namespace elp {

namespace {

void sphere_draw(RngStream& rs, Vector& u) {
  double norm2 = 0.0;
  do {
    for (int j = 0; j < u.size(); ++j) {
      u[j] = rs.gauss();
      }
    norm2 = u.squaredNorm();
  } while (norm2 == 0.0);
  u /= std::sqrt(norm2);
}

// b * (A u)_+^alpha, the bounded spectral mark
void spectral_point(const Matrix& chol, const Vector& u, double b, double alpha,
                    Vector& out) {
  out.noalias() = chol * u;
  for (int j = 0; j < out.size(); ++j) {
    out[j] = out[j] > 0.0 ? b * std::pow(out[j], alpha) : 0.0;
  }
}

}  // namespace

void RiskFunctional::validate(int dim) const {
  if (kind == RiskKind::Sup) return;
  if (weights.size() != dim) throw DomainError("RiskFunctional: weight size mismatch");
  for (int j = 0; j < dim; ++j) {
    if (!(weights[j] > 0.0)) throw DomainError("RiskFunctional: weights must be positive");
  }
}

double RiskFunctional::operator()(const Vector& f) const {
  switch (kind) {
    case RiskKind::Sup:
      return f.maxCoeff();
    case RiskKind::WeightedMax:
      return (f.array() / weights.array()).maxCoeff();
    case RiskKind::WeightedMin:
      return (f.array() / weights.array()).minCoeff();
    case RiskKind::WeightedSum:
      return (f.array() / weights.array()).sum();
  }
  return 0.0;
}

double RiskFunctional::bound_coeff() const {
  switch (kind) {
    case RiskKind::Sup:
      return 1.0;
    case RiskKind::WeightedMax:
      return 1.0 / weights.minCoeff();
    case RiskKind::WeightedMin:
      return 1.0 / weights.maxCoeff();
    case RiskKind::WeightedSum:
      return weights.cwiseInverse().sum();
  }
  return 0.0;
}

double bound_b(int dim, double alpha) {
  if (dim < 1 || !(alpha > 0.0)) throw DomainError("bound_b: invalid arguments");
  return std::exp(std::log(2.0) + 0.5 * std::log(M_PI) +
                  std::lgamma(0.5 * (dim + alpha)) -
                  std::lgamma(0.5 * (alpha + 1.0)) - std::lgamma(0.5 * dim));
}

SimBatch simulate_extremal_t(const EllipticalModel& model, int n,
                             std::uint64_t seed, long long iteration_cap) {
  const int dim = model.n_sites();
  const double b = bound_b(dim, model.alpha);
  SimBatch batch;
  batch.seed = seed;
  batch.draws.resize(n, dim);
  Vector u(dim), p(dim);
  for (int i = 0; i < n; ++i) {
    RngStream rs(seed, static_cast<std::uint64_t>(i));
    Vector z = Vector::Zero(dim);
    double q = 0.0;
    long long points = 0;
    for (;;) {
      q += rs.exponential();
      // no further point can raise any component once b/Q is below min Z
      if (b / q <= z.minCoeff()) break;
      if (++points > iteration_cap) {
        throw IterationCap(
            "simulate_extremal_t: point cap exceeded; b too large for exact "
            "simulation (reduce D or alpha)");
      }
      sphere_draw(rs, u);
      spectral_point(model.sigma.chol, u, b, model.alpha, p);
      z = z.cwiseMax(p / q);
    }
    assert(b / q <= z.minCoeff());
    batch.poisson_points += points;
    batch.draws.row(i) = z;
  }
  return batch;
}

SimBatch simulate_pareto_poisson(const EllipticalModel& model,
                                 const RiskFunctional& ell, int n,
                                 std::uint64_t seed, double u0,
                                 long long iteration_cap) {
  const int dim = model.n_sites();
  ell.validate(dim);
  const double c_ell = ell.bound_coeff();
  if (!(c_ell > 0.0) || !std::isfinite(c_ell)) {
    throw DomainError("simulate_pareto_poisson: unbounded risk functional");
  }
  const double b = bound_b(dim, model.alpha);
  // every point with ell(P) >= u0 has Q <= b * c_ell / u0
  const double q_max = b * c_ell / u0;
  SimBatch batch;
  batch.seed = seed;
  batch.draws.resize(n, dim);
  Vector u(dim), p(dim);
  int filled = 0;
  long long total_points = 0;
  for (std::uint64_t sweep = 0; filled < n; ++sweep) {
    RngStream rs(seed, 0x504F4953ULL + sweep);
    double q = 0.0;
    for (;;) {
      q += rs.exponential();
      if (q > q_max) break;
      if (++total_points > iteration_cap) {
        throw IterationCap("simulate_pareto_poisson: point cap exceeded");
      }
      sphere_draw(rs, u);
      spectral_point(model.sigma.chol, u, b, model.alpha, p);
      p /= q;
      if (ell(p) >= u0) {
        batch.draws.row(filled++) = p / u0;
        if (filled == n) break;
      }
    }
  }
  batch.poisson_points = total_points;
  return batch;
}

SimBatch simulate_pareto_ar(const EllipticalModel& model,
                            const RiskFunctional& ell, int n,
                            std::uint64_t seed) {
  const int dim = model.n_sites();
  ell.validate(dim);
  // smallest u0 with ell(f) >= u0 implying max_j f_j >= 1
  const double u0 = ell.bound_coeff();
  const double b = bound_b(dim, model.alpha);
  SimBatch batch;
  batch.seed = seed;
  batch.draws.resize(n, dim);
  RngStream rs(seed, 0x41525345ULL);
  Vector u(dim), v(dim);
  int filled = 0;
  long long attempts = 0;
  long long accepted = 0;
  while (filled < n) {
    ++attempts;
    if (attempts >= 2000000 && accepted < attempts * 1e-6) {
      throw RejectionCap(
          "simulate_pareto_ar: acceptance rate below 1e-6; use the Poisson "
          "points sampler for this functional");
    }
    const double r = rs.pareto1();
    sphere_draw(rs, u);
    // radial scale is irrelevant to acceptance geometry; b keeps the two
    // samplers on the same spectral normalization
    spectral_point(model.sigma.chol, u, b, model.alpha, v);
    v *= r / b;
    if (ell(v) >= u0) {
      ++accepted;
      batch.draws.row(filled++) = v / u0;
    }
  }
  batch.proposals = attempts;
  return batch;
}

SimBatch simulate_pareto(const EllipticalModel& model, const RiskFunctional& ell,
                         int n, std::uint64_t seed) {
  // fixed cost per draw for the max functional; Poisson points otherwise
  if (ell.kind == RiskKind::WeightedMax || ell.kind == RiskKind::Sup) {
    return simulate_pareto_ar(model, ell, n, seed);
  }
  return simulate_pareto_poisson(model, ell, n, seed);
}

SimBatch simulate_conditional(const EllipticalModel& model,
                              const Matrix& cond_sites, const Vector& cond_values,
                              const Matrix& target_sites, int n,
                              std::uint64_t seed, bool clamp_negative) {
  const CondTParams par =
      cond_t_params(target_sites, cond_sites, cond_values, model.corr, model.alpha);
  const int dim = static_cast<int>(target_sites.rows());
  SimBatch batch;
  batch.seed = seed;
  batch.draws.resize(n, dim);
  Vector g(dim);
  for (int i = 0; i < n; ++i) {
    RngStream rs(seed, static_cast<std::uint64_t>(i));
    for (int j = 0; j < dim; ++j) g[j] = rs.gauss();
    const double chi2 = rs.chi_squared(par.dof);
    const double scale = std::sqrt(par.dof / chi2);
    Vector x = par.mu + scale * (par.scale.chol * g);
    for (int j = 0; j < dim; ++j) {
      double y = signed_power(x[j], model.alpha);
      if (clamp_negative && y < 0.0) y = 0.0;
      batch.draws(i, j) = y;
    }
  }
  return batch;
}

}  // namespace elp
