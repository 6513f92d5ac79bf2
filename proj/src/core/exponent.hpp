#ifndef ELPARETO_EXPONENT_HPP
#define ELPARETO_EXPONENT_HPP

#include <vector>

#include "linalg.hpp"
#include "mvt.hpp"

namespace elp {

// Stable correlation family rho(h) = exp{-(h/lambda)^kappa}.
struct CorrelationModel {
  double lambda = 1.0;  // range, > 0
  double kappa = 1.0;   // smoothness, in (0, 2]

  void validate() const;
  double rho(double h) const;
};

// psi = (log lambda, kappa, alpha)
struct ParamVector {
  double log_lambda = 0.0;
  double kappa = 1.0;
  double alpha = 2.0;

  void validate() const;
};

// Extremal-t dependence structure on a fixed site set.  sigma is the
// correlation matrix of the sites under the stable family; immutable after
// construction.
struct EllipticalModel {
  CorrelationModel corr;
  double alpha = 2.0;
  Matrix sites;  // n_sites x space_dim
  PdMatrix sigma;

  int n_sites() const { return static_cast<int>(sites.rows()); }

  static EllipticalModel create(const Matrix& sites, const ParamVector& psi);
};

PdMatrix corr_matrix(const Matrix& sites, const CorrelationModel& corr);

// Exponent function V(z).  Accepts any symmetric unit-diagonal matrix,
// including the completely dependent rho = 1 limit (handled inside mvt_cdf).
double exponent_V(const Vector& z, const Matrix& sigma, double alpha,
                  const QmcConfig& cfg);
double exponent_V(const Vector& z, const EllipticalModel& model,
                  const QmcConfig& cfg);

// Intensity density lambda_s(y) of the exponent measure, y in R^D, y_j != 0.
double log_intensity(const Vector& y, const PdMatrix& sigma, double alpha);
double intensity_lambda(const Vector& y, const EllipticalModel& model);

// -V_I(y): partial derivative of the negated exponent function with respect
// to the components in exceed_idx.  For I = {1..D} this is the full
// intensity; for y = 0 off I it is the boundary density.
double log_partial_V(const Vector& y, const std::vector<int>& exceed_idx,
                     const Matrix& sigma, double alpha, const QmcConfig& cfg);
double partial_V(const Vector& y, const std::vector<int>& exceed_idx,
                 const EllipticalModel& model, const QmcConfig& cfg);

// Parameters (dof, mu, scale) of the t vector X such that T_alpha(X) has the
// conditional intensity given values y0 at the conditioning sites.
struct CondTParams {
  double dof = 1.0;
  Vector mu;
  PdMatrix scale;
};

CondTParams cond_t_params(const Matrix& sigma_tt, const Matrix& sigma_tc,
                          const PdMatrix& sigma_cc, const Vector& y0,
                          double alpha);

CondTParams cond_t_params(const Matrix& target_sites, const Matrix& cond_sites,
                          const Vector& y0, const CorrelationModel& corr,
                          double alpha);

// Conditional intensity lambda_{s | s0, y0}(y), all y_j != 0.
double cond_intensity(const Vector& y, const Matrix& target_sites,
                      const Matrix& cond_sites, const Vector& y0,
                      const CorrelationModel& corr, double alpha);

// Pairwise extremal coefficient, theta in [1, 2).
double extremal_coeff_rho(double rho, double alpha);
double extremal_coeff(const EllipticalModel& two_site_model);

}  // namespace elp

#endif
