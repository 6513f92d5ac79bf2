#ifndef ELPARETO_SPECIAL_HPP
#define ELPARETO_SPECIAL_HPP

#include <cmath>

namespace elp {

// Standard normal distribution function and its inverse (Wichura AS241).
double norm_cdf(double x);
double norm_quantile(double p);

// Regularized incomplete beta I_x(a, b).
double inc_beta(double x, double a, double b);

// Regularized lower incomplete gamma P(a, x) and its inverse in x.
double gamma_p(double a, double x);
double gamma_p_inv(double a, double p);

// Univariate Student-t distribution function, dof > 0.  +-inf map to 1/0.
double t_cdf(double x, double dof);

// Chi-squared quantile, p in (0,1).
double chi2_quantile(double p, double dof);

// Survival function of the chi-squared distribution (for GOF tests).
double chi2_sf(double x, double dof);

// Kolmogorov distribution tail Q(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2).
double kolmogorov_q(double lambda);

// T_a(x) = sign(x) |x|^a, a > 0.
inline double signed_power(double x, double a) {
  if (x == 0.0) return 0.0;
  return x > 0.0 ? std::pow(x, a) : -std::pow(-x, a);
}

}  // namespace elp

#endif
