#ifndef ELPARETO_INFERENCE_HPP
#define ELPARETO_INFERENCE_HPP

#include <vector>

#include "exponent.hpp"

namespace elp {

// Standardized ell-exceedances for ell(f) = max_j f_j / u_j.
struct ExceedanceSample {
  Matrix x_star;   // N_u x D, rows with max_j x*_j / u_j >= 1
  long n_total = 0;  // complete-case observation count n
  Vector u;        // standard-scale thresholds
  std::vector<std::vector<int>> exceed_sets;  // I_k per row

  int n_exceed() const { return static_cast<int>(x_star.rows()); }
  int dim() const { return static_cast<int>(x_star.cols()); }
};

// Keeps complete-case rows with max_j x*_j / u_j >= 1.
ExceedanceSample extract_exceedances(const Matrix& x_star, const Vector& u);

enum class LikelihoodKind { Uncensored, Censored, Pairwise };

// Negative log-likelihoods for the dependence parameters, at the given
// correlation matrix and shape.  All include the binomial factor for the
// n - N_u fully censored observations.
double nll_uncensored(const ExceedanceSample& sample, const Matrix& sigma,
                      double alpha, const QmcConfig& cfg);
double nll_censored(const ExceedanceSample& sample, const Matrix& sigma,
                    double alpha, const QmcConfig& cfg);
double nll_pairwise(const ExceedanceSample& sample, const Matrix& sigma,
                    double alpha, const QmcConfig& cfg);
double nll(const ExceedanceSample& sample, const Matrix& sigma, double alpha,
           LikelihoodKind kind, const QmcConfig& cfg);

// Poisson-count variant of the censored likelihood (same row terms, the
// exceedance count treated as Poisson instead of binomial); used for
// cross-checks against the binomial form.
double nll_censored_poisson(const ExceedanceSample& sample, const Matrix& sigma,
                            double alpha, const QmcConfig& cfg);

struct FitResult {
  ParamVector psi;
  Matrix cov;       // 3x3, natural scale (log lambda, kappa, alpha)
  double nll = 0.0;
  double aic = 0.0;
  int n_evals = 0;
  bool converged = false;
  bool hessian_pd = true;   // false: cov is a pseudo-inverse
  bool at_edge = false;     // optimizer at the kappa/alpha box edge

  double se(int i) const { return std::sqrt(std::max(cov(i, i), 0.0)); }
};

struct FitOptions {
  QmcConfig qmc{128, 0x454C50415245544FULL, 4};  // reduced-accuracy profile
  int max_evals = 2000;
  double ftol = 1e-8;
};

// Nelder-Mead fit of psi = (log lambda, kappa, alpha) on transformed
// coordinates, with kappa in [0.05, 2] and alpha in [0.1, 50].  Covariance
// from the finite-difference Hessian at the optimum (delta method back to
// the natural scale).
FitResult fit_model(const ExceedanceSample& sample, const Matrix& sites,
                    LikelihoodKind kind, const ParamVector* init = nullptr,
                    const FitOptions& opts = FitOptions());

// Censored bivariate fit of (rho, alpha) for a fixed pair of columns;
// backs the empirical extremal coefficient estimator.
struct PairFit {
  double rho = 0.0;
  double alpha = 1.0;
  double nll = 0.0;
  bool converged = false;
};

PairFit fit_bivariate_rho(const ExceedanceSample& sample,
                          const FitOptions& opts = FitOptions());

// Default initial parameters: kappa = 1, alpha = 2, lambda at the median
// pairwise site distance.
ParamVector default_init(const Matrix& sites);

}  // namespace elp

#endif
