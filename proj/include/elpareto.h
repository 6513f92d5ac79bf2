/* C interface to the elliptical Pareto process library.
 *
 * All matrices are row-major double arrays.  Functions return elp_status;
 * on failure elp_last_error() gives a thread-local message.  Opaque handles
 * must be released with the matching *_free function.
 */
#ifndef ELPARETO_H
#define ELPARETO_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  ELP_OK = 0,
  ELP_ERR_DOMAIN = 1,
  ELP_ERR_NOT_POSITIVE_DEFINITE = 2,
  ELP_ERR_ITERATION_CAP = 3,
  ELP_ERR_REJECTION_CAP = 4,
  ELP_ERR_THRESHOLD_TOO_LOW = 5,
  ELP_ERR_TOO_FEW_EXCEEDANCES = 6,
  ELP_ERR_EMPTY_SAMPLE = 7,
  ELP_ERR_NON_CONVERGENCE = 8,
  ELP_ERR_UNATTAINABLE = 9,
  ELP_ERR_INTERNAL = 10
} elp_status;

const char* elp_version(void);
/* Message for the last failing call on this thread; empty if none. */
const char* elp_last_error(void);
/* Frees strings returned through char** out-parameters. */
void elp_free_string(char* s);

/* ---- quasi-Monte Carlo accuracy profile ------------------------------- */

typedef struct {
  int n_points;        /* lattice points per shift, >= 128 */
  uint64_t seed;       /* shift seed */
  int n_shifts;        /* randomized shifts, >= 4 */
} elp_qmc;

void elp_qmc_default(elp_qmc* cfg);      /* 8192 x 8: direct evaluation */
void elp_qmc_fit_profile(elp_qmc* cfg);  /* 128 x 4: inside optimizers */

/* ---- dependence model -------------------------------------------------- */

typedef struct elp_model elp_model;

/* sites: n_sites x space_dim.  Correlation rho(h) = exp{-(h/lambda)^kappa},
 * kappa in (0, 2], alpha > 0. */
elp_status elp_model_create(const double* sites, int n_sites, int space_dim,
                            double log_lambda, double kappa, double alpha,
                            elp_model** out);
void elp_model_free(elp_model* m);
elp_status elp_model_params(const elp_model* m, double* log_lambda,
                            double* kappa, double* alpha);
elp_status elp_model_dim(const elp_model* m, int* n_sites, int* space_dim);

/* Exponent function V(z), z > 0 componentwise. */
elp_status elp_exponent_v(const elp_model* m, const double* z,
                          const elp_qmc* qmc, double* out);
/* Intensity lambda_s(y), all y_j != 0. */
elp_status elp_intensity(const elp_model* m, const double* y, double* out);
/* -V_I(y) for the index set I (0-based, strictly increasing). */
elp_status elp_partial_v(const elp_model* m, const double* y,
                         const int* exceed_idx, int n_exceed,
                         const elp_qmc* qmc, double* out);
/* Pairwise extremal coefficient, in [1, 2). */
elp_status elp_extremal_coeff(double rho, double alpha, double* out);
elp_status elp_extremal_coeff_dist(const elp_model* m, double distance,
                                   double* out);
/* lambda making the extremal coefficient at `distance` equal theta_target. */
elp_status elp_calibrate_lambda(double kappa, double alpha, double theta_target,
                                double distance, double* lambda);
/* Spectral bound b = {E(U_1)_+^alpha}^{-1}. */
elp_status elp_bound_b(int dim, double alpha, double* out);

/* ---- simulation -------------------------------------------------------- */

typedef enum {
  ELP_RISK_WEIGHTED_MAX = 0,
  ELP_RISK_WEIGHTED_MIN = 1,
  ELP_RISK_WEIGHTED_SUM = 2,
  ELP_RISK_SUP = 3
} elp_risk_kind;

/* out: n x n_sites, row-major.  Draws are reproducible in (seed) and
 * independent of how n is batched. */
elp_status elp_simulate_extremal_t(const elp_model* m, int n, uint64_t seed,
                                   double* out);
/* weights: thresholds u_j > 0 (ignored for ELP_RISK_SUP, may be NULL). */
elp_status elp_simulate_pareto(const elp_model* m, int risk_kind,
                               const double* weights, int n, uint64_t seed,
                               double* out);
/* Conditional draws given exact values at conditioning sites.
 * cond_sites: n_cond x space_dim, target_sites: n_target x space_dim,
 * out: n x n_target.  clamp_negative != 0 zeroes negative components. */
elp_status elp_simulate_conditional(const elp_model* m, const double* cond_sites,
                                    int n_cond, const double* cond_values,
                                    const double* target_sites, int n_target,
                                    int n, uint64_t seed, int clamp_negative,
                                    double* out);

/* ---- marginal model ---------------------------------------------------- */

typedef struct elp_margin elp_margin;

/* GPD fit to excesses over `threshold` (NaN entries ignored). */
elp_status elp_gpd_fit(const double* data, long n, double threshold,
                       double* sigma, double* xi, double* se_sigma,
                       double* se_xi, int* n_exceed);
/* Semiparametric margin: empirical below the q-quantile, GPD above. */
elp_status elp_margin_fit(const double* data, long n, double quantile_level,
                          elp_margin** out);
void elp_margin_free(elp_margin* m);
elp_status elp_margin_info(const elp_margin* m, double* threshold,
                           double* quantile_level, double* sigma, double* xi,
                           double* se_sigma, double* se_xi, int* n_exceed);
/* x* = 1/(1 - F(x)); NaN propagates. */
elp_status elp_margin_to_standard(const elp_margin* m, const double* x, long n,
                                  double* out);
elp_status elp_margin_from_standard(const elp_margin* m, const double* x_star,
                                    long n, double* out);

/* ---- dependence inference ---------------------------------------------- */

typedef enum {
  ELP_LIK_UNCENSORED = 0,
  ELP_LIK_CENSORED = 1,
  ELP_LIK_PAIRWISE = 2
} elp_likelihood;

typedef struct {
  double psi[3];    /* log lambda, kappa, alpha */
  double cov[9];    /* row-major 3x3, natural scale */
  double nll;
  double aic;
  int n_evals;
  int converged;
  int hessian_pd;   /* 0: cov is a pseudo-inverse */
  int at_edge;      /* optimizer at the kappa/alpha box edge */
} elp_fit_result;

/* Negative log-likelihood of psi at the model's parameters.
 * x_star: n x dim standardized data (NaN rows dropped as incomplete);
 * u: per-site thresholds on the standard scale, all >= 1;
 * n_total <= 0 uses the complete-case row count. */
elp_status elp_nll(const double* x_star, long n, int dim, const double* u,
                   long n_total, const elp_model* m, int likelihood,
                   const elp_qmc* qmc, double* out);

/* Fits psi = (log lambda, kappa, alpha), kappa in [0.05, 2], alpha in
 * [0.1, 50].  init_psi and qmc may be NULL for defaults; max_evals <= 0
 * uses the default budget. */
elp_status elp_fit_dependence(const double* x_star, long n, int dim,
                              const double* u, long n_total,
                              const double* sites, int space_dim,
                              int likelihood, const double* init_psi,
                              const elp_qmc* qmc, int max_evals,
                              elp_fit_result* out);

/* Censored bivariate estimate of the pairwise extremal coefficient with a
 * percentile bootstrap interval. */
elp_status elp_empirical_extremal_coeff(const double* x1, const double* x2,
                                        long n, double threshold, int n_boot,
                                        uint64_t seed, double* theta,
                                        double* ci_lo, double* ci_hi);

/* ---- Monte Carlo study -------------------------------------------------
 *
 * config_json keys (all optional unless noted):
 *   kind: "recovery" | "misspec"            (required)
 *   grid: {"per_side": int, "extent": x}    or  sites: [[x,y], ...]
 *   kappas, alphas, thetas, threshold_quantiles: arrays of numbers
 *   calib_distance, reps, sample_size, seed
 *   estimators: subset of ["L1", "L2", "pairwise"]
 *   qmc: {"n_points": int, "n_shifts": int, "seed": int}
 *   max_evals: int
 * Outputs are heap strings; pass NULL to skip one; free with
 * elp_free_string. */
elp_status elp_study_run(const char* config_json, char** report_json,
                         char** report_csv);

#ifdef __cplusplus
}
#endif

#endif /* ELPARETO_H */
