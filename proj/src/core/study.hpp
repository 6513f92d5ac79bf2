#ifndef ELPARETO_STUDY_HPP
#define ELPARETO_STUDY_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "inference.hpp"

namespace elp {

// Monte Carlo study configuration.  Desk-scale defaults keep a cell tractable
// on a single core; full_scale() restores the 16-site / 1000-rep layout.
struct StudyConfig {
  Matrix sites;                          // study grid
  std::vector<double> kappas{1.0};
  std::vector<double> alphas{1.0};
  std::vector<double> thetas{1.4};       // pairwise theta target at calib_distance
  double calib_distance = 0.5;
  std::vector<double> threshold_quantiles{0.95};
  int reps = 200;
  int sample_size = 250;                 // ell-Pareto draws (or raw t vectors) per rep
  std::vector<LikelihoodKind> estimators{LikelihoodKind::Uncensored,
                                         LikelihoodKind::Censored,
                                         LikelihoodKind::Pairwise};
  std::uint64_t seed = 0x53545544ULL;
  FitOptions fit_opts;

  static Matrix square_grid(int per_side, double extent = 1.0);
  static StudyConfig desk();
  static StudyConfig full_scale();
  static StudyConfig smoke();

  void validate() const;
};

struct EstimatorStats {
  std::string name;
  Vector bias = Vector::Zero(3);  // mean(psi_hat) - psi_0
  Matrix cov = Matrix::Zero(3, 3);
  double trace = 0.0;
  double mse = 0.0;               // = |bias|^2 + trace by construction
  int n_ok = 0;
  int n_fail = 0;
  bool valid = true;              // false when > 10% of fits failed
};

struct StudyCellResult {
  double kappa = 1.0;
  double alpha = 1.0;
  double theta = 1.4;
  double lambda = 1.0;
  double threshold_quantile = 0.95;
  ParamVector psi_true;
  std::vector<EstimatorStats> estimators;
  double runtime_sec = 0.0;

  const EstimatorStats* find(const std::string& name) const;
  // 100 * trace(uncensored) / trace(censored), or NaN when missing
  double ratio_uncensored_censored() const;
  double ratio_censored_pairwise() const;
  double mse_ratio_censored_uncensored() const;
  double mse_ratio_censored_pairwise() const;
};

struct StudyReport {
  std::string kind;  // "recovery" or "misspec"
  std::uint64_t seed = 0;
  std::vector<StudyCellResult> cells;

  std::string to_json() const;
  std::string to_csv() const;
};

// lambda such that the pairwise extremal coefficient at `distance` hits
// theta_target, by bisection to 1e-8.
double calibrate_lambda(double kappa, double alpha, double theta_target,
                        double distance);

// Well-specified efficiency study: ell-Pareto data simulated from the model.
StudyReport run_recovery_study(const StudyConfig& cfg);

// Misspecification study: exceedances of t processes with alpha dof.
StudyReport run_misspec_study(const StudyConfig& cfg);

struct EmpiricalTheta {
  double theta = 2.0;
  double ci_lo = 1.0;
  double ci_hi = 2.0;
  int n_boot = 0;
};

// Censored bivariate MLE estimator of the pairwise extremal coefficient with
// a percentile bootstrap confidence interval.
EmpiricalTheta empirical_extremal_coeff(const std::vector<double>& x1,
                                        const std::vector<double>& x2,
                                        double threshold, int n_boot = 200,
                                        std::uint64_t seed = 0x424F4F54ULL,
                                        const FitOptions& opts = FitOptions());

}  // namespace elp

#endif
