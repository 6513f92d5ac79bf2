#ifndef ELPARETO_MARGINS_HPP
#define ELPARETO_MARGINS_HPP

#include <vector>

#include "linalg.hpp"

namespace elp {

struct GpdFit {
  double sigma = 1.0;
  double xi = 0.0;
  double se_sigma = 0.0;
  double se_xi = 0.0;
  int n_exceed = 0;
  double nll = 0.0;
  bool at_boundary = false;  // xi pinned near (-0.5, 1)
};

// Maximum likelihood GPD fit to the excesses over `threshold`.
// Requires at least 30 exceedances; xi is constrained to (-0.5, 1).
GpdFit fit_gpd_site(const std::vector<double>& data, double threshold);

// Semiparametric marginal model for one site: empirical distribution below
// the threshold, fitted GPD tail above, glued at the quantile level q.
struct MarginalFit {
  double threshold = 0.0;
  double quantile_level = 0.95;  // F(threshold) = q by construction
  GpdFit gpd;
  std::vector<double> below_sorted;  // sub-threshold data, ascending

  double cdf(double x) const;
  // x* = 1 / (1 - F(x)), the standard Pareto scale
  double to_standard(double x) const;
  // generalized inverse of cdf (GPD tail above q, empirical below)
  double from_standard(double x_star) const;
};

MarginalFit fit_margin(const std::vector<double>& data, double quantile_level);

// Empirical quantile (linear interpolation of order statistics).
double empirical_quantile(std::vector<double> sorted_or_not, double q);

// Column-wise transform to the standard Pareto scale; NaN entries propagate.
Matrix standardize_margins(const Matrix& raw, const std::vector<MarginalFit>& fits);

}  // namespace elp

#endif
