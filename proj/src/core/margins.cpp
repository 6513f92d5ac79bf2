#include "margins.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "errors.hpp"
#include "nelder_mead.hpp"

namespace elp {

namespace {

double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

double gpd_nll(const std::vector<double>& excess, double sigma, double xi) {
  const double n = static_cast<double>(excess.size());
  if (!(sigma > 0.0)) return std::numeric_limits<double>::infinity();
  double nll = n * std::log(sigma);
  if (std::fabs(xi) < 1e-8) {
    for (double z : excess) nll += z / sigma;
    return nll;
  }
  for (double z : excess) {
    const double t = 1.0 + xi * z / sigma;
    if (t <= 0.0) return std::numeric_limits<double>::infinity();
    nll += (1.0 + 1.0 / xi) * std::log(t);
  }
  return nll;
}

}  // namespace

GpdFit fit_gpd_site(const std::vector<double>& data, double threshold) {
  std::vector<double> excess;
  for (double x : data) {
    if (std::isfinite(x) && x > threshold) excess.push_back(x - threshold);
  }
  if (excess.size() < 30) {
    throw TooFewExceedances("fit_gpd_site: fewer than 30 exceedances");
  }
  double mean = 0.0;
  for (double z : excess) mean += z;
  mean /= excess.size();
  if (!(mean > 0.0)) {
    throw TooFewExceedances("fit_gpd_site: degenerate excesses");
  }

  // t = (log sigma, eta) with xi = -0.5 + 1.5 * sigmoid(eta)
  auto to_params = [](const Vector& t) {
    return std::pair<double, double>{std::exp(t[0]),
                                     -0.5 + 1.5 * sigmoid(t[1])};
  };
  auto objective = [&](const Vector& t) {
    const auto [sigma, xi] = to_params(t);
    return gpd_nll(excess, sigma, xi);
  };
  Vector t0(2);
  t0 << std::log(mean), 0.0;
  NelderMeadResult opt = nelder_mead(objective, t0, 0.4, 1e-10, 2000);

  GpdFit fit;
  std::tie(fit.sigma, fit.xi) = to_params(opt.x);
  fit.n_exceed = static_cast<int>(excess.size());
  fit.nll = opt.f;
  fit.at_boundary = std::fabs(opt.x[1]) > 6.0;

  // observed-information standard errors via a central-difference Hessian
  const double h = 1e-4;
  Matrix hess(2, 2);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      Vector tpp = opt.x, tpm = opt.x, tmp = opt.x, tmm = opt.x;
      tpp[i] += h; tpp[j] += h;
      tpm[i] += h; tpm[j] -= h;
      tmp[i] -= h; tmp[j] += h;
      tmm[i] -= h; tmm[j] -= h;
      hess(i, j) = (objective(tpp) - objective(tpm) - objective(tmp) +
                    objective(tmm)) / (4.0 * h * h);
    }
  }
  Eigen::Matrix2d cov_t = hess.inverse();
  const double s = sigmoid(opt.x[1]);
  const double dsig = fit.sigma;           // d sigma / d t0
  const double dxi = 1.5 * s * (1.0 - s);  // d xi / d t1
  if (cov_t(0, 0) > 0.0) fit.se_sigma = dsig * std::sqrt(cov_t(0, 0));
  if (cov_t(1, 1) > 0.0) fit.se_xi = dxi * std::sqrt(cov_t(1, 1));
  return fit;
}

double empirical_quantile(std::vector<double> v, double q) {
  v.erase(std::remove_if(v.begin(), v.end(),
                         [](double x) { return !std::isfinite(x); }),
          v.end());
  if (v.empty()) throw DomainError("empirical_quantile: no finite data");
  std::sort(v.begin(), v.end());
  const double pos = q * (v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  if (lo + 1 >= v.size()) return v.back();
  const double w = pos - lo;
  return (1.0 - w) * v[lo] + w * v[lo + 1];
}

MarginalFit fit_margin(const std::vector<double>& data, double quantile_level) {
  if (!(quantile_level > 0.5) || !(quantile_level < 1.0)) {
    throw DomainError("fit_margin: quantile level must be in (0.5, 1)");
  }
  MarginalFit fit;
  fit.quantile_level = quantile_level;
  fit.threshold = empirical_quantile(data, quantile_level);
  fit.gpd = fit_gpd_site(data, fit.threshold);
  for (double x : data) {
    if (std::isfinite(x) && x <= fit.threshold) fit.below_sorted.push_back(x);
  }
  std::sort(fit.below_sorted.begin(), fit.below_sorted.end());
  return fit;
}

double MarginalFit::cdf(double x) const {
  const double q = quantile_level;
  if (x >= threshold) {
    const double z = x - threshold;
    double tail;
    if (std::fabs(gpd.xi) < 1e-8) {
      tail = std::exp(-z / gpd.sigma);
    } else {
      const double t = 1.0 + gpd.xi * z / gpd.sigma;
      tail = t > 0.0 ? std::pow(t, -1.0 / gpd.xi) : 0.0;
    }
    return 1.0 - (1.0 - q) * tail;
  }
  // empirical part, scaled so that F(threshold) = q exactly
  const auto it = std::upper_bound(below_sorted.begin(), below_sorted.end(), x);
  const double rank = static_cast<double>(it - below_sorted.begin());
  return q * rank / (below_sorted.size() + 1.0);
}

double MarginalFit::to_standard(double x) const {
  if (std::isnan(x)) return x;
  const double f = std::min(cdf(x), 1.0 - 1e-12);
  return 1.0 / (1.0 - f);
}

double MarginalFit::from_standard(double x_star) const {
  if (std::isnan(x_star)) return x_star;
  if (!(x_star >= 1.0)) throw DomainError("from_standard: x* must be >= 1");
  const double p = 1.0 - 1.0 / x_star;
  const double q = quantile_level;
  if (p >= q) {
    const double tail = (1.0 - p) / (1.0 - q);
    double z;
    if (std::fabs(gpd.xi) < 1e-8) {
      z = -gpd.sigma * std::log(tail);
    } else {
      z = gpd.sigma / gpd.xi * (std::pow(tail, -gpd.xi) - 1.0);
    }
    return threshold + z;
  }
  if (below_sorted.empty()) return threshold;
  const double pos = p / q * (below_sorted.size() + 1.0) - 1.0;
  if (pos <= 0.0) return below_sorted.front();
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  if (lo + 1 >= below_sorted.size()) return below_sorted.back();
  const double w = pos - lo;
  return (1.0 - w) * below_sorted[lo] + w * below_sorted[lo + 1];
}

Matrix standardize_margins(const Matrix& raw, const std::vector<MarginalFit>& fits) {
  const int dim = static_cast<int>(raw.cols());
  if (static_cast<int>(fits.size()) != dim) {
    throw DomainError("standardize_margins: one marginal fit per site required");
  }
  Matrix out(raw.rows(), dim);
  for (int j = 0; j < dim; ++j) {
    for (int i = 0; i < raw.rows(); ++i) {
      out(i, j) = fits[j].to_standard(raw(i, j));
    }
  }
  return out;
}

}  // namespace elp
