#include "inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "errors.hpp"
#include "nelder_mead.hpp"
#include "special.hpp"

namespace elp {

namespace {

constexpr double kPenalty = 1e12;

double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

const double kLogAlphaLo = std::log(0.1);
const double kLogAlphaSpan = std::log(50.0) - std::log(0.1);

double check_vu(double vu) {
  if (vu > 1.0) {
    throw ThresholdTooLow("likelihood: V(u) > 1; raise the threshold vector");
  }
  return vu;
}

double binomial_term(const ExceedanceSample& sample, double vu) {
  const long n_below = sample.n_total - sample.n_exceed();
  if (n_below < 0) throw DomainError("likelihood: n_total < N_u");
  if (n_below == 0) return 0.0;
  return -static_cast<double>(n_below) * std::log1p(-vu);
}

// uncensored row contribution; rows on a boundary face (exact zeros, which
// exact simulation produces with positive probability) contribute through
// the face density -V_I with I the support of the row
double uncensored_row_term(const Vector& row, const Matrix& sigma, double alpha,
                           const PdMatrix& sigma_pd, const QmcConfig& cfg) {
  std::vector<int> support;
  for (int j = 0; j < row.size(); ++j) {
    if (row[j] != 0.0) support.push_back(j);
  }
  if (static_cast<int>(support.size()) == row.size()) {
    return log_intensity(row, sigma_pd, alpha);
  }
  if (support.empty()) throw DomainError("likelihood: all-zero row");
  return log_partial_V(row, support, sigma, alpha, cfg);
}

// censored row contribution: log{-V_I(max(x, u))}
double censored_row_term(const Vector& row, const std::vector<int>& idx,
                         const Vector& u, const Matrix& sigma, double alpha,
                         const PdMatrix& sigma_pd, const QmcConfig& cfg) {
  const int dim = static_cast<int>(row.size());
  Vector xc = row.cwiseMax(u);
  if (static_cast<int>(idx.size()) == dim) {
    return log_intensity(xc, sigma_pd, alpha);
  }
  return log_partial_V(xc, idx, sigma, alpha, cfg);
}

}  // namespace

ExceedanceSample extract_exceedances(const Matrix& x_star, const Vector& u) {
  const int dim = static_cast<int>(x_star.cols());
  if (u.size() != dim) throw DomainError("extract_exceedances: threshold size mismatch");
  for (int j = 0; j < dim; ++j) {
    if (!(u[j] >= 1.0)) {
      throw DomainError("extract_exceedances: thresholds must be >= 1 on the standard scale");
    }
  }
  std::vector<int> keep;
  long n_complete = 0;
  for (int i = 0; i < x_star.rows(); ++i) {
    if (x_star.row(i).hasNaN()) continue;  // complete-case rule
    ++n_complete;
    if ((x_star.row(i).transpose().array() / u.array()).maxCoeff() >= 1.0) {
      keep.push_back(i);
    }
  }
  if (keep.empty()) throw EmptySample("extract_exceedances: no exceedances");

  ExceedanceSample sample;
  sample.n_total = n_complete;
  sample.u = u;
  sample.x_star.resize(static_cast<int>(keep.size()), dim);
  sample.exceed_sets.resize(keep.size());
  for (std::size_t k = 0; k < keep.size(); ++k) {
    sample.x_star.row(static_cast<int>(k)) = x_star.row(keep[k]);
    for (int j = 0; j < dim; ++j) {
      if (sample.x_star(static_cast<int>(k), j) > u[j]) {
        sample.exceed_sets[k].push_back(j);
      }
    }
    if (sample.exceed_sets[k].empty()) {
      // row kept via an exact tie x*_j == u_j
      int arg = 0;
      sample.x_star.row(static_cast<int>(k)).maxCoeff(&arg);
      sample.exceed_sets[k].push_back(arg);
    }
  }
  return sample;
}

double nll_uncensored(const ExceedanceSample& sample, const Matrix& sigma,
                      double alpha, const QmcConfig& cfg) {
  const double vu = check_vu(exponent_V(sample.u, sigma, alpha, cfg));
  const PdMatrix pd = cholesky_pd(sigma);
  double nll = binomial_term(sample, vu);
  for (int k = 0; k < sample.n_exceed(); ++k) {
    nll -= uncensored_row_term(sample.x_star.row(k), sigma, alpha, pd, cfg);
  }
  return nll;
}

double nll_censored(const ExceedanceSample& sample, const Matrix& sigma,
                    double alpha, const QmcConfig& cfg) {
  const double vu = check_vu(exponent_V(sample.u, sigma, alpha, cfg));
  const PdMatrix pd = cholesky_pd(sigma);
  double nll = binomial_term(sample, vu);
  for (int k = 0; k < sample.n_exceed(); ++k) {
    nll -= censored_row_term(sample.x_star.row(k), sample.exceed_sets[k],
                             sample.u, sigma, alpha, pd, cfg);
  }
  return nll;
}

double nll_censored_poisson(const ExceedanceSample& sample, const Matrix& sigma,
                            double alpha, const QmcConfig& cfg) {
  const double vu = check_vu(exponent_V(sample.u, sigma, alpha, cfg));
  const PdMatrix pd = cholesky_pd(sigma);
  double nll = static_cast<double>(sample.n_total) * vu;
  for (int k = 0; k < sample.n_exceed(); ++k) {
    nll -= censored_row_term(sample.x_star.row(k), sample.exceed_sets[k],
                             sample.u, sigma, alpha, pd, cfg);
  }
  return nll;
}

double nll_pairwise(const ExceedanceSample& sample, const Matrix& sigma,
                    double alpha, const QmcConfig& cfg) {
  const int dim = sample.dim();
  if (dim < 2) throw DomainError("nll_pairwise: needs D >= 2");
  double total = 0.0;
  Matrix sigma2(2, 2);
  sigma2 << 1.0, 0.0, 0.0, 1.0;
  Vector u2(2), row2(2);
  for (int a = 0; a < dim; ++a) {
    for (int b = a + 1; b < dim; ++b) {
      sigma2(0, 1) = sigma2(1, 0) = sigma(a, b);
      u2 << sample.u[a], sample.u[b];
      const double vu = check_vu(exponent_V(u2, sigma2, alpha, cfg));
      const PdMatrix pd2 = cholesky_pd(sigma2);
      long n_pair = 0;
      double sum_terms = 0.0;
      for (int k = 0; k < sample.n_exceed(); ++k) {
        row2 << sample.x_star(k, a), sample.x_star(k, b);
        if ((row2.array() / u2.array()).maxCoeff() < 1.0) continue;
        ++n_pair;
        std::vector<int> idx;
        if (row2[0] > u2[0]) idx.push_back(0);
        if (row2[1] > u2[1]) idx.push_back(1);
        if (idx.empty()) idx.push_back(row2[0] / u2[0] >= row2[1] / u2[1] ? 0 : 1);
        sum_terms += censored_row_term(row2, idx, u2, sigma2, alpha, pd2, cfg);
      }
      const long n_below = sample.n_total - n_pair;
      total += -static_cast<double>(n_below) * std::log1p(-vu) - sum_terms;
    }
  }
  return total;
}

double nll(const ExceedanceSample& sample, const Matrix& sigma, double alpha,
           LikelihoodKind kind, const QmcConfig& cfg) {
  switch (kind) {
    case LikelihoodKind::Uncensored:
      return nll_uncensored(sample, sigma, alpha, cfg);
    case LikelihoodKind::Censored:
      return nll_censored(sample, sigma, alpha, cfg);
    case LikelihoodKind::Pairwise:
      return nll_pairwise(sample, sigma, alpha, cfg);
  }
  return 0.0;
}

ParamVector default_init(const Matrix& sites) {
  std::vector<double> dists;
  for (int i = 0; i < sites.rows(); ++i) {
    for (int j = i + 1; j < sites.rows(); ++j) {
      dists.push_back((sites.row(i) - sites.row(j)).norm());
    }
  }
  ParamVector psi;
  psi.kappa = 1.0;
  psi.alpha = 2.0;
  if (!dists.empty()) {
    std::nth_element(dists.begin(), dists.begin() + dists.size() / 2, dists.end());
    const double med = dists[dists.size() / 2];
    if (med > 0.0) psi.log_lambda = std::log(med);
  }
  return psi;
}

FitResult fit_model(const ExceedanceSample& sample, const Matrix& sites,
                    LikelihoodKind kind, const ParamVector* init,
                    const FitOptions& opts) {
  const int dim = sample.dim();
  if (sites.rows() != dim) throw DomainError("fit_model: site count mismatch");

  Matrix dist(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      dist(i, j) = (sites.row(i) - sites.row(j)).norm();
    }
  }

  // t -> (log lambda, kappa, alpha) with kappa in [0.05, 2], alpha in [0.1, 50]
  auto to_psi = [](const Vector& t) {
    ParamVector psi;
    psi.log_lambda = t[0];
    psi.kappa = 0.05 + 1.95 * sigmoid(t[1]);
    psi.alpha = std::exp(kLogAlphaLo + kLogAlphaSpan * sigmoid(t[2]));
    return psi;
  };
  auto from_psi = [](const ParamVector& psi) {
    Vector t(3);
    t[0] = psi.log_lambda;
    const double pk = std::min(std::max((psi.kappa - 0.05) / 1.95, 1e-6), 1.0 - 1e-6);
    t[1] = logit(pk);
    const double pa = std::min(
        std::max((std::log(psi.alpha) - kLogAlphaLo) / kLogAlphaSpan, 1e-6),
        1.0 - 1e-6);
    t[2] = logit(pa);
    return t;
  };

  Matrix sigma(dim, dim);
  auto objective = [&](const Vector& t) -> double {
    const ParamVector psi = to_psi(t);
    const double lambda = std::exp(psi.log_lambda);
    if (!std::isfinite(lambda) || lambda <= 0.0) return kPenalty;
    for (int i = 0; i < dim; ++i) {
      sigma(i, i) = 1.0;
      for (int j = i + 1; j < dim; ++j) {
        sigma(i, j) = sigma(j, i) =
            std::exp(-std::pow(dist(i, j) / lambda, psi.kappa));
      }
    }
    try {
      const double val = nll(sample, sigma, psi.alpha, kind, opts.qmc);
      return std::isfinite(val) ? val : kPenalty;
    } catch (const ThresholdTooLow&) {
      return kPenalty;
    } catch (const NotPositiveDefinite&) {
      return kPenalty;
    }
  };

  const ParamVector psi0 = init ? *init : default_init(sites);
  const Vector t0 = from_psi(psi0);
  NelderMeadResult opt =
      nelder_mead(objective, t0, 0.4, opts.ftol, opts.max_evals);
  if (!opt.converged) {
    // one restart from the incumbent before reporting non-convergence
    NelderMeadResult retry = nelder_mead(objective, opt.x, 0.1, opts.ftol,
                                         std::max(200, opts.max_evals / 4));
    retry.n_evals += opt.n_evals;
    opt = retry;
  }
  if (opt.f >= kPenalty) {
    throw NonConvergence("fit_model: likelihood not finite anywhere visited");
  }

  FitResult result;
  result.psi = to_psi(opt.x);
  result.nll = opt.f;
  result.aic = 2.0 * opt.f + 6.0;
  result.n_evals = opt.n_evals;
  result.converged = opt.converged;
  result.at_edge = std::fabs(opt.x[1]) > 6.0 || std::fabs(opt.x[2]) > 6.0;

  // central-difference Hessian in transformed coordinates
  const double h = 5e-3;
  Matrix hess(3, 3);
  for (int i = 0; i < 3; ++i) {
    for (int j = i; j < 3; ++j) {
      Vector tpp = opt.x, tpm = opt.x, tmp = opt.x, tmm = opt.x;
      tpp[i] += h; tpp[j] += h;
      tpm[i] += h; tpm[j] -= h;
      tmp[i] -= h; tmp[j] += h;
      tmm[i] -= h; tmm[j] -= h;
      hess(i, j) = hess(j, i) = (objective(tpp) - objective(tpm) -
                                 objective(tmp) + objective(tmm)) /
                                (4.0 * h * h);
    }
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(hess);
  Matrix cov_t(3, 3);
  if (es.eigenvalues().minCoeff() > 0.0) {
    cov_t = hess.inverse();
  } else {
    result.hessian_pd = false;
    // pseudo-inverse on the positive part of the spectrum
    Vector inv = es.eigenvalues();
    for (int i = 0; i < 3; ++i) inv[i] = inv[i] > 1e-10 ? 1.0 / inv[i] : 0.0;
    cov_t = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
  }

  // delta method to psi = (log lambda, kappa, alpha)
  const double s1 = sigmoid(opt.x[1]);
  const double s2 = sigmoid(opt.x[2]);
  Vector jac(3);
  jac << 1.0, 1.95 * s1 * (1.0 - s1), result.psi.alpha * kLogAlphaSpan * s2 * (1.0 - s2);
  result.cov = jac.asDiagonal() * cov_t * jac.asDiagonal();
  result.cov = 0.5 * (result.cov + result.cov.transpose());
  return result;
}

PairFit fit_bivariate_rho(const ExceedanceSample& sample, const FitOptions& opts) {
  if (sample.dim() != 2) throw DomainError("fit_bivariate_rho: needs exactly 2 columns");
  Matrix sigma(2, 2);
  auto objective = [&](const Vector& t) -> double {
    const double rho = std::tanh(t[0]);
    const double alpha = std::exp(kLogAlphaLo + kLogAlphaSpan * sigmoid(t[1]));
    sigma << 1.0, rho, rho, 1.0;
    try {
      const double val = nll_censored(sample, sigma, alpha, opts.qmc);
      return std::isfinite(val) ? val : kPenalty;
    } catch (const ThresholdTooLow&) {
      return kPenalty;
    } catch (const NotPositiveDefinite&) {
      return kPenalty;
    }
  };
  Vector t0(2);
  t0 << std::atanh(0.5), logit((std::log(2.0) - kLogAlphaLo) / kLogAlphaSpan);
  NelderMeadResult opt = nelder_mead(objective, t0, 0.4, opts.ftol, opts.max_evals);
  if (opt.f >= kPenalty) {
    throw NonConvergence("fit_bivariate_rho: likelihood not finite");
  }
  PairFit fit;
  fit.rho = std::tanh(opt.x[0]);
  fit.alpha = std::exp(kLogAlphaLo + kLogAlphaSpan * sigmoid(opt.x[1]));
  fit.nll = opt.f;
  fit.converged = opt.converged;
  return fit;
}

}  // namespace elp
