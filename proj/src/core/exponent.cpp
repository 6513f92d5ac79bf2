#include "exponent.hpp"

#include <cmath>
#include <limits>

#include "errors.hpp"
#include "special.hpp"

namespace elp {

void CorrelationModel::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw DomainError("CorrelationModel: lambda must be positive");
  }
  if (!(kappa > 0.0) || kappa > 2.0) {
    throw DomainError("CorrelationModel: kappa must be in (0, 2]");
  }
}

double CorrelationModel::rho(double h) const {
  return std::exp(-std::pow(h / lambda, kappa));
}

void ParamVector::validate() const {
  if (!std::isfinite(log_lambda) || !std::isfinite(kappa) || !std::isfinite(alpha)) {
    throw DomainError("ParamVector: parameters must be finite");
  }
  if (!(kappa > 0.0) || kappa > 2.0) {
    throw DomainError("ParamVector: kappa must be in (0, 2]");
  }
  if (!(alpha > 0.0)) throw DomainError("ParamVector: alpha must be positive");
}

PdMatrix corr_matrix(const Matrix& sites, const CorrelationModel& corr) {
  corr.validate();
  const int n = static_cast<int>(sites.rows());
  Matrix sigma(n, n);
  for (int i = 0; i < n; ++i) {
    sigma(i, i) = 1.0;
    for (int j = i + 1; j < n; ++j) {
      const double h = (sites.row(i) - sites.row(j)).norm();
      sigma(i, j) = sigma(j, i) = corr.rho(h);
    }
  }
  return cholesky_pd(sigma);
}

EllipticalModel EllipticalModel::create(const Matrix& sites,
                                        const ParamVector& psi) {
  psi.validate();
  EllipticalModel model;
  model.corr = CorrelationModel{std::exp(psi.log_lambda), psi.kappa};
  model.alpha = psi.alpha;
  model.sites = sites;
  model.sigma = corr_matrix(sites, model.corr);
  return model;
}

double exponent_V(const Vector& z, const Matrix& sigma, double alpha,
                  const QmcConfig& cfg) {
  const int dim = static_cast<int>(z.size());
  if (sigma.rows() != dim) throw DomainError("exponent_V: dimension mismatch");
  for (int j = 0; j < dim; ++j) {
    if (!(z[j] > 0.0)) throw DomainError("exponent_V: z must be positive");
  }
  if (dim == 1) return 1.0 / z[0];

  const double inv_alpha = 1.0 / alpha;
  double v = 0.0;
  MvtProblem sub;
  sub.dof = alpha + 1.0;
  sub.upper.resize(dim - 1);
  sub.location.resize(dim - 1);
  sub.scale.resize(dim - 1, dim - 1);
  for (int j = 0; j < dim; ++j) {
    int r = 0;
    for (int i = 0; i < dim; ++i) {
      if (i == j) continue;
      sub.upper[r] = std::pow(z[i] / z[j], inv_alpha);
      sub.location[r] = sigma(i, j);
      ++r;
    }
    r = 0;
    for (int i = 0; i < dim; ++i) {
      if (i == j) continue;
      int c = 0;
      for (int l = 0; l < dim; ++l) {
        if (l == j) continue;
        sub.scale(r, c) =
            (sigma(i, l) - sigma(i, j) * sigma(l, j)) / (alpha + 1.0);
        ++c;
      }
      ++r;
    }
    v += mvt_cdf(sub, cfg).probability / z[j];
  }
  return v;
}

double exponent_V(const Vector& z, const EllipticalModel& model,
                  const QmcConfig& cfg) {
  return exponent_V(z, model.sigma.entries, model.alpha, cfg);
}

double log_intensity(const Vector& y, const PdMatrix& sigma, double alpha) {
  const int dim = sigma.dim();
  if (y.size() != dim) throw DomainError("intensity: dimension mismatch");
  Vector w(dim);
  double log_jac = 0.0;
  for (int j = 0; j < dim; ++j) {
    if (y[j] == 0.0) {
      throw DomainError(
          "intensity: zero component; boundary densities go through partial_V");
    }
    w[j] = signed_power(y[j], 1.0 / alpha);
    log_jac += (1.0 / alpha - 1.0) * std::log(std::fabs(y[j]));
  }
  const double quad = w.dot(sigma.solve(w));
  return (1.0 - dim) * std::log(alpha) + 0.5 * (1.0 - dim) * std::log(M_PI) -
         0.5 * sigma.log_det() - std::lgamma(0.5 * (alpha + 1.0)) +
         std::lgamma(0.5 * (alpha + dim)) + log_jac -
         0.5 * (alpha + dim) * std::log(quad);
}

double intensity_lambda(const Vector& y, const EllipticalModel& model) {
  return std::exp(log_intensity(y, model.sigma, model.alpha));
}

double log_partial_V(const Vector& y, const std::vector<int>& exceed_idx,
                     const Matrix& sigma, double alpha, const QmcConfig& cfg) {
  const int dim = static_cast<int>(y.size());
  const int d = static_cast<int>(exceed_idx.size());
  if (d < 1 || d > dim) throw DomainError("partial_V: invalid index set");
  std::vector<bool> in_set(dim, false);
  for (int j : exceed_idx) {
    if (j < 0 || j >= dim || in_set[j]) {
      throw DomainError("partial_V: invalid index set");
    }
    in_set[j] = true;
    if (!(y[j] > 0.0)) {
      throw DomainError("partial_V: exceeding components must be positive");
    }
  }
  std::vector<int> comp_idx;
  for (int j = 0; j < dim; ++j) {
    if (!in_set[j]) {
      if (y[j] < 0.0) throw DomainError("partial_V: components must be >= 0");
      comp_idx.push_back(j);
    }
  }

  const double inv_alpha = 1.0 / alpha;
  Matrix sigma_ii(d, d);
  Vector w(d);
  double log_jac = 0.0;
  for (int r = 0; r < d; ++r) {
    const int jr = exceed_idx[r];
    w[r] = std::pow(y[jr], inv_alpha);
    log_jac += (inv_alpha - 1.0) * std::log(y[jr]);
    for (int c = 0; c < d; ++c) sigma_ii(r, c) = sigma(jr, exceed_idx[c]);
  }
  const PdMatrix pd_ii = cholesky_pd(sigma_ii);
  const Vector v = pd_ii.solve(w);
  const double quad = w.dot(v);

  const double log_factor =
      (1.0 - d) * std::log(alpha) + 0.5 * (1.0 - d) * std::log(M_PI) -
      0.5 * pd_ii.log_det() - std::lgamma(0.5 * (alpha + 1.0)) +
      std::lgamma(0.5 * (alpha + d)) + log_jac -
      0.5 * (alpha + d) * std::log(quad);
  if (comp_idx.empty()) return log_factor;

  const int dc = static_cast<int>(comp_idx.size());
  Matrix sigma_ci(dc, d), sigma_cc(dc, dc);
  Vector upper(dc);
  for (int r = 0; r < dc; ++r) {
    const int jr = comp_idx[r];
    upper[r] = std::pow(y[jr], inv_alpha);
    for (int c = 0; c < d; ++c) sigma_ci(r, c) = sigma(jr, exceed_idx[c]);
    for (int c = 0; c < dc; ++c) sigma_cc(r, c) = sigma(jr, comp_idx[c]);
  }
  MvtProblem sub;
  sub.dof = d + alpha;
  sub.upper = upper;
  sub.location = sigma_ci * v;
  Matrix schur = sigma_cc - sigma_ci * pd_ii.solve(Matrix(sigma_ci.transpose()));
  schur = 0.5 * (schur + schur.transpose());
  sub.scale = (quad / (d + alpha)) * schur;
  const double p = mvt_cdf(sub, cfg).probability;
  if (p <= 0.0) return -std::numeric_limits<double>::infinity();
  return log_factor + std::log(p);
}

double partial_V(const Vector& y, const std::vector<int>& exceed_idx,
                 const EllipticalModel& model, const QmcConfig& cfg) {
  return std::exp(
      log_partial_V(y, exceed_idx, model.sigma.entries, model.alpha, cfg));
}

CondTParams cond_t_params(const Matrix& sigma_tt, const Matrix& sigma_tc,
                          const PdMatrix& sigma_cc, const Vector& y0,
                          double alpha) {
  const int d = sigma_cc.dim();
  if (y0.size() != d) throw DomainError("cond_t_params: dimension mismatch");
  Vector w(d);
  for (int j = 0; j < d; ++j) {
    if (!(y0[j] > 0.0)) {
      throw DomainError("cond_t_params: conditioning values must be positive");
    }
    w[j] = std::pow(y0[j], 1.0 / alpha);
  }
  const Vector v = sigma_cc.solve(w);
  const double quad = w.dot(v);
  CondTParams out;
  out.dof = d + alpha;
  out.mu = sigma_tc * v;
  Matrix schur = sigma_tt - sigma_tc * sigma_cc.solve(Matrix(sigma_tc.transpose()));
  schur = 0.5 * (schur + schur.transpose());
  out.scale = cholesky_pd((quad / out.dof) * schur);
  return out;
}

CondTParams cond_t_params(const Matrix& target_sites, const Matrix& cond_sites,
                          const Vector& y0, const CorrelationModel& corr,
                          double alpha) {
  corr.validate();
  const int nt = static_cast<int>(target_sites.rows());
  const int nc = static_cast<int>(cond_sites.rows());
  Matrix sigma_tt(nt, nt), sigma_tc(nt, nc);
  for (int i = 0; i < nt; ++i) {
    for (int j = 0; j < nt; ++j) {
      sigma_tt(i, j) =
          i == j ? 1.0 : corr.rho((target_sites.row(i) - target_sites.row(j)).norm());
    }
    for (int j = 0; j < nc; ++j) {
      sigma_tc(i, j) = corr.rho((target_sites.row(i) - cond_sites.row(j)).norm());
    }
  }
  const PdMatrix sigma_cc = corr_matrix(cond_sites, corr);
  return cond_t_params(sigma_tt, sigma_tc, sigma_cc, y0, alpha);
}

double cond_intensity(const Vector& y, const Matrix& target_sites,
                      const Matrix& cond_sites, const Vector& y0,
                      const CorrelationModel& corr, double alpha) {
  const CondTParams par = cond_t_params(target_sites, cond_sites, y0, corr, alpha);
  const int dim = static_cast<int>(y.size());
  Vector x(dim);
  double log_jac = 0.0;
  for (int j = 0; j < dim; ++j) {
    if (y[j] == 0.0) throw DomainError("cond_intensity: zero component");
    x[j] = signed_power(y[j], 1.0 / alpha);
    log_jac += (1.0 / alpha - 1.0) * std::log(std::fabs(y[j]));
  }
  const double logpdf = mvt_logpdf(x, par.dof, par.mu, par.scale) -
                        dim * std::log(alpha) + log_jac;
  return std::exp(logpdf);
}

double extremal_coeff_rho(double rho, double alpha) {
  if (rho < -1.0 || rho > 1.0) throw DomainError("extremal_coeff: rho out of range");
  const double arg = std::sqrt((alpha + 1.0) * (1.0 - rho) / (1.0 + rho));
  return 2.0 * t_cdf(arg, alpha + 1.0);
}

double extremal_coeff(const EllipticalModel& two_site_model) {
  if (two_site_model.n_sites() != 2) {
    throw DomainError("extremal_coeff: model must have exactly two sites");
  }
  return extremal_coeff_rho(two_site_model.sigma.entries(0, 1),
                            two_site_model.alpha);
}

}  // namespace elp
