#include "elpareto.h"

#include <cmath>
#include <cstring>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/errors.hpp"
#include "core/exponent.hpp"
#include "core/inference.hpp"
#include "core/margins.hpp"
#include "core/simulate.hpp"
#include "core/study.hpp"

using nlohmann::json;

namespace {

thread_local std::string g_last_error;

elp_status fail(elp_status code, const char* msg) {
  g_last_error = msg;
  return code;
}

// Maps the exception taxonomy onto status codes.
elp_status translate() {
  try {
    throw;
  } catch (const elp::NotPositiveDefinite& e) {
    return fail(ELP_ERR_NOT_POSITIVE_DEFINITE, e.what());
  } catch (const elp::IterationCap& e) {
    return fail(ELP_ERR_ITERATION_CAP, e.what());
  } catch (const elp::RejectionCap& e) {
    return fail(ELP_ERR_REJECTION_CAP, e.what());
  } catch (const elp::ThresholdTooLow& e) {
    return fail(ELP_ERR_THRESHOLD_TOO_LOW, e.what());
  } catch (const elp::TooFewExceedances& e) {
    return fail(ELP_ERR_TOO_FEW_EXCEEDANCES, e.what());
  } catch (const elp::EmptySample& e) {
    return fail(ELP_ERR_EMPTY_SAMPLE, e.what());
  } catch (const elp::NonConvergence& e) {
    return fail(ELP_ERR_NON_CONVERGENCE, e.what());
  } catch (const elp::Unattainable& e) {
    return fail(ELP_ERR_UNATTAINABLE, e.what());
  } catch (const elp::DomainError& e) {
    return fail(ELP_ERR_DOMAIN, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(ELP_ERR_DOMAIN, e.what());
  } catch (const json::exception& e) {
    return fail(ELP_ERR_DOMAIN, e.what());
  } catch (const std::bad_alloc&) {
    return fail(ELP_ERR_INTERNAL, "allocation failure");
  } catch (const std::exception& e) {
    return fail(ELP_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(ELP_ERR_INTERNAL, "unknown error");
  }
}

template <typename Fn>
elp_status guarded(Fn&& fn) {
  try {
    fn();
    return ELP_OK;
  } catch (...) {
    return translate();
  }
}

elp::Matrix to_matrix(const double* data, long rows, int cols) {
  elp::Matrix m(rows, cols);
  for (long i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = data[i * cols + j];
  }
  return m;
}

elp::Vector to_vector(const double* data, int n) {
  elp::Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = data[i];
  return v;
}

void write_matrix(const elp::Matrix& m, double* out) {
  for (long i = 0; i < m.rows(); ++i) {
    for (long j = 0; j < m.cols(); ++j) out[i * m.cols() + j] = m(i, j);
  }
}

elp::QmcConfig to_qmc(const elp_qmc* cfg) {
  if (!cfg) return elp::QmcConfig{};
  elp::QmcConfig q;
  q.n_points = cfg->n_points;
  q.seed = cfg->seed;
  q.n_shifts = cfg->n_shifts;
  q.validate();
  return q;
}

char* heap_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

elp::ExceedanceSample make_sample(const double* x_star, long n, int dim,
                                  const double* u, long n_total) {
  if (!x_star || !u || n < 1 || dim < 1) {
    throw elp::DomainError("sample: null data or empty dimensions");
  }
  elp::ExceedanceSample sample =
      elp::extract_exceedances(to_matrix(x_star, n, dim), to_vector(u, dim));
  if (n_total > 0) {
    if (n_total < sample.n_exceed()) {
      throw elp::DomainError("sample: n_total smaller than exceedance count");
    }
    sample.n_total = n_total;
  }
  return sample;
}

elp::LikelihoodKind to_kind(int likelihood) {
  switch (likelihood) {
    case ELP_LIK_UNCENSORED: return elp::LikelihoodKind::Uncensored;
    case ELP_LIK_CENSORED: return elp::LikelihoodKind::Censored;
    case ELP_LIK_PAIRWISE: return elp::LikelihoodKind::Pairwise;
  }
  throw elp::DomainError("unknown likelihood selector");
}

elp::StudyConfig parse_study_config(const json& j) {
  elp::StudyConfig cfg;
  if (j.contains("grid")) {
    const auto& g = j["grid"];
    cfg.sites = elp::StudyConfig::square_grid(g.at("per_side").get<int>(),
                                              g.value("extent", 1.0));
  } else if (j.contains("sites")) {
    const auto& s = j["sites"];
    cfg.sites.resize(s.size(), 2);
    for (std::size_t i = 0; i < s.size(); ++i) {
      cfg.sites(static_cast<int>(i), 0) = s[i].at(0).get<double>();
      cfg.sites(static_cast<int>(i), 1) = s[i].at(1).get<double>();
    }
  } else {
    cfg.sites = elp::StudyConfig::square_grid(3);
  }
  if (j.contains("kappas")) cfg.kappas = j["kappas"].get<std::vector<double>>();
  if (j.contains("alphas")) cfg.alphas = j["alphas"].get<std::vector<double>>();
  if (j.contains("thetas")) cfg.thetas = j["thetas"].get<std::vector<double>>();
  if (j.contains("threshold_quantiles")) {
    cfg.threshold_quantiles = j["threshold_quantiles"].get<std::vector<double>>();
  }
  cfg.calib_distance = j.value("calib_distance", cfg.calib_distance);
  cfg.reps = j.value("reps", cfg.reps);
  cfg.sample_size = j.value("sample_size", cfg.sample_size);
  cfg.seed = j.value("seed", cfg.seed);
  if (j.contains("estimators")) {
    cfg.estimators.clear();
    for (const auto& name : j["estimators"]) {
      const std::string s = name.get<std::string>();
      if (s == "L1") {
        cfg.estimators.push_back(elp::LikelihoodKind::Uncensored);
      } else if (s == "L2") {
        cfg.estimators.push_back(elp::LikelihoodKind::Censored);
      } else if (s == "pairwise") {
        cfg.estimators.push_back(elp::LikelihoodKind::Pairwise);
      } else {
        throw elp::DomainError("study config: unknown estimator " + s);
      }
    }
  }
  if (j.contains("qmc")) {
    const auto& q = j["qmc"];
    cfg.fit_opts.qmc.n_points = q.value("n_points", cfg.fit_opts.qmc.n_points);
    cfg.fit_opts.qmc.n_shifts = q.value("n_shifts", cfg.fit_opts.qmc.n_shifts);
    cfg.fit_opts.qmc.seed = q.value("seed", cfg.fit_opts.qmc.seed);
    cfg.fit_opts.qmc.validate();
  }
  cfg.fit_opts.max_evals = j.value("max_evals", cfg.fit_opts.max_evals);
  return cfg;
}

}  // namespace

struct elp_model {
  elp::EllipticalModel model;
};

struct elp_margin {
  elp::MarginalFit fit;
};

extern "C" {

const char* elp_version(void) { return "1.0.0"; }

const char* elp_last_error(void) { return g_last_error.c_str(); }

void elp_free_string(char* s) { delete[] s; }

void elp_qmc_default(elp_qmc* cfg) {
  const elp::QmcConfig q;
  cfg->n_points = q.n_points;
  cfg->seed = q.seed;
  cfg->n_shifts = q.n_shifts;
}

void elp_qmc_fit_profile(elp_qmc* cfg) {
  const elp::FitOptions opts;
  cfg->n_points = opts.qmc.n_points;
  cfg->seed = opts.qmc.seed;
  cfg->n_shifts = opts.qmc.n_shifts;
}

elp_status elp_model_create(const double* sites, int n_sites, int space_dim,
                            double log_lambda, double kappa, double alpha,
                            elp_model** out) {
  return guarded([&] {
    if (!sites || !out || n_sites < 1 || space_dim < 1) {
      throw elp::DomainError("elp_model_create: null or empty arguments");
    }
    const elp::ParamVector psi{log_lambda, kappa, alpha};
    auto m = std::make_unique<elp_model>(
        elp_model{elp::EllipticalModel::create(to_matrix(sites, n_sites, space_dim), psi)});
    *out = m.release();
  });
}

void elp_model_free(elp_model* m) { delete m; }

elp_status elp_model_params(const elp_model* m, double* log_lambda,
                            double* kappa, double* alpha) {
  return guarded([&] {
    if (!m) throw elp::DomainError("elp_model_params: null model");
    if (log_lambda) *log_lambda = std::log(m->model.corr.lambda);
    if (kappa) *kappa = m->model.corr.kappa;
    if (alpha) *alpha = m->model.alpha;
  });
}

elp_status elp_model_dim(const elp_model* m, int* n_sites, int* space_dim) {
  return guarded([&] {
    if (!m) throw elp::DomainError("elp_model_dim: null model");
    if (n_sites) *n_sites = m->model.n_sites();
    if (space_dim) *space_dim = static_cast<int>(m->model.sites.cols());
  });
}

elp_status elp_exponent_v(const elp_model* m, const double* z,
                          const elp_qmc* qmc, double* out) {
  return guarded([&] {
    if (!m || !z || !out) throw elp::DomainError("elp_exponent_v: null argument");
    *out = elp::exponent_V(to_vector(z, m->model.n_sites()), m->model, to_qmc(qmc));
  });
}

elp_status elp_intensity(const elp_model* m, const double* y, double* out) {
  return guarded([&] {
    if (!m || !y || !out) throw elp::DomainError("elp_intensity: null argument");
    *out = elp::intensity_lambda(to_vector(y, m->model.n_sites()), m->model);
  });
}

elp_status elp_partial_v(const elp_model* m, const double* y,
                         const int* exceed_idx, int n_exceed,
                         const elp_qmc* qmc, double* out) {
  return guarded([&] {
    if (!m || !y || !exceed_idx || !out || n_exceed < 1) {
      throw elp::DomainError("elp_partial_v: null or empty argument");
    }
    const std::vector<int> idx(exceed_idx, exceed_idx + n_exceed);
    *out = elp::partial_V(to_vector(y, m->model.n_sites()), idx, m->model, to_qmc(qmc));
  });
}

elp_status elp_extremal_coeff(double rho, double alpha, double* out) {
  return guarded([&] {
    if (!out) throw elp::DomainError("elp_extremal_coeff: null output");
    *out = elp::extremal_coeff_rho(rho, alpha);
  });
}

elp_status elp_extremal_coeff_dist(const elp_model* m, double distance,
                                   double* out) {
  return guarded([&] {
    if (!m || !out) throw elp::DomainError("elp_extremal_coeff_dist: null argument");
    *out = elp::extremal_coeff_rho(m->model.corr.rho(distance), m->model.alpha);
  });
}

elp_status elp_calibrate_lambda(double kappa, double alpha, double theta_target,
                                double distance, double* lambda) {
  return guarded([&] {
    if (!lambda) throw elp::DomainError("elp_calibrate_lambda: null output");
    *lambda = elp::calibrate_lambda(kappa, alpha, theta_target, distance);
  });
}

elp_status elp_bound_b(int dim, double alpha, double* out) {
  return guarded([&] {
    if (!out) throw elp::DomainError("elp_bound_b: null output");
    *out = elp::bound_b(dim, alpha);
  });
}

elp_status elp_simulate_extremal_t(const elp_model* m, int n, uint64_t seed,
                                   double* out) {
  return guarded([&] {
    if (!m || !out || n < 1) throw elp::DomainError("elp_simulate_extremal_t: bad arguments");
    write_matrix(elp::simulate_extremal_t(m->model, n, seed).draws, out);
  });
}

elp_status elp_simulate_pareto(const elp_model* m, int risk_kind,
                               const double* weights, int n, uint64_t seed,
                               double* out) {
  return guarded([&] {
    if (!m || !out || n < 1) throw elp::DomainError("elp_simulate_pareto: bad arguments");
    elp::RiskFunctional ell;
    switch (risk_kind) {
      case ELP_RISK_WEIGHTED_MAX: ell.kind = elp::RiskKind::WeightedMax; break;
      case ELP_RISK_WEIGHTED_MIN: ell.kind = elp::RiskKind::WeightedMin; break;
      case ELP_RISK_WEIGHTED_SUM: ell.kind = elp::RiskKind::WeightedSum; break;
      case ELP_RISK_SUP: ell.kind = elp::RiskKind::Sup; break;
      default: throw elp::DomainError("elp_simulate_pareto: unknown risk kind");
    }
    const int dim = m->model.n_sites();
    if (ell.kind != elp::RiskKind::Sup) {
      if (!weights) throw elp::DomainError("elp_simulate_pareto: weights required");
      ell.weights = to_vector(weights, dim);
    } else {
      ell.weights = elp::Vector::Ones(dim);
    }
    write_matrix(elp::simulate_pareto(m->model, ell, n, seed).draws, out);
  });
}

elp_status elp_simulate_conditional(const elp_model* m, const double* cond_sites,
                                    int n_cond, const double* cond_values,
                                    const double* target_sites, int n_target,
                                    int n, uint64_t seed, int clamp_negative,
                                    double* out) {
  return guarded([&] {
    if (!m || !cond_sites || !cond_values || !target_sites || !out ||
        n_cond < 1 || n_target < 1 || n < 1) {
      throw elp::DomainError("elp_simulate_conditional: bad arguments");
    }
    const int sd = static_cast<int>(m->model.sites.cols());
    write_matrix(elp::simulate_conditional(
                     m->model, to_matrix(cond_sites, n_cond, sd),
                     to_vector(cond_values, n_cond),
                     to_matrix(target_sites, n_target, sd), n, seed,
                     clamp_negative != 0)
                     .draws,
                 out);
  });
}

elp_status elp_gpd_fit(const double* data, long n, double threshold,
                       double* sigma, double* xi, double* se_sigma,
                       double* se_xi, int* n_exceed) {
  return guarded([&] {
    if (!data || n < 1) throw elp::DomainError("elp_gpd_fit: null or empty data");
    const elp::GpdFit fit =
        elp::fit_gpd_site(std::vector<double>(data, data + n), threshold);
    if (sigma) *sigma = fit.sigma;
    if (xi) *xi = fit.xi;
    if (se_sigma) *se_sigma = fit.se_sigma;
    if (se_xi) *se_xi = fit.se_xi;
    if (n_exceed) *n_exceed = fit.n_exceed;
  });
}

elp_status elp_margin_fit(const double* data, long n, double quantile_level,
                          elp_margin** out) {
  return guarded([&] {
    if (!data || !out || n < 1) throw elp::DomainError("elp_margin_fit: bad arguments");
    auto m = std::make_unique<elp_margin>(
        elp_margin{elp::fit_margin(std::vector<double>(data, data + n), quantile_level)});
    *out = m.release();
  });
}

void elp_margin_free(elp_margin* m) { delete m; }

elp_status elp_margin_info(const elp_margin* m, double* threshold,
                           double* quantile_level, double* sigma, double* xi,
                           double* se_sigma, double* se_xi, int* n_exceed) {
  return guarded([&] {
    if (!m) throw elp::DomainError("elp_margin_info: null margin");
    if (threshold) *threshold = m->fit.threshold;
    if (quantile_level) *quantile_level = m->fit.quantile_level;
    if (sigma) *sigma = m->fit.gpd.sigma;
    if (xi) *xi = m->fit.gpd.xi;
    if (se_sigma) *se_sigma = m->fit.gpd.se_sigma;
    if (se_xi) *se_xi = m->fit.gpd.se_xi;
    if (n_exceed) *n_exceed = m->fit.gpd.n_exceed;
  });
}

elp_status elp_margin_to_standard(const elp_margin* m, const double* x, long n,
                                  double* out) {
  return guarded([&] {
    if (!m || !x || !out) throw elp::DomainError("elp_margin_to_standard: null argument");
    for (long i = 0; i < n; ++i) out[i] = m->fit.to_standard(x[i]);
  });
}

elp_status elp_margin_from_standard(const elp_margin* m, const double* x_star,
                                    long n, double* out) {
  return guarded([&] {
    if (!m || !x_star || !out) {
      throw elp::DomainError("elp_margin_from_standard: null argument");
    }
    for (long i = 0; i < n; ++i) out[i] = m->fit.from_standard(x_star[i]);
  });
}

elp_status elp_nll(const double* x_star, long n, int dim, const double* u,
                   long n_total, const elp_model* m, int likelihood,
                   const elp_qmc* qmc, double* out) {
  return guarded([&] {
    if (!m || !out) throw elp::DomainError("elp_nll: null argument");
    const elp::ExceedanceSample sample = make_sample(x_star, n, dim, u, n_total);
    if (m->model.n_sites() != dim) throw elp::DomainError("elp_nll: dimension mismatch");
    *out = elp::nll(sample, m->model.sigma.entries, m->model.alpha,
                    to_kind(likelihood), to_qmc(qmc));
  });
}

elp_status elp_fit_dependence(const double* x_star, long n, int dim,
                              const double* u, long n_total,
                              const double* sites, int space_dim,
                              int likelihood, const double* init_psi,
                              const elp_qmc* qmc, int max_evals,
                              elp_fit_result* out) {
  return guarded([&] {
    if (!sites || !out || space_dim < 1) {
      throw elp::DomainError("elp_fit_dependence: null argument");
    }
    const elp::ExceedanceSample sample = make_sample(x_star, n, dim, u, n_total);
    elp::FitOptions opts;
    if (qmc) opts.qmc = to_qmc(qmc);
    if (max_evals > 0) opts.max_evals = max_evals;
    elp::ParamVector init;
    const elp::ParamVector* init_ptr = nullptr;
    if (init_psi) {
      init = elp::ParamVector{init_psi[0], init_psi[1], init_psi[2]};
      init_ptr = &init;
    }
    const elp::FitResult fit =
        elp::fit_model(sample, to_matrix(sites, dim, space_dim),
                       to_kind(likelihood), init_ptr, opts);
    out->psi[0] = fit.psi.log_lambda;
    out->psi[1] = fit.psi.kappa;
    out->psi[2] = fit.psi.alpha;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) out->cov[i * 3 + j] = fit.cov(i, j);
    }
    out->nll = fit.nll;
    out->aic = fit.aic;
    out->n_evals = fit.n_evals;
    out->converged = fit.converged ? 1 : 0;
    out->hessian_pd = fit.hessian_pd ? 1 : 0;
    out->at_edge = fit.at_edge ? 1 : 0;
  });
}

elp_status elp_empirical_extremal_coeff(const double* x1, const double* x2,
                                        long n, double threshold, int n_boot,
                                        uint64_t seed, double* theta,
                                        double* ci_lo, double* ci_hi) {
  return guarded([&] {
    if (!x1 || !x2 || !theta) {
      throw elp::DomainError("elp_empirical_extremal_coeff: null argument");
    }
    const elp::EmpiricalTheta est = elp::empirical_extremal_coeff(
        std::vector<double>(x1, x1 + n), std::vector<double>(x2, x2 + n),
        threshold, n_boot, seed);
    *theta = est.theta;
    if (ci_lo) *ci_lo = est.ci_lo;
    if (ci_hi) *ci_hi = est.ci_hi;
  });
}

elp_status elp_study_run(const char* config_json, char** report_json,
                         char** report_csv) {
  return guarded([&] {
    if (!config_json) throw elp::DomainError("elp_study_run: null config");
    json j;
    try {
      j = json::parse(config_json);
    } catch (const json::exception& e) {
      throw elp::DomainError(std::string("elp_study_run: bad config: ") + e.what());
    }
    const std::string kind = j.at("kind").get<std::string>();
    const elp::StudyConfig cfg = parse_study_config(j);
    elp::StudyReport report;
    if (kind == "recovery") {
      report = elp::run_recovery_study(cfg);
    } else if (kind == "misspec") {
      report = elp::run_misspec_study(cfg);
    } else {
      throw elp::DomainError("elp_study_run: kind must be recovery or misspec");
    }
    if (report_json) *report_json = heap_string(report.to_json());
    if (report_csv) *report_csv = heap_string(report.to_csv());
  });
}

}  // extern "C"
