#include "study.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "errors.hpp"
#include "rng.hpp"
#include "simulate.hpp"
#include "special.hpp"

namespace elp {

namespace {

using nlohmann::json;

std::string estimator_name(LikelihoodKind kind) {
  switch (kind) {
    case LikelihoodKind::Uncensored: return "L1";
    case LikelihoodKind::Censored: return "L2";
    case LikelihoodKind::Pairwise: return "pairwise";
  }
  return "?";
}

std::uint64_t rep_seed(std::uint64_t base, std::size_t cell, int rep) {
  std::uint64_t x = base ^ (0x9E3779B97F4A7C15ULL * (cell * 100003ULL + rep + 1));
  x ^= x >> 33;
  x *= 0xFF51AFD7ED558CCDULL;
  x ^= x >> 33;
  return x;
}

EstimatorStats reduce_stats(const std::string& name,
                            const std::vector<Vector>& estimates, int n_fail,
                            const ParamVector& psi0) {
  EstimatorStats st;
  st.name = name;
  st.n_ok = static_cast<int>(estimates.size());
  st.n_fail = n_fail;
  st.valid = n_fail <= 0.1 * (st.n_ok + n_fail) && st.n_ok >= 2;
  if (estimates.empty()) return st;
  Vector mean = Vector::Zero(3);
  for (const Vector& e : estimates) mean += e;
  mean /= estimates.size();
  Vector truth(3);
  truth << psi0.log_lambda, psi0.kappa, psi0.alpha;
  st.bias = mean - truth;
  // ML normalization keeps MSE = |bias|^2 + trace exact
  for (const Vector& e : estimates) {
    st.cov += (e - mean) * (e - mean).transpose();
  }
  st.cov /= estimates.size();
  st.trace = st.cov.trace();
  st.mse = st.bias.squaredNorm() + st.trace;
  return st;
}

double safe_ratio(const EstimatorStats* num, const EstimatorStats* den,
                  bool use_mse) {
  if (!num || !den || num->n_ok < 2 || den->n_ok < 2) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  const double a = use_mse ? num->mse : num->trace;
  const double b = use_mse ? den->mse : den->trace;
  return b > 0.0 ? 100.0 * a / b : std::numeric_limits<double>::quiet_NaN();
}

json stats_to_json(const EstimatorStats& st) {
  json j;
  j["name"] = st.name;
  j["bias_x100"] = {100.0 * st.bias[0], 100.0 * st.bias[1], 100.0 * st.bias[2]};
  j["trace_x100"] = 100.0 * st.trace;
  j["mse_x100"] = 100.0 * st.mse;
  j["n_ok"] = st.n_ok;
  j["n_fail"] = st.n_fail;
  j["valid"] = st.valid;
  std::vector<std::vector<double>> cov(3, std::vector<double>(3));
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) cov[r][c] = st.cov(r, c);
  }
  j["cov"] = cov;
  return j;
}

}  // namespace

Matrix StudyConfig::square_grid(int per_side, double extent) {
  Matrix sites(per_side * per_side, 2);
  const double step = per_side > 1 ? extent / (per_side - 1) : 0.0;
  int r = 0;
  for (int i = 0; i < per_side; ++i) {
    for (int j = 0; j < per_side; ++j) {
      sites(r, 0) = i * step;
      sites(r, 1) = j * step;
      ++r;
    }
  }
  return sites;
}

StudyConfig StudyConfig::desk() {
  StudyConfig cfg;
  cfg.sites = square_grid(3);
  cfg.reps = 200;
  cfg.sample_size = 250;
  return cfg;
}

StudyConfig StudyConfig::full_scale() {
  StudyConfig cfg;
  cfg.sites = square_grid(4);
  cfg.reps = 1000;
  cfg.sample_size = 1000;
  cfg.kappas = {0.5, 1.0, 1.5};
  cfg.alphas = {1.0, 2.0, 5.0, 10.0};
  cfg.thetas = {1.2, 1.4, 1.6};
  return cfg;
}

StudyConfig StudyConfig::smoke() {
  StudyConfig cfg;
  cfg.sites = square_grid(2);
  cfg.reps = 2;
  cfg.sample_size = 60;
  cfg.estimators = {LikelihoodKind::Censored, LikelihoodKind::Pairwise};
  cfg.fit_opts.max_evals = 300;
  return cfg;
}

void StudyConfig::validate() const {
  if (reps < 2) throw DomainError("StudyConfig: reps must be >= 2");
  if (sample_size < 1) throw DomainError("StudyConfig: sample_size must be positive");
  if (sites.rows() < 2) throw DomainError("StudyConfig: need at least 2 sites");
  for (double th : thetas) {
    if (!(th > 1.0) || !(th < 2.0)) {
      throw DomainError("StudyConfig: theta targets must lie in (1, 2)");
    }
  }
}

double calibrate_lambda(double kappa, double alpha, double theta_target,
                        double distance) {
  const double theta_max = 2.0 * t_cdf(std::sqrt(alpha + 1.0), alpha + 1.0);
  if (!(theta_target > 1.0) || !(theta_target < theta_max)) {
    throw Unattainable("calibrate_lambda: theta target outside (1, theta_max)");
  }
  const CorrelationModel base{1.0, kappa};
  auto theta_at = [&](double log_lambda) {
    const CorrelationModel cm{std::exp(log_lambda), kappa};
    return extremal_coeff_rho(cm.rho(distance), alpha);
  };
  double lo = -30.0, hi = 30.0;  // theta decreasing in lambda
  (void)base;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double th = theta_at(mid);
    if (std::fabs(th - theta_target) <= 1e-9) return std::exp(mid);
    if (th > theta_target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::exp(0.5 * (lo + hi));
}

const EstimatorStats* StudyCellResult::find(const std::string& name) const {
  for (const auto& st : estimators) {
    if (st.name == name) return &st;
  }
  return nullptr;
}

double StudyCellResult::ratio_uncensored_censored() const {
  return safe_ratio(find("L1"), find("L2"), false);
}
double StudyCellResult::ratio_censored_pairwise() const {
  return safe_ratio(find("L2"), find("pairwise"), false);
}
double StudyCellResult::mse_ratio_censored_uncensored() const {
  return safe_ratio(find("L2"), find("L1"), true);
}
double StudyCellResult::mse_ratio_censored_pairwise() const {
  return safe_ratio(find("L2"), find("pairwise"), true);
}

StudyReport run_recovery_study(const StudyConfig& cfg) {
  cfg.validate();
  StudyReport report;
  report.kind = "recovery";
  report.seed = cfg.seed;

  const int dim = static_cast<int>(cfg.sites.rows());
  std::size_t cell_index = 0;
  for (double q : cfg.threshold_quantiles) {
    const Vector u = Vector::Constant(dim, 1.0 / (1.0 - q));
    for (double kappa : cfg.kappas) {
      for (double alpha : cfg.alphas) {
        for (double theta : cfg.thetas) {
          const auto t_start = std::chrono::steady_clock::now();
          StudyCellResult cell;
          cell.kappa = kappa;
          cell.alpha = alpha;
          cell.theta = theta;
          cell.threshold_quantile = q;
          cell.lambda = calibrate_lambda(kappa, alpha, theta, cfg.calib_distance);
          cell.psi_true = ParamVector{std::log(cell.lambda), kappa, alpha};
          const EllipticalModel model = EllipticalModel::create(cfg.sites, cell.psi_true);

          // implied total sample size behind N_u exceedances
          const double vu = exponent_V(u, model, cfg.fit_opts.qmc);
          const long n_total =
              std::max<long>(cfg.sample_size,
                             std::lround(cfg.sample_size / std::min(vu, 1.0)));

          RiskFunctional ell{RiskKind::WeightedMax, u};
          std::vector<std::vector<Vector>> estimates(cfg.estimators.size());
          std::vector<int> failures(cfg.estimators.size(), 0);
          for (int rep = 0; rep < cfg.reps; ++rep) {
            const std::uint64_t rs = rep_seed(cfg.seed, cell_index, rep);
            const SimBatch batch = simulate_pareto(model, ell, cfg.sample_size, rs);
            ExceedanceSample sample = extract_exceedances(batch.draws, u);
            sample.n_total = n_total;
            for (std::size_t e = 0; e < cfg.estimators.size(); ++e) {
              try {
                const FitResult fit = fit_model(sample, cfg.sites,
                                                cfg.estimators[e], nullptr,
                                                cfg.fit_opts);
                Vector est(3);
                est << fit.psi.log_lambda, fit.psi.kappa, fit.psi.alpha;
                estimates[e].push_back(est);
              } catch (const std::exception&) {
                ++failures[e];
              }
            }
          }
          for (std::size_t e = 0; e < cfg.estimators.size(); ++e) {
            cell.estimators.push_back(
                reduce_stats(estimator_name(cfg.estimators[e]), estimates[e],
                             failures[e], cell.psi_true));
          }
          cell.runtime_sec = std::chrono::duration<double>(
                                 std::chrono::steady_clock::now() - t_start)
                                 .count();
          report.cells.push_back(std::move(cell));
          ++cell_index;
        }
      }
    }
  }
  return report;
}

StudyReport run_misspec_study(const StudyConfig& cfg) {
  cfg.validate();
  StudyReport report;
  report.kind = "misspec";
  report.seed = cfg.seed;

  const int dim = static_cast<int>(cfg.sites.rows());
  std::size_t cell_index = 1000000;
  for (double q : cfg.threshold_quantiles) {
    const Vector u = Vector::Constant(dim, 1.0 / (1.0 - q));
    for (double kappa : cfg.kappas) {
      for (double alpha : cfg.alphas) {
        for (double theta : cfg.thetas) {
          const auto t_start = std::chrono::steady_clock::now();
          StudyCellResult cell;
          cell.kappa = kappa;
          cell.alpha = alpha;
          cell.theta = theta;
          cell.threshold_quantile = q;
          cell.lambda = calibrate_lambda(kappa, alpha, theta, cfg.calib_distance);
          cell.psi_true = ParamVector{std::log(cell.lambda), kappa, alpha};
          const EllipticalModel model = EllipticalModel::create(cfg.sites, cell.psi_true);

          std::vector<std::vector<Vector>> estimates(cfg.estimators.size());
          std::vector<int> failures(cfg.estimators.size(), 0);
          Matrix x_star(cfg.sample_size, dim);
          Vector g(dim);
          for (int rep = 0; rep < cfg.reps; ++rep) {
            RngStream rs(rep_seed(cfg.seed, cell_index, rep), 0);
            // t process with alpha dof and correlation Sigma,
            // margins mapped to the standard Pareto scale exactly
            for (int i = 0; i < cfg.sample_size; ++i) {
              for (int j = 0; j < dim; ++j) g[j] = rs.gauss();
              const double denom = std::sqrt(rs.chi_squared(alpha) / alpha);
              const Vector x = (model.sigma.chol * g) / denom;
              for (int j = 0; j < dim; ++j) {
                x_star(i, j) = 1.0 / (1.0 - t_cdf(x[j], alpha));
              }
            }
            try {
              const ExceedanceSample sample = extract_exceedances(x_star, u);
              for (std::size_t e = 0; e < cfg.estimators.size(); ++e) {
                try {
                  const FitResult fit = fit_model(sample, cfg.sites,
                                                  cfg.estimators[e], nullptr,
                                                  cfg.fit_opts);
                  Vector est(3);
                  est << fit.psi.log_lambda, fit.psi.kappa, fit.psi.alpha;
                  estimates[e].push_back(est);
                } catch (const std::exception&) {
                  ++failures[e];
                }
              }
            } catch (const EmptySample&) {
              for (auto& f : failures) ++f;
            }
          }
          for (std::size_t e = 0; e < cfg.estimators.size(); ++e) {
            cell.estimators.push_back(
                reduce_stats(estimator_name(cfg.estimators[e]), estimates[e],
                             failures[e], cell.psi_true));
          }
          cell.runtime_sec = std::chrono::duration<double>(
                                 std::chrono::steady_clock::now() - t_start)
                                 .count();
          report.cells.push_back(std::move(cell));
          ++cell_index;
        }
      }
    }
  }
  return report;
}

std::string StudyReport::to_json() const {
  json j;
  j["kind"] = kind;
  j["seed"] = seed;
  j["cells"] = json::array();
  for (const auto& cell : cells) {
    json c;
    c["kappa"] = cell.kappa;
    c["alpha"] = cell.alpha;
    c["theta"] = cell.theta;
    c["lambda"] = cell.lambda;
    c["threshold_quantile"] = cell.threshold_quantile;
    c["psi_true"] = {cell.psi_true.log_lambda, cell.psi_true.kappa,
                     cell.psi_true.alpha};
    c["runtime_sec"] = cell.runtime_sec;
    c["estimators"] = json::array();
    for (const auto& st : cell.estimators) c["estimators"].push_back(stats_to_json(st));
    c["trace_ratio_uncensored_censored"] = cell.ratio_uncensored_censored();
    c["trace_ratio_censored_pairwise"] = cell.ratio_censored_pairwise();
    if (kind == "misspec") {
      c["mse_ratio_censored_uncensored"] = cell.mse_ratio_censored_uncensored();
      c["mse_ratio_censored_pairwise"] = cell.mse_ratio_censored_pairwise();
    }
    j["cells"].push_back(std::move(c));
  }
  return j.dump(2);
}

std::string StudyReport::to_csv() const {
  std::ostringstream os;
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  os << "kind,kappa,alpha,theta,lambda,threshold_quantile,estimator,"
        "bias_loglambda_x100,bias_kappa_x100,bias_alpha_x100,"
        "trace_x100,mse_x100,n_ok,n_fail,valid,"
        "trace_ratio_uncensored_censored,trace_ratio_censored_pairwise\n";
  for (const auto& cell : cells) {
    for (const auto& st : cell.estimators) {
      os << kind << ',' << num(cell.kappa) << ',' << num(cell.alpha) << ','
         << num(cell.theta) << ',' << num(cell.lambda) << ','
         << num(cell.threshold_quantile) << ',' << st.name << ','
         << num(100.0 * st.bias[0]) << ',' << num(100.0 * st.bias[1]) << ','
         << num(100.0 * st.bias[2]) << ',' << num(100.0 * st.trace) << ','
         << num(100.0 * st.mse) << ',' << st.n_ok << ',' << st.n_fail << ','
         << (st.valid ? 1 : 0) << ',' << num(cell.ratio_uncensored_censored())
         << ',' << num(cell.ratio_censored_pairwise()) << '\n';
    }
  }
  return os.str();
}

EmpiricalTheta empirical_extremal_coeff(const std::vector<double>& x1,
                                        const std::vector<double>& x2,
                                        double threshold, int n_boot,
                                        std::uint64_t seed,
                                        const FitOptions& opts) {
  if (x1.size() != x2.size()) {
    throw DomainError("empirical_extremal_coeff: column length mismatch");
  }
  const int n = static_cast<int>(x1.size());
  if (n < 100) {
    throw TooFewExceedances("empirical_extremal_coeff: need >= 100 joint observations");
  }
  Matrix data(n, 2);
  for (int i = 0; i < n; ++i) {
    data(i, 0) = x1[i];
    data(i, 1) = x2[i];
  }
  const Vector u = Vector::Constant(2, threshold);

  auto theta_of = [&](const Matrix& rows) {
    const ExceedanceSample sample = extract_exceedances(rows, u);
    const PairFit fit = fit_bivariate_rho(sample, opts);
    return extremal_coeff_rho(fit.rho, fit.alpha);
  };

  EmpiricalTheta out;
  out.theta = theta_of(data);

  std::vector<double> boot;
  RngStream rs(seed, 0);
  Matrix resampled(n, 2);
  for (int b = 0; b < n_boot; ++b) {
    for (int i = 0; i < n; ++i) {
      const int k = static_cast<int>(rs.uniform() * n);
      resampled.row(i) = data.row(std::min(k, n - 1));
    }
    try {
      boot.push_back(theta_of(resampled));
    } catch (const std::exception&) {
      // resample without exceedances or a failed fit: skip
    }
  }
  out.n_boot = static_cast<int>(boot.size());
  if (boot.size() >= 20) {
    std::sort(boot.begin(), boot.end());
    out.ci_lo = boot[static_cast<std::size_t>(0.025 * (boot.size() - 1))];
    out.ci_hi = boot[static_cast<std::size_t>(std::ceil(0.975 * (boot.size() - 1)))];
  } else {
    out.ci_lo = 1.0;
    out.ci_hi = 2.0;
  }
  return out;
}

}  // namespace elp
