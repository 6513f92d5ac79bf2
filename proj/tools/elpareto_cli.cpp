// Command-line front end.  Talks to the library exclusively through the
// C API in elpareto.h.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "elpareto.h"

using nlohmann::json;

namespace {

constexpr int kExitNumeric = 1;
constexpr int kExitIo = 2;

struct CliError {
  int code;
  std::string msg;
};

[[noreturn]] void die_io(const std::string& msg) { throw CliError{kExitIo, msg}; }

void check(elp_status st, const std::string& what) {
  if (st != ELP_OK) {
    throw CliError{kExitNumeric, what + ": " + elp_last_error()};
  }
}

std::string num17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    // trim surrounding whitespace
    const auto a = field.find_first_not_of(" \t\r");
    const auto b = field.find_last_not_of(" \t\r");
    out.push_back(a == std::string::npos ? "" : field.substr(a, b - a + 1));
  }
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

struct SiteTable {
  std::vector<std::string> ids;
  std::vector<double> coords;  // row-major n x space_dim
  int space_dim = 2;

  int n() const { return static_cast<int>(ids.size()); }
  int index_of(const std::string& id) const {
    for (int i = 0; i < n(); ++i) {
      if (ids[i] == id) return i;
    }
    return -1;
  }
};

// sites.csv: id,x,y[,elev]
SiteTable read_sites(const std::string& path) {
  std::ifstream in(path);
  if (!in) die_io("cannot open sites file: " + path);
  SiteTable t;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    auto f = split_csv_line(line);
    if (line_no == 1 && !f.empty() && f[0] == "id") {
      t.space_dim = static_cast<int>(f.size()) - 1;
      continue;
    }
    if (f.size() < 3 || f.size() > 4) {
      die_io(path + ":" + std::to_string(line_no) + ": expected id,x,y[,elev]");
    }
    t.ids.push_back(f[0]);
    try {
      for (std::size_t j = 1; j < f.size(); ++j) {
        t.coords.push_back(std::stod(f[j]));
      }
    } catch (const std::exception&) {
      die_io(path + ":" + std::to_string(line_no) + ": bad number");
    }
    if (t.space_dim != static_cast<int>(f.size()) - 1) {
      if (t.ids.size() == 1) {
        t.space_dim = static_cast<int>(f.size()) - 1;
      } else {
        die_io(path + ":" + std::to_string(line_no) + ": inconsistent column count");
      }
    }
  }
  if (t.ids.empty()) die_io(path + ": no sites");
  return t;
}

// data.csv: date,site_id,value (long format); pivots to dates x sites with
// NaN for missing cells.
struct DataTable {
  std::vector<std::string> dates;
  std::vector<double> values;  // row-major n_dates x n_sites
};

DataTable read_data(const std::string& path, const SiteTable& sites) {
  std::ifstream in(path);
  if (!in) die_io("cannot open data file: " + path);
  std::map<std::string, std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  const double nan = std::nan("");
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    auto f = split_csv_line(line);
    if (line_no == 1 && !f.empty() && f[0] == "date") continue;
    if (f.size() != 3) {
      die_io(path + ":" + std::to_string(line_no) + ": expected date,site_id,value");
    }
    const int j = sites.index_of(f[1]);
    if (j < 0) {
      die_io(path + ":" + std::to_string(line_no) + ": unknown site id " + f[1]);
    }
    auto it = rows.find(f[0]);
    if (it == rows.end()) {
      it = rows.emplace(f[0], std::vector<double>(sites.n(), nan)).first;
    }
    try {
      it->second[j] = f[2].empty() ? nan : std::stod(f[2]);
    } catch (const std::exception&) {
      die_io(path + ":" + std::to_string(line_no) + ": bad value");
    }
  }
  if (rows.empty()) die_io(path + ": no observations");
  DataTable out;
  for (auto& [date, vals] : rows) {
    out.dates.push_back(date);
    out.values.insert(out.values.end(), vals.begin(), vals.end());
  }
  return out;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) die_io("cannot write " + path);
  out << content;
  if (!out) die_io("write failed: " + path);
}

struct ModelHandle {
  elp_model* m = nullptr;
  ~ModelHandle() { elp_model_free(m); }
};

struct MarginHandle {
  elp_margin* m = nullptr;
  ~MarginHandle() { elp_margin_free(m); }
};

struct ModelSpec {
  double log_lambda = 0.0;
  double kappa = 1.0;
  double alpha = 2.0;
};

ModelSpec spec_from_fit_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) die_io("cannot open fit file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    die_io(path + ": bad JSON: " + e.what());
  }
  ModelSpec spec;
  try {
    spec.log_lambda = j.at("psi").at("log_lambda").get<double>();
    spec.kappa = j.at("psi").at("kappa").get<double>();
    spec.alpha = j.at("psi").at("alpha").get<double>();
  } catch (const json::exception& e) {
    die_io(path + ": missing psi fields: " + e.what());
  }
  return spec;
}

ModelHandle make_model(const SiteTable& sites, const ModelSpec& spec) {
  ModelHandle h;
  check(elp_model_create(sites.coords.data(), sites.n(), sites.space_dim,
                         spec.log_lambda, spec.kappa, spec.alpha, &h.m),
        "model");
  return h;
}

std::string draws_csv(const std::vector<std::string>& ids,
                      const std::vector<double>& draws, int n) {
  const int dim = static_cast<int>(ids.size());
  std::ostringstream os;
  for (int j = 0; j < dim; ++j) os << (j ? "," : "") << ids[j];
  os << '\n';
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < dim; ++j) {
      os << (j ? "," : "") << num17(draws[i * dim + j]);
    }
    os << '\n';
  }
  return os.str();
}

int resolve_threads(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("PARETO_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 1;
}

// ---- fit ---------------------------------------------------------------

struct FitArgs {
  std::string sites_file, data_file, out_dir = ".";
  double quantile = 0.95;
  std::string likelihood = "l2";
  int qmc_points = 0, qmc_shifts = 0, max_evals = 0, threads = 0;
  std::uint64_t seed = 0;
  std::optional<double> init_loglambda, init_kappa, init_alpha;
  bool empirical_theta = false;
};

int likelihood_code(const std::string& name) {
  if (name == "l1" || name == "uncensored") return ELP_LIK_UNCENSORED;
  if (name == "l2" || name == "censored") return ELP_LIK_CENSORED;
  if (name == "pairwise") return ELP_LIK_PAIRWISE;
  die_io("unknown likelihood: " + name);
}

void run_fit(const FitArgs& args) {
  const SiteTable sites = read_sites(args.sites_file);
  const DataTable data = read_data(args.data_file, sites);
  const int dim = sites.n();
  const long n = static_cast<long>(data.dates.size());
  if (!(args.quantile > 0.5 && args.quantile < 1.0)) {
    die_io("threshold quantile must be in (0.5, 1)");
  }

  // per-site marginal fits and standardization
  std::vector<MarginHandle> margins(dim);
  std::vector<double> column(n), x_star(n * dim);
  std::ostringstream mcsv;
  mcsv << "site_id,threshold,quantile,gpd_sigma,gpd_xi,se_sigma,se_xi,n_exceed\n";
  for (int j = 0; j < dim; ++j) {
    for (long i = 0; i < n; ++i) column[i] = data.values[i * dim + j];
    check(elp_margin_fit(column.data(), n, args.quantile, &margins[j].m),
          "margin fit for site " + sites.ids[j]);
    double thr, q, sig, xi, ses, sex;
    int nex;
    check(elp_margin_info(margins[j].m, &thr, &q, &sig, &xi, &ses, &sex, &nex),
          "margin info");
    mcsv << sites.ids[j] << ',' << num17(thr) << ',' << num17(q) << ','
         << num17(sig) << ',' << num17(xi) << ',' << num17(ses) << ','
         << num17(sex) << ',' << nex << '\n';
    std::vector<double> std_col(n);
    check(elp_margin_to_standard(margins[j].m, column.data(), n, std_col.data()),
          "standardize");
    for (long i = 0; i < n; ++i) x_star[i * dim + j] = std_col[i];
  }
  write_file(args.out_dir + "/margins.csv", mcsv.str());

  const double u_std = 1.0 / (1.0 - args.quantile);
  std::vector<double> u(dim, u_std);

  elp_qmc qmc;
  elp_qmc_fit_profile(&qmc);
  if (args.qmc_points > 0) qmc.n_points = args.qmc_points;
  if (args.qmc_shifts > 0) qmc.n_shifts = args.qmc_shifts;
  if (args.seed) qmc.seed = args.seed;

  double init[3];
  const double* init_ptr = nullptr;
  if (args.init_loglambda || args.init_kappa || args.init_alpha) {
    init[0] = args.init_loglambda.value_or(0.0);
    init[1] = args.init_kappa.value_or(1.0);
    init[2] = args.init_alpha.value_or(2.0);
    init_ptr = init;
  }

  elp_fit_result fit;
  check(elp_fit_dependence(x_star.data(), n, dim, u.data(), 0,
                           sites.coords.data(), sites.space_dim,
                           likelihood_code(args.likelihood), init_ptr, &qmc,
                           args.max_evals, &fit),
        "dependence fit");

  json out;
  out["likelihood"] = args.likelihood;
  out["quantile"] = args.quantile;
  out["threshold_standard"] = u_std;
  out["seed"] = args.seed;
  out["psi"] = {{"log_lambda", fit.psi[0]},
                {"lambda", std::exp(fit.psi[0])},
                {"kappa", fit.psi[1]},
                {"alpha", fit.psi[2]}};
  out["se"] = {{"log_lambda", std::sqrt(std::max(fit.cov[0], 0.0))},
               {"kappa", std::sqrt(std::max(fit.cov[4], 0.0))},
               {"alpha", std::sqrt(std::max(fit.cov[8], 0.0))}};
  out["cov"] = {{fit.cov[0], fit.cov[1], fit.cov[2]},
                {fit.cov[3], fit.cov[4], fit.cov[5]},
                {fit.cov[6], fit.cov[7], fit.cov[8]}};
  out["nll"] = fit.nll;
  out["aic"] = fit.aic;
  out["n_evals"] = fit.n_evals;
  out["converged"] = fit.converged != 0;
  out["hessian_pd"] = fit.hessian_pd != 0;
  out["at_edge"] = fit.at_edge != 0;
  out["qmc"] = {{"n_points", qmc.n_points}, {"n_shifts", qmc.n_shifts}};
  write_file(args.out_dir + "/fit.json", out.dump(2) + "\n");

  // model extremal coefficient against distance
  ModelHandle model = make_model(
      sites, ModelSpec{fit.psi[0], fit.psi[1], fit.psi[2]});
  double h_max = 0.0;
  for (int a = 0; a < dim; ++a) {
    for (int b = a + 1; b < dim; ++b) {
      double d2 = 0.0;
      for (int c = 0; c < sites.space_dim; ++c) {
        const double d = sites.coords[a * sites.space_dim + c] -
                         sites.coords[b * sites.space_dim + c];
        d2 += d * d;
      }
      h_max = std::max(h_max, std::sqrt(d2));
    }
  }
  if (h_max <= 0.0) h_max = 1.0;
  std::ostringstream tcsv;
  tcsv << "distance,theta\n";
  for (int i = 1; i <= 100; ++i) {
    const double h = h_max * i / 100.0;
    double theta;
    check(elp_extremal_coeff_dist(model.m, h, &theta), "extremal coefficient");
    tcsv << num17(h) << ',' << num17(theta) << '\n';
  }
  write_file(args.out_dir + "/theta_curve.csv", tcsv.str());

  if (args.empirical_theta) {
    std::ostringstream ecsv;
    ecsv << "site_a,site_b,distance,theta_hat,ci_lo,ci_hi\n";
    std::vector<double> xa(n), xb(n);
    for (int a = 0; a < dim; ++a) {
      for (int b = a + 1; b < dim; ++b) {
        for (long i = 0; i < n; ++i) {
          xa[i] = x_star[i * dim + a];
          xb[i] = x_star[i * dim + b];
        }
        double d2 = 0.0;
        for (int c = 0; c < sites.space_dim; ++c) {
          const double d = sites.coords[a * sites.space_dim + c] -
                           sites.coords[b * sites.space_dim + c];
          d2 += d * d;
        }
        double theta, lo, hi;
        const elp_status st = elp_empirical_extremal_coeff(
            xa.data(), xb.data(), n, u_std, 200, args.seed + 1, &theta, &lo, &hi);
        if (st != ELP_OK) continue;  // pair without joint exceedances
        ecsv << sites.ids[a] << ',' << sites.ids[b] << ','
             << num17(std::sqrt(d2)) << ',' << num17(theta) << ','
             << num17(lo) << ',' << num17(hi) << '\n';
      }
    }
    write_file(args.out_dir + "/theta_empirical.csv", ecsv.str());
  }
  std::printf("fit written to %s (nll %s, aic %s)\n", args.out_dir.c_str(),
              num17(fit.nll).c_str(), num17(fit.aic).c_str());
}

// ---- simulate ----------------------------------------------------------

struct SimArgs {
  std::string sites_file, fit_file, out_file = "draws.csv";
  std::string kind = "extremal-t", ell = "max";
  int n = 100, threads = 0;
  std::uint64_t seed = 0;
  double u = 1.0;
  std::optional<double> log_lambda, kappa, alpha;
};

ModelSpec resolve_spec(const std::string& fit_file,
                       const std::optional<double>& log_lambda,
                       const std::optional<double>& kappa,
                       const std::optional<double>& alpha) {
  ModelSpec spec;
  if (!fit_file.empty()) spec = spec_from_fit_json(fit_file);
  if (log_lambda) spec.log_lambda = *log_lambda;
  if (kappa) spec.kappa = *kappa;
  if (alpha) spec.alpha = *alpha;
  return spec;
}

void run_simulate(const SimArgs& args) {
  const SiteTable sites = read_sites(args.sites_file);
  ModelHandle model = make_model(
      sites, resolve_spec(args.fit_file, args.log_lambda, args.kappa, args.alpha));
  std::vector<double> draws(static_cast<std::size_t>(args.n) * sites.n());
  if (args.kind == "extremal-t") {
    check(elp_simulate_extremal_t(model.m, args.n, args.seed, draws.data()),
          "simulation");
  } else if (args.kind == "pareto") {
    int rk;
    if (args.ell == "max") {
      rk = ELP_RISK_WEIGHTED_MAX;
    } else if (args.ell == "min") {
      rk = ELP_RISK_WEIGHTED_MIN;
    } else if (args.ell == "sum") {
      rk = ELP_RISK_WEIGHTED_SUM;
    } else if (args.ell == "sup") {
      rk = ELP_RISK_SUP;
    } else {
      die_io("unknown risk functional: " + args.ell);
    }
    const std::vector<double> weights(sites.n(), args.u);
    check(elp_simulate_pareto(model.m, rk, weights.data(), args.n, args.seed,
                              draws.data()),
          "simulation");
  } else {
    die_io("unknown kind: " + args.kind + " (extremal-t or pareto)");
  }
  write_file(args.out_file, draws_csv(sites.ids, draws, args.n));
  std::printf("%d draws written to %s\n", args.n, args.out_file.c_str());
}

// ---- conditional -------------------------------------------------------

struct CondArgs {
  std::string sites_file, fit_file, data_file, out_dir = ".";
  std::vector<std::string> cond;  // id=value
  int n = 1000, threads = 0;
  std::uint64_t seed = 0;
  double quantile = 0.95;
  bool no_clamp = false;
};

void run_conditional(const CondArgs& args) {
  const SiteTable sites = read_sites(args.sites_file);
  ModelHandle model = make_model(
      sites, resolve_spec(args.fit_file, std::nullopt, std::nullopt, std::nullopt));
  if (args.cond.empty()) die_io("at least one --cond id=value required");

  std::vector<int> cond_idx;
  std::vector<double> cond_values;
  for (const std::string& spec : args.cond) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) die_io("--cond expects id=value, got " + spec);
    const std::string id = spec.substr(0, eq);
    const int j = sites.index_of(id);
    if (j < 0) die_io("conditioning site id not in sites file: " + id);
    for (int prev : cond_idx) {
      if (prev == j) die_io("duplicate conditioning site: " + id);
    }
    cond_idx.push_back(j);
    try {
      cond_values.push_back(std::stod(spec.substr(eq + 1)));
    } catch (const std::exception&) {
      die_io("bad conditioning value in " + spec);
    }
  }

  // targets are the remaining sites; conditioning sites may not reappear
  std::vector<int> target_idx;
  for (int j = 0; j < sites.n(); ++j) {
    bool is_cond = false;
    for (int c : cond_idx) is_cond = is_cond || c == j;
    if (!is_cond) target_idx.push_back(j);
  }
  if (target_idx.empty()) {
    die_io("conditioning on every site leaves no targets");
  }

  // optional data-scale mode: margins refitted from data, conditioning
  // values transformed in, draws transformed back out
  std::vector<MarginHandle> margins;
  if (!args.data_file.empty()) {
    const DataTable data = read_data(args.data_file, sites);
    const long n_obs = static_cast<long>(data.dates.size());
    margins.resize(sites.n());
    std::vector<double> column(n_obs);
    for (int j = 0; j < sites.n(); ++j) {
      for (long i = 0; i < n_obs; ++i) column[i] = data.values[i * sites.n() + j];
      check(elp_margin_fit(column.data(), n_obs, args.quantile, &margins[j].m),
            "margin fit for site " + sites.ids[j]);
    }
    for (std::size_t k = 0; k < cond_idx.size(); ++k) {
      double std_val;
      check(elp_margin_to_standard(margins[cond_idx[k]].m, &cond_values[k], 1,
                                   &std_val),
            "conditioning value transform");
      cond_values[k] = std_val;
    }
  }
  for (double v : cond_values) {
    if (!(v > 0.0)) {
      die_io("conditioning values must be positive on the standard scale");
    }
  }

  const int sd = sites.space_dim;
  std::vector<double> cond_sites, target_sites;
  for (int c : cond_idx) {
    for (int k = 0; k < sd; ++k) cond_sites.push_back(sites.coords[c * sd + k]);
  }
  std::vector<std::string> target_ids;
  for (int t : target_idx) {
    target_ids.push_back(sites.ids[t]);
    for (int k = 0; k < sd; ++k) target_sites.push_back(sites.coords[t * sd + k]);
  }

  const int nt = static_cast<int>(target_idx.size());
  std::vector<double> draws(static_cast<std::size_t>(args.n) * nt);
  check(elp_simulate_conditional(model.m, cond_sites.data(),
                                 static_cast<int>(cond_idx.size()),
                                 cond_values.data(), target_sites.data(), nt,
                                 args.n, args.seed, args.no_clamp ? 0 : 1,
                                 draws.data()),
        "conditional simulation");

  if (!margins.empty()) {
    // back to the data scale; values below the standard floor map to the
    // smallest representable x* = 1
    std::vector<double> col(args.n);
    for (int j = 0; j < nt; ++j) {
      for (int i = 0; i < args.n; ++i) {
        col[i] = std::max(draws[static_cast<std::size_t>(i) * nt + j], 1.0);
      }
      std::vector<double> back(args.n);
      check(elp_margin_from_standard(margins[target_idx[j]].m, col.data(),
                                     args.n, back.data()),
            "back-transform");
      for (int i = 0; i < args.n; ++i) {
        draws[static_cast<std::size_t>(i) * nt + j] = back[i];
      }
    }
  }

  write_file(args.out_dir + "/cond_draws.csv", draws_csv(target_ids, draws, args.n));

  std::ostringstream sum;
  sum << "site_id,mean,sd,q025,q50,q975\n";
  std::vector<double> col(args.n);
  for (int j = 0; j < nt; ++j) {
    for (int i = 0; i < args.n; ++i) col[i] = draws[static_cast<std::size_t>(i) * nt + j];
    double mean = 0.0;
    for (double v : col) mean += v;
    mean /= args.n;
    double var = 0.0;
    for (double v : col) var += (v - mean) * (v - mean);
    var = args.n > 1 ? var / (args.n - 1) : 0.0;
    std::sort(col.begin(), col.end());
    auto quant = [&](double p) {
      const double pos = p * (col.size() - 1);
      const std::size_t lo = static_cast<std::size_t>(pos);
      if (lo + 1 >= col.size()) return col.back();
      return col[lo] + (pos - lo) * (col[lo + 1] - col[lo]);
    };
    sum << target_ids[j] << ',' << num17(mean) << ',' << num17(std::sqrt(var))
        << ',' << num17(quant(0.025)) << ',' << num17(quant(0.5)) << ','
        << num17(quant(0.975)) << '\n';
  }
  write_file(args.out_dir + "/summary.csv", sum.str());
  std::printf("%d conditional draws over %d sites written to %s\n", args.n, nt,
              args.out_dir.c_str());
}

// ---- study -------------------------------------------------------------

struct StudyArgs {
  std::string preset, kind = "recovery", config_file, out_dir = ".";
  std::optional<double> kappa, alpha, theta;
  int reps = 0, sample_size = 0, grid_side = 0, threads = 0;
  std::uint64_t seed = 0;
};

void run_study(const StudyArgs& args) {
  json cfg;
  if (!args.config_file.empty()) {
    std::ifstream in(args.config_file);
    if (!in) die_io("cannot open config file: " + args.config_file);
    try {
      in >> cfg;
    } catch (const json::exception& e) {
      die_io(args.config_file + ": bad JSON: " + e.what());
    }
  }
  if (!args.preset.empty()) {
    if (args.preset == "smoke") {
      cfg["grid"] = {{"per_side", 2}};
      cfg["reps"] = 2;
      cfg["sample_size"] = 60;
      cfg["estimators"] = {"L2", "pairwise"};
      cfg["max_evals"] = 300;
    } else if (args.preset == "desk") {
      cfg["grid"] = {{"per_side", 3}};
      cfg["reps"] = 200;
      cfg["sample_size"] = 250;
    } else if (args.preset == "table1-cell") {
      cfg["grid"] = {{"per_side", 3}};
      cfg["reps"] = 200;
      cfg["sample_size"] = 250;
      cfg["kappas"] = {args.kappa.value_or(1.0)};
      cfg["alphas"] = {args.alpha.value_or(1.0)};
      cfg["thetas"] = {args.theta.value_or(1.4)};
    } else {
      die_io("unknown preset: " + args.preset + " (smoke, desk, table1-cell)");
    }
  }
  cfg["kind"] = cfg.value("kind", args.kind);
  if (args.kappa) cfg["kappas"] = {*args.kappa};
  if (args.alpha) cfg["alphas"] = {*args.alpha};
  if (args.theta) cfg["thetas"] = {*args.theta};
  if (args.reps > 0) cfg["reps"] = args.reps;
  if (args.sample_size > 0) cfg["sample_size"] = args.sample_size;
  if (args.grid_side > 0) cfg["grid"] = {{"per_side", args.grid_side}};
  if (args.seed) cfg["seed"] = args.seed;

  char* report_json = nullptr;
  char* report_csv = nullptr;
  check(elp_study_run(cfg.dump().c_str(), &report_json, &report_csv), "study");
  write_file(args.out_dir + "/study.json", report_json);
  write_file(args.out_dir + "/study.csv", report_csv);
  elp_free_string(report_json);
  elp_free_string(report_csv);
  std::printf("study report written to %s\n", args.out_dir.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"elliptical Pareto process toolkit"};
  app.require_subcommand(1);

  FitArgs fit;
  CLI::App* cmd_fit = app.add_subcommand("fit", "fit dependence parameters to station data");
  cmd_fit->add_option("--sites", fit.sites_file, "sites.csv (id,x,y[,elev])")->required();
  cmd_fit->add_option("--data", fit.data_file, "data.csv (date,site_id,value)")->required();
  cmd_fit->add_option("--out", fit.out_dir, "output directory");
  cmd_fit->add_option("--quantile", fit.quantile, "marginal threshold quantile");
  cmd_fit->add_option("--likelihood", fit.likelihood, "l1 | l2 | pairwise");
  cmd_fit->add_option("--qmc-points", fit.qmc_points, "QMC points per shift");
  cmd_fit->add_option("--qmc-shifts", fit.qmc_shifts, "QMC randomized shifts");
  cmd_fit->add_option("--max-evals", fit.max_evals, "optimizer evaluation budget");
  cmd_fit->add_option("--seed", fit.seed, "random seed");
  cmd_fit->add_option("--threads", fit.threads, "worker threads (PARETO_THREADS fallback)");
  cmd_fit->add_option("--init-loglambda", fit.init_loglambda, "initial log lambda");
  cmd_fit->add_option("--init-kappa", fit.init_kappa, "initial kappa");
  cmd_fit->add_option("--init-alpha", fit.init_alpha, "initial alpha");
  cmd_fit->add_flag("--empirical-theta", fit.empirical_theta,
                    "also write per-pair empirical extremal coefficients");

  SimArgs sim;
  CLI::App* cmd_sim = app.add_subcommand("simulate", "simulate extremal-t or ell-Pareto draws");
  cmd_sim->add_option("--sites", sim.sites_file, "sites.csv")->required();
  cmd_sim->add_option("--kind", sim.kind, "extremal-t | pareto");
  cmd_sim->add_option("--ell", sim.ell, "risk functional: max | min | sum | sup");
  cmd_sim->add_option("--u", sim.u, "threshold weights for the risk functional");
  cmd_sim->add_option("--n", sim.n, "number of draws");
  cmd_sim->add_option("--seed", sim.seed, "random seed");
  cmd_sim->add_option("--threads", sim.threads, "worker threads");
  cmd_sim->add_option("--fit", sim.fit_file, "fit.json with model parameters");
  cmd_sim->add_option("--loglambda", sim.log_lambda, "log lambda");
  cmd_sim->add_option("--kappa", sim.kappa, "kappa");
  cmd_sim->add_option("--alpha", sim.alpha, "alpha");
  cmd_sim->add_option("--out", sim.out_file, "output CSV");

  CondArgs cond;
  CLI::App* cmd_cond = app.add_subcommand("conditional", "conditional simulation given observed sites");
  cmd_cond->add_option("--sites", cond.sites_file, "sites.csv")->required();
  cmd_cond->add_option("--fit", cond.fit_file, "fit.json with model parameters");
  cmd_cond->add_option("--cond", cond.cond, "conditioning site: id=value (repeatable)")->required();
  cmd_cond->add_option("--data", cond.data_file,
                       "data.csv enabling data-scale values and back-transform");
  cmd_cond->add_option("--quantile", cond.quantile, "marginal threshold quantile (with --data)");
  cmd_cond->add_option("--n", cond.n, "number of draws");
  cmd_cond->add_option("--seed", cond.seed, "random seed");
  cmd_cond->add_option("--threads", cond.threads, "worker threads");
  cmd_cond->add_option("--out", cond.out_dir, "output directory");
  cmd_cond->add_flag("--no-clamp", cond.no_clamp, "keep negative components");

  StudyArgs study;
  CLI::App* cmd_study = app.add_subcommand("study", "Monte Carlo estimator comparison");
  cmd_study->add_option("--preset", study.preset, "smoke | desk | table1-cell");
  cmd_study->add_option("--kind", study.kind, "recovery | misspec");
  cmd_study->add_option("--config", study.config_file, "StudyConfig JSON file");
  cmd_study->add_option("--kappa", study.kappa, "single kappa value");
  cmd_study->add_option("--alpha", study.alpha, "single alpha value");
  cmd_study->add_option("--theta", study.theta, "single theta target");
  cmd_study->add_option("--reps", study.reps, "repetitions per cell");
  cmd_study->add_option("--sample-size", study.sample_size, "draws per repetition");
  cmd_study->add_option("--grid-side", study.grid_side, "sites per grid side");
  cmd_study->add_option("--seed", study.seed, "random seed");
  cmd_study->add_option("--threads", study.threads, "worker threads");
  cmd_study->add_option("--out", study.out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitIo;
  }

  try {
    if (cmd_fit->parsed()) {
      (void)resolve_threads(fit.threads);
      run_fit(fit);
    } else if (cmd_sim->parsed()) {
      (void)resolve_threads(sim.threads);
      run_simulate(sim);
    } else if (cmd_cond->parsed()) {
      (void)resolve_threads(cond.threads);
      run_conditional(cond);
    } else if (cmd_study->parsed()) {
      (void)resolve_threads(study.threads);
      run_study(study);
    }
  } catch (const CliError& e) {
    std::fprintf(stderr, "error: %s\n", e.msg.c_str());
    return e.code;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumeric;
  }
  return 0;
}
