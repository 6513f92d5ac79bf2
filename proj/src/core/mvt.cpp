#include "mvt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <tuple>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"
#include "special.hpp"

namespace elp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// sqrt of the first primes: Richtmyer lattice generators
const double kGenerators[] = {
    1.4142135623730951, 1.7320508075688772, 2.23606797749979,
    2.6457513110645907, 3.3166247903554,    3.605551275463989,
    4.123105625617661,  4.358898943540674,  4.795831523312719,
    5.385164807134504,  5.5677643628300215, 6.082762530298219,
    6.4031242374328485, 6.557438524302,     6.855654600401044,
    7.280109889280518,  7.681145747868608,  7.810249675906654,
    8.18535277187245,   8.426149773176359,  8.544003745317531,
    8.888194417315589,  9.1104335791443,    9.433981132056603,
    9.848857801796104,  10.04987562112089,  10.14889156509222,
    10.344080432788601, 10.44030650891055,  10.63014581273465,
    11.269427669584644, 11.445523142259598, 11.704699910719626,
    11.789826122551595, 12.206555615733702, 12.288205727444508,
    12.529964086141668, 12.767145334803704, 12.922847983320086,
    13.152946437965905, 13.379088160259652, 13.45362404707371,
    13.82027496108821,  13.892443989449804, 14.035668847618199,
    14.106735979665885, 14.52583904633395,  14.933184523068078,
    15.066519173319364, 15.132745950421556};

double shift_origin(std::uint64_t seed, int shift, int coord) {
  // one stream per shift; coordinate j is the j-th uniform of that stream
  RngStream rs(seed, 1000 + static_cast<std::uint64_t>(shift));
  double v = 0.0;
  for (int j = 0; j <= coord; ++j) v = rs.uniform();
  return v;
}

// Radial factors s_{shift,k} = sqrt(chi2_quantile(w, nu) / nu) for the first
// lattice coordinate.  The map from the point index to s depends only on
// (nu, cfg), so it is memoized; likelihood evaluations reuse the same few
// dof values thousands of times.
using ChiKey = std::tuple<double, int, int, std::uint64_t>;

const std::vector<double>& chi_factors(double dof, const QmcConfig& cfg) {
  thread_local std::map<ChiKey, std::vector<double>> cache;
  const ChiKey key{dof, cfg.n_points, cfg.n_shifts, cfg.seed};
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  if (cache.size() > 64) cache.clear();
  std::vector<double> s(static_cast<std::size_t>(cfg.n_shifts) * cfg.n_points);
  for (int j = 0; j < cfg.n_shifts; ++j) {
    const double delta = shift_origin(cfg.seed, j, 0);
    for (int k = 0; k < cfg.n_points; ++k) {
      double x = std::fmod((k + 1) * kGenerators[0] + delta, 1.0);
      x = std::fabs(2.0 * x - 1.0);  // baker transform
      x = std::min(std::max(x, 1e-15), 1.0 - 1e-15);
      s[static_cast<std::size_t>(j) * cfg.n_points + k] =
          std::sqrt(chi2_quantile(x, dof) / dof);
    }
  }
  return cache.emplace(key, std::move(s)).first->second;
}

}  // namespace

void QmcConfig::validate() const {
  if (n_points < 128) throw DomainError("QmcConfig: n_points must be >= 128");
  if (n_shifts < 4) throw DomainError("QmcConfig: n_shifts must be >= 4");
}

MvtResult mvt_cdf(const MvtProblem& problem, const QmcConfig& cfg) {
  cfg.validate();
  const int dim = static_cast<int>(problem.upper.size());
  if (dim < 1 || problem.location.size() != dim || problem.scale.rows() != dim ||
      problem.scale.cols() != dim) {
    throw DomainError("mvt_cdf: dimension mismatch");
  }
  if (!(problem.dof > 0.0) || !std::isfinite(problem.dof)) {
    throw DomainError("mvt_cdf: dof must be finite and positive");
  }

  const double diag_ref = std::max(1.0, problem.scale.diagonal().maxCoeff());
  double half_factor = 1.0;
  std::vector<double> limits;
  std::vector<int> keep;
  for (int i = 0; i < dim; ++i) {
    const double var = problem.scale(i, i);
    const double num = problem.upper[i] - problem.location[i];
    if (var <= 1e-14 * diag_ref) {
      // degenerate component
      if (num < -1e-10) return {0.0, 0.0};
      if (num <= 1e-10) half_factor *= 0.5;
      continue;
    }
    const double b = num / std::sqrt(var);
    if (b == kInf) continue;  // sure event in this component
    if (b == -kInf) return {0.0, 0.0};
    limits.push_back(b);
    keep.push_back(i);
  }

  const int m = static_cast<int>(limits.size());
  if (m == 0) return {half_factor, 0.0};
  if (m == 1) return {half_factor * t_cdf(limits[0], problem.dof), 0.0};
  if (m > static_cast<int>(sizeof(kGenerators) / sizeof(double))) {
    throw DomainError("mvt_cdf: dimension too large");
  }

  // a-priori variable reordering: tightest limit first
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return limits[a] < limits[b]; });

  Matrix corr(m, m);
  Vector b(m);
  for (int i = 0; i < m; ++i) {
    const int oi = keep[order[i]];
    b[i] = limits[order[i]];
    for (int j = 0; j < m; ++j) {
      const int oj = keep[order[j]];
      corr(i, j) = problem.scale(oi, oj) /
                   std::sqrt(problem.scale(oi, oi) * problem.scale(oj, oj));
    }
  }
  const PdMatrix pd = cholesky_pd(corr);
  const Matrix& c = pd.chol;

  const std::vector<double>& s_all = chi_factors(problem.dof, cfg);

  std::vector<double> shift_means(cfg.n_shifts, 0.0);
  std::vector<double> delta(m), y(m);
  for (int j = 0; j < cfg.n_shifts; ++j) {
    for (int i = 0; i < m; ++i) delta[i] = shift_origin(cfg.seed, j, i);
    const double* s_row = s_all.data() + static_cast<std::size_t>(j) * cfg.n_points;
    double sum = 0.0;
    for (int k = 0; k < cfg.n_points; ++k) {
      const double s = s_row[k];
      double prob = 1.0;
      for (int i = 0; i < m; ++i) {
        double t = s * b[i];
        for (int l = 0; l < i; ++l) t -= c(i, l) * y[l];
        t /= c(i, i);
        const double e = norm_cdf(t);
        prob *= e;
        if (prob < 1e-300) {
          prob = 0.0;
          break;
        }
        if (i + 1 < m) {
          double w = std::fmod((k + 1) * kGenerators[i + 1] + delta[i + 1], 1.0);
          w = std::fabs(2.0 * w - 1.0);
          const double arg =
              std::min(std::max(e * w, 1e-16), 1.0 - 1e-16);
          y[i] = norm_quantile(arg);
        }
      }
      sum += prob;
    }
    shift_means[j] = sum / cfg.n_points;
  }

  double mean = 0.0;
  for (double v : shift_means) mean += v;
  mean /= cfg.n_shifts;
  double var = 0.0;
  for (double v : shift_means) var += (v - mean) * (v - mean);
  var /= cfg.n_shifts * (cfg.n_shifts - 1.0);

  MvtResult res;
  res.probability = std::min(std::max(half_factor * mean, 0.0), 1.0);
  // 3.5 sigma, the customary Genz-Bretz confidence factor
  res.error_estimate = half_factor * 3.5 * std::sqrt(var);
  return res;
}

double mvt_logpdf(const Vector& x, double dof, const Vector& location,
                  const PdMatrix& scale) {
  const int dim = static_cast<int>(x.size());
  const Vector centered = x - location;
  const Vector z = scale.chol.triangularView<Eigen::Lower>().solve(centered);
  const double quad = z.squaredNorm();
  return std::lgamma(0.5 * (dof + dim)) - std::lgamma(0.5 * dof) -
         0.5 * dim * std::log(dof * M_PI) - 0.5 * scale.log_det() -
         0.5 * (dof + dim) * std::log1p(quad / dof);
}

}  // namespace elp
