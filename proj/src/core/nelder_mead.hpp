#ifndef ELPARETO_NELDER_MEAD_HPP
#define ELPARETO_NELDER_MEAD_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "linalg.hpp"

namespace elp {

struct NelderMeadResult {
  Vector x;
  double f = 0.0;
  int n_evals = 0;
  bool converged = false;
};

// Derivative-free simplex minimizer (standard Nelder-Mead with the usual
// 1 / 2 / 0.5 / 0.5 coefficients).
inline NelderMeadResult nelder_mead(const std::function<double(const Vector&)>& fn,
                                    const Vector& x0, double step = 0.5,
                                    double ftol = 1e-8, int max_evals = 2000) {
  const int n = static_cast<int>(x0.size());
  NelderMeadResult res;
  int evals = 0;
  auto eval = [&](const Vector& x) {
    ++evals;
    return fn(x);
  };

  std::vector<Vector> simplex(n + 1, x0);
  std::vector<double> fv(n + 1);
  for (int i = 1; i <= n; ++i) simplex[i][i - 1] += step;
  for (int i = 0; i <= n; ++i) fv[i] = eval(simplex[i]);

  std::vector<int> idx(n + 1);
  while (evals < max_evals) {
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return fv[a] < fv[b]; });
    const int best = idx[0], worst = idx[n], second = idx[n - 1];
    if (std::fabs(fv[worst] - fv[best]) <=
        ftol * (std::fabs(fv[best]) + std::fabs(fv[worst]) + 1e-300) + 1e-12) {
      res.converged = true;
      break;
    }
    Vector centroid = Vector::Zero(n);
    for (int i = 0; i <= n; ++i) {
      if (i != worst) centroid += simplex[i];
    }
    centroid /= n;

    Vector xr = centroid + (centroid - simplex[worst]);
    const double fr = eval(xr);
    if (fr < fv[idx[0]]) {
      Vector xe = centroid + 2.0 * (centroid - simplex[worst]);
      const double fe = eval(xe);
      if (fe < fr) {
        simplex[worst] = xe;
        fv[worst] = fe;
      } else {
        simplex[worst] = xr;
        fv[worst] = fr;
      }
    } else if (fr < fv[second]) {
      simplex[worst] = xr;
      fv[worst] = fr;
    } else {
      const bool outside = fr < fv[worst];
      Vector xc = outside ? Vector(centroid + 0.5 * (xr - centroid))
                          : Vector(centroid - 0.5 * (centroid - simplex[worst]));
      const double fc = eval(xc);
      if (fc < std::min(fr, fv[worst])) {
        simplex[worst] = xc;
        fv[worst] = fc;
      } else {
        // shrink toward the best vertex
        for (int i = 0; i <= n; ++i) {
          if (i == best) continue;
          simplex[i] = simplex[best] + 0.5 * (simplex[i] - simplex[best]);
          fv[i] = eval(simplex[i]);
        }
      }
    }
  }

  const int best = static_cast<int>(
      std::min_element(fv.begin(), fv.end()) - fv.begin());
  res.x = simplex[best];
  res.f = fv[best];
  res.n_evals = evals;
  return res;
}

}  // namespace elp

#endif
