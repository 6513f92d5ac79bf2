#ifndef ELPARETO_LINALG_HPP
#define ELPARETO_LINALG_HPP

#include <Eigen/Dense>

#include "errors.hpp"

namespace elp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Symmetric positive definite matrix together with its lower Cholesky root.
struct PdMatrix {
  Matrix entries;
  Matrix chol;  // lower triangular, entries = chol * chol^T

  int dim() const { return static_cast<int>(entries.rows()); }
  double log_det() const {
    return 2.0 * chol.diagonal().array().log().sum();
  }
  // Solve entries * x = b through the Cholesky factor.
  Vector solve(const Vector& b) const {
    Vector y = chol.triangularView<Eigen::Lower>().solve(b);
    return chol.transpose().triangularView<Eigen::Upper>().solve(y);
  }
  Matrix solve(const Matrix& b) const {
    Matrix y = chol.triangularView<Eigen::Lower>().solve(b);
    return chol.transpose().triangularView<Eigen::Upper>().solve(y);
  }
};

// Factorize a symmetric matrix.  A failed bare factorization is retried once
// with diagonal jitter 1e-10 before NotPositiveDefinite is thrown.
PdMatrix cholesky_pd(const Matrix& m);

}  // namespace elp

#endif
