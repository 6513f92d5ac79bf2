#include "linalg.hpp"

#include <cmath>

namespace elp {

namespace {

bool try_factor(const Matrix& m, Matrix& lower) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) return false;
  lower = llt.matrixL();
  // LLT can succeed with a zero pivot on the edge of rank deficiency
  for (int i = 0; i < lower.rows(); ++i) {
    if (!(lower(i, i) > 0.0) || !std::isfinite(lower(i, i))) return false;
  }
  return true;
}

}  // namespace

PdMatrix cholesky_pd(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() < 1) {
    throw DomainError("cholesky_pd: matrix must be square and nonempty");
  }
  const double scale = m.cwiseAbs().maxCoeff();
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + scale)) {
    throw DomainError("cholesky_pd: matrix is not symmetric");
  }
  PdMatrix out;
  out.entries = 0.5 * (m + m.transpose());
  if (try_factor(out.entries, out.chol)) return out;
  Matrix jittered = out.entries;
  jittered.diagonal().array() += 1e-10;
  if (try_factor(jittered, out.chol)) return out;
  throw NotPositiveDefinite(
      "cholesky_pd: matrix is not positive definite (after jitter retry); "
      "check for duplicated sites or an invalid correlation model");
}

}  // namespace elp
