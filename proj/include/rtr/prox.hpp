// Closed-form proximal operators used by the ADMM solvers.
//
//  svt        prox of tau*||.||_*   (singular value soft threshold)
//  col_shrink prox of kappa*||.||_{2,1}, columns as groups
//  l1_shrink  prox of kappa*||.||_1, entrywise
//
// All SVDs here are exact full (thin) decompositions. Very rectangular
// inputs are first reduced by a QR factorization of the long side so that
// the bidiagonalization runs on a square factor; this is an exact
// reformulation, not an approximation.

#pragma once

#include <Eigen/Dense>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <stdexcept>

#include "rtr/tensor.hpp"

namespace rtr {

// Numerical failure inside a matrix factorization.
class SvdError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Thin SVD m = u * diag(singular_values) * v^T with singular values in
// nonincreasing order and min(rows, cols) columns in u and v.
struct SvdResult {
  Matrix u;
  Vector singular_values;
  Matrix v;
};

namespace detail {

inline SvdResult bdc_svd(const Matrix& m) {
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw SvdError("SVD did not converge");
  return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

}  // namespace detail

inline SvdResult thin_svd(const Matrix& m) {
  if (!m.allFinite()) throw SvdError("SVD input has non-finite entries");
  const Eigen::Index rows = m.rows(), cols = m.cols();
  // Aspect ratio above which the QR reduction pays for itself.
  constexpr double kQrCutoff = 2.0;
  if (cols > static_cast<Eigen::Index>(kQrCutoff * static_cast<double>(rows))) {
    // m = R^T Q^T with m^T = Q R; SVD of the small R^T gives the rest.
    Eigen::HouseholderQR<Matrix> qr(m.transpose());
    Matrix q = qr.householderQ() * Matrix::Identity(cols, rows);
    Matrix rt = qr.matrixQR().topRows(rows).triangularView<Eigen::Upper>().transpose();
    SvdResult small = detail::bdc_svd(rt);
    return {std::move(small.u), std::move(small.singular_values), q * small.v};
  }
  if (rows > static_cast<Eigen::Index>(kQrCutoff * static_cast<double>(cols))) {
    Eigen::HouseholderQR<Matrix> qr(m);
    Matrix q = qr.householderQ() * Matrix::Identity(rows, cols);
    Matrix r = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
    SvdResult small = detail::bdc_svd(r);
    return {q * small.u, std::move(small.singular_values), std::move(small.v)};
  }
  return detail::bdc_svd(m);
}

// Singular values below this fraction of the largest are reported as zero
// when counting numerical rank.
inline constexpr double kRankFloor = 1e-12;

inline Eigen::Index numerical_rank(const Vector& singular_values) {
  if (singular_values.size() == 0) return 0;
  const double floor = kRankFloor * singular_values[0];
  Eigen::Index r = 0;
  while (r < singular_values.size() && singular_values[r] > floor) ++r;
  return r;
}

// Singular value thresholding: U * diag(max(sigma_i - tau, 0)) * V^T, the
// minimizer of tau*||X||_* + (1/2)*||X - m||_F^2.
inline Matrix svt(const Matrix& m, double tau) {
  if (tau <= 0) throw std::invalid_argument("svt: tau must be positive");
  const SvdResult svd = thin_svd(m);
  Eigen::Index keep = 0;
  while (keep < svd.singular_values.size() && svd.singular_values[keep] > tau) ++keep;
  if (keep == 0) return Matrix::Zero(m.rows(), m.cols());
  const Vector shrunk = svd.singular_values.head(keep).array() - tau;
  return svd.u.leftCols(keep) * shrunk.asDiagonal() * svd.v.leftCols(keep).transpose();
}

// Column-wise shrinkage: scales column j by max(0, 1 - kappa/||m_j||_2),
// the minimizer of kappa*||E||_{2,1} + (1/2)*||E - m||_F^2. Columns with
// norm <= kappa come out exactly zero.
inline Matrix col_shrink(const Matrix& m, double kappa) {
  if (kappa <= 0) throw std::invalid_argument("col_shrink: kappa must be positive");
  if (!m.allFinite()) throw std::invalid_argument("col_shrink: input has non-finite entries");
  Matrix out(m.rows(), m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    const double norm = m.col(j).norm();
    if (norm <= kappa)
      out.col(j).setZero();
    else
      out.col(j) = m.col(j) * (1.0 - kappa / norm);
  }
  return out;
}

// Entrywise soft threshold sign(x) * max(|x| - kappa, 0).
inline Matrix l1_shrink(const Matrix& m, double kappa) {
  if (kappa <= 0) throw std::invalid_argument("l1_shrink: kappa must be positive");
  return m.unaryExpr([kappa](double x) {
    const double a = std::abs(x) - kappa;
    return a > 0 ? (x > 0 ? a : -a) : 0.0;
  });
}

// Sum of column l2 norms.
inline double l21_norm(const Matrix& m) {
  double s = 0;
  for (Eigen::Index j = 0; j < m.cols(); ++j) s += m.col(j).norm();
  return s;
}

}  // namespace rtr
