#pragma once

#include <Eigen/Dense>
#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <string>

#include "osdec/errors.hpp"

namespace osdec {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Thin SVD A = U * diag(singular_values) * V^T.
// U has orthonormal columns (n x k), V has orthonormal columns (p x k),
// singular values are nonnegative and sorted nonincreasing.
struct SvdFactors {
  Matrix U;
  Vector singular_values;
  Matrix V;

  Matrix reconstruct() const {
    return U * singular_values.asDiagonal() * V.transpose();
  }
  double nuclear_norm() const { return singular_values.sum(); }
};

// Thin SVD of a dense matrix, k = min(rows, cols). Backed by LAPACK dgesvd;
// the Golub-Kahan bidiagonal QR it runs is far faster than one-sided Jacobi
// at the core sizes this library hits in its inner loops.
inline SvdFactors full_svd(const Matrix& A) {
  if (A.rows() < 1 || A.cols() < 1) {
    throw InvalidInput("full_svd: matrix must be at least 1x1");
  }
  if (!A.allFinite()) {
    throw InvalidInput("full_svd: input has non-finite entries");
  }
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  const int k = std::min(m, n);

  Matrix work = A;  // dgesvd overwrites its input
  SvdFactors f;
  f.U.resize(m, k);
  f.singular_values.resize(k);
  Matrix vt(k, n);
  Vector superb(std::max(k - 1, 1));

  const int info = LAPACKE_dgesvd(LAPACK_COL_MAJOR, 'S', 'S', m, n, work.data(),
                                  m, f.singular_values.data(), f.U.data(), m,
                                  vt.data(), k, superb.data());
  if (info < 0) {
    throw InvalidInput("full_svd: illegal argument " + std::to_string(-info));
  }
  if (info > 0) {
    throw NumericFailure("full_svd: QR iteration left " + std::to_string(info) +
                         " superdiagonals unconverged");
  }
  f.V = vt.transpose();
  return f;
}

// Singular values only (no factors). Same backend and error contract as
// full_svd.
inline Vector singular_values(const Matrix& A) {
  if (A.rows() < 1 || A.cols() < 1) {
    throw InvalidInput("singular_values: matrix must be at least 1x1");
  }
  if (!A.allFinite()) {
    throw InvalidInput("singular_values: input has non-finite entries");
  }
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  const int k = std::min(m, n);

  Matrix work = A;
  Vector s(k);
  Vector superb(std::max(k - 1, 1));
  const int info =
      LAPACKE_dgesvd(LAPACK_COL_MAJOR, 'N', 'N', m, n, work.data(), m, s.data(),
                     nullptr, m, nullptr, k, superb.data());
  if (info < 0) {
    throw InvalidInput("singular_values: illegal argument " +
                       std::to_string(-info));
  }
  if (info > 0) {
    throw NumericFailure("singular_values: QR iteration left " +
                         std::to_string(info) +
                         " superdiagonals unconverged");
  }
  return s;
}

// Relative residual below which an appended column counts as lying in the
// current column span, so the basis is not extended along a noise direction.
inline constexpr double kIncSvdSpanTolerance = 1e-10;

namespace detail {

// Unit vector orthogonal to the columns of U (requires U.cols() < U.rows()).
// Orthogonalizes the canonical basis vector whose row of U carries the least
// energy; that row choice keeps the Gram-Schmidt residual well away from zero.
inline Vector orthogonal_complement_direction(const Matrix& U) {
  Eigen::Index best_row = 0;
  double best_norm = U.row(0).squaredNorm();
  for (Eigen::Index i = 1; i < U.rows(); ++i) {
    const double rn = U.row(i).squaredNorm();
    if (rn < best_norm) {
      best_norm = rn;
      best_row = i;
    }
  }
  Vector e = Vector::Zero(U.rows());
  e(best_row) = 1.0;
  Vector q = e - U * (U.transpose() * e);
  // One re-orthogonalization pass; a single pass can leave O(sqrt(eps))
  // components along U when the basis is large.
  q -= U * (U.transpose() * q);
  const double qn = q.norm();
  if (!(qn > 0.0)) {
    throw InternalError("inc_svd: failed to extend orthonormal basis");
  }
  return q / qn;
}

}  // namespace detail

// Incremental SVD update: given the thin SVD of an n x p matrix B, returns
// the thin SVD of [B c]. The cost is one SVD of a small core matrix of
// order (k+1) plus a few thin matrix products; the n x (p+1) concatenation
// is never formed or refactorized.
//
// When the appended column lies (numerically) in span(U), the basis is
// extended with an orthonormal completion direction instead of the residual,
// yielding an exact zero trailing singular value. If U is already square
// there is no room to extend and the factorization keeps k values.
inline SvdFactors inc_svd(const SvdFactors& B_factors, const Vector& c) {
  const Eigen::Index n = B_factors.U.rows();
  const Eigen::Index k = B_factors.U.cols();
  const Eigen::Index p = B_factors.V.rows();
  if (c.size() != n) {
    throw InvalidInput("inc_svd: column length " + std::to_string(c.size()) +
                       " does not match row count " + std::to_string(n));
  }
  if (B_factors.singular_values.size() != k || B_factors.V.cols() != k) {
    throw InvalidInput("inc_svd: inconsistent factor shapes");
  }
  if (!c.allFinite()) {
    throw InvalidInput("inc_svd: appended column has non-finite entries");
  }

  const Vector w = B_factors.U.transpose() * c;
  Vector r = c - B_factors.U * w;
  double rho = r.norm();
  const bool in_span = rho <= kIncSvdSpanTolerance * c.norm();

  if (!in_span || k < n) {
    // Core matrix [diag(sigma) w; 0 rho], order k+1.
    Vector q;
    if (in_span) {
      q = detail::orthogonal_complement_direction(B_factors.U);
      rho = 0.0;
    } else {
      q = r / rho;
    }
    Matrix core = Matrix::Zero(k + 1, k + 1);
    core.diagonal().head(k) = B_factors.singular_values;
    core.col(k).head(k) = w;
    core(k, k) = rho;
    const SvdFactors cf = full_svd(core);

    SvdFactors out;
    out.U.resize(n, k + 1);
    out.U.noalias() = B_factors.U * cf.U.topRows(k);
    out.U.noalias() += q * cf.U.row(k);
    out.singular_values = cf.singular_values;
    out.V.resize(p + 1, k + 1);
    out.V.topRows(p).noalias() = B_factors.V * cf.V.topRows(k);
    out.V.row(p) = cf.V.row(k);
    return out;
  }

  // U spans all of R^n and c lies in it: core is k x (k+1), no new direction.
  Matrix core = Matrix::Zero(k, k + 1);
  core.leftCols(k).diagonal() = B_factors.singular_values;
  core.col(k) = w;
  const SvdFactors cf = full_svd(core);

  SvdFactors out;
  out.U.noalias() = B_factors.U * cf.U;
  out.singular_values = cf.singular_values;
  out.V.resize(p + 1, k);
  out.V.topRows(p).noalias() = B_factors.V * cf.V.topRows(k);
  out.V.row(p) = cf.V.row(k);
  return out;
}

// Singular value thresholding: U * diag(max(sigma_i - tau, 0)) * V^T, the
// proximal operator of tau * nuclear norm evaluated through an existing
// factorization.
inline Matrix svt(const SvdFactors& factors, double tau) {
  if (!(tau >= 0.0)) {
    throw InvalidInput("svt: threshold must be nonnegative");
  }
  const Vector thresholded =
      (factors.singular_values.array() - tau).max(0.0).matrix();
  return factors.U * thresholded.asDiagonal() * factors.V.transpose();
}

// Elementwise soft threshold with a per-element threshold:
// out_i = sign(u_i) * max(|u_i| - tau_i, 0).
inline Vector soft_threshold(const Vector& u, const Vector& tau_per_element) {
  if (u.size() != tau_per_element.size()) {
    throw InvalidInput("soft_threshold: length mismatch");
  }
  if ((tau_per_element.array() < 0.0).any()) {
    throw InvalidInput("soft_threshold: thresholds must be nonnegative");
  }
  return u.array().sign() *
         (u.array().abs() - tau_per_element.array()).max(0.0);
}

}  // namespace osdec
