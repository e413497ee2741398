#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "osdec/errors.hpp"
#include "osdec/linalg.hpp"

namespace osdec {

struct PcpConfig {
  double lambda = 0.0;     // 0 selects the default 1/sqrt(max(n, d))
  double mu0 = 0.0;        // 0 selects 0.99 * sigma_max(M)
  double mu_decay = 0.9;
  double mu_floor_scale = 1e-7;  // floor = scale * |M|_F
  double tol = 1e-7;             // relative residual |M - L - X|_F / |M|_F
  int max_iter = 500;
};

struct PcpResult {
  Matrix L;
  Matrix X;
  int iterations = 0;
  bool converged = false;
  std::vector<double> residual_trace;  // relative residual per iteration
};

// Batch principal component pursuit: minimize
//   mu*|L|_* + mu*lambda*|X|_1 + 0.5*|M - L - X|_F^2
// by alternating exact block minimization with geometric continuation on mu:
// the L step is one SVT of M - X at threshold mu, the X step one soft
// threshold of M - L at mu*lambda. Each step minimizes the full objective in
// its block, so the objective never increases; no momentum, which keeps the
// residual monotone in practice (the tests watch for this).
inline PcpResult pcp_decompose(const Matrix& M, const PcpConfig& cfg = {}) {
  if (M.rows() < 1 || M.cols() < 1) {
    throw InvalidInput("pcp: matrix must be at least 1x1");
  }
  if (!M.allFinite()) throw InvalidInput("pcp: input has non-finite entries");
  if (!(cfg.tol > 0.0) || cfg.max_iter < 1 || !(cfg.mu_decay > 0.0) ||
      !(cfg.mu_decay < 1.0)) {
    throw InvalidInput("pcp: bad config");
  }

  const Eigen::Index n = M.rows(), d = M.cols();
  PcpResult res;
  res.L = Matrix::Zero(n, d);
  res.X = Matrix::Zero(n, d);

  const double m_norm = M.norm();
  if (m_norm == 0.0) {
    res.converged = true;
    return res;
  }

  const double lambda =
      cfg.lambda > 0.0 ? cfg.lambda : 1.0 / std::sqrt(double(std::max(n, d)));
  const double mu_floor = cfg.mu_floor_scale * m_norm;
  double mu = cfg.mu0 > 0.0 ? cfg.mu0 : 0.99 * singular_values(M)(0);
  mu = std::max(mu, mu_floor);

  for (int k = 0; k < cfg.max_iter; ++k) {
    res.L = svt(full_svd(M - res.X), mu);
    const double xt = lambda * mu;
    const Matrix bx = M - res.L;
    res.X = (bx.array().sign() * (bx.array().abs() - xt).max(0.0)).matrix();

    res.iterations = k + 1;
    const double rel = (M - res.L - res.X).norm() / m_norm;
    res.residual_trace.push_back(rel);
    if (rel <= cfg.tol) {
      res.converged = true;
      break;
    }
    mu = std::max(cfg.mu_decay * mu, mu_floor);
  }
  return res;
}

}  // namespace osdec
