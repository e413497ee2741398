#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "osdec/errors.hpp"
#include "osdec/linalg.hpp"
#include "osdec/prox.hpp"
#include "osdec/weights.hpp"

namespace osdec {

struct SolverConfig {
  double lambda = 0.0;          // 0 selects the default 1/sqrt(n)
  double mu_bar = 1e-3;         // continuation floor
  double mu0 = 0.0;             // 0 selects max(|Phi^T y|_inf / lambda, mu_bar)
  double epsilon_mu = 0.8;      // continuation decay
  double epsilon_weights = 0.8; // smoothing in the weight formulas
  int clusters = 7;             // C
  int priors = 3;               // J
  Eigen::Index subspace_dim = 100;  // d, columns of the low-rank prior
  int max_iter = 2000;
  double tol = 1e-6;
  int recluster_stride = 1;     // refresh weights every this many iterations

  double effective_lambda(Eigen::Index n) const {
    return lambda > 0.0 ? lambda : 1.0 / std::sqrt(double(n));
  }

  void validate() const {
    if (lambda < 0.0 || mu0 < 0.0) throw InvalidInput("config: negative scale");
    if (!(mu_bar > 0.0)) throw InvalidInput("config: mu_bar must be positive");
    if (!(epsilon_mu > 0.0 && epsilon_mu < 1.0)) {
      throw InvalidInput("config: epsilon_mu must lie in (0, 1)");
    }
    if (!(epsilon_weights > 0.0)) {
      throw InvalidInput("config: epsilon_weights must be positive");
    }
    if (clusters < 1) throw InvalidInput("config: need at least one cluster");
    if (priors < 0) throw InvalidInput("config: prior count must be >= 0");
    if (subspace_dim < 1) throw InvalidInput("config: subspace_dim must be >= 1");
    if (max_iter < 1) throw InvalidInput("config: max_iter must be >= 1");
    if (!(tol > 0.0)) throw InvalidInput("config: tol must be positive");
    if (recluster_stride < 1) {
      throw InvalidInput("config: recluster_stride must be >= 1");
    }
  }
};

// Prior information carried between frames: the J most recent recovered
// sparse vectors (oldest first, zero-filled before J frames exist) and the
// n x d low-rank prior with a cached factorization.
struct StreamState {
  PriorSet sparse_priors;
  Matrix lowrank_prior;
  std::optional<SvdFactors> lowrank_factors;
  long frame_index = 0;

  static StreamState initial(Eigen::Index n, Eigen::Index d, int J,
                             const Matrix& B0 = Matrix()) {
    StreamState s;
    s.sparse_priors.z.assign(J, Vector::Zero(n));
    if (B0.size() == 0) {
      s.lowrank_prior = Matrix::Zero(n, d);
    } else {
      if (B0.rows() != n || B0.cols() != d) {
        throw InvalidInput("StreamState: B0 must be n x d");
      }
      s.lowrank_prior = B0;
    }
    return s;
  }
};

struct DecompositionResult {
  Vector x_hat;
  Vector v_hat;
  int iterations = 0;
  std::vector<double> objective_trace;
  bool converged = false;
};

// Read-only view of one finished iteration, for observers (tests, tracing).
struct IterationView {
  int k;
  double mu;
  const Vector& x;
  const Vector& v;
  const WeightState& weights;
};
using IterationCallback = std::function<void(const IterationView&)>;

// Full objective of the per-frame problem at a candidate pair (x, v):
// 0.5*|Phi(x+v) - y|^2 + mu*lambda*sum_j beta_j|gamma_j W_j(x - z_j)|_1
// + mu*|[B v]|_*, with the nuclear norm taken through a fresh factorization
// of the concatenation.
inline double eval_objective(const Vector& x, const Vector& v, const Vector& y,
                             const Matrix& Phi, const PriorSet& priors,
                             const WeightState& weights, const Matrix& B,
                             const SolverConfig& cfg, double mu) {
  const Eigen::Index n = Phi.cols();
  if (x.size() != n || v.size() != n || y.size() != Phi.rows() ||
      B.rows() != n) {
    throw InvalidInput("eval_objective: dimension mismatch");
  }
  const double data = 0.5 * (Phi * (x + v) - y).squaredNorm();
  // The cluster weights are stored sum-normalized over the C clusters, which
  // scales the penalty's per-element average by 1/C relative to the
  // single-cluster form. The factor C restores mean-one weighting so that
  // lambda keeps the same calibration for every C.
  const double sparse = mu * double(cfg.clusters) *
                        eval_g(x, priors, weights, cfg.effective_lambda(n));
  Matrix concat(n, B.cols() + 1);
  concat << B, v;
  const double nuclear = mu * full_svd(concat).nuclear_norm();
  return data + sparse + nuclear;
}

// Prior update after a frame: slide the sparse window (drop the oldest,
// append the new estimate) and rebuild the low-rank prior from the exit
// factorization's top-d slice with singular values thresholded at
// mu_exit/2. The rebuilt matrix keeps exactly d columns, and its own thin
// SVD is cached for the next frame via one small d x d factorization.
inline StreamState update_priors(const DecompositionResult& result,
                                 const StreamState& state,
                                 const SvdFactors& svd_at_exit,
                                 const SolverConfig& cfg, double mu_exit) {
  const Eigen::Index n = state.lowrank_prior.rows();
  const Eigen::Index d = state.lowrank_prior.cols();
  StreamState next;
  next.frame_index = state.frame_index + 1;

  next.sparse_priors = state.sparse_priors;
  if (!next.sparse_priors.z.empty()) {
    next.sparse_priors.z.erase(next.sparse_priors.z.begin());
    next.sparse_priors.z.push_back(result.x_hat);
  }

  const Eigen::Index avail = svd_at_exit.singular_values.size();
  const Eigen::Index keep = std::min(d, avail);
  const Vector thresholded = (svd_at_exit.singular_values.head(keep).array() -
                              0.5 * mu_exit)
                                 .max(0.0)
                                 .matrix();
  // B_t = U(:,1:d) * diag(thresholded) * V(1:d,1:d)^T. The V block is not
  // orthonormal, so the cached factors come from one extra small SVD of the
  // d x d product it forms with the thresholded values.
  const Matrix U1 = svd_at_exit.U.leftCols(keep);
  const Matrix small = thresholded.asDiagonal() *
                       svd_at_exit.V.topLeftCorner(keep, keep).transpose();
  next.lowrank_prior.noalias() = U1 * small;
  if (next.lowrank_prior.cols() != d) {
    // keep < d can only happen when the exit factorization carried fewer
    // than d values; pad with zero columns to hold the shape contract.
    Matrix padded = Matrix::Zero(n, d);
    padded.leftCols(next.lowrank_prior.cols()) = next.lowrank_prior;
    next.lowrank_prior = padded;
  }

  SvdFactors sf = full_svd(small);
  SvdFactors cache;
  cache.U.noalias() = U1 * sf.U;
  cache.singular_values = sf.singular_values;
  cache.V = sf.V;
  if (keep < d) {
    // Padded columns contribute zero rows to V; extend to keep shapes valid.
    Matrix V = Matrix::Zero(d, keep);
    V.topRows(keep) = sf.V;
    cache.V = V;
  }
  next.lowrank_factors = std::move(cache);
  return next;
}

namespace detail {

// Singular values of [B v] through the cached factors of B: they equal the
// singular values of the small core [diag(sigma) w; 0 rho] with w the
// projection of v and rho the residual norm, because the outer factors are
// orthonormal.
inline double concat_nuclear_norm(const SvdFactors& B_factors,
                                  const Vector& v) {
  const Eigen::Index k = B_factors.U.cols();
  const Vector w = B_factors.U.transpose() * v;
  const double rho = (v - B_factors.U * w).norm();
  Matrix core = Matrix::Zero(k + 1, k + 1);
  core.diagonal().head(k) = B_factors.singular_values;
  core.col(k).head(k) = w;
  core(k, k) = rho;
  return singular_values(core).sum();
}

}  // namespace detail

// One frame of the online decomposition. Proximal-gradient iterations with
// momentum recover the sparse part x and the low-rank projection v from the
// compressive measurements y = Phi(x + v); each iteration updates the
// low-rank side through an incremental SVD of the prior matrix with one
// appended column, updates the sparse side through the cluster-weighted
// multi-prior prox, then refreshes clusters and weights against the new
// sparse iterate. Returns the per-frame result plus the advanced prior
// state for the next frame.
inline std::pair<DecompositionResult, StreamState> decompose_frame(
    const Vector& y, const Matrix& Phi, const StreamState& state,
    const SolverConfig& cfg, const IterationCallback& on_iteration = {}) {
  cfg.validate();
  const Eigen::Index m = Phi.rows();
  const Eigen::Index n = Phi.cols();
  const Eigen::Index d = state.lowrank_prior.cols();
  if (y.size() != m) {
    throw InvalidInput("decompose_frame: y length " + std::to_string(y.size()) +
                       " does not match Phi rows " + std::to_string(m));
  }
  if (state.lowrank_prior.rows() != n) {
    throw InvalidInput("decompose_frame: prior row count mismatch");
  }
  const int J = state.sparse_priors.J();
  state.sparse_priors.validate(n);
  if (!y.allFinite() || !Phi.allFinite()) {
    throw InvalidInput("decompose_frame: non-finite input");
  }

  const double lambda = cfg.effective_lambda(n);
  const Vector phi_t_y = Phi.transpose() * y;
  // The automatic continuation start places the first sparse threshold
  // lambda*mu0/2 at half the data scale |Phi^T y|_inf, so early iterations
  // suppress the sparse block while the subspace step absorbs the signal.
  double mu = cfg.mu0 > 0.0
                  ? cfg.mu0
                  : std::max(phi_t_y.cwiseAbs().maxCoeff() / lambda,
                             cfg.mu_bar);
  mu = std::max(mu, cfg.mu_bar);

  const SvdFactors B_factors = state.lowrank_factors
                                   ? *state.lowrank_factors
                                   : full_svd(state.lowrank_prior);

  WeightState weights = WeightState::uniform(n, J, cfg.clusters);
  Vector x = Vector::Zero(n), x_prev = Vector::Zero(n);
  Vector v = Vector::Zero(n), v_prev = Vector::Zero(n);
  double xi_prev = 1.0, xi = 1.0;

  DecompositionResult res;
  SvdFactors exit_factors;
  double mu_exit = mu;

  for (int k = 0; k < cfg.max_iter; ++k) {
    const double coef = (xi_prev - 1.0) / xi;
    const Vector x_tilde = x + coef * (x - x_prev);
    const Vector v_tilde = v + coef * (v - v_prev);

    // Shared gradient of the data term at the extrapolated pair.
    const Vector grad =
        Phi.transpose() * (Phi * (v_tilde + x_tilde) - y);

    // Low-rank step: append the gradient-stepped column to the prior's
    // factorization, threshold the spectrum, keep the appended column.
    const Vector v_step = v_tilde - 0.5 * grad;
    const SvdFactors theta = inc_svd(B_factors, v_step);
    const Vector sigma_thr =
        (theta.singular_values.array() - 0.5 * mu).max(0.0).matrix();
    const Vector v_next =
        theta.U *
        sigma_thr.cwiseProduct(theta.V.row(theta.V.rows() - 1).transpose());

    // Sparse step: cluster-weighted multi-prior prox. The folded multiplier
    // carries the C gauge factor matching eval_objective's sparse term.
    const Vector x_next = prox_weighted_multi_l1(
        x_tilde - 0.5 * grad, state.sparse_priors, weights,
        0.5 * lambda * double(cfg.clusters) * mu);

    // Structure refresh against the new sparse iterate.
    if (k % cfg.recluster_stride == 0) {
      refresh_weights(x_next, state.sparse_priors, weights,
                      cfg.epsilon_weights, cfg.clusters, 0);
    }

    const double obj =
        0.5 * (Phi * (x_next + v_next) - y).squaredNorm() +
        mu * double(cfg.clusters) *
            eval_g(x_next, state.sparse_priors, weights, lambda) +
        mu * detail::concat_nuclear_norm(B_factors, v_next);
    res.objective_trace.push_back(obj);
    if (!std::isfinite(obj)) {
      throw NumericFailure("decompose_frame: objective diverged at iteration " +
                           std::to_string(k));
    }

    const double denom = std::max({1.0, x.norm(), v.norm()});
    const double rel =
        std::max((x_next - x).norm(), (v_next - v).norm()) / denom;

    x_prev = x;
    x = x_next;
    v_prev = v;
    v = v_next;
    exit_factors = theta;
    mu_exit = mu;
    res.iterations = k + 1;

    if (on_iteration) {
      on_iteration(IterationView{k, mu, x, v, weights});
    }

    const bool schedule_done = mu <= cfg.mu_bar;
    const double xi_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * xi * xi));
    xi_prev = xi;
    xi = xi_next;
    mu = std::max(cfg.epsilon_mu * mu, cfg.mu_bar);

    if (rel <= cfg.tol && schedule_done) {
      res.converged = true;
      break;
    }
  }

  res.x_hat = x;
  res.v_hat = v;
  StreamState next = update_priors(res, state, exit_factors, cfg, mu_exit);
  return {std::move(res), std::move(next)};
}

// The single-cluster baseline: the identical pipeline with C = 1, which
// degenerates the per-cluster weighting (gamma = 1) and leaves only the
// per-element and per-prior levels.
inline std::pair<DecompositionResult, StreamState> decompose_frame_baseline(
    const Vector& y, const Matrix& Phi, const StreamState& state,
    const SolverConfig& cfg, const IterationCallback& on_iteration = {}) {
  SolverConfig flat = cfg;
  flat.clusters = 1;
  return decompose_frame(y, Phi, state, flat, on_iteration);
}

}  // namespace osdec
