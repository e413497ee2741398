#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "osdec/clustering.hpp"
#include "osdec/errors.hpp"
#include "osdec/linalg.hpp"

namespace osdec {

// Side-information vectors z_1..z_J for the sparse component. The zero prior
// z_0 (which promotes plain sparsity) is implicit and never stored.
struct PriorSet {
  std::vector<Vector> z;

  int J() const { return static_cast<int>(z.size()); }

  void validate(Eigen::Index n) const {
    for (const Vector& zj : z) {
      if (zj.size() != n) {
        throw InvalidInput("prior length " + std::to_string(zj.size()) +
                           " does not match n = " + std::to_string(n));
      }
      if (!zj.allFinite()) throw InvalidInput("prior has non-finite entries");
    }
  }
};

// Three-level weights attached to the J+1 priors (index 0 is the implicit
// zero prior): per-element w_ji, per-cluster gamma_bar_jc, and per-prior
// beta_j, together with the cluster partition each gamma row refers to.
struct WeightState {
  std::vector<Vector> W;                     // J+1 vectors of length n
  Matrix gamma_bar;                          // (J+1) x C, rows sum to 1
  Vector beta;                               // length J+1, sums to 1
  std::vector<ClusterPartition> partitions;  // one per prior

  int J() const { return static_cast<int>(W.size()) - 1; }
  int C() const { return static_cast<int>(gamma_bar.cols()); }

  // Flat starting state: unit element weights, equal cluster and prior
  // weights, evenly sized contiguous partitions.
  static WeightState uniform(Eigen::Index n, int J, int C) {
    if (J < 0) throw InvalidInput("WeightState: J must be >= 0");
    WeightState s;
    s.W.assign(J + 1, Vector::Ones(n));
    s.gamma_bar = Matrix::Constant(J + 1, C, 1.0 / C);
    s.beta = Vector::Constant(J + 1, 1.0 / (J + 1));
    s.partitions.assign(J + 1, uniform_partition(n, C));
    return s;
  }

  // Effective multiplier of |v - z_ji| in the penalty, beta_j * gamma_ji *
  // w_ji with gamma_ji read through i's cluster.
  double element_weight(int j, Eigen::Index i) const {
    return beta(j) * gamma_bar(j, partitions[j].assignment[i]) * W[j](i);
  }

  void validate(Eigen::Index n) const {
    const int jp1 = static_cast<int>(W.size());
    if (jp1 < 1) throw InvalidInput("weights: need at least the zero prior");
    if (beta.size() != jp1 || gamma_bar.rows() != jp1 ||
        partitions.size() != static_cast<std::size_t>(jp1)) {
      throw InvalidInput("weights: per-prior array sizes disagree");
    }
    if (std::abs(beta.sum() - 1.0) > 1e-12) {
      throw InvalidInput("weights: beta does not sum to 1");
    }
    for (int j = 0; j < jp1; ++j) {
      if (W[j].size() != n) throw InvalidInput("weights: W length mismatch");
      if ((W[j].array() <= 0.0).any() || !W[j].allFinite()) {
        throw InvalidInput("weights: W entries must be positive finite");
      }
      if ((gamma_bar.row(j).array() <= 0.0).any()) {
        throw InvalidInput("weights: gamma entries must be positive");
      }
      if (std::abs(gamma_bar.row(j).sum() - 1.0) > 1e-12) {
        throw InvalidInput("weights: gamma row does not sum to 1");
      }
      if (beta(j) <= 0.0) throw InvalidInput("weights: beta must be positive");
      const ClusterPartition& p = partitions[j];
      p.validate();
      if (p.assignment.size() != static_cast<std::size_t>(n)) {
        throw InvalidInput("weights: partition length mismatch");
      }
      if (p.C != gamma_bar.cols()) {
        throw InvalidInput("weights: partition C mismatch");
      }
      // Per-cluster element weights must average to one.
      std::vector<double> sums(p.C, 0.0);
      for (Eigen::Index i = 0; i < n; ++i) sums[p.assignment[i]] += W[j](i);
      for (int c = 0; c < p.C; ++c) {
        if (std::abs(sums[c] - p.sizes[c]) > 1e-9) {
          throw InvalidInput("weights: cluster weight sum off for cluster " +
                             std::to_string(c));
        }
      }
    }
  }
};

namespace detail {

// Scalar minimizer of 0.5*(v-u)^2 + tau * sum_l a_l |v - z_l| for sorted
// distinct breakpoints with positive weights, by scanning the closed-form
// optimality intervals. ts is caller-provided scratch of length m+1.
inline double scalar_multi_l1_prox(double u, double tau, const double* z,
                                   const double* a, int m, double* ts) {
  // Signed weight sums S_l = sum_{k<=l} a_k - sum_{k>l} a_k for l = -1..m-1
  // give the u-space interval edges f_l = z_l + tau*S_{l-1} and
  // e_l = z_l + tau*S_l. On the open gap above e_l the minimizer is
  // v = u - tau*S_l; on the closed interval [f_l, e_l] it is the breakpoint
  // z_l itself. The edges are built from shared rounded subexpressions
  // (ts[l+1] = tau*S_l appears in both e_l and f_{l+1}), which keeps the
  // sequence f_0 <= e_0 <= f_1 <= ... nondecreasing in floating point, so
  // the intervals tile the real line and the scan below lands in exactly
  // one of them. A violated ordering means broken sorting or weights.
  double s = 0.0;
  for (int l = 0; l < m; ++l) s += a[l];
  s = -s;
  ts[0] = tau * s;
  for (int l = 0; l < m; ++l) {
    s += 2.0 * a[l];
    ts[l + 1] = tau * s;
  }
  for (int l = 0; l < m; ++l) {
    const bool ordered =
        ts[l] <= ts[l + 1] && (l + 1 >= m || z[l] + ts[l + 1] <= z[l + 1] + ts[l + 1]);
    if (!ordered) {
      throw InternalError(
          "multi-l1 prox: optimality intervals fail to tile the line");
    }
  }

  if (u < z[0] + ts[0]) return u - ts[0];
  for (int l = 0; l < m; ++l) {
    if (u <= z[l] + ts[l + 1]) return z[l];  // u >= f_l held to reach here
    if (l + 1 == m) break;
    if (u < z[l + 1] + ts[l + 1]) return u - ts[l + 1];
  }
  if (u > z[m - 1] + ts[m]) return u - ts[m];
  throw InternalError("multi-l1 prox: no optimality interval fired");
}

}  // namespace detail

// Proximal operator of tau * sum_j beta_j * |gamma_j W_j (v - z_j)|_1
// evaluated elementwise: each component minimizes
//   0.5*(v - u_i)^2 + tau * sum_{j=0}^{J} beta_j gamma_ji w_ji |v - z_ji|.
// tau already folds every scalar outside the weights (lambda times the
// gradient step), so a single nonnegative multiplier is all that enters.
inline Vector prox_weighted_multi_l1(const Vector& u, const PriorSet& priors,
                                     const WeightState& weights, double tau) {
  const Eigen::Index n = u.size();
  if (!(tau >= 0.0)) {
    throw InvalidInput("prox: tau must be nonnegative");
  }
  priors.validate(n);
  const int J = priors.J();
  if (weights.J() != J) {
    throw InvalidInput("prox: weight state built for J = " +
                       std::to_string(weights.J()) + ", priors have J = " +
                       std::to_string(J));
  }
  for (int j = 0; j <= J; ++j) {
    if (weights.W[j].size() != n ||
        weights.partitions[j].assignment.size() !=
            static_cast<std::size_t>(n)) {
      throw InvalidInput("prox: weight state length mismatch");
    }
  }
  if (tau == 0.0) return u;

  Vector out(n);
  std::vector<double> z(J + 1), a(J + 1), ts(J + 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    // Collect breakpoints (z_0 = 0 first) and their effective weights.
    int m = 0;
    for (int j = 0; j <= J; ++j) {
      z[m] = (j == 0) ? 0.0 : priors.z[j - 1](i);
      a[m] = weights.element_weight(j, i);
      ++m;
    }
    // Insertion-sort the few breakpoints, then merge exact duplicates by
    // summing their weights; the scalar objective is unchanged and the
    // interval scan needs strictly increasing breakpoints.
    for (int p = 1; p < m; ++p) {
      const double zp = z[p], ap = a[p];
      int q = p - 1;
      while (q >= 0 && z[q] > zp) {
        z[q + 1] = z[q];
        a[q + 1] = a[q];
        --q;
      }
      z[q + 1] = zp;
      a[q + 1] = ap;
    }
    int mm = 0;
    for (int p = 1; p < m; ++p) {
      if (z[p] == z[mm]) {
        a[mm] += a[p];
      } else {
        ++mm;
        z[mm] = z[p];
        a[mm] = a[p];
      }
    }
    m = mm + 1;
    out(i) = detail::scalar_multi_l1_prox(u(i), tau, z.data(), a.data(), m,
                                          ts.data());
  }
  return out;
}

// The sparse penalty sum_j beta_j * |gamma_j W_j (x - z_j)|_1 scaled by
// lambda.
inline double eval_g(const Vector& x, const PriorSet& priors,
                     const WeightState& weights, double lambda) {
  const Eigen::Index n = x.size();
  if (!(lambda >= 0.0)) {
    throw InvalidInput("eval_g: lambda must be nonnegative");
  }
  priors.validate(n);
  const int J = priors.J();
  if (weights.J() != J) {
    throw InvalidInput("eval_g: weight state J mismatch");
  }
  double total = 0.0;
  for (int j = 0; j <= J; ++j) {
    if (weights.W[j].size() != n) {
      throw InvalidInput("eval_g: weight length mismatch");
    }
    double term = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double zji = (j == 0) ? 0.0 : priors.z[j - 1](i);
      const double gamma =
          weights.gamma_bar(j, weights.partitions[j].assignment[i]);
      term += gamma * weights.W[j](i) * std::abs(x(i) - zji);
    }
    total += weights.beta(j) * term;
  }
  return lambda * total;
}

}  // namespace osdec
