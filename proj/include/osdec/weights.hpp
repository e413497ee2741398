#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "osdec/clustering.hpp"
#include "osdec/errors.hpp"
#include "osdec/linalg.hpp"
#include "osdec/prox.hpp"

namespace osdec {

// Per-element weights for one prior: w_i = n_c * (|x_i - z_i| + eps)^-1
// normalized within i's cluster so the weights in cluster c sum to n_c.
inline Vector update_W(const Vector& x, const Vector& z_j,
                       const ClusterPartition& partition, double epsilon) {
  const Eigen::Index n = x.size();
  if (z_j.size() != n) throw InvalidInput("update_W: length mismatch");
  if (partition.assignment.size() != static_cast<std::size_t>(n)) {
    throw InvalidInput("update_W: partition length mismatch");
  }
  if (!(epsilon > 0.0)) throw InvalidInput("update_W: epsilon must be > 0");

  Vector inv(n);
  std::vector<double> denom(partition.C, 0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    inv(i) = 1.0 / (std::abs(x(i) - z_j(i)) + epsilon);
    denom[partition.assignment[i]] += inv(i);
  }
  Vector w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int c = partition.assignment[i];
    w(i) = partition.sizes[c] * inv(i) / denom[c];
  }
  return w;
}

// Per-cluster weights for one prior: gamma_c proportional to the inverse of
// the weighted residual l1 norm inside cluster c, normalized to sum 1.
inline Vector update_gamma(const Vector& x, const Vector& z_j,
                           const Vector& W_j,
                           const ClusterPartition& partition, double epsilon) {
  const Eigen::Index n = x.size();
  if (z_j.size() != n || W_j.size() != n) {
    throw InvalidInput("update_gamma: length mismatch");
  }
  if (partition.assignment.size() != static_cast<std::size_t>(n)) {
    throw InvalidInput("update_gamma: partition length mismatch");
  }
  if (!(epsilon > 0.0)) throw InvalidInput("update_gamma: epsilon must be > 0");

  std::vector<double> norms(partition.C, 0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    norms[partition.assignment[i]] += W_j(i) * std::abs(x(i) - z_j(i));
  }
  Vector gamma(partition.C);
  double total = 0.0;
  for (int c = 0; c < partition.C; ++c) {
    gamma(c) = 1.0 / (norms[c] + epsilon);
    total += gamma(c);
  }
  return gamma / total;
}

// Per-prior weights: beta_j proportional to the inverse of the fully
// weighted distance |gamma_j W_j (x - z_j)|_1, normalized to sum 1 over
// the J+1 priors (index 0 is the implicit zero prior).
inline Vector update_beta(const Vector& x, const PriorSet& priors,
                          const WeightState& weights, double epsilon) {
  const Eigen::Index n = x.size();
  priors.validate(n);
  const int J = priors.J();
  if (weights.J() != J) throw InvalidInput("update_beta: J mismatch");
  if (!(epsilon > 0.0)) throw InvalidInput("update_beta: epsilon must be > 0");

  Vector beta(J + 1);
  double total = 0.0;
  for (int j = 0; j <= J; ++j) {
    if (weights.W[j].size() != n) {
      throw InvalidInput("update_beta: weight length mismatch");
    }
    double dist = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double zji = (j == 0) ? 0.0 : priors.z[j - 1](i);
      const double gamma =
          weights.gamma_bar(j, weights.partitions[j].assignment[i]);
      dist += gamma * weights.W[j](i) * std::abs(x(i) - zji);
    }
    beta(j) = 1.0 / (dist + epsilon);
    total += beta(j);
  }
  return beta / total;
}

// One full structure refresh against the current sparse estimate x:
// recluster the absolute residuals per prior, then update the three weight
// levels in dependency order (W needs the partitions, gamma needs W, beta
// needs gamma and W). Clustering runs on |x_i - z_ji| because the penalty
// is sign-symmetric and the weight formulas see only magnitudes.
inline void refresh_weights(const Vector& x, const PriorSet& priors,
                            WeightState& weights, double epsilon, int C,
                            std::uint64_t seed) {
  const Eigen::Index n = x.size();
  priors.validate(n);
  const int J = priors.J();
  if (weights.J() != J) throw InvalidInput("refresh_weights: J mismatch");

  for (int j = 0; j <= J; ++j) {
    Vector residual = x;
    if (j > 0) residual -= priors.z[j - 1];
    weights.partitions[j] = kmeans_1d(residual.cwiseAbs(), C, seed);
  }
  if (weights.gamma_bar.cols() != C) {
    weights.gamma_bar.resize(J + 1, C);
  }
  const Vector zero = Vector::Zero(n);
  for (int j = 0; j <= J; ++j) {
    const Vector& zj_ref = (j == 0) ? zero : priors.z[j - 1];
    weights.W[j] = update_W(x, zj_ref, weights.partitions[j], epsilon);
    weights.gamma_bar.row(j) =
        update_gamma(x, zj_ref, weights.W[j], weights.partitions[j], epsilon)
            .transpose();
  }
  weights.beta = update_beta(x, priors, weights, epsilon);
}

}  // namespace osdec
