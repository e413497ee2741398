#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "osdec/prox.hpp"

// Shared helpers for building random test fixtures. Test files use the
// standard mt19937_64 engine; reproducibility only needs fixed seeds here,
// not cross-platform stability.
namespace support {

inline osdec::Matrix random_matrix(int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  osdec::Matrix A(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) A(i, j) = gauss(rng);
  return A;
}

inline osdec::Vector random_vector(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  osdec::Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = gauss(rng);
  return v;
}

// Weight state with random positive weights that still satisfy every
// normalization invariant, over random contiguous-block partitions.
inline osdec::WeightState random_weight_state(Eigen::Index n, int J, int C,
                                              std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.2, 2.0);
  osdec::WeightState s = osdec::WeightState::uniform(n, J, C);
  for (int j = 0; j <= J; ++j) {
    const osdec::ClusterPartition& p = s.partitions[j];
    osdec::Vector raw(n);
    std::vector<double> sums(C, 0.0);
    for (Eigen::Index i = 0; i < n; ++i) {
      raw(i) = unif(rng);
      sums[p.assignment[i]] += raw(i);
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      const int c = p.assignment[i];
      s.W[j](i) = raw(i) * p.sizes[c] / sums[c];
    }
    double gtot = 0.0;
    for (int c = 0; c < C; ++c) {
      s.gamma_bar(j, c) = unif(rng);
      gtot += s.gamma_bar(j, c);
    }
    s.gamma_bar.row(j) /= gtot;
  }
  double btot = 0.0;
  for (int j = 0; j <= J; ++j) {
    s.beta(j) = unif(rng);
    btot += s.beta(j);
  }
  s.beta /= btot;
  return s;
}

// Priors with entries in (-2, 2); with some probability an entry is snapped
// to zero or to the previous prior's entry so breakpoint ties get exercised.
inline osdec::PriorSet random_priors(Eigen::Index n, int J,
                                     std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  osdec::PriorSet priors;
  for (int j = 0; j < J; ++j) {
    osdec::Vector z(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      z(i) = unif(rng);
      const double c = coin(rng);
      if (c < 0.1) z(i) = 0.0;
      else if (c < 0.2 && j > 0) z(i) = priors.z[j - 1](i);
    }
    priors.z.push_back(z);
  }
  return priors;
}

}  // namespace support
