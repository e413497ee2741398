#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "osdec/errors.hpp"
#include "osdec/linalg.hpp"

namespace osdec {

// Partition of value indices {0..n-1} into C nonempty clusters.
struct ClusterPartition {
  int C = 0;
  std::vector<int> assignment;  // cluster id in [0, C) per index
  std::vector<int> sizes;       // per-cluster element counts

  void validate() const {
    if (C < 1) throw InvalidInput("partition: cluster count must be >= 1");
    if (sizes.size() != static_cast<std::size_t>(C)) {
      throw InvalidInput("partition: sizes length does not match C");
    }
    std::vector<int> counts(C, 0);
    for (int a : assignment) {
      if (a < 0 || a >= C) {
        throw InvalidInput("partition: cluster id out of range");
      }
      ++counts[a];
    }
    for (int c = 0; c < C; ++c) {
      if (counts[c] != sizes[c]) {
        throw InvalidInput("partition: sizes disagree with assignment");
      }
      if (counts[c] == 0) {
        throw InvalidInput("partition: empty cluster " + std::to_string(c));
      }
    }
  }
};

// Evenly sized contiguous partition, the neutral starting state before any
// data-driven clustering has run.
inline ClusterPartition uniform_partition(Eigen::Index n, int C) {
  if (C < 1) throw InvalidInput("uniform_partition: C must be >= 1");
  if (static_cast<Eigen::Index>(C) > n) {
    throw InvalidInput("uniform_partition: C exceeds element count");
  }
  ClusterPartition p;
  p.C = C;
  p.assignment.resize(n);
  p.sizes.assign(C, 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int c = static_cast<int>((i * C) / n);
    p.assignment[i] = c;
    ++p.sizes[c];
  }
  return p;
}

namespace detail {

inline double wcss(const Vector& values, const ClusterPartition& p,
                   const std::vector<double>& centroids) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    const double d = values(i) - centroids[p.assignment[i]];
    acc += d * d;
  }
  return acc;
}

}  // namespace detail

// Lloyd's algorithm on scalar values. Centroids are seeded at the
// (c + 1/2)/C quantiles of the sorted values, so the result is a
// deterministic function of the input alone; the seed parameter is part of
// the interface but unused by this seeding scheme. Stops when assignments
// stop changing or after 100 iterations. Clusters emptied by an update are
// repaired by reassigning the value currently farthest from its centroid.
//
// When wcss_trace is non-null it receives the within-cluster sum of squared
// deviations after each iteration.
inline ClusterPartition kmeans_1d(const Vector& values, int C,
                                  std::uint64_t seed,
                                  std::vector<double>* wcss_trace = nullptr) {
  (void)seed;
  const Eigen::Index n = values.size();
  if (C < 1) throw InvalidInput("kmeans_1d: C must be >= 1");
  if (static_cast<Eigen::Index>(C) > n) {
    throw InvalidInput("kmeans_1d: C = " + std::to_string(C) +
                       " exceeds n = " + std::to_string(n));
  }
  if (!values.allFinite()) {
    throw InvalidInput("kmeans_1d: values must be finite");
  }
  if (wcss_trace) wcss_trace->clear();

  std::vector<double> sorted(values.data(), values.data() + n);
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> centroids(C);
  for (int c = 0; c < C; ++c) {
    const auto idx = static_cast<Eigen::Index>(((c + 0.5) * n) / C);
    centroids[c] = sorted[std::min(idx, n - 1)];
  }

  ClusterPartition p;
  p.C = C;
  p.assignment.assign(n, -1);
  p.sizes.assign(C, 0);

  for (int iter = 0; iter < 100; ++iter) {
    // Assignment step; ties go to the lowest cluster id.
    bool changed = false;
    std::fill(p.sizes.begin(), p.sizes.end(), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::abs(values(i) - centroids[0]);
      for (int c = 1; c < C; ++c) {
        const double d = std::abs(values(i) - centroids[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (p.assignment[i] != best) {
        p.assignment[i] = best;
        changed = true;
      }
      ++p.sizes[best];
    }

    // Repair empty clusters one at a time with the worst-fitting value.
    for (int c = 0; c < C; ++c) {
      if (p.sizes[c] > 0) continue;
      Eigen::Index worst = -1;
      double worst_d = -1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (p.sizes[p.assignment[i]] <= 1) continue;  // keep donors nonempty
        const double d = std::abs(values(i) - centroids[p.assignment[i]]);
        if (d > worst_d) {
          worst_d = d;
          worst = i;
        }
      }
      if (worst < 0) {
        throw InternalError("kmeans_1d: cannot repair empty cluster");
      }
      --p.sizes[p.assignment[worst]];
      p.assignment[worst] = c;
      ++p.sizes[c];
      centroids[c] = values(worst);
      changed = true;
    }

    // Update step.
    std::vector<double> sums(C, 0.0);
    for (Eigen::Index i = 0; i < n; ++i) sums[p.assignment[i]] += values(i);
    for (int c = 0; c < C; ++c) centroids[c] = sums[c] / p.sizes[c];

    if (wcss_trace) wcss_trace->push_back(detail::wcss(values, p, centroids));
    if (!changed) break;
  }
  return p;
}

}  // namespace osdec
