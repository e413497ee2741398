#pragma once

#include <Eigen/QR>

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "osdec/errors.hpp"
#include "osdec/linalg.hpp"
#include "osdec/rng.hpp"

namespace osdec {

struct StreamParams {
  Eigen::Index n = 0;
  int r = 0;
  Eigen::Index d = 0;  // training frames
  Eigen::Index q = 0;  // test frames
  int s0 = 0;
  std::uint64_t seed = 0;
};

// Ground-truth stream of d+q frames: column t of L_true + X_true is the
// frame observed at time t. The first d columns are the training split.
struct SyntheticStream {
  Matrix L_true;
  Matrix X_true;
  StreamParams params;
};

namespace detail {

// Draws k distinct values from pool[0..avail) by partial Fisher-Yates,
// consuming the chosen entries off the end of the active range.
inline std::vector<Eigen::Index> draw_without_replacement(
    std::vector<Eigen::Index>& pool, Eigen::Index avail, Eigen::Index k,
    Rng& rng) {
  std::vector<Eigen::Index> out;
  out.reserve(k);
  for (Eigen::Index t = 0; t < k; ++t) {
    const Eigen::Index pick = Eigen::Index(rng.bounded(std::uint64_t(avail)));
    out.push_back(pool[pick]);
    std::swap(pool[pick], pool[avail - 1]);
    --avail;
  }
  return out;
}

}  // namespace detail

// Synthetic generator: L = U V^T with standard-normal factors of rank r;
// the sparse sequence starts with s0 standard-normal entries and changes
// exactly s0/2 support positions per step, split evenly (in expectation)
// between additions and removals. The support size is confined to
// [s0, s0 + 15]: the addition/removal split is first clamped so the size
// never drops below s0, and whenever it exceeds s0 + 15 the frame is reset
// by zeroing randomly chosen support positions until exactly s0 remain.
inline SyntheticStream gen_stream(Eigen::Index n, int r, Eigen::Index d,
                                  Eigen::Index q, int s0, std::uint64_t seed) {
  if (n < 1 || d < 1 || q < 0) throw InvalidInput("gen_stream: bad dims");
  if (s0 < 0 || s0 % 2 != 0) {
    throw InvalidInput("gen_stream: s0 must be even, got " +
                       std::to_string(s0));
  }
  if (s0 > n) throw InvalidInput("gen_stream: s0 exceeds n");
  if (r < 0 || r > std::min(n, d + q)) {
    throw InvalidInput("gen_stream: rank out of range");
  }

  Rng rng(mix_seed({seed, 0x73747265616dULL}));
  const Eigen::Index frames = d + q;

  SyntheticStream s;
  s.params = {n, r, d, q, s0, seed};
  const Matrix U = normal_matrix(n, r, rng);
  const Matrix V = normal_matrix(frames, r, rng);
  s.L_true = U * V.transpose();
  s.X_true = Matrix::Zero(n, frames);

  std::vector<Eigen::Index> all(n);
  for (Eigen::Index i = 0; i < n; ++i) all[i] = i;

  // First frame: s0 nonzeros on a random support.
  std::vector<Eigen::Index> support, zeros;
  {
    std::vector<Eigen::Index> pool = all;
    support = detail::draw_without_replacement(pool, n, s0, rng);
    for (Eigen::Index i : support) s.X_true(i, 0) = rng.normal();
  }

  const int h = s0 / 2;  // support positions changed per step
  for (Eigen::Index t = 1; t < frames; ++t) {
    s.X_true.col(t) = s.X_true.col(t - 1);
    const Eigen::Index cur = Eigen::Index(support.size());

    // Split h into additions and removals; the expected split is even, and
    // the clamp keeps the resulting support size at s0 or above and within
    // the available zero positions.
    Eigen::Index add = h / 2;
    if (h % 2 != 0 && rng.uniform01() < 0.5) ++add;
    const Eigen::Index min_add = std::max<Eigen::Index>(0, (s0 - cur + h + 1) / 2);
    add = std::max(add, min_add);
    add = std::min<Eigen::Index>({add, h, n - cur});
    const Eigen::Index rem = h - add;

    zeros.clear();
    std::vector<char> on(n, 0);
    for (Eigen::Index i : support) on[i] = 1;
    for (Eigen::Index i = 0; i < n; ++i)
      if (!on[i]) zeros.push_back(i);

    const auto added = detail::draw_without_replacement(
        zeros, Eigen::Index(zeros.size()), add, rng);
    const auto removed =
        detail::draw_without_replacement(support, cur, rem, rng);
    support.resize(cur - rem);
    for (Eigen::Index i : added) {
      s.X_true(i, t) = rng.normal();
      support.push_back(i);
    }
    for (Eigen::Index i : removed) s.X_true(i, t) = 0.0;

    // Changed positions must number exactly h and the size must sit at s0
    // or above before the cap is applied.
    if (Eigen::Index(support.size()) != cur + add - rem ||
        Eigen::Index(support.size()) < s0) {
      throw InternalError("gen_stream: support bookkeeping failed");
    }

    // Cap: reset to exactly s0 nonzeros by zeroing random support entries.
    if (Eigen::Index(support.size()) > s0 + 15) {
      const Eigen::Index excess = Eigen::Index(support.size()) - s0;
      const auto dropped = detail::draw_without_replacement(
          support, Eigen::Index(support.size()), excess, rng);
      support.resize(support.size() - dropped.size());
      for (Eigen::Index i : dropped) s.X_true(i, t) = 0.0;
    }

    const Eigen::Index sz = Eigen::Index(support.size());
    if (sz < s0 || sz > s0 + 15) {
      throw InternalError("gen_stream: support size " + std::to_string(sz) +
                          " left the band");
    }
  }
  return s;
}

// Row-orthonormal sensing operator: thin-QR orthonormalization of a
// standard-normal n x m matrix, transposed. Every row has unit norm and the
// rows are mutually orthogonal, so the spectral norm is exactly 1 and the
// solver's fixed 1/2 step is a valid gradient step.
inline Matrix gen_sensing(Eigen::Index m, Eigen::Index n, std::uint64_t seed) {
  if (m < 1 || m > n) {
    throw InvalidInput("gen_sensing: need 1 <= m <= n, got m = " +
                       std::to_string(m) + ", n = " + std::to_string(n));
  }
  Rng rng(mix_seed({seed, 0x73656e73ULL}));
  const Matrix G = normal_matrix(n, m, rng);
  Eigen::HouseholderQR<Matrix> qr(G);
  const Matrix thin_q = qr.householderQ() * Matrix::Identity(n, m);
  return thin_q.transpose();
}

// Fraction of estimate/truth pairs recovered within the threshold on
// relative l2 error; a zero truth vector counts as recovered when the
// estimate's norm is itself below the threshold.
inline double success_probability(const std::vector<Vector>& estimates,
                                  const std::vector<Vector>& truths,
                                  double threshold = 1e-2) {
  if (estimates.empty() || estimates.size() != truths.size()) {
    throw InvalidInput("success_probability: need equal-length nonempty lists");
  }
  int hits = 0;
  for (std::size_t k = 0; k < estimates.size(); ++k) {
    const double tn = truths[k].norm();
    const double err = (estimates[k] - truths[k]).norm();
    if (tn == 0.0 ? (estimates[k].norm() <= threshold)
                  : (err / tn <= threshold)) {
      ++hits;
    }
  }
  return double(hits) / double(estimates.size());
}

}  // namespace osdec
