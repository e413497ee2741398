#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

// Reference implementations used only by the tests. Each is written against
// the mathematical definition with a different algorithm than the library
// uses, so agreement between the two is evidence, not a tautology.
namespace oracle {

// Eigenvalues of a symmetric matrix via cyclic Jacobi rotations, sorted
// nonincreasing. Independent of the LAPACK path in the library.
inline Eigen::VectorXd symmetric_eigenvalues_jacobi(Eigen::MatrixXd S) {
  const Eigen::Index n = S.rows();
  const double scale = std::max(1.0, S.norm());
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += S(p, q) * S(p, q);
    if (std::sqrt(off) <= 1e-13 * scale) break;

    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (std::abs(S(p, q)) <= 1e-300) continue;
        const double theta = (S(q, q) - S(p, p)) / (2.0 * S(p, q));
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double skp = S(k, p), skq = S(k, q);
          S(k, p) = c * skp - s * skq;
          S(k, q) = s * skp + c * skq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double spk = S(p, k), sqk = S(q, k);
          S(p, k) = c * spk - s * sqk;
          S(q, k) = s * spk + c * sqk;
        }
      }
    }
  }
  Eigen::VectorXd ev = S.diagonal();
  std::sort(ev.data(), ev.data() + n, std::greater<double>());
  return ev;
}

// Singular values of A as square roots of the Jacobi eigenvalues of A^T A.
inline Eigen::VectorXd singular_values_via_gram(const Eigen::MatrixXd& A) {
  const Eigen::MatrixXd gram = A.transpose() * A;
  Eigen::VectorXd ev = symmetric_eigenvalues_jacobi(gram);
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    ev(i) = std::sqrt(std::max(ev(i), 0.0));
  return ev;
}

// Argmin of f over the uniform grid {lo, lo+step, ..., hi}.
inline double grid_search_argmin(const std::function<double(double)>& f,
                                 double lo, double hi, double step) {
  double best_v = lo;
  double best_f = f(lo);
  for (double v = lo + step; v <= hi; v += step) {
    const double fv = f(v);
    if (fv < best_f) {
      best_f = fv;
      best_v = v;
    }
  }
  return best_v;
}

// Scalar objective 0.5*(v-u)^2 + tau * sum_j a_j * |v - z_j|.
inline double multi_l1_objective(double v, double u, double tau,
                                 const std::vector<double>& a,
                                 const std::vector<double>& z) {
  double acc = 0.5 * (v - u) * (v - u);
  for (std::size_t j = 0; j < a.size(); ++j)
    acc += tau * a[j] * std::abs(v - z[j]);
  return acc;
}

// Minimizer of the scalar objective above located by grid search. The
// minimizer lies in the convex hull of {u} and the breakpoints widened by
// tau * sum(a); the grid covers that interval with margin.
inline double multi_l1_argmin_grid(double u, double tau,
                                   const std::vector<double>& a,
                                   const std::vector<double>& z,
                                   double step) {
  double lo = u, hi = u;
  for (double zj : z) {
    lo = std::min(lo, zj);
    hi = std::max(hi, zj);
  }
  double total = 0.0;
  for (double aj : a) total += aj;
  lo -= tau * total + step;
  hi += tau * total + step;
  return grid_search_argmin(
      [&](double v) { return multi_l1_objective(v, u, tau, a, z); }, lo, hi,
      step);
}

// Kahan compensated summation, for checking accumulation-order robustness.
inline double kahan_sum(const std::vector<double>& xs) {
  double sum = 0.0, comp = 0.0;
  for (double x : xs) {
    const double y = x - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum;
}

}  // namespace oracle
