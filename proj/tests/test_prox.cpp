#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "osdec/prox.hpp"
#include "support.hpp"

using osdec::PriorSet;
using osdec::Vector;
using osdec::WeightState;

namespace {

// Effective per-prior weights and breakpoints for element i, in prior order.
void element_instance(const PriorSet& priors, const WeightState& weights,
                      Eigen::Index i, std::vector<double>& a,
                      std::vector<double>& z) {
  a.clear();
  z.clear();
  for (int j = 0; j <= priors.J(); ++j) {
    a.push_back(weights.element_weight(j, i));
    z.push_back(j == 0 ? 0.0 : priors.z[j - 1](i));
  }
}

}  // namespace

TEST_CASE("prox with only the zero prior is a soft threshold") {
  Vector u(1);
  u << 2.0;
  const PriorSet priors;  // J = 0
  const WeightState w = WeightState::uniform(1, 0, 1);
  const Vector out = osdec::prox_weighted_multi_l1(u, priors, w, 0.5);
  REQUIRE(out(0) == Catch::Approx(1.5).margin(1e-12));
}

TEST_CASE("prox with one unit prior matches the worked scalar cases") {
  // J = 1, z_1 = 1, beta = (1/2, 1/2), gamma and W all ones, tau = 0.4.
  const Eigen::Index n = 3;
  PriorSet priors;
  priors.z.push_back(Vector::Ones(n));
  const WeightState w = WeightState::uniform(n, 1, 1);

  Vector u(n);
  u << 2.0, 0.5, 1.1;
  const Vector out = osdec::prox_weighted_multi_l1(u, priors, w, 0.4);

  REQUIRE(out(0) == Catch::Approx(1.6).margin(1e-12));   // pulled by both
  REQUIRE(out(1) == Catch::Approx(0.5).margin(1e-12));   // subgradients cancel
  REQUIRE(out(2) == Catch::Approx(1.0).margin(1e-12));   // snaps to z_1

  // Same three cases against the grid-search oracle at step 1e-5.
  for (Eigen::Index i = 0; i < n; ++i) {
    const double ref = oracle::multi_l1_argmin_grid(u(i), 0.4, {0.5, 0.5},
                                                    {0.0, 1.0}, 1e-5);
    REQUIRE(std::abs(out(i) - ref) <= 1e-4);
  }
}

TEST_CASE("prox matches grid search on random weighted instances") {
  std::mt19937_64 rng(5150);
  std::uniform_real_distribution<double> unif_u(-3.0, 3.0);
  std::uniform_real_distribution<double> unif_tau(0.0, 1.0);
  std::uniform_int_distribution<int> unif_J(0, 4);

  double worst = 0.0;
  std::vector<double> a, z;
  int instances = 0;
  while (instances < 1000) {
    const Eigen::Index n = 5;
    const int J = unif_J(rng);
    const int C = 2;
    const PriorSet priors = support::random_priors(n, J, rng);
    const WeightState weights = support::random_weight_state(n, J, C, rng);
    const double tau = unif_tau(rng);
    Vector u(n);
    for (Eigen::Index i = 0; i < n; ++i) u(i) = unif_u(rng);

    const Vector out = osdec::prox_weighted_multi_l1(u, priors, weights, tau);
    for (Eigen::Index i = 0; i < n; ++i) {
      element_instance(priors, weights, i, a, z);
      const double ref = oracle::multi_l1_argmin_grid(u(i), tau, a, z, 1e-4);
      worst = std::max(worst, std::abs(out(i) - ref));
      ++instances;
    }
  }
  REQUIRE(worst <= 1e-3);
}

TEST_CASE("prox is monotone in u") {
  std::mt19937_64 rng(99);
  const Eigen::Index n = 64;
  const PriorSet priors = support::random_priors(n, 3, rng);
  const WeightState weights = support::random_weight_state(n, 3, 2, rng);

  // Shared breakpoints per element; feed a sorted ramp of inputs through one
  // element at a time by shifting a constant vector.
  for (double tau : {0.1, 0.6}) {
    Vector prev = osdec::prox_weighted_multi_l1(Vector::Constant(n, -4.0),
                                                priors, weights, tau);
    for (double u = -3.9; u <= 4.0; u += 0.1) {
      const Vector cur = osdec::prox_weighted_multi_l1(Vector::Constant(n, u),
                                                       priors, weights, tau);
      REQUIRE(((cur - prev).array() >= -1e-12).all());
      prev = cur;
    }
  }
}

TEST_CASE("prox is nonexpansive") {
  std::mt19937_64 rng(123);
  const Eigen::Index n = 40;
  const PriorSet priors = support::random_priors(n, 2, rng);
  const WeightState weights = support::random_weight_state(n, 2, 3, rng);
  const Vector u1 = support::random_vector(static_cast<int>(n), 1);
  const Vector u2 = support::random_vector(static_cast<int>(n), 2);
  const Vector p1 = osdec::prox_weighted_multi_l1(u1, priors, weights, 0.7);
  const Vector p2 = osdec::prox_weighted_multi_l1(u2, priors, weights, 0.7);
  REQUIRE(
      ((p1 - p2).cwiseAbs().array() <= (u1 - u2).cwiseAbs().array() + 1e-12)
          .all());
}

TEST_CASE("prox reduces to the two-term side-information prox") {
  // J = 1, C = 1, unit W and gamma, beta = (1/2, 1/2): the penalty becomes
  // (tau/2)(|v| + |v - z|), the classic l1-l1 shrink toward 0 and z.
  std::mt19937_64 rng(777);
  std::uniform_real_distribution<double> unif(-2.5, 2.5);
  const Eigen::Index n = 50;
  PriorSet priors;
  Vector z(n);
  for (Eigen::Index i = 0; i < n; ++i) z(i) = unif(rng);
  priors.z.push_back(z);
  const WeightState weights = WeightState::uniform(n, 1, 1);

  Vector u(n);
  for (Eigen::Index i = 0; i < n; ++i) u(i) = unif(rng);
  const double tau = 0.55;
  const Vector out = osdec::prox_weighted_multi_l1(u, priors, weights, tau);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double ref = oracle::multi_l1_argmin_grid(u(i), tau, {0.5, 0.5},
                                                    {0.0, z(i)}, 1e-4);
    REQUIRE(std::abs(out(i) - ref) <= 1e-3);
  }
}

TEST_CASE("prox merges tied breakpoints") {
  // z_1 = 0 collides with the implicit zero prior; the merged weight acts
  // like a single heavier pull toward zero.
  const Eigen::Index n = 1;
  PriorSet priors;
  priors.z.push_back(Vector::Zero(n));
  const WeightState weights = WeightState::uniform(n, 1, 1);
  Vector u(1);
  u << 2.0;
  const Vector out = osdec::prox_weighted_multi_l1(u, priors, weights, 0.5);
  REQUIRE(out(0) == Catch::Approx(1.5).margin(1e-12));  // 2 - 0.5*(0.5+0.5)
}

TEST_CASE("prox edge handling") {
  const Eigen::Index n = 4;
  PriorSet priors;
  priors.z.push_back(Vector::Ones(n));
  const WeightState weights = WeightState::uniform(n, 1, 2);
  const Vector u = support::random_vector(4, 3);

  SECTION("tau zero returns input unchanged") {
    const Vector out = osdec::prox_weighted_multi_l1(u, priors, weights, 0.0);
    REQUIRE((out - u).norm() == 0.0);
  }
  SECTION("negative tau is rejected") {
    REQUIRE_THROWS_AS(osdec::prox_weighted_multi_l1(u, priors, weights, -0.1),
                      osdec::InvalidInput);
  }
  SECTION("prior length mismatch is rejected") {
    PriorSet bad;
    bad.z.push_back(Vector::Ones(n + 1));
    REQUIRE_THROWS_AS(osdec::prox_weighted_multi_l1(u, bad, weights, 0.1),
                      osdec::InvalidInput);
  }
  SECTION("J mismatch between priors and weights is rejected") {
    const WeightState w0 = WeightState::uniform(n, 0, 2);
    REQUIRE_THROWS_AS(osdec::prox_weighted_multi_l1(u, priors, w0, 0.1),
                      osdec::InvalidInput);
  }
}

TEST_CASE("eval_g vanishes when x sits on every prior") {
  const Eigen::Index n = 6;
  PriorSet priors;
  priors.z.push_back(Vector::Zero(n));
  const WeightState weights = WeightState::uniform(n, 1, 2);
  REQUIRE(osdec::eval_g(Vector::Zero(n), priors, weights, 1.0) == 0.0);
}

TEST_CASE("eval_g reduces to the l1 norm for the zero prior alone") {
  Vector x(2);
  x << 1.0, -2.0;
  const PriorSet priors;
  const WeightState weights = WeightState::uniform(2, 0, 1);
  REQUIRE(osdec::eval_g(x, priors, weights, 1.0) ==
          Catch::Approx(3.0).margin(1e-14));
}

TEST_CASE("eval_g matches a Kahan-summed reference in reversed order") {
  std::mt19937_64 rng(404);
  const Eigen::Index n = 30;
  const int J = 3, C = 2;
  const PriorSet priors = support::random_priors(n, J, rng);
  const WeightState weights = support::random_weight_state(n, J, C, rng);
  const Vector x = support::random_vector(static_cast<int>(n), 8);
  const double lambda = 0.37;

  std::vector<double> terms;
  for (int j = J; j >= 0; --j) {
    for (Eigen::Index i = n - 1; i >= 0; --i) {
      const double zji = (j == 0) ? 0.0 : priors.z[j - 1](i);
      terms.push_back(lambda * weights.beta(j) *
                      weights.gamma_bar(j, weights.partitions[j].assignment[i]) *
                      weights.W[j](i) * std::abs(x(i) - zji));
    }
  }
  const double ref = oracle::kahan_sum(terms);
  REQUIRE(osdec::eval_g(x, priors, weights, lambda) ==
          Catch::Approx(ref).margin(1e-12));
}

TEST_CASE("weight state validation enforces the normalizations") {
  const Eigen::Index n = 12;
  WeightState w = WeightState::uniform(n, 2, 3);
  REQUIRE_NOTHROW(w.validate(n));

  SECTION("beta off by more than 1e-12") {
    w.beta(0) += 1e-6;
    REQUIRE_THROWS_AS(w.validate(n), osdec::InvalidInput);
  }
  SECTION("gamma row off") {
    w.gamma_bar(1, 0) += 1e-6;
    REQUIRE_THROWS_AS(w.validate(n), osdec::InvalidInput);
  }
  SECTION("cluster weight sum off") {
    w.W[0](0) += 1e-5;
    REQUIRE_THROWS_AS(w.validate(n), osdec::InvalidInput);
  }
  SECTION("nonpositive weight") {
    w.W[1](2) = 0.0;
    REQUIRE_THROWS_AS(w.validate(n), osdec::InvalidInput);
  }
  SECTION("random states satisfy the invariants") {
    std::mt19937_64 rng(62);
    for (int t = 0; t < 20; ++t) {
      const WeightState s = support::random_weight_state(n, 3, 4, rng);
      REQUIRE_NOTHROW(s.validate(n));
    }
  }
}
