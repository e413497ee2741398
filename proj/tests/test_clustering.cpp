#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <vector>

#include "osdec/clustering.hpp"

using osdec::Vector;

TEST_CASE("kmeans_1d separates two well-separated groups") {
  Vector v(6);
  v << 0, 0, 0, 10, 10, 10;
  const auto p = osdec::kmeans_1d(v, 2, 0);
  p.validate();
  REQUIRE(p.assignment[0] == p.assignment[1]);
  REQUIRE(p.assignment[1] == p.assignment[2]);
  REQUIRE(p.assignment[3] == p.assignment[4]);
  REQUIRE(p.assignment[4] == p.assignment[5]);
  REQUIRE(p.assignment[0] != p.assignment[3]);
  REQUIRE(p.sizes[0] == 3);
  REQUIRE(p.sizes[1] == 3);
}

TEST_CASE("kmeans_1d with one cluster takes everything") {
  Vector v(5);
  v << 3, 1, 4, 1, 5;
  const auto p = osdec::kmeans_1d(v, 1, 7);
  p.validate();
  REQUIRE(p.sizes[0] == 5);
  for (int a : p.assignment) REQUIRE(a == 0);
}

TEST_CASE("kmeans_1d recovers a midpoint split of two Gaussians") {
  std::mt19937_64 rng(314);
  std::normal_distribution<double> low(0.0, 1.0), high(100.0, 1.0);
  Vector v(50);
  std::vector<bool> is_high(50);
  for (int i = 0; i < 50; ++i) {
    is_high[i] = (i % 2 == 0);
    v(i) = is_high[i] ? high(rng) : low(rng);
  }
  const auto p = osdec::kmeans_1d(v, 2, 0);
  p.validate();
  // The oracle labels by thresholding at the midpoint of the two means.
  const int high_cluster = p.assignment[0];  // index 0 drew from the high mode
  for (int i = 0; i < 50; ++i) {
    REQUIRE((v(i) > 50.0) == (p.assignment[i] == high_cluster));
  }
}

TEST_CASE("kmeans_1d is deterministic") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector v(40);
  for (int i = 0; i < 40; ++i) v(i) = gauss(rng);
  const auto a = osdec::kmeans_1d(v, 4, 1);
  const auto b = osdec::kmeans_1d(v, 4, 999);
  REQUIRE(a.assignment == b.assignment);
}

TEST_CASE("kmeans_1d rejects more clusters than values") {
  Vector v(3);
  v << 1, 2, 3;
  REQUIRE_THROWS_AS(osdec::kmeans_1d(v, 4, 0), osdec::InvalidInput);
  REQUIRE_THROWS_AS(osdec::kmeans_1d(v, 0, 0), osdec::InvalidInput);
}

TEST_CASE("kmeans_1d handles heavy ties without empty clusters") {
  // Mostly zeros with a few spikes, the shape the solver feeds it.
  Vector v = Vector::Zero(128);
  v(3) = 4.0;
  v(40) = 3.9;
  v(77) = 0.5;
  v(100) = 7.0;
  const auto p = osdec::kmeans_1d(v, 7, 0);
  p.validate();
  for (int c = 0; c < 7; ++c) REQUIRE(p.sizes[c] >= 1);
}

TEST_CASE("kmeans_1d objective is nonincreasing across iterations") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> gauss(0.0, 5.0);
  for (int trial = 0; trial < 5; ++trial) {
    Vector v(60);
    for (int i = 0; i < 60; ++i) v(i) = gauss(rng);
    std::vector<double> trace;
    osdec::kmeans_1d(v, 3, 0, &trace);
    REQUIRE(!trace.empty());
    for (std::size_t k = 1; k < trace.size(); ++k) {
      REQUIRE(trace[k] <= trace[k - 1] + 1e-9);
    }
  }
}

TEST_CASE("uniform_partition covers every index exactly once") {
  const auto p = osdec::uniform_partition(10, 3);
  p.validate();
  int total = 0;
  for (int s : p.sizes) total += s;
  REQUIRE(total == 10);
  REQUIRE_THROWS_AS(osdec::uniform_partition(2, 3), osdec::InvalidInput);
}
