#include <catch2/catch_amalgamated.hpp>

#include "test_util.hpp"

using namespace aggflow;
using Catch::Approx;

TEST_CASE("1D distance basics") {
  CHECK(wasserstein_1d(dirac(Vec{-2.0}), dirac(Vec{1.5})).first == Approx(3.5));
  const ParticleMeasure mu = ParticleMeasure::create({Vec{0.0}, Vec{1.0}}, {0.5, 0.5});
  CHECK(wasserstein_1d(mu, mu).first == Approx(0.0).margin(0.0));
  const ParticleMeasure split = ParticleMeasure::create({Vec{0.0}, Vec{2.0}}, {0.5, 0.5});
  const auto [d, gamma] = wasserstein_1d(split, dirac(Vec{1.0}));
  CHECK(d == Approx(1.0));
  CHECK(d == Approx(testutil::lp_two_column_oracle(dirac(Vec{1.0}), split)).margin(1e-12));
  CHECK_NOTHROW(gamma.validate());
  CHECK_THROWS_AS(wasserstein_1d(dirac(Vec{0.0, 0.0}), dirac(Vec{1.0, 1.0})),
                  std::invalid_argument);
}

TEST_CASE("1D distance equals the two-column LP oracle") {
  Rng rng(101);
  for (int trial = 0; trial < 120; ++trial) {
    const int m = rng.uniform_int(2, 3);
    const ParticleMeasure mu = testutil::random_measure(rng, m, 1, -3.0, 3.0);
    const ParticleMeasure nu = testutil::random_measure(rng, 2, 1, -3.0, 3.0);
    const double d = wasserstein_1d(mu, nu).first;
    CHECK(d == Approx(testutil::lp_two_column_oracle(mu, nu)).margin(1e-10));
  }
}

TEST_CASE("assignment distance basics") {
  Rng rng(103);
  const ParticleMeasure mu = testutil::random_measure(rng, 4, 2, -1.0, 1.0, true);
  CHECK(wasserstein_assignment(mu, mu).first == Approx(0.0).margin(1e-12));
  CHECK(wasserstein_assignment(dirac(Vec{0.0, 0.0}), dirac(Vec{3.0, 4.0})).first == Approx(5.0));

  const ParticleMeasure nu = testutil::random_measure(rng, 3, 2, -1.0, 1.0, true);
  const ParticleMeasure nu2 = testutil::random_measure(rng, 3, 2, -1.0, 1.0, true);
  CHECK(wasserstein_assignment(nu, nu2).first ==
        Approx(testutil::permutation_oracle(nu, nu2)).margin(1e-12));

  CHECK_THROWS_AS(wasserstein_assignment(mu, nu), std::invalid_argument);
  const ParticleMeasure skew = ParticleMeasure::create({Vec{0.0, 0.0}, Vec{1.0, 0.0}}, {0.3, 0.7});
  CHECK_THROWS_AS(wasserstein_assignment(skew, skew), std::invalid_argument);
}

TEST_CASE("assignment equals exhaustive permutation minimum") {
  Rng rng(107);
  for (int n = 2; n <= 6; ++n) {
    for (int trial = 0; trial < 20; ++trial) {
      const int d = rng.uniform_int(1, 3);
      const ParticleMeasure mu = testutil::random_measure(rng, n, d, -2.0, 2.0, true);
      const ParticleMeasure nu = testutil::random_measure(rng, n, d, -2.0, 2.0, true);
      CHECK(wasserstein_assignment(mu, nu).first ==
            Approx(testutil::permutation_oracle(mu, nu)).margin(1e-12));
    }
  }
}

TEST_CASE("quantile coupling matches assignment on uniform 1D instances") {
  Rng rng(109);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = rng.uniform_int(1, 8);
    const ParticleMeasure mu = testutil::random_measure(rng, n, 1, -2.0, 2.0, true);
    const ParticleMeasure nu = testutil::random_measure(rng, n, 1, -2.0, 2.0, true);
    CHECK(wasserstein_1d(mu, nu).first ==
          Approx(wasserstein_assignment(mu, nu).first).margin(1e-10));
  }
}

TEST_CASE("triangle inequality in 1D") {
  Rng rng(113);
  for (int trial = 0; trial < 100; ++trial) {
    const ParticleMeasure a = testutil::random_measure(rng, rng.uniform_int(1, 5), 1);
    const ParticleMeasure b = testutil::random_measure(rng, rng.uniform_int(1, 5), 1);
    const ParticleMeasure c = testutil::random_measure(rng, rng.uniform_int(1, 5), 1);
    const double ab = wasserstein_1d(a, b).first;
    const double bc = wasserstein_1d(b, c).first;
    const double ac = wasserstein_1d(a, c).first;
    CHECK(ab + bc - ac >= -1e-10);
  }
}

TEST_CASE("returned 1D coupling is optimal against perturbed couplings") {
  Rng rng(127);
  for (int trial = 0; trial < 50; ++trial) {
    const ParticleMeasure mu = testutil::random_measure(rng, 4, 1);
    const ParticleMeasure nu = testutil::random_measure(rng, 3, 1);
    const auto [d, best] = wasserstein_1d(mu, nu);
    const Coupling other = testutil::random_coupling(rng, mu, nu);
    CHECK(transport_cost(other) >= d - 1e-12);
    CHECK(transport_cost(best) == Approx(d).margin(1e-13));
  }
}
