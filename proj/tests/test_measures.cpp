#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <random>

#include "rdp/measures.hpp"
#include "rdp/prob.hpp"
#include "test_util.hpp"

using Catch::Approx;
using namespace rdp;

TEST_CASE("hamming matrix") {
  const DistortionMatrix h2 = hamming_matrix(2);
  REQUIRE(h2(0, 0) == 0.0);
  REQUIRE(h2(0, 1) == 1.0);
  REQUIRE(h2(1, 0) == 1.0);
  REQUIRE(h2(1, 1) == 0.0);

  const DistortionMatrix h1 = hamming_matrix(1);
  REQUIRE(h1(0, 0) == 0.0);

  const DistortionMatrix h3 = hamming_matrix(3);
  double off_diagonal = 0.0;
  for (std::size_t x = 0; x < 3; ++x)
    for (std::size_t y = 0; y < 3; ++y)
      if (x != y) off_diagonal += h3(x, y);
  REQUIRE(off_diagonal == 6.0);
}

TEST_CASE("squared error matrix") {
  const DistortionMatrix binary = squared_error_matrix({0.0, 1.0}, {0.0, 1.0});
  REQUIRE(binary(0, 0) == 0.0);
  REQUIRE(binary(0, 1) == 1.0);
  REQUIRE(binary(1, 0) == 1.0);
  REQUIRE(binary(1, 1) == 0.0);

  const DistortionMatrix to_zero = squared_error_matrix({-1.0, 1.0}, {0.0});
  REQUIRE(to_zero(0, 0) == 1.0);
  REQUIRE(to_zero(1, 0) == 1.0);

  const DistortionMatrix skip = squared_error_matrix({0.0, 1.0, 2.0}, {0.0, 2.0});
  REQUIRE(skip(0, 0) == 0.0);
  REQUIRE(skip(0, 1) == 4.0);
  REQUIRE(skip(1, 0) == 1.0);
  REQUIRE(skip(1, 1) == 1.0);
  REQUIRE(skip(2, 0) == 4.0);
  REQUIRE(skip(2, 1) == 0.0);
}

TEST_CASE("square distortion matrices must separate symbols") {
  REQUIRE_THROWS_AS(DistortionMatrix({{0.0, 1.0}, {1.0, 0.5}}), Error);
  REQUIRE_THROWS_AS(DistortionMatrix({{0.0, 0.0}, {1.0, 0.0}}), Error);
  REQUIRE_THROWS_AS(DistortionMatrix({{0.0, -1.0}, {1.0, 0.0}}), Error);
  // Coinciding embedding values collapse a squared-error matrix onto a
  // degenerate square one.
  REQUIRE_THROWS_AS(squared_error_matrix({1.0, 1.0}, {1.0, 1.0}), Error);
}

TEST_CASE("expected distortion") {
  REQUIRE(expected_distortion(Pmf::bernoulli(0.3), Channel::identity(2),
                              hamming_matrix(2)) == 0.0);

  // The binary Hamming specialization (1-a)(1-p) + b p, confirmed against
  // the full joint sum.
  const Pmf source = Pmf::bernoulli(0.1);
  const Channel channel = Channel::binary(0.9, 0.5);
  const double direct = (1.0 - 0.9) * 0.9 + 0.5 * 0.1;
  const double value = expected_distortion(source, channel, hamming_matrix(2));
  REQUIRE(value == Approx(direct).margin(1e-15));
  REQUIRE(value == Approx(0.14).margin(1e-12));
  double joint_sum = 0.0;
  for (std::size_t x = 0; x < 2; ++x)
    for (std::size_t y = 0; y < 2; ++y)
      joint_sum += source[x] * channel(x, y) * (x == y ? 0.0 : 1.0);
  REQUIRE(value == Approx(joint_sum).margin(1e-15));

  // X uniform on {-1, +1}, constant output 0, squared error: E[X^2] = 1.
  const DistortionMatrix sq = squared_error_matrix({-1.0, 1.0}, {0.0});
  REQUIRE(expected_distortion(Pmf::uniform(2), Channel({{1.0}, {1.0}}), sq) ==
          Approx(1.0).margin(1e-15));

  REQUIRE_THROWS_AS(expected_distortion(Pmf::uniform(3), Channel::identity(2),
                                        hamming_matrix(2)),
                    DimensionMismatch);
}

TEST_CASE("divergences") {
  const Pmf p = Pmf::bernoulli(0.1);
  REQUIRE(divergence(DivergenceKind::TotalVariation, p, p) == 0.0);
  REQUIRE(divergence(DivergenceKind::TotalVariation, Pmf::bernoulli(0.1),
                     Pmf::bernoulli(0.3)) == Approx(0.2).margin(1e-12));

  // TV between the source and its image through (a, b) is |(1-a)q - bp|.
  const Channel channel = Channel::binary(0.9, 0.5);
  const double tv = divergence(DivergenceKind::TotalVariation, p,
                               output_marginal(p, channel));
  REQUIRE(tv == Approx(std::abs(0.1 * 0.9 - 0.5 * 0.1)).margin(1e-12));
  REQUIRE(tv == Approx(0.04).margin(1e-12));

  REQUIRE(divergence(DivergenceKind::KullbackLeibler, p, p) == 0.0);
  const double kl = divergence(DivergenceKind::KullbackLeibler,
                               Pmf::bernoulli(0.2), Pmf::bernoulli(0.4));
  const double direct = 0.8 * std::log2(0.8 / 0.6) + 0.2 * std::log2(0.2 / 0.4);
  REQUIRE(kl == Approx(direct).margin(1e-12));

  // Mass where the second argument has none: a distinguished infinity, so
  // d <= P checks evaluate to false naturally.
  const double inf_kl = divergence(DivergenceKind::KullbackLeibler,
                                   Pmf::bernoulli(0.2), Pmf({1.0, 0.0}));
  REQUIRE(std::isinf(inf_kl));
  REQUIRE_FALSE(inf_kl <= 1e6);

  REQUIRE_THROWS_AS(divergence(DivergenceKind::TotalVariation, Pmf::uniform(2),
                               Pmf::uniform(3)),
                    DimensionMismatch);
}

TEST_CASE("divergence properties on random pmfs") {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 2 + (i % 5);
    const Pmf a = testutil::random_pmf(rng, n);
    const Pmf b = testutil::random_pmf(rng, n);
    const Pmf c = testutil::random_pmf(rng, n);

    // Symmetry and the triangle inequality for total variation.
    REQUIRE(total_variation(a, b) == Approx(total_variation(b, a)).margin(1e-12));
    REQUIRE(total_variation(a, c) <=
            total_variation(a, b) + total_variation(b, c) + 1e-12);

    // Identity of indiscernibles for both divergences.
    REQUIRE(total_variation(a, a) <= 1e-12);
    REQUIRE(kl_divergence(a, a) <= 1e-12);
    if (total_variation(a, b) > 1e-9) {
      REQUIRE(total_variation(a, b) > 0.0);
      REQUIRE(kl_divergence(a, b) > 0.0);
    }

    // Convexity in the second argument for both shipped divergences.
    for (double lambda : {0.25, 0.5, 0.75}) {
      std::vector<double> mixed(n);
      for (std::size_t k = 0; k < n; ++k)
        mixed[k] = lambda * b[k] + (1.0 - lambda) * c[k];
      const Pmf mix(std::move(mixed));
      for (DivergenceKind kind :
           {DivergenceKind::TotalVariation, DivergenceKind::KullbackLeibler}) {
        REQUIRE(divergence(kind, a, mix) <=
                lambda * divergence(kind, a, b) +
                    (1.0 - lambda) * divergence(kind, a, c) + 1e-10);
      }
    }
  }
}

TEST_CASE("expected distortion is linear in the channel") {
  std::mt19937_64 rng(123);
  for (int i = 0; i < 50; ++i) {
    const std::size_t n = 2 + (i % 3);
    const Pmf source = testutil::random_pmf(rng, n);
    const Channel q1 = testutil::random_channel(rng, n, n);
    const Channel q2 = testutil::random_channel(rng, n, n);
    const DistortionMatrix delta = hamming_matrix(n);
    for (double lambda : {0.25, 0.5, 0.75}) {
      std::vector<std::vector<double>> rows(n);
      for (std::size_t x = 0; x < n; ++x) {
        rows[x].resize(n);
        for (std::size_t y = 0; y < n; ++y)
          rows[x][y] = lambda * q1(x, y) + (1.0 - lambda) * q2(x, y);
      }
      const double mixed = expected_distortion(source, Channel(std::move(rows)), delta);
      const double combo = lambda * expected_distortion(source, q1, delta) +
                           (1.0 - lambda) * expected_distortion(source, q2, delta);
      REQUIRE(mixed == Approx(combo).margin(1e-12));
    }
  }
}

TEST_CASE("mean-distortion profile and the gap assumption") {
  const A2Profile skewed = a2_profile(Pmf::bernoulli(0.1), hamming_matrix(2));
  REQUIRE(skewed.k[0] == Approx(0.1).margin(1e-15));
  REQUIRE(skewed.k[1] == Approx(0.9).margin(1e-15));
  REQUIRE_FALSE(skewed.violated);

  const A2Profile uniform = a2_profile(Pmf::uniform(2), hamming_matrix(2));
  REQUIRE(uniform.k[0] == Approx(0.5).margin(1e-15));
  REQUIRE(uniform.k[1] == Approx(0.5).margin(1e-15));
  REQUIRE(uniform.violated);

  const A2Profile single = a2_profile(Pmf({1.0}), hamming_matrix(1));
  REQUIRE(single.k[0] == 0.0);
  REQUIRE(single.violated);
}

TEST_CASE("perception bound ordering") {
  REQUIRE(PerceptionBound::at(0.1) < PerceptionBound::at(0.2));
  REQUIRE(PerceptionBound::at(5.0) < PerceptionBound::unconstrained());
  REQUIRE_FALSE(PerceptionBound::unconstrained() < PerceptionBound::at(5.0));
  REQUIRE_FALSE(PerceptionBound::unconstrained() < PerceptionBound::unconstrained());
  REQUIRE_THROWS_AS(PerceptionBound::at(-0.5), Error);
}
