#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "rdp/prob.hpp"
#include "test_util.hpp"

using Catch::Approx;
using namespace rdp;

TEST_CASE("pmf validation") {
  REQUIRE_NOTHROW(Pmf({0.5, 0.5}));
  REQUIRE_NOTHROW(Pmf({0.1, 0.9}));
  REQUIRE_THROWS_AS(Pmf({0.5, 0.6}), NotNormalized);
  REQUIRE_THROWS_AS(Pmf({-0.1, 1.1}), NegativeProbability);
  REQUIRE_THROWS_AS(Pmf(std::vector<double>{}), EmptyAlphabet);

  // Within tolerance the entries are renormalized to an exact unit sum.
  const Pmf nudged({0.5, 0.5 + 5e-13});
  double sum = 0.0;
  for (std::size_t i = 0; i < nudged.size(); ++i) sum += nudged[i];
  REQUIRE(sum == Approx(1.0).margin(1e-15));

  REQUIRE(Pmf::bernoulli(0.1)[0] == Approx(0.9));
  REQUIRE(Pmf::bernoulli(0.1)[1] == Approx(0.1));
}

TEST_CASE("output marginal") {
  const Pmf bern03 = Pmf::bernoulli(0.3);
  const Pmf through_identity = output_marginal(bern03, Channel::identity(2));
  REQUIRE(through_identity[0] == Approx(0.7).margin(1e-15));
  REQUIRE(through_identity[1] == Approx(0.3).margin(1e-15));

  // Input-independent channel: the marginal is the common row.
  const Pmf q({0.2, 0.3, 0.5});
  const Pmf constant_out = output_marginal(Pmf::bernoulli(0.4), Channel::constant(2, q));
  for (std::size_t i = 0; i < 3; ++i)
    REQUIRE(constant_out[i] == Approx(q[i]).margin(1e-15));

  // Hand sum for Bern(0.1) through a = 0.9, b = 0.5, cross-checked by a
  // brute-force enumeration over the joint.
  const Pmf source = Pmf::bernoulli(0.1);
  const Channel channel = Channel::binary(0.9, 0.5);
  const Pmf marginal = output_marginal(source, channel);
  REQUIRE(marginal[0] == Approx(0.86).margin(1e-12));
  double enumerated = 0.0;
  for (std::size_t x = 0; x < 2; ++x) enumerated += source[x] * channel(x, 0);
  REQUIRE(marginal[0] == Approx(enumerated).margin(1e-15));

  REQUIRE_THROWS_AS(output_marginal(Pmf({0.2, 0.3, 0.5}), Channel::identity(2)),
                    DimensionMismatch);
}

TEST_CASE("joint distribution") {
  const JointPmf diag = joint(Pmf::uniform(2), Channel::identity(2));
  REQUIRE(diag(0, 0) == Approx(0.5).margin(1e-15));
  REQUIRE(diag(0, 1) == 0.0);
  REQUIRE(diag(1, 1) == Approx(0.5).margin(1e-15));

  const JointPmf j = joint(Pmf::bernoulli(0.1), Channel::binary(0.9, 0.5));
  REQUIRE(j(0, 0) == Approx(0.81).margin(1e-12));
  REQUIRE(j(0, 1) == Approx(0.09).margin(1e-12));
  REQUIRE(j(1, 0) == Approx(0.05).margin(1e-12));
  REQUIRE(j(1, 1) == Approx(0.05).margin(1e-12));

  // Constant-output channel concentrates the joint in one column.
  const JointPmf col = joint(Pmf::bernoulli(0.3), Channel::constant(2, Pmf::point_mass(2, 1)));
  REQUIRE(col(0, 0) == 0.0);
  REQUIRE(col(0, 1) == Approx(0.7).margin(1e-15));
  REQUIRE(col(1, 1) == Approx(0.3).margin(1e-15));
}

TEST_CASE("entropies") {
  REQUIRE(entropy(Pmf::bernoulli(0.5)) == Approx(1.0).margin(1e-15));
  REQUIRE(entropy(Pmf({1.0, 0.0})) == 0.0);
  // Direct evaluation as the oracle.
  const double expected = -0.1 * std::log2(0.1) - 0.9 * std::log2(0.9);
  REQUIRE(entropy(Pmf::bernoulli(0.1)) == Approx(expected).margin(1e-15));
  REQUIRE(entropy(Pmf::bernoulli(0.1)) == Approx(0.46900).margin(5e-6));

  REQUIRE(binary_entropy(0.1) == Approx(expected).margin(1e-15));
  REQUIRE(binary_entropy(0.0) == 0.0);
  REQUIRE(binary_entropy(1.0) == 0.0);
  REQUIRE_THROWS_AS(binary_entropy(-0.2), Error);

  REQUIRE(ternary_entropy(1.0 / 3.0, 1.0 / 3.0) ==
          Approx(std::log2(3.0)).margin(1e-12));
  REQUIRE(ternary_entropy(0.0, 0.3) == Approx(binary_entropy(0.3)).margin(1e-15));
  const double t = -0.025 * std::log2(0.025) - 0.1 * std::log2(0.1) -
                   0.875 * std::log2(0.875);
  REQUIRE(ternary_entropy(0.025, 0.1) == Approx(t).margin(1e-15));
  REQUIRE(ternary_entropy(0.025, 0.1) == Approx(0.63381).margin(5e-6));
  REQUIRE_THROWS_AS(ternary_entropy(0.7, 0.5), InvalidTernary);
  REQUIRE_THROWS_AS(ternary_entropy(-0.1, 0.5), InvalidTernary);
}

TEST_CASE("mutual information") {
  REQUIRE(mutual_information(Pmf::uniform(2), Channel::identity(2)) ==
          Approx(1.0).margin(1e-15));
  REQUIRE(mutual_information(Pmf::bernoulli(0.3), Channel::constant(2, Pmf::bernoulli(0.4))) ==
          Approx(0.0).margin(1e-15));

  // Symmetric bit flip at 0.11: the standard identity I = 1 - H_b(flip),
  // cross-checked against the joint-sum evaluation.
  const Channel bsc = Channel::binary(0.89, 0.11);
  const double info = mutual_information(Pmf::uniform(2), bsc);
  REQUIRE(info == Approx(1.0 - binary_entropy(0.11)).margin(1e-12));
  REQUIRE(info == Approx(0.500084).margin(5e-6));

  REQUIRE_THROWS_AS(mutual_information(Pmf::uniform(3), Channel::identity(2)),
                    DimensionMismatch);
}

TEST_CASE("posterior") {
  const Pmf u2 = Pmf::uniform(2);
  const Channel id_post = posterior(u2, Channel::identity(2));
  REQUIRE(id_post(0, 0) == Approx(1.0).margin(1e-15));
  REQUIRE(id_post(1, 1) == Approx(1.0).margin(1e-15));

  // Independence: the posterior row is the source itself.
  const Pmf source = Pmf::bernoulli(0.3);
  const Channel const_post = posterior(source, Channel::constant(2, Pmf::bernoulli(0.4)));
  for (std::size_t y = 0; y < 2; ++y)
    for (std::size_t x = 0; x < 2; ++x)
      REQUIRE(const_post(y, x) == Approx(source[x]).margin(1e-15));

  const Channel bayes = posterior(Pmf::bernoulli(0.1), Channel::binary(0.9, 0.5));
  REQUIRE(bayes(0, 0) == Approx(0.81 / 0.86).margin(1e-12));
  REQUIRE(bayes(0, 0) == Approx(0.94186).margin(5e-6));

  // Zero-marginal outputs are reported and filled with the source pmf.
  std::vector<std::size_t> zeros;
  const Channel never_one = Channel({{1.0, 0.0}, {1.0, 0.0}});
  const Channel filled = posterior(source, never_one, &zeros);
  REQUIRE(zeros == std::vector<std::size_t>{1});
  REQUIRE(filled(1, 0) == Approx(source[0]).margin(1e-15));
  REQUIRE(filled(1, 1) == Approx(source[1]).margin(1e-15));
}

TEST_CASE("prob-core invariants on random instances") {
  std::mt19937_64 rng(20240);

  for (int i = 0; i < 100; ++i) {
    const std::size_t n_in = 2 + (i % 4);
    const std::size_t n_out = 2 + ((i / 4) % 4);
    const Pmf source = testutil::random_pmf(rng, n_in);
    const Channel channel = testutil::random_channel(rng, n_in, n_out);

    const Pmf marginal = output_marginal(source, channel);
    const double info = mutual_information(source, channel);
    REQUIRE(info >= 0.0);
    REQUIRE(entropy(marginal) >= info - 1e-12);

    const JointPmf j = joint(source, channel);
    const auto rows = j.row_sums();
    const auto cols = j.col_sums();
    for (std::size_t x = 0; x < n_in; ++x)
      REQUIRE(rows[x] == Approx(source[x]).margin(1e-12));
    for (std::size_t y = 0; y < n_out; ++y)
      REQUIRE(cols[y] == Approx(marginal[y]).margin(1e-12));

    // Bayes round-trip: joint(source, channel) transposed equals
    // joint(marginal, posterior).
    const Channel post = posterior(source, channel);
    const JointPmf back = joint(marginal, post);
    for (std::size_t x = 0; x < n_in; ++x)
      for (std::size_t y = 0; y < n_out; ++y)
        REQUIRE(back(y, x) == Approx(j(x, y)).margin(1e-10));
  }
}

TEST_CASE("mutual information is convex in the channel") {
  std::mt19937_64 rng(77);
  for (int i = 0; i < 50; ++i) {
    const std::size_t n = 2 + (i % 3);
    const Pmf source = testutil::random_pmf(rng, n);
    const Channel q1 = testutil::random_channel(rng, n, n);
    const Channel q2 = testutil::random_channel(rng, n, n);
    for (double lambda : {0.25, 0.5, 0.75}) {
      std::vector<std::vector<double>> rows(n);
      for (std::size_t x = 0; x < n; ++x) {
        rows[x].resize(n);
        for (std::size_t y = 0; y < n; ++y)
          rows[x][y] = lambda * q1(x, y) + (1.0 - lambda) * q2(x, y);
      }
      const double mixed = mutual_information(source, Channel(std::move(rows)));
      const double bound = lambda * mutual_information(source, q1) +
                           (1.0 - lambda) * mutual_information(source, q2);
      REQUIRE(mixed <= bound + 1e-10);
    }
  }
}
