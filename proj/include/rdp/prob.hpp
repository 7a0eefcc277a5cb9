#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <utility>
#include <vector>

#include "rdp/errors.hpp"

namespace rdp {

/// Normalization tolerance for pmf construction. Inputs whose sum deviates
/// from 1 by at most this much are renormalized exactly (divided by the sum);
/// anything further off is rejected.
inline constexpr double kPmfTolerance = 1e-12;

namespace detail {

// x * log2(x) with the continuity convention 0 log 0 = 0. Branches instead
// of evaluating log at 0.
inline double xlog2x(double x) { return x > 0.0 ? x * std::log2(x) : 0.0; }

}  // namespace detail

/// Probability mass function over a finite alphabet. Immutable after
/// construction; entries are nonnegative and sum to 1.
class Pmf {
 public:
  explicit Pmf(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.empty()) throw EmptyAlphabet();
    for (std::size_t i = 0; i < probs_.size(); ++i) {
      if (probs_[i] < 0.0) throw NegativeProbability(i, probs_[i]);
    }
    const double sum = std::accumulate(probs_.begin(), probs_.end(), 0.0);
    if (std::abs(sum - 1.0) > kPmfTolerance) throw NotNormalized(sum);
    for (double& v : probs_) v /= sum;
  }

  static Pmf uniform(std::size_t n) {
    if (n == 0) throw EmptyAlphabet();
    return Pmf(std::vector<double>(n, 1.0 / static_cast<double>(n)));
  }

  /// Binary pmf [1-p, p]: index 0 carries mass 1-p, index 1 carries p.
  static Pmf bernoulli(double p) { return Pmf({1.0 - p, p}); }

  static Pmf point_mass(std::size_t n, std::size_t at) {
    std::vector<double> v(n, 0.0);
    v.at(at) = 1.0;
    return Pmf(std::move(v));
  }

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  const std::vector<double>& probs() const { return probs_; }

 private:
  std::vector<double> probs_;
};

/// Conditional distribution: one pmf per input symbol. Rows are indexed by
/// the input symbol, columns by the output symbol; input and output
/// alphabets may differ in size.
class Channel {
 public:
  explicit Channel(std::vector<std::vector<double>> rows) {
    if (rows.empty()) throw EmptyAlphabet();
    rows_.reserve(rows.size());
    for (auto& r : rows) rows_.emplace_back(std::move(r));
    const std::size_t m = rows_.front().size();
    for (const Pmf& r : rows_) {
      if (r.size() != m)
        throw DimensionMismatch("channel rows have unequal lengths");
    }
  }

  static Channel identity(std::size_t n) {
    std::vector<std::vector<double>> rows(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) rows[i][i] = 1.0;
    return Channel(std::move(rows));
  }

  /// Input-independent channel: every row equals `out`.
  static Channel constant(std::size_t n_in, const Pmf& out) {
    std::vector<std::vector<double>> rows(n_in, out.probs());
    return Channel(std::move(rows));
  }

  /// Binary channel parameterized by a = P(out=0 | in=0), b = P(out=0 | in=1).
  static Channel binary(double a, double b) {
    return Channel({{a, 1.0 - a}, {b, 1.0 - b}});
  }

  std::size_t input_size() const { return rows_.size(); }
  std::size_t output_size() const { return rows_.front().size(); }
  const Pmf& row(std::size_t x) const { return rows_[x]; }
  double operator()(std::size_t x, std::size_t y) const { return rows_[x][y]; }

 private:
  std::vector<Pmf> rows_;
};

/// Joint distribution over (input, output) pairs.
class JointPmf {
 public:
  explicit JointPmf(std::vector<std::vector<double>> probs)
      : probs_(std::move(probs)) {
    if (probs_.empty() || probs_.front().empty()) throw EmptyAlphabet();
    const std::size_t m = probs_.front().size();
    double sum = 0.0;
    for (std::size_t x = 0; x < probs_.size(); ++x) {
      if (probs_[x].size() != m)
        throw DimensionMismatch("joint rows have unequal lengths");
      for (std::size_t y = 0; y < m; ++y) {
        if (probs_[x][y] < 0.0) throw NegativeProbability(x * m + y, probs_[x][y]);
        sum += probs_[x][y];
      }
    }
    if (std::abs(sum - 1.0) > kPmfTolerance) throw NotNormalized(sum);
  }

  std::size_t input_size() const { return probs_.size(); }
  std::size_t output_size() const { return probs_.front().size(); }
  double operator()(std::size_t x, std::size_t y) const { return probs_[x][y]; }

  std::vector<double> row_sums() const {
    std::vector<double> s(input_size(), 0.0);
    for (std::size_t x = 0; x < input_size(); ++x)
      s[x] = std::accumulate(probs_[x].begin(), probs_[x].end(), 0.0);
    return s;
  }

  std::vector<double> col_sums() const {
    std::vector<double> s(output_size(), 0.0);
    for (std::size_t x = 0; x < input_size(); ++x)
      for (std::size_t y = 0; y < output_size(); ++y) s[y] += probs_[x][y];
    return s;
  }

 private:
  std::vector<std::vector<double>> probs_;
};

inline void require_same_input(const Pmf& source, const Channel& channel) {
  if (source.size() != channel.input_size())
    throw DimensionMismatch("source alphabet size " +
                            std::to_string(source.size()) +
                            " != channel input size " +
                            std::to_string(channel.input_size()));
}

/// Distribution of the channel output: m(y) = sum_x p(x) Q(y|x).
inline Pmf output_marginal(const Pmf& source, const Channel& channel) {
  require_same_input(source, channel);
  std::vector<double> m(channel.output_size(), 0.0);
  for (std::size_t x = 0; x < source.size(); ++x)
    for (std::size_t y = 0; y < m.size(); ++y)
      m[y] += source[x] * channel(x, y);
  return Pmf(std::move(m));
}

/// Joint distribution p(x, y) = p(x) Q(y|x).
inline JointPmf joint(const Pmf& source, const Channel& channel) {
  require_same_input(source, channel);
  std::vector<std::vector<double>> probs(
      source.size(), std::vector<double>(channel.output_size(), 0.0));
  for (std::size_t x = 0; x < source.size(); ++x)
    for (std::size_t y = 0; y < channel.output_size(); ++y)
      probs[x][y] = source[x] * channel(x, y);
  return JointPmf(std::move(probs));
}

/// Bayes posterior p(x | y), one row per output symbol of `channel`.
///
/// Output symbols with zero marginal probability have no defined posterior;
/// those rows are filled with the source pmf and their indices are appended
/// to `zero_marginal_outputs` when non-null.
inline Channel posterior(const Pmf& source, const Channel& channel,
                         std::vector<std::size_t>* zero_marginal_outputs = nullptr) {
  require_same_input(source, channel);
  const Pmf m = output_marginal(source, channel);
  std::vector<std::vector<double>> rows(m.size());
  for (std::size_t y = 0; y < m.size(); ++y) {
    if (m[y] > 0.0) {
      rows[y].resize(source.size());
      for (std::size_t x = 0; x < source.size(); ++x)
        rows[y][x] = source[x] * channel(x, y) / m[y];
    } else {
      if (zero_marginal_outputs) zero_marginal_outputs->push_back(y);
      rows[y] = source.probs();
    }
  }
  return Channel(std::move(rows));
}

/// Shannon entropy in bits; in [0, log2(alphabet size)].
inline double entropy(const Pmf& p) {
  double h = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) h -= detail::xlog2x(p[i]);
  return std::max(0.0, h);
}

/// Entropy of a Bernoulli(alpha) variable in bits.
inline double binary_entropy(double alpha) {
  if (alpha < 0.0 || alpha > 1.0) throw NegativeProbability(0, alpha);
  return -detail::xlog2x(alpha) - detail::xlog2x(1.0 - alpha);
}

/// Entropy of a three-outcome variable with probabilities
/// (alpha, beta, 1 - alpha - beta), in bits.
inline double ternary_entropy(double alpha, double beta) {
  if (alpha < 0.0 || beta < 0.0 || alpha + beta > 1.0)
    throw InvalidTernary(alpha, beta);
  return -detail::xlog2x(alpha) - detail::xlog2x(beta) -
         detail::xlog2x(1.0 - alpha - beta);
}

/// Mutual information I(X; Y) in bits between `source` and the output of
/// `channel` fed with it. Zero iff the channel rows are identical on the
/// support of the source.
inline double mutual_information(const Pmf& source, const Channel& channel) {
  require_same_input(source, channel);
  const Pmf m = output_marginal(source, channel);
  double info = 0.0;
  for (std::size_t x = 0; x < source.size(); ++x) {
    if (source[x] == 0.0) continue;
    for (std::size_t y = 0; y < channel.output_size(); ++y) {
      const double q = channel(x, y);
      if (q > 0.0) info += source[x] * q * std::log2(q / m[y]);
    }
  }
  // Rounding can leave a tiny negative residue when the channel rows are
  // (nearly) identical; mutual information is nonnegative.
  return std::max(0.0, info);
}

}  // namespace rdp
