#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "rdp/errors.hpp"
#include "rdp/prob.hpp"

namespace rdp {

/// Full-reference distortion as an explicit matrix: values[x][y] is the
/// distortion of reconstructing source symbol x as output symbol y.
///
/// All entries must be nonnegative. A square matrix is interpreted as having
/// coinciding source and reconstruction alphabets and must then have a zero
/// diagonal and strictly positive off-diagonal entries.
class DistortionMatrix {
 public:
  explicit DistortionMatrix(std::vector<std::vector<double>> values,
                            std::optional<std::vector<double>> source_values = std::nullopt,
                            std::optional<std::vector<double>> recon_values = std::nullopt)
      : values_(std::move(values)),
        source_values_(std::move(source_values)),
        recon_values_(std::move(recon_values)) {
    if (values_.empty() || values_.front().empty()) throw EmptyAlphabet();
    const std::size_t m = values_.front().size();
    for (const auto& row : values_) {
      if (row.size() != m)
        throw DimensionMismatch("distortion rows have unequal lengths");
      for (double v : row)
        if (v < 0.0) throw Error("distortion entries must be nonnegative");
    }
    if (values_.size() == m) {
      for (std::size_t x = 0; x < m; ++x) {
        for (std::size_t y = 0; y < m; ++y) {
          if (x == y && values_[x][y] != 0.0)
            throw Error("square distortion matrix must have a zero diagonal");
          if (x != y && values_[x][y] <= 0.0)
            throw Error("square distortion matrix must be positive off the diagonal");
        }
      }
    }
  }

  std::size_t source_size() const { return values_.size(); }
  std::size_t recon_size() const { return values_.front().size(); }
  double operator()(std::size_t x, std::size_t y) const { return values_[x][y]; }

  double max_value() const {
    double m = 0.0;
    for (const auto& row : values_)
      for (double v : row) m = std::max(m, v);
    return m;
  }

  const std::optional<std::vector<double>>& source_values() const { return source_values_; }
  const std::optional<std::vector<double>>& recon_values() const { return recon_values_; }

 private:
  std::vector<std::vector<double>> values_;
  std::optional<std::vector<double>> source_values_;
  std::optional<std::vector<double>> recon_values_;
};

/// Hamming distance on an n-symbol alphabet: 0 on the diagonal, 1 elsewhere.
inline DistortionMatrix hamming_matrix(std::size_t n) {
  if (n == 0) throw EmptyAlphabet();
  std::vector<std::vector<double>> values(n, std::vector<double>(n, 1.0));
  for (std::size_t i = 0; i < n; ++i) values[i][i] = 0.0;
  return DistortionMatrix(std::move(values));
}

/// Squared error between real embeddings of the two alphabets:
/// values[i][j] = (source_values[i] - recon_values[j])^2.
inline DistortionMatrix squared_error_matrix(std::vector<double> source_values,
                                             std::vector<double> recon_values) {
  if (source_values.empty() || recon_values.empty()) throw EmptyAlphabet();
  std::vector<std::vector<double>> values(
      source_values.size(), std::vector<double>(recon_values.size(), 0.0));
  for (std::size_t i = 0; i < source_values.size(); ++i)
    for (std::size_t j = 0; j < recon_values.size(); ++j) {
      const double d = source_values[i] - recon_values[j];
      values[i][j] = d * d;
    }
  return DistortionMatrix(std::move(values), std::move(source_values),
                          std::move(recon_values));
}

inline void require_compatible(const Pmf& source, const Channel& channel,
                               const DistortionMatrix& delta) {
  require_same_input(source, channel);
  if (delta.source_size() != source.size() ||
      delta.recon_size() != channel.output_size())
    throw DimensionMismatch("distortion matrix does not match alphabets");
}

/// Expected distortion E[Delta(X, Y)] under p(x) Q(y|x).
inline double expected_distortion(const Pmf& source, const Channel& channel,
                                  const DistortionMatrix& delta) {
  require_compatible(source, channel, delta);
  double e = 0.0;
  for (std::size_t x = 0; x < source.size(); ++x)
    for (std::size_t y = 0; y < channel.output_size(); ++y)
      e += source[x] * channel(x, y) * delta(x, y);
  return e;
}

/// Divergences between pmfs usable as the perception index. Both shipped
/// kinds are nonnegative, zero iff the arguments are equal, and convex in
/// the second argument; the enumeration is the extension point.
enum class DivergenceKind { TotalVariation, KullbackLeibler };

/// Total variation distance, half the L1 distance; in [0, 1].
inline double total_variation(const Pmf& p, const Pmf& q) {
  if (p.size() != q.size())
    throw DimensionMismatch("total variation needs equal alphabet sizes");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

/// Kullback-Leibler divergence KL(p || q) in bits, +infinity when p has mass
/// where q has none (so constraint checks d <= P evaluate to false naturally).
inline double kl_divergence(const Pmf& p, const Pmf& q) {
  if (p.size() != q.size())
    throw DimensionMismatch("KL divergence needs equal alphabet sizes");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) return std::numeric_limits<double>::infinity();
    s += p[i] * std::log2(p[i] / q[i]);
  }
  return std::max(0.0, s);
}

inline double divergence(DivergenceKind kind, const Pmf& p, const Pmf& q) {
  switch (kind) {
    case DivergenceKind::TotalVariation: return total_variation(p, q);
    case DivergenceKind::KullbackLeibler: return kl_divergence(p, q);
  }
  throw Error("unknown divergence kind");
}

/// Upper bound on the perception index: either a finite value or
/// unconstrained. Kept as a distinguished state rather than a large float.
class PerceptionBound {
 public:
  static PerceptionBound unconstrained() { return PerceptionBound(); }

  static PerceptionBound at(double value) {
    if (value < 0.0) throw Error("perception bound must be nonnegative");
    PerceptionBound b;
    b.finite_ = true;
    b.value_ = value;
    return b;
  }

  bool finite() const { return finite_; }

  double value() const {
    if (!finite_) throw Error("perception bound is unconstrained");
    return value_;
  }

  /// Sort key: finite bounds in increasing order, unconstrained last.
  friend bool operator<(const PerceptionBound& lhs, const PerceptionBound& rhs) {
    if (lhs.finite_ && rhs.finite_) return lhs.value_ < rhs.value_;
    return lhs.finite_ && !rhs.finite_;
  }

  friend bool operator==(const PerceptionBound& lhs, const PerceptionBound& rhs) {
    return lhs.finite_ == rhs.finite_ && (!lhs.finite_ || lhs.value_ == rhs.value_);
  }

 private:
  PerceptionBound() = default;
  bool finite_ = false;
  double value_ = 0.0;
};

/// Mean distortion of reconstructing as z, k(z) = E_{X~p}[Delta(X, z)], for
/// every reconstruction symbol z, plus whether that profile attains its
/// minimum at every symbol in the support of the source (in which case the
/// perception-gap assumption is violated).
struct A2Profile {
  std::vector<double> k;
  bool violated = false;
};

inline A2Profile a2_profile(const Pmf& source, const DistortionMatrix& delta) {
  if (delta.source_size() != source.size())
    throw DimensionMismatch("distortion matrix does not match the source");
  A2Profile profile;
  profile.k.assign(delta.recon_size(), 0.0);
  for (std::size_t z = 0; z < delta.recon_size(); ++z)
    for (std::size_t x = 0; x < source.size(); ++x)
      profile.k[z] += source[x] * delta(x, z);
  const double k_min = *std::min_element(profile.k.begin(), profile.k.end());
  // Violated iff k attains its minimum at every symbol the source can emit.
  // Only meaningful when the alphabets coincide; a rectangular matrix has no
  // notion of "support of the source" among reconstruction symbols.
  profile.violated = true;
  if (delta.recon_size() == source.size()) {
    for (std::size_t z = 0; z < source.size(); ++z)
      if (source[z] > 0.0 && profile.k[z] > k_min) profile.violated = false;
  } else {
    profile.violated = false;
  }
  return profile;
}

}  // namespace rdp
