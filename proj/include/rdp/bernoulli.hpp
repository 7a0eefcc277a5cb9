#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "rdp/errors.hpp"
#include "rdp/measures.hpp"
#include "rdp/prob.hpp"

namespace rdp {

/// Binary source X ~ Bern(p) under Hamming distortion and total-variation
/// perception. Parameters p in (0.5, 1) are reflected to 1-p with the two
/// symbols relabeled; the closed form below assumes p <= 1/2.
class BernoulliSpec {
 public:
  explicit BernoulliSpec(double p) {
    if (!(p > 0.0) || !(p < 1.0))
      throw Error("Bernoulli parameter must lie strictly inside (0, 1)");
    reflected_ = p > 0.5;
    p_ = reflected_ ? 1.0 - p : p;
  }

  double p() const { return p_; }
  double q() const { return 1.0 - p_; }
  bool reflected() const { return reflected_; }

  /// Source pmf on the canonical (possibly relabeled) alphabet: [q, p].
  Pmf source() const { return Pmf::bernoulli(p_); }

 private:
  double p_ = 0.0;
  bool reflected_ = false;
};

enum class BernoulliRegion { S1, S2, S3, ShannonOnly };

inline std::string to_string(BernoulliRegion r) {
  switch (r) {
    case BernoulliRegion::S1: return "S1";
    case BernoulliRegion::S2: return "S2";
    case BernoulliRegion::S3: return "S3";
    case BernoulliRegion::ShannonOnly: return "Shannon";
  }
  return "?";
}

/// Distortion thresholds separating the three regions of the closed form:
/// the perception constraint activates at d1 and the rate reaches zero at d2.
struct RegionBounds {
  double d1 = 0.0;
  double d2 = 0.0;
};

/// Region thresholds for a finite perception bound:
///   d1 = P / (1 - 2(p - P)),   d2 = 2pq - (q - p) P.
/// Returns nullopt when P > p, where the perception constraint is never
/// active and callers should fall back to the Shannon curve. d1 = d2 exactly
/// when P = p.
inline std::optional<RegionBounds> region_bounds(const BernoulliSpec& spec,
                                                 double perception) {
  if (perception < 0.0) throw Error("perception bound must be nonnegative");
  const double p = spec.p();
  if (perception > p) return std::nullopt;
  RegionBounds b;
  const double denom = 1.0 - 2.0 * (p - perception);
  // denom is zero only at p = 1/2, P = 0, where the symmetric source makes
  // the perception constraint vacuous; both thresholds collapse onto 2pq.
  b.d1 = denom > 0.0 ? perception / denom : 2.0 * p * spec.q();
  b.d2 = 2.0 * p * spec.q() - (spec.q() - p) * perception;
  return b;
}

/// Classic rate-distortion function of a Bernoulli(p) source under Hamming
/// distortion: H_b(p) - H_b(D) for D in [0, p), zero beyond.
inline double shannon_rate(const BernoulliSpec& spec, double distortion) {
  if (distortion < 0.0) throw Error("distortion must be nonnegative");
  if (distortion >= spec.p()) return 0.0;
  return binary_entropy(spec.p()) - binary_entropy(distortion);
}

/// Closed-form solution point: the rate, the region it falls in, the optimal
/// channel parameters a = P(out=0 | in=0) and b = P(out=0 | in=1) on the
/// canonical alphabet, and the region thresholds (NaN when the perception
/// bound is inactive and the solution is the Shannon one for every D).
struct BernoulliSolution {
  double rate = 0.0;
  BernoulliRegion region = BernoulliRegion::ShannonOnly;
  double a = 1.0;
  double b = 1.0;
  double d1 = std::numeric_limits<double>::quiet_NaN();
  double d2 = std::numeric_limits<double>::quiet_NaN();
  bool reflected = false;

  /// Optimal channel on the original alphabet (undoes any relabeling).
  Channel channel() const {
    if (!reflected) return Channel::binary(a, b);
    return Channel::binary(1.0 - b, 1.0 - a);
  }
};

namespace detail {

// Optimal (a, b) for the Shannon problem; a = b = 1 from D >= p on (the
// formulas hit 0/0 at D = p = 1/2, and the zero-rate constant channel is
// optimal there anyway).
inline void shannon_channel_params(double p, double distortion, double* a, double* b) {
  if (distortion >= p) {
    *a = 1.0;
    *b = 1.0;
    return;
  }
  const double q = 1.0 - p;
  *a = (1.0 - distortion) * (q - distortion) / (q * (1.0 - 2.0 * distortion));
  *b = distortion * (q - distortion) / (p * (1.0 - 2.0 * distortion));
}

}  // namespace detail

/// The rate-distortion-perception function of a Bernoulli source, exactly.
///
/// For P >= p (or unconstrained) the perception constraint never binds and
/// the Shannon solution applies. For P < p the distortion axis splits into
/// S1 = [0, d1), where the Shannon solution still satisfies the perception
/// constraint, S2 = [d1, d2), where both constraints are tight and
///   R = 2 H_b(p) + H_b(p - P) - H_t((D-P)/2, p) - H_t((D+P)/2, q),
/// and S3 = [d2, inf), where the rate is zero with a = b = q + P.
inline BernoulliSolution rdp_rate(const BernoulliSpec& spec, double distortion,
                                  PerceptionBound perception) {
  if (distortion < 0.0) throw Error("distortion must be nonnegative");
  const double p = spec.p();
  const double q = spec.q();

  BernoulliSolution sol;
  sol.reflected = spec.reflected();

  const auto bounds =
      perception.finite() ? region_bounds(spec, perception.value()) : std::nullopt;
  if (!bounds) {
    sol.region = BernoulliRegion::ShannonOnly;
    sol.rate = shannon_rate(spec, distortion);
    detail::shannon_channel_params(p, distortion, &sol.a, &sol.b);
    return sol;
  }

  // P = p makes S2 empty (d1 = d2) and the Shannon solution optimal
  // throughout, so only P < p reaches the constrained regions.
  const double P = perception.value();
  sol.d1 = bounds->d1;
  sol.d2 = bounds->d2;
  if (P == p) {
    sol.region = BernoulliRegion::ShannonOnly;
    sol.rate = shannon_rate(spec, distortion);
    detail::shannon_channel_params(p, distortion, &sol.a, &sol.b);
    return sol;
  }

  if (distortion < bounds->d1) {
    sol.region = BernoulliRegion::S1;
    sol.rate = shannon_rate(spec, distortion);
    detail::shannon_channel_params(p, distortion, &sol.a, &sol.b);
  } else if (distortion < bounds->d2) {
    sol.region = BernoulliRegion::S2;
    const double alpha = (distortion - P) / 2.0;
    const double beta = (distortion + P) / 2.0;
    sol.rate = 2.0 * binary_entropy(p) + binary_entropy(p - P) -
               ternary_entropy(alpha, p) - ternary_entropy(beta, q);
    sol.rate = std::max(0.0, sol.rate);
    sol.a = 1.0 - alpha / q;
    sol.b = beta / p;
  } else {
    sol.region = BernoulliRegion::S3;
    sol.rate = 0.0;
    sol.a = q + P;
    sol.b = q + P;
  }
  return sol;
}

/// Recomputed quantities of a closed-form solution point, produced by
/// verify_solution after all checks pass.
struct SolutionCheck {
  double mutual_info = 0.0;
  double distortion = 0.0;
  double perception = 0.0;
  bool distortion_tight = false;
  bool perception_tight = false;
};

/// Closes the loop between the closed form and the generic probability
/// machinery: rebuilds the channel from (a, b), recomputes rate, Hamming
/// distortion, and TV perception, and checks them against the claimed
/// solution. Throws VerificationFailed naming the violated quantity.
inline SolutionCheck verify_solution(const BernoulliSpec& spec, double distortion,
                                     PerceptionBound perception,
                                     const BernoulliSolution& sol) {
  constexpr double kTol = 1e-10;
  const Pmf source = spec.source();
  const Channel channel = Channel::binary(sol.a, sol.b);
  const DistortionMatrix hamming = hamming_matrix(2);

  SolutionCheck check;
  check.mutual_info = mutual_information(source, channel);
  check.distortion = expected_distortion(source, channel, hamming);
  check.perception = total_variation(source, output_marginal(source, channel));

  if (std::abs(check.mutual_info - sol.rate) > kTol)
    throw VerificationFailed("rate mismatch: closed form " + std::to_string(sol.rate) +
                             " vs recomputed " + std::to_string(check.mutual_info));
  if (check.distortion > distortion + kTol)
    throw VerificationFailed("distortion constraint violated: " +
                             std::to_string(check.distortion) + " > " +
                             std::to_string(distortion));
  if (perception.finite() && check.perception > perception.value() + kTol)
    throw VerificationFailed("perception constraint violated: " +
                             std::to_string(check.perception) + " > " +
                             std::to_string(perception.value()));

  check.distortion_tight = std::abs(check.distortion - distortion) <= kTol;
  check.perception_tight =
      perception.finite() && std::abs(check.perception - perception.value()) <= kTol;

  const bool expect_tight_distortion =
      sol.region == BernoulliRegion::S1 || sol.region == BernoulliRegion::S2 ||
      (sol.region == BernoulliRegion::ShannonOnly && distortion <= spec.p());
  if (expect_tight_distortion && !check.distortion_tight)
    throw VerificationFailed("distortion constraint expected tight in region " +
                             to_string(sol.region));
  if (sol.region == BernoulliRegion::S2 && !check.perception_tight)
    throw VerificationFailed("perception constraint expected tight in S2");
  return check;
}

}  // namespace rdp
