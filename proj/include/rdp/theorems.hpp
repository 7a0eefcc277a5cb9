#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rdp/bernoulli.hpp"
#include "rdp/errors.hpp"
#include "rdp/measures.hpp"
#include "rdp/prob.hpp"
#include "rdp/solver.hpp"

namespace rdp {

/// Outcome of one executable property check. pass holds exactly when
/// max_violation is within the tolerance the check ran at.
struct PropertyReport {
  std::string property_name;
  int instances_checked = 0;
  double max_violation = 0.0;
  double tolerance = 0.0;
  bool pass = true;
  std::string worst_case_input;

  void record(double violation, const std::string& instance) {
    ++instances_checked;
    if (violation > max_violation) {
      max_violation = violation;
      worst_case_input = instance;
    }
    pass = max_violation <= tolerance;
  }
};

/// Evaluates the Bernoulli closed form over a grid, yielding a surface in
/// the same shape the numerical sweeps produce.
inline RdpSurface bernoulli_surface(const BernoulliSpec& spec,
                                    const std::vector<double>& d_grid,
                                    const std::vector<PerceptionBound>& p_grid) {
  RdpSurface surface;
  surface.d_grid = d_grid;
  surface.p_grid = p_grid;
  for (const PerceptionBound& p : p_grid) {
    RdpCurve curve;
    curve.perception = p;
    for (double d : d_grid) {
      SweepPoint pt;
      pt.point.distortion = d;
      pt.point.perception =
          p.finite() ? p.value() : std::numeric_limits<double>::infinity();
      pt.point.rate = rdp_rate(spec, d, p).rate;
      pt.ok = true;
      pt.converged = true;
      curve.points.push_back(pt);
    }
    surface.curves.push_back(std::move(curve));
  }
  return surface;
}

/// Rate must be non-increasing along both axes of a surface. Reports the
/// largest increase R(later) - R(earlier) found over adjacent grid pairs;
/// errored grid points are skipped, not counted.
inline PropertyReport check_monotonicity(const RdpSurface& surface,
                                         double tolerance) {
  PropertyReport report;
  report.property_name = "monotonicity";
  report.tolerance = tolerance;
  const auto describe = [](double d0, double p0, double d1, double p1) {
    std::ostringstream os;
    os << "R(" << d1 << ", " << p1 << ") > R(" << d0 << ", " << p0 << ")";
    return os.str();
  };
  // Along the distortion axis.
  for (const RdpCurve& curve : surface.curves) {
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
      const SweepPoint& a = curve.points[i - 1];
      const SweepPoint& b = curve.points[i];
      if (!a.ok || !b.ok) continue;
      report.record(b.point.rate - a.point.rate,
                    describe(a.point.distortion, a.point.perception,
                             b.point.distortion, b.point.perception));
    }
  }
  // Along the perception axis.
  for (std::size_t c = 1; c < surface.curves.size(); ++c) {
    const RdpCurve& lo = surface.curves[c - 1];
    const RdpCurve& hi = surface.curves[c];
    const std::size_t n = std::min(lo.points.size(), hi.points.size());
    for (std::size_t i = 0; i < n; ++i) {
      const SweepPoint& a = lo.points[i];
      const SweepPoint& b = hi.points[i];
      if (!a.ok || !b.ok) continue;
      report.record(b.point.rate - a.point.rate,
                    describe(a.point.distortion, a.point.perception,
                             b.point.distortion, b.point.perception));
    }
  }
  return report;
}

/// A (distortion, perception) constraint pair with both bounds finite, for
/// convexity checks along segments.
struct DpPoint {
  double distortion = 0.0;
  double perception = 0.0;
};

/// Convexity of R(D, P) along segments, checked two ways per pair: the rate
/// inequality R(mid) <= mix of endpoint rates via three solver calls, and
/// the mixture-channel ingredients on lambda Q1 + (1-lambda) Q2 directly
/// (mutual information convex, distortion exactly linear, divergence convex
/// in its second argument). Any ingredient breach fails the report even when
/// numerically below the headline tolerance.
inline PropertyReport check_convexity(const Pmf& source,
                                      const DistortionMatrix& delta,
                                      DivergenceKind div,
                                      const std::vector<std::pair<DpPoint, DpPoint>>& pairs,
                                      const SolveOptions& opts = SolveOptions()) {
  PropertyReport report;
  report.property_name = "convexity";
  report.tolerance = 2.0 * opts.tolerance_rate;

  for (const auto& [one, two] : pairs) {
    const SolveResult r1 = solve(source, delta, div, one.distortion,
                                 PerceptionBound::at(one.perception), opts);
    const SolveResult r2 = solve(source, delta, div, two.distortion,
                                 PerceptionBound::at(two.perception), opts);
    const double i1 = r1.rate, i2 = r2.rate;
    const double d1 = r1.distortion, d2 = r2.distortion;
    const double p1 = r1.perception, p2 = r2.perception;

    for (double lambda : {0.25, 0.5, 0.75}) {
      std::ostringstream os;
      os << "pair (" << one.distortion << "," << one.perception << ")-("
         << two.distortion << "," << two.perception << ") lambda " << lambda;
      const std::string tag = os.str();

      const double d_mid = lambda * one.distortion + (1.0 - lambda) * two.distortion;
      const double p_mid = lambda * one.perception + (1.0 - lambda) * two.perception;
      const SolveResult mid =
          solve(source, delta, div, d_mid, PerceptionBound::at(p_mid), opts);
      report.record(mid.rate - (lambda * i1 + (1.0 - lambda) * i2),
                    tag + " rate inequality");

      // Mixture channel of the two endpoint optimizers.
      std::vector<std::vector<double>> rows(source.size());
      for (std::size_t x = 0; x < source.size(); ++x) {
        rows[x].resize(r1.channel.output_size());
        for (std::size_t y = 0; y < rows[x].size(); ++y)
          rows[x][y] = lambda * r1.channel(x, y) + (1.0 - lambda) * r2.channel(x, y);
      }
      const Channel mixture(std::move(rows));
      const double mix_info = mutual_information(source, mixture);
      const double mix_dist = expected_distortion(source, mixture, delta);
      const double mix_perc =
          divergence(div, source, output_marginal(source, mixture));

      const double info_excess =
          mix_info - (lambda * i1 + (1.0 - lambda) * i2) - 1e-10;
      const double dist_excess =
          std::abs(mix_dist - (lambda * d1 + (1.0 - lambda) * d2)) - 1e-12;
      const double perc_excess =
          mix_perc - (lambda * p1 + (1.0 - lambda) * p2) - 1e-10;
      if (info_excess > 0.0)
        report.record(report.tolerance + info_excess, tag + " mixture information");
      if (dist_excess > 0.0)
        report.record(report.tolerance + dist_excess, tag + " mixture distortion");
      if (perc_excess > 0.0)
        report.record(report.tolerance + perc_excess, tag + " mixture perception");
    }
  }
  return report;
}

/// The zero-rate distortion D* and the rates on either side of the
/// perception constraint there. When the mean-distortion profile k is not
/// minimized across the whole source support (the gap assumption holds),
/// R(D*, 0) must exceed R(D*, inf) = 0.
struct PerceptionGap {
  double d_star = 0.0;
  double rate_at_zero = 0.0;        // R(D*, P = 0)
  double rate_unconstrained = 0.0;  // R(D*, P = inf)
  bool assumption_violated = false; // k constant over the support; no gap claimed
  bool gap_present = false;
};

inline PerceptionGap perception_gap(const Pmf& source, const DistortionMatrix& delta,
                                    DivergenceKind div,
                                    const SolveOptions& opts = SolveOptions()) {
  const A2Profile profile = a2_profile(source, delta);
  std::size_t z_star = 0;
  for (std::size_t z = 1; z < profile.k.size(); ++z)
    if (profile.k[z] < profile.k[z_star]) z_star = z;

  PerceptionGap gap;
  gap.d_star = profile.k[z_star];
  gap.assumption_violated = profile.violated;
  gap.rate_unconstrained =
      solve(source, delta, div, gap.d_star, PerceptionBound::unconstrained(), opts).rate;
  gap.rate_at_zero =
      solve(source, delta, div, gap.d_star, PerceptionBound::at(0.0), opts).rate;
  if (!profile.violated) {
    if (gap.rate_unconstrained > opts.tolerance_rate)
      throw VerificationFailed("zero-rate distortion should make R(D*, inf) zero");
    gap.gap_present = gap.rate_at_zero > opts.tolerance_rate;
    if (!gap.gap_present)
      throw VerificationFailed("expected R(D*, 0) > 0 under the gap assumption");
  }
  return gap;
}

/// Composes a channel with a redraw from the Bayes posterior: the decoded
/// symbol is resampled from p(X | output). The composed channel's output
/// marginal equals the source distribution exactly, so every divergence
/// against the source vanishes.
inline Channel posterior_sampling_decoder(const Pmf& source, const Channel& channel) {
  const Channel post = posterior(source, channel);
  std::vector<std::vector<double>> rows(source.size());
  for (std::size_t x = 0; x < source.size(); ++x) {
    rows[x].assign(source.size(), 0.0);
    for (std::size_t t = 0; t < source.size(); ++t)
      for (std::size_t y = 0; y < channel.output_size(); ++y)
        rows[x][t] += channel(x, y) * post(y, t);
  }
  return Channel(std::move(rows));
}

/// Exact enumeration of the distortion-doubling identity for the posterior
/// sampling decoder under squared error. Channel outputs are first replaced
/// by their conditional means E[X | output]; the redrawn reconstruction then
/// costs exactly twice the original squared error.
inline PropertyReport verify_posterior_doubling(const std::vector<double>& source_values,
                                           const Pmf& source,
                                           const Channel& channel) {
  if (source_values.size() != source.size())
    throw DimensionMismatch("source values do not match the source alphabet");
  require_same_input(source, channel);

  PropertyReport report;
  report.property_name = "posterior sampling doubles squared error";
  report.tolerance = 1e-10;

  const Channel post = posterior(source, channel);
  const std::size_t n_out = channel.output_size();
  std::vector<double> cond_mean(n_out, 0.0);
  for (std::size_t y = 0; y < n_out; ++y)
    for (std::size_t x = 0; x < source.size(); ++x)
      cond_mean[y] += post(y, x) * source_values[x];

  double d_base = 0.0;   // E[(X - E[X|Y])^2]
  double d_redraw = 0.0; // E[(X - X~)^2], X~ drawn from the posterior
  for (std::size_t x = 0; x < source.size(); ++x) {
    for (std::size_t y = 0; y < n_out; ++y) {
      const double w = source[x] * channel(x, y);
      if (w == 0.0) continue;
      const double err = source_values[x] - cond_mean[y];
      d_base += w * err * err;
      for (std::size_t t = 0; t < source.size(); ++t) {
        const double e2 = source_values[x] - source_values[t];
        d_redraw += w * post(y, t) * e2 * e2;
      }
    }
  }

  const double scale = std::max(2.0 * d_base, 1e-12);
  report.record(std::abs(d_redraw - 2.0 * d_base) / scale,
                "redraw distortion " + std::to_string(d_redraw) + " vs 2x " +
                    std::to_string(2.0 * d_base));
  return report;
}

/// Solver-based check of the perfect-perception bound under squared error:
/// R(D, 0) never exceeds R(D/2, inf) across the grid.
inline PropertyReport verify_perfect_perception_bound(const std::vector<double>& source_values,
                                        const Pmf& source,
                                        const std::vector<double>& d_grid,
                                        const SolveOptions& opts = SolveOptions()) {
  if (source_values.size() != source.size())
    throw DimensionMismatch("source values do not match the source alphabet");
  PropertyReport report;
  report.property_name = "perfect perception within 2x squared error";
  report.tolerance = 2.0 * opts.tolerance_rate;

  const DistortionMatrix delta = squared_error_matrix(source_values, source_values);
  for (double d : d_grid) {
    const double perfect =
        solve(source, delta, DivergenceKind::TotalVariation, d,
              PerceptionBound::at(0.0), opts).rate;
    const double half =
        solve(source, delta, DivergenceKind::TotalVariation, d / 2.0,
              PerceptionBound::unconstrained(), opts).rate;
    report.record(perfect - half, "D = " + std::to_string(d));
  }
  return report;
}

/// Random-codebook block code over the binary alphabet. The codebook holds
/// floor(2^(n * rate)) words of length n drawn i.i.d. from
/// codebook_distribution; sources are encoded to the nearest codeword.
struct BlockCodeSpec {
  int n = 1;
  double rate = 0.0;  // bits per symbol
  std::uint64_t codebook_seed = 1;
  int trials = 10000;
  Pmf codebook_distribution = Pmf::bernoulli(0.5);

  std::size_t codebook_size() const {
    const double words = std::floor(std::exp2(static_cast<double>(n) * rate));
    return static_cast<std::size_t>(std::max(1.0, words));
  }
};

struct BlockCodeResult {
  double nominal_rate = 0.0;    // the requested bits per symbol
  double empirical_rate = 0.0;  // log2(codebook size) / n
  double empirical_distortion = 0.0;
  double empirical_perception = 0.0;
  double closed_form_rate = 0.0;  // R at the empirical (D, P)
  double epsilon_stat = 0.0;
  double slack = 0.0;  // empirical_rate - closed_form_rate
  bool converse_holds = false;
  std::size_t codebook_size = 0;
};

/// Monte Carlo converse check for a Bern(p) source under Hamming distortion
/// and per-letter TV perception. Any nearest-codeword code is a valid
/// achievable point, so its rate must stay above the closed form at its own
/// empirical (distortion, perception), up to three standard errors of the
/// distortion estimate mapped through the local slope.
///
/// Trials use per-index child seeds derived from the master seed, so the
/// aggregate is reproducible regardless of evaluation order.
inline BlockCodeResult simulate_block_code(const BlockCodeSpec& spec, double p) {
  if (spec.n < 1) throw Error("block length must be at least 1");
  if (spec.rate < 0.0) throw Error("rate must be nonnegative");
  if (spec.trials < 1000) throw TrialBudgetTooSmall(spec.trials);
  if (spec.codebook_distribution.size() != 2)
    throw DimensionMismatch("codebook distribution must be binary");
  const BernoulliSpec bern(p);

  const std::size_t n = static_cast<std::size_t>(spec.n);
  const std::size_t words = spec.codebook_size();

  // Codebook bits, drawn from their own child stream.
  std::vector<std::uint8_t> codebook(words * n);
  {
    std::uint64_t state = detail::seed_split(spec.codebook_seed, 0);
    const double p_one = spec.codebook_distribution[1];
    for (auto& bit : codebook) {
      state = detail::splitmix64(state);
      bit = detail::uniform01(state) < p_one ? 1 : 0;
    }
  }

  std::vector<std::uint8_t> block(n);
  std::vector<double> ones_at(n, 0.0);  // reconstruction marginal per position
  double dist_sum = 0.0, dist_sq_sum = 0.0;
  for (int t = 0; t < spec.trials; ++t) {
    std::uint64_t state =
        detail::seed_split(spec.codebook_seed, static_cast<std::uint64_t>(t) + 1);
    for (std::size_t i = 0; i < n; ++i) {
      state = detail::splitmix64(state);
      block[i] = detail::uniform01(state) < p ? 1 : 0;
    }
    std::size_t best = 0;
    std::size_t best_dist = n + 1;
    for (std::size_t w = 0; w < words; ++w) {
      std::size_t d = 0;
      for (std::size_t i = 0; i < n; ++i) d += block[i] != codebook[w * n + i];
      if (d < best_dist) {  // ties keep the lowest index
        best_dist = d;
        best = w;
      }
    }
    for (std::size_t i = 0; i < n; ++i) ones_at[i] += codebook[best * n + i];
    const double block_dist =
        static_cast<double>(best_dist) / static_cast<double>(n);
    dist_sum += block_dist;
    dist_sq_sum += block_dist * block_dist;
  }

  BlockCodeResult result;
  result.nominal_rate = spec.rate;
  result.codebook_size = words;
  result.empirical_rate =
      std::log2(static_cast<double>(words)) / static_cast<double>(n);
  const double trials = static_cast<double>(spec.trials);
  result.empirical_distortion = dist_sum / trials;

  double tv_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ones = ones_at[i] / trials;
    tv_sum += std::abs(ones - p);  // TV between two Bernoulli pmfs
  }
  result.empirical_perception = tv_sum / static_cast<double>(n);

  result.closed_form_rate =
      rdp_rate(bern, result.empirical_distortion,
               PerceptionBound::at(result.empirical_perception)).rate;

  // Three standard errors of the distortion estimate, mapped through the
  // local distortion slope of the closed form.
  const double variance =
      std::max(0.0, dist_sq_sum / trials -
                        result.empirical_distortion * result.empirical_distortion);
  const double stderr_d = std::sqrt(variance / trials);
  const double h = 1e-4;
  const double d_hi = result.empirical_distortion + h;
  const double d_lo = std::max(0.0, result.empirical_distortion - h);
  const PerceptionBound at_p = PerceptionBound::at(result.empirical_perception);
  const double slope =
      std::abs(rdp_rate(bern, d_hi, at_p).rate - rdp_rate(bern, d_lo, at_p).rate) /
      (d_hi - d_lo);
  result.epsilon_stat = 3.0 * stderr_d * slope + 1e-12;

  result.slack = result.empirical_rate - result.closed_form_rate;
  result.converse_holds = result.slack >= -result.epsilon_stat;
  return result;
}

}  // namespace rdp
