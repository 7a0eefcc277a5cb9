#pragma once

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "rdp/bernoulli.hpp"
#include "rdp/measures.hpp"
#include "rdp/prob.hpp"
#include "rdp/solver.hpp"
#include "rdp/theorems.hpp"

namespace rdp {

struct SuiteCheck {
  PropertyReport report;
  bool skipped = false;
  std::string note;
};

struct VerifySuite {
  std::vector<SuiteCheck> checks;

  bool all_pass() const {
    for (const SuiteCheck& c : checks)
      if (!c.skipped && !c.report.pass) return false;
    return true;
  }
};

namespace detail {

inline std::vector<double> linspace(double lo, double hi, std::size_t count) {
  std::vector<double> grid;
  grid.reserve(count);
  if (count == 1) {
    grid.push_back(lo);
    return grid;
  }
  for (std::size_t i = 0; i < count; ++i)
    grid.push_back(lo + (hi - lo) * static_cast<double>(i) /
                            static_cast<double>(count - 1));
  return grid;
}

inline Pmf random_pmf(std::uint64_t seed, std::size_t n) {
  std::vector<double> v(n);
  std::uint64_t state = seed;
  double sum = 0.0;
  for (double& x : v) {
    state = splitmix64(state);
    x = -std::log(uniform01(state));
    sum += x;
  }
  for (double& x : v) x /= sum;
  return Pmf(std::move(v));
}

inline Channel random_channel(std::uint64_t seed, std::size_t n_in, std::size_t n_out) {
  std::vector<std::vector<double>> rows(n_in);
  std::uint64_t state = seed;
  for (auto& row : rows) {
    row.resize(n_out);
    double sum = 0.0;
    for (double& x : row) {
      state = splitmix64(state);
      x = -std::log(uniform01(state));
      sum += x;
    }
    for (double& x : row) x /= sum;
  }
  return Channel(std::move(rows));
}

}  // namespace detail

/// Runs the executable property suite on a Bernoulli source with parameter
/// `p` plus randomized general-alphabet instances. Fully deterministic for a
/// given seed; `full` controls instance counts and trial budgets.
inline VerifySuite run_verify_suite(double p, bool full, std::uint64_t seed) {
  VerifySuite suite;
  const BernoulliSpec spec(p);
  const double q = spec.q();
  const double pc = spec.p();  // canonical (reflected) parameter
  SolveOptions opts;
  opts.seed = detail::seed_split(seed, 1001);

  // Closed form: every perception level meets H_b(p) at zero distortion.
  {
    SuiteCheck check;
    check.report.property_name = "closed form: curves merge at D = 0";
    check.report.tolerance = 1e-12;
    const double hb = binary_entropy(pc);
    const std::vector<PerceptionBound> levels = {
        PerceptionBound::at(0.0), PerceptionBound::at(pc / 4.0),
        PerceptionBound::at(pc / 2.0), PerceptionBound::unconstrained()};
    for (const auto& level : levels) {
      const double rate = rdp_rate(spec, 0.0, level).rate;
      check.report.record(std::abs(rate - hb),
                          level.finite() ? "P = " + std::to_string(level.value())
                                         : "P = inf");
    }
    suite.checks.push_back(std::move(check));
  }

  // Closed form: the unconstrained rate is exactly zero from D = p on.
  {
    SuiteCheck check;
    check.report.property_name = "closed form: zero rate for D >= p";
    check.report.tolerance = 0.0;
    for (double d : {pc, 1.0625 * pc, 2.0 * pc, 0.75, 1.5}) {
      const double rate = rdp_rate(spec, d, PerceptionBound::unconstrained()).rate;
      check.report.record(std::abs(rate), "D = " + std::to_string(d));
    }
    suite.checks.push_back(std::move(check));
  }

  // Closed form: continuity where the regions meet.
  {
    SuiteCheck check;
    check.report.property_name = "closed form: continuity at region thresholds";
    check.report.tolerance = 1e-9;
    for (double P : {0.0, pc / 4.0, pc / 2.0}) {
      const auto bounds = region_bounds(spec, P);
      const auto s2_formula = [&](double d) {
        return 2.0 * binary_entropy(pc) + binary_entropy(pc - P) -
               ternary_entropy((d - P) / 2.0, pc) -
               ternary_entropy((d + P) / 2.0, q);
      };
      std::ostringstream os;
      os << "P = " << P;
      if (bounds->d2 - bounds->d1 <= 1e-12) {
        // Empty middle region (p = 1/2): the Shannon branch must hit zero
        // exactly where the zero-rate region starts.
        check.report.record(std::abs(shannon_rate(spec, bounds->d1)),
                            os.str() + " collapsed thresholds");
      } else {
        check.report.record(
            std::abs(shannon_rate(spec, bounds->d1) - s2_formula(bounds->d1)),
            os.str() + " at d1");
        check.report.record(std::abs(s2_formula(bounds->d2)), os.str() + " at d2");
      }
    }
    suite.checks.push_back(std::move(check));
  }

  // Monotonicity of the closed-form surface along both axes.
  {
    SuiteCheck check;
    const std::vector<double> d_grid =
        detail::linspace(0.0, 2.0 * pc * q * 1.2, full ? 25 : 10);
    const std::vector<PerceptionBound> p_grid = {
        PerceptionBound::at(0.0), PerceptionBound::at(pc / 8.0),
        PerceptionBound::at(pc / 4.0), PerceptionBound::at(pc / 2.0),
        PerceptionBound::unconstrained()};
    check.report = check_monotonicity(bernoulli_surface(spec, d_grid, p_grid), 1e-9);
    check.report.property_name = "closed form surface: monotonicity";
    suite.checks.push_back(std::move(check));
  }

  // Convexity of the closed form along random segments, exactly.
  {
    SuiteCheck check;
    check.report.property_name = "closed form: convexity along segments";
    check.report.tolerance = 1e-9;
    std::uint64_t state = detail::seed_split(seed, 2);
    const int pairs = full ? 20 : 6;
    for (int i = 0; i < pairs; ++i) {
      auto draw = [&](double hi) {
        state = detail::splitmix64(state);
        return hi * detail::uniform01(state);
      };
      const double d1 = draw(2.0 * pc * q * 1.1), d2 = draw(2.0 * pc * q * 1.1);
      const double p1 = draw(pc), p2 = draw(pc);
      for (double lambda : {0.25, 0.5, 0.75}) {
        const double lhs =
            lambda * rdp_rate(spec, d1, PerceptionBound::at(p1)).rate +
            (1.0 - lambda) * rdp_rate(spec, d2, PerceptionBound::at(p2)).rate;
        const double rhs = rdp_rate(spec, lambda * d1 + (1.0 - lambda) * d2,
                                    PerceptionBound::at(lambda * p1 +
                                                        (1.0 - lambda) * p2))
                               .rate;
        std::ostringstream os;
        os << "(" << d1 << "," << p1 << ")-(" << d2 << "," << p2 << ") lambda "
           << lambda;
        check.report.record(rhs - lhs, os.str());
      }
    }
    suite.checks.push_back(std::move(check));
  }

  // Solver against the closed form across the (D, P) grid.
  {
    SuiteCheck check;
    check.report.property_name = "solver vs closed form";
    check.report.tolerance = 1e-3;
    const auto d_grid = detail::linspace(0.0, 2.0 * pc * q * 1.25, full ? 12 : 6);
    const std::vector<PerceptionBound> levels = {
        PerceptionBound::at(0.0), PerceptionBound::at(pc / 4.0),
        PerceptionBound::at(pc / 2.0), PerceptionBound::unconstrained()};
    const Pmf source = spec.source();
    const DistortionMatrix hamming = hamming_matrix(2);
    int not_converged = 0;
    for (const auto& level : levels) {
      for (double d : d_grid) {
        const SolveResult res =
            solve(source, hamming, DivergenceKind::TotalVariation, d, level, opts);
        if (!res.converged) {
          ++not_converged;
          continue;
        }
        const double exact = rdp_rate(spec, d, level).rate;
        std::ostringstream os;
        os << "D = " << d << ", P = "
           << (level.finite() ? std::to_string(level.value()) : "inf");
        check.report.record(std::abs(res.rate - exact), os.str());
      }
    }
    if (not_converged > 0)
      check.note = std::to_string(not_converged) + " points did not converge";
    if (not_converged * 20 > static_cast<int>(levels.size() * d_grid.size()))
      check.report.pass = false;  // more than 5% unconverged
    suite.checks.push_back(std::move(check));
  }

  // Solver against exhaustive search on random binary instances.
  {
    SuiteCheck check;
    check.report.property_name = "solver vs brute force";
    const double resolution = 1e-3;
    check.report.tolerance = std::max(1e-3, 10.0 * resolution);
    std::uint64_t state = detail::seed_split(seed, 3);
    const int instances = full ? 10 : 4;
    for (int i = 0; i < instances; ++i) {
      auto draw = [&] {
        state = detail::splitmix64(state);
        return detail::uniform01(state);
      };
      const double pi = 0.05 + 0.45 * draw();
      const double d = 0.6 * draw();
      const double perc = 0.3 * draw();
      const BruteForceResult oracle =
          brute_force_binary(pi, d, PerceptionBound::at(perc), resolution);
      const SolveResult res =
          solve(Pmf::bernoulli(pi), hamming_matrix(2), DivergenceKind::TotalVariation,
                d, PerceptionBound::at(perc), opts);
      std::ostringstream os;
      os << "p = " << pi << ", D = " << d << ", P = " << perc;
      check.report.record(std::abs(res.rate - oracle.rate), os.str());
    }
    suite.checks.push_back(std::move(check));
  }

  // Monotone solver surfaces for random small-alphabet sources.
  {
    SuiteCheck check;
    check.report.property_name = "solver surfaces: monotonicity";
    check.report.tolerance = 2.0 * opts.tolerance_rate;
    const int sources = full ? 3 : 1;
    for (int s = 0; s < sources; ++s) {
      const std::size_t n = 3 + static_cast<std::size_t>(s % 3);
      const Pmf source = detail::random_pmf(detail::seed_split(seed, 10 + static_cast<std::uint64_t>(s)), n);
      const DistortionMatrix delta = hamming_matrix(n);
      const auto d_grid = detail::linspace(0.0, 0.8, full ? 6 : 4);
      const std::vector<PerceptionBound> p_grid = {
          PerceptionBound::at(0.0), PerceptionBound::at(0.05),
          PerceptionBound::at(0.2), PerceptionBound::unconstrained()};
      const RdpSurface surface = sweep_surface(
          source, delta, DivergenceKind::TotalVariation, d_grid, p_grid, opts);
      const PropertyReport sub = check_monotonicity(surface, check.report.tolerance);
      check.report.instances_checked += sub.instances_checked;
      if (sub.max_violation > check.report.max_violation) {
        check.report.max_violation = sub.max_violation;
        check.report.worst_case_input =
            "source " + std::to_string(s) + ": " + sub.worst_case_input;
      }
      check.report.pass = check.report.max_violation <= check.report.tolerance;
    }
    suite.checks.push_back(std::move(check));
  }

  // Solver-level convexity on the Bernoulli source and a random ternary one.
  {
    SuiteCheck check;
    std::vector<std::pair<DpPoint, DpPoint>> pairs = {
        {{0.02, 0.01}, {0.12, 0.08}},
        {{0.05, 0.0}, {0.15, 0.05}},
    };
    check.report = check_convexity(spec.source(), hamming_matrix(2),
                                   DivergenceKind::TotalVariation, pairs, opts);
    check.report.property_name = "solver: convexity (binary)";
    suite.checks.push_back(std::move(check));
  }
  if (full) {
    SuiteCheck check;
    const Pmf ternary = detail::random_pmf(detail::seed_split(seed, 21), 3);
    std::vector<std::pair<DpPoint, DpPoint>> pairs = {
        {{0.1, 0.02}, {0.5, 0.2}},
        {{0.2, 0.0}, {0.6, 0.1}},
    };
    check.report = check_convexity(ternary, hamming_matrix(3),
                                   DivergenceKind::TotalVariation, pairs, opts);
    check.report.property_name = "solver: convexity (ternary)";
    suite.checks.push_back(std::move(check));
  }

  // Perception gap at the zero-rate distortion.
  {
    SuiteCheck check;
    check.report.property_name = "perception gap at D*";
    check.report.tolerance = opts.tolerance_rate;
    const Pmf source = spec.source();
    const DistortionMatrix hamming = hamming_matrix(2);
    const A2Profile profile = a2_profile(source, hamming);
    if (profile.violated) {
      check.skipped = true;
      check.note = "mean-distortion profile is constant over the support; no gap claimed";
    } else {
      try {
        const PerceptionGap gap =
            perception_gap(source, hamming, DivergenceKind::TotalVariation, opts);
        check.report.record(gap.rate_unconstrained, "R(D*, inf)");
        check.report.record(gap.rate_at_zero > opts.tolerance_rate ? 0.0 : 1.0,
                            "R(D*, 0) positive");
        std::ostringstream os;
        os << "D* = " << gap.d_star << ", R(D*, 0) = " << gap.rate_at_zero;
        check.note = os.str();
      } catch (const Error& e) {
        check.report.pass = false;
        check.note = e.what();
      }
    }
    suite.checks.push_back(std::move(check));
  }

  // Posterior sampling: perfect perception and no information gain.
  {
    SuiteCheck check;
    check.report.property_name = "posterior sampling: output marginal equals source";
    check.report.tolerance = 1e-12;
    SuiteCheck dpi;
    dpi.report.property_name = "posterior sampling: data processing";
    dpi.report.tolerance = 1e-10;
    const int instances = full ? 100 : 20;
    for (int i = 0; i < instances; ++i) {
      const std::uint64_t s = detail::seed_split(seed, 100 + static_cast<std::uint64_t>(i));
      const std::size_t n_in = 2 + (s % 4);
      const std::size_t n_out = 2 + ((s >> 8) % 4);
      const Pmf source = detail::random_pmf(detail::splitmix64(s), n_in);
      const Channel channel = detail::random_channel(detail::splitmix64(s ^ 0xABCD), n_in, n_out);
      const Channel composed = posterior_sampling_decoder(source, channel);
      const Pmf marginal = output_marginal(source, composed);
      double worst = 0.0;
      for (std::size_t x = 0; x < source.size(); ++x)
        worst = std::max(worst, std::abs(marginal[x] - source[x]));
      check.report.record(worst, "instance " + std::to_string(i));
      dpi.report.record(mutual_information(source, composed) -
                            mutual_information(source, channel),
                        "instance " + std::to_string(i));
    }
    suite.checks.push_back(std::move(check));
    suite.checks.push_back(std::move(dpi));
  }

  // Posterior sampling doubles the squared error at conditional-mean outputs.
  {
    SuiteCheck check;
    check.report.property_name = "posterior sampling: distortion doubling";
    check.report.tolerance = 1e-10;
    const int instances = full ? 100 : 20;
    for (int i = 0; i < instances; ++i) {
      const std::uint64_t s = detail::seed_split(seed, 300 + static_cast<std::uint64_t>(i));
      const std::size_t n_in = 2 + (s % 4);
      const std::size_t n_out = 2 + ((s >> 8) % 4);
      const Pmf source = detail::random_pmf(detail::splitmix64(s), n_in);
      const Channel channel = detail::random_channel(detail::splitmix64(s ^ 0xF00D), n_in, n_out);
      std::vector<double> values(n_in);
      std::uint64_t vs = detail::splitmix64(s ^ 0xBEEF);
      for (double& v : values) {
        vs = detail::splitmix64(vs);
        v = 4.0 * detail::uniform01(vs) - 2.0;
      }
      const PropertyReport sub = verify_posterior_doubling(values, source, channel);
      check.report.record(sub.max_violation, "instance " + std::to_string(i));
    }
    suite.checks.push_back(std::move(check));
  }

  // Perfect perception costs at most the rate at half the squared error.
  {
    SuiteCheck check;
    check.report.property_name = "perfect perception bound (closed form)";
    check.report.tolerance = 1e-12;
    for (double d : detail::linspace(0.0, 2.0 * pc * q, full ? 12 : 6)) {
      const double lhs = rdp_rate(spec, d, PerceptionBound::at(0.0)).rate;
      const double rhs = rdp_rate(spec, d / 2.0, PerceptionBound::unconstrained()).rate;
      check.report.record(lhs - rhs, "D = " + std::to_string(d));
    }
    suite.checks.push_back(std::move(check));

    SuiteCheck solver_check;
    solver_check.report =
        verify_perfect_perception_bound({0.0, 1.0}, spec.source(),
                          detail::linspace(0.0, 2.0 * pc * q, full ? 6 : 4), opts);
    solver_check.report.property_name = "perfect perception bound (solver, binary)";
    suite.checks.push_back(std::move(solver_check));

    if (full) {
      SuiteCheck random_check;
      const Pmf source4 = detail::random_pmf(detail::seed_split(seed, 31), 4);
      random_check.report = verify_perfect_perception_bound({0.0, 1.0, 2.0, 3.0}, source4,
                                              detail::linspace(0.0, 2.0, 6), opts);
      random_check.report.property_name = "perfect perception bound (solver, 4-symbol)";
      suite.checks.push_back(std::move(random_check));
    }
  }

  // Block-coding converse: no random code lands below the closed form.
  {
    SuiteCheck check;
    check.report.property_name = "block code converse";
    check.report.tolerance = 0.0;
    const std::vector<int> lengths = full ? std::vector<int>{1, 2, 4, 8}
                                          : std::vector<int>{1, 4};
    const std::vector<double> rates = full ? std::vector<double>{0.0, 0.25, 0.5}
                                           : std::vector<double>{0.0, 0.5};
    int idx = 0;
    for (int n : lengths) {
      for (double rate : rates) {
        BlockCodeSpec block;
        block.n = n;
        block.rate = rate;
        block.trials = full ? 10000 : 2000;
        block.codebook_seed = detail::seed_split(seed, 400 + static_cast<std::uint64_t>(idx++));
        const BlockCodeResult res = simulate_block_code(block, p);
        std::ostringstream os;
        os << "n = " << n << ", rate = " << rate << ", empirical (D, P) = ("
           << res.empirical_distortion << ", " << res.empirical_perception << ")";
        check.report.record(std::max(0.0, -res.slack - res.epsilon_stat), os.str());
      }
    }
    suite.checks.push_back(std::move(check));
  }

  return suite;
}

}  // namespace rdp
