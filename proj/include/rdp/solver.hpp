#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "rdp/errors.hpp"
#include "rdp/measures.hpp"
#include "rdp/prob.hpp"

namespace rdp {

/// Tuning knobs for the numerical minimization. All fields are optional in
/// the JSON config consumed by the CLI; these are the defaults.
struct SolveOptions {
  int max_outer_iters = 60;
  int max_inner_iters = 400;
  double penalty_initial = 1.0;
  double penalty_growth = 2.0;
  double step_size_initial = 0.5;
  double tolerance_rate = 1e-4;        // bits
  double tolerance_constraint = 1e-6;
  std::uint64_t seed = 1;
  int restarts = 2;

  void validate() const {
    if (max_outer_iters <= 0 || max_inner_iters <= 0 || restarts < 0)
      throw Error("iteration counts must be positive");
    if (penalty_initial <= 0.0 || penalty_growth <= 1.0)
      throw Error("penalty parameters must be positive with growth > 1");
    if (step_size_initial <= 0.0 || tolerance_rate <= 0.0 ||
        tolerance_constraint <= 0.0)
      throw Error("step size and tolerances must be positive");
  }
};

struct SolveResult {
  double rate = 0.0;        // bits; exact mutual information of `channel`
  Channel channel;
  double distortion = 0.0;  // exact expected distortion of `channel`
  double perception = 0.0;  // realized divergence; NaN when alphabets differ
  bool converged = false;
  int iterations = 0;
  // Positive parts of (E[distortion] - D, d(p_X, p_out) - P).
  std::array<double, 2> constraint_residuals{0.0, 0.0};
};

namespace detail {

inline constexpr std::size_t kAlphabetCap = 64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Deterministic per-index child seed derived from a master seed.
inline std::uint64_t seed_split(std::uint64_t master, std::uint64_t index) {
  return splitmix64(master ^ splitmix64(index + 1));
}

// Uniform in the open interval (0, 1): the half-ulp offset keeps draws away
// from 0 so exponential transforms stay finite and positive.
inline double uniform01(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53 + 0x1.0p-54;
}

// Flat-array view of the optimization problem. Channels are stored row-major
// (n_in x n_out) and kept on the product of per-row simplices throughout.
struct Problem {
  std::size_t n_in = 0, n_out = 0;
  std::vector<double> source;   // p(x)
  std::vector<double> delta;    // distortion, row-major
  DivergenceKind div = DivergenceKind::TotalVariation;
  double d_bound = 0.0;
  bool p_finite = false;
  double p_bound = 0.0;

  void marginal(const std::vector<double>& q, std::vector<double>& m) const {
    m.assign(n_out, 0.0);
    for (std::size_t x = 0; x < n_in; ++x) {
      const double px = source[x];
      if (px == 0.0) continue;
      for (std::size_t y = 0; y < n_out; ++y) m[y] += px * q[x * n_out + y];
    }
  }

  double mutual_info(const std::vector<double>& q,
                     const std::vector<double>& m) const {
    double info = 0.0;
    for (std::size_t x = 0; x < n_in; ++x) {
      const double px = source[x];
      if (px == 0.0) continue;
      for (std::size_t y = 0; y < n_out; ++y) {
        const double v = q[x * n_out + y];
        if (v > 0.0) info += px * v * std::log2(v / m[y]);
      }
    }
    return std::max(0.0, info);
  }

  double distortion(const std::vector<double>& q) const {
    double e = 0.0;
    for (std::size_t x = 0; x < n_in; ++x) {
      const double px = source[x];
      if (px == 0.0) continue;
      for (std::size_t y = 0; y < n_out; ++y)
        e += px * q[x * n_out + y] * delta[x * n_out + y];
    }
    return e;
  }

  double perception(const std::vector<double>& m) const {
    double s = 0.0;
    if (div == DivergenceKind::TotalVariation) {
      for (std::size_t y = 0; y < n_out; ++y) s += std::abs(source[y] - m[y]);
      return 0.5 * s;
    }
    for (std::size_t y = 0; y < n_out; ++y) {
      if (source[y] == 0.0) continue;
      if (m[y] == 0.0) return std::numeric_limits<double>::infinity();
      s += source[y] * std::log2(source[y] / m[y]);
    }
    return std::max(0.0, s);
  }

  // The augmented term for a constraint value c with weight mu and
  // multiplier lambda is (max(0, lambda + mu c)^2 - lambda^2) / (2 mu);
  // its gradient factor is the first-order multiplier estimate
  // max(0, lambda + mu c). Multipliers carry the constraint force so the
  // weights stay bounded; a pure quadratic penalty needs mu ~ 1/tolerance
  // and turns the inner problem too stiff for first-order steps.
  static double augmented_term(double c, double lambda, double mu) {
    const double w = std::max(0.0, lambda + mu * c);
    return (w * w - lambda * lambda) / (2.0 * mu);
  }

  // The TV ball is a polytope, and its kinks stall line-searched descent:
  // at |m_y - p_y| = 0 the subgradient need not be a descent direction at
  // any step size. The constraint is therefore enforced through its
  // supporting hyperplanes, sign vectors s with (1/2) s . (m - p) <= P,
  // added as their patterns become active. Every cut is linear in the
  // channel, so the augmented objective stays smooth. KL is smooth already
  // and keeps a single direct term.
  struct TvCut {
    std::vector<double> sign;  // entries in {-1, 0, +1}, one per output
    double lambda = 0.0;
  };

  struct DualState {
    double mu_d = 1.0;
    double mu_p = 1.0;
    double lambda_d = 0.0;
    double lambda_p = 0.0;    // KL only
    std::vector<TvCut> cuts;  // TV only
  };

  double cut_value(const std::vector<double>& m, const TvCut& cut) const {
    double s = 0.0;
    for (std::size_t y = 0; y < n_out; ++y)
      s += cut.sign[y] * (m[y] - source[y]);
    return 0.5 * s - p_bound;
  }

  double penalized(const std::vector<double>& q, std::vector<double>& m,
                   const DualState& dual) const {
    marginal(q, m);
    double f = mutual_info(q, m);
    f += augmented_term(distortion(q) - d_bound, dual.lambda_d, dual.mu_d);
    if (p_finite) {
      if (div == DivergenceKind::TotalVariation) {
        for (const TvCut& cut : dual.cuts)
          f += augmented_term(cut_value(m, cut), cut.lambda, dual.mu_p);
      } else {
        f += augmented_term(perception(m) - p_bound, dual.lambda_p, dual.mu_p);
      }
    }
    return f;
  }

  // Per-column penalty forces at the current iterate: the distortion
  // multiplier estimate and the column pull of the perception terms.
  void forces(const std::vector<double>& q, const std::vector<double>& m,
              const DualState& dual, double* wd, std::vector<double>& pterm) const {
    static constexpr double kInvLn2 = 1.4426950408889634;
    *wd = std::max(0.0, dual.lambda_d + dual.mu_d * (distortion(q) - d_bound));
    pterm.assign(n_out, 0.0);
    if (!p_finite) return;
    if (div == DivergenceKind::TotalVariation) {
      for (const TvCut& cut : dual.cuts) {
        const double w =
            std::max(0.0, cut.lambda + dual.mu_p * cut_value(m, cut));
        if (w == 0.0) continue;
        for (std::size_t y = 0; y < n_out; ++y)
          pterm[y] += w * 0.5 * cut.sign[y];
      }
    } else {
      const double w =
          std::max(0.0, dual.lambda_p + dual.mu_p * (perception(m) - p_bound));
      if (w > 0.0) {
        for (std::size_t y = 0; y < n_out; ++y) {
          if (source[y] > 0.0 && m[y] > 0.0)
            pterm[y] = w * (-source[y] / m[y] * kInvLn2);
        }
      }
    }
  }

  // Gradient of the augmented objective.
  void gradient(const std::vector<double>& q, const std::vector<double>& m,
                double wd, const std::vector<double>& pterm,
                std::vector<double>& g) const {
    for (std::size_t x = 0; x < n_in; ++x) {
      const double px = source[x];
      for (std::size_t y = 0; y < n_out; ++y) {
        const std::size_t i = x * n_out + y;
        if (px == 0.0) {
          g[i] = 0.0;
          continue;
        }
        const double v = q[i];
        // Entries at exactly zero stay zero under multiplicative updates;
        // their gradient only matters through the row shift, so park it at 0.
        const double info_term = v > 0.0 ? std::log2(v / m[y]) : 0.0;
        g[i] = px * (info_term + wd * delta[i] + pterm[y]);
      }
    }
  }
};

// One multiplicative (entropic mirror descent) step: each row is scaled by
// exp(-eta * gradient) and renormalized, which preserves simplex feasibility
// without projection. Rows are shifted by their max exponent for stability.
//
// Entries are floored at a tiny positive value after normalization: an entry
// that underflows to exactly zero can never grow back under multiplicative
// updates, and a large early step would otherwise lock the iterate onto a
// suboptimal face. The floor's contribution to any expectation is far below
// every tolerance in use.
inline constexpr double kChannelFloor = 1e-30;

inline void mirror_step(const Problem& prob, const std::vector<double>& q,
                        const std::vector<double>& g, double eta,
                        std::vector<double>& out) {
  for (std::size_t x = 0; x < prob.n_in; ++x) {
    const std::size_t base = x * prob.n_out;
    double wmax = -std::numeric_limits<double>::infinity();
    for (std::size_t y = 0; y < prob.n_out; ++y) {
      if (q[base + y] > 0.0) wmax = std::max(wmax, -eta * g[base + y]);
    }
    double sum = 0.0;
    for (std::size_t y = 0; y < prob.n_out; ++y) {
      const double v = q[base + y];
      out[base + y] = v > 0.0 ? v * std::exp(-eta * g[base + y] - wmax) : 0.0;
      sum += out[base + y];
    }
    double resum = 0.0;
    for (std::size_t y = 0; y < prob.n_out; ++y) {
      out[base + y] = std::max(out[base + y] / sum, kChannelFloor);
      resum += out[base + y];
    }
    for (std::size_t y = 0; y < prob.n_out; ++y) out[base + y] /= resum;
  }
}

// Closed-form row minimizer for the current marginal and frozen penalty
// forces: q(y|x) proportional to m(y) exp(-ln2 (wd delta + pterm)). This is
// the alternating-minimization move of the classic rate-distortion iteration
// generalized to the augmented terms; unlike a multiplicative step from the
// current iterate, it recreates crushed entries at full size in one move.
// The surrounding loop only accepts it when the objective decreases.
inline void blahut_step(const Problem& prob, const std::vector<double>& m,
                        double wd, const std::vector<double>& pterm,
                        std::vector<double>& out) {
  static constexpr double kLn2 = 0.6931471805599453;
  for (std::size_t x = 0; x < prob.n_in; ++x) {
    const std::size_t base = x * prob.n_out;
    double shift = std::numeric_limits<double>::infinity();
    for (std::size_t y = 0; y < prob.n_out; ++y)
      shift = std::min(shift, wd * prob.delta[base + y] + pterm[y]);
    double sum = 0.0;
    for (std::size_t y = 0; y < prob.n_out; ++y) {
      const double cost = wd * prob.delta[base + y] + pterm[y] - shift;
      out[base + y] = m[y] * std::exp(-kLn2 * cost);
      sum += out[base + y];
    }
    double resum = 0.0;
    for (std::size_t y = 0; y < prob.n_out; ++y) {
      out[base + y] = std::max(out[base + y] / sum, kChannelFloor);
      resum += out[base + y];
    }
    for (std::size_t y = 0; y < prob.n_out; ++y) out[base + y] /= resum;
  }
}

struct PenaltyRun {
  std::vector<double> q;
  double rate = 0.0;
  double dist = 0.0;
  double perc = 0.0;
  double resid_d = 0.0;
  double resid_p = 0.0;
  bool converged = false;
  int iterations = 0;
};

// Augmented Lagrangian path: minimize I(Q) plus multiplier-shifted quadratic
// terms for the constraints, updating the multipliers after every pass and
// growing a weight only while its residual stagnates, which keeps the inner
// problem well-conditioned. Each inner iteration tries a closed-form row
// update, then an additive vertex step, then a line-searched multiplicative
// step, accepting the first that lowers the augmented objective; the inner
// solve ends when the vertex gap certifies it. The TV constraint enters
// through supporting-hyperplane cuts collected as their sign patterns turn
// active.
inline PenaltyRun penalty_path(const Problem& prob, std::vector<double> q,
                               const SolveOptions& opts) {
  PenaltyRun run;
  const std::size_t size = prob.n_in * prob.n_out;
  std::vector<double> m(prob.n_out), g(size), cand(size), mc(prob.n_out);

  const bool tv_cuts =
      prob.p_finite && prob.div == DivergenceKind::TotalVariation;
  Problem::DualState dual;
  dual.mu_d = opts.penalty_initial;
  dual.mu_p = opts.penalty_initial;
  double eta = opts.step_size_initial;
  double prev_rate = std::numeric_limits<double>::infinity();
  double prev_worst = std::numeric_limits<double>::infinity();

  // The vertex gap sum_x (<g_x, q_x> - min_y g_x(y)) bounds the suboptimality
  // of the current subproblem iterate from above, so reaching this threshold
  // certifies the inner solve.
  const double gap_tol = std::max(1e-10, 0.05 * opts.tolerance_rate);
  std::vector<double> pterm(prob.n_out);
  for (int outer = 0; outer < opts.max_outer_iters; ++outer) {
    double f = prob.penalized(q, m, dual);
    bool certified = false;
    for (int inner = 0; inner < opts.max_inner_iters; ++inner) {
      prob.marginal(q, m);
      double wd = 0.0;
      prob.forces(q, m, dual, &wd, pterm);
      prob.gradient(q, m, wd, pterm, g);

      double gap = 0.0;
      for (std::size_t x = 0; x < prob.n_in; ++x) {
        const std::size_t base = x * prob.n_out;
        double inner_product = 0.0;
        double lowest = g[base];
        for (std::size_t y = 0; y < prob.n_out; ++y) {
          inner_product += g[base + y] * q[base + y];
          lowest = std::min(lowest, g[base + y]);
        }
        gap += inner_product - lowest;
      }
      if (gap <= gap_tol) {
        certified = true;
        break;
      }

      bool accepted = false;

      // Closed-form candidate first; it makes the long moves.
      blahut_step(prob, m, wd, pterm, cand);
      const double f_ba = prob.penalized(cand, mc, dual);
      if (f_ba < f) {
        q.swap(cand);
        f = f_ba;
        accepted = true;
        ++run.iterations;
      }

      // Additive vertex step next. Both the closed-form map and the
      // multiplicative step scale existing mass, so an output column whose
      // marginal has collapsed can never come back through them; moving
      // toward the per-row best vertex restores it in one move.
      if (!accepted) {
        double t = 1.0;
        for (int tries = 0; tries < 40 && !accepted; ++tries) {
          for (std::size_t x = 0; x < prob.n_in; ++x) {
            const std::size_t base = x * prob.n_out;
            std::size_t best = 0;
            for (std::size_t y = 1; y < prob.n_out; ++y)
              if (g[base + y] < g[base + best]) best = y;
            for (std::size_t y = 0; y < prob.n_out; ++y)
              cand[base + y] = (1.0 - t) * q[base + y] + (y == best ? t : 0.0);
          }
          const double fc = prob.penalized(cand, mc, dual);
          if (fc < f) {
            q.swap(cand);
            f = fc;
            accepted = true;
            ++run.iterations;
          }
          t *= 0.5;
        }
      }

      if (!accepted) {
        double trial = eta;
        for (int tries = 0; tries < 45; ++tries) {
          mirror_step(prob, q, g, trial, cand);
          const double fc = prob.penalized(cand, mc, dual);
          if (fc < f) {
            q.swap(cand);
            f = fc;
            eta = std::min(trial * 1.25, 1e6);
            accepted = true;
            ++run.iterations;
            break;
          }
          trial *= 0.5;
        }
      }

      if (!accepted) {
        // Every candidate failed to descend: numerical floor reached. Leave
        // eta usable for the next outer pass.
        eta = opts.step_size_initial;
        break;
      }
    }

    prob.marginal(q, m);
    run.dist = prob.distortion(q);
    run.perc = prob.p_finite ? prob.perception(m)
                             : std::numeric_limits<double>::quiet_NaN();
    run.resid_d = std::max(0.0, run.dist - prob.d_bound);
    run.resid_p = prob.p_finite ? std::max(0.0, run.perc - prob.p_bound) : 0.0;
    const double rate_now = prob.mutual_info(q, m);
    const bool residuals_ok = run.resid_d <= opts.tolerance_constraint &&
                              run.resid_p <= opts.tolerance_constraint;

    // Feasibility alone is not a verdict. The final inner pass must have
    // certified its subproblem via the vertex gap, and the multipliers must
    // be consistent: a sizable multiplier next to a slack constraint means
    // an overshoot that later passes will unwind.
    const double next_lambda_d =
        std::max(0.0, dual.lambda_d + dual.mu_d * (run.dist - prob.d_bound));
    bool slack_ok = next_lambda_d <= 1e-6 ||
                    prob.d_bound - run.dist <= 10.0 * opts.tolerance_constraint;
    if (tv_cuts) {
      for (const Problem::TvCut& cut : dual.cuts) {
        const double c = prob.cut_value(m, cut);
        const double next = std::max(0.0, cut.lambda + dual.mu_p * c);
        if (next > 1e-6 && c < -10.0 * opts.tolerance_constraint) slack_ok = false;
      }
    } else if (prob.p_finite) {
      const double next_lambda_p = std::max(
          0.0, dual.lambda_p + dual.mu_p * (prob.perception(m) - prob.p_bound));
      if (next_lambda_p > 1e-6 &&
          prob.p_bound - run.perc > 10.0 * opts.tolerance_constraint)
        slack_ok = false;
    }

    if (residuals_ok && slack_ok && certified &&
        std::abs(rate_now - prev_rate) <= 0.05 * opts.tolerance_rate) {
      run.converged = true;
      break;
    }
    prev_rate = rate_now;

    dual.lambda_d = next_lambda_d;
    if (tv_cuts) {
      for (Problem::TvCut& cut : dual.cuts)
        cut.lambda =
            std::max(0.0, cut.lambda + dual.mu_p * prob.cut_value(m, cut));
      if (run.resid_p > 0.0) {
        // Support the violated pattern with a new cut unless present.
        Problem::TvCut fresh;
        fresh.sign.resize(prob.n_out);
        for (std::size_t y = 0; y < prob.n_out; ++y) {
          const double diff = m[y] - prob.source[y];
          fresh.sign[y] = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
        }
        bool present = false;
        for (const Problem::TvCut& cut : dual.cuts)
          present = present || cut.sign == fresh.sign;
        if (!present) dual.cuts.push_back(std::move(fresh));
      }
    } else if (prob.p_finite) {
      dual.lambda_p = std::max(
          0.0, dual.lambda_p + dual.mu_p * (prob.perception(m) - prob.p_bound));
    }

    const double worst = std::max(run.resid_d, run.resid_p);
    if (worst > std::max(0.5 * prev_worst, opts.tolerance_constraint)) {
      if (run.resid_d > opts.tolerance_constraint)
        dual.mu_d *= opts.penalty_growth;
      if (run.resid_p > opts.tolerance_constraint)
        dual.mu_p *= opts.penalty_growth;
    }
    prev_worst = worst;
  }

  prob.marginal(q, m);
  run.rate = prob.mutual_info(q, m);
  run.q = std::move(q);
  return run;
}

// Product channels have zero rate, so whenever one is feasible it is optimal.
// Scan the segment between the distortion-minimizing point mass and the
// source pmf (the divergence-free end); the least mixing weight that meets
// the distortion bound is the best candidate on that segment.
inline std::optional<std::vector<double>> zero_rate_channel(const Problem& prob) {
  std::vector<double> k(prob.n_out, 0.0);
  for (std::size_t y = 0; y < prob.n_out; ++y)
    for (std::size_t x = 0; x < prob.n_in; ++x)
      k[y] += prob.source[x] * prob.delta[x * prob.n_out + y];
  std::size_t z_star = 0;
  for (std::size_t y = 1; y < prob.n_out; ++y)
    if (k[y] < k[z_star]) z_star = y;

  std::vector<double> m;
  if (!prob.p_finite) {
    if (k[z_star] > prob.d_bound) return std::nullopt;
    m.assign(prob.n_out, 0.0);
    m[z_star] = 1.0;
  } else {
    double e_source = 0.0;  // distortion of the product channel with m = p_X
    for (std::size_t y = 0; y < prob.n_out; ++y) e_source += prob.source[y] * k[y];
    double lambda = 0.0;
    if (e_source > prob.d_bound) {
      if (k[z_star] > prob.d_bound) return std::nullopt;
      lambda = (e_source - prob.d_bound) / (e_source - k[z_star]);
      lambda = std::min(1.0, std::max(0.0, lambda));
    }
    m.resize(prob.n_out);
    for (std::size_t y = 0; y < prob.n_out; ++y)
      m[y] = (1.0 - lambda) * prob.source[y] + (y == z_star ? lambda : 0.0);
    if (prob.perception(m) > prob.p_bound + 1e-12) return std::nullopt;
  }

  std::vector<double> q(prob.n_in * prob.n_out);
  for (std::size_t x = 0; x < prob.n_in; ++x)
    for (std::size_t y = 0; y < prob.n_out; ++y) q[x * prob.n_out + y] = m[y];
  return q;
}

inline std::vector<double> default_init(const Problem& prob) {
  std::vector<double> k(prob.n_out, 0.0);
  for (std::size_t y = 0; y < prob.n_out; ++y)
    for (std::size_t x = 0; x < prob.n_in; ++x)
      k[y] += prob.source[x] * prob.delta[x * prob.n_out + y];
  std::size_t z_star = 0;
  for (std::size_t y = 1; y < prob.n_out; ++y)
    if (k[y] < k[z_star]) z_star = y;
  // Distortion-minimizing constant output mixed 50/50 with uniform, copied
  // into every row: an interior, input-independent starting point.
  std::vector<double> q(prob.n_in * prob.n_out);
  for (std::size_t x = 0; x < prob.n_in; ++x)
    for (std::size_t y = 0; y < prob.n_out; ++y)
      q[x * prob.n_out + y] =
          0.5 * (y == z_star ? 1.0 : 0.0) + 0.5 / static_cast<double>(prob.n_out);
  return q;
}

inline std::vector<double> random_init(const Problem& prob, std::uint64_t seed) {
  std::vector<double> q(prob.n_in * prob.n_out);
  std::uint64_t state = seed;
  for (std::size_t x = 0; x < prob.n_in; ++x) {
    double sum = 0.0;
    for (std::size_t y = 0; y < prob.n_out; ++y) {
      state = splitmix64(state);
      // Exponential draws normalized per row: uniform on the simplex.
      const double e = -std::log(1.0 - uniform01(state));
      q[x * prob.n_out + y] = e;
      sum += e;
    }
    for (std::size_t y = 0; y < prob.n_out; ++y) q[x * prob.n_out + y] /= sum;
  }
  return q;
}

inline bool better(const PenaltyRun& candidate, const PenaltyRun& incumbent) {
  if (candidate.converged != incumbent.converged) return candidate.converged;
  if (candidate.converged) return candidate.rate < incumbent.rate;
  return candidate.resid_d + candidate.resid_p <
         incumbent.resid_d + incumbent.resid_p;
}

template <typename Fn>
inline void parallel_for(std::size_t count, Fn&& fn) {
  const std::size_t workers =
      std::min<std::size_t>(count, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1))
        fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace detail

/// Numerically computes R(D, P): the least mutual information over channels
/// meeting the distortion bound `d_bound` and, when finite, the perception
/// bound. Deterministic for a given seed. Throws Infeasible when no channel
/// can meet the distortion bound; an unmet tolerance after the full penalty
/// schedule comes back as converged = false with the best iterate.
inline SolveResult solve(const Pmf& source, const DistortionMatrix& delta,
                         DivergenceKind div, double d_bound,
                         PerceptionBound p_bound,
                         const SolveOptions& opts = SolveOptions(),
                         const Channel* warm_start = nullptr) {
  opts.validate();
  if (delta.source_size() != source.size())
    throw DimensionMismatch("distortion matrix does not match the source");
  const std::size_t n_in = source.size();
  const std::size_t n_out = delta.recon_size();
  if (n_in > detail::kAlphabetCap || n_out > detail::kAlphabetCap)
    throw Error("alphabet sizes beyond 64x64 are out of scope");
  if (d_bound < 0.0) throw Error("distortion bound must be nonnegative");
  if (p_bound.finite() && n_out != n_in)
    throw DimensionMismatch(
        "a finite perception bound needs matching source and output alphabets");

  detail::Problem prob;
  prob.n_in = n_in;
  prob.n_out = n_out;
  prob.source = source.probs();
  prob.delta.resize(n_in * n_out);
  for (std::size_t x = 0; x < n_in; ++x)
    for (std::size_t y = 0; y < n_out; ++y)
      prob.delta[x * n_out + y] = delta(x, y);
  prob.div = div;
  prob.d_bound = d_bound;
  prob.p_finite = p_bound.finite();
  prob.p_bound = p_bound.finite() ? p_bound.value() : 0.0;

  // The least achievable distortion pairs every source symbol with its best
  // reconstruction; below that the problem is infeasible regardless of P.
  double min_dist = 0.0;
  for (std::size_t x = 0; x < n_in; ++x) {
    double row_min = prob.delta[x * n_out];
    for (std::size_t y = 1; y < n_out; ++y)
      row_min = std::min(row_min, prob.delta[x * n_out + y]);
    min_dist += prob.source[x] * row_min;
  }
  if (d_bound < min_dist)
    throw Infeasible("distortion bound " + std::to_string(d_bound) +
                     " is below the least achievable distortion " +
                     std::to_string(min_dist));

  auto finish = [&](const detail::PenaltyRun& run) {
    std::vector<std::vector<double>> rows(n_in);
    for (std::size_t x = 0; x < n_in; ++x)
      rows[x].assign(run.q.begin() + static_cast<std::ptrdiff_t>(x * n_out),
                     run.q.begin() + static_cast<std::ptrdiff_t>((x + 1) * n_out));
    Channel channel(std::move(rows));
    // Report from exact re-evaluation of the returned channel, not from the
    // optimizer's internal state.
    const double rate = mutual_information(source, channel);
    const double dist = expected_distortion(source, channel, delta);
    double perc = std::numeric_limits<double>::quiet_NaN();
    double resid_p = 0.0;
    if (n_out == n_in) {
      perc = divergence(div, source, output_marginal(source, channel));
      if (p_bound.finite()) resid_p = std::max(0.0, perc - p_bound.value());
    }
    const double resid_d = std::max(0.0, dist - d_bound);
    return SolveResult{rate,
                       std::move(channel),
                       dist,
                       perc,
                       run.converged,
                       run.iterations,
                       {resid_d, resid_p}};
  };

  if (auto q0 = detail::zero_rate_channel(prob)) {
    detail::PenaltyRun run;
    run.q = std::move(*q0);
    run.converged = true;
    return finish(run);
  }

  std::optional<detail::PenaltyRun> best;
  auto consider = [&](std::vector<double> q0) {
    detail::PenaltyRun run = detail::penalty_path(prob, std::move(q0), opts);
    if (!best || detail::better(run, *best)) best = std::move(run);
  };

  if (warm_start) {
    if (warm_start->input_size() != n_in || warm_start->output_size() != n_out)
      throw DimensionMismatch("warm-start channel has the wrong shape");
    // Blend a whisker of uniform into the warm start: multiplicative updates
    // cannot revive entries that sit at exactly zero.
    constexpr double kBlend = 1e-3;
    std::vector<double> q(n_in * n_out);
    for (std::size_t x = 0; x < n_in; ++x)
      for (std::size_t y = 0; y < n_out; ++y)
        q[x * n_out + y] = (1.0 - kBlend) * (*warm_start)(x, y) +
                           kBlend / static_cast<double>(n_out);
    consider(std::move(q));
  }
  consider(detail::default_init(prob));
  for (int r = 0; r < opts.restarts; ++r)
    consider(detail::random_init(prob, detail::seed_split(opts.seed,
                                                          static_cast<std::uint64_t>(r))));

  return finish(*best);
}

/// Exhaustive search over the two-parameter binary channel family
/// (a = P(out=0|in=0), b = P(out=0|in=1)) at the given grid resolution with
/// one local refinement pass. Independent oracle for both the closed form
/// and the numerical solver on binary instances.
struct BruteForceResult {
  double rate = 0.0;
  double a = 0.0;
  double b = 0.0;
};

inline BruteForceResult brute_force_binary(double p, double d_bound,
                                           PerceptionBound p_bound,
                                           double resolution) {
  if (!(p > 0.0) || !(p < 1.0))
    throw Error("Bernoulli parameter must lie strictly inside (0, 1)");
  if (!(resolution > 0.0) || resolution > 0.01)
    throw Error("brute-force resolution must lie in (0, 0.01]");
  if (d_bound < 0.0) throw Error("distortion bound must be nonnegative");
  const double q = 1.0 - p;

  const auto mutual_info = [&](double a, double b) {
    const double m0 = q * a + p * b;
    const double m1 = 1.0 - m0;
    double info = 0.0;
    if (a > 0.0) info += q * a * std::log2(a / m0);
    if (a < 1.0) info += q * (1.0 - a) * std::log2((1.0 - a) / m1);
    if (b > 0.0) info += p * b * std::log2(b / m0);
    if (b < 1.0) info += p * (1.0 - b) * std::log2((1.0 - b) / m1);
    return std::max(0.0, info);
  };
  const auto feasible = [&](double a, double b) {
    const double dist = (1.0 - a) * q + b * p;
    if (dist > d_bound) return false;
    if (p_bound.finite() && std::abs((1.0 - a) * q - b * p) > p_bound.value())
      return false;
    return true;
  };

  bool found = false;
  BruteForceResult best;
  best.rate = std::numeric_limits<double>::infinity();
  const auto scan = [&](double a_lo, double a_hi, double b_lo, double b_hi,
                        double step) {
    const auto count = [&](double lo, double hi) {
      return static_cast<long>(std::floor((hi - lo) / step + 0.5)) + 1;
    };
    const long na = count(a_lo, a_hi), nb = count(b_lo, b_hi);
    for (long i = 0; i < na; ++i) {
      const double a = std::min(1.0, a_lo + static_cast<double>(i) * step);
      for (long j = 0; j < nb; ++j) {
        const double b = std::min(1.0, b_lo + static_cast<double>(j) * step);
        if (!feasible(a, b)) continue;
        const double info = mutual_info(a, b);
        if (info < best.rate) {
          best = {info, a, b};
          found = true;
        }
      }
    }
  };

  scan(0.0, 1.0, 0.0, 1.0, resolution);
  if (!found)
    throw InfeasibleOnGrid("no grid point satisfies both constraints");
  // When both constraints are active the best coarse point can sit several
  // grid steps from the optimum along the feasible cone, so the refinement
  // window spans a dozen coarse steps.
  const double r = resolution;
  scan(std::max(0.0, best.a - 12.0 * r), std::min(1.0, best.a + 12.0 * r),
       std::max(0.0, best.b - 12.0 * r), std::min(1.0, best.b + 12.0 * r),
       r / 20.0);
  return best;
}

/// One point of a rate-distortion-perception curve or surface. `perception`
/// is the constraint level of the sweep (+infinity when unconstrained).
struct RdpPoint {
  double distortion = 0.0;
  double perception = 0.0;
  double rate = 0.0;
};

struct SweepPoint {
  RdpPoint point;
  bool ok = false;         // a result was produced (no per-point error)
  bool converged = false;
  std::string error;       // failure description when !ok
};

/// Rates over a distortion grid at a fixed perception bound. Monotonicity
/// violations beyond tolerance_rate are flagged, not silently accepted.
struct RdpCurve {
  PerceptionBound perception = PerceptionBound::unconstrained();
  std::vector<SweepPoint> points;
  std::vector<std::size_t> monotonicity_flags;
};

/// Rates over a (distortion, perception) grid; one curve per perception
/// level, in grid order.
struct RdpSurface {
  std::vector<double> d_grid;
  std::vector<PerceptionBound> p_grid;
  std::vector<RdpCurve> curves;
};

namespace detail {

inline void require_sorted_grid(const std::vector<double>& grid, const char* name) {
  if (grid.empty()) throw Error(std::string(name) + " grid must be non-empty");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (grid[i] < grid[i - 1])
      throw Error(std::string(name) + " grid must be sorted ascending");
}

}  // namespace detail

/// Solves along an ascending distortion grid at fixed perception bound.
/// Each solve warm-starts from the previous grid point's channel (unless
/// disabled); per-point failures are recorded, never propagated.
inline RdpCurve sweep_curve(const Pmf& source, const DistortionMatrix& delta,
                            DivergenceKind div, PerceptionBound p_bound,
                            const std::vector<double>& d_grid,
                            const SolveOptions& opts = SolveOptions(),
                            bool warm_start = true) {
  detail::require_sorted_grid(d_grid, "distortion");
  RdpCurve curve;
  curve.perception = p_bound;
  curve.points.reserve(d_grid.size());
  std::optional<Channel> previous;
  const double p_level = p_bound.finite()
                             ? p_bound.value()
                             : std::numeric_limits<double>::infinity();
  for (double d : d_grid) {
    SweepPoint pt;
    pt.point.distortion = d;
    pt.point.perception = p_level;
    try {
      SolveResult res = solve(source, delta, div, d, p_bound, opts,
                              warm_start && previous ? &*previous : nullptr);
      pt.point.rate = res.rate;
      pt.ok = true;
      pt.converged = res.converged;
      previous = std::move(res.channel);
    } catch (const Error& e) {
      pt.point.rate = std::numeric_limits<double>::quiet_NaN();
      pt.error = e.what();
    }
    curve.points.push_back(std::move(pt));
  }
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    const SweepPoint& prev = curve.points[i - 1];
    const SweepPoint& cur = curve.points[i];
    if (prev.ok && cur.ok &&
        cur.point.rate > prev.point.rate + opts.tolerance_rate)
      curve.monotonicity_flags.push_back(i);
  }
  return curve;
}

/// Sweeps a full (distortion, perception) grid. The sequential default
/// warm-starts along the distortion axis; `parallel` evaluates grid points
/// concurrently and therefore requires warm-starting to be disabled.
inline RdpSurface sweep_surface(const Pmf& source, const DistortionMatrix& delta,
                                DivergenceKind div,
                                const std::vector<double>& d_grid,
                                const std::vector<PerceptionBound>& p_grid,
                                const SolveOptions& opts = SolveOptions(),
                                bool warm_start = true, bool parallel = false) {
  detail::require_sorted_grid(d_grid, "distortion");
  if (p_grid.empty()) throw Error("perception grid must be non-empty");
  for (std::size_t i = 1; i < p_grid.size(); ++i)
    if (p_grid[i] < p_grid[i - 1])
      throw Error("perception grid must be sorted ascending");
  if (parallel && warm_start)
    throw Error("parallel sweeps require warm-starting to be disabled");

  RdpSurface surface;
  surface.d_grid = d_grid;
  surface.p_grid = p_grid;
  surface.curves.resize(p_grid.size());
  const auto run_curve = [&](std::size_t i) {
    surface.curves[i] =
        sweep_curve(source, delta, div, p_grid[i], d_grid, opts, warm_start);
  };
  if (parallel) {
    detail::parallel_for(p_grid.size(), run_curve);
  } else {
    for (std::size_t i = 0; i < p_grid.size(); ++i) run_curve(i);
  }
  return surface;
}

}  // namespace rdp
