// Command-line front end: closed-form Bernoulli curves, numerical solves,
// surface sweeps, the verification suite, and the block-coding simulator.
//
// Exit codes: 0 success, 1 property failure, 2 bad input, 3 infeasible,
// 4 not converged.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rdp/bernoulli.hpp"
#include "rdp/io.hpp"
#include "rdp/measures.hpp"
#include "rdp/prob.hpp"
#include "rdp/solver.hpp"
#include "rdp/theorems.hpp"
#include "rdp/verify.hpp"
#include "rdp/version.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPropertyFailure = 1;
constexpr int kExitBadInput = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitNotConverged = 4;

std::vector<double> parse_grid(const std::string& text) {
  double start = 0.0, stop = 0.0;
  long count = 0;
  char c1 = 0, c2 = 0;
  std::istringstream in(text);
  if (!(in >> start >> c1 >> stop >> c2 >> count) || c1 != ':' || c2 != ':' ||
      !in.eof())
    throw rdp::Error("grid must be start:stop:count, got '" + text + "'");
  if (count < 1) throw rdp::Error("grid count must be at least 1");
  if (start > stop) throw rdp::Error("grid start must not exceed stop");
  return rdp::detail::linspace(start, stop, static_cast<std::size_t>(count));
}

rdp::PerceptionBound parse_perception(const std::string& text) {
  if (text == "inf" || text == "infinity")
    return rdp::PerceptionBound::unconstrained();
  std::size_t used = 0;
  const double value = std::stod(text, &used);
  if (used != text.size())
    throw rdp::Error("perception must be a number or 'inf', got '" + text + "'");
  return rdp::PerceptionBound::at(value);
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> values;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) values.push_back(std::stod(item));
  if (values.empty()) throw rdp::Error("expected a comma-separated value list");
  return values;
}

rdp::DistortionMatrix load_distortion(const std::string& arg, std::size_t n_source) {
  if (arg == "hamming") return rdp::hamming_matrix(n_source);
  if (arg.rfind("sqerr:", 0) == 0) {
    std::vector<double> values = parse_values(arg.substr(6));
    if (values.size() != n_source)
      throw rdp::Error("sqerr values must match the source alphabet size");
    return rdp::squared_error_matrix(values, values);
  }
  rdp::DistortionMatrix delta(rdp::load_matrix(arg));
  if (delta.source_size() != n_source)
    throw rdp::Error("distortion matrix rows must match the source alphabet");
  return delta;
}

rdp::DivergenceKind parse_divergence(const std::string& text) {
  if (text == "tv") return rdp::DivergenceKind::TotalVariation;
  if (text == "kl") return rdp::DivergenceKind::KullbackLeibler;
  throw rdp::Error("divergence must be 'tv' or 'kl', got '" + text + "'");
}

std::optional<std::uint64_t> env_seed_override() {
  const char* env = std::getenv("RDP_SEED");
  if (!env) return std::nullopt;
  return std::stoull(env);
}

std::string perception_label(const rdp::PerceptionBound& p) {
  return p.finite() ? rdp::format_double(p.value()) : std::string("inf");
}

int cmd_bernoulli_curve(double p, const std::vector<std::string>& perception_args,
                        const std::string& d_grid_arg, const std::string& out) {
  if (!(p > 0.0) || p > 0.5)
    throw rdp::Error("p must lie in (0, 0.5] for bernoulli-curve");
  const std::vector<double> d_grid = parse_grid(d_grid_arg);

  std::vector<rdp::PerceptionBound> levels;
  if (perception_args.empty()) {
    levels = {rdp::PerceptionBound::unconstrained(), rdp::PerceptionBound::at(p / 2.0),
              rdp::PerceptionBound::at(p / 4.0), rdp::PerceptionBound::at(0.0)};
  } else {
    for (const std::string& arg : perception_args)
      levels.push_back(parse_perception(arg));
  }

  const rdp::BernoulliSpec spec(p);
  nlohmann::json meta{{"p", p},
                      {"version", rdp::kVersion},
                      {"d_grid", d_grid},
                      {"perception_levels", nlohmann::json::array()},
                      {"files", nlohmann::json::array()},
                      {"curves", nlohmann::json::array()}};

  for (const rdp::PerceptionBound& level : levels) {
    const std::string label = perception_label(level);
    std::ostringstream csv;
    csv << "D,R,region,a,b\n";
    nlohmann::json points = nlohmann::json::array();
    for (double d : d_grid) {
      const rdp::BernoulliSolution sol = rdp::rdp_rate(spec, d, level);
      csv << rdp::format_double(d) << ',' << rdp::format_double(sol.rate) << ','
          << rdp::to_string(sol.region) << ',' << rdp::format_double(sol.a)
          << ',' << rdp::format_double(sol.b) << '\n';
      points.push_back({{"d", d},
                        {"rate", sol.rate},
                        {"region", rdp::to_string(sol.region)},
                        {"a", sol.a},
                        {"b", sol.b}});
    }
    const std::string filename = out + "_P" + label + ".csv";
    rdp::write_text_file(filename, csv.str());
    meta["perception_levels"].push_back(label);
    meta["files"].push_back(filename);
    meta["curves"].push_back({{"perception", label}, {"points", std::move(points)}});
  }
  rdp::write_text_file(out + ".json", meta.dump(2) + "\n");
  return kExitOk;
}

int cmd_solve(const std::string& source_path, const std::string& distortion_arg,
              const std::string& divergence_arg, double d_bound,
              const std::string& perception_arg,
              const std::string& options_path, const std::string& out,
              std::optional<std::uint64_t> seed_override) {
  const rdp::Pmf source = rdp::load_pmf(source_path);
  const rdp::DistortionMatrix delta = load_distortion(distortion_arg, source.size());
  const rdp::DivergenceKind div = parse_divergence(divergence_arg);
  const rdp::PerceptionBound p_bound = parse_perception(perception_arg);
  rdp::SolveOptions opts;
  if (!options_path.empty()) opts = rdp::load_solve_options(options_path);
  if (seed_override) opts.seed = *seed_override;

  const rdp::SolveResult result = rdp::solve(source, delta, div, d_bound, p_bound, opts);
  rdp::write_text_file(out, rdp::to_json(result).dump(2) + "\n");
  if (!result.converged) {
    std::cerr << "not converged: residuals (distortion "
              << result.constraint_residuals[0] << ", perception "
              << result.constraint_residuals[1] << ")\n";
    return kExitNotConverged;
  }
  return kExitOk;
}

int cmd_surface(const std::string& source_path, const std::string& distortion_arg,
                const std::string& divergence_arg, const std::string& d_grid_arg,
                const std::string& p_grid_arg, const std::string& options_path,
                bool no_warm_start, bool parallel, const std::string& out,
                std::optional<std::uint64_t> seed_override) {
  const rdp::Pmf source = rdp::load_pmf(source_path);
  const rdp::DistortionMatrix delta = load_distortion(distortion_arg, source.size());
  const rdp::DivergenceKind div = parse_divergence(divergence_arg);
  const std::vector<double> d_grid = parse_grid(d_grid_arg);
  std::vector<rdp::PerceptionBound> p_grid;
  for (double v : parse_grid(p_grid_arg)) p_grid.push_back(rdp::PerceptionBound::at(v));
  rdp::SolveOptions opts;
  if (!options_path.empty()) opts = rdp::load_solve_options(options_path);
  if (seed_override) opts.seed = *seed_override;
  if (parallel && !no_warm_start)
    throw rdp::Error("--parallel requires --no-warm-start");

  const rdp::RdpSurface surface = rdp::sweep_surface(
      source, delta, div, d_grid, p_grid, opts, !no_warm_start, parallel);

  std::ostringstream csv;
  csv << "D,P,R,converged\n";
  std::size_t failed = 0, total = 0;
  for (const rdp::RdpCurve& curve : surface.curves) {
    for (const rdp::SweepPoint& pt : curve.points) {
      ++total;
      if (!pt.ok) ++failed;
      csv << rdp::format_double(pt.point.distortion) << ','
          << rdp::format_double(pt.point.perception) << ','
          << (pt.ok ? rdp::format_double(pt.point.rate) : std::string("nan")) << ','
          << (pt.ok && pt.converged ? '1' : '0') << '\n';
    }
  }
  rdp::write_text_file(out, csv.str());
  if (failed == total) {
    std::cerr << "every grid point failed; first error: "
              << surface.curves.front().points.front().error << "\n";
    return kExitNotConverged;
  }
  return kExitOk;
}

int cmd_verify(double p, const std::string& suite_arg, std::uint64_t seed,
               const std::string& out) {
  if (suite_arg != "full" && suite_arg != "fast")
    throw rdp::Error("suite must be 'full' or 'fast'");
  const bool full = suite_arg == "full";
  const rdp::VerifySuite suite = rdp::run_verify_suite(p, full, seed);

  nlohmann::json checks = nlohmann::json::array();
  for (const rdp::SuiteCheck& check : suite.checks) {
    nlohmann::json j = rdp::to_json(check.report);
    j["skipped"] = check.skipped;
    if (!check.note.empty()) j["note"] = check.note;
    checks.push_back(std::move(j));
  }
  const nlohmann::json report{{"suite", suite_arg},
                              {"p", p},
                              {"seed", seed},
                              {"version", rdp::kVersion},
                              {"all_pass", suite.all_pass()},
                              {"checks", std::move(checks)}};
  rdp::write_text_file(out, report.dump(2) + "\n");

  for (const rdp::SuiteCheck& check : suite.checks) {
    const char* status = check.skipped ? "SKIP" : (check.report.pass ? "PASS" : "FAIL");
    std::cout << "[" << status << "] " << check.report.property_name << "\n";
  }
  return suite.all_pass() ? kExitOk : kExitPropertyFailure;
}

int cmd_simulate(double p, const std::vector<int>& lengths, double rate,
                 int trials, std::uint64_t seed, double codebook_p,
                 const std::string& out) {
  if (!(p > 0.0) || !(p < 1.0))
    throw rdp::Error("p must lie strictly inside (0, 1)");
  std::ostringstream csv;
  csv << "n,rate,empirical_distortion,empirical_perception,"
         "closed_form_rate_at_point,slack\n";
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    rdp::BlockCodeSpec spec;
    spec.n = lengths[i];
    spec.rate = rate;
    spec.trials = trials;
    spec.codebook_seed = rdp::detail::seed_split(seed, i);
    spec.codebook_distribution = rdp::Pmf::bernoulli(codebook_p);
    const rdp::BlockCodeResult res = rdp::simulate_block_code(spec, p);
    csv << lengths[i] << ',' << rdp::format_double(rate) << ','
        << rdp::format_double(res.empirical_distortion) << ','
        << rdp::format_double(res.empirical_perception) << ','
        << rdp::format_double(res.closed_form_rate) << ','
        << rdp::format_double(res.slack) << '\n';
  }
  rdp::write_text_file(out, csv.str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rate-distortion-perception toolkit"};
  app.require_subcommand(1);

  // bernoulli-curve
  auto* bern = app.add_subcommand(
      "bernoulli-curve", "closed-form R(D,P) curves for a Bernoulli source");
  double bern_p = 0.1;
  std::vector<std::string> bern_perception;
  std::string bern_d_grid = "0:0.2:101";
  std::string bern_out;
  bern->add_option("--p", bern_p, "source parameter in (0, 0.5]")->required();
  bern->add_option("--perception", bern_perception,
                   "perception levels (numbers or 'inf'); default inf,p/2,p/4,0")
      ->delimiter(',');
  bern->add_option("--d-grid", bern_d_grid, "distortion grid start:stop:count");
  bern->add_option("--out", bern_out, "output path prefix")->required();

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "numerical R(D,P) at one point");
  std::string solve_source, solve_distortion, solve_divergence = "tv";
  double solve_d = 0.0;
  std::string solve_perception = "inf", solve_options, solve_out;
  solve_cmd->add_option("--source", solve_source, "pmf JSON file")->required();
  solve_cmd->add_option("--distortion", solve_distortion,
                        "matrix JSON file, 'hamming', or 'sqerr:<values>'")
      ->required();
  solve_cmd->add_option("--divergence", solve_divergence, "'tv' or 'kl'");
  solve_cmd->add_option("--d", solve_d, "distortion bound")->required();
  solve_cmd->add_option("--perception", solve_perception, "perception bound or 'inf'");
  solve_cmd->add_option("--options", solve_options, "solve options JSON file");
  solve_cmd->add_option("--out", solve_out, "output JSON path")->required();

  // surface
  auto* surface_cmd = app.add_subcommand("surface", "R(D,P) over a grid, long CSV");
  std::string surf_source, surf_distortion, surf_divergence = "tv";
  std::string surf_d_grid, surf_p_grid, surf_options, surf_out;
  bool surf_no_warm = false, surf_parallel = false;
  surface_cmd->add_option("--source", surf_source, "pmf JSON file")->required();
  surface_cmd->add_option("--distortion", surf_distortion,
                          "matrix JSON file, 'hamming', or 'sqerr:<values>'")
      ->required();
  surface_cmd->add_option("--divergence", surf_divergence, "'tv' or 'kl'");
  surface_cmd->add_option("--d-grid", surf_d_grid, "distortion grid start:stop:count")
      ->required();
  surface_cmd->add_option("--p-grid", surf_p_grid, "perception grid start:stop:count")
      ->required();
  surface_cmd->add_option("--options", surf_options, "solve options JSON file");
  surface_cmd->add_flag("--no-warm-start", surf_no_warm,
                        "solve grid points independently");
  surface_cmd->add_flag("--parallel", surf_parallel,
                        "evaluate concurrently (requires --no-warm-start)");
  surface_cmd->add_option("--out", surf_out, "output CSV path")->required();

  // verify
  auto* verify_cmd = app.add_subcommand("verify", "run the property suite");
  double verify_p = 0.1;
  std::string verify_suite = "full", verify_out;
  std::uint64_t verify_seed = 1;
  verify_cmd->add_option("--p", verify_p, "Bernoulli parameter for the suite");
  verify_cmd->add_option("--suite", verify_suite, "'full' or 'fast'");
  verify_cmd->add_option("--seed", verify_seed, "suite seed");
  verify_cmd->add_option("--out", verify_out, "report JSON path")->required();

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "block-coding converse simulation");
  double sim_p = 0.1, sim_rate = 0.0, sim_codebook = 0.5;
  std::vector<int> sim_n;
  int sim_trials = 10000;
  std::uint64_t sim_seed = 1;
  std::string sim_out;
  sim_cmd->add_option("--p", sim_p, "source parameter")->required();
  sim_cmd->add_option("--n", sim_n, "block lengths")->required()->delimiter(',');
  sim_cmd->add_option("--rate", sim_rate, "code rate in bits per symbol")->required();
  sim_cmd->add_option("--trials", sim_trials, "Monte Carlo trials (>= 1000)");
  sim_cmd->add_option("--seed", sim_seed, "simulation seed");
  sim_cmd->add_option("--codebook", sim_codebook,
                      "probability of a 1 in codebook draws");
  sim_cmd->add_option("--out", sim_out, "output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitBadInput;
  }

  try {
    const std::optional<std::uint64_t> env_seed = env_seed_override();
    if (bern->parsed())
      return cmd_bernoulli_curve(bern_p, bern_perception, bern_d_grid, bern_out);
    if (solve_cmd->parsed())
      return cmd_solve(solve_source, solve_distortion, solve_divergence, solve_d,
                       solve_perception, solve_options, solve_out, env_seed);
    if (surface_cmd->parsed())
      return cmd_surface(surf_source, surf_distortion, surf_divergence, surf_d_grid,
                         surf_p_grid, surf_options, surf_no_warm, surf_parallel,
                         surf_out, env_seed);
    if (verify_cmd->parsed())
      return cmd_verify(verify_p, verify_suite,
                        env_seed.value_or(verify_seed), verify_out);
    if (sim_cmd->parsed())
      return cmd_simulate(sim_p, sim_n, sim_rate, sim_trials,
                          env_seed.value_or(sim_seed), sim_codebook, sim_out);
  } catch (const rdp::Infeasible& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const rdp::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadInput;
  }
  return kExitBadInput;
}
