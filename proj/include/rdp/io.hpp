#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rdp/errors.hpp"
#include "rdp/measures.hpp"
#include "rdp/prob.hpp"
#include "rdp/solver.hpp"
#include "rdp/theorems.hpp"

namespace rdp {

/// Fixed-width significant-digit formatting for CSV output; 12 digits keep
/// golden files stable across platforms while computation stays in full
/// double precision.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return std::string(buf);
}

inline nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error("malformed JSON in " + path + ": " + e.what());
  }
  return j;
}

/// Pmf file format: a JSON array of numbers.
inline Pmf load_pmf(const std::string& path) {
  const nlohmann::json j = load_json_file(path);
  if (!j.is_array() || j.empty())
    throw Error("pmf file must be a non-empty JSON array: " + path);
  std::vector<double> probs;
  probs.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number()) throw Error("pmf entries must be numbers: " + path);
    probs.push_back(v.get<double>());
  }
  return Pmf(std::move(probs));
}

/// Matrix file format: a JSON array of arrays, row-major, rows = inputs.
inline std::vector<std::vector<double>> load_matrix(const std::string& path) {
  const nlohmann::json j = load_json_file(path);
  if (!j.is_array() || j.empty())
    throw Error("matrix file must be a non-empty JSON array of arrays: " + path);
  std::vector<std::vector<double>> rows;
  rows.reserve(j.size());
  for (const auto& row : j) {
    if (!row.is_array() || row.empty())
      throw Error("matrix rows must be non-empty JSON arrays: " + path);
    std::vector<double> r;
    r.reserve(row.size());
    for (const auto& v : row) {
      if (!v.is_number()) throw Error("matrix entries must be numbers: " + path);
      r.push_back(v.get<double>());
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

/// Solve options as a JSON object; every field is optional and unknown keys
/// are rejected to catch typos.
inline SolveOptions solve_options_from_json(const nlohmann::json& j) {
  SolveOptions opts;
  if (!j.is_object()) throw Error("options must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "max_outer_iters") opts.max_outer_iters = value.get<int>();
    else if (key == "max_inner_iters") opts.max_inner_iters = value.get<int>();
    else if (key == "penalty_initial") opts.penalty_initial = value.get<double>();
    else if (key == "penalty_growth") opts.penalty_growth = value.get<double>();
    else if (key == "step_size_initial") opts.step_size_initial = value.get<double>();
    else if (key == "tolerance_rate") opts.tolerance_rate = value.get<double>();
    else if (key == "tolerance_constraint") opts.tolerance_constraint = value.get<double>();
    else if (key == "seed") opts.seed = value.get<std::uint64_t>();
    else if (key == "restarts") opts.restarts = value.get<int>();
    else throw Error("unknown solve option: " + key);
  }
  opts.validate();
  return opts;
}

inline SolveOptions load_solve_options(const std::string& path) {
  return solve_options_from_json(load_json_file(path));
}

inline nlohmann::json to_json(const Channel& channel) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t x = 0; x < channel.input_size(); ++x) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t y = 0; y < channel.output_size(); ++y) row.push_back(channel(x, y));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline nlohmann::json to_json(const SolveResult& result) {
  return nlohmann::json{{"rate", result.rate},
                        {"distortion", result.distortion},
                        {"perception", result.perception},
                        {"converged", result.converged},
                        {"iterations", result.iterations},
                        {"residual_distortion", result.constraint_residuals[0]},
                        {"residual_perception", result.constraint_residuals[1]},
                        {"channel", to_json(result.channel)}};
}

inline nlohmann::json to_json(const PropertyReport& report) {
  return nlohmann::json{{"property", report.property_name},
                        {"instances_checked", report.instances_checked},
                        {"max_violation", report.max_violation},
                        {"tolerance", report.tolerance},
                        {"pass", report.pass},
                        {"worst_case_input", report.worst_case_input}};
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

}  // namespace rdp
