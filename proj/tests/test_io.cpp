#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "rdp/io.hpp"

using Catch::Approx;
using namespace rdp;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

}  // namespace

TEST_CASE("pmf files") {
  const std::string path = temp_path("rdp_io_pmf.json");
  write_file(path, "[0.9, 0.1]");
  const Pmf pmf = load_pmf(path);
  REQUIRE(pmf.size() == 2);
  REQUIRE(pmf[0] == Approx(0.9));

  write_file(path, "[0.9, 0.5]");
  REQUIRE_THROWS_AS(load_pmf(path), NotNormalized);

  write_file(path, "{\"not\": \"an array\"}");
  REQUIRE_THROWS_AS(load_pmf(path), Error);

  write_file(path, "[0.9, 0.1");
  REQUIRE_THROWS_AS(load_pmf(path), Error);

  REQUIRE_THROWS_AS(load_pmf(temp_path("rdp_io_does_not_exist.json")), Error);
  std::remove(path.c_str());
}

TEST_CASE("matrix files") {
  const std::string path = temp_path("rdp_io_matrix.json");
  write_file(path, "[[0, 1], [1, 0]]");
  const auto rows = load_matrix(path);
  REQUIRE(rows.size() == 2);
  REQUIRE(rows[0][1] == 1.0);
  REQUIRE_NOTHROW(DistortionMatrix(rows));

  write_file(path, "[[0, \"x\"], [1, 0]]");
  REQUIRE_THROWS_AS(load_matrix(path), Error);
  std::remove(path.c_str());
}

TEST_CASE("solve options files") {
  const std::string path = temp_path("rdp_io_options.json");

  // All fields optional; defaults fill the gaps.
  write_file(path, "{}");
  const SolveOptions defaults = load_solve_options(path);
  REQUIRE(defaults.tolerance_rate == Approx(1e-4));
  REQUIRE(defaults.tolerance_constraint == Approx(1e-6));

  write_file(path, R"({"seed": 42, "restarts": 5, "penalty_growth": 3.0})");
  const SolveOptions custom = load_solve_options(path);
  REQUIRE(custom.seed == 42);
  REQUIRE(custom.restarts == 5);
  REQUIRE(custom.penalty_growth == Approx(3.0));
  REQUIRE(custom.max_outer_iters == SolveOptions().max_outer_iters);

  write_file(path, R"({"sede": 42})");
  REQUIRE_THROWS_AS(load_solve_options(path), Error);

  write_file(path, R"({"penalty_growth": 0.5})");
  REQUIRE_THROWS_AS(load_solve_options(path), Error);
  std::remove(path.c_str());
}

TEST_CASE("12 significant digit formatting") {
  REQUIRE(format_double(0.1) == "0.1");
  REQUIRE(format_double(1.0 / 3.0) == "0.333333333333");
  REQUIRE(format_double(0.0) == "0");
  REQUIRE(format_double(1234567.25) == "1234567.25");
}
