#pragma once

#include <random>
#include <vector>

#include "rdp/prob.hpp"

namespace testutil {

// Deterministic instance generators for property tests; independent of the
// library's own seeding helpers.
inline rdp::Pmf random_pmf(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> unif(0.01, 1.0);
  std::vector<double> v(n);
  double sum = 0.0;
  for (double& x : v) {
    x = unif(rng);
    sum += x;
  }
  for (double& x : v) x /= sum;
  return rdp::Pmf(std::move(v));
}

inline rdp::Channel random_channel(std::mt19937_64& rng, std::size_t n_in,
                                   std::size_t n_out) {
  std::uniform_real_distribution<double> unif(0.01, 1.0);
  std::vector<std::vector<double>> rows(n_in);
  for (auto& row : rows) {
    row.resize(n_out);
    double sum = 0.0;
    for (double& x : row) {
      x = unif(rng);
      sum += x;
    }
    for (double& x : row) x /= sum;
  }
  return rdp::Channel(std::move(rows));
}

}  // namespace testutil
