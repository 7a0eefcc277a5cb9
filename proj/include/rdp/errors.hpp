#pragma once

#include <stdexcept>
#include <string>

namespace rdp {

/// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyAlphabet : public Error {
 public:
  EmptyAlphabet() : Error("pmf must have at least one symbol") {}
};

class NegativeProbability : public Error {
 public:
  explicit NegativeProbability(std::size_t index, double value)
      : Error("probability at index " + std::to_string(index) +
              " is negative (" + std::to_string(value) + ")") {}
};

class NotNormalized : public Error {
 public:
  explicit NotNormalized(double sum)
      : Error("probabilities sum to " + std::to_string(sum) +
              " (deviation " + std::to_string(sum - 1.0) +
              " exceeds tolerance)") {}
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidTernary : public Error {
 public:
  InvalidTernary(double alpha, double beta)
      : Error("invalid ternary probabilities (" + std::to_string(alpha) +
              ", " + std::to_string(beta) + "): need alpha >= 0, beta >= 0, "
              "alpha + beta <= 1") {}
};

class Infeasible : public Error {
 public:
  using Error::Error;
};

class InfeasibleOnGrid : public Error {
 public:
  using Error::Error;
};

class TrialBudgetTooSmall : public Error {
 public:
  explicit TrialBudgetTooSmall(int trials)
      : Error("trial budget " + std::to_string(trials) +
              " is below the minimum of 1000") {}
};

class VerificationFailed : public Error {
 public:
  using Error::Error;
};

}  // namespace rdp
