#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace swsgd {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Every random draw in the library goes through one of these, seeded explicitly.
using Rng = std::mt19937_64;

Rng make_rng(std::uint64_t seed);

/// Derives an independent stream seed from a parent seed and a stream tag
/// (splitmix64 mixing). Used for diagnostics that must not perturb the
/// trajectory's own stream, and for per-worker generators.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised when an iterate stops being finite; carries the offending step.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, long step)
      : std::runtime_error(what), step_(step) {}
  long step() const noexcept { return step_; }

 private:
  long step_;
};

// ‖X‖_{∞,2}: largest Euclidean row norm.
double max_row_norm(const Matrix& m);

}  // namespace swsgd
