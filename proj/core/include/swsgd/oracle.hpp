#pragma once

#include <functional>
#include <string>

#include "swsgd/types.hpp"

// Straight-line reference computations. Nothing in here calls into the
// sorting, loss or gradient code it is used to check.
namespace swsgd::oracle {

using ScalarField = std::function<double(const Vector&)>;

struct ProbeReport {
  double max_value = 0.0;
  Vector argmax_a;
  Vector argmax_b;
  long samples = 0;

  std::string to_json() const;
};

/// min over all n! matchings π of (1/n) Σ_k |θ^⊤x_k − θ^⊤y_π(k)|^p. Refuses n > 8.
double wasserstein_1d_bruteforce(const Matrix& x, const Matrix& y, const Vector& theta, double p);

/// Central differences (f(u + h e_i) − f(u − h e_i)) / 2h.
Vector fd_gradient(const ScalarField& fun, const Vector& u, double h = 1e-5);

/// max|a − b| / max(1, ‖a‖₂), the relative error used by every FD check.
double relative_error(const Vector& analytic, const Vector& reference);

/// Largest |f(u) − f(u')| / ‖u − u'‖ over pairs drawn uniformly in B(center, eps);
/// pairs closer than 1e-9 are redrawn.
ProbeReport lipschitz_probe(const ScalarField& fun, const Vector& center, double eps,
                            long num_pairs, Rng& rng);

}  // namespace swsgd::oracle
