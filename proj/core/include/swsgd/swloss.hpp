#pragma once

#include <vector>

#include "swsgd/measures.hpp"
#include "swsgd/network.hpp"
#include "swsgd/types.hpp"

namespace swsgd {

/// Order p ∈ [1, ∞) of the sliced loss SW_p^p; p = 2 by default.
class OrderP {
 public:
  constexpr OrderP() = default;
  explicit OrderP(double p);
  double value() const noexcept { return p_; }
  bool quadratic() const noexcept { return p_ == 2.0; }

 private:
  double p_ = 2.0;
};

using Permutation = std::vector<Eigen::Index>;

/// perm[k] is the index of the k-th smallest entry; ties keep index order.
Permutation sorting_permutation(const Vector& v);

/// σ_θ^{X,Y} = σ_Y ∘ σ_X^{-1}: x_k is matched with y_{σ[k]} (same rank along θ).
Permutation assignment_sigma(const Matrix& x, const Matrix& y, const Vector& theta);

/// W_p^p between the projections of the uniform point clouds X and Y on θ.
double w_theta_p(const Matrix& x, const Matrix& y, const Vector& theta, OrderP p = {});
/// Specialized p = 2 route (squared residuals, no pow).
double w_theta_quadratic(const Matrix& x, const Matrix& y, const Vector& theta);

/// a.e. gradient of w_θ^{(p)}(·, Y) with respect to X (n×d_y).
Matrix grad_w_theta(const Matrix& x, const Matrix& y, const Vector& theta, OrderP p = {});
/// (2/n) θθ^⊤(x_k − y_σ(k)) per row.
Matrix grad_w_theta_quadratic(const Matrix& x, const Matrix& y, const Vector& theta);

/// Minibatch sample loss f(u, X, Y, θ): mean over the batch directions of
/// w_θ(T(u,X), Y).
double sample_loss(const NetworkSpec& spec, const Vector& u, const SampleBatch& batch,
                   OrderP p = {});

/// a.e. gradient φ(u, z) of the sample loss (general p, one reverse pass per point).
Vector grad_phi(const NetworkSpec& spec, const Vector& u, const SampleBatch& batch,
                OrderP p = {});
/// Quadratic form (2/n) Σ J_k^⊤ θθ^⊤ (T(u,x_k) − y_σ(k)) using full Jacobians.
Vector grad_phi_quadratic(const NetworkSpec& spec, const Vector& u, const SampleBatch& batch);

/// Loss value and a.e. gradient from one forward sweep.
struct LossAndGradient {
  double loss = 0.0;
  Vector gradient;
};
LossAndGradient sample_loss_and_gradient(const NetworkSpec& spec, const Vector& u,
                                         const SampleBatch& batch, OrderP p = {});

/// Smallest gap between consecutive sorted projections of T(u,X) and of Y
/// along every batch direction, and smallest |residual| (kinks for p = 1).
double min_sorting_gap(const NetworkSpec& spec, const Vector& u, const SampleBatch& batch);

/// How the population expectation over (X, Y, θ) is evaluated.
struct PopulationMode {
  /// Monte-Carlo batches drawn from the generator.
  int num_mc = 64;
  int directions = 1;
  /// Enumerate every (X, Y) support combination with its product weight and
  /// integrate θ over a fixed grid (1-D: θ = 1; 2-D: 256 angles; 3-D:
  /// 1024-point Fibonacci sphere). Refused when the enumeration is too large.
  bool exhaustive = false;
  long long max_combinations = 1 << 20;
};

struct LossEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Fixed direction grid used by the exhaustive mode for d_y ∈ {1, 2, 3}.
Matrix direction_grid(int dim);

/// Number of (X, Y) combinations enumerated by the exhaustive mode.
long long exhaustive_combinations(const DiscreteMeasure& mx, const DiscreteMeasure& my, int n);

/// Population loss F(u) (Monte-Carlo mean ± standard error, or exact
/// enumeration with std_error 0).
LossEstimate estimate_population_loss(const NetworkSpec& spec, const Vector& u,
                                      const DiscreteMeasure& mx, const DiscreteMeasure& my, int n,
                                      const PopulationMode& mode, Rng& rng, OrderP p = {});

/// Average of φ over the same population surrogate.
Vector estimate_population_gradient(const NetworkSpec& spec, const Vector& u,
                                    const DiscreteMeasure& mx, const DiscreteMeasure& my, int n,
                                    const PopulationMode& mode, Rng& rng, OrderP p = {});

/// K_w^{(p)}(r, X, Y) = p n (r + ‖X‖_{∞,2} + ‖Y‖_{∞,2})^{p−1}.
double lipschitz_K_w(double r, const Matrix& x, const Matrix& y, OrderP p = {});

/// K_f^{(p)}(ε, u0, X, Y) = p n L (εL + ‖T(u0,X)‖_{∞,2} + ‖Y‖_{∞,2})^{p−1}.
double lipschitz_K_f(double eps, const NetworkSpec& spec, const Vector& u0, const Matrix& x,
                     const Matrix& y, double lipschitz_t, OrderP p = {});

/// K_F^{(p)}(ε, u0) = p n L E[(εL + ‖T(u0,X)‖_{∞,2} + ‖Y‖_{∞,2})^{p−1}], the
/// expectation by Monte Carlo (or enumeration in exhaustive mode).
double estimate_K_F(double eps, const NetworkSpec& spec, const Vector& u0,
                    const DiscreteMeasure& mx, const DiscreteMeasure& my, int n,
                    double lipschitz_t, const PopulationMode& mode, Rng& rng, OrderP p = {});

/// Step-size threshold 1/((d_y² + 2R_y) d_u M) below which the SGD kernel
/// preserves absolute continuity.
double alpha_zero(int output_dim, double radius_y, Eigen::Index param_dim, double m_bound);

}  // namespace swsgd
