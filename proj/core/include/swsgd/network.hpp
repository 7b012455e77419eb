#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "swsgd/types.hpp"

namespace swsgd {

class Document;

enum class Activation { identity, sigmoid, tanh, softplus, relu, leaky_relu };

std::string to_string(Activation a);
Activation parse_activation(const std::string& name);

/// Entry-wise activation with closed-form derivative. At relu / leaky_relu
/// kinks the derivative is taken as 0 for relu and as the slope for leaky_relu
/// (left branch), so the a.e. gradient is deterministic.
struct ActivationFn {
  Activation kind = Activation::identity;
  double slope = 0.01;  // leaky_relu only

  double value(double z) const;
  double derivative(double z) const;
  double second_derivative(double z) const;
  /// relu / leaky_relu (and identity) are piecewise linear.
  bool piecewise_linear() const;
  /// identity, sigmoid, tanh, softplus.
  bool smooth() const;
};

/// One nonzero coefficient of the 3-tensor behind A_{n,i}(u):
/// [A_{n,i}(u) h]_row += coef * h[col] * u[param].
struct TensorEntry {
  int row = 0;
  int col = 0;
  Eigen::Index param = 0;
  double coef = 1.0;
};

/// One nonzero of B_n: [B_n u]_row += coef * u[param].
struct BiasEntry {
  int row = 0;
  Eigen::Index param = 0;
  double coef = 1.0;
};

/// A_{n,i} for a fixed (target, source) pair, stored as a sparse 3-tensor.
struct LayerLink {
  int target = 1;
  int source = 0;
  std::vector<TensorEntry> entries;
};

/// Contiguous block of u feeding one A_{n,i} or B_n (source == -1 marks a bias).
struct ParamBlock {
  int target = 1;
  int source = 0;
  Eigen::Index offset = 0;
  Eigen::Index size = 0;
};

/// Radii and smoothing width of the two ball indicators multiplying the raw network.
struct IndicatorShape {
  double r_u = 10.0;
  double r_x = 10.0;
  double eps = 0.5;
};

/// Options for the dense (disjoint-slice) layout.
struct DenseOptions {
  bool bias = true;
  /// Adds A_{n,i} for every i < n - 1 as well (skip connections).
  bool residual = false;
  std::uint64_t init_seed = 0;
};

/// Bounded recursive network T(u,x) = T̃(u,x) · 1^ε_{B(0,R_u)}(u) · 1^ε_{B(0,R_x)}(x)
/// with h_0 = x and h_n = a(Σ_{i<n} A_{n,i}(u) h_i + B_n u).
class NetworkSpec {
 public:
  NetworkSpec(std::vector<int> layer_dims, ActivationFn activation, Eigen::Index param_dim,
              std::vector<LayerLink> links, std::vector<std::vector<BiasEntry>> biases,
              IndicatorShape indicator, std::vector<ParamBlock> layout = {});

  /// Standard dense layers: each A_{n,i} reads a disjoint row-major d_n×d_i
  /// slice of u, each B_n a disjoint d_n slice.
  static NetworkSpec dense(std::vector<int> layer_dims, ActivationFn activation,
                           IndicatorShape indicator, DenseOptions options = {});

  /// Reads a [network] section: layer_dims, activation, leaky_slope, R_u, R_x,
  /// eps, bias, residual, init_seed.
  static NetworkSpec from_document(const Document& doc, const std::string& section = "network");
  void write_document(Document& doc, const std::string& section = "network") const;

  int depth() const noexcept { return static_cast<int>(layer_dims_.size()) - 1; }
  int input_dim() const noexcept { return layer_dims_.front(); }
  int output_dim() const noexcept { return layer_dims_.back(); }
  Eigen::Index param_dim() const noexcept { return param_dim_; }
  const std::vector<int>& layer_dims() const noexcept { return layer_dims_; }
  const ActivationFn& activation() const noexcept { return activation_; }
  const IndicatorShape& indicator() const noexcept { return indicator_; }
  const std::vector<ParamBlock>& layout() const noexcept { return layout_; }
  /// Links whose target is layer n (1-based layers).
  const std::vector<LayerLink>& links_into(int n) const { return links_[n]; }
  const std::vector<BiasEntry>& bias_into(int n) const { return biases_[n]; }
  bool residual() const noexcept { return residual_; }
  bool has_bias() const noexcept { return bias_; }
  std::uint64_t init_seed() const noexcept { return init_seed_; }

  /// Scaled Gaussian weights (std 1/sqrt(fan_in)), zero biases, drawn from
  /// init_seed and rescaled into the indicator plateau when necessary.
  Vector initial_parameters() const;

 private:
  std::vector<int> layer_dims_;
  ActivationFn activation_;
  Eigen::Index param_dim_;
  std::vector<std::vector<LayerLink>> links_;   // indexed by target layer
  std::vector<std::vector<BiasEntry>> biases_;  // indexed by target layer
  IndicatorShape indicator_;
  std::vector<ParamBlock> layout_;
  bool residual_ = false;
  bool bias_ = true;
  std::uint64_t init_seed_ = 0;
};

/// C^∞ bump g(((R+ε)² − ‖v‖²)/(4Rε)) with g(s) = f(s)/(f(s)+f(1−s)), f(s) = e^{−1/s}·[s>0].
double smooth_indicator(const Vector& v, double radius, double eps);
Vector smooth_indicator_gradient(const Vector& v, double radius, double eps);

/// Intermediate values of one evaluation, reused by the reverse pass.
struct ForwardPass {
  std::vector<Vector> pre;   // z_n, n = 1..N (pre[0] unused)
  std::vector<Vector> post;  // h_n, n = 0..N
  double gate_u = 1.0;
  double gate_x = 1.0;
  Vector output;  // T(u,x)
};

ForwardPass evaluate(const NetworkSpec& spec, const Vector& u, const Vector& x);

/// T(u, x).
Vector forward(const NetworkSpec& spec, const Vector& u, const Vector& x);

/// Applies forward to every row of x (n×d_x) and returns the n×d_y outputs.
Matrix forward_rows(const NetworkSpec& spec, const Vector& u, const Matrix& x);

/// Reverse-mode cotangent pull-back: returns (∂T/∂u)^⊤ w and (∂T/∂x)^⊤ w.
struct Pullback {
  Vector du;
  Vector dx;
};
Pullback pullback(const NetworkSpec& spec, const ForwardPass& pass, const Vector& u,
                  const Vector& x, const Vector& cotangent);

/// (∂T/∂u)^⊤ w without the x part.
Vector vjp_u(const NetworkSpec& spec, const Vector& u, const Vector& x, const Vector& cotangent);

/// d_y × d_u parameter Jacobian.
Matrix jacobian_u(const NetworkSpec& spec, const Vector& u, const Vector& x);
/// d_y × d_x input Jacobian.
Matrix jacobian_x(const NetworkSpec& spec, const Vector& u, const Vector& x);

/// Smallest |z| over all pre-activations; used to keep relu probes away from kinks.
double min_abs_preactivation(const NetworkSpec& spec, const Vector& u, const Vector& x);

struct NetworkProbe {
  double value = 0.0;
  int samples = 0;
};

/// Global Lipschitz constant of (u,x) ↦ T(u,x): the largest sampled operator
/// norm of the joint Jacobian over B(0,R_u+ε)×B(0,R_x+ε), times `safety`.
NetworkProbe estimate_lipschitz(const NetworkSpec& spec, Rng& rng, int samples = 4096,
                                double safety = 1.1);

/// Largest sampled ‖T(u,x)‖ with x on the given support and u in B(0,R_u+ε).
NetworkProbe estimate_output_bound(const NetworkSpec& spec, const Matrix& support, Rng& rng,
                                   int samples = 4096);

/// Constant M bounding |∂²(T_a T_b)/∂u_i∂u_j| and ‖∂²T/∂u_i∂u_j‖ over sampled
/// points (x from the support, u in the outer ball), by central differences of
/// the analytic Jacobian.
NetworkProbe estimate_second_derivative_bound(const NetworkSpec& spec, const Matrix& support,
                                              Rng& rng, int samples = 256, double h = 1e-5);

}  // namespace swsgd
