#pragma once

#include <filesystem>
#include <vector>

#include "swsgd/types.hpp"

namespace swsgd {

/// Weighted point cloud: rows of `points` are support atoms, `weights` sum to one.
class DiscreteMeasure {
 public:
  /// Uniform weights.
  explicit DiscreteMeasure(Matrix points);
  /// Weights must be nonnegative with a positive total; they are renormalized
  /// so the stored vector sums to 1 within 1e-12.
  DiscreteMeasure(Matrix points, Vector weights);

  static DiscreteMeasure dirac(const Vector& atom);

  /// One atom per row; an optional trailing column is read as the weight when
  /// `weighted` is true.
  static DiscreteMeasure load_csv(const std::filesystem::path& path, bool weighted = false);

  const Matrix& points() const noexcept { return points_; }
  const Vector& weights() const noexcept { return weights_; }
  Eigen::Index size() const noexcept { return points_.rows(); }
  Eigen::Index dim() const noexcept { return points_.cols(); }

  /// Index of one atom drawn by weight.
  Eigen::Index draw_index(Rng& rng) const;

  /// max_k ‖x_k‖₂ over the support (R_x / R_y).
  double support_radius() const;

 private:
  void build_sampler();

  Matrix points_;
  Vector weights_;
  std::vector<double> cumulative_;
};

/// One stochastic draw z = (X, Y, θ): n input rows, n target rows and L unit directions.
struct SampleBatch {
  Matrix x;
  Matrix y;
  Matrix thetas;

  Eigen::Index n() const noexcept { return x.rows(); }
  Eigen::Index directions() const noexcept { return thetas.rows(); }
};

/// Uniform draw on S^{dim-1} (normalized isotropic Gaussian).
Vector sample_unit_sphere(int dim, Rng& rng);

/// Uniform draw in the closed Euclidean ball B(center, radius).
Vector sample_ball(const Vector& center, double radius, Rng& rng);

SampleBatch sample_batch(const DiscreteMeasure& mx, const DiscreteMeasure& my, int n,
                         int directions, Rng& rng);

/// k-th entry is θ^⊤x_k.
Vector project(const Matrix& x, const Vector& theta);

}  // namespace swsgd
