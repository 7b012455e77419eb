#pragma once

#include "swsgd/measures.hpp"
#include "swsgd/network.hpp"
#include "swsgd/sgd.hpp"
#include "swsgd/swloss.hpp"

namespace swsgd {

/// Continuous-time curve through equally spaced knots, affine between them.
/// Knot t sits at time t·step. Used both for interpolated SGD iterates (step
/// = α) and for Euler reference flows (step = step_ref).
class AffinePath {
 public:
  AffinePath(Matrix knots, double step);

  static AffinePath from_trajectory(const Trajectory& trajectory);

  double step() const noexcept { return step_; }
  double horizon() const noexcept { return step_ * static_cast<double>(knots_.rows() - 1); }
  const Matrix& knots() const noexcept { return knots_; }
  Eigen::Index dim() const noexcept { return knots_.cols(); }

  /// u(s) = u^(t) + (s/step − t)(u^(t+1) − u^(t)) with t = ⌊s/step⌋; exact at knots.
  Vector at(double s) const;

  /// Largest segment speed max_t ‖u^(t+1) − u^(t)‖ / step.
  double speed_bound() const;

 private:
  Matrix knots_;
  double step_;
};

Vector interpolate(const AffinePath& path, double s);

struct DistanceReport {
  double value = 0.0;
  /// Weight of the omitted tail of the series, 2^{-k_max}.
  double truncation_bound = 0.0;
  /// Upper bound on how much the grid maximum can underestimate the true
  /// supremum: (speed_a + speed_b)·Δs/2.
  double grid_bound = 0.0;
};

/// Σ_{k=1}^{k_max} 2^{-k} min(1, max_{s∈[0,k]} ‖a(s) − b(s)‖), the maxima taken
/// on a uniform grid with `grid_per_unit` intervals per unit time.
DistanceReport distance_d_c(const AffinePath& a, const AffinePath& b, int k_max = 8,
                            int grid_per_unit = 200);

struct FlowOptions {
  double horizon = 8.0;
  double step_ref = 1e-4;
  PopulationMode mode;
  /// When positive, enforces step_ref ≤ compare_alpha / 50.
  double compare_alpha = 0.0;
};

/// Explicit-Euler surrogate of the subgradient flow v' = −ĝ(v), ĝ the
/// population average of φ, returned as an affine path on [0, horizon].
AffinePath reference_flow(const NetworkSpec& spec, const Vector& u0, const DiscreteMeasure& mx,
                          const DiscreteMeasure& my, int n, OrderP p, const FlowOptions& options,
                          Rng& rng);

/// min_{s ≥ 0} ‖g + s u‖ on the sphere ‖u‖ = r (within 1e-9 r), ‖g‖ inside.
double criticality_gap(const Vector& gradient, const Vector& u, double r);

/// Same, with g the population-gradient estimate at u.
double criticality_gap(const NetworkSpec& spec, const Vector& u, double r,
                       const DiscreteMeasure& mx, const DiscreteMeasure& my, int n, OrderP p,
                       const PopulationMode& mode, Rng& rng);

}  // namespace swsgd
