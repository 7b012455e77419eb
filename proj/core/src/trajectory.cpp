#include "swsgd/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace swsgd {

AffinePath::AffinePath(Matrix knots, double step) : knots_(std::move(knots)), step_(step) {
  if (knots_.rows() < 1) throw DimensionError("AffinePath: need at least one knot");
  if (!(step_ > 0.0) || !std::isfinite(step_)) throw DomainError("AffinePath: step must be positive");
}

AffinePath AffinePath::from_trajectory(const Trajectory& trajectory) {
  return AffinePath(trajectory.iterates, trajectory.config.alpha);
}

Vector AffinePath::at(double s) const {
  const double end = horizon();
  if (!(s >= 0.0) || s > end + 1e-12 * std::max(1.0, end)) {
    throw DomainError("AffinePath: time " + std::to_string(s) + " outside [0, " +
                      std::to_string(end) + "]");
  }
  const Eigen::Index last = knots_.rows() - 1;
  const double q = s / step_;
  // Times that are knot multiples up to rounding land exactly on the knot.
  const double nearest = std::round(q);
  if (std::abs(q - nearest) <= 1e-9 * std::max(1.0, q)) {
    const auto t = std::min(static_cast<Eigen::Index>(nearest), last);
    return knots_.row(t).transpose();
  }
  const auto t = std::min(static_cast<Eigen::Index>(std::floor(q)), last);
  if (t == last) return knots_.row(last).transpose();
  const double frac = q - static_cast<double>(t);
  return (knots_.row(t) + frac * (knots_.row(t + 1) - knots_.row(t))).transpose();
}

double AffinePath::speed_bound() const {
  double best = 0.0;
  for (Eigen::Index t = 0; t + 1 < knots_.rows(); ++t) {
    best = std::max(best, (knots_.row(t + 1) - knots_.row(t)).norm());
  }
  return best / step_;
}

Vector interpolate(const AffinePath& path, double s) { return path.at(s); }

DistanceReport distance_d_c(const AffinePath& a, const AffinePath& b, int k_max,
                            int grid_per_unit) {
  if (k_max < 1) throw DomainError("distance_d_c: k_max must be >= 1");
  if (grid_per_unit < 2) throw DomainError("distance_d_c: grid_per_unit must be >= 2");
  if (a.dim() != b.dim()) throw DimensionError("distance_d_c: paths live in different spaces");
  const double need = static_cast<double>(k_max);
  for (const AffinePath* path : {&a, &b}) {
    if (path->horizon() < need * (1.0 - 1e-12)) {
      throw DomainError("distance_d_c: path horizon " + std::to_string(path->horizon()) +
                        " shorter than k_max = " + std::to_string(k_max));
    }
  }
  DistanceReport report;
  double running_max = 0.0;
  double weight = 0.5;
  const long points = static_cast<long>(k_max) * grid_per_unit;
  for (long j = 0; j <= points; ++j) {
    const double s = std::min(static_cast<double>(j) / grid_per_unit, need);
    const double sa = std::min(s, a.horizon());
    const double sb = std::min(s, b.horizon());
    running_max = std::max(running_max, (a.at(sa) - b.at(sb)).norm());
    if (j > 0 && j % grid_per_unit == 0) {
      report.value += weight * std::min(1.0, running_max);
      weight *= 0.5;
    }
  }
  report.truncation_bound = std::ldexp(1.0, -k_max);
  report.grid_bound = 0.5 * (a.speed_bound() + b.speed_bound()) / grid_per_unit;
  return report;
}

AffinePath reference_flow(const NetworkSpec& spec, const Vector& u0, const DiscreteMeasure& mx,
                          const DiscreteMeasure& my, int n, OrderP p, const FlowOptions& options,
                          Rng& rng) {
  if (!(options.step_ref > 0.0) || !(options.horizon > 0.0)) {
    throw DomainError("reference_flow: step and horizon must be positive");
  }
  if (options.compare_alpha > 0.0 &&
      options.step_ref > options.compare_alpha / 50.0 * (1.0 + 1e-12)) {
    throw DomainError("reference_flow: step_ref must be <= alpha / 50 for the compared SGD run");
  }
  if (u0.size() != spec.param_dim()) throw DimensionError("reference_flow: start point dimension");
  const auto steps = static_cast<Eigen::Index>(std::ceil(options.horizon / options.step_ref - 1e-9));
  Matrix knots(steps + 1, spec.param_dim());
  Vector v = u0;
  knots.row(0) = v.transpose();
  for (Eigen::Index i = 0; i < steps; ++i) {
    v -= options.step_ref * estimate_population_gradient(spec, v, mx, my, n, options.mode, rng, p);
    if (!v.allFinite()) {
      throw DivergenceError("reference flow became non-finite at Euler step " + std::to_string(i + 1),
                            static_cast<long>(i + 1));
    }
    knots.row(i + 1) = v.transpose();
  }
  return AffinePath(std::move(knots), options.step_ref);
}

double criticality_gap(const Vector& gradient, const Vector& u, double r) {
  if (gradient.size() != u.size()) throw DimensionError("criticality_gap: dimension mismatch");
  if (!(r > 0.0)) throw DomainError("criticality_gap: radius must be positive");
  const double norm = u.norm();
  if (norm > r * (1.0 + 1e-9)) {
    throw DomainError("criticality_gap: point lies outside the projection ball");
  }
  const double tol = 1e-9 * r;
  if (norm < r - tol) return gradient.norm();
  // On the sphere the normal cone is {s u : s >= 0}.
  const double gu = gradient.dot(u);
  if (gu >= 0.0) return gradient.norm();
  return (gradient - (gu / (norm * norm)) * u).norm();
}

double criticality_gap(const NetworkSpec& spec, const Vector& u, double r,
                       const DiscreteMeasure& mx, const DiscreteMeasure& my, int n, OrderP p,
                       const PopulationMode& mode, Rng& rng) {
  return criticality_gap(estimate_population_gradient(spec, u, mx, my, n, mode, rng, p), u, r);
}

}  // namespace swsgd
