#include "swsgd/measures.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "swsgd/csv.hpp"

namespace swsgd {

Rng make_rng(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  return Rng(seq);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double max_row_norm(const Matrix& m) {
  if (m.rows() == 0) return 0.0;
  return m.rowwise().norm().maxCoeff();
}

DiscreteMeasure::DiscreteMeasure(Matrix points)
    : DiscreteMeasure(points, Vector::Ones(points.rows())) {}

DiscreteMeasure::DiscreteMeasure(Matrix points, Vector weights)
    : points_(std::move(points)), weights_(std::move(weights)) {
  if (points_.rows() < 1 || points_.cols() < 1) {
    throw DimensionError("DiscreteMeasure: need at least one atom of dimension >= 1");
  }
  if (weights_.size() != points_.rows()) {
    throw DimensionError("DiscreteMeasure: " + std::to_string(weights_.size()) +
                         " weights for " + std::to_string(points_.rows()) + " atoms");
  }
  if (!points_.allFinite()) throw DomainError("DiscreteMeasure: non-finite coordinate");
  if (!weights_.allFinite() || (weights_.array() < 0.0).any()) {
    throw DomainError("DiscreteMeasure: weights must be finite and nonnegative");
  }
  const double total = weights_.sum();
  if (!(total > 0.0)) throw DomainError("DiscreteMeasure: weights sum to zero");
  weights_ /= total;
  build_sampler();
}

DiscreteMeasure DiscreteMeasure::dirac(const Vector& atom) {
  return DiscreteMeasure(Matrix(atom.transpose()));
}

DiscreteMeasure DiscreteMeasure::load_csv(const std::filesystem::path& path, bool weighted) {
  Matrix data = read_csv_matrix(path);
  if (!weighted) return DiscreteMeasure(std::move(data));
  if (data.cols() < 2) {
    throw DimensionError("measure file " + path.string() + ": weighted form needs >= 2 columns");
  }
  Vector w = data.col(data.cols() - 1);
  Matrix pts = data.leftCols(data.cols() - 1);
  return DiscreteMeasure(std::move(pts), std::move(w));
}

void DiscreteMeasure::build_sampler() {
  cumulative_.resize(weights_.size());
  double acc = 0.0;
  for (Eigen::Index k = 0; k < weights_.size(); ++k) {
    acc += weights_[k];
    cumulative_[k] = acc;
  }
}

Eigen::Index DiscreteMeasure::draw_index(Rng& rng) const {
  if (points_.rows() == 1) return 0;
  const double target = std::uniform_real_distribution<double>(0.0, 1.0)(rng) * cumulative_.back();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
  auto k = static_cast<Eigen::Index>(it - cumulative_.begin());
  // Never return a zero-weight atom at the end of the table.
  while (k > 0 && (k >= weights_.size() || weights_[k] == 0.0)) --k;
  return k;
}

double DiscreteMeasure::support_radius() const { return max_row_norm(points_); }

Vector sample_unit_sphere(int dim, Rng& rng) {
  if (dim < 1) throw DimensionError("sample_unit_sphere: dim must be >= 1");
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(dim);
  double norm = 0.0;
  do {
    for (int i = 0; i < dim; ++i) v[i] = normal(rng);
    norm = v.norm();
  } while (!(norm > 1e-300));
  v /= norm;
  return v;
}

Vector sample_ball(const Vector& center, double radius, Rng& rng) {
  const auto dim = static_cast<int>(center.size());
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double rho = radius * std::pow(unif(rng), 1.0 / dim);
  return center + rho * sample_unit_sphere(dim, rng);
}

SampleBatch sample_batch(const DiscreteMeasure& mx, const DiscreteMeasure& my, int n,
                         int directions, Rng& rng) {
  if (n < 1 || directions < 1) {
    throw DimensionError("sample_batch: n and the number of directions must be >= 1");
  }
  SampleBatch batch;
  batch.x.resize(n, mx.dim());
  batch.y.resize(n, my.dim());
  batch.thetas.resize(directions, my.dim());
  for (int k = 0; k < n; ++k) batch.x.row(k) = mx.points().row(mx.draw_index(rng));
  for (int k = 0; k < n; ++k) batch.y.row(k) = my.points().row(my.draw_index(rng));
  for (int l = 0; l < directions; ++l) {
    batch.thetas.row(l) = sample_unit_sphere(static_cast<int>(my.dim()), rng).transpose();
  }
  return batch;
}

Vector project(const Matrix& x, const Vector& theta) {
  if (x.cols() != theta.size()) {
    throw DimensionError("project: points have dimension " + std::to_string(x.cols()) +
                         ", direction has " + std::to_string(theta.size()));
  }
  return x * theta;
}

}  // namespace swsgd
