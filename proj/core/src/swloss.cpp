#include "swsgd/swloss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

namespace swsgd {
namespace {

void check_pair(const Matrix& x, const Matrix& y, const Vector& theta) {
  if (x.rows() != y.rows()) {
    throw DimensionError("sliced loss: " + std::to_string(x.rows()) + " vs " +
                         std::to_string(y.rows()) + " points");
  }
  if (x.rows() < 1) throw DimensionError("sliced loss: empty point cloud");
  if (x.cols() != theta.size() || y.cols() != theta.size()) {
    throw DimensionError("sliced loss: points and direction have different dimensions");
  }
  if (std::abs(theta.norm() - 1.0) > 1e-9) throw DomainError("sliced loss: direction is not unit");
}

void check_batch(const NetworkSpec& spec, const SampleBatch& batch) {
  if (batch.x.cols() != spec.input_dim() || batch.y.cols() != spec.output_dim() ||
      batch.thetas.cols() != spec.output_dim()) {
    throw DimensionError("sample batch does not match the network dimensions");
  }
  if (batch.x.rows() != batch.y.rows() || batch.x.rows() < 1 || batch.thetas.rows() < 1) {
    throw DimensionError("sample batch needs n >= 1 matched rows and at least one direction");
  }
}

double signed_power(double r, double p) {
  if (r == 0.0) return 0.0;
  const double mag = std::pow(std::abs(r), p - 1.0);
  return r > 0.0 ? mag : -mag;
}

// Per-position coefficient (p/n) sign(r_k)|r_k|^{p-1} along one direction,
// together with the direction's contribution to the loss.
double direction_terms(const Vector& proj_x, const Vector& proj_y, double p, Vector& coef) {
  const auto n = proj_x.size();
  const Permutation sx = sorting_permutation(proj_x);
  const Permutation sy = sorting_permutation(proj_y);
  coef.resize(n);
  double loss = 0.0;
  const double scale = p / static_cast<double>(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const double res = proj_x[sx[r]] - proj_y[sy[r]];
    loss += std::pow(std::abs(res), p);
    coef[sx[r]] = scale * signed_power(res, p);
  }
  return loss / static_cast<double>(n);
}

// Enumerates index tuples (i_1..i_n) over `atoms` values, odometer order.
bool next_tuple(std::vector<Eigen::Index>& idx, Eigen::Index atoms) {
  for (auto& i : idx) {
    if (++i < atoms) return true;
    i = 0;
  }
  return false;
}

struct Accumulated {
  double loss = 0.0;
  double loss_sq = 0.0;
  Vector gradient;
};

// Exact expectation over X ~ mx^n, Y ~ my^n and θ on the fixed grid. Outputs
// T(u, ·) only depend on the atom, so each atom is evaluated and pulled back once.
Accumulated exhaustive_expectation(const NetworkSpec& spec, const Vector& u,
                                   const DiscreteMeasure& mx, const DiscreteMeasure& my, int n,
                                   const PopulationMode& mode, OrderP p, bool want_gradient) {
  const long long combos = exhaustive_combinations(mx, my, n);
  if (combos < 0 || combos > mode.max_combinations) {
    throw DomainError("exhaustive population mode: too many support combinations");
  }
  const Matrix grid = direction_grid(spec.output_dim());
  const double grid_weight = 1.0 / static_cast<double>(grid.rows());
  const Eigen::Index nx = mx.size();
  const Eigen::Index ny = my.size();

  std::vector<ForwardPass> passes;
  passes.reserve(nx);
  Matrix outputs(nx, spec.output_dim());
  for (Eigen::Index a = 0; a < nx; ++a) {
    passes.push_back(evaluate(spec, u, mx.points().row(a).transpose()));
    outputs.row(a) = passes.back().output.transpose();
  }
  // Atom projections per grid direction.
  const Matrix out_proj = outputs * grid.transpose();     // nx × G
  const Matrix tgt_proj = my.points() * grid.transpose();  // ny × G

  Matrix cotangent = Matrix::Zero(nx, spec.output_dim());
  Accumulated acc;
  std::vector<Eigen::Index> ix(n, 0);
  std::vector<Eigen::Index> iy(n, 0);
  Vector px(n), py(n), coef;
  do {
    double wx = 1.0;
    for (auto i : ix) wx *= mx.weights()[i];
    if (wx == 0.0) continue;
    std::fill(iy.begin(), iy.end(), 0);
    do {
      double w = wx;
      for (auto j : iy) w *= my.weights()[j];
      if (w == 0.0) continue;
      for (Eigen::Index g = 0; g < grid.rows(); ++g) {
        for (int k = 0; k < n; ++k) {
          px[k] = out_proj(ix[k], g);
          py[k] = tgt_proj(iy[k], g);
        }
        const double wt = w * grid_weight;
        acc.loss += wt * direction_terms(px, py, p.value(), coef);
        if (want_gradient) {
          for (int k = 0; k < n; ++k) {
            cotangent.row(ix[k]) += (wt * coef[k]) * grid.row(g);
          }
        }
      }
    } while (next_tuple(iy, ny));
  } while (next_tuple(ix, nx));

  if (want_gradient) {
    acc.gradient = Vector::Zero(spec.param_dim());
    for (Eigen::Index a = 0; a < nx; ++a) {
      if (cotangent.row(a).isZero(0.0)) continue;
      acc.gradient += pullback(spec, passes[a], u, mx.points().row(a).transpose(),
                               cotangent.row(a).transpose())
                          .du;
    }
  }
  return acc;
}

}  // namespace

OrderP::OrderP(double p) : p_(p) {
  if (!(p >= 1.0) || !std::isfinite(p)) {
    throw DomainError("order p must lie in [1, inf), got " + std::to_string(p));
  }
}

Permutation sorting_permutation(const Vector& v) {
  if (!v.allFinite()) throw DomainError("sorting_permutation: non-finite entry");
  Permutation perm(static_cast<std::size_t>(v.size()));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  std::stable_sort(perm.begin(), perm.end(),
                   [&v](Eigen::Index a, Eigen::Index b) { return v[a] < v[b]; });
  return perm;
}

Permutation assignment_sigma(const Matrix& x, const Matrix& y, const Vector& theta) {
  check_pair(x, y, theta);
  const Permutation sx = sorting_permutation(project(x, theta));
  const Permutation sy = sorting_permutation(project(y, theta));
  Permutation sigma(sx.size());
  for (std::size_t r = 0; r < sx.size(); ++r) sigma[sx[r]] = sy[r];
  return sigma;
}

double w_theta_p(const Matrix& x, const Matrix& y, const Vector& theta, OrderP p) {
  check_pair(x, y, theta);
  Vector coef;
  return direction_terms(project(x, theta), project(y, theta), p.value(), coef);
}

double w_theta_quadratic(const Matrix& x, const Matrix& y, const Vector& theta) {
  check_pair(x, y, theta);
  Vector px = project(x, theta);
  Vector py = project(y, theta);
  std::sort(px.begin(), px.end());
  std::sort(py.begin(), py.end());
  return (px - py).squaredNorm() / static_cast<double>(px.size());
}

Matrix grad_w_theta(const Matrix& x, const Matrix& y, const Vector& theta, OrderP p) {
  check_pair(x, y, theta);
  Vector coef;
  direction_terms(project(x, theta), project(y, theta), p.value(), coef);
  return coef * theta.transpose();
}

Matrix grad_w_theta_quadratic(const Matrix& x, const Matrix& y, const Vector& theta) {
  const Permutation sigma = assignment_sigma(x, y, theta);
  const auto n = x.rows();
  const Matrix proj = theta * theta.transpose();
  Matrix grad(n, x.cols());
  for (Eigen::Index k = 0; k < n; ++k) {
    grad.row(k) = (2.0 / static_cast<double>(n)) *
                  (proj * (x.row(k) - y.row(sigma[k])).transpose()).transpose();
  }
  return grad;
}

double sample_loss(const NetworkSpec& spec, const Vector& u, const SampleBatch& batch, OrderP p) {
  check_batch(spec, batch);
  const Matrix out = forward_rows(spec, u, batch.x);
  double total = 0.0;
  for (Eigen::Index l = 0; l < batch.thetas.rows(); ++l) {
    total += w_theta_p(out, batch.y, batch.thetas.row(l).transpose(), p);
  }
  return total / static_cast<double>(batch.thetas.rows());
}

LossAndGradient sample_loss_and_gradient(const NetworkSpec& spec, const Vector& u,
                                         const SampleBatch& batch, OrderP p) {
  check_batch(spec, batch);
  const auto n = batch.x.rows();
  const auto directions = batch.thetas.rows();
  std::vector<ForwardPass> passes;
  passes.reserve(n);
  Matrix out(n, spec.output_dim());
  for (Eigen::Index k = 0; k < n; ++k) {
    passes.push_back(evaluate(spec, u, batch.x.row(k).transpose()));
    out.row(k) = passes.back().output.transpose();
  }
  Matrix cotangent = Matrix::Zero(n, spec.output_dim());
  LossAndGradient result;
  Vector coef;
  for (Eigen::Index l = 0; l < directions; ++l) {
    const Vector theta = batch.thetas.row(l).transpose();
    result.loss += direction_terms(out * theta, batch.y * theta, p.value(), coef);
    cotangent += coef * theta.transpose();
  }
  result.loss /= static_cast<double>(directions);
  cotangent /= static_cast<double>(directions);
  result.gradient = Vector::Zero(spec.param_dim());
  for (Eigen::Index k = 0; k < n; ++k) {
    result.gradient +=
        pullback(spec, passes[k], u, batch.x.row(k).transpose(), cotangent.row(k).transpose()).du;
  }
  return result;
}

Vector grad_phi(const NetworkSpec& spec, const Vector& u, const SampleBatch& batch, OrderP p) {
  return sample_loss_and_gradient(spec, u, batch, p).gradient;
}

Vector grad_phi_quadratic(const NetworkSpec& spec, const Vector& u, const SampleBatch& batch) {
  check_batch(spec, batch);
  const auto n = batch.x.rows();
  std::vector<Matrix> jac(n);
  Matrix out(n, spec.output_dim());
  for (Eigen::Index k = 0; k < n; ++k) {
    const Vector xk = batch.x.row(k).transpose();
    jac[k] = jacobian_u(spec, u, xk);
    out.row(k) = forward(spec, u, xk).transpose();
  }
  Vector grad = Vector::Zero(spec.param_dim());
  for (Eigen::Index l = 0; l < batch.thetas.rows(); ++l) {
    const Vector theta = batch.thetas.row(l).transpose();
    const Permutation sigma = assignment_sigma(out, batch.y, theta);
    const Matrix proj = theta * theta.transpose();
    for (Eigen::Index k = 0; k < n; ++k) {
      const Vector residual = (out.row(k) - batch.y.row(sigma[k])).transpose();
      grad += (2.0 / static_cast<double>(n)) * jac[k].transpose() * (proj * residual);
    }
  }
  return grad / static_cast<double>(batch.thetas.rows());
}

double min_sorting_gap(const NetworkSpec& spec, const Vector& u, const SampleBatch& batch) {
  check_batch(spec, batch);
  const Matrix out = forward_rows(spec, u, batch.x);
  double gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index l = 0; l < batch.thetas.rows(); ++l) {
    const Vector theta = batch.thetas.row(l).transpose();
    Vector px = out * theta;
    Vector py = batch.y * theta;
    std::sort(px.begin(), px.end());
    std::sort(py.begin(), py.end());
    for (Eigen::Index k = 0; k + 1 < px.size(); ++k) gap = std::min(gap, px[k + 1] - px[k]);
    gap = std::min(gap, (px - py).cwiseAbs().minCoeff());
  }
  return gap;
}

Matrix direction_grid(int dim) {
  if (dim == 1) return Matrix::Ones(1, 1);
  if (dim == 2) {
    constexpr int count = 256;
    Matrix grid(count, 2);
    for (int j = 0; j < count; ++j) {
      const double angle = 2.0 * std::numbers::pi * j / count;
      grid(j, 0) = std::cos(angle);
      grid(j, 1) = std::sin(angle);
    }
    return grid;
  }
  if (dim == 3) {
    constexpr int count = 1024;
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    Matrix grid(count, 3);
    for (int i = 0; i < count; ++i) {
      const double z = 1.0 - (2.0 * i + 1.0) / count;
      const double rho = std::sqrt(1.0 - z * z);
      const double phi = golden * i;
      grid.row(i) << rho * std::cos(phi), rho * std::sin(phi), z;
      grid.row(i).normalize();
    }
    return grid;
  }
  throw DimensionError("exhaustive direction grid only exists for d_y in {1, 2, 3}");
}

long long exhaustive_combinations(const DiscreteMeasure& mx, const DiscreteMeasure& my, int n) {
  const double count = std::pow(static_cast<double>(mx.size()), n) *
                       std::pow(static_cast<double>(my.size()), n);
  if (count > 9.0e18) return -1;
  return static_cast<long long>(count);
}

LossEstimate estimate_population_loss(const NetworkSpec& spec, const Vector& u,
                                      const DiscreteMeasure& mx, const DiscreteMeasure& my, int n,
                                      const PopulationMode& mode, Rng& rng, OrderP p) {
  if (mode.exhaustive) {
    return {exhaustive_expectation(spec, u, mx, my, n, mode, p, false).loss, 0.0};
  }
  if (mode.num_mc < 1) throw DomainError("population estimate: num_mc must be >= 1");
  std::vector<double> values(mode.num_mc);
  for (auto& v : values) v = sample_loss(spec, u, sample_batch(mx, my, n, mode.directions, rng), p);
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / values.size();
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double var = ss / static_cast<double>(values.size() - 1);
  return {mean, std::sqrt(var / static_cast<double>(values.size()))};
}

Vector estimate_population_gradient(const NetworkSpec& spec, const Vector& u,
                                    const DiscreteMeasure& mx, const DiscreteMeasure& my, int n,
                                    const PopulationMode& mode, Rng& rng, OrderP p) {
  if (mode.exhaustive) return exhaustive_expectation(spec, u, mx, my, n, mode, p, true).gradient;
  if (mode.num_mc < 1) throw DomainError("population estimate: num_mc must be >= 1");
  Vector sum = Vector::Zero(spec.param_dim());
  for (int i = 0; i < mode.num_mc; ++i) {
    sum += grad_phi(spec, u, sample_batch(mx, my, n, mode.directions, rng), p);
  }
  return sum / static_cast<double>(mode.num_mc);
}

double lipschitz_K_w(double r, const Matrix& x, const Matrix& y, OrderP p) {
  if (!(r > 0.0)) throw DomainError("lipschitz_K_w: r must be positive");
  if (x.rows() != y.rows()) throw DimensionError("lipschitz_K_w: row counts differ");
  const double n = static_cast<double>(x.rows());
  return p.value() * n * std::pow(r + max_row_norm(x) + max_row_norm(y), p.value() - 1.0);
}

double lipschitz_K_f(double eps, const NetworkSpec& spec, const Vector& u0, const Matrix& x,
                     const Matrix& y, double lipschitz_t, OrderP p) {
  if (!(eps > 0.0) || !(lipschitz_t > 0.0)) {
    throw DomainError("lipschitz_K_f: eps and L_T must be positive");
  }
  if (x.rows() != y.rows()) throw DimensionError("lipschitz_K_f: row counts differ");
  const double n = static_cast<double>(x.rows());
  const double base = eps * lipschitz_t + max_row_norm(forward_rows(spec, u0, x)) + max_row_norm(y);
  return p.value() * n * lipschitz_t * std::pow(base, p.value() - 1.0);
}

double estimate_K_F(double eps, const NetworkSpec& spec, const Vector& u0,
                    const DiscreteMeasure& mx, const DiscreteMeasure& my, int n,
                    double lipschitz_t, const PopulationMode& mode, Rng& rng, OrderP p) {
  if (!(eps > 0.0) || !(lipschitz_t > 0.0)) {
    throw DomainError("estimate_K_F: eps and L_T must be positive");
  }
  const double q = p.value() - 1.0;
  Vector out_norm(mx.size());
  for (Eigen::Index a = 0; a < mx.size(); ++a) {
    out_norm[a] = forward(spec, u0, mx.points().row(a).transpose()).norm();
  }
  const Vector tgt_norm = my.points().rowwise().norm();
  double expectation = 0.0;
  if (mode.exhaustive) {
    const long long combos = exhaustive_combinations(mx, my, n);
    if (combos < 0 || combos > mode.max_combinations) {
      throw DomainError("exhaustive population mode: too many support combinations");
    }
    std::vector<Eigen::Index> ix(n, 0), iy(n, 0);
    do {
      double wx = 1.0, cx = 0.0;
      for (auto i : ix) {
        wx *= mx.weights()[i];
        cx = std::max(cx, out_norm[i]);
      }
      std::fill(iy.begin(), iy.end(), 0);
      do {
        double w = wx, cy = 0.0;
        for (auto j : iy) {
          w *= my.weights()[j];
          cy = std::max(cy, tgt_norm[j]);
        }
        expectation += w * std::pow(eps * lipschitz_t + cx + cy, q);
      } while (next_tuple(iy, my.size()));
    } while (next_tuple(ix, mx.size()));
  } else {
    if (mode.num_mc < 1) throw DomainError("estimate_K_F: num_mc must be >= 1");
    for (int i = 0; i < mode.num_mc; ++i) {
      double cx = 0.0, cy = 0.0;
      for (int k = 0; k < n; ++k) cx = std::max(cx, out_norm[mx.draw_index(rng)]);
      for (int k = 0; k < n; ++k) cy = std::max(cy, tgt_norm[my.draw_index(rng)]);
      expectation += std::pow(eps * lipschitz_t + cx + cy, q);
    }
    expectation /= static_cast<double>(mode.num_mc);
  }
  return p.value() * static_cast<double>(n) * lipschitz_t * expectation;
}

double alpha_zero(int output_dim, double radius_y, Eigen::Index param_dim, double m_bound) {
  if (output_dim < 1 || param_dim < 1 || !(radius_y > 0.0) || !(m_bound > 0.0)) {
    throw DomainError("alpha_zero: all inputs must be positive");
  }
  const double dy = static_cast<double>(output_dim);
  return 1.0 / ((dy * dy + 2.0 * radius_y) * static_cast<double>(param_dim) * m_bound);
}

}  // namespace swsgd
