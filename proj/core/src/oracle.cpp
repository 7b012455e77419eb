#include "swsgd/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include <nlohmann/json.hpp>

namespace swsgd::oracle {
namespace {

std::vector<double> dot_rows(const Matrix& m, const Vector& theta) {
  std::vector<double> out(static_cast<std::size_t>(m.rows()), 0.0);
  for (Eigen::Index k = 0; k < m.rows(); ++k) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < m.cols(); ++j) acc += m(k, j) * theta[j];
    out[static_cast<std::size_t>(k)] = acc;
  }
  return out;
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

// Gaussian direction times U^{1/d} radius.
Vector uniform_in_ball(const Vector& center, double radius, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const auto d = center.size();
  Vector dir(d);
  double norm = 0.0;
  while (!(norm > 0.0)) {
    for (Eigen::Index i = 0; i < d; ++i) dir[i] = normal(rng);
    norm = dir.norm();
  }
  const double rho = radius * std::pow(unif(rng), 1.0 / static_cast<double>(d));
  return center + (rho / norm) * dir;
}

}  // namespace

std::string ProbeReport::to_json() const {
  nlohmann::json j;
  j["max_value"] = max_value;
  j["samples"] = samples;
  j["argmax_a"] = to_std(argmax_a);
  j["argmax_b"] = to_std(argmax_b);
  return j.dump();
}

double wasserstein_1d_bruteforce(const Matrix& x, const Matrix& y, const Vector& theta, double p) {
  if (x.rows() != y.rows() || x.cols() != theta.size() || y.cols() != theta.size()) {
    throw DimensionError("wasserstein_1d_bruteforce: dimension mismatch");
  }
  if (x.rows() > 8) throw DomainError("wasserstein_1d_bruteforce: n > 8 refused (n! matchings)");
  const auto px = dot_rows(x, theta);
  const auto py = dot_rows(y, theta);
  const std::size_t n = px.size();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  double best = std::numeric_limits<double>::infinity();
  do {
    double cost = 0.0;
    for (std::size_t k = 0; k < n; ++k) cost += std::pow(std::fabs(px[k] - py[perm[k]]), p);
    best = std::min(best, cost / static_cast<double>(n));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

Vector fd_gradient(const ScalarField& fun, const Vector& u, double h) {
  if (!(h > 0.0)) throw DomainError("fd_gradient: h must be positive");
  Vector grad(u.size());
  Vector probe = u;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    probe[i] = u[i] + h;
    const double up = fun(probe);
    probe[i] = u[i] - h;
    const double down = fun(probe);
    probe[i] = u[i];
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

double relative_error(const Vector& analytic, const Vector& reference) {
  if (analytic.size() != reference.size()) throw DimensionError("relative_error: size mismatch");
  if (analytic.size() == 0) return 0.0;
  return (analytic - reference).cwiseAbs().maxCoeff() /
         std::max(1.0, analytic.norm());
}

ProbeReport lipschitz_probe(const ScalarField& fun, const Vector& center, double eps,
                            long num_pairs, Rng& rng) {
  if (num_pairs < 1) throw DomainError("lipschitz_probe: num_pairs must be >= 1");
  if (!(eps > 0.0)) throw DomainError("lipschitz_probe: eps must be positive");
  ProbeReport report;
  report.argmax_a = center;
  report.argmax_b = center;
  for (long i = 0; i < num_pairs; ++i) {
    Vector a = uniform_in_ball(center, eps, rng);
    Vector b = uniform_in_ball(center, eps, rng);
    while ((a - b).norm() < 1e-9) b = uniform_in_ball(center, eps, rng);
    const double ratio = std::fabs(fun(a) - fun(b)) / (a - b).norm();
    if (ratio > report.max_value) {
      report.max_value = ratio;
      report.argmax_a = a;
      report.argmax_b = b;
    }
    ++report.samples;
  }
  return report;
}

}  // namespace swsgd::oracle
