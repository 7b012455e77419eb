#include "swsgd/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "swsgd/document.hpp"
#include "swsgd/measures.hpp"

namespace swsgd {
namespace {

double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// g(s) = f(s) / (f(s) + f(1 - s)) with f(s) = exp(-1/s) for s > 0.
double smooth_step(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / s);
  const double b = std::exp(-1.0 / (1.0 - s));
  return a / (a + b);
}

double smooth_step_derivative(double s) {
  if (s <= 0.0 || s >= 1.0) return 0.0;
  const double a = std::exp(-1.0 / s);
  const double b = std::exp(-1.0 / (1.0 - s));
  const double da = a == 0.0 ? 0.0 : a / (s * s);
  const double db = b == 0.0 ? 0.0 : b / ((1.0 - s) * (1.0 - s));
  const double sum = a + b;
  return (da * b + a * db) / (sum * sum);
}

double indicator_argument(const Vector& v, double radius, double eps) {
  const double outer = radius + eps;
  return (outer * outer - v.squaredNorm()) / (4.0 * radius * eps);
}

void check_input(const NetworkSpec& spec, const Vector& u, const Vector& x) {
  if (u.size() != spec.param_dim()) {
    throw DimensionError("network: parameter vector has " + std::to_string(u.size()) +
                         " entries, expected " + std::to_string(spec.param_dim()));
  }
  if (x.size() != spec.input_dim()) {
    throw DimensionError("network: input has " + std::to_string(x.size()) +
                         " entries, expected " + std::to_string(spec.input_dim()));
  }
}

// Radius drawn uniformly in [0, R] half of the time and volume-uniformly
// otherwise, so both the interior and the indicator shell get probed.
Vector probe_point(Eigen::Index dim, double radius, Rng& rng, bool volume) {
  if (volume) return sample_ball(Vector::Zero(dim), radius, rng);
  const double rho = std::uniform_real_distribution<double>(0.0, radius)(rng);
  return rho * sample_unit_sphere(static_cast<int>(dim), rng);
}

}  // namespace

std::string to_string(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::sigmoid: return "sigmoid";
    case Activation::tanh: return "tanh";
    case Activation::softplus: return "softplus";
    case Activation::relu: return "relu";
    case Activation::leaky_relu: return "leaky_relu";
  }
  return "identity";
}

Activation parse_activation(const std::string& name) {
  for (auto a : {Activation::identity, Activation::sigmoid, Activation::tanh,
                 Activation::softplus, Activation::relu, Activation::leaky_relu}) {
    if (to_string(a) == name) return a;
  }
  throw std::invalid_argument("unknown activation '" + name + "'");
}

double ActivationFn::value(double z) const {
  switch (kind) {
    case Activation::identity: return z;
    case Activation::sigmoid: return logistic(z);
    case Activation::tanh: return std::tanh(z);
    case Activation::softplus: return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
    case Activation::relu: return z > 0.0 ? z : 0.0;
    case Activation::leaky_relu: return z > 0.0 ? z : slope * z;
  }
  return z;
}

double ActivationFn::derivative(double z) const {
  switch (kind) {
    case Activation::identity: return 1.0;
    case Activation::sigmoid: {
      const double s = logistic(z);
      return s * (1.0 - s);
    }
    case Activation::tanh: {
      const double t = std::tanh(z);
      return 1.0 - t * t;
    }
    case Activation::softplus: return logistic(z);
    case Activation::relu: return z > 0.0 ? 1.0 : 0.0;
    case Activation::leaky_relu: return z > 0.0 ? 1.0 : slope;
  }
  return 1.0;
}

double ActivationFn::second_derivative(double z) const {
  switch (kind) {
    case Activation::sigmoid: {
      const double s = logistic(z);
      return s * (1.0 - s) * (1.0 - 2.0 * s);
    }
    case Activation::tanh: {
      const double t = std::tanh(z);
      return -2.0 * t * (1.0 - t * t);
    }
    case Activation::softplus: {
      const double s = logistic(z);
      return s * (1.0 - s);
    }
    default: return 0.0;
  }
}

bool ActivationFn::piecewise_linear() const {
  return kind == Activation::identity || kind == Activation::relu ||
         kind == Activation::leaky_relu;
}

bool ActivationFn::smooth() const {
  return kind == Activation::identity || kind == Activation::sigmoid ||
         kind == Activation::tanh || kind == Activation::softplus;
}

NetworkSpec::NetworkSpec(std::vector<int> layer_dims, ActivationFn activation,
                         Eigen::Index param_dim, std::vector<LayerLink> links,
                         std::vector<std::vector<BiasEntry>> biases, IndicatorShape indicator,
                         std::vector<ParamBlock> layout)
    : layer_dims_(std::move(layer_dims)),
      activation_(activation),
      param_dim_(param_dim),
      indicator_(indicator),
      layout_(std::move(layout)) {
  if (layer_dims_.size() < 2) throw DimensionError("network: need at least one layer");
  for (int d : layer_dims_) {
    if (d < 1) throw DimensionError("network: layer dimensions must be positive");
  }
  if (param_dim_ < 1) throw DimensionError("network: parameter dimension must be positive");
  if (!(indicator_.eps > 0.0) || !(indicator_.r_u > indicator_.eps) ||
      !(indicator_.r_x > indicator_.eps)) {
    throw DomainError("network: indicator needs eps > 0, R_u > eps and R_x > eps");
  }
  for (double r : {indicator_.r_u, indicator_.r_x}) {
    const double outer = r + indicator_.eps;
    if (!std::isfinite(outer * outer) || !std::isfinite(4.0 * r * indicator_.eps)) {
      throw DomainError("network: indicator radii too large to square in double precision");
    }
  }
  if (activation_.kind == Activation::leaky_relu && !std::isfinite(activation_.slope)) {
    throw DomainError("network: leaky_relu slope must be finite");
  }
  const int depth = static_cast<int>(layer_dims_.size()) - 1;
  links_.assign(depth + 1, {});
  for (auto& link : links) {
    if (link.target < 1 || link.target > depth || link.source < 0 || link.source >= link.target) {
      throw DimensionError("network: link A_{" + std::to_string(link.target) + "," +
                           std::to_string(link.source) + "} is not of the form i < n <= N");
    }
    for (const auto& e : link.entries) {
      if (e.row < 0 || e.row >= layer_dims_[link.target] || e.col < 0 ||
          e.col >= layer_dims_[link.source] || e.param < 0 || e.param >= param_dim_) {
        throw DimensionError("network: tensor entry out of range in A_{" +
                             std::to_string(link.target) + "," + std::to_string(link.source) +
                             "}");
      }
    }
    links_[link.target].push_back(std::move(link));
  }
  if (biases.empty()) biases.assign(depth + 1, {});
  if (static_cast<int>(biases.size()) != depth + 1) {
    throw DimensionError("network: expected one bias list per layer (index 0 unused)");
  }
  for (int n = 1; n <= depth; ++n) {
    for (const auto& b : biases[n]) {
      if (b.row < 0 || b.row >= layer_dims_[n] || b.param < 0 || b.param >= param_dim_) {
        throw DimensionError("network: bias entry out of range in B_" + std::to_string(n));
      }
    }
  }
  biases_ = std::move(biases);
  for (const auto& block : layout_) {
    if (block.offset < 0 || block.size < 0 || block.offset + block.size > param_dim_) {
      throw DimensionError("network: parameter block outside [0, d_u)");
    }
  }
}

NetworkSpec NetworkSpec::dense(std::vector<int> layer_dims, ActivationFn activation,
                               IndicatorShape indicator, DenseOptions options) {
  if (layer_dims.size() < 2) throw DimensionError("network: need at least one layer");
  const int depth = static_cast<int>(layer_dims.size()) - 1;
  std::vector<LayerLink> links;
  std::vector<std::vector<BiasEntry>> biases(depth + 1);
  std::vector<ParamBlock> layout;
  Eigen::Index offset = 0;
  for (int n = 1; n <= depth; ++n) {
    const int first_source = options.residual ? 0 : n - 1;
    for (int i = first_source; i < n; ++i) {
      LayerLink link{n, i, {}};
      const int rows = layer_dims[n];
      const int cols = layer_dims[i];
      if (rows < 1 || cols < 1) throw DimensionError("network: layer dimensions must be positive");
      link.entries.reserve(static_cast<std::size_t>(rows) * cols);
      for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
          link.entries.push_back({r, c, offset + static_cast<Eigen::Index>(r) * cols + c, 1.0});
        }
      }
      layout.push_back({n, i, offset, static_cast<Eigen::Index>(rows) * cols});
      offset += static_cast<Eigen::Index>(rows) * cols;
      links.push_back(std::move(link));
    }
    if (options.bias) {
      for (int r = 0; r < layer_dims[n]; ++r) biases[n].push_back({r, offset + r, 1.0});
      layout.push_back({n, -1, offset, layer_dims[n]});
      offset += layer_dims[n];
    }
  }
  NetworkSpec spec(std::move(layer_dims), activation, offset, std::move(links), std::move(biases),
                   indicator, std::move(layout));
  spec.residual_ = options.residual;
  spec.bias_ = options.bias;
  spec.init_seed_ = options.init_seed;
  return spec;
}

NetworkSpec NetworkSpec::from_document(const Document& doc, const std::string& section) {
  const std::string p = section + ".";
  std::vector<int> dims;
  for (long long d : doc.get_ints(p + "layer_dims", {})) dims.push_back(static_cast<int>(d));
  if (dims.size() < 2) {
    throw std::invalid_argument("config key '" + p + "layer_dims' needs at least two entries");
  }
  ActivationFn act{parse_activation(doc.get_string(p + "activation", "identity"))};
  act.slope = doc.get_double(p + "leaky_slope", act.slope);
  IndicatorShape ind;
  ind.r_u = doc.get_double(p + "R_u", ind.r_u);
  ind.r_x = doc.get_double(p + "R_x", ind.r_x);
  ind.eps = doc.get_double(p + "eps", ind.eps);
  DenseOptions opts;
  opts.bias = doc.get_bool(p + "bias", opts.bias);
  opts.residual = doc.get_bool(p + "residual", opts.residual);
  opts.init_seed = static_cast<std::uint64_t>(doc.get_int(p + "init_seed", 0));
  return dense(std::move(dims), act, ind, opts);
}

void NetworkSpec::write_document(Document& doc, const std::string& section) const {
  const std::string p = section + ".";
  std::string dims;
  for (std::size_t i = 0; i < layer_dims_.size(); ++i) {
    if (i) dims += ' ';
    dims += std::to_string(layer_dims_[i]);
  }
  doc.set(p + "layer_dims", dims);
  doc.set(p + "activation", to_string(activation_.kind));
  doc.set(p + "leaky_slope", format_double(activation_.slope));
  doc.set(p + "R_u", format_double(indicator_.r_u));
  doc.set(p + "R_x", format_double(indicator_.r_x));
  doc.set(p + "eps", format_double(indicator_.eps));
  doc.set(p + "bias", bias_ ? "true" : "false");
  doc.set(p + "residual", residual_ ? "true" : "false");
  doc.set(p + "init_seed", std::to_string(init_seed_));
}

Vector NetworkSpec::initial_parameters() const {
  Rng rng = make_rng(init_seed_);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector u = Vector::Zero(param_dim_);
  if (layout_.empty()) {
    for (Eigen::Index j = 0; j < param_dim_; ++j) u[j] = 0.1 * normal(rng);
  } else {
    for (const auto& block : layout_) {
      if (block.source < 0) continue;
      int fan_in = 0;
      for (const auto& link : links_[block.target]) fan_in += layer_dims_[link.source];
      const double scale = 1.0 / std::sqrt(static_cast<double>(std::max(fan_in, 1)));
      for (Eigen::Index j = 0; j < block.size; ++j) u[block.offset + j] = scale * normal(rng);
    }
  }
  const double plateau = indicator_.r_u - indicator_.eps;
  const double norm = u.norm();
  if (norm > 0.5 * plateau) u *= 0.5 * plateau / norm;
  return u;
}

double smooth_indicator(const Vector& v, double radius, double eps) {
  return smooth_step(indicator_argument(v, radius, eps));
}

Vector smooth_indicator_gradient(const Vector& v, double radius, double eps) {
  const double ds = smooth_step_derivative(indicator_argument(v, radius, eps));
  if (ds == 0.0) return Vector::Zero(v.size());
  return (-ds / (2.0 * radius * eps)) * v;
}

ForwardPass evaluate(const NetworkSpec& spec, const Vector& u, const Vector& x) {
  check_input(spec, u, x);
  const int depth = spec.depth();
  const auto& dims = spec.layer_dims();
  const auto& act = spec.activation();
  ForwardPass pass;
  pass.pre.resize(depth + 1);
  pass.post.resize(depth + 1);
  pass.post[0] = x;
  for (int n = 1; n <= depth; ++n) {
    Vector z = Vector::Zero(dims[n]);
    for (const auto& link : spec.links_into(n)) {
      const Vector& h = pass.post[link.source];
      for (const auto& e : link.entries) z[e.row] += e.coef * h[e.col] * u[e.param];
    }
    for (const auto& b : spec.bias_into(n)) z[b.row] += b.coef * u[b.param];
    Vector h(dims[n]);
    for (int r = 0; r < dims[n]; ++r) h[r] = act.value(z[r]);
    pass.pre[n] = std::move(z);
    pass.post[n] = std::move(h);
  }
  const auto& ind = spec.indicator();
  pass.gate_u = smooth_indicator(u, ind.r_u, ind.eps);
  pass.gate_x = smooth_indicator(x, ind.r_x, ind.eps);
  pass.output = pass.post[depth] * (pass.gate_u * pass.gate_x);
  return pass;
}

Vector forward(const NetworkSpec& spec, const Vector& u, const Vector& x) {
  return evaluate(spec, u, x).output;
}

Matrix forward_rows(const NetworkSpec& spec, const Vector& u, const Matrix& x) {
  if (x.cols() != spec.input_dim()) {
    throw DimensionError("network: input rows have " + std::to_string(x.cols()) +
                         " columns, expected " + std::to_string(spec.input_dim()));
  }
  Matrix out(x.rows(), spec.output_dim());
  for (Eigen::Index k = 0; k < x.rows(); ++k) {
    out.row(k) = forward(spec, u, x.row(k).transpose()).transpose();
  }
  return out;
}

Pullback pullback(const NetworkSpec& spec, const ForwardPass& pass, const Vector& u,
                  const Vector& x, const Vector& cotangent) {
  if (cotangent.size() != spec.output_dim()) {
    throw DimensionError("network: cotangent has " + std::to_string(cotangent.size()) +
                         " entries, expected " + std::to_string(spec.output_dim()));
  }
  const int depth = spec.depth();
  const auto& act = spec.activation();
  const auto& ind = spec.indicator();
  Pullback out{Vector::Zero(spec.param_dim()), Vector::Zero(spec.input_dim())};

  const double gate = pass.gate_u * pass.gate_x;
  if (gate != 0.0) {
    std::vector<Vector> adjoint(depth + 1);
    for (int n = 0; n < depth; ++n) adjoint[n] = Vector::Zero(pass.post[n].size());
    adjoint[depth] = gate * cotangent;
    for (int n = depth; n >= 1; --n) {
      Vector dz(adjoint[n].size());
      for (Eigen::Index r = 0; r < dz.size(); ++r) dz[r] = adjoint[n][r] * act.derivative(pass.pre[n][r]);
      for (const auto& b : spec.bias_into(n)) out.du[b.param] += b.coef * dz[b.row];
      for (const auto& link : spec.links_into(n)) {
        const Vector& h = pass.post[link.source];
        Vector& dh = adjoint[link.source];
        for (const auto& e : link.entries) {
          out.du[e.param] += e.coef * h[e.col] * dz[e.row];
          dh[e.col] += e.coef * u[e.param] * dz[e.row];
        }
      }
    }
    out.dx = adjoint[0];
  }

  // Product rule with the two indicators.
  const double wh = cotangent.dot(pass.post[depth]);
  if (wh != 0.0) {
    if (pass.gate_x != 0.0) {
      out.du += (wh * pass.gate_x) * smooth_indicator_gradient(u, ind.r_u, ind.eps);
    }
    if (pass.gate_u != 0.0) {
      out.dx += (wh * pass.gate_u) * smooth_indicator_gradient(x, ind.r_x, ind.eps);
    }
  }
  return out;
}

Vector vjp_u(const NetworkSpec& spec, const Vector& u, const Vector& x, const Vector& cotangent) {
  return pullback(spec, evaluate(spec, u, x), u, x, cotangent).du;
}

Matrix jacobian_u(const NetworkSpec& spec, const Vector& u, const Vector& x) {
  const ForwardPass pass = evaluate(spec, u, x);
  Matrix jac(spec.output_dim(), spec.param_dim());
  for (int a = 0; a < spec.output_dim(); ++a) {
    jac.row(a) = pullback(spec, pass, u, x, Vector::Unit(spec.output_dim(), a)).du.transpose();
  }
  return jac;
}

Matrix jacobian_x(const NetworkSpec& spec, const Vector& u, const Vector& x) {
  const ForwardPass pass = evaluate(spec, u, x);
  Matrix jac(spec.output_dim(), spec.input_dim());
  for (int a = 0; a < spec.output_dim(); ++a) {
    jac.row(a) = pullback(spec, pass, u, x, Vector::Unit(spec.output_dim(), a)).dx.transpose();
  }
  return jac;
}

double min_abs_preactivation(const NetworkSpec& spec, const Vector& u, const Vector& x) {
  const ForwardPass pass = evaluate(spec, u, x);
  double best = std::numeric_limits<double>::infinity();
  for (int n = 1; n <= spec.depth(); ++n) best = std::min(best, pass.pre[n].cwiseAbs().minCoeff());
  return best;
}

NetworkProbe estimate_lipschitz(const NetworkSpec& spec, Rng& rng, int samples, double safety) {
  const auto& ind = spec.indicator();
  const Eigen::Index du = spec.param_dim();
  const Eigen::Index dx = spec.input_dim();
  NetworkProbe probe;
  for (int s = 0; s < samples; ++s) {
    const bool volume = (s % 2) == 1;
    const Vector u = probe_point(du, ind.r_u + ind.eps, rng, volume);
    const Vector x = probe_point(dx, ind.r_x + ind.eps, rng, volume);
    const ForwardPass pass = evaluate(spec, u, x);
    Matrix joint(spec.output_dim(), du + dx);
    for (int a = 0; a < spec.output_dim(); ++a) {
      const Pullback pb = pullback(spec, pass, u, x, Vector::Unit(spec.output_dim(), a));
      joint.row(a).head(du) = pb.du.transpose();
      joint.row(a).tail(dx) = pb.dx.transpose();
    }
    const double norm = Eigen::JacobiSVD<Matrix>(joint).singularValues()(0);
    probe.value = std::max(probe.value, norm);
    ++probe.samples;
  }
  probe.value *= safety;
  return probe;
}

NetworkProbe estimate_output_bound(const NetworkSpec& spec, const Matrix& support, Rng& rng,
                                   int samples) {
  if (support.cols() != spec.input_dim()) throw DimensionError("network: support dimension mismatch");
  const auto& ind = spec.indicator();
  std::uniform_int_distribution<Eigen::Index> pick(0, support.rows() - 1);
  NetworkProbe probe;
  for (int s = 0; s < samples; ++s) {
    const Vector u = probe_point(spec.param_dim(), ind.r_u + ind.eps, rng, (s % 2) == 1);
    const Vector x = support.row(pick(rng)).transpose();
    probe.value = std::max(probe.value, forward(spec, u, x).norm());
    ++probe.samples;
  }
  return probe;
}

NetworkProbe estimate_second_derivative_bound(const NetworkSpec& spec, const Matrix& support,
                                              Rng& rng, int samples, double h) {
  if (support.cols() != spec.input_dim()) throw DimensionError("network: support dimension mismatch");
  const auto& ind = spec.indicator();
  const Eigen::Index du = spec.param_dim();
  const int dy = spec.output_dim();
  const bool kinked = spec.activation().kind == Activation::relu ||
                      spec.activation().kind == Activation::leaky_relu;
  std::uniform_int_distribution<Eigen::Index> pick(0, support.rows() - 1);
  NetworkProbe probe;
  int attempts = 0;
  while (probe.samples < samples && attempts < 20 * samples) {
    ++attempts;
    const Vector u = probe_point(du, ind.r_u + ind.eps, rng, (attempts % 2) == 1);
    const Vector x = support.row(pick(rng)).transpose();
    // Central differences straddling a relu kink measure the jump, not a
    // second derivative; those points are redrawn.
    if (kinked && min_abs_preactivation(spec, u, x) < 1e-3) continue;
    const Vector t0 = forward(spec, u, x);
    const Matrix j0 = jacobian_u(spec, u, x);
    // d2[i2] is the d_y × d_u matrix ∂/∂u_{i2} of the Jacobian.
    std::vector<Matrix> d2(du);
    for (Eigen::Index i2 = 0; i2 < du; ++i2) {
      Vector up = u, um = u;
      up[i2] += h;
      um[i2] -= h;
      d2[i2] = (jacobian_u(spec, up, x) - jacobian_u(spec, um, x)) / (2.0 * h);
    }
    double local = 0.0;
    for (Eigen::Index i1 = 0; i1 < du; ++i1) {
      for (Eigen::Index i2 = 0; i2 < du; ++i2) {
        local = std::max(local, d2[i2].col(i1).norm());
        for (int a = 0; a < dy; ++a) {
          for (int b = 0; b < dy; ++b) {
            const double val = j0(a, i1) * j0(b, i2) + j0(a, i2) * j0(b, i1) +
                               t0[a] * d2[i2](b, i1) + t0[b] * d2[i2](a, i1);
            local = std::max(local, std::abs(val));
          }
        }
      }
    }
    probe.value = std::max(probe.value, local);
    ++probe.samples;
  }
  return probe;
}

}  // namespace swsgd
