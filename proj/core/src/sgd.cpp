#include "swsgd/sgd.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "swsgd/document.hpp"

namespace swsgd {
namespace {

// Independent streams derived from the run seed.
constexpr std::uint64_t kPopulationStream = 1;
constexpr std::uint64_t kNoiseStream = 2;

void check_finite(const Vector& u, long step) {
  if (!u.allFinite()) {
    throw DivergenceError("SGD iterate became non-finite at step " + std::to_string(step) +
                              " (step size too large?)",
                          step);
  }
}

}  // namespace

std::string to_string(Scheme s) { return s == Scheme::plain ? "plain" : "projected_noised"; }

Scheme parse_scheme(const std::string& name) {
  if (name == "plain") return Scheme::plain;
  if (name == "projected_noised") return Scheme::projected_noised;
  throw std::invalid_argument("unknown SGD scheme '" + name + "'");
}

std::string to_string(NoiseLaw n) { return n == NoiseLaw::gaussian ? "gaussian" : "uniform_ball"; }

NoiseLaw parse_noise_law(const std::string& name) {
  if (name == "gaussian") return NoiseLaw::gaussian;
  if (name == "uniform_ball") return NoiseLaw::uniform_ball;
  throw std::invalid_argument("unknown noise law '" + name + "'");
}

InitLaw InitLaw::at(Vector u0) {
  InitLaw law;
  law.kind = Kind::point;
  law.point = std::move(u0);
  return law;
}

InitLaw InitLaw::uniform_ball(double radius) {
  InitLaw law;
  law.kind = Kind::ball;
  law.radius = radius;
  return law;
}

InitLaw InitLaw::from_network() {
  InitLaw law;
  law.kind = Kind::network;
  return law;
}

std::string InitLaw::describe() const {
  switch (kind) {
    case Kind::point: {
      std::string out = "point";
      for (Eigen::Index j = 0; j < point.size(); ++j) out += " " + format_double(point[j]);
      return out;
    }
    case Kind::ball: return radius > 0.0 ? "ball " + format_double(radius) : "ball";
    case Kind::network: return "network";
  }
  return "ball";
}

InitLaw InitLaw::parse(const std::string& text) {
  std::istringstream in(text);
  std::string kind;
  in >> kind;
  if (kind == "network") return from_network();
  if (kind == "ball") {
    double r = 0.0;
    if (!(in >> r)) r = 0.0;
    return uniform_ball(r);
  }
  if (kind == "point") {
    std::vector<double> coords;
    std::string tok;
    while (in >> tok) coords.push_back(std::stod(tok));
    if (coords.empty()) throw std::invalid_argument("init 'point' needs coordinates");
    return at(Eigen::Map<Vector>(coords.data(), static_cast<Eigen::Index>(coords.size())));
  }
  throw std::invalid_argument("unknown init law '" + text + "' (point ..., ball [r], network)");
}

void SGDConfig::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("SGD: alpha must be positive");
  if (t_max < 0) throw DomainError("SGD: t_max must be nonnegative");
  if (n < 1 || directions < 1) throw DomainError("SGD: n and directions must be >= 1");
  if (scheme == Scheme::projected_noised) {
    if (!(radius > 0.0)) throw DomainError("SGD: projection radius must be positive");
    if (!(beta >= 0.0)) throw DomainError("SGD: noise level must be nonnegative");
  }
  if (loss_every < 0) throw DomainError("SGD: loss_every must be nonnegative");
}

Vector project_ball(const Vector& u, double r) {
  if (!(r > 0.0)) throw DomainError("project_ball: radius must be positive");
  const double norm = u.norm();
  if (norm <= r) return u;
  Vector out = (r / norm) * u;
  // Rounding can leave ‖out‖ a few ulps above r; shrink until it is not.
  while (out.norm() > r) out *= (1.0 - 1e-16);
  return out;
}

Vector step_plain(const NetworkSpec& spec, const Vector& u, const SampleBatch& batch, double alpha,
                  OrderP p) {
  if (!(alpha > 0.0)) throw DomainError("step_plain: alpha must be positive");
  return u - alpha * grad_phi(spec, u, batch, p);
}

Vector step_projected_noised(const NetworkSpec& spec, const Vector& u, const SampleBatch& batch,
                             const Vector& noise, double alpha, double beta, double r, OrderP p) {
  if (!(alpha > 0.0)) throw DomainError("step_projected_noised: alpha must be positive");
  if (noise.size() != u.size()) throw DimensionError("step_projected_noised: noise dimension");
  return project_ball(u - alpha * grad_phi(spec, u, batch, p) + (alpha * beta) * noise, r);
}

Vector draw_initial(const NetworkSpec& spec, const InitLaw& init, Rng& rng) {
  switch (init.kind) {
    case InitLaw::Kind::point:
      if (init.point.size() != spec.param_dim()) {
        throw DimensionError("init point has " + std::to_string(init.point.size()) +
                             " coordinates, network has " + std::to_string(spec.param_dim()) +
                             " parameters");
      }
      return init.point;
    case InitLaw::Kind::ball: {
      const auto& ind = spec.indicator();
      const double r = init.radius > 0.0 ? init.radius : std::min(1.0, ind.r_u - ind.eps);
      return sample_ball(Vector::Zero(spec.param_dim()), r, rng);
    }
    case InitLaw::Kind::network: return spec.initial_parameters();
  }
  return Vector::Zero(spec.param_dim());
}

Vector draw_noise(NoiseLaw law, Eigen::Index dim, Rng& rng) {
  if (law == NoiseLaw::uniform_ball) return sample_ball(Vector::Zero(dim), 1.0, rng);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector e(dim);
  for (Eigen::Index j = 0; j < dim; ++j) e[j] = normal(rng);
  return e;
}

std::optional<std::string> step_threshold_warning(const NetworkSpec& spec, double alpha,
                                                  double radius_y, double m_hat) {
  if (!(m_hat > 0.0)) return std::nullopt;
  const double a0 = alpha_zero(spec.output_dim(), std::max(radius_y, 1e-12), spec.param_dim(), m_hat);
  if (alpha < a0) return std::nullopt;
  return "alpha = " + format_double(alpha) + " >= alpha_0 = " + format_double(a0) +
         " (M = " + format_double(m_hat) + "); the small-step convergence guarantees do not apply";
}

Trajectory run(const NetworkSpec& spec, const SGDConfig& config, const DiscreteMeasure& mx,
               const DiscreteMeasure& my) {
  config.validate();
  if (mx.dim() != spec.input_dim() || my.dim() != spec.output_dim()) {
    throw DimensionError("SGD: measure dimensions do not match the network");
  }
  Rng rng = make_rng(config.seed);
  Rng population_rng = make_rng(derive_seed(config.seed, kPopulationStream));
  Rng noise_rng = make_rng(derive_seed(config.seed, kNoiseStream));

  Trajectory traj;
  traj.config = config;
  traj.iterates.resize(config.t_max + 1, spec.param_dim());
  traj.loss.resize(config.t_max + 1);
  traj.grad_norm.resize(config.t_max + 1);
  if (auto warn = step_threshold_warning(spec, config.alpha, my.support_radius(), config.m_hat)) {
    traj.warnings.push_back(*warn);
  }
  if (!config.p.quadratic()) {
    traj.warnings.push_back("p != 2: criticality diagnostics rely on the unproven path "
                            "differentiability of the order-p sliced loss");
  }

  Vector u = draw_initial(spec, config.init, rng);
  check_finite(u, 0);
  if (config.scheme == Scheme::projected_noised) u = project_ball(u, config.radius);
  traj.iterates.row(0) = u.transpose();

  auto record_population = [&](long t) {
    if (config.loss_every > 0 && t % config.loss_every == 0) {
      traj.population.push_back(
          {t, estimate_population_loss(spec, u, mx, my, config.n, config.loss_mode,
                                       population_rng, config.p)});
    }
  };

  for (long t = 0; t < config.t_max; ++t) {
    record_population(t);
    const SampleBatch batch = sample_batch(mx, my, config.n, config.directions, rng);
    const LossAndGradient lg = sample_loss_and_gradient(spec, u, batch, config.p);
    traj.loss[t] = lg.loss;
    traj.grad_norm[t] = lg.gradient.norm();
    if (config.scheme == Scheme::plain) {
      u = u - config.alpha * lg.gradient;
    } else {
      const Vector noise = draw_noise(config.noise, spec.param_dim(), noise_rng);
      u = project_ball(u - config.alpha * lg.gradient + (config.alpha * config.beta) * noise,
                       config.radius);
    }
    check_finite(u, t + 1);
    traj.iterates.row(t + 1) = u.transpose();
  }
  record_population(config.t_max);
  const SampleBatch last = sample_batch(mx, my, config.n, config.directions, rng);
  const LossAndGradient lg = sample_loss_and_gradient(spec, u, last, config.p);
  traj.loss[config.t_max] = lg.loss;
  traj.grad_norm[config.t_max] = lg.gradient.norm();
  return traj;
}

}  // namespace swsgd
