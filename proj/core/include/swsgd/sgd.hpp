#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "swsgd/measures.hpp"
#include "swsgd/network.hpp"
#include "swsgd/swloss.hpp"

namespace swsgd {

enum class Scheme { plain, projected_noised };
enum class NoiseLaw { gaussian, uniform_ball };

std::string to_string(Scheme s);
Scheme parse_scheme(const std::string& name);
std::string to_string(NoiseLaw n);
NoiseLaw parse_noise_law(const std::string& name);

/// Law of u^(0).
struct InitLaw {
  enum class Kind { point, ball, network };
  Kind kind = Kind::ball;
  Vector point;         // Kind::point
  double radius = 0.0;  // Kind::ball; 0 selects min(1, R_u − ε)

  static InitLaw at(Vector u0);
  static InitLaw uniform_ball(double radius = 0.0);
  static InitLaw from_network();
  std::string describe() const;
  static InitLaw parse(const std::string& text);
};

struct SGDConfig {
  double alpha = 1e-2;
  Scheme scheme = Scheme::plain;
  double beta = 0.0;      // projected_noised only
  double radius = 10.0;   // projected_noised only
  long t_max = 1000;
  int n = 8;
  int directions = 1;
  OrderP p;
  InitLaw init;
  NoiseLaw noise = NoiseLaw::gaussian;
  std::uint64_t seed = 0;
  /// Every k-th iterate also records a population-loss estimate (0: off).
  long loss_every = 0;
  PopulationMode loss_mode;
  /// Second-derivative constant M̂ for the step-threshold warning (≤ 0: skip).
  double m_hat = 0.0;

  void validate() const;
};

struct PopulationRecord {
  long t = 0;
  LossEstimate estimate;
};

/// Iterates u^(0..t_max) with per-iterate diagnostics. Row t of `iterates` is
/// u^(t); loss[t] and grad_norm[t] are f and ‖φ‖ at u^(t) on the batch that
/// produces u^(t+1) (for t = t_max, on one extra batch).
struct Trajectory {
  Matrix iterates;
  Vector loss;
  Vector grad_norm;
  std::vector<PopulationRecord> population;
  SGDConfig config;
  std::vector<std::string> warnings;

  long steps() const noexcept { return static_cast<long>(iterates.rows()) - 1; }
  Vector at(long t) const { return iterates.row(t).transpose(); }
};

/// Orthogonal projection onto the closed ball B(0, r).
Vector project_ball(const Vector& u, double r);

Vector step_plain(const NetworkSpec& spec, const Vector& u, const SampleBatch& batch, double alpha,
                  OrderP p = {});

Vector step_projected_noised(const NetworkSpec& spec, const Vector& u, const SampleBatch& batch,
                             const Vector& noise, double alpha, double beta, double r,
                             OrderP p = {});

Vector draw_initial(const NetworkSpec& spec, const InitLaw& init, Rng& rng);
Vector draw_noise(NoiseLaw law, Eigen::Index dim, Rng& rng);

/// Returns a warning when alpha ≥ α₀(d_y, R_y, d_u, M̂).
std::optional<std::string> step_threshold_warning(const NetworkSpec& spec, double alpha,
                                                  double radius_y, double m_hat);

/// Runs the configured scheme for t_max steps. Deterministic given the seed;
/// throws DivergenceError naming the first step with a non-finite iterate.
Trajectory run(const NetworkSpec& spec, const SGDConfig& config, const DiscreteMeasure& mx,
               const DiscreteMeasure& my);

}  // namespace swsgd
