#include <gtest/gtest.h>

#include "swsgd/toy.hpp"
#include "swsgd/trajectory.hpp"
#include "test_util.hpp"

using namespace swsgd;
using testing_util::gaussian;

namespace {

AffinePath random_path(Eigen::Index knots, double step, Rng& rng) {
  return AffinePath(gaussian(knots, 3, rng), step);
}

// Constant offset paths: ‖a(s) − b(s)‖ = c for every s.
std::pair<AffinePath, AffinePath> offset_pair(double c) {
  Matrix a = Matrix::Zero(11, 2), b = Matrix::Zero(11, 2);
  for (int t = 0; t <= 10; ++t) {
    a(t, 0) = std::sin(t);
    b(t, 0) = std::sin(t);
    b(t, 1) = c;
  }
  return {AffinePath(a, 1.0), AffinePath(b, 1.0)};
}

NetworkSpec scalar_net() {
  DenseOptions o;
  o.bias = false;
  return NetworkSpec::dense({1, 1}, ActivationFn{}, IndicatorShape{10.0, 10.0, 0.5}, o);
}

}  // namespace

TEST(Interpolate, KnotsAndMidpoint) {
  Rng rng = make_rng(1);
  const auto path = random_path(6, 0.1, rng);
  EXPECT_EQ(interpolate(path, 0.0), Vector(path.knots().row(0).transpose()));
  EXPECT_EQ(interpolate(path, 0.5), Vector(path.knots().row(5).transpose()));
  for (int t = 0; t <= 5; ++t) EXPECT_EQ(path.at(t * 0.1), Vector(path.knots().row(t).transpose()));
  const Vector mid = 0.5 * (path.knots().row(0) + path.knots().row(1)).transpose();
  EXPECT_LT((interpolate(path, 0.05) - mid).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_THROW(interpolate(path, 0.6), DomainError);
  EXPECT_THROW(interpolate(path, -1e-3), DomainError);
}

TEST(Interpolate, AffineBetweenKnots) {
  Rng rng = make_rng(2);
  const auto path = random_path(20, 0.25, rng);
  for (int t = 0; t < 19; ++t) {
    const double s0 = t * 0.25 + 0.03;
    const double ds = 0.05;
    const Vector second = path.at(s0) - 2 * path.at(s0 + ds) + path.at(s0 + 2 * ds);
    EXPECT_LT(second.cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(Interpolate, FromTrajectory) {
  SGDConfig c;
  c.alpha = 0.1;
  c.t_max = 30;
  c.n = 2;
  const auto t = run(toy::network(), c, toy::inputs(), toy::targets());
  const auto path = AffinePath::from_trajectory(t);
  EXPECT_DOUBLE_EQ(path.horizon(), 3.0);
  EXPECT_EQ(path.at(path.horizon()), t.at(30));
}

TEST(DistanceDc, SeriesValues) {
  Rng rng = make_rng(3);
  const auto p = random_path(11, 1.0, rng);
  const auto same = distance_d_c(p, p);
  EXPECT_EQ(same.value, 0.0);
  EXPECT_EQ(same.truncation_bound, 0.00390625);
  const auto [a1, b1] = offset_pair(1.0);
  EXPECT_NEAR(distance_d_c(a1, b1).value, 0.99609375, 1e-15);
  const auto [a2, b2] = offset_pair(0.5);
  EXPECT_NEAR(distance_d_c(a2, b2).value, 0.498046875, 1e-15);
  const auto [a3, b3] = offset_pair(7.0);
  EXPECT_NEAR(distance_d_c(a3, b3).value, 0.99609375, 1e-15);
}

TEST(DistanceDc, Errors) {
  Rng rng = make_rng(4);
  const auto shortp = random_path(5, 1.0, rng);
  const auto longp = random_path(11, 1.0, rng);
  EXPECT_THROW(distance_d_c(shortp, longp, 8), DomainError);
  EXPECT_THROW(distance_d_c(longp, longp, 8, 1), DomainError);
  EXPECT_THROW(distance_d_c(longp, AffinePath(Matrix::Zero(11, 2), 1.0)), DimensionError);
}

TEST(DistanceDc, PseudometricProperties) {
  Rng rng = make_rng(5);
  for (int i = 0; i < 50; ++i) {
    const auto a = random_path(9 + i % 5, 1.0, rng);
    const auto b = AffinePath(gaussian(81, 3, rng) * 0.3, 0.1);
    const auto c = AffinePath(gaussian(17, 3, rng) * 0.2, 0.5);
    const double ab = distance_d_c(a, b).value, ba = distance_d_c(b, a).value;
    EXPECT_NEAR(ab, ba, 1e-14);
    EXPECT_LE(ab, distance_d_c(a, c).value + distance_d_c(c, b).value + 1e-12);
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, 1.0);
    double prev = 0.0;
    for (int k = 1; k <= 8; ++k) {
      const double v = distance_d_c(a, b, k).value;
      EXPECT_GE(v, prev);
      prev = v;
    }
    EXPECT_LE(distance_d_c(a, b, 8).value - distance_d_c(a, b, 1).value, 0.5);
  }
}

TEST(DistanceDc, GridBoundCoversFinerGrid) {
  Rng rng = make_rng(6);
  for (int i = 0; i < 20; ++i) {
    const auto a = random_path(9, 1.0, rng);
    const auto b = random_path(17, 0.5, rng);
    const auto coarse = distance_d_c(a, b, 4, 4);
    const auto fine = distance_d_c(a, b, 4, 2000);
    EXPECT_LE(fine.value, coarse.value + coarse.grid_bound + 1e-12);
  }
}

TEST(Flow, ConstantAtPerfectFit) {
  const auto mx = DiscreteMeasure::dirac(Vector::Ones(1));
  const auto my = DiscreteMeasure::dirac(Vector::Constant(1, 3.0));
  FlowOptions o;
  o.horizon = 1.0;
  o.step_ref = 0.01;
  Rng rng = make_rng(7);
  const auto path = reference_flow(scalar_net(), Vector::Constant(1, 3.0), mx, my, 1, OrderP(), o, rng);
  EXPECT_TRUE((path.knots().array() == 3.0).all());
}

TEST(Flow, MatchesExponentialDecay) {
  // F(u) = (u − 3)², so u(s) = 3 + (u0 − 3) e^{−2s}.
  const auto mx = DiscreteMeasure::dirac(Vector::Ones(1));
  const auto my = DiscreteMeasure::dirac(Vector::Constant(1, 3.0));
  FlowOptions o;
  o.horizon = 1.0;
  o.step_ref = 1e-4;
  o.mode.exhaustive = true;
  Rng rng = make_rng(8);
  const auto path = reference_flow(scalar_net(), Vector::Constant(1, 5.0), mx, my, 1, OrderP(), o, rng);
  const double end = path.at(1.0)[0];
  EXPECT_LT(std::abs(end - 3.2706705664732256), 0.01 * 3.2706705664732256);
  EXPECT_LT(std::abs((end - 3.0) - 2.0 * std::exp(-2.0)), 1e-3);
}

TEST(Flow, HalvingStepChangesEndpointLittle) {
  FlowOptions o;
  o.horizon = 4.0;
  o.step_ref = 0.002;
  o.mode.exhaustive = true;
  Rng rng = make_rng(9);
  const auto coarse = reference_flow(toy::network(), toy::start(), toy::inputs(), toy::targets(), 2, OrderP(), o, rng);
  o.step_ref = 0.001;
  const auto fine = reference_flow(toy::network(), toy::start(), toy::inputs(), toy::targets(), 2, OrderP(), o, rng);
  EXPECT_LT((coarse.at(4.0) - fine.at(4.0)).norm(), 1e-3);
}

TEST(Flow, EnforcesStepRatio) {
  FlowOptions o;
  o.horizon = 1.0;
  o.step_ref = 0.01;
  o.compare_alpha = 0.1;
  Rng rng = make_rng(10);
  EXPECT_THROW(reference_flow(toy::network(), toy::start(), toy::inputs(), toy::targets(), 2, OrderP(), o, rng),
               DomainError);
}

TEST(Criticality, GapCases) {
  Vector u(2);
  u << 3.0, 4.0;
  EXPECT_EQ(criticality_gap(Vector::Zero(2), 0.1 * u, 5.0), 0.0);
  EXPECT_NEAR(criticality_gap(-2.0 * u, u, 5.0), 0.0, 1e-15);
  Vector perp(2);
  perp << -0.8, 0.6;
  EXPECT_NEAR(criticality_gap(perp, u, 5.0), 1.0, 1e-15);
  EXPECT_NEAR(criticality_gap(u, u, 5.0), 5.0, 1e-15);
  EXPECT_THROW(criticality_gap(perp, 1.01 * u, 5.0), DomainError);
}

TEST(Criticality, ContinuousAcrossTolerance) {
  Rng rng = make_rng(11);
  for (int i = 0; i < 500; ++i) {
    const double r = 0.5 + i * 0.01;
    Vector dir = sample_unit_sphere(4, rng);
    Vector g = gaussian(4, rng);
    if (g.dot(dir) < 0) g = -g;
    const double edge = criticality_gap(g, r * dir, r);
    const double inner = criticality_gap(g, r * (1 - 1e-9) * dir, r);
    EXPECT_NEAR(edge, inner, 1e-6);
  }
}

TEST(Criticality, PerfectFitGivesZero) {
  const auto mx = DiscreteMeasure::dirac(Vector::Ones(1));
  const auto my = DiscreteMeasure::dirac(Vector::Constant(1, 3.0));
  PopulationMode mode;
  Rng rng = make_rng(12);
  EXPECT_EQ(criticality_gap(scalar_net(), Vector::Constant(1, 3.0), 5.0, mx, my, 2, OrderP(), mode, rng), 0.0);
}
