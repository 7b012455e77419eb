#include <gtest/gtest.h>

#include <fstream>

#include "swsgd/measures.hpp"
#include "test_util.hpp"

using namespace swsgd;
using testing_util::gaussian;

TEST(Sphere, DimOneGivesPlusOrMinusOne) {
  Rng rng = make_rng(1);
  bool seen_pos = false, seen_neg = false;
  for (int i = 0; i < 200; ++i) {
    const double v = sample_unit_sphere(1, rng)[0];
    ASSERT_TRUE(v == 1.0 || v == -1.0);
    (v > 0 ? seen_pos : seen_neg) = true;
  }
  EXPECT_TRUE(seen_pos && seen_neg);
}

TEST(Sphere, UnitNorm) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng = make_rng(seed);
    EXPECT_NEAR(sample_unit_sphere(5, rng).norm(), 1.0, 1e-12);
  }
}

TEST(Sphere, ZeroDimensionRejected) {
  Rng rng = make_rng(0);
  EXPECT_THROW(sample_unit_sphere(0, rng), DimensionError);
}

TEST(Sphere, MeanAndCovarianceIsotropic) {
  Rng rng = make_rng(2024);
  const int draws = 100000;
  Vector mean = Vector::Zero(3);
  Matrix cov = Matrix::Zero(3, 3);
  for (int i = 0; i < draws; ++i) {
    const Vector v = sample_unit_sphere(3, rng);
    mean += v;
    cov += v * v.transpose();
  }
  mean /= draws;
  cov /= draws;
  EXPECT_LT(mean.cwiseAbs().maxCoeff(), 0.02);
  EXPECT_LT((cov - Matrix::Identity(3, 3) / 3.0).cwiseAbs().maxCoeff(), 0.02);
}

TEST(Measure, WeightsNormalized) {
  Rng rng = make_rng(3);
  for (int i = 0; i < 20; ++i) {
    const Matrix pts = gaussian(7, 2, rng);
    const Vector w = gaussian(7, rng).cwiseAbs() * 1e3;
    EXPECT_NEAR(DiscreteMeasure(pts, w).weights().sum(), 1.0, 1e-12);
    EXPECT_NEAR(DiscreteMeasure(pts).weights().sum(), 1.0, 1e-12);
  }
}

TEST(Measure, RejectsBadInput) {
  EXPECT_THROW(DiscreteMeasure(Matrix(0, 2)), std::logic_error);
  Matrix pts(2, 1);
  pts << 0.0, 1.0;
  EXPECT_THROW(DiscreteMeasure(pts, Vector::Constant(2, 0.0)), std::logic_error);
  Vector neg(2);
  neg << 1.0, -0.5;
  EXPECT_THROW(DiscreteMeasure(pts, neg), std::logic_error);
  pts(1, 0) = std::nan("");
  EXPECT_THROW(DiscreteMeasure{pts}, std::logic_error);
}

TEST(Measure, LoadCsvWithWeights) {
  const auto dir = testing_util::scratch_dir("measure_csv");
  std::ofstream(dir / "m.csv") << "x,y,w\n0,0,1\n# comment\n1,2,3\n";
  const auto m = DiscreteMeasure::load_csv(dir / "m.csv", true);
  ASSERT_EQ(m.size(), 2);
  EXPECT_EQ(m.dim(), 2);
  EXPECT_DOUBLE_EQ(m.weights()[1], 0.75);
  const auto u = DiscreteMeasure::load_csv(dir / "m.csv", false);
  EXPECT_EQ(u.dim(), 3);
  EXPECT_DOUBLE_EQ(u.weights()[0], 0.5);
  EXPECT_THROW(DiscreteMeasure::load_csv(dir / "missing.csv"), std::runtime_error);
}

TEST(Batch, DiracRowsAllEqual) {
  Vector x0(2);
  x0 << 0.3, -1.2;
  const auto mx = DiscreteMeasure::dirac(x0);
  const auto my = DiscreteMeasure::dirac(Vector::Ones(1));
  Rng rng = make_rng(5);
  const auto b = sample_batch(mx, my, 6, 3, rng);
  for (Eigen::Index k = 0; k < 6; ++k) EXPECT_EQ(b.x.row(k), x0.transpose());
  EXPECT_EQ(b.thetas.rows(), 3);
  for (Eigen::Index l = 0; l < 3; ++l) EXPECT_NEAR(b.thetas.row(l).norm(), 1.0, 1e-12);
}

TEST(Batch, AtomFrequencies) {
  Matrix pts(4, 1);
  pts << 0, 1, 2, 3;
  const DiscreteMeasure m(pts);
  Rng rng = make_rng(6);
  const auto b = sample_batch(m, m, 100000, 1, rng);
  for (int a = 0; a < 4; ++a) {
    const double freq = (b.x.col(0).array() == a).cast<double>().mean();
    EXPECT_NEAR(freq, 0.25, 0.01);
  }
}

TEST(Batch, NonUniformWeightsRespected) {
  Matrix pts(2, 1);
  pts << 0, 1;
  Vector w(2);
  w << 0.9, 0.1;
  const DiscreteMeasure m(pts, w);
  Rng rng = make_rng(8);
  const auto b = sample_batch(m, m, 50000, 1, rng);
  EXPECT_NEAR(b.x.col(0).mean(), 0.1, 0.01);
}

TEST(Batch, DeterministicForSeed) {
  const DiscreteMeasure m(Matrix::Identity(3, 3));
  Rng a = make_rng(11), b = make_rng(11);
  const auto ba = sample_batch(m, m, 5, 2, a);
  const auto bb = sample_batch(m, m, 5, 2, b);
  EXPECT_EQ(ba.x, bb.x);
  EXPECT_EQ(ba.y, bb.y);
  EXPECT_EQ(ba.thetas, bb.thetas);
}

TEST(Project, CoordinateAndDiagonal) {
  Vector e1(2);
  e1 << 1, 0;
  const Vector p = project(Matrix::Identity(2, 2), e1);
  EXPECT_EQ(p[0], 1.0);
  EXPECT_EQ(p[1], 0.0);
  Matrix ones(1, 2);
  ones << 1, 1;
  Vector diag(2);
  diag << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0);
  EXPECT_NEAR(project(ones, diag)[0], 1.414213562373095, 1e-15);
}

TEST(Project, NegatedDirectionAndLinearity) {
  Rng rng = make_rng(12);
  for (int i = 0; i < 100; ++i) {
    const Matrix x1 = gaussian(6, 3, rng), x2 = gaussian(6, 3, rng);
    const Vector th = sample_unit_sphere(3, rng);
    EXPECT_EQ(project(x1, -th), -project(x1, th));
    const double a = 1.7, b = -0.4;
    EXPECT_LT((project(a * x1 + b * x2, th) - (a * project(x1, th) + b * project(x2, th)))
                  .cwiseAbs()
                  .maxCoeff(),
              1e-12);
  }
}

TEST(Project, DimensionMismatch) {
  EXPECT_THROW(project(Matrix::Zero(2, 3), Vector::Ones(2)), DimensionError);
}

TEST(Seeds, DerivedStreamsDiffer) {
  EXPECT_NE(derive_seed(1, 1), derive_seed(1, 2));
  EXPECT_NE(derive_seed(1, 1), derive_seed(2, 1));
  EXPECT_EQ(derive_seed(9, 3), derive_seed(9, 3));
}
