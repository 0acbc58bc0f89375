#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "bayesregion/statespace.hpp"

using namespace bayesregion;

namespace {

ParamVector vec(std::initializer_list<double> xs) {
  ParamVector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

}  // namespace

TEST(Volume, ClosedForms) {
  EXPECT_NEAR(lebesgue_volume(2), std::numbers::pi / 6.0, 1e-15);
  EXPECT_NEAR(lebesgue_volume(3), std::pow(std::numbers::pi, 3) / 20160.0, 1e-18);
  // D = 4: pi^6 (1! 2! 3!) / 15!
  const double v4 = std::pow(std::numbers::pi, 6) * 12.0 / 1307674368000.0;
  EXPECT_NEAR(lebesgue_volume(4), v4, 1e-13 * v4);
  EXPECT_THROW(lebesgue_volume(1), ConfigError);
}

TEST(Volume, SpaceVolumes) {
  EXPECT_DOUBLE_EQ(StateSpace::qubit(1).volume(), 1.0);
  EXPECT_DOUBLE_EQ(StateSpace::qubit(2).volume(), std::numbers::pi / 4.0);
  EXPECT_DOUBLE_EQ(StateSpace::qubit(3).volume(), std::numbers::pi / 6.0);
  EXPECT_DOUBLE_EQ(StateSpace::qutrit().volume(), lebesgue_volume(3));
  EXPECT_DOUBLE_EQ(StateSpace::interval(0.2, 0.7).volume(), 0.5);
}

TEST(Physical, QubitExamples) {
  const StateSpace q = StateSpace::qubit(3);
  EXPECT_TRUE(q.is_physical(vec({0.5, 0.0, 0.0})));
  EXPECT_TRUE(q.is_physical(vec({1.0, 0.0, 0.0})));
  EXPECT_TRUE(q.is_physical(vec({0.5, 0.5, 0.0})));
  EXPECT_FALSE(q.is_physical(vec({0.5, 0.4, 0.31})));
  EXPECT_FALSE(q.is_physical(vec({1.01, 0.0, 0.0})));
  EXPECT_FALSE(q.is_physical(vec({0.8, 0.4, 0.1})));  // |r2 - i r3|^2 = 0.17 > 0.16
  EXPECT_THROW(q.is_physical(vec({0.5, 0.0})), std::invalid_argument);
}

TEST(Physical, QubitMatchesDiscriminant) {
  const StateSpace q = StateSpace::qubit(3);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 20000; ++k) {
    const ParamVector r = vec({0.5 + 0.6 * u(rng), 0.6 * u(rng), 0.6 * u(rng)});
    const double margin = r[0] * (1.0 - r[0]) - r[1] * r[1] - r[2] * r[2];
    if (std::abs(margin) < 1e-9) continue;
    ASSERT_EQ(q.is_physical(r), margin > 0.0 && r[0] >= 0.0 && r[0] <= 1.0) << r.transpose();
  }
}

TEST(Physical, QutritMatchesEigenvalues) {
  const StateSpace q = StateSpace::qutrit();
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (int k = 0; k < 5000; ++k) {
    ParamVector r(8);
    r[0] = 0.33 + 0.3 * u(rng);
    r[1] = 0.33 + 0.3 * u(rng);
    for (int j = 2; j < 8; ++j) r[j] = 0.4 * u(rng);
    const double m = q.min_eigenvalue(r);
    if (std::abs(m) < 1e-9) continue;
    ASSERT_EQ(q.is_physical(r), m > 0.0);
  }
}

TEST(Physical, MatrixRoundTrip) {
  const StateSpace q = StateSpace::qutrit();
  const ParamVector r = vec({0.2, 0.3, 0.1, -0.05, 0.02, 0.0, -0.1, 0.07});
  const ParamVector back = q.from_matrix(q.to_matrix(r));
  EXPECT_LE((back - r).norm(), 1e-14);
  EXPECT_NEAR(q.to_matrix(r).trace().real(), 1.0, 1e-15);
}

TEST(Boundary, QubitExample) {
  const StateSpace q = StateSpace::qubit(3);
  const ParamVector p = q.project_to_boundary(vec({1.2, 0.0, 0.0}));
  EXPECT_LE((p - vec({1.0, 0.0, 0.0})).norm(), 1e-14);
  EXPECT_THROW(q.project_to_boundary(vec({0.5, 0.0, 0.0})), std::domain_error);
}

TEST(Boundary, IntervalClamps) {
  const StateSpace s = StateSpace::interval(0.0, 1.0);
  EXPECT_EQ(s.project_to_boundary(vec({1.3}))[0], 1.0);
  EXPECT_EQ(s.project_to_boundary(vec({-0.2}))[0], 0.0);
  EXPECT_THROW(s.project_to_boundary(vec({0.4})), std::domain_error);
}

TEST(Boundary, LandsOnRankDeficientUnitTrace) {
  for (const StateSpace& q : {StateSpace::qubit(3), StateSpace::qutrit()}) {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int k = 0; k < 200; ++k) {
      ParamVector r = q.center();
      for (int j = 0; j < q.dim(); ++j) r[j] += 0.8 * g(rng);
      if (q.min_eigenvalue(r) > 0.0) continue;
      const ParamVector b = q.project_to_boundary(r);
      EXPECT_NEAR(q.min_eigenvalue(b), 0.0, 1e-12);
      EXPECT_NEAR(q.to_matrix(b).trace().real(), 1.0, 1e-12);
      EXPECT_TRUE(q.is_physical(b) || q.min_eigenvalue(b) > -1e-12);
    }
  }
}

TEST(Projection, IdempotentAndNearest) {
  const StateSpace q = StateSpace::qubit(3);
  const ParamVector outside = vec({0.5, 0.9, 0.0});
  const ParamVector p = q.project(outside);
  EXPECT_LE((q.project(p) - p).norm(), 1e-12);
  EXPECT_NEAR(q.min_eigenvalue(p), 0.0, 1e-12);
  // Frobenius-nearest point of the ball: radial pull towards the centre
  EXPECT_LE((p - vec({0.5, 0.5, 0.0})).norm(), 1e-12);
  const ParamVector inside = vec({0.3, 0.1, -0.2});
  EXPECT_LE((q.project(inside) - inside).norm(), 1e-14);
}

TEST(Convexity, Midpoints) {
  for (const StateSpace& q : {StateSpace::qubit(2), StateSpace::qubit(3), StateSpace::qutrit()}) {
    const SampleSet s = rejection_sample(q, 2000, 17, SamplingBox::Tight);
    std::mt19937_64 rng(18);
    std::uniform_int_distribution<Eigen::Index> pick(0, s.points.rows() - 1);
    std::uniform_real_distribution<double> t(0.0, 1.0);
    for (int k = 0; k < 2000; ++k) {
      const ParamVector a = s.points.row(pick(rng)).transpose();
      const ParamVector b = s.points.row(pick(rng)).transpose();
      const double w = t(rng);
      ASSERT_TRUE(q.is_physical(w * a + (1.0 - w) * b));
    }
  }
}

TEST(Sampling, AllPointsPhysicalAndInBox) {
  const StateSpace q = StateSpace::qubit(3);
  const SampleSet s = rejection_sample(q, 5000, 1);
  ASSERT_EQ(s.size(), 5000u);
  for (Eigen::Index i = 0; i < s.points.rows(); ++i) {
    const ParamVector r = s.points.row(i).transpose();
    ASSERT_TRUE(q.is_physical(r));
    for (int j = 0; j < 3; ++j) {
      ASSERT_GE(r[j], q.bounding_box()[j].lo);
      ASSERT_LE(r[j], q.bounding_box()[j].hi);
    }
  }
  EXPECT_GE(s.attempts, 5000u);
}

TEST(Sampling, MonteCarloVolumeWithinThreeSigma) {
  for (int d = 2; d <= 3; ++d) {
    for (SamplingBox box : {SamplingBox::Paper, SamplingBox::Tight}) {
      const StateSpace q = StateSpace::qubit(d);
      const VolumeEstimate v = mc_volume(q, rejection_sample(q, 100000, 40 + d, box));
      EXPECT_LE(std::abs(v.volume - q.volume()), 3.0 * v.stderr_) << d;
    }
  }
}

TEST(Sampling, TightBoxCoversTheSameSet) {
  // off-diagonal moduli never exceed 1/2, so both boxes give the same uniform law
  const StateSpace q = StateSpace::qubit(3);
  const SampleSet paper = rejection_sample(q, 200000, 5, SamplingBox::Paper);
  for (Eigen::Index i = 0; i < paper.points.rows(); ++i) {
    ASSERT_LE(std::abs(paper.points(i, 1)), 0.5);
    ASSERT_LE(std::abs(paper.points(i, 2)), 0.5);
  }
  const SampleSet tight = rejection_sample(q, 200000, 6, SamplingBox::Tight);
  const Eigen::RowVectorXd m1 = paper.points.colwise().mean();
  const Eigen::RowVectorXd m2 = tight.points.colwise().mean();
  EXPECT_NEAR(m1[0], 0.5, 0.005);
  EXPECT_NEAR(m2[0], 0.5, 0.005);
  EXPECT_NEAR(m1[1], m2[1], 0.005);
}

TEST(Sampling, ThreadCountIndependent) {
  const StateSpace q = StateSpace::qutrit();
  set_thread_count(1);
  const SampleSet a = rejection_sample(q, 500, 77, SamplingBox::Tight);
  set_thread_count(3);
  const SampleSet b = rejection_sample(q, 500, 77, SamplingBox::Tight);
  set_thread_count(0);
  const SampleSet c = rejection_sample(q, 500, 77, SamplingBox::Tight);
  EXPECT_EQ(a.attempts, b.attempts);
  EXPECT_TRUE(a.points == b.points);
  EXPECT_TRUE(a.points == c.points);
  const SampleSet other = rejection_sample(q, 500, 78, SamplingBox::Tight);
  EXPECT_FALSE(a.points == other.points);
}

TEST(Labels, Parsing) {
  EXPECT_EQ(make_space("qubit2").dim(), 2);
  EXPECT_EQ(make_space("qutrit").dim(), 8);
  EXPECT_DOUBLE_EQ(make_space("interval(0.25,0.75)").volume(), 0.5);
  EXPECT_THROW(make_space("qubit4"), ConfigError);
  EXPECT_THROW(make_space("interval(1,0)"), ConfigError);
  EXPECT_THROW(make_space("interval(a,b)"), ConfigError);
  EXPECT_THROW(make_space("interval(0.1)"), ConfigError);
}
