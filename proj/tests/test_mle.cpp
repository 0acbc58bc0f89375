#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "bayesregion/mle.hpp"

using namespace bayesregion;

namespace {

ParamVector vec(std::initializer_list<double> xs) {
  ParamVector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

// Point on the qubit2 disk boundary (r1 - 1/2)^2 + r2^2 = 1/4.
ParamVector disk_edge(double theta) { return vec({0.5 + 0.5 * std::cos(theta), 0.5 * std::sin(theta)}); }

}  // namespace

TEST(Ascent, SigmaZBoundaryAtOne) {
  const StateSpace space = StateSpace::interval(0.0, 1.0);
  const MlResult ml = maximize_likelihood(sigma_z_pom(), Dataset("sigma_z", {30, 0}), space);
  EXPECT_NEAR(ml.r_ml[0], 1.0, 1e-12);
  EXPECT_TRUE(ml.on_boundary);
  EXPECT_TRUE(ml.converged);
  EXPECT_NEAR(ml.log_L_max, 0.0, 1e-10);
  EXPECT_NEAR(ml.g_ml[0], 30.0, 1e-9);
  EXPECT_LT(ml.fisher_point[0], 1.0);  // p_2 vanishes, so F is taken slightly inside
}

TEST(Ascent, SigmaZInterior) {
  const StateSpace space = StateSpace::interval(0.0, 1.0);
  const MlResult ml = maximize_likelihood(sigma_z_pom(), Dataset("sigma_z", {99, 1}), space);
  EXPECT_NEAR(ml.r_ml[0], 0.99, 1e-9);
  EXPECT_FALSE(ml.on_boundary);
  EXPECT_NEAR(ml.F_ml(0, 0), 100.0 / (0.99 * 0.01), 1e-4);
  EXPECT_EQ(ml.g_ml.norm(), 0.0);
}

TEST(Ascent, ExactFrequenciesAreAFixedPoint) {
  const StateSpace space = StateSpace::qubit(3);
  const Pom pom = tetrahedron_pom(space);
  Eigen::Vector4d p(0.4, 0.25, 0.2, 0.15);
  const ParamVector r = pom.jacobian().colPivHouseholderQr().solve(p - pom.offset());
  const MlResult ml = maximize_likelihood(pom, Dataset("tetrahedron", {320, 200, 160, 120}), space);
  EXPECT_LE((ml.r_ml - r).norm(), 1e-7);
  EXPECT_FALSE(ml.on_boundary);
  EXPECT_TRUE(ml.converged);
}

TEST(Ascent, BeatsEveryGridPoint) {
  const StateSpace space = StateSpace::qubit(2);
  const Pom pom = crosshair_pom(space);
  const Dataset data("crosshair", {48, 2, 47, 3});  // frequencies outside the disk
  const MlResult ml = maximize_likelihood(pom, data, space);
  EXPECT_TRUE(ml.on_boundary);
  EXPECT_NEAR(space.min_eigenvalue(ml.r_ml), 0.0, 1e-9);
  double grid_best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 400; ++i) {
    for (int j = 0; j <= 400; ++j) {
      const ParamVector r = vec({i / 400.0, -0.5 + j / 400.0});
      if (!space.is_physical(r)) continue;
      grid_best = std::max(grid_best, log_likelihood(pom, data, r));
    }
  }
  for (int k = 0; k < 20000; ++k) {
    grid_best = std::max(grid_best, log_likelihood(pom, data, disk_edge(2.0 * std::numbers::pi * k / 20000)));
  }
  EXPECT_GE(ml.log_L_max, grid_best - 1e-9);
}

TEST(Ascent, QutritStaysPhysicalAndStationary) {
  const StateSpace space = StateSpace::qutrit();
  const Pom pom = random_bases_pom(space, 90);
  Eigen::Vector3cd psi = Eigen::Vector3cd::Constant(1.0 / std::sqrt(3.0));
  const ParamVector pure = space.from_matrix(psi * psi.adjoint());
  const Dataset data = sample_dataset(pom, pure, 30, 91);
  const MlResult ml = maximize_likelihood(pom, data, space);
  EXPECT_TRUE(ml.converged);
  EXPECT_GE(space.min_eigenvalue(ml.r_ml), -1e-12);
  EXPECT_TRUE(ml.on_boundary);
  // no feasible direction improves the likelihood to first order
  const SampleSet s = rejection_sample(space, 200, 3, SamplingBox::Tight);
  for (Eigen::Index i = 0; i < s.points.rows(); ++i) {
    const ParamVector dir = s.points.row(i).transpose() - ml.r_ml;
    EXPECT_LE(ml.g_ml.dot(dir), 1e-6 * data.N);
  }
}

TEST(BoundarySearch, GaussianOnTheDiskMatchesGrid) {
  const StateSpace space = StateSpace::qubit(2);
  const ParamVector center = vec({0.8, 0.3});
  Matrix F(2, 2);
  F << 400.0, 120.0, 120.0, 250.0;
  const GaussianLikelihood g{center, F, 0.0};
  BoundarySearchOptions opts;
  opts.eps_scale = 2.0;
  const BoundarySearchResult bs = estimate_boundary_max(g, space, center, F, 0.0, opts);
  ASSERT_TRUE(bs.found);
  double best = -std::numeric_limits<double>::infinity();
  ParamVector arg;
  for (int k = 0; k < 200000; ++k) {
    const ParamVector e = disk_edge(2.0 * std::numbers::pi * k / 200000);
    const double ll = g.log_likelihood(e);
    if (ll > best) {
      best = ll;
      arg = e;
    }
  }
  EXPECT_LE((bs.r_P - arg).norm(), 1e-3);
  EXPECT_LE(bs.lambda_int, 1.0);
  EXPECT_NEAR(bs.lambda_int, std::exp(best), 1e-3 * std::exp(best));
  EXPECT_GE(bs.lambda_int, bs.initial_lambda_int);
}

TEST(BoundarySearch, NoHitsMeansNotFound) {
  const StateSpace space = StateSpace::qubit(3);
  Matrix F = 1e8 * Matrix::Identity(3, 3);
  const GaussianLikelihood g{space.center(), F, 0.0};
  const BoundarySearchResult bs = estimate_boundary_max(g, space, space.center(), F, 0.0);
  EXPECT_FALSE(bs.found);
}

TEST(BoundaryGradient, SingleParameter) {
  const StateSpace space = StateSpace::interval(0.0, 0.8);
  const Pom pom = sigma_z_pom();
  const Dataset data("sigma_z", {90, 10});
  const MlResult ml = analyze(pom, data, space);
  ASSERT_EQ(ml.region_case, RegionCase::Boundary);
  EXPECT_NEAR(ml.r_ml[0], 0.8, 1e-12);
  const double g = 90.0 / 0.8 - 10.0 / 0.2;
  const double F = 100.0 / (0.8 * 0.2);
  EXPECT_NEAR(ml.g_ml[0], g, 1e-8);
  EXPECT_NEAR(ml.lambda_bd, std::exp(-g * g / (2.0 * F)), 1e-10);
}

TEST(BoundaryGradient, InvariantUnderRescaling) {
  const double c = 3.7;
  Matrix a(2, 1);
  a << 1.0 / c, -1.0 / c;
  Eigen::VectorXd b(2);
  b << 0.0, 1.0;
  const Pom scaled("sigma_z", a, b);
  const Dataset data("sigma_z", {90, 10});
  const MlResult ml1 = analyze(sigma_z_pom(), data, StateSpace::interval(0.0, 0.8));
  const MlResult ml2 = analyze(scaled, data, StateSpace::interval(0.0, 0.8 * c));
  EXPECT_NEAR(ml2.g_ml[0], ml1.g_ml[0] / c, 1e-8);
  EXPECT_NEAR(ml1.lambda_bd, ml2.lambda_bd, 1e-10);
}

TEST(BoundaryGradient, ZeroGradientGivesOne) {
  MlResult ml;
  ml.r_ml = vec({0.5});
  ml.F_ml = Matrix::Constant(1, 1, 400.0);
  const BoundaryGradient bg = boundary_gradient(sigma_z_pom(), Dataset("sigma_z", {50, 50}), ml);
  EXPECT_NEAR(bg.g_ml[0], 0.0, 1e-12);
  EXPECT_EQ(bg.lambda_bd, 1.0);
}

TEST(Classification, InteriorFull) {
  const StateSpace space = StateSpace::qubit(3);
  const Pom pom = tetrahedron_pom(space);
  const MlResult ml = analyze(pom, deterministic_counts(pom, space.center(), 4000), space);
  EXPECT_EQ(ml.region_case, RegionCase::InteriorFull);
  EXPECT_EQ(ml.lambda_int, 0.0);
  EXPECT_EQ(ml.lambda_bd, 1.0);
}

TEST(Classification, InteriorTruncatedNearTheEdge) {
  const StateSpace space = StateSpace::qubit(2);
  const Pom pom = crosshair_pom(space);
  const MlResult ml = analyze(pom, deterministic_counts(pom, vec({0.75, 0.4}), 500), space);
  EXPECT_EQ(ml.region_case, RegionCase::InteriorTruncated);
  EXPECT_GT(ml.lambda_int, 1e-4);
  EXPECT_LT(ml.lambda_int, 1.0);
  EXPECT_NEAR(space.min_eigenvalue(ml.r_P), 0.0, 1e-12);
  // the reported value is the likelihood ratio at r_P
  EXPECT_NEAR(std::log(ml.lambda_int),
              log_likelihood(pom, deterministic_counts(pom, vec({0.75, 0.4}), 500), ml.r_P) - ml.log_L_max, 1e-9);
}

TEST(Classification, DecisionTable) {
  MlResult ml;
  ml.on_boundary = true;
  EXPECT_EQ(classify_case(ml, 1e-4), RegionCase::Boundary);
  ml.on_boundary = false;
  EXPECT_EQ(classify_case(ml, 1e-4), RegionCase::InteriorFull);
  ml.boundary_search_found = true;
  ml.lambda_int = 5e-5;
  EXPECT_EQ(classify_case(ml, 1e-4), RegionCase::InteriorFull);
  ml.lambda_int = 0.3;
  EXPECT_EQ(classify_case(ml, 1e-4), RegionCase::InteriorTruncated);
  ml.lambda_int = 1.0 - 1e-10;
  EXPECT_EQ(classify_case(ml, 1e-4), RegionCase::Boundary);
}

TEST(Classification, CaseNamesRoundTrip) {
  for (RegionCase c : {RegionCase::InteriorFull, RegionCase::InteriorTruncated, RegionCase::Boundary}) {
    EXPECT_EQ(region_case_from_string(to_string(c)), c);
  }
  EXPECT_THROW(region_case_from_string("case-4"), ConfigError);
}

TEST(Options, ObservedHessianEqualsFisherAtExactFrequencies) {
  const StateSpace space = StateSpace::qubit(3);
  const Pom pom = tetrahedron_pom(space);
  const Dataset data("tetrahedron", {320, 200, 160, 120});
  MlOptions opts;
  opts.use_observed_hessian = true;
  const MlResult a = maximize_likelihood(pom, data, space);
  const MlResult b = maximize_likelihood(pom, data, space, opts);
  EXPECT_LE((a.F_ml - b.F_ml).norm(), 1e-6 * a.F_ml.norm());
}
