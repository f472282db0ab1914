#include <gtest/gtest.h>

#include <cmath>

#include "sdm/linear_control.hpp"
#include "sdm/rng.hpp"

using namespace sdm;

namespace {

LinearSystem scalar_system(double a, double b, double sw = 0.0) {
  return LinearSystem::make(Eigen::MatrixXd::Constant(1, 1, a),
                            Eigen::MatrixXd::Constant(1, 1, b), {},
                            Eigen::MatrixXd::Constant(1, 1, sw));
}

QuadraticCost scalar_cost(double phi, double psi) {
  return {Eigen::MatrixXd::Constant(1, 1, phi), Eigen::MatrixXd::Constant(1, 1, psi)};
}

// Largest root magnitude of the 2x2 characteristic polynomial.
double radius_2x2(const Eigen::Matrix2d& m) {
  const double tr = m.trace(), det = m.determinant();
  const double disc = tr * tr / 4 - det;
  if (disc < 0) return std::sqrt(det);
  return std::max(std::abs(tr / 2 + std::sqrt(disc)), std::abs(tr / 2 - std::sqrt(disc)));
}

Eigen::MatrixXd random_matrix(int r, int c, Rng& rng, double scale = 1.0) {
  Eigen::MatrixXd m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = rng.normal(0.0, scale);
  return m;
}

}  // namespace

TEST(RiccatiRecursion, ZeroDynamicsGiveZeroGain) {
  auto sys = LinearSystem::make(Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Identity(2, 1));
  QuadraticCost cost{Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(1, 1)};
  auto steps = riccati_recursion(sys, cost, 5);
  ASSERT_EQ(steps.size(), 6u);
  for (int t = 0; t < 5; ++t) {
    EXPECT_EQ(steps[t].K.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_TRUE(steps[t].M == cost.Phi);
  }
}

TEST(RiccatiRecursion, ScalarGoldenRatio) {
  auto steps = riccati_recursion(scalar_system(1, 1), scalar_cost(1, 1), 200);
  const double m = (1 + std::sqrt(5.0)) / 2;
  EXPECT_NEAR(steps[0].K(0, 0), m / (1 + m), 1e-12);
  EXPECT_NEAR(steps[0].K(0, 0), (std::sqrt(5.0) - 1) / 2, 1e-12);
}

TEST(RiccatiRecursion, NewtonGain) {
  auto [sys, cost] = newton_instance();
  auto steps = riccati_recursion(sys, cost, 200);
  EXPECT_NEAR(steps[0].K(0, 0), 2.0, 1e-3);
  EXPECT_NEAR(steps[0].K(0, 1), 3.0, 1e-3);
  Eigen::Matrix2d expected;
  expected << 1, 1, -2, -2;
  EXPECT_LE((closed_loop(sys, steps[0].K) - expected).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(RiccatiRecursion, SingularInnerMatrixNamesStep) {
  auto sys = scalar_system(1, 0);
  try {
    riccati_recursion(sys, scalar_cost(1, 0), 4);
    FAIL();
  } catch (const SingularMatrixError& e) {
    EXPECT_EQ(e.step(), 3);
  }
  EXPECT_THROW(riccati_recursion(sys, scalar_cost(1, 1), 0), InvalidArgument);
}

TEST(SolveDare, ZeroDynamics) {
  auto sys = LinearSystem::make(Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Identity(2, 1));
  QuadraticCost cost{Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(1, 1)};
  auto sol = solve_dare(sys, cost);
  EXPECT_TRUE(sol.converged);
  EXPECT_TRUE(sol.M == cost.Phi);
}

TEST(SolveDare, ScalarQuadraticFormula) {
  auto sol = solve_dare(scalar_system(1, 1), scalar_cost(1, 1));
  ASSERT_TRUE(sol.converged);
  EXPECT_NEAR(sol.M(0, 0), (1 + std::sqrt(5.0)) / 2, 1e-8);
  EXPECT_LE(sol.residual, kDareTolerance);
  EXPECT_EQ(sol.stability, Stability::stable);
}

TEST(SolveDare, ShiftRegisterIsMarginal) {
  auto [sys, cost] = shift_register_instance();
  auto sol = solve_dare(sys, cost);
  EXPECT_NEAR(sol.K(0, 0), 0.0, 1e-3);
  EXPECT_NEAR(sol.K(0, 1), -1.0, 1e-3);
  EXPECT_EQ(sol.stability, Stability::marginal);
  EXPECT_NEAR(spectral_radius(closed_loop(sys, sol.K)), 1.0, 1e-9);
}

TEST(SolveDare, ShiftRegisterWithInputCost) {
  // beta lies in (1/2, 1) for 0 < psi < 1/2, equals 1/2 at psi = 1/2 and
  // keeps decreasing beyond.
  double previous = 1.0;
  for (double psi : {0.001, 0.01, 0.1, 0.3, 0.5, 1.0, 10.0}) {
    auto [sys, cost] = shift_register_instance(psi);
    auto sol = solve_dare(sys, cost);
    ASSERT_TRUE(sol.converged);
    const double beta = -sol.K(0, 1);
    EXPECT_NEAR(sol.K(0, 0), 0.0, 1e-9);
    EXPECT_LT(beta, previous) << "psi " << psi;
    EXPECT_GT(beta, 0.0);
    if (psi < 0.5) {
      EXPECT_GT(beta, 0.5) << "psi " << psi;
    }
    EXPECT_EQ(sol.stability, Stability::stable);
    previous = beta;
  }
  auto [sys, cost] = shift_register_instance(0.5);
  EXPECT_NEAR(-solve_dare(sys, cost).K(0, 1), 0.5, 1e-9);
  auto [sys1, cost1] = shift_register_instance(1.0);
  EXPECT_NEAR(-solve_dare(sys1, cost1).K(0, 1), (3 - std::sqrt(5.0)) / 2, 1e-9);
}

TEST(SolveDare, RandomSystemsResidualAndSymmetry) {
  Rng rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    const int d = 2 + rng.index(3);
    const int p = 1 + rng.index(2);
    auto sys = LinearSystem::make(random_matrix(d, d, rng, 0.6), random_matrix(d, p, rng));
    Eigen::MatrixXd g = random_matrix(d, d, rng);
    QuadraticCost cost{g * g.transpose() + Eigen::MatrixXd::Identity(d, d),
                       Eigen::MatrixXd::Identity(p, p)};
    auto sol = solve_dare(sys, cost);
    ASSERT_TRUE(sol.converged);
    EXPECT_LE(dare_residual(sys, cost, sol.M), kDareTolerance);
    EXPECT_LE((sol.M - sol.M.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sol.M);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-9);
  }
}

TEST(SolveDare, NonSettlingRunReportsResidual) {
  auto sol = solve_dare(scalar_system(1, 1), scalar_cost(1, 1), 1e-10, 2);
  EXPECT_FALSE(sol.converged);
  EXPECT_EQ(sol.iterations, 2);
  EXPECT_GT(sol.residual, 1e-10);
}

TEST(LqrGain, Examples) {
  EXPECT_EQ(lqr_gain(scalar_system(0, 1), scalar_cost(1, 1)).K(0, 0), 0.0);
  auto half = lqr_gain(scalar_system(0.5, 1), scalar_cost(1, 0));
  EXPECT_NEAR(half.K(0, 0), 0.5, 1e-12);
  auto [sys, cost] = newton_instance();
  auto k = lqr_gain(sys, cost).K;
  EXPECT_NEAR(k(0, 0), 2.0, 1e-9);
  EXPECT_NEAR(k(0, 1), 3.0, 1e-9);
}

TEST(ClosedLoop, ShiftRegisterFragility) {
  auto [sys, cost] = shift_register_instance();
  const Eigen::MatrixXd K = lqr_gain(sys, cost).K;
  Eigen::Matrix2d expected;
  expected << 0, 1, 0, 1;
  EXPECT_LE((closed_loop(sys, K) - expected).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE(spectral_radius(closed_loop(sys, K, sys.B)), 1.0 + 1e-9);
  for (double alpha : {1.01, 1.1, 1.5})
    EXPECT_GT(spectral_radius(closed_loop(sys, K, Eigen::MatrixXd(alpha * sys.B))), 1.0);
  EXPECT_TRUE(closed_loop(sys, Eigen::MatrixXd::Zero(1, 2)) == sys.A);
  EXPECT_THROW(closed_loop(sys, Eigen::MatrixXd::Zero(2, 2)), DimensionError);
}

TEST(LqrCost, ScalarAndUnstable) {
  auto sys = scalar_system(0.5, 1, 1.0);
  EXPECT_NEAR(lqr_cost(sys, scalar_cost(1, 0), Eigen::MatrixXd::Constant(1, 1, 0.5)), 1.0,
              1e-12);
  EXPECT_TRUE(std::isinf(lqr_cost(scalar_system(2, 1, 1), scalar_cost(1, 0),
                                  Eigen::MatrixXd::Zero(1, 1))));
}

TEST(LqrCost, MinimizedAtDareGain) {
  Rng rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 2 + rng.index(2);
    Eigen::MatrixXd sw = random_matrix(d, d, rng);
    auto sys = LinearSystem::make(random_matrix(d, d, rng, 0.5), random_matrix(d, 1, rng), {},
                                  Eigen::MatrixXd(sw * sw.transpose()));
    QuadraticCost cost{Eigen::MatrixXd::Identity(d, d), Eigen::MatrixXd::Identity(1, 1)};
    const Eigen::MatrixXd K = lqr_gain(sys, cost).K;
    const double best = lqr_cost(sys, cost, K);
    ASSERT_TRUE(std::isfinite(best));
    for (int k = 0; k < 10; ++k) {
      const Eigen::MatrixXd Kp = K + random_matrix(1, d, rng, 0.05);
      EXPECT_GE(lqr_cost(sys, cost, Kp), best - 1e-10);
    }
  }
}

TEST(Lyapunov, MatchesTruncatedSeries) {
  Rng rng(5);
  Eigen::MatrixXd F = random_matrix(3, 3, rng, 0.3);
  ASSERT_LT(spectral_radius(F), 0.9);
  Eigen::MatrixXd W = Eigen::MatrixXd::Identity(3, 3);
  Eigen::MatrixXd series = Eigen::MatrixXd::Zero(3, 3), term = W;
  for (int k = 0; k < 2000; ++k) {
    series += term;
    term = F * term * F.transpose();
  }
  EXPECT_LE((solve_discrete_lyapunov(F, W) - series).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(KalmanGain, PerfectObservationLimit) {
  auto sys = LinearSystem::make((Eigen::MatrixXd(2, 2) << 0.9, 0.2, 0.0, 0.7).finished(),
                                Eigen::MatrixXd::Identity(2, 1), {},
                                Eigen::MatrixXd::Identity(2, 2));
  auto f = kalman_gain(sys);
  EXPECT_EQ(f.regularization, kDefaultFilterRegularization);
  EXPECT_LE((f.P - sys.Sw).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LE((f.L - sys.A).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_THROW(kalman_gain(sys, 0.0), SingularMatrixError);
}

TEST(KalmanGain, ScalarQuadratic) {
  auto sys = LinearSystem::make(Eigen::MatrixXd::Constant(1, 1, 0.9),
                                Eigen::MatrixXd::Constant(1, 1, 1.0), {},
                                Eigen::MatrixXd::Constant(1, 1, 1.0),
                                Eigen::MatrixXd::Constant(1, 1, 1.0));
  auto f = kalman_gain(sys);
  // p = a^2 p + 1 - a^2 p^2 / (p + 1)  =>  p^2 - 0.81 p - 1 = 0.
  const double p = (0.81 + std::sqrt(0.81 * 0.81 + 4.0)) / 2;
  EXPECT_NEAR(f.P(0, 0), p, 1e-9);
  EXPECT_NEAR(f.L(0, 0), 0.9 * p / (p + 1), 1e-9);
  EXPECT_NEAR(f.P(0, 0), 1.4839, 1e-4);
  EXPECT_NEAR(f.L(0, 0), 0.5377, 1e-4);
  EXPECT_EQ(f.regularization, 0.0);
}

TEST(KalmanGain, FragilityInstance) {
  auto f = kalman_gain(lqg_fragility_system(1e-4));
  EXPECT_NEAR(f.L(0, 0), 3.0, 0.05);
  EXPECT_NEAR(f.L(1, 0), 2.0, 0.05);
}

TEST(KalmanGain, DualityOnRandomSystems) {
  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 2 + rng.index(3);
    const int k = 1 + rng.index(2);
    Eigen::MatrixXd g = random_matrix(d, d, rng);
    Eigen::MatrixXd h = random_matrix(k, k, rng);
    auto sys = LinearSystem::make(random_matrix(d, d, rng, 0.5), random_matrix(d, 1, rng),
                                  random_matrix(k, d, rng),
                                  Eigen::MatrixXd(g * g.transpose() + 0.1 * Eigen::MatrixXd::Identity(d, d)),
                                  Eigen::MatrixXd(h * h.transpose() + 0.1 * Eigen::MatrixXd::Identity(k, k)));
    auto [dual, cost] = dual_problem(sys);
    const Eigen::MatrixXd L = kalman_gain(sys).L;
    const Eigen::MatrixXd K = lqr_gain(dual, cost).K;
    EXPECT_LE((L - K.transpose()).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(KalmanStep, Recursion) {
  auto sys = lqg_fragility_system();
  Eigen::Vector2d x(0.3, -1.2);
  Eigen::VectorXd u = Eigen::VectorXd::Constant(1, 0.7);
  Eigen::MatrixXd L(2, 1);
  L << 0.4, -0.1;
  Eigen::VectorXd y = sys.C * x;
  EXPECT_LE((kalman_step(x, u, y, sys, L) - (sys.A * x + sys.B * u)).norm(), 1e-15);
  EXPECT_LE((kalman_step(x, u, Eigen::VectorXd::Constant(1, 5.0), sys,
                         Eigen::MatrixXd::Zero(2, 1)) -
             (sys.A * x + sys.B * u))
                .norm(),
            1e-15);
  auto full = LinearSystem::make(sys.A, sys.B);
  Eigen::Vector2d obs(2.0, -3.0);
  EXPECT_LE((kalman_step(x, u, obs, full, full.A) - (full.A * obs + full.B * u)).norm(), 1e-14);
  EXPECT_THROW(kalman_step(x, u, obs, sys, L), DimensionError);
}

TEST(LqgClosedLoop, BlockStructureAndFragility) {
  auto sys = lqg_fragility_system();
  auto [newton, cost] = newton_instance();
  const Eigen::MatrixXd K = lqr_gain(newton, cost).K;
  const Eigen::MatrixXd L = kalman_gain(sys).L;
  auto acl = lqg_closed_loop(sys, K, L);
  EXPECT_EQ(acl.bottomLeftCorner(2, 2).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_LE(spectral_radius(acl), 1.0 + 1e-6);
  auto perturbed = lqg_closed_loop(sys, K, L, Eigen::MatrixXd(1.1 * sys.B));
  EXPECT_GT(spectral_radius(perturbed), 1.0);
}

TEST(SpectralRadius, ClosedFormOracle) {
  EXPECT_NEAR(spectral_radius(Eigen::MatrixXd::Identity(3, 3)), 1.0, 1e-12);
  Eigen::MatrixXd m(2, 2);
  m << 0, 1, 0, 1;
  EXPECT_NEAR(spectral_radius(m), 1.0, 1e-12);
  m << 1, 1, -2, -2;
  EXPECT_NEAR(spectral_radius(m), 1.0, 1e-12);
  Rng rng(41);
  for (int trial = 0; trial < 500; ++trial) {
    Eigen::Matrix2d r = random_matrix(2, 2, rng);
    EXPECT_NEAR(spectral_radius(r), radius_2x2(r), 1e-9);
  }
  EXPECT_THROW(spectral_radius(Eigen::MatrixXd::Zero(2, 3)), DimensionError);
}

TEST(SpectralRadius, StabilityBands) {
  EXPECT_EQ(classify_stability(0.5), Stability::stable);
  EXPECT_EQ(classify_stability(1.0 - 1e-10), Stability::marginal);
  EXPECT_EQ(classify_stability(1.0 + 1e-10), Stability::marginal);
  EXPECT_EQ(classify_stability(1.0 + 1e-8), Stability::unstable);
}

TEST(LinearSystem, Validation) {
  EXPECT_THROW(LinearSystem::make(Eigen::MatrixXd::Zero(2, 3), Eigen::MatrixXd::Zero(2, 1)),
               DimensionError);
  EXPECT_THROW(LinearSystem::make(Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Zero(3, 1)),
               DimensionError);
  Eigen::MatrixXd bad(2, 2);
  bad << 1, 2, 0, 1;
  EXPECT_THROW(LinearSystem::make(Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Zero(2, 1), {},
                                  bad),
               InvalidArgument);
  bad << 1, 2, 2, 1;
  EXPECT_THROW(LinearSystem::make(Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Zero(2, 1), {},
                                  bad),
               InvalidArgument);
}
