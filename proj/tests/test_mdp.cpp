#include <gtest/gtest.h>

#include <cmath>

#include "sdm/mdp.hpp"
#include "sdm/rng.hpp"

using namespace sdm;

namespace {

constexpr int kStay = 0;
constexpr int kSwitch = 1;

TabularMdp single_state(double r, double gamma) {
  return TabularMdp::from_tables({{{1.0}}}, {{r}}, gamma);
}

// Deterministic MDP whose action a at state s goes to next[s][a].
TabularMdp deterministic(const std::vector<std::vector<int>>& next,
                         const Eigen::MatrixXd& reward, double gamma) {
  const int S = static_cast<int>(next.size());
  const int A = static_cast<int>(next[0].size());
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(S * A, S);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) p(s * A + a, next[s][a]) = 1.0;
  return TabularMdp(S, A, p, reward, gamma);
}

// Discounted value of a deterministic policy on a deterministic MDP, by
// following the trajectory until the discount kills the tail.
double rollout_value(const std::vector<std::vector<int>>& next,
                     const Eigen::MatrixXd& reward, double gamma,
                     const std::vector<int>& pi, int s) {
  double v = 0.0, w = 1.0;
  for (int t = 0; t < 4000; ++t) {
    v += w * reward(s, pi[s]);
    w *= gamma;
    s = next[s][pi[s]];
  }
  return v;
}

}  // namespace

TEST(BellmanOperator, ZeroContinuationReturnsReward) {
  Rng rng(1);
  auto mdp = random_mdp(4, 3, 0.8, rng);
  auto tq = bellman_operator(QTable::zeros(4, 3), mdp);
  EXPECT_TRUE(tq.values().isApprox(mdp.reward(), 0.0));
}

TEST(BellmanOperator, FixedPointOfSingleState) {
  auto mdp = single_state(1.0, 0.9);
  QTable q(Eigen::MatrixXd::Constant(1, 1, 10.0));
  EXPECT_NEAR(bellman_operator(q, mdp)(0, 0), 10.0, 1e-12);
}

TEST(BellmanOperator, TwoStateHandEvaluation) {
  auto mdp = two_state_instance();
  auto tq = bellman_operator(QTable::zeros(2, 2), mdp);
  EXPECT_DOUBLE_EQ(tq(0, kStay), 0.0);
  EXPECT_DOUBLE_EQ(tq(0, kSwitch), 0.0);
  EXPECT_DOUBLE_EQ(tq(1, kStay), 1.0);
  EXPECT_DOUBLE_EQ(tq(1, kSwitch), 1.0);
}

TEST(BellmanOperator, RejectsDimensionMismatch) {
  auto mdp = two_state_instance();
  EXPECT_THROW(bellman_operator(QTable::zeros(3, 2), mdp), DimensionError);
}

TEST(BellmanOperator, ContractionOnRandomPairs) {
  Rng rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const int S = 1 + rng.index(6);
    const int A = 1 + rng.index(3);
    const double gamma = rng.uniform(0.05, 0.99);
    auto mdp = random_mdp(S, A, gamma, rng);
    Eigen::MatrixXd a(S, A), b(S, A);
    for (int i = 0; i < S; ++i)
      for (int j = 0; j < A; ++j) {
        a(i, j) = rng.normal(0.0, 5.0);
        b(i, j) = rng.normal(0.0, 5.0);
      }
    const double lhs = sup_norm(bellman_operator(QTable(a), mdp).values() -
                                bellman_operator(QTable(b), mdp).values());
    // Only rounding in the two matrix products separates the sides.
    EXPECT_LE(lhs, gamma * sup_norm(a - b) + 1e-12) << "trial " << trial;
  }
}

TEST(TabularMdp, ValidatesInvariants) {
  EXPECT_THROW(TabularMdp::from_tables({{{0.5, 0.4}}, {{0.5, 0.5}}}, {{0}, {0}}, 0.9),
               InvalidArgument);
  EXPECT_THROW(TabularMdp::from_tables({{{1.0}}}, {{2.0}}, 0.9), InvalidArgument);
  EXPECT_THROW(TabularMdp::from_tables({{{1.0}}}, {{0.5}}, 1.0), InvalidArgument);
  EXPECT_THROW(TabularMdp::from_tables({{{1.5, -0.5}}, {{0, 1}}}, {{0}, {0}}, 0.5),
               InvalidArgument);
  EXPECT_NO_THROW(TabularMdp::from_tables({{{1.0}}}, {{2.0}}, 0.9, {0.0, 2.0}));
}

TEST(ValueIteration, SingleStateFixedPoint) {
  auto res = value_iteration(single_state(1.0, 0.5), 1e-10);
  ASSERT_TRUE(res.converged);
  EXPECT_NEAR(res.q(0, 0), 2.0, 1e-9);
}

TEST(ValueIteration, TwoStateOptimalQ) {
  auto res = value_iteration(two_state_instance());
  ASSERT_TRUE(res.converged);
  EXPECT_NEAR(res.q(0, kStay), 0.5, 1e-7);
  EXPECT_NEAR(res.q(0, kSwitch), 1.0, 1e-7);
  EXPECT_NEAR(res.q(1, kStay), 2.0, 1e-7);
  EXPECT_NEAR(res.q(1, kSwitch), 1.5, 1e-7);
}

TEST(ValueIteration, ZeroRewardGivesZero) {
  Rng rng(3);
  auto mdp = random_mdp(5, 2, 0.9, rng).with_reward(Eigen::MatrixXd::Zero(5, 2), {});
  auto res = value_iteration(mdp);
  EXPECT_EQ(sup_norm(res.q.values()), 0.0);
}

TEST(ValueIteration, ResidualAndIterationBounds) {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    auto mdp = random_mdp(6, 3, 0.95, rng);
    const double tol = 1e-8;
    auto res = value_iteration(mdp, tol);
    ASSERT_TRUE(res.converged);
    EXPECT_LE(res.iterations, default_max_iterations(mdp, tol));
    EXPECT_LE(sup_norm(bellman_operator(res.q, mdp).values() - res.q.values()), tol);
    EXPECT_GE(res.q.values().minCoeff(), 0.0);
    EXPECT_LE(res.q.values().maxCoeff(), 1.0 / (1.0 - 0.95));
  }
}

TEST(ValueIteration, ReportsNonConvergence) {
  auto res = value_iteration(two_state_instance(0.99), 1e-8, 3);
  EXPECT_FALSE(res.converged);
  EXPECT_EQ(res.iterations, 3);
  EXPECT_GT(res.residual, 1e-8);
  EXPECT_THROW(value_iteration(two_state_instance(), 0.0), InvalidArgument);
}

TEST(PolicyEvaluation, TwoStatePolicies) {
  auto mdp = two_state_instance();
  auto stay = policy_evaluation(mdp, {{kStay, kStay}});
  ASSERT_TRUE(stay.converged);
  EXPECT_NEAR(stay.q(0, kStay), 0.0, 1e-7);
  EXPECT_NEAR(stay.q(1, kStay), 2.0, 1e-7);
  auto sw = policy_evaluation(mdp, {{kSwitch, kSwitch}});
  EXPECT_NEAR(sw.q(0, kSwitch), 2.0 / 3.0, 1e-7);
  EXPECT_NEAR(sw.q(1, kSwitch), 4.0 / 3.0, 1e-7);

  auto exact = evaluate_policy_exact(mdp, {{kSwitch, kSwitch}});
  EXPECT_NEAR(exact(0), 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(exact(1), 4.0 / 3.0, 1e-12);
}

TEST(PolicyEvaluation, ZeroRewardAndValidation) {
  auto mdp = two_state_instance().with_reward(Eigen::MatrixXd::Zero(2, 2), {});
  EXPECT_EQ(sup_norm(policy_evaluation(mdp, {{1, 0}}).q.values()), 0.0);
  EXPECT_THROW(policy_evaluation(mdp, {{0, 2}}), InvalidArgument);
  EXPECT_THROW(policy_evaluation(mdp, {{0}}), DimensionError);
}

TEST(PolicyIteration, TwoStatePolicy) {
  auto res = policy_iteration(two_state_instance());
  ASSERT_TRUE(res.converged);
  EXPECT_EQ(res.policy.action_of, (std::vector<int>{kSwitch, kStay}));
}

TEST(PolicyIteration, AgreesWithValueIterationOnRandomMdps) {
  Rng rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const int S = 1 + rng.index(6);
    const int A = 1 + rng.index(3);
    const double gamma = rng.uniform(0.3, 0.95);
    auto mdp = random_mdp(S, A, gamma, rng);
    const double tol = 1e-9;
    auto pi = policy_iteration(mdp, tol);
    auto vi = value_iteration(mdp, tol);
    ASSERT_TRUE(pi.converged);
    EXPECT_LE(sup_norm(pi.q.values() - vi.q.values()), 2 * tol / (1 - gamma));
    auto exact = solve_exact(mdp);
    EXPECT_EQ(pi.policy, greedy_policy(vi.q)) << "trial " << trial;
    EXPECT_EQ(pi.policy, exact.policy) << "trial " << trial;
    // Greedy with respect to its own evaluation.
    EXPECT_EQ(greedy_policy(pi.q), pi.policy);
  }
}

TEST(PolicyIteration, MonotoneImprovement) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    auto mdp = random_mdp(6, 3, 0.9, rng);
    const double tol = 1e-9;
    auto res = policy_iteration(mdp, tol);
    for (std::size_t k = 1; k < res.value_history.size(); ++k)
      EXPECT_TRUE(((res.value_history[k] - res.value_history[k - 1]).array() >=
                   -2 * tol / (1 - 0.9))
                      .all());
  }
}

TEST(GreedyPolicy, LowestIndexTieBreak) {
  Eigen::MatrixXd q(2, 2);
  q << 0.2, 0.7, 0.5, 0.5;
  EXPECT_EQ(greedy_policy(QTable(q)).action_of, (std::vector<int>{1, 0}));
  EXPECT_EQ(greedy_policy(value_iteration(two_state_instance()).q),
            policy_iteration(two_state_instance()).policy);
}

TEST(ExhaustiveOracle, DeterministicSmallMdps) {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int S = 1 + rng.index(4);
    const int A = 1 + rng.index(2);
    const double gamma = 0.8;
    std::vector<std::vector<int>> next(S, std::vector<int>(A));
    Eigen::MatrixXd reward(S, A);
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) {
        next[s][a] = rng.index(S);
        reward(s, a) = rng.uniform();
      }
    auto mdp = deterministic(next, reward, gamma);
    auto vi = value_iteration(mdp, 1e-10);
    const Eigen::VectorXd v = vi.q.state_values();
    int total = 1;
    for (int s = 0; s < S; ++s) total *= A;
    for (int s = 0; s < S; ++s) {
      double best = -1.0;
      for (int code = 0; code < total; ++code) {
        std::vector<int> pi(S);
        for (int i = 0, c = code; i < S; ++i, c /= A) pi[i] = c % A;
        best = std::max(best, rollout_value(next, reward, gamma, pi, s));
      }
      EXPECT_NEAR(v(s), best, 1e-8);
    }
  }
}

TEST(FiniteHorizon, ZeroRewardsAndTerminalCase) {
  auto zero = two_state_instance().with_reward(Eigen::MatrixXd::Zero(2, 2), {});
  for (const auto& q : finite_horizon_dp(zero, 4)) EXPECT_EQ(sup_norm(q.values()), 0.0);
  auto mdp = two_state_instance();
  auto q1 = finite_horizon_dp(mdp, 1);
  ASSERT_EQ(q1.size(), 1u);
  EXPECT_TRUE(q1[0].values() == mdp.reward());
  EXPECT_THROW(finite_horizon_dp(mdp, 0), InvalidArgument);
}

TEST(FiniteHorizon, ChainMatchesBruteForce) {
  // 3-state chain, actions {left, right}, walls at both ends.
  std::vector<std::vector<int>> next = {{0, 1}, {0, 2}, {1, 2}};
  Eigen::MatrixXd reward(3, 2);
  reward << 0.1, 0.0, 0.3, 0.2, 0.0, 1.0;
  auto mdp = deterministic(next, reward, 0.5);
  auto q = finite_horizon_dp(mdp, 3);
  ASSERT_EQ(q.size(), 3u);
  for (int x = 0; x < 3; ++x) {
    for (int u0 = 0; u0 < 2; ++u0) {
      double best = -1.0;
      for (int code = 0; code < 8; ++code) {
        if ((code & 1) != u0) continue;
        int s = x;
        double total = 0.0;
        for (int t = 0; t < 3; ++t) {
          const int a = (code >> t) & 1;
          total += reward(s, a);
          s = next[s][a];
        }
        best = std::max(best, total);
      }
      EXPECT_NEAR(q[0](x, u0), best, 1e-14);
    }
  }
}

TEST(FiniteHorizon, TerminalMaskPropagatesSentinel) {
  std::vector<std::vector<int>> next = {{0, 1}, {0, 2}, {1, 2}};
  Eigen::MatrixXd reward = Eigen::MatrixXd::Constant(3, 2, 0.5);
  auto mdp = deterministic(next, reward, 0.5);
  // Must end at state 2 taking "right" at the last of 2 stages.
  auto q = finite_horizon_dp(mdp, 2, TerminalMask{{2, 1}});
  EXPECT_TRUE(is_infeasible(q[1](0, 0)));
  EXPECT_EQ(q[1](2, 1), 0.5);
  EXPECT_TRUE(is_infeasible(q[0](0, 0)));
  EXPECT_TRUE(is_infeasible(q[0](0, 1)));
  EXPECT_EQ(q[0](1, 1), 1.0);
  EXPECT_EQ(q[0](2, 1), 1.0);
  try {
    finite_horizon_dp(mdp, 2, TerminalMask{{2, 1}}, 0);
    FAIL() << "expected infeasibility";
  } catch (const InfeasibleError& e) {
    EXPECT_EQ(e.state(), 0);
    EXPECT_EQ(e.time(), 0);
  }
  EXPECT_NO_THROW(finite_horizon_dp(mdp, 2, TerminalMask{{2, 1}}, 1));
}

TEST(FiniteHorizon, StochasticSentinelIsAbsorbing) {
  // Action 0 at state 0 reaches the dead state 1 with small probability.
  auto mdp = TabularMdp::from_tables({{{0.9, 0.1}, {1.0, 0.0}}, {{0.0, 1.0}, {0.0, 1.0}}},
                                     {{0.0, 0.0}, {0.0, 0.0}}, 0.5);
  auto q = finite_horizon_dp(mdp, 2, TerminalMask{{0, 0}});
  EXPECT_TRUE(is_infeasible(q[0](0, 0)));
  EXPECT_EQ(q[0](0, 1), 0.0);
  EXPECT_FALSE(std::isnan(q[0](0, 0)));
}

TEST(MachineRepair, Structure) {
  auto mdp = machine_repair_instance();
  ASSERT_EQ(mdp.num_states(), 10);
  ASSERT_EQ(mdp.num_actions(), 2);
  for (int s = 0; s < 10; ++s) {
    for (int s2 = 0; s2 < 10; ++s2)
      EXPECT_EQ(mdp.transition(s, kRepair, s2), s2 == 9 ? 1.0 : 0.0);
    for (int s2 = s + 1; s2 < 10; ++s2) EXPECT_EQ(mdp.transition(s, kUse, s2), 0.0);
  }
}

TEST(MachineRepair, IdentityDecayKeepsState) {
  MachineRepairParams params;
  params.decay = Eigen::MatrixXd::Identity(10, 10);
  auto mdp = machine_repair_instance(params);
  for (int s = 0; s < 10; ++s) EXPECT_EQ(mdp.transition(s, kUse, s), 1.0);
}

TEST(MachineRepair, RejectsInvalidRows) {
  MachineRepairParams params;
  params.decay = uniform_decay_profile();
  params.decay(3, 5) = 0.1;
  params.decay(3, 0) -= 0.1;
  EXPECT_THROW(machine_repair_instance(params), InvalidArgument);
  params.decay = uniform_decay_profile();
  params.decay(4, 0) += 0.2;
  EXPECT_THROW(machine_repair_instance(params), InvalidArgument);
}

TEST(MachineRepair, UniformDecayPolicyIsThreshold) {
  MachineRepairParams params;
  params.decay = uniform_decay_profile();
  auto mdp = machine_repair_instance(params);
  auto pi = greedy_policy(value_iteration(mdp, 1e-10).q);
  EXPECT_EQ(pi, solve_exact(mdp).policy);
  // Repair below some index, use at and above it.
  int first_use = 10;
  for (int s = 0; s < 10; ++s)
    if (pi(s) == kUse) {
      first_use = s;
      break;
    }
  for (int s = 0; s < 10; ++s) EXPECT_EQ(pi(s), s < first_use ? kRepair : kUse);
  EXPECT_EQ(first_use, 5);
}
