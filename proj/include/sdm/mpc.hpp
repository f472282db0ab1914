#pragma once

// Receding-horizon control on tabular and linear models.
//
// A tabular plan from state x maximizes sum_{t=0..H} R(X_t, u_t) on the model,
// optionally forcing (X_H, u_H) = (x*, u*). Stage tables come from
// finite_horizon_dp with H + 1 stages, so infeasibility is carried by the
// kInfeasible sentinel.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sdm/error.hpp"
#include "sdm/linear_control.hpp"
#include "sdm/mdp.hpp"
#include "sdm/mdp_learning.hpp"
#include "sdm/rng.hpp"
#include "sdm/stats.hpp"

namespace sdm {

struct TabularMpcSpec {
  TabularMdp model;
  int horizon = 1;
  std::optional<std::pair<int, int>> terminal{};
  int replan_every = 1;
  std::optional<double> reward_max{};

  void validate() const {
    if (horizon < 1) throw InvalidArgument("MPC horizon must be >= 1");
    if (replan_every < 1) throw InvalidArgument("replan_every must be >= 1");
    if (terminal) {
      const auto [s, a] = *terminal;
      if (s < 0 || s >= model.num_states() || a < 0 || a >= model.num_actions())
        throw InvalidArgument("terminal pair (" + std::to_string(s) + "," + std::to_string(a) +
                              ") is not valid for the model");
    }
  }
};

/// Stage tables Q_{0->H}, ..., Q_{H->H} of the constrained plan.
inline std::vector<QTable> mpc_plan(const TabularMpcSpec& spec) {
  spec.validate();
  std::optional<TerminalMask> mask;
  if (spec.terminal) mask = TerminalMask{*spec.terminal};
  return finite_horizon_dp(spec.model, spec.horizon + 1, mask);
}

/// True when x* can be reached from x in exactly `steps` transitions along
/// positive-probability edges under some action sequence.
inline bool terminal_reachable(const TabularMdp& mdp, int x, int target, int steps) {
  const int S = mdp.num_states();
  std::vector<char> frontier(static_cast<std::size_t>(S), 0);
  frontier[static_cast<std::size_t>(x)] = 1;
  for (int t = 0; t < steps; ++t) {
    std::vector<char> next(static_cast<std::size_t>(S), 0);
    for (int s = 0; s < S; ++s) {
      if (!frontier[static_cast<std::size_t>(s)]) continue;
      for (int a = 0; a < mdp.num_actions(); ++a)
        for (int s2 = 0; s2 < S; ++s2)
          if (mdp.transition(s, a, s2) > 0.0) next[static_cast<std::size_t>(s2)] = 1;
    }
    frontier = std::move(next);
  }
  return frontier[static_cast<std::size_t>(target)] != 0;
}

namespace detail {

inline int best_feasible(const QTable& q, int s) {
  int best = -1;
  for (int a = 0; a < q.num_actions(); ++a) {
    if (is_infeasible(q(s, a))) continue;
    if (best < 0 || q(s, a) > q(s, best)) best = a;
  }
  return best;
}

[[noreturn]] inline void throw_infeasible(int x, int horizon, const char* why) {
  throw InfeasibleError("MPC from state " + std::to_string(x) + " with horizon " +
                            std::to_string(horizon) + ": " + why,
                        x, 0);
}

}  // namespace detail

/// First action of the H-step plan from x. Throws InfeasibleError naming x
/// and H when the terminal pair cannot be enforced.
inline int mpc_action(const TabularMpcSpec& spec, int x, const std::vector<QTable>& plan) {
  if (x < 0 || x >= spec.model.num_states()) throw InvalidArgument("state out of range");
  if (spec.terminal &&
      !terminal_reachable(spec.model, x, spec.terminal->first, spec.horizon))
    detail::throw_infeasible(x, spec.horizon, "terminal state is unreachable");
  const int a = detail::best_feasible(plan.front(), x);
  if (a < 0) detail::throw_infeasible(x, spec.horizon, "terminal pair cannot be forced");
  return a;
}

inline int mpc_action(const TabularMpcSpec& spec, int x) {
  return mpc_action(spec, x, mpc_plan(spec));
}

struct MpcStep {
  int t = 0;
  int state = 0;
  int action = 0;
  double reward = 0.0;
  /// Set when the constrained plan had no feasible action and the step fell
  /// back to the unconstrained plan.
  bool infeasible = false;
};

struct MpcTrajectory {
  std::vector<MpcStep> steps;  // t = 0..T
  double total = 0.0;
  double average = 0.0;  // total / T
  int infeasible_events = 0;
};

/// Closed-loop rollout for t = 0..T. With replan_every = k the plan made at
/// time t0 is followed for k steps, using its stage-j table at time t0 + j.
/// Rewards come from the environment sampler.
inline MpcTrajectory run_mpc(const TabularMpcSpec& spec, const TransitionSampler& env,
                             int initial_state, int T, Rng& rng) {
  if (T < 1) throw InvalidArgument("run_mpc: T must be >= 1");
  if (spec.replan_every > spec.horizon + 1)
    throw InvalidArgument("replan_every must not exceed H + 1");
  const auto plan = mpc_plan(spec);
  std::optional<std::vector<QTable>> fallback;
  MpcTrajectory out;
  out.steps.reserve(static_cast<std::size_t>(T + 1));
  int x = initial_state;
  int since_replan = 0;
  for (int t = 0; t <= T; ++t) {
    if (since_replan == spec.replan_every) since_replan = 0;
    MpcStep step{t, x, 0, 0.0, false};
    step.action = detail::best_feasible(plan[static_cast<std::size_t>(since_replan)], x);
    if (step.action < 0) {
      if (!fallback) fallback = finite_horizon_dp(spec.model, spec.horizon + 1);
      step.action = greedy_policy((*fallback)[static_cast<std::size_t>(since_replan)])(x);
      step.infeasible = true;
      ++out.infeasible_events;
    }
    const Transition tr = env(x, step.action, rng);
    step.reward = tr.reward;
    out.total += tr.reward;
    out.steps.push_back(step);
    x = tr.next_state;
    ++since_replan;
  }
  out.average = out.total / T;
  return out;
}

struct MpcBoundCheck {
  double empirical_avg = 0.0;
  double half_width = 0.0;
  double lower_bound = 0.0;
  double burn_in = 0.0;      // (Q_{0->H}(x0,u0) - H R_max) / T
  double steady_term = 0.0;  // E[R(f(x*,u*,W), 0)]
  double q0 = 0.0;
  int infeasible_events = 0;
  /// empirical_avg >= lower_bound - 2 half_width, up to rounding.
  bool holds = false;
  std::vector<double> replication_averages;
};

/// Monte Carlo check of the receding-horizon performance bound. Each
/// replication r runs on replication_rng(master_seed, r).
inline MpcBoundCheck mpc_bound_check(const TabularMpcSpec& spec, const TransitionSampler& env,
                                     int initial_state, int T, int replications,
                                     std::uint64_t master_seed) {
  if (!spec.reward_max) throw InvalidArgument("mpc_bound_check: reward_max must be declared");
  if (!spec.terminal) throw InvalidArgument("mpc_bound_check: terminal pair must be declared");
  if (replications < 1) throw InvalidArgument("replications must be >= 1");
  const auto plan = mpc_plan(spec);
  MpcBoundCheck out;
  const int u0 = mpc_action(spec, initial_state, plan);
  out.q0 = plan.front()(initial_state, u0);
  out.burn_in = (out.q0 - spec.horizon * *spec.reward_max) / T;
  const auto [xs, us] = *spec.terminal;
  out.steady_term = spec.model.transition_row(xs, us).dot(spec.model.reward().col(0));
  out.lower_bound = out.burn_in + out.steady_term;

  const auto runs = parallel_map(static_cast<std::size_t>(replications), [&](std::size_t r) {
    Rng rng = replication_rng(master_seed, r);
    return run_mpc(spec, env, initial_state, T, rng);
  });
  for (const auto& run : runs) {
    out.replication_averages.push_back(run.average);
    out.infeasible_events += run.infeasible_events;
  }
  const Summary s = summarize(out.replication_averages);
  out.empirical_avg = s.mean;
  out.half_width = s.half_width;
  const double rounding = 1e-12 * std::max(1.0, std::abs(out.lower_bound));
  out.holds = out.empirical_avg >= out.lower_bound - 2.0 * out.half_width - rounding;
  return out;
}

// ---------------------------------------------------------------------------
// Linear models

struct LinearMpcSpec {
  LinearSystem model;
  QuadraticCost cost;
  int horizon = 1;
  std::optional<Eigen::MatrixXd> terminal_cost{};  // defaults to Phi
};

/// First gain of the H-step Riccati plan; u = -K x. Time invariance makes it
/// the same at every replanning instant.
inline Eigen::MatrixXd linear_mpc_gain(const LinearMpcSpec& spec) {
  if (spec.horizon < 1) throw InvalidArgument("MPC horizon must be >= 1");
  return riccati_recursion(spec.model, spec.cost, spec.horizon, spec.terminal_cost).front().K;
}

struct LinearTrajectory {
  std::vector<Eigen::VectorXd> states;  // x_0..x_T
  std::vector<Eigen::VectorXd> inputs;  // u_0..u_{T-1}
  double average_cost = 0.0;            // (1/T) sum_{t<T} x'Phi x + u'Psi u
};

/// Rollout of u = -K x on `plant` with Gaussian process noise N(0, Sw).
inline LinearTrajectory simulate_linear(const LinearSystem& plant, const QuadraticCost& cost,
                                        const Eigen::MatrixXd& K, const Eigen::VectorXd& x0,
                                        int T, Rng& rng) {
  if (T < 1) throw InvalidArgument("simulate_linear: T must be >= 1");
  const int d = plant.state_dim();
  Eigen::LDLT<Eigen::MatrixXd> ldlt(plant.Sw);
  // Noise factor G with G G' = Sw, valid for semidefinite Sw.
  Eigen::MatrixXd G = ldlt.transpositionsP().transpose() *
                      Eigen::MatrixXd(ldlt.matrixL()) *
                      ldlt.vectorD().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  LinearTrajectory out;
  Eigen::VectorXd x = x0;
  double total = 0.0;
  for (int t = 0; t < T; ++t) {
    const Eigen::VectorXd u = -K * x;
    total += x.dot(cost.Phi * x) + u.dot(cost.Psi * u);
    Eigen::VectorXd w(d);
    for (int i = 0; i < d; ++i) w(i) = rng.normal();
    out.states.push_back(x);
    out.inputs.push_back(u);
    x = plant.A * x + plant.B * u + G * w;
  }
  out.states.push_back(x);
  out.average_cost = total / T;
  return out;
}

}  // namespace sdm
