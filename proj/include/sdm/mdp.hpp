#pragma once

// Exact dynamic programming on finite Markov decision processes.
//
// Conventions used throughout:
//  * transitions are stored as an (S*A) x S matrix whose row s*A + a is the
//    next-state distribution of the pair (s, a);
//  * rewards are deterministic expected rewards R(s, a), stored S x A;
//  * the discounted fixed point is the un-normalized Q = R + gamma P max Q.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "sdm/error.hpp"

namespace sdm {

/// Marker for state-action pairs that cannot satisfy a terminal constraint.
/// It is an actual -infinity and is absorbing: any pair that reaches an
/// infeasible successor with positive probability is itself infeasible.
inline constexpr double kInfeasible = -std::numeric_limits<double>::infinity();

inline bool is_infeasible(double v) { return std::isinf(v) && v < 0; }

struct RewardRange {
  double lo = 0.0;
  double hi = 1.0;
};

class TabularMdp {
 public:
  static constexpr double kRowSumTolerance = 1e-9;

  TabularMdp(int num_states, int num_actions, Eigen::MatrixXd transition,
             Eigen::MatrixXd reward, double discount, RewardRange range = {})
      : num_states_(num_states),
        num_actions_(num_actions),
        transition_(std::move(transition)),
        reward_(std::move(reward)),
        discount_(discount),
        range_(range) {
    validate();
  }

  /// Builds from nested tables indexed P[s][a][s'] and R[s][a].
  static TabularMdp from_tables(
      const std::vector<std::vector<std::vector<double>>>& p,
      const std::vector<std::vector<double>>& r, double discount,
      RewardRange range = {}) {
    const int s_count = static_cast<int>(p.size());
    if (s_count == 0) throw DimensionError("MDP needs at least one state");
    const int a_count = static_cast<int>(p[0].size());
    if (a_count == 0) throw DimensionError("MDP needs at least one action");
    if (static_cast<int>(r.size()) != s_count)
      throw DimensionError("reward table has " + std::to_string(r.size()) +
                           " rows, expected " + std::to_string(s_count));
    Eigen::MatrixXd trans(s_count * a_count, s_count);
    Eigen::MatrixXd rew(s_count, a_count);
    for (int s = 0; s < s_count; ++s) {
      if (static_cast<int>(p[s].size()) != a_count ||
          static_cast<int>(r[s].size()) != a_count)
        throw DimensionError("ragged action dimension at state " +
                             std::to_string(s));
      for (int a = 0; a < a_count; ++a) {
        if (static_cast<int>(p[s][a].size()) != s_count)
          throw DimensionError("transition row (" + std::to_string(s) + "," +
                               std::to_string(a) + ") has wrong length");
        for (int s2 = 0; s2 < s_count; ++s2) trans(s * a_count + a, s2) = p[s][a][s2];
        rew(s, a) = r[s][a];
      }
    }
    return TabularMdp(s_count, a_count, std::move(trans), std::move(rew),
                      discount, range);
  }

  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }
  double discount() const { return discount_; }
  RewardRange reward_range() const { return range_; }

  double transition(int s, int a, int next) const {
    return transition_(row(s, a), next);
  }
  auto transition_row(int s, int a) const { return transition_.row(row(s, a)); }
  const Eigen::MatrixXd& transition_matrix() const { return transition_; }

  double reward(int s, int a) const { return reward_(s, a); }
  const Eigen::MatrixXd& reward() const { return reward_; }

  TabularMdp with_reward(Eigen::MatrixXd reward, RewardRange range) const {
    return TabularMdp(num_states_, num_actions_, transition_, std::move(reward),
                      discount_, range);
  }
  TabularMdp with_transition(Eigen::MatrixXd transition) const {
    return TabularMdp(num_states_, num_actions_, std::move(transition), reward_,
                      discount_, range_);
  }

  int row(int s, int a) const { return s * num_actions_ + a; }

 private:
  void validate() const {
    if (num_states_ < 1 || num_actions_ < 1)
      throw DimensionError("MDP needs S >= 1 and A >= 1");
    if (transition_.rows() != num_states_ * num_actions_ ||
        transition_.cols() != num_states_)
      throw DimensionError("transition matrix must be (S*A) x S");
    if (reward_.rows() != num_states_ || reward_.cols() != num_actions_)
      throw DimensionError("reward table must be S x A");
    if (!(discount_ > 0.0 && discount_ < 1.0))
      throw InvalidArgument("discount must lie in (0, 1)");
    if (range_.lo > range_.hi) throw InvalidArgument("empty reward range");
    for (int s = 0; s < num_states_; ++s) {
      for (int a = 0; a < num_actions_; ++a) {
        const auto r = transition_.row(row(s, a));
        if ((r.array() < 0.0).any() || !r.allFinite()) {
          std::ostringstream os;
          os << "negative or non-finite transition probability at (" << s << ","
             << a << ")";
          throw InvalidArgument(os.str());
        }
        if (std::abs(r.sum() - 1.0) > kRowSumTolerance) {
          std::ostringstream os;
          os << "transition row (" << s << "," << a << ") sums to " << r.sum();
          throw InvalidArgument(os.str());
        }
        const double v = reward_(s, a);
        if (!std::isfinite(v) || v < range_.lo || v > range_.hi) {
          std::ostringstream os;
          os << "reward(" << s << "," << a << ") = " << v << " outside ["
             << range_.lo << "," << range_.hi << "]";
          throw InvalidArgument(os.str());
        }
      }
    }
  }

  int num_states_;
  int num_actions_;
  Eigen::MatrixXd transition_;
  Eigen::MatrixXd reward_;
  double discount_;
  RewardRange range_;
};

/// State-action values, S x A.
class QTable {
 public:
  QTable() = default;
  explicit QTable(Eigen::MatrixXd values) : values_(std::move(values)) {}
  static QTable zeros(int num_states, int num_actions) {
    return QTable(Eigen::MatrixXd::Zero(num_states, num_actions));
  }

  int num_states() const { return static_cast<int>(values_.rows()); }
  int num_actions() const { return static_cast<int>(values_.cols()); }
  double operator()(int s, int a) const { return values_(s, a); }
  double& operator()(int s, int a) { return values_(s, a); }
  const Eigen::MatrixXd& values() const { return values_; }
  Eigen::MatrixXd& values() { return values_; }

  /// max_a Q(s, a) per state.
  Eigen::VectorXd state_values() const { return values_.rowwise().maxCoeff(); }

  bool matches(const TabularMdp& mdp) const {
    return num_states() == mdp.num_states() && num_actions() == mdp.num_actions();
  }

 private:
  Eigen::MatrixXd values_;
};

/// Deterministic stationary decision rule.
struct TabularPolicy {
  std::vector<int> action_of;

  int operator()(int s) const { return action_of[static_cast<std::size_t>(s)]; }
  int num_states() const { return static_cast<int>(action_of.size()); }

  void validate_for(const TabularMdp& mdp) const {
    if (num_states() != mdp.num_states())
      throw DimensionError("policy covers " + std::to_string(num_states()) +
                           " states, MDP has " + std::to_string(mdp.num_states()));
    for (int s = 0; s < num_states(); ++s) {
      const int a = action_of[static_cast<std::size_t>(s)];
      if (a < 0 || a >= mdp.num_actions())
        throw InvalidArgument("policy action " + std::to_string(a) +
                              " invalid at state " + std::to_string(s));
    }
  }

  friend bool operator==(const TabularPolicy&, const TabularPolicy&) = default;
};

struct ValueVector {
  Eigen::VectorXd values;
  double operator()(int s) const { return values(s); }
};

inline double sup_norm(const Eigen::MatrixXd& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

namespace detail {

/// Reshapes a length S*A vector (row s*A + a) into S x A.
inline Eigen::MatrixXd as_table(const Eigen::VectorXd& flat, int s, int a) {
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                        Eigen::RowMajor>>(flat.data(), s, a);
}

inline void check_dims(const QTable& q, const TabularMdp& mdp) {
  if (!q.matches(mdp)) {
    std::ostringstream os;
    os << "Q table is " << q.num_states() << "x" << q.num_actions()
       << " but MDP is " << mdp.num_states() << "x" << mdp.num_actions();
    throw DimensionError(os.str());
  }
}

}  // namespace detail

/// (TQ)(s,a) = R(s,a) + gamma * sum_s' P(s'|s,a) max_a' Q(s',a').
inline QTable bellman_operator(const QTable& q, const TabularMdp& mdp) {
  detail::check_dims(q, mdp);
  const Eigen::VectorXd next = mdp.transition_matrix() * q.state_values();
  return QTable(mdp.reward() + mdp.discount() * detail::as_table(
                                                    next, mdp.num_states(),
                                                    mdp.num_actions()));
}

/// Smallest index attaining max_a q(s, a) in each row.
inline TabularPolicy greedy_policy(const QTable& q) {
  TabularPolicy pi;
  pi.action_of.resize(static_cast<std::size_t>(q.num_states()));
  for (int s = 0; s < q.num_states(); ++s) {
    int best = 0;
    for (int a = 1; a < q.num_actions(); ++a)
      if (q(s, a) > q(s, best)) best = a;
    pi.action_of[static_cast<std::size_t>(s)] = best;
  }
  return pi;
}

struct IterationResult {
  QTable q;
  int iterations = 0;
  double residual = 0.0;  // sup-norm of the last update
  bool converged = false;
};

inline constexpr double kDefaultTolerance = 1e-8;

/// ceil(log(scale/tol) / log(1/gamma)) + 100, scale = max(1, ||R||_inf).
inline int default_max_iterations(const TabularMdp& mdp, double tol) {
  const double scale = std::max(1.0, sup_norm(mdp.reward()));
  return static_cast<int>(std::ceil(std::log(scale / tol) /
                                    std::log(1.0 / mdp.discount()))) +
         100;
}

/// Iterates Q <- TQ from Q = 0 until ||TQ - Q||_inf <= tol. A run that hits
/// max_iter first comes back with converged = false and its residual.
inline IterationResult value_iteration(const TabularMdp& mdp,
                                       double tol = kDefaultTolerance,
                                       std::optional<int> max_iter = {}) {
  if (!(tol > 0.0)) throw InvalidArgument("value_iteration: tol must be > 0");
  const int limit = max_iter.value_or(default_max_iterations(mdp, tol));
  IterationResult out;
  out.q = QTable::zeros(mdp.num_states(), mdp.num_actions());
  out.residual = std::numeric_limits<double>::infinity();
  while (out.iterations < limit) {
    QTable next = bellman_operator(out.q, mdp);
    out.residual = sup_norm(next.values() - out.q.values());
    out.q = std::move(next);
    ++out.iterations;
    // The returned iterate satisfies ||TQ - Q|| <= gamma * residual <= tol.
    if (out.residual <= tol) {
      out.converged = true;
      break;
    }
  }
  return out;
}

/// One policy-evaluation sweep: R + gamma P Q(., pi(.)).
inline QTable policy_bellman_operator(const QTable& q, const TabularMdp& mdp,
                                      const TabularPolicy& pi) {
  detail::check_dims(q, mdp);
  Eigen::VectorXd follow(mdp.num_states());
  for (int s = 0; s < mdp.num_states(); ++s) follow(s) = q(s, pi(s));
  const Eigen::VectorXd next = mdp.transition_matrix() * follow;
  return QTable(mdp.reward() +
                mdp.discount() *
                    detail::as_table(next, mdp.num_states(), mdp.num_actions()));
}

inline IterationResult policy_evaluation(const TabularMdp& mdp,
                                         const TabularPolicy& pi,
                                         double tol = kDefaultTolerance,
                                         std::optional<int> max_iter = {},
                                         const QTable* warm_start = nullptr) {
  if (!(tol > 0.0)) throw InvalidArgument("policy_evaluation: tol must be > 0");
  pi.validate_for(mdp);
  const int limit = max_iter.value_or(default_max_iterations(mdp, tol));
  IterationResult out;
  out.q = warm_start ? *warm_start : QTable::zeros(mdp.num_states(), mdp.num_actions());
  detail::check_dims(out.q, mdp);
  out.residual = std::numeric_limits<double>::infinity();
  while (out.iterations < limit) {
    QTable next = policy_bellman_operator(out.q, mdp, pi);
    out.residual = sup_norm(next.values() - out.q.values());
    out.q = std::move(next);
    ++out.iterations;
    if (out.residual <= tol) {
      out.converged = true;
      break;
    }
  }
  return out;
}

/// V^pi by a direct linear solve of (I - gamma P_pi) V = R_pi.
inline ValueVector evaluate_policy_exact(const TabularMdp& mdp,
                                         const TabularPolicy& pi) {
  pi.validate_for(mdp);
  const int n = mdp.num_states();
  Eigen::MatrixXd system = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd rhs(n);
  for (int s = 0; s < n; ++s) {
    system.row(s) -= mdp.discount() * mdp.transition_row(s, pi(s));
    rhs(s) = mdp.reward(s, pi(s));
  }
  return {system.partialPivLu().solve(rhs)};
}

/// Q^pi(s,a) = R(s,a) + gamma sum P(s'|s,a) V^pi(s'), from the exact V^pi.
inline QTable q_from_values(const TabularMdp& mdp, const Eigen::VectorXd& v) {
  const Eigen::VectorXd next = mdp.transition_matrix() * v;
  return QTable(mdp.reward() + mdp.discount() * detail::as_table(
                                                    next, mdp.num_states(),
                                                    mdp.num_actions()));
}

struct PolicyIterationResult {
  TabularPolicy policy;
  QTable q;
  int iterations = 0;
  bool converged = false;
  /// State values V^{pi_k} of every evaluated policy, in order.
  std::vector<Eigen::VectorXd> value_history;
};

/// Howard's policy iteration with iterative evaluation to `tol`. Stops when
/// the greedy policy of the latest evaluation reproduces the evaluated one.
inline PolicyIterationResult policy_iteration(const TabularMdp& mdp,
                                              double tol = kDefaultTolerance,
                                              int max_policy_updates = 1000) {
  if (!(tol > 0.0)) throw InvalidArgument("policy_iteration: tol must be > 0");
  PolicyIterationResult out;
  out.policy.action_of.assign(static_cast<std::size_t>(mdp.num_states()), 0);
  QTable q = QTable::zeros(mdp.num_states(), mdp.num_actions());
  for (int k = 0; k < max_policy_updates; ++k) {
    IterationResult eval = policy_evaluation(mdp, out.policy, tol, {}, &q);
    if (!eval.converged)
      throw Error("policy evaluation did not converge (residual " +
                  std::to_string(eval.residual) + ")");
    q = std::move(eval.q);
    Eigen::VectorXd v(mdp.num_states());
    for (int s = 0; s < mdp.num_states(); ++s) v(s) = q(s, out.policy(s));
    out.value_history.push_back(std::move(v));
    ++out.iterations;
    TabularPolicy improved = greedy_policy(q);
    // Keep the incumbent action unless another one is better by more than
    // the evaluation error; this prevents cycling between near-ties.
    const double slack = 2.0 * tol / (1.0 - mdp.discount());
    for (int s = 0; s < mdp.num_states(); ++s) {
      const int cur = out.policy(s);
      const int cand = improved(s);
      if (q(s, cand) <= q(s, cur) + slack)
        improved.action_of[static_cast<std::size_t>(s)] = cur;
    }
    if (improved == out.policy) {
      out.converged = true;
      break;
    }
    out.policy = std::move(improved);
  }
  out.q = std::move(q);
  return out;
}

struct ExactSolution {
  TabularPolicy policy;
  QTable q;
  ValueVector v;
};

/// Optimal Q* via policy iteration with exact (LU) evaluation. Terminates in
/// finitely many improvements; used wherever "exact DP" is required.
inline ExactSolution solve_exact(const TabularMdp& mdp) {
  ExactSolution out;
  out.policy.action_of.assign(static_cast<std::size_t>(mdp.num_states()), 0);
  const int limit = 10 * mdp.num_states() * mdp.num_actions() + 100;
  for (int k = 0; k < limit; ++k) {
    out.v = evaluate_policy_exact(mdp, out.policy);
    out.q = q_from_values(mdp, out.v.values);
    bool changed = false;
    for (int s = 0; s < mdp.num_states(); ++s) {
      const int cur = out.policy(s);
      int best = cur;
      for (int a = 0; a < mdp.num_actions(); ++a)
        if (out.q(s, a) > out.q(s, best) + 1e-12 * (1.0 + std::abs(out.q(s, best))))
          best = a;
      if (best != cur) {
        out.policy.action_of[static_cast<std::size_t>(s)] = best;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Finite horizon

using TerminalMask = std::vector<std::pair<int, int>>;

/// Backward recursion Q_t = R_t + sum_s' P(s'|s,a) max_a' Q_{t+1}(s',a') with
/// Q_{T-1} = R_{T-1}. `stage_rewards` holds one S x A table per stage and its
/// length is the horizon T. When `terminal` is set, only the listed (s,a)
/// pairs are admissible at the last stage; every other pair carries
/// kInfeasible. When `initial_state` is set, a state reachable from it through
/// admissible actions without any admissible action raises InfeasibleError.
inline std::vector<QTable> finite_horizon_dp(
    const TabularMdp& mdp, std::span<const Eigen::MatrixXd> stage_rewards,
    const std::optional<TerminalMask>& terminal = {},
    std::optional<int> initial_state = {}) {
  const int horizon = static_cast<int>(stage_rewards.size());
  if (horizon < 1) throw InvalidArgument("finite_horizon_dp: horizon must be >= 1");
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  for (const auto& r : stage_rewards)
    if (r.rows() != S || r.cols() != A)
      throw DimensionError("stage reward table must be S x A");

  std::vector<QTable> q(static_cast<std::size_t>(horizon));
  Eigen::MatrixXd last = stage_rewards.back();
  if (terminal) {
    Eigen::MatrixXd masked = Eigen::MatrixXd::Constant(S, A, kInfeasible);
    for (auto [s, a] : *terminal) {
      if (s < 0 || s >= S || a < 0 || a >= A)
        throw InvalidArgument("terminal pair out of range");
      masked(s, a) = last(s, a);
    }
    last = std::move(masked);
  }
  q.back() = QTable(std::move(last));

  for (int t = horizon - 2; t >= 0; --t) {
    const Eigen::VectorXd next = q[static_cast<std::size_t>(t + 1)].state_values();
    Eigen::MatrixXd cur(S, A);
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        const auto p = mdp.transition_row(s, a);
        double acc = 0.0;
        bool feasible = true;
        for (int s2 = 0; s2 < S; ++s2) {
          if (p(s2) <= 0.0) continue;
          if (is_infeasible(next(s2))) {
            feasible = false;
            break;
          }
          acc += p(s2) * next(s2);
        }
        cur(s, a) = feasible ? stage_rewards[static_cast<std::size_t>(t)](s, a) + acc
                             : kInfeasible;
      }
    }
    q[static_cast<std::size_t>(t)] = QTable(std::move(cur));
  }

  if (initial_state) {
    const int x0 = *initial_state;
    if (x0 < 0 || x0 >= S) throw InvalidArgument("initial state out of range");
    std::vector<char> frontier(static_cast<std::size_t>(S), 0);
    frontier[static_cast<std::size_t>(x0)] = 1;
    for (int t = 0; t < horizon; ++t) {
      std::vector<char> next_frontier(static_cast<std::size_t>(S), 0);
      for (int s = 0; s < S; ++s) {
        if (!frontier[static_cast<std::size_t>(s)]) continue;
        bool any = false;
        for (int a = 0; a < A; ++a) {
          if (is_infeasible(q[static_cast<std::size_t>(t)](s, a))) continue;
          any = true;
          if (t + 1 < horizon) {
            const auto p = mdp.transition_row(s, a);
            for (int s2 = 0; s2 < S; ++s2)
              if (p(s2) > 0.0) next_frontier[static_cast<std::size_t>(s2)] = 1;
          }
        }
        if (!any)
          throw InfeasibleError("recursive infeasibility: no admissible action at state " +
                                    std::to_string(s) + ", stage " + std::to_string(t),
                                s, t);
      }
      frontier = std::move(next_frontier);
    }
  }
  return q;
}

/// Time-invariant rewards: the MDP's reward table at every stage.
inline std::vector<QTable> finite_horizon_dp(
    const TabularMdp& mdp, int horizon,
    const std::optional<TerminalMask>& terminal = {},
    std::optional<int> initial_state = {}) {
  if (horizon < 1) throw InvalidArgument("finite_horizon_dp: horizon must be >= 1");
  std::vector<Eigen::MatrixXd> rewards(static_cast<std::size_t>(horizon), mdp.reward());
  return finite_horizon_dp(mdp, rewards, terminal, initial_state);
}

// ---------------------------------------------------------------------------
// Machine repair

inline constexpr int kRepairStates = 10;
inline constexpr int kUse = 0;
inline constexpr int kRepair = 1;

/// Row j (state j+1) is the next-state distribution after using the machine.
/// P(i|j) proportional to ratio^(j-i) for i <= j.
inline Eigen::MatrixXd geometric_decay_profile(double ratio = 0.3) {
  if (!(ratio >= 0.0 && ratio < 1.0))
    throw InvalidArgument("geometric decay ratio must lie in [0, 1)");
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(kRepairStates, kRepairStates);
  for (int j = 0; j < kRepairStates; ++j) {
    double total = 0.0;
    for (int i = 0; i <= j; ++i) total += d(j, i) = std::pow(ratio, j - i);
    d.row(j) /= total;
  }
  return d;
}

/// P(i|j) = 1/j for i <= j.
inline Eigen::MatrixXd uniform_decay_profile() {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(kRepairStates, kRepairStates);
  for (int j = 0; j < kRepairStates; ++j)
    d.row(j).head(j + 1).setConstant(1.0 / (j + 1));
  return d;
}

struct MachineRepairParams {
  Eigen::MatrixXd decay = geometric_decay_profile();
  /// Reward for using the machine in each state; default (j-1)/9 for state j.
  Eigen::VectorXd use_reward =
      Eigen::VectorXd::LinSpaced(kRepairStates, 0.0, 1.0);
  double repair_reward = 0.0;
  double discount = 0.9;
};

/// Ten repair states (index 0 = broken, index 9 = excellent), two actions:
/// kUse follows the decay profile, kRepair resets to index 9 surely.
inline TabularMdp machine_repair_instance(const MachineRepairParams& params = {}) {
  const auto& d = params.decay;
  if (d.rows() != kRepairStates || d.cols() != kRepairStates)
    throw DimensionError("decay profile must be 10 x 10");
  if (params.use_reward.size() != kRepairStates)
    throw DimensionError("use_reward must have 10 entries");
  for (int j = 0; j < kRepairStates; ++j) {
    if ((d.row(j).array() < 0.0).any() ||
        std::abs(d.row(j).sum() - 1.0) > TabularMdp::kRowSumTolerance)
      throw InvalidArgument("decay row " + std::to_string(j) +
                            " is not a probability distribution");
    for (int i = j + 1; i < kRepairStates; ++i)
      if (d(j, i) != 0.0)
        throw InvalidArgument("decay row " + std::to_string(j) +
                              " moves to a better state " + std::to_string(i));
  }
  Eigen::MatrixXd trans = Eigen::MatrixXd::Zero(2 * kRepairStates, kRepairStates);
  Eigen::MatrixXd reward(kRepairStates, 2);
  for (int j = 0; j < kRepairStates; ++j) {
    trans.row(2 * j + kUse) = d.row(j);
    trans(2 * j + kRepair, kRepairStates - 1) = 1.0;
    reward(j, kUse) = params.use_reward(j);
    reward(j, kRepair) = params.repair_reward;
  }
  const RewardRange range{std::min(0.0, reward.minCoeff()),
                          std::max(1.0, reward.maxCoeff())};
  return TabularMdp(kRepairStates, 2, std::move(trans), std::move(reward),
                    params.discount, range);
}

/// Two states {0,1}, actions {stay, switch}, deterministic, r(s,.) = s.
inline TabularMdp two_state_instance(double discount = 0.5) {
  return TabularMdp::from_tables({{{1, 0}, {0, 1}}, {{0, 1}, {1, 0}}},
                                 {{0, 0}, {1, 1}}, discount);
}

/// Random MDP with Dirichlet(1)-like rows and uniform [0,1] rewards.
template <class Rng>
TabularMdp random_mdp(int num_states, int num_actions, double discount, Rng& rng) {
  Eigen::MatrixXd trans(num_states * num_actions, num_states);
  for (int r = 0; r < trans.rows(); ++r) {
    for (int c = 0; c < num_states; ++c) {
      double u = rng.uniform();
      while (u <= 0.0) u = rng.uniform();
      trans(r, c) = -std::log(u);
    }
    trans.row(r) /= trans.row(r).sum();
  }
  Eigen::MatrixXd reward(num_states, num_actions);
  for (int s = 0; s < num_states; ++s)
    for (int a = 0; a < num_actions; ++a) reward(s, a) = rng.uniform();
  return TabularMdp(num_states, num_actions, std::move(trans), std::move(reward),
                    discount);
}

}  // namespace sdm
