#pragma once

// Learning with an unknown model: certainty-equivalent estimation, Q-learning
// and SARSA(lambda) with linear function approximation.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>

#include "sdm/error.hpp"
#include "sdm/mdp.hpp"
#include "sdm/rng.hpp"

namespace sdm {

struct Transition {
  int next_state = 0;
  double reward = 0.0;
};

using TransitionSampler = std::function<Transition(int state, int action, Rng& rng)>;

/// Index drawn from a discrete distribution by inverse CDF on one uniform.
template <class Row>
int sample_index(const Row& probabilities, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  const int n = static_cast<int>(probabilities.size());
  int last_positive = 0;
  for (int i = 0; i < n; ++i) {
    if (probabilities(i) <= 0.0) continue;
    acc += probabilities(i);
    last_positive = i;
    if (u < acc) return i;
  }
  return last_positive;
}

/// Environment that draws s' ~ P(.|s,a) and pays the expected reward R(s,a).
inline TransitionSampler sampler_from_mdp(const TabularMdp& mdp) {
  return [mdp](int s, int a, Rng& rng) {
    return Transition{sample_index(mdp.transition_row(s, a), rng), mdp.reward(s, a)};
  };
}

/// Empirical-frequency model from exactly n_per_pair draws of every (s,a),
/// visited in row-major order. Rewards are sample means unless
/// `known_reward` is supplied.
inline TabularMdp estimate_mdp(const TransitionSampler& sampler, int n_per_pair,
                               int num_states, int num_actions, double discount, Rng& rng,
                               const std::optional<Eigen::MatrixXd>& known_reward = {}) {
  if (n_per_pair < 1) throw InvalidArgument("estimate_mdp: n_per_pair must be >= 1");
  if (num_states < 1 || num_actions < 1)
    throw DimensionError("estimate_mdp: need S >= 1 and A >= 1");
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(num_states * num_actions, num_states);
  Eigen::MatrixXd reward = Eigen::MatrixXd::Zero(num_states, num_actions);
  for (int s = 0; s < num_states; ++s) {
    for (int a = 0; a < num_actions; ++a) {
      double total = 0.0;
      for (int k = 0; k < n_per_pair; ++k) {
        const Transition tr = sampler(s, a, rng);
        if (tr.next_state < 0 || tr.next_state >= num_states)
          throw InvalidArgument("sampler returned state " + std::to_string(tr.next_state) +
                                " outside [0, " + std::to_string(num_states) + ")");
        counts(s * num_actions + a, tr.next_state) += 1.0;
        total += tr.reward;
      }
      reward(s, a) = total / n_per_pair;
    }
  }
  counts /= static_cast<double>(n_per_pair);
  if (known_reward) {
    if (known_reward->rows() != num_states || known_reward->cols() != num_actions)
      throw DimensionError("known reward table must be S x A");
    reward = *known_reward;
  }
  const RewardRange range{std::min(0.0, reward.minCoeff()), std::max(1.0, reward.maxCoeff())};
  return TabularMdp(num_states, num_actions, std::move(counts), std::move(reward), discount,
                    range);
}

struct ModelErrorBound {
  double lhs = 0.0;      // max_x V*(x) - V^{pi_hat}(x) on the true model
  double rhs = 0.0;      // 2 gamma / (1 - gamma)^2 * sup_gap
  double sup_gap = 0.0;  // sup_{x,u} |E_hat[V*] - E[V*]|
  TabularPolicy hat_policy;
};

/// Both sides of the model-error inequality, by exact DP on each model.
inline ModelErrorBound model_error_bound(const TabularMdp& true_mdp, const TabularMdp& hat_mdp) {
  if (true_mdp.num_states() != hat_mdp.num_states() ||
      true_mdp.num_actions() != hat_mdp.num_actions())
    throw DimensionError("model_error_bound: models have different dimensions");
  if (true_mdp.discount() != hat_mdp.discount())
    throw InvalidArgument("model_error_bound: models have different discounts");
  const double gamma = true_mdp.discount();
  const ExactSolution star = solve_exact(true_mdp);
  ModelErrorBound out;
  out.hat_policy = greedy_policy(solve_exact(hat_mdp).q);
  const Eigen::VectorXd v_hat = evaluate_policy_exact(true_mdp, out.hat_policy).values;
  out.lhs = std::max(0.0, (star.v.values - v_hat).maxCoeff());
  out.sup_gap = ((hat_mdp.transition_matrix() - true_mdp.transition_matrix()) * star.v.values)
                    .cwiseAbs()
                    .maxCoeff();
  out.rhs = 2.0 * gamma / ((1.0 - gamma) * (1.0 - gamma)) * out.sup_gap;
  return out;
}

/// (2 gamma / (1-gamma)^3) sqrt(S A log(2 S A / delta) / N).
inline double sample_complexity_envelope(int num_states, int num_actions, double discount,
                                         double delta, long long total_samples) {
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("delta must lie in (0, 1)");
  if (total_samples < 1) throw InvalidArgument("total_samples must be >= 1");
  const double sa = static_cast<double>(num_states) * num_actions;
  return 2.0 * discount / std::pow(1.0 - discount, 3) *
         std::sqrt(sa * std::log(2.0 * sa / delta) / static_cast<double>(total_samples));
}

/// V*(x) - V^pi(x) by exact policy evaluation.
inline double pac_error(const TabularPolicy& policy, const TabularMdp& mdp, int initial_state) {
  if (initial_state < 0 || initial_state >= mdp.num_states())
    throw InvalidArgument("pac_error: initial state out of range");
  const ExactSolution star = solve_exact(mdp);
  return star.v(initial_state) - evaluate_policy_exact(mdp, policy)(initial_state);
}

// ---------------------------------------------------------------------------
// Q-learning

enum class ScheduleKind { constant, inverse_time, inverse_visits };

struct StepSchedule {
  ScheduleKind kind = ScheduleKind::inverse_visits;
  double eta = 0.1;  // used by `constant`

  /// k is the 1-based global step, n the 1-based visit count of the pair.
  double operator()(long long k, long long n) const {
    switch (kind) {
      case ScheduleKind::constant: return eta;
      case ScheduleKind::inverse_time: return 1.0 / static_cast<double>(k);
      case ScheduleKind::inverse_visits: return 1.0 / static_cast<double>(n);
    }
    return eta;
  }

  std::string_view name() const {
    switch (kind) {
      case ScheduleKind::constant: return "constant";
      case ScheduleKind::inverse_time: return "1/k";
      case ScheduleKind::inverse_visits: return "1/visits";
    }
    return "?";
  }

  static StepSchedule parse(std::string_view name, double eta = 0.1) {
    if (name == "constant") {
      if (!(eta > 0.0)) throw InvalidArgument("constant step size must be > 0");
      return {ScheduleKind::constant, eta};
    }
    if (name == "1/k") return {ScheduleKind::inverse_time, eta};
    if (name == "1/visits") return {ScheduleKind::inverse_visits, eta};
    throw InvalidArgument("unknown step schedule '" + std::string(name) + "'");
  }
};

struct QLearningOptions {
  double discount = 0.9;
  long long steps = 10000;
  StepSchedule schedule;
  double epsilon = 0.1;
  int initial_state = 0;
};

struct QLearningResult {
  QTable q;
  Eigen::MatrixXi visits;
};

/// Epsilon-greedy action: uniform with probability epsilon, otherwise the
/// lowest-index maximizer.
inline int epsilon_greedy(const QTable& q, int s, double epsilon, Rng& rng) {
  if (rng.uniform() < epsilon) return rng.index(q.num_actions());
  int best = 0;
  for (int a = 1; a < q.num_actions(); ++a)
    if (q(s, a) > q(s, best)) best = a;
  return best;
}

/// Tabular Q-learning along one epsilon-greedy trajectory:
/// Q(s,a) <- (1-eta) Q(s,a) + eta (r + gamma max_a' Q(s',a')).
inline QLearningResult q_learning(const TransitionSampler& sampler, int num_states,
                                  int num_actions, const QLearningOptions& opt, Rng& rng) {
  if (!(opt.discount > 0.0 && opt.discount < 1.0))
    throw InvalidArgument("q_learning: discount must lie in (0, 1)");
  if (!(opt.epsilon >= 0.0 && opt.epsilon <= 1.0))
    throw InvalidArgument("q_learning: epsilon must lie in [0, 1]");
  if (opt.initial_state < 0 || opt.initial_state >= num_states)
    throw InvalidArgument("q_learning: initial state out of range");
  QLearningResult out{QTable::zeros(num_states, num_actions),
                      Eigen::MatrixXi::Zero(num_states, num_actions)};
  int s = opt.initial_state;
  for (long long k = 1; k <= opt.steps; ++k) {
    const int a = epsilon_greedy(out.q, s, opt.epsilon, rng);
    const Transition tr = sampler(s, a, rng);
    if (tr.next_state < 0 || tr.next_state >= num_states)
      throw InvalidArgument("sampler returned an out-of-range state");
    const long long n = ++out.visits(s, a);
    const double eta = opt.schedule(k, n);
    const double target = tr.reward + opt.discount * out.q.values().row(tr.next_state).maxCoeff();
    out.q(s, a) = (1.0 - eta) * out.q(s, a) + eta * target;
    s = tr.next_state;
  }
  return out;
}

// ---------------------------------------------------------------------------
// SARSA(lambda)

using Featurizer = std::function<Eigen::VectorXd(int state, int action)>;

/// Q(s,a; theta) = theta' phi(s,a).
struct LinearQApprox {
  Eigen::VectorXd weights;
  Featurizer features;

  LinearQApprox(Eigen::VectorXd w, Featurizer f) : weights(std::move(w)), features(std::move(f)) {}

  Eigen::VectorXd checked_features(int s, int a) const {
    Eigen::VectorXd phi = features(s, a);
    if (phi.size() != weights.size())
      throw DimensionError("feature length " + std::to_string(phi.size()) +
                           " differs from weight length " + std::to_string(weights.size()));
    return phi;
  }

  double value(int s, int a) const { return weights.dot(checked_features(s, a)); }
};

/// Indicator of (s, a) in R^{S*A}.
inline Featurizer one_hot_features(int num_states, int num_actions) {
  return [num_states, num_actions](int s, int a) {
    Eigen::VectorXd phi = Eigen::VectorXd::Zero(num_states * num_actions);
    phi(s * num_actions + a) = 1.0;
    return phi;
  };
}

using ApproxPolicy = std::function<int(int state, const LinearQApprox& q, Rng& rng)>;

inline ApproxPolicy fixed_policy(TabularPolicy pi) {
  return [pi = std::move(pi)](int s, const LinearQApprox&, Rng&) { return pi(s); };
}

inline ApproxPolicy epsilon_greedy_policy(int num_actions, double epsilon) {
  return [num_actions, epsilon](int s, const LinearQApprox& q, Rng& rng) {
    if (rng.uniform() < epsilon) return rng.index(num_actions);
    int best = 0;
    double best_v = q.value(s, 0);
    for (int a = 1; a < num_actions; ++a) {
      const double v = q.value(s, a);
      if (v > best_v) {
        best = a;
        best_v = v;
      }
    }
    return best;
  };
}

struct SarsaOptions {
  double discount = 0.9;
  double lambda = 0.0;
  double eta = 0.01;
  long long steps = 10000;
  int initial_state = 0;
  double divergence_guard = 1e8;
};

struct SarsaResult {
  LinearQApprox approx;
  Eigen::VectorXd trace;
  long long steps_run = 0;
  bool diverged = false;
};

/// delta_t = r_t + gamma Q(x_{t+1}, u_{t+1}) - Q(x_t, u_t)
/// e_t     = lambda e_{t-1} + grad Q(x_t, u_t)
/// theta  += eta delta_t e_t
/// Stops early with diverged = true once ||theta|| exceeds the guard.
inline SarsaResult sarsa_lambda(const TransitionSampler& sampler, LinearQApprox approx,
                                const ApproxPolicy& policy, const SarsaOptions& opt, Rng& rng) {
  if (!(opt.lambda >= 0.0 && opt.lambda <= 1.0))
    throw InvalidArgument("sarsa_lambda: lambda must lie in [0, 1]");
  SarsaResult out{std::move(approx), Eigen::VectorXd::Zero(0), 0, false};
  auto& q = out.approx;
  out.trace = Eigen::VectorXd::Zero(q.weights.size());
  int s = opt.initial_state;
  int a = policy(s, q, rng);
  for (long long t = 0; t < opt.steps; ++t) {
    const Transition tr = sampler(s, a, rng);
    const int a_next = policy(tr.next_state, q, rng);
    const Eigen::VectorXd phi = q.checked_features(s, a);
    const double delta = tr.reward + opt.discount * q.value(tr.next_state, a_next) -
                         q.weights.dot(phi);
    out.trace = opt.lambda * out.trace + phi;
    q.weights += opt.eta * delta * out.trace;
    ++out.steps_run;
    if (!(q.weights.norm() <= opt.divergence_guard)) {
      out.diverged = true;
      break;
    }
    s = tr.next_state;
    a = a_next;
  }
  return out;
}

}  // namespace sdm
