#pragma once

// Stochastic multi-armed and contextual bandits.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "sdm/error.hpp"
#include "sdm/rng.hpp"

namespace sdm {

enum class RewardFamily { bernoulli, truncated_gaussian };

class BanditInstance {
 public:
  explicit BanditInstance(std::vector<double> means,
                          RewardFamily family = RewardFamily::bernoulli, double sd = 0.1)
      : means_(std::move(means)), family_(family), sd_(sd) {
    if (means_.empty()) throw InvalidArgument("bandit needs at least one arm");
    for (double m : means_)
      if (!(m >= 0.0 && m <= 1.0)) throw InvalidArgument("arm means must lie in [0, 1]");
    if (family_ == RewardFamily::truncated_gaussian && !(sd_ > 0.0))
      throw InvalidArgument("gaussian reward sd must be > 0");
    best_ = 0;
    for (int k = 1; k < num_arms(); ++k)
      if (means_[static_cast<std::size_t>(k)] > means_[static_cast<std::size_t>(best_)]) best_ = k;
    for (double m : means_) gaps_.push_back(means_[static_cast<std::size_t>(best_)] - m);
  }

  int num_arms() const { return static_cast<int>(means_.size()); }
  double mean(int k) const { return means_[static_cast<std::size_t>(k)]; }
  double gap(int k) const { return gaps_[static_cast<std::size_t>(k)]; }
  const std::vector<double>& means() const { return means_; }
  const std::vector<double>& gaps() const { return gaps_; }
  int best_arm() const { return best_; }
  double max_gap() const {
    double g = 0.0;
    for (double x : gaps_) g = std::max(g, x);
    return g;
  }
  RewardFamily family() const { return family_; }

  /// Bernoulli(mu_k), or N(mu_k, sd^2) conditioned on [0, 1] by rejection.
  double sample(int k, Rng& rng) const {
    const double mu = mean(k);
    if (family_ == RewardFamily::bernoulli) return rng.bernoulli(mu) ? 1.0 : 0.0;
    for (;;) {
      const double r = rng.normal(mu, sd_);
      if (r >= 0.0 && r <= 1.0) return r;
    }
  }

 private:
  std::vector<double> means_;
  RewardFamily family_;
  double sd_;
  int best_ = 0;
  std::vector<double> gaps_;
};

/// Arm sequence with its pseudo-regret: instantaneous[t] is the gap of the
/// arm pulled at step t, cumulative[t] the sum up to and including t.
struct RegretCurve {
  std::vector<int> arms;
  std::vector<double> instantaneous;
  std::vector<double> cumulative;

  void record(int arm, double gap) {
    arms.push_back(arm);
    instantaneous.push_back(gap);
    cumulative.push_back((cumulative.empty() ? 0.0 : cumulative.back()) + gap);
  }
  double final_regret() const { return cumulative.empty() ? 0.0 : cumulative.back(); }
  std::size_t size() const { return arms.size(); }
};

namespace detail {

inline int argmax_lowest(const std::vector<double>& v) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(v.size()); ++i)
    if (v[static_cast<std::size_t>(i)] > v[static_cast<std::size_t>(best)]) best = i;
  return best;
}

}  // namespace detail

struct ExplorationCount {
  long long m = 0;
  /// m0 < 1: the gap is below 2/sqrt(T) and a random arm is the fallback.
  bool fallback = false;
};

/// m0 = ceil(4/gap^2 * log(T gap^2 / 4)), clipped at 0.
inline ExplorationCount m_star(double gap, long long T) {
  if (!(gap > 0.0 && gap <= 1.0)) throw InvalidArgument("m_star: gap must lie in (0, 1]");
  if (T < 1) throw InvalidArgument("m_star: T must be >= 1");
  const double m0 = std::ceil(4.0 / (gap * gap) * std::log(static_cast<double>(T) * gap * gap / 4.0));
  ExplorationCount out;
  out.fallback = m0 < 1.0;
  out.m = out.fallback ? 0 : static_cast<long long>(m0);
  return out;
}

/// Explore-then-commit: steps 0..mK-1 pull arm t mod K, then commit to the
/// empirical-mean argmax (lowest index on ties). With m = 0 the committed arm
/// is uniform at random.
inline RegretCurve run_etc(const BanditInstance& inst, long long m, long long T, Rng& rng) {
  const int K = inst.num_arms();
  if (m < 0) throw InvalidArgument("run_etc: m must be >= 0");
  if (m * K > T) throw InvalidArgument("run_etc: m*K exceeds T");
  RegretCurve curve;
  curve.arms.reserve(static_cast<std::size_t>(T));
  curve.instantaneous.reserve(static_cast<std::size_t>(T));
  curve.cumulative.reserve(static_cast<std::size_t>(T));
  std::vector<double> sums(static_cast<std::size_t>(K), 0.0);
  for (long long t = 0; t < m * K; ++t) {
    const int k = static_cast<int>(t % K);
    sums[static_cast<std::size_t>(k)] += inst.sample(k, rng);
    curve.record(k, inst.gap(k));
  }
  const int commit = m > 0 ? detail::argmax_lowest(sums) : rng.index(K);
  for (long long t = m * K; t < T; ++t) {
    inst.sample(commit, rng);
    curve.record(commit, inst.gap(commit));
  }
  return curve;
}

struct EliminationSchedule {
  int rounds = 0;                  // B = floor(log2(T/e) / 2)
  std::vector<long long> pulls;    // m_l = ceil(2^{2l+1} log(T / 4^l)), l = 1..B
};

inline EliminationSchedule se_schedule(long long T) {
  if (T < 1) throw InvalidArgument("se_schedule: T must be >= 1");
  EliminationSchedule s;
  const double t = static_cast<double>(T);
  s.rounds = static_cast<int>(std::floor(0.5 * std::log2(t / std::exp(1.0))));
  if (s.rounds < 0) s.rounds = 0;
  for (int l = 1; l <= s.rounds; ++l)
    s.pulls.push_back(static_cast<long long>(
        std::ceil(std::ldexp(1.0, 2 * l + 1) * std::log(t / std::ldexp(1.0, 2 * l)))));
  return s;
}

enum class EliminationMeans { per_round, cumulative };

struct EliminationResult {
  RegretCurve curve;
  /// Active set after each completed round.
  std::vector<std::vector<int>> active_history;
  int rounds_completed = 0;
  /// Set when B < 1 and the run fell back to round-robin play.
  bool fallback = false;
  std::string warning;
};

/// Successive elimination with the schedule above. Round l pulls every active
/// arm m_l times round-robin, then drops arm j when mean_j + 2^-l is below the
/// best active mean. Leftover budget after B rounds goes to the best arm of
/// the last round. The run stops when T pulls are spent, even mid-round.
inline EliminationResult successive_elimination(
    const BanditInstance& inst, long long T, Rng& rng,
    EliminationMeans mode = EliminationMeans::per_round) {
  const int K = inst.num_arms();
  const EliminationSchedule sched = se_schedule(T);
  EliminationResult out;
  auto pull = [&](int k) {
    const double r = inst.sample(k, rng);
    out.curve.record(k, inst.gap(k));
    return r;
  };
  if (sched.rounds < 1) {
    out.fallback = true;
    out.warning = "T = " + std::to_string(T) + " gives no elimination rounds; played round-robin";
    for (long long t = 0; t < T; ++t) pull(static_cast<int>(t % K));
    return out;
  }
  std::vector<int> active(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) active[static_cast<std::size_t>(k)] = k;
  std::vector<double> total_sum(static_cast<std::size_t>(K), 0.0);
  std::vector<long long> total_n(static_cast<std::size_t>(K), 0);
  std::vector<double> means(static_cast<std::size_t>(K), 0.0);
  long long used = 0;
  for (int l = 1; l <= sched.rounds && used < T; ++l) {
    const long long m = sched.pulls[static_cast<std::size_t>(l - 1)];
    std::vector<double> round_sum(static_cast<std::size_t>(K), 0.0);
    bool complete = true;
    for (long long i = 0; i < m && complete; ++i) {
      for (int k : active) {
        if (used == T) {
          complete = false;
          break;
        }
        const double r = pull(k);
        ++used;
        round_sum[static_cast<std::size_t>(k)] += r;
        total_sum[static_cast<std::size_t>(k)] += r;
        ++total_n[static_cast<std::size_t>(k)];
      }
    }
    if (!complete) break;
    for (int k : active) {
      const auto i = static_cast<std::size_t>(k);
      means[i] = mode == EliminationMeans::per_round
                     ? round_sum[i] / static_cast<double>(m)
                     : total_sum[i] / static_cast<double>(total_n[i]);
    }
    double best = -std::numeric_limits<double>::infinity();
    for (int k : active) best = std::max(best, means[static_cast<std::size_t>(k)]);
    const double margin = std::ldexp(1.0, -l);
    std::vector<int> keep;
    for (int k : active)
      if (!(means[static_cast<std::size_t>(k)] + margin < best)) keep.push_back(k);
    active = std::move(keep);
    out.active_history.push_back(active);
    out.rounds_completed = l;
  }
  int commit = active.front();
  for (int k : active)
    if (means[static_cast<std::size_t>(k)] > means[static_cast<std::size_t>(commit)]) commit = k;
  while (used < T) {
    pull(commit);
    ++used;
  }
  return out;
}

/// mean + sqrt(2 log(1/delta) / count); +infinity for an unpulled arm.
inline double ucb_index(double mean, long long count, double delta) {
  if (count == 0) return std::numeric_limits<double>::infinity();
  return mean + std::sqrt(2.0 * std::log(1.0 / delta) / static_cast<double>(count));
}

/// UCB with confidence parameter delta (default 1/T). Each step plays the
/// lowest-index arm with the largest index; unpulled arms come first.
inline RegretCurve run_ucb(const BanditInstance& inst, long long T, Rng& rng, double delta = 0.0) {
  if (T < 1) throw InvalidArgument("run_ucb: T must be >= 1");
  if (delta == 0.0) delta = 1.0 / static_cast<double>(T);
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("run_ucb: delta must lie in (0, 1)");
  const int K = inst.num_arms();
  std::vector<double> sums(static_cast<std::size_t>(K), 0.0);
  std::vector<long long> counts(static_cast<std::size_t>(K), 0);
  std::vector<double> index(static_cast<std::size_t>(K), std::numeric_limits<double>::infinity());
  RegretCurve curve;
  curve.arms.reserve(static_cast<std::size_t>(T));
  curve.instantaneous.reserve(static_cast<std::size_t>(T));
  curve.cumulative.reserve(static_cast<std::size_t>(T));
  for (long long t = 0; t < T; ++t) {
    const int k = detail::argmax_lowest(index);
    const auto i = static_cast<std::size_t>(k);
    sums[i] += inst.sample(k, rng);
    ++counts[i];
    index[i] = ucb_index(sums[i] / static_cast<double>(counts[i]), counts[i], delta);
    curve.record(k, inst.gap(k));
  }
  return curve;
}

// ---------------------------------------------------------------------------
// Contextual bandits

/// Contexts x ~ context(rng); reward R(x,u) + W with W ~ noise(rng).
struct ContextualEnv {
  int dim = 1;
  int num_actions = 1;
  std::function<Eigen::VectorXd(Rng&)> context;
  std::function<double(const Eigen::VectorXd&, int)> reward;
  std::function<double(Rng&)> noise;

  double best_reward(const Eigen::VectorXd& x) const {
    double best = reward(x, 0);
    for (int u = 1; u < num_actions; ++u) best = std::max(best, reward(x, u));
    return best;
  }

  /// |mean of n noise draws| within 3 standard errors of 0.
  bool noise_self_test(Rng& rng, int n = 100000) const {
    std::vector<double> w(static_cast<std::size_t>(n));
    double sum = 0.0;
    for (auto& x : w) sum += x = noise(rng);
    const double mean = sum / n;
    double ss = 0.0;
    for (double x : w) ss += (x - mean) * (x - mean);
    const double se = std::sqrt(ss / (n - 1) / n);
    return std::abs(mean) <= 3.0 * se || se == 0.0;
  }
};

/// R(x,u) = theta.col(u) . x with standard normal contexts and N(0, sd^2) noise.
inline ContextualEnv linear_contextual_env(const Eigen::MatrixXd& theta, double noise_sd) {
  if (noise_sd < 0.0) throw InvalidArgument("noise sd must be >= 0");
  ContextualEnv env;
  env.dim = static_cast<int>(theta.rows());
  env.num_actions = static_cast<int>(theta.cols());
  const int d = env.dim;
  env.context = [d](Rng& rng) {
    Eigen::VectorXd x(d);
    for (int i = 0; i < d; ++i) x(i) = rng.normal();
    return x;
  };
  env.reward = [theta](const Eigen::VectorXd& x, int u) { return theta.col(u).dot(x); };
  env.noise = [noise_sd](Rng& rng) { return noise_sd == 0.0 ? 0.0 : rng.normal(0.0, noise_sd); };
  return env;
}

inline constexpr double kRidgeFallback = 1e-8;

/// Per-action least squares R_hat(x,u) = w_u . x, refit from sufficient
/// statistics. A rank-deficient Gram matrix is solved with ridge
/// kRidgeFallback, recorded in `regularization`.
class RewardModel {
 public:
  RewardModel(int dim, int num_actions)
      : dim_(dim),
        weights_(Eigen::MatrixXd::Zero(dim, num_actions)),
        gram_(static_cast<std::size_t>(num_actions), Eigen::MatrixXd::Zero(dim, dim)),
        moment_(static_cast<std::size_t>(num_actions), Eigen::VectorXd::Zero(dim)),
        counts_(static_cast<std::size_t>(num_actions), 0),
        regularization_(static_cast<std::size_t>(num_actions), 0.0) {}

  int dim() const { return dim_; }
  int num_actions() const { return static_cast<int>(weights_.cols()); }
  int params_per_action() const { return dim_; }

  void observe(const Eigen::VectorXd& x, int u, double r) {
    if (x.size() != dim_) throw DimensionError("context dimension mismatch");
    const auto i = static_cast<std::size_t>(u);
    gram_[i].noalias() += x * x.transpose();
    moment_[i] += r * x;
    ++counts_[i];
  }

  void fit() {
    for (int u = 0; u < num_actions(); ++u) {
      const auto i = static_cast<std::size_t>(u);
      Eigen::FullPivLU<Eigen::MatrixXd> lu(gram_[i]);
      if (counts_[i] > 0 && lu.rank() == dim_) {
        weights_.col(u) = lu.solve(moment_[i]);
        regularization_[i] = 0.0;
      } else {
        weights_.col(u) =
            (gram_[i] + kRidgeFallback * Eigen::MatrixXd::Identity(dim_, dim_)).ldlt().solve(moment_[i]);
        regularization_[i] = kRidgeFallback;
      }
    }
    ++fits_;
  }

  double predict(const Eigen::VectorXd& x, int u) const { return weights_.col(u).dot(x); }

  int greedy_action(const Eigen::VectorXd& x) const {
    int best = 0;
    double best_v = predict(x, 0);
    for (int u = 1; u < num_actions(); ++u) {
      const double v = predict(x, u);
      if (v > best_v) {
        best = u;
        best_v = v;
      }
    }
    return best;
  }

  const Eigen::MatrixXd& weights() const { return weights_; }
  const std::vector<double>& regularization() const { return regularization_; }
  const std::vector<long long>& counts() const { return counts_; }
  long long fits() const { return fits_; }

 private:
  int dim_;
  Eigen::MatrixXd weights_;
  std::vector<Eigen::MatrixXd> gram_;
  std::vector<Eigen::VectorXd> moment_;
  std::vector<long long> counts_;
  std::vector<double> regularization_;
  long long fits_ = 0;
};

struct ContextualResult {
  /// instantaneous[t] = max_u R(x_t,u) - R(x_t,u_t).
  RegretCurve curve;
  /// max_u |R_hat_t(x_t,u) - R(x_t,u)| on steps that acted greedily on R_hat_t.
  std::vector<double> prediction_error;
  double greedy_regret = 0.0;       // regret summed over the greedy steps
  double greedy_error_sum = 0.0;    // sum of prediction_error
  std::vector<std::string> warnings;
  RewardModel model;
};

namespace detail {

inline double max_prediction_error(const ContextualEnv& env, const RewardModel& model,
                                   const Eigen::VectorXd& x) {
  double e = 0.0;
  for (int u = 0; u < env.num_actions; ++u)
    e = std::max(e, std::abs(model.predict(x, u) - env.reward(x, u)));
  return e;
}

inline void check_env(const ContextualEnv& env, const RewardModel& model) {
  if (model.dim() != env.dim || model.num_actions() != env.num_actions)
    throw DimensionError("reward model does not match the environment");
}

}  // namespace detail

/// m uniformly random actions, one least-squares fit, greedy afterwards.
inline ContextualResult contextual_etc(const ContextualEnv& env, RewardModel model, long long m,
                                       long long T, Rng& rng) {
  detail::check_env(env, model);
  if (m < 0 || m > T) throw InvalidArgument("contextual_etc: need 0 <= m <= T");
  ContextualResult out{{}, {}, 0.0, 0.0, {}, std::move(model)};
  if (m < out.model.params_per_action())
    out.warnings.push_back("m = " + std::to_string(m) + " is below the " +
                           std::to_string(out.model.params_per_action()) +
                           " parameters per action; the fit may be unidentifiable");
  for (long long t = 0; t < T; ++t) {
    const Eigen::VectorXd x = env.context(rng);
    int u;
    if (t < m) {
      u = rng.index(env.num_actions);
    } else {
      if (t == m) out.model.fit();
      u = out.model.greedy_action(x);
      const double err = detail::max_prediction_error(env, out.model, x);
      out.prediction_error.push_back(err);
      out.greedy_error_sum += err;
    }
    const double gap = env.best_reward(x) - env.reward(x, u);
    if (t >= m) out.greedy_regret += gap;
    out.model.observe(x, u, env.reward(x, u) + env.noise(rng));
    out.curve.record(u, gap);
  }
  for (std::size_t u = 0; u < out.model.regularization().size(); ++u)
    if (out.model.regularization()[u] > 0.0)
      out.warnings.push_back("action " + std::to_string(u) + " fit used ridge " +
                             std::to_string(kRidgeFallback));
  return out;
}

/// Refit on the full history before every decision and act greedily.
inline ContextualResult contextual_greedy(const ContextualEnv& env, RewardModel model, long long T,
                                          Rng& rng) {
  detail::check_env(env, model);
  ContextualResult out{{}, {}, 0.0, 0.0, {}, std::move(model)};
  for (long long t = 0; t < T; ++t) {
    out.model.fit();
    const Eigen::VectorXd x = env.context(rng);
    const int u = out.model.greedy_action(x);
    const double err = detail::max_prediction_error(env, out.model, x);
    out.prediction_error.push_back(err);
    out.greedy_error_sum += err;
    const double gap = env.best_reward(x) - env.reward(x, u);
    out.greedy_regret += gap;
    out.model.observe(x, u, env.reward(x, u) + env.noise(rng));
    out.curve.record(u, gap);
  }
  return out;
}

}  // namespace sdm
