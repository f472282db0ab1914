#pragma once

// Derivative-free search: REINFORCE over parametric densities and pure random
// search with the two-point estimator.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "sdm/error.hpp"
#include "sdm/rng.hpp"

namespace sdm {

using RewardFn = std::function<double(const Eigen::VectorXd&)>;
/// Step size alpha_k for iteration k = 0, 1, ...
using StepSizeFn = std::function<double(long long)>;

inline StepSizeFn constant_step(double alpha) {
  if (!(alpha >= 0.0)) throw InvalidArgument("step size must be >= 0");
  return [alpha](long long) { return alpha; };
}

class ParametricDensity {
 public:
  virtual ~ParametricDensity() = default;
  virtual int param_dim() const = 0;
  virtual Eigen::VectorXd sample(const Eigen::VectorXd& theta, Rng& rng) const = 0;
  /// grad_theta log p(z; theta).
  virtual Eigen::VectorXd score(const Eigen::VectorXd& z, const Eigen::VectorXd& theta) const = 0;
  virtual std::string name() const = 0;
};

/// N(theta, Sigma) with fixed positive definite Sigma.
class GaussianDensity final : public ParametricDensity {
 public:
  explicit GaussianDensity(Eigen::MatrixXd cov) : cov_(std::move(cov)) {
    if (cov_.rows() != cov_.cols() || cov_.rows() == 0)
      throw DimensionError("gaussian covariance must be square and nonempty");
    Eigen::LLT<Eigen::MatrixXd> llt(cov_);
    if (llt.info() != Eigen::Success) throw InvalidArgument("gaussian covariance must be positive definite");
    chol_ = llt.matrixL();
    precision_ = llt.solve(Eigen::MatrixXd::Identity(cov_.rows(), cov_.cols()));
  }

  static GaussianDensity isotropic(int d, double variance) {
    return GaussianDensity(variance * Eigen::MatrixXd::Identity(d, d));
  }

  int param_dim() const override { return static_cast<int>(cov_.rows()); }

  Eigen::VectorXd sample(const Eigen::VectorXd& theta, Rng& rng) const override {
    check(theta);
    Eigen::VectorXd e(param_dim());
    for (int i = 0; i < param_dim(); ++i) e(i) = rng.normal();
    return theta + chol_ * e;
  }

  Eigen::VectorXd score(const Eigen::VectorXd& z, const Eigen::VectorXd& theta) const override {
    check(theta);
    if (z.size() != theta.size()) throw DimensionError("sample dimension mismatch");
    return precision_ * (z - theta);
  }

  std::string name() const override { return "gaussian"; }
  const Eigen::MatrixXd& covariance() const { return cov_; }

 private:
  void check(const Eigen::VectorXd& theta) const {
    if (theta.size() != param_dim()) throw DimensionError("parameter dimension mismatch");
  }

  Eigen::MatrixXd cov_;
  Eigen::MatrixXd chol_;
  Eigen::MatrixXd precision_;
};

/// Categorical over K outcomes with p = softmax(theta). Samples are one-hot.
class CategoricalSoftmax final : public ParametricDensity {
 public:
  explicit CategoricalSoftmax(int k) : k_(k) {
    if (k < 1) throw InvalidArgument("categorical needs at least one outcome");
  }

  int param_dim() const override { return k_; }

  static Eigen::VectorXd softmax(const Eigen::VectorXd& theta) {
    const Eigen::VectorXd e = (theta.array() - theta.maxCoeff()).exp();
    return e / e.sum();
  }

  Eigen::VectorXd sample(const Eigen::VectorXd& theta, Rng& rng) const override {
    if (theta.size() != k_) throw DimensionError("parameter dimension mismatch");
    const Eigen::VectorXd p = softmax(theta);
    const double u = rng.uniform();
    double acc = 0.0;
    int i = 0;
    for (; i < k_ - 1; ++i) {
      acc += p(i);
      if (u < acc) break;
    }
    return Eigen::VectorXd::Unit(k_, i);
  }

  Eigen::VectorXd score(const Eigen::VectorXd& z, const Eigen::VectorXd& theta) const override {
    if (theta.size() != k_ || z.size() != k_) throw DimensionError("parameter dimension mismatch");
    return z - softmax(theta);
  }

  std::string name() const override { return "categorical"; }

 private:
  int k_;
};

struct GradientEstimate {
  Eigen::VectorXd mean;
  Eigen::VectorXd std_error;  // per coordinate
  long long accepted = 0;
  long long rejected = 0;     // samples with a non-finite evaluation
};

namespace detail {

class MeanAccumulator {
 public:
  explicit MeanAccumulator(int d) : sum_(Eigen::VectorXd::Zero(d)), sq_(Eigen::VectorXd::Zero(d)) {}

  void add(const Eigen::VectorXd& g) {
    sum_ += g;
    sq_ += g.cwiseAbs2();
    ++n_;
  }

  GradientEstimate finish(long long rejected) const {
    GradientEstimate out;
    out.accepted = n_;
    out.rejected = rejected;
    const auto d = sum_.size();
    if (n_ == 0) {
      out.mean = Eigen::VectorXd::Zero(d);
      out.std_error = Eigen::VectorXd::Constant(d, std::numeric_limits<double>::infinity());
      return out;
    }
    const double n = static_cast<double>(n_);
    out.mean = sum_ / n;
    if (n_ > 1) {
      const Eigen::VectorXd var = ((sq_ - n * out.mean.cwiseAbs2()) / (n - 1.0)).cwiseMax(0.0);
      out.std_error = (var / n).cwiseSqrt();
    } else {
      out.std_error = Eigen::VectorXd::Constant(d, std::numeric_limits<double>::infinity());
    }
    return out;
  }

 private:
  Eigen::VectorXd sum_;
  Eigen::VectorXd sq_;
  long long n_ = 0;
};

}  // namespace detail

/// Batch mean of R(z) grad log p(z; theta) with z ~ p(.; theta).
inline GradientEstimate reinforce_gradient(const ParametricDensity& density, const RewardFn& reward,
                                           const Eigen::VectorXd& theta, long long batch, Rng& rng) {
  if (batch < 1) throw InvalidArgument("batch must be >= 1");
  detail::MeanAccumulator acc(density.param_dim());
  long long rejected = 0;
  for (long long b = 0; b < batch; ++b) {
    const Eigen::VectorXd z = density.sample(theta, rng);
    const double r = reward(z);
    if (!std::isfinite(r)) {
      ++rejected;
      continue;
    }
    acc.add(r * density.score(z, theta));
  }
  return acc.finish(rejected);
}

struct SearchTrace {
  std::vector<Eigen::VectorXd> iterates;  // theta_0..theta_K
  std::vector<double> rewards;            // reward observed at step k
  std::vector<double> step_sizes;         // alpha_k
  std::uint64_t seed = 0;
  double best_reward = -std::numeric_limits<double>::infinity();
  long long rejected = 0;
  bool diverged = false;

  const Eigen::VectorXd& final_iterate() const { return iterates.back(); }
  std::size_t steps() const { return step_sizes.size(); }
};

inline constexpr double kSearchDivergenceGuard = 1e8;

namespace detail {

inline bool escaped(const Eigen::VectorXd& theta, double guard) {
  return !theta.allFinite() || theta.norm() > guard;
}

}  // namespace detail

/// theta_{k+1} = theta_k + alpha_k * mean_b R(z_b) grad log p(z_b; theta_k).
/// rewards[k] is the batch mean of R(z_b). Stops when ||theta|| exceeds guard.
inline SearchTrace reinforce(const ParametricDensity& density, const RewardFn& reward,
                             const Eigen::VectorXd& theta0, long long steps, const StepSizeFn& step,
                             Rng& rng, long long batch = 1, double guard = kSearchDivergenceGuard) {
  if (steps < 0) throw InvalidArgument("steps must be >= 0");
  if (batch < 1) throw InvalidArgument("batch must be >= 1");
  if (theta0.size() != density.param_dim()) throw DimensionError("initial parameter dimension mismatch");
  SearchTrace trace;
  trace.seed = rng.seed();
  trace.iterates.push_back(theta0);
  Eigen::VectorXd theta = theta0;
  for (long long k = 0; k < steps; ++k) {
    const double alpha = step(k);
    if (!(alpha >= 0.0)) throw InvalidArgument("step size must be >= 0");
    detail::MeanAccumulator acc(density.param_dim());
    double rsum = 0.0;
    long long rn = 0;
    for (long long b = 0; b < batch; ++b) {
      const Eigen::VectorXd z = density.sample(theta, rng);
      const double r = reward(z);
      if (!std::isfinite(r)) {
        ++trace.rejected;
        continue;
      }
      trace.best_reward = std::max(trace.best_reward, r);
      rsum += r;
      ++rn;
      acc.add(r * density.score(z, theta));
    }
    const GradientEstimate g = acc.finish(0);
    theta += alpha * g.mean;
    trace.rewards.push_back(rn > 0 ? rsum / static_cast<double>(rn) : std::numeric_limits<double>::quiet_NaN());
    trace.step_sizes.push_back(alpha);
    trace.iterates.push_back(theta);
    if (detail::escaped(theta, guard)) {
      trace.diverged = true;
      break;
    }
  }
  return trace;
}

/// Direction law for random search. Sphere directions are scaled by sqrt(d)
/// so both laws satisfy E[eps eps'] = I.
enum class DirectionKind { gaussian, sphere };

inline Eigen::VectorXd sample_direction(int d, DirectionKind kind, Rng& rng) {
  Eigen::VectorXd e(d);
  for (int i = 0; i < d; ++i) e(i) = rng.normal();
  if (kind == DirectionKind::sphere) e *= std::sqrt(static_cast<double>(d)) / e.norm();
  return e;
}

/// [R(theta + sigma eps) - R(theta - sigma eps)] / (2 sigma) * eps.
inline Eigen::VectorXd two_point_direction(const RewardFn& reward, const Eigen::VectorXd& theta,
                                           double sigma, const Eigen::VectorXd& eps) {
  if (!(sigma > 0.0)) throw InvalidArgument("sigma must be > 0");
  if (eps.size() != theta.size()) throw DimensionError("direction dimension mismatch");
  const double up = reward(theta + sigma * eps);
  const double down = reward(theta - sigma * eps);
  return (up - down) / (2.0 * sigma) * eps;
}

/// Average of the two-point estimate over m random directions. Directions
/// with a non-finite evaluation are rejected and counted.
inline GradientEstimate two_point_estimate(const RewardFn& reward, const Eigen::VectorXd& theta,
                                           double sigma, long long m, Rng& rng,
                                           DirectionKind kind = DirectionKind::gaussian) {
  if (!(sigma > 0.0)) throw InvalidArgument("sigma must be > 0");
  if (m < 1) throw InvalidArgument("direction count must be >= 1");
  const int d = static_cast<int>(theta.size());
  detail::MeanAccumulator acc(d);
  long long rejected = 0;
  for (long long i = 0; i < m; ++i) {
    const Eigen::VectorXd g = two_point_direction(reward, theta, sigma, sample_direction(d, kind, rng));
    if (!g.allFinite()) {
      ++rejected;
      continue;
    }
    acc.add(g);
  }
  return acc.finish(rejected);
}

struct RandomSearchOptions {
  double sigma = 0.1;
  long long directions = 1;
  double step = 0.01;
  long long steps = 1000;
  DirectionKind kind = DirectionKind::gaussian;
  double guard = kSearchDivergenceGuard;
};

/// theta_{k+1} = theta_k + alpha g_sigma(theta_k); rewards[k] = R(theta_k).
inline SearchTrace random_search(const RewardFn& reward, const Eigen::VectorXd& theta0,
                                 const RandomSearchOptions& opt, Rng& rng) {
  if (!(opt.step >= 0.0)) throw InvalidArgument("step size must be >= 0");
  if (opt.steps < 0) throw InvalidArgument("steps must be >= 0");
  SearchTrace trace;
  trace.seed = rng.seed();
  trace.iterates.push_back(theta0);
  Eigen::VectorXd theta = theta0;
  for (long long k = 0; k < opt.steps; ++k) {
    const double r = reward(theta);
    if (std::isfinite(r)) trace.best_reward = std::max(trace.best_reward, r);
    const GradientEstimate g = two_point_estimate(reward, theta, opt.sigma, opt.directions, rng, opt.kind);
    trace.rejected += g.rejected;
    theta += opt.step * g.mean;
    trace.rewards.push_back(r);
    trace.step_sizes.push_back(opt.step);
    trace.iterates.push_back(theta);
    if (detail::escaped(theta, opt.guard)) {
      trace.diverged = true;
      break;
    }
  }
  return trace;
}

}  // namespace sdm
