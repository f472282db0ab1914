#pragma once

// Linear-quadratic control and estimation.
//
//   x_{t+1} = A x_t + B u_t + w_t,   y_t = C x_t + v_t,
//   cost sum x' Phi x + u' Psi u,    feedback u = -K x.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sdm/error.hpp"

namespace sdm {

inline constexpr double kSymmetryTolerance = 1e-9;

namespace detail {

inline std::string shape(const Eigen::MatrixXd& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

inline void require_psd(const Eigen::MatrixXd& m, const char* name) {
  if (m.rows() != m.cols())
    throw DimensionError(std::string(name) + " must be square, got " + shape(m));
  if (m.size() == 0) return;
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance)
    throw InvalidArgument(std::string(name) + " is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()),
                                                    Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -kSymmetryTolerance)
    throw InvalidArgument(std::string(name) + " is not positive semidefinite");
}

}  // namespace detail

struct LinearSystem {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd C;
  Eigen::MatrixXd Sw;
  Eigen::MatrixXd Sv;

  /// Fully observed system with C = I and zero noise unless given.
  static LinearSystem make(Eigen::MatrixXd a, Eigen::MatrixXd b,
                           std::optional<Eigen::MatrixXd> c = {},
                           std::optional<Eigen::MatrixXd> sw = {},
                           std::optional<Eigen::MatrixXd> sv = {}) {
    const auto d = a.rows();
    LinearSystem sys;
    sys.C = c.value_or(Eigen::MatrixXd::Identity(d, d));
    sys.Sw = sw.value_or(Eigen::MatrixXd::Zero(d, d));
    sys.Sv = sv.value_or(Eigen::MatrixXd::Zero(sys.C.rows(), sys.C.rows()));
    sys.A = std::move(a);
    sys.B = std::move(b);
    sys.validate();
    return sys;
  }

  int state_dim() const { return static_cast<int>(A.rows()); }
  int input_dim() const { return static_cast<int>(B.cols()); }
  int output_dim() const { return static_cast<int>(C.rows()); }

  void validate() const {
    const auto d = A.rows();
    if (A.cols() != d) throw DimensionError("A must be square, got " + detail::shape(A));
    if (B.rows() != d) throw DimensionError("B must have d rows, got " + detail::shape(B));
    if (C.cols() != d) throw DimensionError("C must have d columns, got " + detail::shape(C));
    if (Sw.rows() != d)
      throw DimensionError("Sw must be d x d, got " + detail::shape(Sw));
    if (Sv.rows() != C.rows())
      throw DimensionError("Sv must be k x k, got " + detail::shape(Sv));
    detail::require_psd(Sw, "Sw");
    detail::require_psd(Sv, "Sv");
  }
};

struct QuadraticCost {
  Eigen::MatrixXd Phi;
  Eigen::MatrixXd Psi;

  void validate_for(const LinearSystem& sys) const {
    if (Phi.rows() != sys.state_dim())
      throw DimensionError("Phi must be d x d, got " + detail::shape(Phi));
    if (Psi.rows() != sys.input_dim())
      throw DimensionError("Psi must be p x p, got " + detail::shape(Psi));
    detail::require_psd(Phi, "Phi");
    detail::require_psd(Psi, "Psi");
  }
};

/// u = -K x.
struct FeedbackGain {
  Eigen::MatrixXd K;
};

struct FilterGain {
  Eigen::MatrixXd L;
  Eigen::MatrixXd P;
  double regularization = 0.0;  // epsilon added to Sv, 0 if none was needed
  bool converged = false;
  double residual = 0.0;
  int iterations = 0;
};

enum class Stability { stable, marginal, unstable };

inline const char* to_string(Stability s) {
  switch (s) {
    case Stability::stable: return "stable";
    case Stability::marginal: return "marginal";
    case Stability::unstable: return "unstable";
  }
  return "?";
}

inline constexpr double kStabilityBand = 1e-9;

inline double spectral_radius(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols())
    throw DimensionError("spectral_radius needs a square matrix, got " + detail::shape(m));
  if (m.size() == 0) return 0.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
  if (es.info() != Eigen::Success) throw Error("eigensolver failed");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

inline Eigen::VectorXcd eigenvalues(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols())
    throw DimensionError("eigenvalues need a square matrix, got " + detail::shape(m));
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
  return es.eigenvalues();
}

inline Stability classify_stability(double rho) {
  if (rho < 1.0 - kStabilityBand) return Stability::stable;
  if (rho <= 1.0 + kStabilityBand) return Stability::marginal;
  return Stability::unstable;
}

struct RiccatiSolution {
  Eigen::MatrixXd M;
  Eigen::MatrixXd K;
  double residual = 0.0;
  bool converged = false;
  int iterations = 0;
  /// Classification of A - B K; marginal when a closed-loop eigenvalue sits
  /// on the unit circle even if the iteration itself settled.
  Stability stability = Stability::stable;
};

struct RiccatiStep {
  Eigen::MatrixXd M;
  Eigen::MatrixXd K;
};

namespace detail {

/// K = (Psi + B'MB)^{-1} B'MA, throwing when the inner matrix is singular.
inline Eigen::MatrixXd riccati_gain(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                    const Eigen::MatrixXd& Psi, const Eigen::MatrixXd& M,
                                    int step) {
  const Eigen::MatrixXd inner = Psi + B.transpose() * M * B;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(inner);
  const double scale = std::max(1.0, inner.cwiseAbs().maxCoeff());
  lu.setThreshold(1e-13 * scale);
  if (!lu.isInvertible()) {
    std::ostringstream os;
    os << "Psi + B'MB is singular at step " << step;
    throw SingularMatrixError(os.str(), step);
  }
  return lu.solve(B.transpose() * M * A);
}

/// Phi + A'MA - A'MB K, symmetrized.
inline Eigen::MatrixXd riccati_update(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                      const Eigen::MatrixXd& Phi, const Eigen::MatrixXd& M,
                                      const Eigen::MatrixXd& K) {
  Eigen::MatrixXd next = Phi + A.transpose() * M * A - A.transpose() * M * B * K;
  return 0.5 * (next + next.transpose());
}

}  // namespace detail

/// Backward recursion from M_T = Phi (or `terminal`). Element t of the result
/// holds (M_t, K_t) for t = 0..T-1 with K_t computed from M_{t+1}; element T
/// holds M_T and an empty K.
inline std::vector<RiccatiStep> riccati_recursion(
    const LinearSystem& sys, const QuadraticCost& cost, int horizon,
    const std::optional<Eigen::MatrixXd>& terminal = {}) {
  if (horizon < 1) throw InvalidArgument("riccati_recursion: horizon must be >= 1");
  cost.validate_for(sys);
  std::vector<RiccatiStep> out(static_cast<std::size_t>(horizon + 1));
  out.back().M = terminal.value_or(cost.Phi);
  for (int t = horizon - 1; t >= 0; --t) {
    const auto& next = out[static_cast<std::size_t>(t + 1)].M;
    auto& cur = out[static_cast<std::size_t>(t)];
    cur.K = detail::riccati_gain(sys.A, sys.B, cost.Psi, next, t);
    cur.M = detail::riccati_update(sys.A, sys.B, cost.Phi, next, cur.K);
  }
  return out;
}

/// l-infinity residual of M against the DARE.
inline double dare_residual(const LinearSystem& sys, const QuadraticCost& cost,
                            const Eigen::MatrixXd& M) {
  const Eigen::MatrixXd K = detail::riccati_gain(sys.A, sys.B, cost.Psi, M, -1);
  return (detail::riccati_update(sys.A, sys.B, cost.Phi, M, K) - M)
      .cwiseAbs()
      .maxCoeff();
}

inline constexpr double kDareTolerance = 1e-10;
inline constexpr int kDareMaxIterations = 100000;

/// Iterates the Riccati map from M = Phi until the l-infinity change falls
/// to `tol`. Non-settling runs return the last iterate with converged = false.
inline RiccatiSolution solve_dare(const LinearSystem& sys, const QuadraticCost& cost,
                                  double tol = kDareTolerance,
                                  int max_iter = kDareMaxIterations) {
  if (!(tol > 0.0)) throw InvalidArgument("solve_dare: tol must be > 0");
  cost.validate_for(sys);
  RiccatiSolution out;
  out.M = cost.Phi;
  out.residual = std::numeric_limits<double>::infinity();
  while (out.iterations < max_iter) {
    out.K = detail::riccati_gain(sys.A, sys.B, cost.Psi, out.M, out.iterations);
    Eigen::MatrixXd next = detail::riccati_update(sys.A, sys.B, cost.Phi, out.M, out.K);
    out.residual = (next - out.M).cwiseAbs().maxCoeff();
    out.M = std::move(next);
    ++out.iterations;
    if (!out.M.allFinite()) break;
    if (out.residual <= tol) {
      out.converged = true;
      break;
    }
  }
  if (out.M.allFinite()) {
    out.K = detail::riccati_gain(sys.A, sys.B, cost.Psi, out.M, out.iterations);
    out.residual = dare_residual(sys, cost, out.M);
    out.converged = out.converged && out.residual <= tol;
    out.stability = classify_stability(spectral_radius(sys.A - sys.B * out.K));
  } else {
    out.converged = false;
    out.stability = Stability::unstable;
  }
  return out;
}

inline FeedbackGain lqr_gain(const LinearSystem& sys, const QuadraticCost& cost,
                             double tol = kDareTolerance) {
  return {solve_dare(sys, cost, tol).K};
}

/// A - B_star K with B_star defaulting to B.
inline Eigen::MatrixXd closed_loop(const LinearSystem& sys, const Eigen::MatrixXd& K,
                                   const std::optional<Eigen::MatrixXd>& B_star = {}) {
  const Eigen::MatrixXd& b = B_star ? *B_star : sys.B;
  if (b.rows() != sys.A.rows() || K.rows() != b.cols() || K.cols() != sys.A.cols())
    throw DimensionError("closed_loop: K is " + detail::shape(K) + ", B is " +
                         detail::shape(b));
  return sys.A - b * K;
}

/// Solves X = F X F' + W by a Kronecker-form linear system.
inline Eigen::MatrixXd solve_discrete_lyapunov(const Eigen::MatrixXd& F,
                                               const Eigen::MatrixXd& W) {
  const auto n = F.rows();
  Eigen::MatrixXd kron(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) kron.block(i * n, j * n, n, n) = F(i, j) * F;
  const Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(n * n, n * n) - kron;
  const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(W.data(), n * n);
  const Eigen::VectorXd x = lhs.partialPivLu().solve(w);
  Eigen::MatrixXd X = Eigen::Map<const Eigen::MatrixXd>(x.data(), n, n);
  return 0.5 * (X + X.transpose());
}

/// Steady-state average cost Tr((Phi + K'Psi K) X) with X the stationary
/// state covariance under u = -Kx. +infinity unless strictly stable.
inline double lqr_cost(const LinearSystem& sys, const QuadraticCost& cost,
                       const Eigen::MatrixXd& K) {
  const Eigen::MatrixXd F = closed_loop(sys, K);
  if (classify_stability(spectral_radius(F)) != Stability::stable)
    return std::numeric_limits<double>::infinity();
  const Eigen::MatrixXd X = solve_discrete_lyapunov(F, sys.Sw);
  return std::max(0.0, ((cost.Phi + K.transpose() * cost.Psi * K) * X).trace());
}

inline constexpr double kDefaultFilterRegularization = 1e-12;

/// Steady-state predictor gain L = A P C'(C P C' + Sv)^{-1}, where P iterates
/// the filter Riccati map P <- A P A' + Sw - A P C'(C P C' + Sv)^{-1} C P A'
/// from P = Sw. A singular Sv is replaced by Sv + eps I when eps > 0.
inline FilterGain kalman_gain(const LinearSystem& sys,
                              double eps = kDefaultFilterRegularization,
                              double tol = kDareTolerance,
                              int max_iter = kDareMaxIterations) {
  sys.validate();
  FilterGain out;
  Eigen::MatrixXd Sv = sys.Sv;
  {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Sv, Eigen::EigenvaluesOnly);
    const double smallest = Sv.size() ? es.eigenvalues().minCoeff() : 1.0;
    if (smallest <= 0.0) {
      if (!(eps > 0.0))
        throw SingularMatrixError("innovation covariance Sv is singular and eps = 0", -1);
      Sv += eps * Eigen::MatrixXd::Identity(Sv.rows(), Sv.cols());
      out.regularization = eps;
    }
  }
  const Eigen::MatrixXd& A = sys.A;
  const Eigen::MatrixXd& C = sys.C;
  auto gain = [&](const Eigen::MatrixXd& P, int step) -> Eigen::MatrixXd {
    const Eigen::MatrixXd S = C * P * C.transpose() + Sv;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(S);
    if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().array() > 0.0).all())
      throw SingularMatrixError("innovation covariance is singular at step " +
                                    std::to_string(step),
                                step);
    return ldlt.solve(C * P * A.transpose()).transpose();
  };
  out.P = sys.Sw;
  out.residual = std::numeric_limits<double>::infinity();
  while (out.iterations < max_iter) {
    const Eigen::MatrixXd L = gain(out.P, out.iterations);
    Eigen::MatrixXd next = A * out.P * A.transpose() + sys.Sw - L * C * out.P * A.transpose();
    next = 0.5 * (next + next.transpose());
    out.residual = (next - out.P).cwiseAbs().maxCoeff();
    out.P = std::move(next);
    ++out.iterations;
    if (!out.P.allFinite()) break;
    if (out.residual <= tol) {
      out.converged = true;
      break;
    }
  }
  out.L = gain(out.P, out.iterations);
  return out;
}

/// xhat' = A xhat + B u + L (y - C xhat).
inline Eigen::VectorXd kalman_step(const Eigen::VectorXd& xhat, const Eigen::VectorXd& u,
                                   const Eigen::VectorXd& y, const LinearSystem& sys,
                                   const Eigen::MatrixXd& L) {
  if (xhat.size() != sys.state_dim() || u.size() != sys.input_dim() ||
      y.size() != sys.output_dim() || L.rows() != sys.state_dim() ||
      L.cols() != sys.output_dim())
    throw DimensionError("kalman_step: inconsistent dimensions");
  return sys.A * xhat + sys.B * u + L * (y - sys.C * xhat);
}

/// Closed loop over (xhat, e = x - xhat) when the controller believes B but
/// the plant applies B_star:
///   [A - BK,        LC    ]
///   [(B - B_star)K, A - LC]
inline Eigen::MatrixXd lqg_closed_loop(const LinearSystem& sys, const Eigen::MatrixXd& K,
                                       const Eigen::MatrixXd& L,
                                       const std::optional<Eigen::MatrixXd>& B_star = {}) {
  const Eigen::MatrixXd& bs = B_star ? *B_star : sys.B;
  const int d = sys.state_dim();
  if (K.rows() != sys.input_dim() || K.cols() != d || L.rows() != d ||
      L.cols() != sys.output_dim() || bs.rows() != d || bs.cols() != sys.input_dim())
    throw DimensionError("lqg_closed_loop: inconsistent dimensions");
  Eigen::MatrixXd out(2 * d, 2 * d);
  out.topLeftCorner(d, d) = sys.A - sys.B * K;
  out.topRightCorner(d, d) = L * sys.C;
  out.bottomLeftCorner(d, d) = (sys.B - bs) * K;
  out.bottomRightCorner(d, d) = sys.A - L * sys.C;
  return out;
}

/// Dual control problem (A', C', Sw, Sv): its LQR gain transposed is the
/// steady-state filter gain.
inline std::pair<LinearSystem, QuadraticCost> dual_problem(const LinearSystem& sys) {
  LinearSystem dual;
  dual.A = sys.A.transpose();
  dual.B = sys.C.transpose();
  dual.C = Eigen::MatrixXd::Identity(sys.state_dim(), sys.state_dim());
  dual.Sw = Eigen::MatrixXd::Zero(sys.state_dim(), sys.state_dim());
  dual.Sv = Eigen::MatrixXd::Zero(sys.state_dim(), sys.state_dim());
  return {dual, QuadraticCost{sys.Sw, sys.Sv}};
}

// ---------------------------------------------------------------------------
// Instances

/// A = [1 1; 0 1], B = [0; 1], Phi = [1 .5; .5 .25], Psi = 0.
inline std::pair<LinearSystem, QuadraticCost> newton_instance() {
  Eigen::MatrixXd A(2, 2), B(2, 1), Phi(2, 2);
  A << 1, 1, 0, 1;
  B << 0, 1;
  Phi << 1, 0.5, 0.5, 0.25;
  return {LinearSystem::make(A, B), QuadraticCost{Phi, Eigen::MatrixXd::Zero(1, 1)}};
}

/// A = [0 1; 0 0], B = [0; 1], Phi = [1 -1; -1 1], Psi = psi.
inline std::pair<LinearSystem, QuadraticCost> shift_register_instance(double psi = 0.0) {
  Eigen::MatrixXd A(2, 2), B(2, 1), Phi(2, 2);
  A << 0, 1, 0, 0;
  B << 0, 1;
  Phi << 1, -1, -1, 1;
  return {LinearSystem::make(A, B), QuadraticCost{Phi, Eigen::MatrixXd::Constant(1, 1, psi)}};
}

/// Newton dynamics observed through C = [1 0] with Sw = [1 2; 2 4] and
/// Sv = sigma2.
inline LinearSystem lqg_fragility_system(double sigma2 = 1e-4) {
  Eigen::MatrixXd A(2, 2), B(2, 1), C(1, 2), Sw(2, 2);
  A << 1, 1, 0, 1;
  B << 0, 1;
  C << 1, 0;
  Sw << 1, 2, 2, 4;
  return LinearSystem::make(A, B, C, Sw, Eigen::MatrixXd::Constant(1, 1, sigma2));
}

}  // namespace sdm
