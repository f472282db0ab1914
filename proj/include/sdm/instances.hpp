#pragma once

// Built-in example systems beyond the control and MDP fixtures.

#include <Eigen/Dense>

#include <algorithm>
#include <vector>

#include "sdm/error.hpp"
#include "sdm/linear_control.hpp"
#include "sdm/mdp.hpp"

namespace sdm {

/// Position/velocity under force: z' = z + dt v, v' = v + (dt/m)(u + w).
/// The force disturbance w has variance wind_var, so Sw = (dt/m)^2 wind_var e2 e2'.
inline LinearSystem double_integrator_instance(double dt, double mass, double wind_var = 0.0) {
  if (!(dt > 0.0)) throw InvalidArgument("double integrator: dt must be > 0");
  if (!(mass > 0.0)) throw InvalidArgument("double integrator: mass must be > 0");
  if (wind_var < 0.0) throw InvalidArgument("double integrator: wind variance must be >= 0");
  Eigen::MatrixXd A(2, 2), B(2, 1), Sw = Eigen::MatrixXd::Zero(2, 2);
  A << 1, dt, 0, 1;
  B << 0, dt / mass;
  Sw(1, 1) = (dt / mass) * (dt / mass) * wind_var;
  return LinearSystem::make(A, B, std::nullopt, Sw);
}

/// Stock x' = x + u - w with stock clipped to [0, max_stock]. Orders beyond
/// capacity are lost and unmet demand is not backlogged.
struct InventoryParams {
  int max_stock = 10;
  int max_order = 5;
  std::vector<double> demand{0.25, 0.5, 0.25};  // P(W = k), k = 0, 1, ...
  double price = 1.0;
  double order_cost = 0.5;
  double holding_cost = 0.05;
  double discount = 0.95;

  void validate() const {
    if (max_stock < 0) throw InvalidArgument("inventory: max_stock must be >= 0");
    if (max_order < 0) throw InvalidArgument("inventory: max_order must be >= 0");
    if (demand.empty()) throw InvalidArgument("inventory: demand distribution is empty");
    double total = 0.0;
    for (double p : demand) {
      if (!(p >= 0.0)) throw InvalidArgument("inventory: demand probabilities must be >= 0");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) throw InvalidArgument("inventory: demand probabilities must sum to 1");
  }
};

struct InventoryOutcome {
  int next_stock = 0;
  int sold = 0;
};

inline InventoryOutcome inventory_step(const InventoryParams& p, int stock, int order, int demand) {
  if (stock < 0 || stock > p.max_stock) throw InvalidArgument("inventory: stock out of range");
  if (order < 0 || order > p.max_order) throw InvalidArgument("inventory: order out of range");
  if (demand < 0) throw InvalidArgument("inventory: demand must be >= 0");
  const int available = std::min(stock + order, p.max_stock);
  InventoryOutcome out;
  out.sold = std::min(available, demand);
  out.next_stock = available - out.sold;
  return out;
}

/// Tabular model with states 0..max_stock and actions 0..max_order. The
/// reward is price * E[sold] - order_cost * u - holding_cost * x.
inline TabularMdp inventory_instance(const InventoryParams& p = {}) {
  p.validate();
  const int S = p.max_stock + 1, A = p.max_order + 1;
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(S * A, S);
  Eigen::MatrixXd R(S, A);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) {
      double sold = 0.0;
      for (int w = 0; w < static_cast<int>(p.demand.size()); ++w) {
        const double pw = p.demand[static_cast<std::size_t>(w)];
        const auto o = inventory_step(p, s, a, w);
        P(s * A + a, o.next_stock) += pw;
        sold += pw * o.sold;
      }
      R(s, a) = p.price * sold - p.order_cost * a - p.holding_cost * s;
    }
  return TabularMdp(S, A, std::move(P), R, p.discount, RewardRange{R.minCoeff(), R.maxCoeff()});
}

}  // namespace sdm
