#pragma once

// Exact tabular dynamic programming over the full joint action space. These
// routines use the aggregated reward and transition kernels directly and do
// not rely on the coordination-graph decomposition, so they double as oracles
// for the decomposed code paths.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <span>
#include <string>
#include <vector>

#include "adgmarl/error.hpp"
#include "adgmarl/game.hpp"
#include "adgmarl/policy.hpp"

namespace adgmarl {

/// V: one entry per state.
using ValueTable = std::vector<double>;

/// Q: one row per state, one column per joint action in lexicographic order.
class QTable {
 public:
  QTable(int states, std::uint64_t joint_actions)
      : states_(states), joint_(joint_actions),
        values_(static_cast<std::size_t>(states) * static_cast<std::size_t>(joint_actions), 0.0) {}

  int state_count() const { return states_; }
  std::uint64_t joint_action_count() const { return joint_; }
  double& at(int s, std::uint64_t a) { return values_[static_cast<std::size_t>(s) * joint_ + a]; }
  double at(int s, std::uint64_t a) const { return values_[static_cast<std::size_t>(s) * joint_ + a]; }
  std::span<const double> row(int s) const {
    return {values_.data() + static_cast<std::size_t>(s) * joint_, static_cast<std::size_t>(joint_)};
  }

 private:
  int states_;
  std::uint64_t joint_;
  std::vector<double> values_;
};

inline constexpr std::size_t kMaxDirectSolveStates = 10'000;
inline constexpr double kEvaluationResidual = 1e-12;

namespace detail {

inline void check_values(const MarkovGame& game, std::span<const double> v) {
  if (static_cast<int>(v.size()) != game.state_count()) {
    throw ValidationError("value table has " + std::to_string(v.size()) + " entries, expected " +
                          std::to_string(game.state_count()));
  }
  for (double x : v) {
    if (!std::isfinite(x)) throw ValidationError("value table contains a non-finite entry");
  }
}

inline void check_policy_shape(const MarkovGame& game, const ActionDependentPolicy& policy) {
  if (policy.agent_count() != game.agent_count() || policy.state_count() != game.state_count() ||
      policy.action_counts() != game.action_counts()) {
    throw ValidationError("policy dimensions do not match the game");
  }
}

/// Q^V(s, a) through the aggregated kernel.
inline double q_value(const MarkovGame& game, std::span<const double> v, int s, std::span<const Action> a) {
  double q = game.reward_unchecked(s, a);
  if (game.gamma() == 0.0) return q;
  if (!game.has_transitions()) return q + game.gamma() * v[0];
  auto p = aggregate_transition(game, s, a);
  double expected = 0.0;
  for (std::size_t t = 0; t < p.size(); ++t) expected += p[t] * v[t];
  return q + game.gamma() * expected;
}

inline double sup_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace detail

/// Dense Q^V(s, a) = r(s, a) + γ Σ_{s'} P(s'|s, a) V(s').
inline QTable q_from_v(const MarkovGame& game, std::span<const double> v,
                       std::uint64_t cap = kDefaultEnumerationCap) {
  detail::check_values(game, v);
  const auto& space = game.joint_actions();
  space.require_within(cap);
  QTable q(game.state_count(), space.size());
  for (int s = 0; s < game.state_count(); ++s) {
    JointAction a = space.first();
    std::uint64_t idx = 0;
    do {
      q.at(s, idx++) = detail::q_value(game, v, s, a);
    } while (space.next(a));
  }
  return q;
}

/// T_π V(s) = Q^V(s, rollout(π, s)).
inline ValueTable bellman_policy(const MarkovGame& game, const ActionDependentPolicy& policy,
                                 std::span<const double> v) {
  detail::check_values(game, v);
  detail::check_policy_shape(game, policy);
  ValueTable out(static_cast<std::size_t>(game.state_count()));
  for (int s = 0; s < game.state_count(); ++s) out[s] = detail::q_value(game, v, s, rollout(policy, s));
  return out;
}

/// TV(s) = max_a Q^V(s, a), by enumeration.
inline ValueTable bellman_optimal(const MarkovGame& game, std::span<const double> v,
                                  std::uint64_t cap = kDefaultEnumerationCap) {
  detail::check_values(game, v);
  const auto& space = game.joint_actions();
  space.require_within(cap);
  ValueTable out(static_cast<std::size_t>(game.state_count()));
  for (int s = 0; s < game.state_count(); ++s) {
    JointAction a = space.first();
    double best = detail::q_value(game, v, s, a);
    while (space.next(a)) best = std::max(best, detail::q_value(game, v, s, a));
    out[s] = best;
  }
  return out;
}

/// V^π, the fixed point of T_π. Direct LU solve of (I - γP_π)V = r_π for up
/// to kMaxDirectSolveStates states, iteration beyond that.
inline ValueTable policy_evaluation(const MarkovGame& game, const ActionDependentPolicy& policy) {
  detail::check_policy_shape(game, policy);
  const int ns = game.state_count();
  const double gamma = game.gamma();
  ValueTable reward(static_cast<std::size_t>(ns));
  std::vector<JointAction> actions(static_cast<std::size_t>(ns));
  for (int s = 0; s < ns; ++s) {
    actions[s] = rollout(policy, s);
    reward[s] = game.reward_unchecked(s, actions[s]);
  }
  if (gamma == 0.0) return reward;
  if (!game.has_transitions()) return {reward[0] / (1.0 - gamma)};

  if (static_cast<std::size_t>(ns) <= kMaxDirectSolveStates) {
    Eigen::MatrixXd system = Eigen::MatrixXd::Identity(ns, ns);
    Eigen::VectorXd rhs(ns);
    for (int s = 0; s < ns; ++s) {
      auto p = aggregate_transition(game, s, actions[s]);
      for (int t = 0; t < ns; ++t) system(s, t) -= gamma * p[t];
      rhs(s) = reward[s];
    }
    Eigen::VectorXd solution = system.partialPivLu().solve(rhs);
    ValueTable v(solution.data(), solution.data() + ns);
    for (double x : v) {
      if (!std::isfinite(x)) throw std::runtime_error("policy evaluation produced a non-finite value");
    }
    return v;
  }

  std::vector<std::vector<double>> kernel(static_cast<std::size_t>(ns));
  for (int s = 0; s < ns; ++s) kernel[s] = aggregate_transition(game, s, actions[s]);
  ValueTable v(static_cast<std::size_t>(ns), 0.0);
  ValueTable next(v.size());
  for (;;) {
    for (int s = 0; s < ns; ++s) {
      double expected = 0.0;
      for (int t = 0; t < ns; ++t) expected += kernel[s][t] * v[t];
      next[s] = reward[s] + gamma * expected;
    }
    const double change = detail::sup_distance(next, v);
    v.swap(next);
    if (change < kEvaluationResidual) return v;
  }
}

/// V* by value iteration from V = 0. Stops once successive iterates are
/// within tol(1-γ)/(2γ), which bounds the Bellman residual ‖TV - V‖ by tol.
inline ValueTable value_iteration(const MarkovGame& game, double tol,
                                  std::uint64_t cap = kDefaultEnumerationCap) {
  if (!(tol > 0.0)) throw ValidationError("value iteration tolerance must be positive");
  ValueTable v(static_cast<std::size_t>(game.state_count()), 0.0);
  if (game.gamma() == 0.0) return bellman_optimal(game, v, cap);
  const double threshold = tol * (1.0 - game.gamma()) / (2.0 * game.gamma());
  for (;;) {
    ValueTable next = bellman_optimal(game, v, cap);
    const double change = detail::sup_distance(next, v);
    v.swap(next);
    if (change < threshold) return v;
  }
}

inline constexpr double kArgmaxTolerance = 1e-12;

namespace detail {

inline double max_q(const MarkovGame& game, std::span<const double> v, int s) {
  const auto& space = game.joint_actions();
  JointAction a = space.first();
  double best = q_value(game, v, s, a);
  while (space.next(a)) best = std::max(best, q_value(game, v, s, a));
  return best;
}

}  // namespace detail

/// Joint actions whose Q^V(s, ·) lies within kArgmaxTolerance (relative to
/// max(1, |max|)) of the maximum, in lexicographic order, at most `limit` of them.
inline std::vector<JointAction> maximizing_joint_actions(const MarkovGame& game, std::span<const double> v, int s,
                                                         std::size_t limit = SIZE_MAX,
                                                         std::uint64_t cap = kDefaultEnumerationCap) {
  detail::check_values(game, v);
  game.check_state(s);
  const auto& space = game.joint_actions();
  space.require_within(cap);
  const double best = detail::max_q(game, v, s);
  const double slack = kArgmaxTolerance * std::max(1.0, std::abs(best));
  std::vector<JointAction> out;
  JointAction a = space.first();
  do {
    if (out.size() >= limit) break;
    if (detail::q_value(game, v, s, a) >= best - slack) out.push_back(a);
  } while (space.next(a));
  return out;
}

/// argmax_a Q^V(s, a); the lexicographically smallest maximiser wins ties.
inline JointAction greedy_joint_action(const MarkovGame& game, std::span<const double> v, int s,
                                       std::uint64_t cap = kDefaultEnumerationCap) {
  return maximizing_joint_actions(game, v, s, 1, cap).front();
}

}  // namespace adgmarl
