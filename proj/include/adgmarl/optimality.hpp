#pragma once

// Optimality checks for deterministic policies.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "adgmarl/ad_mpi.hpp"
#include "adgmarl/dp.hpp"
#include "adgmarl/error.hpp"
#include "adgmarl/game.hpp"
#include "adgmarl/policy.hpp"

namespace adgmarl {

inline constexpr double kEquilibriumTolerance = 1e-9;

/// No table entry (s, a_{N_d(i)}) of any agent admits an action that strictly
/// improves Q^π at the counterfactual joint action.
inline bool is_gd_locally_optimal(const MarkovGame& game, const ActionDependentPolicy& policy) {
  detail::check_policy_shape(game, policy);
  const ValueTable v = policy_evaluation(game, policy);
  const auto q = detail::comparison_q_tables(game, v);
  std::vector<double> scores;
  for (Agent i = 0; i < policy.agent_count(); ++i) {
    detail::EntryScorer scorer(game, q, policy, i);
    scores.assign(static_cast<std::size_t>(game.action_count(i)), 0.0);
    for (std::size_t entry = 0; entry < policy.entry_count(i); ++entry) {
      scorer.score(entry, scores);
      const double best = *std::max_element(scores.begin(), scores.end());
      if (detail::strictly_better(best, scores[policy.table(i)[entry]])) return false;
    }
  }
  return true;
}

namespace detail {

inline void require_independent(const ActionDependentPolicy& policy) {
  if (policy.adg().edge_count() != 0) {
    throw ValidationError("check requires an independent policy (empty dependency graph)");
  }
}

}  // namespace detail

/// For an independent policy: Q^π(s, π(s)) = max_{a_i} Q^π(s, a_i, π_{-i}(s))
/// for every agent and state.
inline bool is_agent_by_agent_optimal(const MarkovGame& game, const ActionDependentPolicy& policy) {
  detail::require_independent(policy);
  detail::check_policy_shape(game, policy);
  const ValueTable v = policy_evaluation(game, policy);
  for (int s = 0; s < game.state_count(); ++s) {
    JointAction a = rollout(policy, s);
    for (Agent i = 0; i < game.agent_count(); ++i) {
      const Action own = a[i];
      for (Action b = 0; b < game.action_count(i); ++b) {
        a[i] = b;
        if (detail::q_value(game, v, s, a) > v[s] + kEquilibriumTolerance) return false;
      }
      a[i] = own;
    }
  }
  return true;
}

/// For an independent policy: no agent can raise the value of any state by
/// switching to its best response against the others' fixed policies. Each
/// best response is the optimal value of a single-agent MDP, found by value
/// iteration.
inline bool is_nash(const MarkovGame& game, const ActionDependentPolicy& policy) {
  detail::require_independent(policy);
  detail::check_policy_shape(game, policy);
  const ValueTable v = policy_evaluation(game, policy);
  const int ns = game.state_count();
  std::vector<JointAction> others(static_cast<std::size_t>(ns));
  for (int s = 0; s < ns; ++s) others[s] = rollout(policy, s);

  for (Agent i = 0; i < game.agent_count(); ++i) {
    ValueTable w(static_cast<std::size_t>(ns), 0.0);
    const double threshold =
        game.gamma() == 0.0 ? 0.0 : kEvaluationResidual * (1.0 - game.gamma()) / (2.0 * game.gamma());
    for (;;) {
      ValueTable next(w.size());
      for (int s = 0; s < ns; ++s) {
        JointAction a = others[s];
        double best = -INFINITY;
        for (Action b = 0; b < game.action_count(i); ++b) {
          a[i] = b;
          best = std::max(best, detail::q_value(game, w, s, a));
        }
        next[s] = best;
      }
      const double change = detail::sup_distance(next, w);
      w.swap(next);
      if (game.gamma() == 0.0 || change < threshold) break;
    }
    for (int s = 0; s < ns; ++s) {
      if (w[s] > v[s] + kEquilibriumTolerance) return false;
    }
  }
  return true;
}

}  // namespace adgmarl
