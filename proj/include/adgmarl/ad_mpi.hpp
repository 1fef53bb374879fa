#pragma once

// Action-dependent multi-agent policy iteration.
//
// Each sweep evaluates the current joint policy π^k exactly, then revisits the
// agents in decision order. Agent i rewrites every table entry (s, a_{N_d(i)})
// with an action maximising Q^{π^k} at the counterfactual joint action obtained
// by fixing a_{N_d(i)} and a_i and letting everyone else act: agents before i
// with their already-updated tables, agents after i with their old ones.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "adgmarl/dp.hpp"
#include "adgmarl/error.hpp"
#include "adgmarl/game.hpp"
#include "adgmarl/graph.hpp"
#include "adgmarl/policy.hpp"

namespace adgmarl {

/// Two candidate values closer than this (relative to max(1, |value|)) are
/// treated as tied.
inline constexpr double kImprovementTolerance = 1e-10;

enum class AdMpiStatus { converged, cycle_detected, max_sweeps };

inline const char* to_string(AdMpiStatus s) {
  switch (s) {
    case AdMpiStatus::converged: return "converged";
    case AdMpiStatus::cycle_detected: return "cycle_detected";
    case AdMpiStatus::max_sweeps: return "max_sweeps";
  }
  return "unknown";
}

/// Evaluation of one visited policy π^k.
struct SweepRecord {
  ValueTable values;
  std::uint64_t policy_hash = 0;
  std::vector<JointAction> joint_actions;  // rollout per state
  /// Entries rewritten by the improvement step that followed. Empty for the
  /// last policy of a run that stopped without converging.
  std::optional<std::size_t> changes;
};

struct AdMpiTrace {
  std::vector<SweepRecord> records;
  AdMpiStatus status = AdMpiStatus::max_sweeps;
  std::optional<std::uint64_t> seed;

  const ValueTable& final_values() const { return records.back().values; }

  /// Improvement sweeps performed, including a final sweep that changed nothing.
  std::size_t sweeps() const {
    return static_cast<std::size_t>(
        std::count_if(records.begin(), records.end(), [](const SweepRecord& r) { return r.changes.has_value(); }));
  }

  /// V^{π^{k+1}} ≥ V^{π^k} - slack at every state for every k.
  bool monotone(double slack = 1e-10) const {
    for (std::size_t k = 1; k < records.size(); ++k) {
      for (std::size_t s = 0; s < records[k].values.size(); ++s) {
        if (records[k].values[s] < records[k - 1].values[s] - slack) return false;
      }
    }
    return true;
  }
};

struct AdMpiResult {
  ActionDependentPolicy policy;
  AdMpiTrace trace;
};

namespace detail {

inline bool strictly_better(double candidate, double incumbent) {
  return candidate > incumbent + kImprovementTolerance * std::max(1.0, std::abs(incumbent));
}

/// Per-edge Q tables whose sum equals Q^V up to a per-state constant, which
/// does not affect any comparison between joint actions in the same state.
inline MarkovGame::EdgeTables comparison_q_tables(const MarkovGame& game, std::span<const double> v) {
  if (game.gamma() == 0.0 || !game.has_transitions()) return game.reward_tables();
  return local_q_tables(game, v);
}

/// Scores every action of one agent at a table entry, using a counterfactual
/// rollout of `policy` with the entry's neighbour actions and the candidate
/// fixed. Scores only include coordination edges that touch the agent or a
/// later agent in the decision order: the remaining edges involve only
/// actions that are identical across candidates.
class EntryScorer {
 public:
  EntryScorer(const MarkovGame& game, const MarkovGame::EdgeTables& q, const ActionDependentPolicy& policy,
              Agent agent)
      : game_(game), q_(q), policy_(policy), agent_(agent), work_(static_cast<std::size_t>(game.agent_count()), 0) {
    const auto& adg = policy.adg();
    const auto& order = adg.order();
    const int k = adg.position(agent);
    neighbors_ = adg.in_neighbors(agent);
    for (int p = 0; p < k; ++p) {
      if (!contains(neighbors_, order[p])) free_prefix_.push_back(order[p]);
    }
    suffix_.assign(order.begin() + k + 1, order.end());
    std::vector<bool> late(static_cast<std::size_t>(game.agent_count()), false);
    for (int p = k; p < adg.size(); ++p) late[order[p]] = true;
    const auto& edges = game.cg().edges();
    for (std::size_t e = 0; e < edges.size(); ++e) {
      if (late[edges[e].first] || late[edges[e].second]) edges_.push_back(e);
    }
    strides_.assign(neighbors_.size(), 1);
    std::size_t combos = 1;
    for (int m = static_cast<int>(neighbors_.size()) - 1; m >= 0; --m) {
      strides_[m] = combos;
      combos *= static_cast<std::size_t>(game.action_count(neighbors_[m]));
    }
  }

  /// Fills `scores[a]` for every action a of the agent at table entry `entry`.
  void score(std::size_t entry, std::span<double> scores) {
    const std::size_t combos = policy_.neighbor_combos(agent_);
    const int s = static_cast<int>(entry / combos);
    std::size_t rest = entry % combos;
    for (std::size_t m = 0; m < neighbors_.size(); ++m) {
      work_[neighbors_[m]] = static_cast<Action>(rest / strides_[m]);
      rest %= strides_[m];
    }
    for (Agent j : free_prefix_) work_[j] = policy_.table(j)[policy_.entry_index_in(j, s, work_)];
    const auto& edges = game_.cg().edges();
    for (Action a = 0; a < game_.action_count(agent_); ++a) {
      work_[agent_] = a;
      for (Agent j : suffix_) work_[j] = policy_.table(j)[policy_.entry_index_in(j, s, work_)];
      double total = 0.0;
      for (std::size_t e : edges_) {
        total += q_[e][game_.reward_index(e, s, work_[edges[e].first], work_[edges[e].second])];
      }
      scores[a] = total;
    }
  }

 private:
  const MarkovGame& game_;
  const MarkovGame::EdgeTables& q_;
  const ActionDependentPolicy& policy_;
  Agent agent_;
  AgentSet neighbors_;
  std::vector<Agent> free_prefix_;
  std::vector<Agent> suffix_;
  std::vector<std::size_t> edges_;
  std::vector<std::size_t> strides_;
  JointAction work_;
};

/// Incumbent if it attains the maximum, else the smallest maximiser.
inline Action choose_action(std::span<const double> scores, Action incumbent) {
  double best = scores[0];
  for (double v : scores) best = std::max(best, v);
  if (!strictly_better(best, scores[incumbent])) return incumbent;
  for (std::size_t a = 0; a < scores.size(); ++a) {
    if (!strictly_better(best, scores[a])) return static_cast<Action>(a);
  }
  return incumbent;
}

inline SweepRecord evaluate_record(const MarkovGame& game, const ActionDependentPolicy& policy) {
  SweepRecord record;
  record.values = policy_evaluation(game, policy);
  record.policy_hash = policy.hash();
  for (int s = 0; s < game.state_count(); ++s) record.joint_actions.push_back(rollout(policy, s));
  return record;
}

}  // namespace detail

/// Runs policy iteration from `init` on the ADG that `init` carries. Stops
/// when a sweep changes no entry (converged), when a policy repeats
/// (cycle_detected) or after `max_sweeps` improvement sweeps.
inline AdMpiResult ad_mpi(const MarkovGame& game, ActionDependentPolicy init, int max_sweeps) {
  detail::check_policy_shape(game, init);
  if (max_sweeps < 1) throw ValidationError("max_sweeps must be at least 1");

  AdMpiResult result{std::move(init), {}};
  ActionDependentPolicy& policy = result.policy;
  AdMpiTrace& trace = result.trace;
  std::unordered_set<std::uint64_t> seen;
  std::vector<double> scores;

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    SweepRecord record = detail::evaluate_record(game, policy);
    seen.insert(record.policy_hash);
    const auto q = detail::comparison_q_tables(game, record.values);

    // Updated in place: agents before i already hold π^{k+1}, agents after i
    // still hold π^k, and agent i's own table is never read while scoring it.
    ActionDependentPolicy next = policy;
    std::size_t changes = 0;
    for (Agent i : policy.adg().order()) {
      detail::EntryScorer scorer(game, q, next, i);
      scores.assign(static_cast<std::size_t>(game.action_count(i)), 0.0);
      for (std::size_t entry = 0; entry < next.entry_count(i); ++entry) {
        scorer.score(entry, scores);
        const Action incumbent = policy.table(i)[entry];
        const Action chosen = detail::choose_action(scores, incumbent);
        if (chosen != incumbent) {
          next.set_entry(i, entry, chosen);
          ++changes;
        }
      }
    }
    record.changes = changes;
    trace.records.push_back(std::move(record));
    if (changes == 0) {
      trace.status = AdMpiStatus::converged;
      return result;
    }
    policy = std::move(next);
    if (seen.contains(policy.hash())) {
      trace.status = AdMpiStatus::cycle_detected;
      trace.records.push_back(detail::evaluate_record(game, policy));
      return result;
    }
  }
  trace.status = AdMpiStatus::max_sweeps;
  trace.records.push_back(detail::evaluate_record(game, policy));
  return result;
}

}  // namespace adgmarl
