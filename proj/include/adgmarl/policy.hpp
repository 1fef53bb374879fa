#pragma once

// Deterministic action-dependent policies: agent i maps (state, actions of its
// in-neighbours) to an action. Agents act in the ADG's decision order, each
// reading the actions already emitted by its in-neighbours.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "adgmarl/error.hpp"
#include "adgmarl/game.hpp"
#include "adgmarl/graph.hpp"

namespace adgmarl {

/// Actions fixed for a subset of agents; std::nullopt means "let the policy act".
using PartialJointAction = std::vector<std::optional<Action>>;

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) { return splitmix64(h ^ splitmix64(v)); }

}  // namespace detail

class ActionDependentPolicy {
 public:
  using Table = std::vector<Action>;

  ActionDependentPolicy() = default;

  /// `tables[i]` is indexed by entry_index(i, s, neighbour actions).
  ActionDependentPolicy(ActionDependencyGraph adg, std::vector<int> action_counts, int state_count,
                        std::vector<Table> tables)
      : adg_(std::move(adg)),
        action_counts_(std::move(action_counts)),
        state_count_(state_count),
        tables_(std::move(tables)) {
    const int n = adg_.size();
    if (static_cast<int>(action_counts_.size()) != n) {
      throw ValidationError("policy action counts do not match the dependency graph size");
    }
    if (state_count_ < 1) throw ValidationError("policy needs at least one state");
    for (int c : action_counts_) {
      if (c < 1) throw ValidationError("every agent needs at least one action");
    }
    strides_.resize(static_cast<std::size_t>(n));
    combos_.resize(static_cast<std::size_t>(n));
    for (Agent i = 0; i < n; ++i) {
      const auto& nb = adg_.in_neighbors(i);
      auto& strides = strides_[i];
      strides.assign(nb.size(), 1);
      std::size_t combos = 1;
      for (int m = static_cast<int>(nb.size()) - 1; m >= 0; --m) {
        strides[m] = combos;
        combos *= static_cast<std::size_t>(action_counts_[nb[m]]);
      }
      combos_[i] = combos;
    }
    if (static_cast<int>(tables_.size()) != n) {
      throw ValidationError("policy has " + std::to_string(tables_.size()) + " tables, expected " +
                            std::to_string(n));
    }
    for (Agent i = 0; i < n; ++i) {
      if (tables_[i].size() != entry_count(i)) {
        throw ValidationError("policy table of agent " + std::to_string(i + 1) + " has " +
                              std::to_string(tables_[i].size()) + " entries, expected " +
                              std::to_string(entry_count(i)));
      }
      for (Action a : tables_[i]) {
        if (a < 0 || a >= action_counts_[i]) {
          throw ValidationError("policy of agent " + std::to_string(i + 1) + " emits out-of-range action " +
                                std::to_string(a));
        }
      }
    }
  }

  /// Fills every table entry from `rule(agent, state, neighbour actions)`.
  static ActionDependentPolicy from_rule(
      ActionDependencyGraph adg, std::vector<int> action_counts, int state_count,
      const std::function<Action(Agent, int, std::span<const Action>)>& rule) {
    ActionDependentPolicy shape(adg, action_counts, state_count, blank_tables(adg, action_counts, state_count));
    for (Agent i = 0; i < shape.agent_count(); ++i) {
      for (std::size_t e = 0; e < shape.entry_count(i); ++e) {
        auto [s, nb] = shape.decode_entry(i, e);
        shape.tables_[i][e] = rule(i, s, nb);
      }
    }
    return ActionDependentPolicy(std::move(adg), std::move(action_counts), state_count, std::move(shape.tables_));
  }

  /// Every entry of agent i emits actions[i].
  static ActionDependentPolicy constant(ActionDependencyGraph adg, std::vector<int> action_counts,
                                        int state_count, std::span<const Action> actions) {
    return from_rule(std::move(adg), std::move(action_counts), state_count,
                     [&](Agent i, int, std::span<const Action>) { return actions[i]; });
  }

  /// Independent policy (empty ADG) acting `actions[s]` in state s.
  static ActionDependentPolicy independent(std::vector<int> action_counts, std::span<const JointAction> actions) {
    const int n = static_cast<int>(action_counts.size());
    std::vector<Agent> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[i] = i;
    return from_rule(ActionDependencyGraph(AdgSpec{n, {}, order}), std::move(action_counts),
                     static_cast<int>(actions.size()),
                     [&](Agent i, int s, std::span<const Action>) { return actions[s][i]; });
  }

  const ActionDependencyGraph& adg() const { return adg_; }
  int agent_count() const { return adg_.size(); }
  int state_count() const { return state_count_; }
  const std::vector<int>& action_counts() const { return action_counts_; }

  /// Number of in-neighbour action tuples of agent i.
  std::size_t neighbor_combos(Agent i) const { return combos_[i]; }
  std::size_t entry_count(Agent i) const { return combos_[i] * static_cast<std::size_t>(state_count_); }

  std::size_t entry_index(Agent i, int s, std::span<const Action> neighbor_actions) const {
    const auto& strides = strides_[i];
    std::size_t idx = static_cast<std::size_t>(s) * combos_[i];
    for (std::size_t m = 0; m < strides.size(); ++m) idx += static_cast<std::size_t>(neighbor_actions[m]) * strides[m];
    return idx;
  }

  /// Entry index of agent i reading its in-neighbours' actions from a full
  /// joint action.
  std::size_t entry_index_in(Agent i, int s, std::span<const Action> joint) const {
    const auto& nb = adg_.in_neighbors(i);
    const auto& strides = strides_[i];
    std::size_t idx = static_cast<std::size_t>(s) * combos_[i];
    for (std::size_t m = 0; m < nb.size(); ++m) idx += static_cast<std::size_t>(joint[nb[m]]) * strides[m];
    return idx;
  }

  std::pair<int, std::vector<Action>> decode_entry(Agent i, std::size_t entry) const {
    const auto& nb = adg_.in_neighbors(i);
    int s = static_cast<int>(entry / combos_[i]);
    std::size_t rest = entry % combos_[i];
    std::vector<Action> actions(nb.size());
    for (std::size_t m = 0; m < nb.size(); ++m) {
      actions[m] = static_cast<Action>(rest / strides_[i][m]);
      rest %= strides_[i][m];
    }
    return {s, std::move(actions)};
  }

  Action action(Agent i, int s, std::span<const Action> neighbor_actions) const {
    if (neighbor_actions.size() != adg_.in_neighbors(i).size()) {
      throw ValidationError("agent " + std::to_string(i + 1) + " reads " +
                            std::to_string(adg_.in_neighbors(i).size()) + " neighbour actions");
    }
    return tables_[i][entry_index(i, s, neighbor_actions)];
  }

  const Table& table(Agent i) const { return tables_[i]; }
  const std::vector<Table>& tables() const { return tables_; }

  void set_entry(Agent i, std::size_t entry, Action a) {
    if (a < 0 || a >= action_counts_[i]) throw ValidationError("action out of range");
    tables_[i][entry] = a;
  }

  std::uint64_t hash() const {
    std::uint64_t h = 0x6a09e667f3bcc909ULL;
    for (const auto& t : tables_) {
      h = detail::hash_combine(h, t.size());
      for (Action a : t) h = detail::hash_combine(h, static_cast<std::uint64_t>(a));
    }
    return h;
  }

  friend bool operator==(const ActionDependentPolicy& a, const ActionDependentPolicy& b) {
    return a.adg_ == b.adg_ && a.action_counts_ == b.action_counts_ && a.state_count_ == b.state_count_ &&
           a.tables_ == b.tables_;
  }

 private:
  static std::vector<Table> blank_tables(const ActionDependencyGraph& adg, const std::vector<int>& counts,
                                         int states) {
    std::vector<Table> tables(static_cast<std::size_t>(adg.size()));
    for (Agent i = 0; i < adg.size(); ++i) {
      std::size_t combos = 1;
      for (Agent j : adg.in_neighbors(i)) combos *= static_cast<std::size_t>(counts.at(static_cast<std::size_t>(j)));
      tables[i].assign(combos * static_cast<std::size_t>(std::max(states, 0)), 0);
    }
    return tables;
  }

  ActionDependencyGraph adg_;
  std::vector<int> action_counts_;
  int state_count_ = 1;
  std::vector<Table> tables_;
  std::vector<std::vector<std::size_t>> strides_;
  std::vector<std::size_t> combos_;
};

/// Table entries drawn uniformly from each agent's action set. Each entry is
/// keyed by (seed, agent, state, neighbour tuple), so the draw does not depend
/// on iteration order.
inline ActionDependentPolicy random_policy(const ActionDependencyGraph& adg, const std::vector<int>& action_counts,
                                           int state_count, std::uint64_t seed) {
  ActionDependentPolicy policy = ActionDependentPolicy::constant(
      adg, action_counts, state_count, std::vector<Action>(static_cast<std::size_t>(adg.size()), 0));
  for (Agent i = 0; i < adg.size(); ++i) {
    const std::size_t combos = policy.neighbor_combos(i);
    for (std::size_t e = 0; e < policy.entry_count(i); ++e) {
      std::uint64_t h = detail::hash_combine(seed, static_cast<std::uint64_t>(i));
      h = detail::hash_combine(h, e / combos);
      h = detail::hash_combine(h, e % combos);
      // Top 53 bits as a uniform double in [0, 1).
      const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
      policy.set_entry(i, e, static_cast<Action>(u * action_counts[i]));
    }
  }
  return policy;
}

/// Joint action produced in state s: agents act in decision order, each
/// looking up its table with the actions its in-neighbours already emitted.
inline JointAction rollout(const ActionDependentPolicy& policy, int s) {
  if (s < 0 || s >= policy.state_count()) throw ValidationError("state out of range");
  JointAction a(static_cast<std::size_t>(policy.agent_count()), 0);
  for (Agent i : policy.adg().order()) a[i] = policy.table(i)[policy.entry_index_in(i, s, a)];
  return a;
}

/// Counterfactual rollout: agents with a fixed action emit it and bypass their
/// policy; all others act on what has been emitted so far, in decision order.
inline JointAction complete_with_overrides(const ActionDependentPolicy& policy, int s,
                                           const PartialJointAction& fixed) {
  const int n = policy.agent_count();
  if (s < 0 || s >= policy.state_count()) throw ValidationError("state out of range");
  if (static_cast<int>(fixed.size()) != n) {
    throw ValidationError("override vector has " + std::to_string(fixed.size()) + " entries, expected " +
                          std::to_string(n));
  }
  for (Agent i = 0; i < n; ++i) {
    if (fixed[i] && (*fixed[i] < 0 || *fixed[i] >= policy.action_counts()[i])) {
      throw ValidationError("override action " + std::to_string(*fixed[i]) + " for agent " +
                            std::to_string(i + 1) + " out of range");
    }
  }
  JointAction a(static_cast<std::size_t>(n), 0);
  for (Agent i : policy.adg().order()) {
    a[i] = fixed[i] ? *fixed[i] : policy.table(i)[policy.entry_index_in(i, s, a)];
  }
  return a;
}

}  // namespace adgmarl
