#pragma once

// Tabular Markov games whose reward and transition kernels decompose over the
// edges of a coordination graph:
//
//   r(s, a)     = Σ_{(i,j)∈E_c} r_ij(s, a_i, a_j)
//   P(s'|s, a)  = Σ_{(i,j)∈E_c} P_ij(s'|s, a_i, a_j)
//
// Individual P_ij terms may be arbitrary reals; only their sum must be a
// probability distribution. A game without transition tables has a single
// state with an implicit self-loop. Polymatrix games are the γ = 0 case.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "adgmarl/error.hpp"
#include "adgmarl/graph.hpp"

namespace adgmarl {

using Action = int;
using JointAction = std::vector<Action>;

inline constexpr std::uint64_t kDefaultEnumerationCap = 10'000'000;
inline constexpr double kDistributionTolerance = 1e-9;
inline constexpr double kNegativeDust = 1e-12;

inline std::string format_joint_action(std::span<const Action> a) {
  std::string out = "(";
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(a[i]);
  }
  return out + ")";
}

/// Mixed-radix indexing of joint actions. Agent 0 is the most significant
/// digit, so increasing index order is lexicographic order.
class JointActionSpace {
 public:
  JointActionSpace() = default;
  explicit JointActionSpace(std::vector<int> action_counts) : counts_(std::move(action_counts)) {
    size_ = 1;
    for (int c : counts_) {
      if (size_ > std::numeric_limits<std::uint64_t>::max() / static_cast<std::uint64_t>(c)) {
        size_ = std::numeric_limits<std::uint64_t>::max();
        break;
      }
      size_ *= static_cast<std::uint64_t>(c);
    }
  }

  /// Saturates at UINT64_MAX.
  std::uint64_t size() const { return size_; }
  int agents() const { return static_cast<int>(counts_.size()); }

  void require_within(std::uint64_t cap) const {
    if (size_ > cap) {
      throw EnumerationCapError("joint action space has " +
                                (size_ == std::numeric_limits<std::uint64_t>::max()
                                     ? std::string("more than 2^64")
                                     : std::to_string(size_)) +
                                " elements, enumeration cap is " + std::to_string(cap));
    }
  }

  JointAction first() const { return JointAction(counts_.size(), 0); }

  /// Advances to the lexicographic successor; false after the last element.
  bool next(JointAction& a) const {
    for (int i = static_cast<int>(a.size()) - 1; i >= 0; --i) {
      if (++a[i] < counts_[i]) return true;
      a[i] = 0;
    }
    return false;
  }

 private:
  std::vector<int> counts_;
  std::uint64_t size_ = 1;
};

class MarkovGame {
 public:
  /// Per-edge tables in cg.edges() order. Reward tables have shape
  /// [state][a_first][a_second]; transition tables [state][a_first][a_second][next].
  using EdgeTables = std::vector<std::vector<double>>;

  MarkovGame() = default;

  /// Validates every invariant, including that the aggregate transition is a
  /// distribution at every (s, a). Throws ValidationError naming the failure.
  MarkovGame(CoordinationGraph cg, std::vector<int> action_counts, int state_count, double gamma,
             EdgeTables rewards, std::optional<EdgeTables> transitions = std::nullopt,
             std::uint64_t enumeration_cap = kDefaultEnumerationCap)
      : cg_(std::move(cg)),
        action_counts_(std::move(action_counts)),
        state_count_(state_count),
        gamma_(gamma),
        rewards_(std::move(rewards)),
        transitions_(std::move(transitions)) {
    validate(enumeration_cap);
    space_ = JointActionSpace(action_counts_);
  }

  int agent_count() const { return cg_.size(); }
  int state_count() const { return state_count_; }
  double gamma() const { return gamma_; }
  const CoordinationGraph& cg() const { return cg_; }
  const std::vector<int>& action_counts() const { return action_counts_; }
  int action_count(Agent i) const { return action_counts_.at(static_cast<std::size_t>(i)); }
  const JointActionSpace& joint_actions() const { return space_; }
  bool has_transitions() const { return transitions_.has_value(); }

  const EdgeTables& reward_tables() const { return rewards_; }
  const std::optional<EdgeTables>& transition_tables() const { return transitions_; }

  double edge_reward(std::size_t e, int s, Action ai, Action aj) const {
    return rewards_[e][reward_index(e, s, ai, aj)];
  }

  /// r_ij for the edge joining i and j, indexed as (a_i, a_j) regardless of
  /// label order.
  double pair_reward(Agent i, Agent j, int s, Action ai, Action aj) const {
    std::size_t e = edge_index(i, j);
    return i < j ? edge_reward(e, s, ai, aj) : edge_reward(e, s, aj, ai);
  }

  std::size_t edge_index(Agent i, Agent j) const {
    Edge key{std::min(i, j), std::max(i, j)};
    const auto& edges = cg_.edges();
    auto it = std::lower_bound(edges.begin(), edges.end(), key);
    if (it == edges.end() || *it != key) {
      throw ValidationError("no coordination edge (" + std::to_string(i + 1) + "," +
                            std::to_string(j + 1) + ")");
    }
    return static_cast<std::size_t>(it - edges.begin());
  }

  std::size_t reward_index(std::size_t e, int s, Action ai, Action aj) const {
    const auto& edge = cg_.edges()[e];
    const auto ni = static_cast<std::size_t>(action_counts_[edge.first]);
    const auto nj = static_cast<std::size_t>(action_counts_[edge.second]);
    return (static_cast<std::size_t>(s) * ni + static_cast<std::size_t>(ai)) * nj + static_cast<std::size_t>(aj);
  }

  void check_state(int s) const {
    if (s < 0 || s >= state_count_) {
      throw ValidationError("state " + std::to_string(s) + " out of range 0.." +
                            std::to_string(state_count_ - 1));
    }
  }

  void check_joint_action(std::span<const Action> a) const {
    if (static_cast<int>(a.size()) != agent_count()) {
      throw ValidationError("joint action has " + std::to_string(a.size()) + " entries, expected " +
                            std::to_string(agent_count()));
    }
    for (int i = 0; i < agent_count(); ++i) {
      if (a[i] < 0 || a[i] >= action_counts_[i]) {
        throw ValidationError("action " + std::to_string(a[i]) + " of agent " + std::to_string(i + 1) +
                              " out of range");
      }
    }
  }

  /// Σ_e r_e(s, a_i, a_j) without range checks.
  double reward_unchecked(int s, std::span<const Action> a) const {
    double total = 0.0;
    const auto& edges = cg_.edges();
    for (std::size_t e = 0; e < edges.size(); ++e) {
      total += rewards_[e][reward_index(e, s, a[edges[e].first], a[edges[e].second])];
    }
    return total;
  }

  /// Unnormalised Σ_e P_e(·|s, a_i, a_j). Requires transitions.
  std::vector<double> raw_transition(int s, std::span<const Action> a) const {
    std::vector<double> out(static_cast<std::size_t>(state_count_), 0.0);
    const auto& edges = cg_.edges();
    const auto ns = static_cast<std::size_t>(state_count_);
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const double* row = &(*transitions_)[e][reward_index(e, s, a[edges[e].first], a[edges[e].second]) * ns];
      for (std::size_t t = 0; t < ns; ++t) out[t] += row[t];
    }
    return out;
  }

  friend bool operator==(const MarkovGame& a, const MarkovGame& b) {
    return a.cg_ == b.cg_ && a.action_counts_ == b.action_counts_ && a.state_count_ == b.state_count_ &&
           a.gamma_ == b.gamma_ && a.rewards_ == b.rewards_ && a.transitions_ == b.transitions_;
  }

 private:
  void validate(std::uint64_t enumeration_cap) const {
    const int n = cg_.size();
    if (static_cast<int>(action_counts_.size()) != n) {
      throw ValidationError("expected " + std::to_string(n) + " action counts, got " +
                            std::to_string(action_counts_.size()));
    }
    for (int i = 0; i < n; ++i) {
      if (action_counts_[i] < 1) {
        throw ValidationError("agent " + std::to_string(i + 1) + " needs at least one action");
      }
    }
    if (state_count_ < 1) throw ValidationError("state count must be at least 1");
    if (!(gamma_ >= 0.0 && gamma_ < 1.0)) {
      throw ValidationError("discount must lie in [0, 1), got " + std::to_string(gamma_));
    }
    const auto& edges = cg_.edges();
    if (rewards_.size() != edges.size()) {
      throw ValidationError("expected " + std::to_string(edges.size()) + " reward tables, got " +
                            std::to_string(rewards_.size()));
    }
    const auto ns = static_cast<std::size_t>(state_count_);
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const std::size_t cells =
          ns * static_cast<std::size_t>(action_counts_[edges[e].first] * action_counts_[edges[e].second]);
      if (rewards_[e].size() != cells) {
        throw ValidationError("reward table for edge " + edge_label(e) + " has " +
                              std::to_string(rewards_[e].size()) + " entries, expected " +
                              std::to_string(cells));
      }
      for (double v : rewards_[e]) {
        if (!std::isfinite(v)) throw ValidationError("non-finite reward on edge " + edge_label(e));
      }
    }
    if (!transitions_) {
      if (state_count_ != 1) {
        throw ValidationError("games without transition tables must have exactly one state");
      }
      return;
    }
    if (edges.empty()) throw ValidationError("transition tables need at least one coordination edge");
    if (transitions_->size() != edges.size()) {
      throw ValidationError("expected " + std::to_string(edges.size()) + " transition tables, got " +
                            std::to_string(transitions_->size()));
    }
    for (std::size_t e = 0; e < edges.size(); ++e) {
      if ((*transitions_)[e].size() != rewards_[e].size() * ns) {
        throw ValidationError("transition table for edge " + edge_label(e) + " has wrong shape");
      }
      for (double v : (*transitions_)[e]) {
        if (!std::isfinite(v)) throw ValidationError("non-finite transition on edge " + edge_label(e));
      }
    }
    JointActionSpace space(action_counts_);
    if (space.size() > enumeration_cap / ns) {
      throw EnumerationCapError("cannot validate transitions: " + std::to_string(ns) +
                                " states times the joint action space exceeds the enumeration cap");
    }
    for (int s = 0; s < state_count_; ++s) {
      JointAction a = space.first();
      do {
        auto p = raw_transition(s, a);
        double sum = 0.0;
        for (std::size_t t = 0; t < ns; ++t) {
          if (p[t] < -kNegativeDust) {
            throw ValidationError("aggregate transition at state " + std::to_string(s) + ", joint action " +
                                  format_joint_action(a) + " has negative mass " + std::to_string(p[t]) +
                                  " on next state " + std::to_string(t));
          }
          sum += p[t];
        }
        if (std::abs(sum - 1.0) > kDistributionTolerance) {
          std::ostringstream msg;
          msg.precision(17);
          msg << "aggregate transition at state " << s << ", joint action " << format_joint_action(a)
              << " sums to " << sum;
          throw ValidationError(msg.str());
        }
      } while (space.next(a));
    }
  }

  std::string edge_label(std::size_t e) const {
    const auto& edge = cg_.edges()[e];
    return std::to_string(edge.first + 1) + "-" + std::to_string(edge.second + 1);
  }

  CoordinationGraph cg_;
  std::vector<int> action_counts_;
  int state_count_ = 1;
  double gamma_ = 0.0;
  EdgeTables rewards_;
  std::optional<EdgeTables> transitions_;
  JointActionSpace space_;
};

/// r(s, a) = Σ_{(i,j)∈E_c} r_ij(s, a_i, a_j).
inline double global_reward(const MarkovGame& game, int s, std::span<const Action> a) {
  game.check_state(s);
  game.check_joint_action(a);
  return game.reward_unchecked(s, a);
}

/// P(·|s, a) = Σ_e P_e(·|s, a_i, a_j), with negative dust clamped to zero and
/// renormalised when the sum is within tolerance of one.
inline std::vector<double> aggregate_transition(const MarkovGame& game, int s, std::span<const Action> a) {
  if (!game.has_transitions()) throw ValidationError("game has no transition tables");
  game.check_state(s);
  game.check_joint_action(a);
  auto p = game.raw_transition(s, a);
  double sum = 0.0;
  for (double& v : p) {
    if (v < -kNegativeDust) {
      throw ValidationError("aggregate transition at state " + std::to_string(s) + ", joint action " +
                            format_joint_action(a) + " is not a distribution");
    }
    v = std::clamp(v, 0.0, 1.0);
    sum += v;
  }
  if (std::abs(sum - 1.0) > kDistributionTolerance) {
    throw ValidationError("aggregate transition at state " + std::to_string(s) + ", joint action " +
                          format_joint_action(a) + " sums to " + std::to_string(sum));
  }
  for (double& v : p) v /= sum;
  return p;
}

/// Per-edge local action values Q_ij^V = r_ij + γ Σ_{s'} P_ij(s'|·) V(s'),
/// in the same layout as the reward tables. Their edge-sum is Q^V.
inline MarkovGame::EdgeTables local_q_tables(const MarkovGame& game, std::span<const double> v) {
  if (static_cast<int>(v.size()) != game.state_count()) {
    throw ValidationError("value table has " + std::to_string(v.size()) + " entries, expected " +
                          std::to_string(game.state_count()));
  }
  auto tables = game.reward_tables();
  if (game.gamma() == 0.0) return tables;
  if (!game.has_transitions()) {
    throw ValidationError("local Q tables with positive discount need transition tables");
  }
  const auto ns = static_cast<std::size_t>(game.state_count());
  const auto& transitions = *game.transition_tables();
  for (std::size_t e = 0; e < tables.size(); ++e) {
    for (std::size_t cell = 0; cell < tables[e].size(); ++cell) {
      double expected = 0.0;
      for (std::size_t t = 0; t < ns; ++t) expected += transitions[e][cell * ns + t] * v[t];
      tables[e][cell] += game.gamma() * expected;
    }
  }
  return tables;
}

}  // namespace adgmarl
