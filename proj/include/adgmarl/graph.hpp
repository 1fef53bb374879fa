#pragma once

// Coordination graphs (undirected, over agents) and action dependency graphs
// (DAGs with an explicit decision order), plus the neighbourhood algebra used
// to relate the two.
//
// Agents are 0-based here. File formats and the CLI use 1-based labels and
// convert at the boundary.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "adgmarl/error.hpp"

namespace adgmarl {

using Agent = int;

/// Sorted, duplicate-free list of agents.
using AgentSet = std::vector<Agent>;

namespace detail {

inline AgentSet normalized(AgentSet s) {
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

inline bool contains(const AgentSet& s, Agent a) {
  return std::binary_search(s.begin(), s.end(), a);
}

inline AgentSet set_union(const AgentSet& a, const AgentSet& b) {
  AgentSet out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline AgentSet set_difference(const AgentSet& a, const AgentSet& b) {
  AgentSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline bool includes(const AgentSet& super, const AgentSet& sub) {
  return std::includes(super.begin(), super.end(), sub.begin(), sub.end());
}

inline void check_agent(int n, Agent a) {
  if (a < 0 || a >= n) {
    throw ValidationError("agent " + std::to_string(a + 1) + " out of range 1.." +
                          std::to_string(n));
  }
}

}  // namespace detail

/// Undirected edge, stored with first < second.
struct Edge {
  Agent first;
  Agent second;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Directed edge `from -> to`: agent `to` reads the action of agent `from`.
struct DirectedEdge {
  Agent from;
  Agent to;
  friend auto operator<=>(const DirectedEdge&, const DirectedEdge&) = default;
};

class CoordinationGraph {
 public:
  CoordinationGraph() = default;

  /// Throws ValidationError on self-loops, duplicate edges (in either
  /// orientation) or out-of-range endpoints.
  CoordinationGraph(int n, std::span<const Edge> edges) : n_(n), adjacency_(static_cast<std::size_t>(n)) {
    if (n < 1) throw ValidationError("coordination graph needs at least one agent");
    edges_.reserve(edges.size());
    for (const auto& e : edges) {
      detail::check_agent(n, e.first);
      detail::check_agent(n, e.second);
      if (e.first == e.second) {
        throw ValidationError("self-loop on agent " + std::to_string(e.first + 1));
      }
      edges_.push_back({std::min(e.first, e.second), std::max(e.first, e.second)});
    }
    std::sort(edges_.begin(), edges_.end());
    if (auto dup = std::adjacent_find(edges_.begin(), edges_.end()); dup != edges_.end()) {
      throw ValidationError("duplicate edge (" + std::to_string(dup->first + 1) + "," +
                            std::to_string(dup->second + 1) + ")");
    }
    for (const auto& e : edges_) {
      adjacency_[e.first].push_back(e.second);
      adjacency_[e.second].push_back(e.first);
    }
    for (auto& adj : adjacency_) std::sort(adj.begin(), adj.end());
  }

  CoordinationGraph(int n, std::initializer_list<Edge> edges)
      : CoordinationGraph(n, std::span<const Edge>(edges.begin(), edges.size())) {}

  int size() const { return n_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const AgentSet& neighbors(Agent i) const { return adjacency_.at(static_cast<std::size_t>(i)); }
  bool adjacent(Agent i, Agent j) const { return detail::contains(neighbors(i), j); }

  friend bool operator==(const CoordinationGraph& a, const CoordinationGraph& b) {
    return a.n_ == b.n_ && a.edges_ == b.edges_;
  }

 private:
  int n_ = 0;
  std::vector<Edge> edges_;
  std::vector<AgentSet> adjacency_;
};

/// N_c(S): agents adjacent to some member of `s`, excluding `s` itself.
inline AgentSet neighbors_of_set(const CoordinationGraph& g, std::span<const Agent> s) {
  AgentSet members(s.begin(), s.end());
  for (Agent a : members) detail::check_agent(g.size(), a);
  members = detail::normalized(std::move(members));
  AgentSet out;
  for (Agent a : members) {
    for (Agent b : g.neighbors(a)) out.push_back(b);
  }
  return detail::set_difference(detail::normalized(std::move(out)), members);
}

inline AgentSet neighbors_of_set(const CoordinationGraph& g, std::initializer_list<Agent> s) {
  return neighbors_of_set(g, std::span<const Agent>(s.begin(), s.size()));
}

/// Raw, unvalidated description of an action dependency graph.
struct AdgSpec {
  int n = 0;
  std::vector<DirectedEdge> edges;
  std::vector<Agent> order;
};

enum class AdgStatus {
  ok,
  empty_graph,
  agent_out_of_range,
  self_loop,
  duplicate_edge,
  cycle,
  order_not_permutation,
  order_inconsistent,
};

inline const char* to_string(AdgStatus s) {
  switch (s) {
    case AdgStatus::ok: return "ok";
    case AdgStatus::empty_graph: return "graph has no agents";
    case AdgStatus::agent_out_of_range: return "agent out of range";
    case AdgStatus::self_loop: return "self-loop";
    case AdgStatus::duplicate_edge: return "duplicate edge";
    case AdgStatus::cycle: return "cycle detected";
    case AdgStatus::order_not_permutation: return "decision order is not a permutation";
    case AdgStatus::order_inconsistent: return "decision order inconsistent with edges";
  }
  return "unknown";
}

/// Kahn's algorithm, smallest ready agent first. Empty optional on a cycle.
/// Edges must already be in range.
inline std::optional<std::vector<Agent>> topological_order(int n, std::span<const DirectedEdge> edges) {
  std::vector<std::vector<Agent>> out(static_cast<std::size_t>(n));
  std::vector<int> indegree(static_cast<std::size_t>(n), 0);
  for (const auto& e : edges) {
    out[e.from].push_back(e.to);
    ++indegree[e.to];
  }
  std::priority_queue<Agent, std::vector<Agent>, std::greater<>> ready;
  for (Agent a = 0; a < n; ++a) {
    if (indegree[a] == 0) ready.push(a);
  }
  std::vector<Agent> order;
  order.reserve(static_cast<std::size_t>(n));
  while (!ready.empty()) {
    Agent a = ready.top();
    ready.pop();
    order.push_back(a);
    for (Agent b : out[a]) {
      if (--indegree[b] == 0) ready.push(b);
    }
  }
  if (static_cast<int>(order.size()) != n) return std::nullopt;
  return order;
}

inline AdgStatus validate_adg(const AdgSpec& spec) {
  const int n = spec.n;
  if (n < 1) return AdgStatus::empty_graph;
  for (const auto& e : spec.edges) {
    if (e.from < 0 || e.from >= n || e.to < 0 || e.to >= n) return AdgStatus::agent_out_of_range;
    if (e.from == e.to) return AdgStatus::self_loop;
  }
  auto sorted = spec.edges;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    return AdgStatus::duplicate_edge;
  }
  if (!topological_order(n, sorted)) return AdgStatus::cycle;

  if (static_cast<int>(spec.order.size()) != n) return AdgStatus::order_not_permutation;
  std::vector<int> position(static_cast<std::size_t>(n), -1);
  for (int k = 0; k < n; ++k) {
    Agent a = spec.order[k];
    if (a < 0 || a >= n || position[a] != -1) return AdgStatus::order_not_permutation;
    position[a] = k;
  }
  for (const auto& e : spec.edges) {
    if (position[e.from] >= position[e.to]) return AdgStatus::order_inconsistent;
  }
  return AdgStatus::ok;
}

class ActionDependencyGraph {
 public:
  ActionDependencyGraph() = default;

  /// Throws ValidationError unless validate_adg(spec) is ok.
  explicit ActionDependencyGraph(AdgSpec spec) {
    if (auto status = validate_adg(spec); status != AdgStatus::ok) {
      throw ValidationError(std::string("invalid action dependency graph: ") + to_string(status));
    }
    n_ = spec.n;
    edges_ = std::move(spec.edges);
    std::sort(edges_.begin(), edges_.end());
    order_ = std::move(spec.order);
    position_.assign(static_cast<std::size_t>(n_), 0);
    for (int k = 0; k < n_; ++k) position_[order_[k]] = k;
    in_.assign(static_cast<std::size_t>(n_), {});
    for (const auto& e : edges_) in_[e.to].push_back(e.from);
    for (auto& s : in_) std::sort(s.begin(), s.end());
  }

  /// Edges with the smallest-label topological order.
  static ActionDependencyGraph with_default_order(int n, std::vector<DirectedEdge> edges) {
    AdgSpec spec{n, std::move(edges), {}};
    if (n >= 1) {
      bool in_range = std::all_of(spec.edges.begin(), spec.edges.end(), [n](const DirectedEdge& e) {
        return e.from >= 0 && e.from < n && e.to >= 0 && e.to < n;
      });
      if (in_range) {
        if (auto order = topological_order(n, spec.edges)) spec.order = std::move(*order);
      }
    }
    return ActionDependencyGraph(std::move(spec));
  }

  int size() const { return n_; }
  const std::vector<DirectedEdge>& edges() const { return edges_; }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<Agent>& order() const { return order_; }
  int position(Agent a) const { return position_.at(static_cast<std::size_t>(a)); }

  /// N_d(i), ascending labels.
  const AgentSet& in_neighbors(Agent i) const { return in_.at(static_cast<std::size_t>(i)); }

  /// N_d[i] = N_d(i) ∪ {i}.
  AgentSet closed_in_neighbors(Agent i) const {
    return detail::set_union(in_neighbors(i), AgentSet{i});
  }

  /// Agents at decision positions [k, n).
  AgentSet suffix(int k) const { return detail::normalized(AgentSet(order_.begin() + k, order_.end())); }

  /// Agents at decision positions [0, k).
  AgentSet prefix(int k) const { return detail::normalized(AgentSet(order_.begin(), order_.begin() + k)); }

  AdgSpec spec() const { return {n_, edges_, order_}; }

  friend bool operator==(const ActionDependencyGraph& a, const ActionDependencyGraph& b) {
    return a.n_ == b.n_ && a.edges_ == b.edges_ && a.order_ == b.order_;
  }

 private:
  int n_ = 0;
  std::vector<DirectedEdge> edges_;
  std::vector<Agent> order_;
  std::vector<int> position_;
  std::vector<AgentSet> in_;
};

/// N_d(S) = (∪_{i∈S} N_d(i)) \ S.
inline AgentSet in_neighbors_of_set(const ActionDependencyGraph& g, std::span<const Agent> s) {
  AgentSet members = detail::normalized(AgentSet(s.begin(), s.end()));
  AgentSet out;
  for (Agent a : members) {
    detail::check_agent(g.size(), a);
    for (Agent b : g.in_neighbors(a)) out.push_back(b);
  }
  return detail::set_difference(detail::normalized(std::move(out)), members);
}

namespace detail {

inline void check_same_size(const CoordinationGraph& gc, const ActionDependencyGraph& gd) {
  if (gc.size() != gd.size()) {
    throw ValidationError("coordination graph has " + std::to_string(gc.size()) +
                          " agents but dependency graph has " + std::to_string(gd.size()));
  }
}

inline void check_position(const ActionDependencyGraph& gd, int k) {
  if (k < 0 || k >= gd.size()) {
    throw ValidationError("position " + std::to_string(k) + " out of range");
  }
}

/// E_c[a, b]: coordination edges with one endpoint in `a` and the other in `b`.
inline std::vector<Edge> cross_edges(const CoordinationGraph& gc, const AgentSet& a, const AgentSet& b) {
  std::vector<Edge> out;
  for (const auto& e : gc.edges()) {
    bool forward = contains(a, e.first) && contains(b, e.second);
    bool backward = contains(a, e.second) && contains(b, e.first);
    if (forward || backward) out.push_back(e);
  }
  return out;
}

}  // namespace detail

/// In-neighbourhoods equal the coordination neighbourhood of every decision
/// suffix: N_d(σ(k)) = N_c({σ(k), ..., σ(n-1)}) for all positions k. This is the
/// structural condition under which locally optimal action-dependent policies
/// are globally optimal.
inline bool check_condition(const CoordinationGraph& gc, const ActionDependencyGraph& gd) {
  detail::check_same_size(gc, gd);
  for (int k = 0; k < gd.size(); ++k) {
    AgentSet suffix = gd.suffix(k);
    if (gd.in_neighbors(gd.order()[k]) != neighbors_of_set(gc, suffix)) return false;
  }
  return true;
}

/// Relaxed form: N_d(σ(k)) ⊇ N_c(suffix at k).
inline bool check_condition_superset(const CoordinationGraph& gc, const ActionDependencyGraph& gd) {
  detail::check_same_size(gc, gd);
  for (int k = 0; k < gd.size(); ++k) {
    AgentSet suffix = gd.suffix(k);
    if (!detail::includes(gd.in_neighbors(gd.order()[k]), neighbors_of_set(gc, suffix))) return false;
  }
  return true;
}

/// Cross edges between the suffix at position k and the prefix before k are
/// exactly the cross edges between that suffix and N_d(σ(k)).
inline bool edge_partition_identity(const CoordinationGraph& gc, const ActionDependencyGraph& gd, int k) {
  detail::check_same_size(gc, gd);
  detail::check_position(gd, k);
  AgentSet suffix = gd.suffix(k);
  return detail::cross_edges(gc, suffix, gd.prefix(k)) ==
         detail::cross_edges(gc, suffix, gd.in_neighbors(gd.order()[k]));
}

/// N_d[σ(k)] ⊇ N_d({σ(k+1), ..., σ(n-1)}).
inline bool nested_neighborhood_identity(const CoordinationGraph& gc, const ActionDependencyGraph& gd, int k) {
  detail::check_same_size(gc, gd);
  detail::check_position(gd, k);
  AgentSet later = gd.suffix(k + 1);
  return detail::includes(gd.closed_in_neighbors(gd.order()[k]), in_neighbors_of_set(gd, later));
}

}  // namespace adgmarl
