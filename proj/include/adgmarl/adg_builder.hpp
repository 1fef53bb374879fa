#pragma once

// Building action dependency graphs from a coordination graph.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "adgmarl/error.hpp"
#include "adgmarl/graph.hpp"

namespace adgmarl {

namespace detail {

inline void check_permutation(int n, std::span<const Agent> order) {
  if (static_cast<int>(order.size()) != n) {
    throw ValidationError("order has " + std::to_string(order.size()) + " entries, expected " +
                          std::to_string(n));
  }
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  for (Agent a : order) {
    check_agent(n, a);
    if (seen[a]) throw ValidationError("order repeats agent " + std::to_string(a + 1));
    seen[a] = true;
  }
}

inline std::vector<Agent> identity_order(int n) {
  std::vector<Agent> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  return order;
}

}  // namespace detail

/// The unique ADG with decision order `order` whose in-neighbourhoods equal
/// the coordination neighbourhood of each decision suffix.
inline ActionDependencyGraph adg_from_order(const CoordinationGraph& gc, std::vector<Agent> order) {
  const int n = gc.size();
  detail::check_permutation(n, order);
  std::vector<DirectedEdge> edges;
  for (int k = 0; k < n; ++k) {
    AgentSet suffix(order.begin() + k, order.end());
    for (Agent j : neighbors_of_set(gc, suffix)) edges.push_back({j, order[k]});
  }
  return ActionDependencyGraph(AdgSpec{n, std::move(edges), std::move(order)});
}

/// Elimination-style greedy ordering, built back to front: each step assigns
/// the last free position to the unplaced agent v minimising
/// |N_c(S ∪ {v})|, where S is the suffix placed so far. On ties the lower
/// label keeps the earlier position, so the highest tied label is placed now.
inline std::vector<Agent> greedy_order(const CoordinationGraph& gc) {
  const int n = gc.size();
  std::vector<Agent> order(static_cast<std::size_t>(n), -1);
  std::vector<bool> placed(static_cast<std::size_t>(n), false);
  AgentSet suffix;
  for (int step = 0; step < n; ++step) {
    Agent best = -1;
    std::size_t best_size = 0;
    for (Agent v = 0; v < n; ++v) {
      if (placed[v]) continue;
      AgentSet candidate = detail::set_union(suffix, AgentSet{v});
      std::size_t size = neighbors_of_set(gc, candidate).size();
      if (best == -1 || size <= best_size) {
        best = v;
        best_size = size;
      }
    }
    placed[best] = true;
    order[n - 1 - step] = best;
    suffix = detail::set_union(suffix, AgentSet{best});
  }
  return order;
}

inline ActionDependencyGraph greedy_adg(const CoordinationGraph& gc) {
  return adg_from_order(gc, greedy_order(gc));
}

inline constexpr int kMaxExhaustiveAgents = 10;

struct OrderedAdg {
  std::vector<Agent> order;
  ActionDependencyGraph adg;
};

/// Minimum-edge ADG over all n! decision orders. Ties resolve to the
/// lexicographically smallest order. Only for n ≤ kMaxExhaustiveAgents.
inline OrderedAdg min_adg_exhaustive(const CoordinationGraph& gc) {
  const int n = gc.size();
  if (n > kMaxExhaustiveAgents) {
    throw ValidationError("exhaustive ADG search supports at most " +
                          std::to_string(kMaxExhaustiveAgents) + " agents, got " + std::to_string(n));
  }
  std::vector<std::uint32_t> adjacency(static_cast<std::size_t>(n), 0);
  for (const auto& e : gc.edges()) {
    adjacency[e.first] |= 1u << e.second;
    adjacency[e.second] |= 1u << e.first;
  }

  std::vector<Agent> order = detail::identity_order(n);
  std::vector<Agent> best_order = order;
  int best_count = -1;
  do {
    std::uint32_t suffix = 0;
    std::uint32_t reach = 0;
    int count = 0;
    for (int k = n - 1; k >= 0; --k) {
      suffix |= 1u << order[k];
      reach |= adjacency[order[k]];
      count += std::popcount(reach & ~suffix);
    }
    if (best_count < 0 || count < best_count) {
      best_count = count;
      best_order = order;
    }
  } while (std::next_permutation(order.begin(), order.end()));

  return {best_order, adg_from_order(gc, best_order)};
}

/// Auto-regressive ADG: every agent reads all agents before it in `order`.
inline ActionDependencyGraph dense_adg(int n, std::vector<Agent> order) {
  detail::check_permutation(n, order);
  std::vector<DirectedEdge> edges;
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < k; ++j) edges.push_back({order[j], order[k]});
  }
  return ActionDependencyGraph(AdgSpec{n, std::move(edges), std::move(order)});
}

inline ActionDependencyGraph dense_adg(int n) { return dense_adg(n, detail::identity_order(n)); }

/// No dependencies: independent policies.
inline ActionDependencyGraph empty_adg(int n) {
  return ActionDependencyGraph(AdgSpec{n, {}, detail::identity_order(n)});
}

}  // namespace adgmarl
