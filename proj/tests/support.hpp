#pragma once

// Random instance generators and naive reference implementations used as
// oracles. The references index the raw tables directly and never call the
// library's Q, evaluation or scoring code.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

#include "adgmarl/adgmarl.hpp"

namespace testing_support {

using namespace adgmarl;
using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo = 0.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

inline CoordinationGraph random_cg(Rng& rng, int n, double p, bool at_least_one_edge = false) {
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (uniform(rng) < p) edges.push_back({i, j});
    }
  }
  if (at_least_one_edge && edges.empty() && n >= 2) {
    const int i = uniform_int(rng, 0, n - 2);
    edges.push_back({i, uniform_int(rng, i + 1, n - 1)});
  }
  return CoordinationGraph(n, edges);
}

inline CoordinationGraph complete_cg(int n) {
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) edges.push_back({i, j});
  }
  return CoordinationGraph(n, edges);
}

inline CoordinationGraph ring_cg(int n) {
  std::vector<Edge> edges;
  for (int i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1});
  edges.push_back({0, n - 1});
  return CoordinationGraph(n, edges);
}

inline std::vector<Agent> random_order(Rng& rng, int n) {
  std::vector<Agent> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

/// Random ADG: random order, each forward pair kept with probability p.
inline ActionDependencyGraph random_adg(Rng& rng, int n, double p) {
  const auto order = random_order(rng, n);
  std::vector<DirectedEdge> edges;
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      if (uniform(rng) < p) edges.push_back({order[a], order[b]});
    }
  }
  return ActionDependencyGraph(AdgSpec{n, edges, order});
}

struct GameShape {
  int n = 3;
  int actions = 2;
  int states = 1;
  double gamma = 0.0;
  double edge_probability = 0.6;
  bool transitions = false;
  /// Adds per-agent terms that cancel between edges sharing the agent, so
  /// individual local transition entries can leave [0, 1].
  bool cancelling_noise = false;
};

/// Decomposable game: the aggregate kernel is a weighted mixture of random
/// per-edge kernels, P = sum_e w_e K_e with the weights summing to one.
inline MarkovGame random_game(Rng& rng, const GameShape& shape) {
  const bool transitions = shape.transitions || shape.states > 1;
  CoordinationGraph cg = random_cg(rng, shape.n, shape.edge_probability, transitions);
  const auto& edges = cg.edges();
  const std::size_t ne = edges.size();
  const int A = shape.actions, S = shape.states;
  const std::size_t pair_cells = static_cast<std::size_t>(S) * A * A;

  MarkovGame::EdgeTables rewards(ne, std::vector<double>(pair_cells));
  for (auto& t : rewards) {
    for (double& x : t) x = uniform(rng, -1.0, 1.0);
  }
  std::optional<MarkovGame::EdgeTables> kernels;
  if (transitions) {
    std::vector<double> w(ne);
    for (double& x : w) x = uniform(rng, 0.2, 1.0);
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    for (double& x : w) x /= total;
    kernels.emplace(ne, std::vector<double>(pair_cells * S));
    for (std::size_t e = 0; e < ne; ++e) {
      auto& k = (*kernels)[e];
      for (std::size_t cell = 0; cell < pair_cells; ++cell) {
        double row = 0.0;
        for (int t = 0; t < S; ++t) row += (k[cell * S + t] = uniform(rng, 0.01, 1.0));
        for (int t = 0; t < S; ++t) k[cell * S + t] *= w[e] / row;
      }
    }
    if (shape.cancelling_noise) {
      // For each agent with two incident edges, move c(s'|s,a_i) from one to the other.
      for (Agent i = 0; i < shape.n; ++i) {
        std::vector<std::size_t> incident;
        for (std::size_t e = 0; e < ne; ++e) {
          if (edges[e].first == i || edges[e].second == i) incident.push_back(e);
        }
        if (incident.size() < 2) continue;
        const std::size_t e1 = incident[0], e2 = incident[1];
        for (int s = 0; s < S; ++s) {
          for (int ai = 0; ai < A; ++ai) {
            for (int t = 0; t < S; ++t) {
              const double c = uniform(rng, -2.0, 2.0);
              for (int b = 0; b < A; ++b) {
                auto cell = [&](std::size_t e) {
                  const bool first = edges[e].first == i;
                  const int x = first ? ai : b, y = first ? b : ai;
                  return ((static_cast<std::size_t>(s) * A + x) * A + y) * S + t;
                };
                (*kernels)[e1][cell(e1)] += c;
                (*kernels)[e2][cell(e2)] -= c;
              }
            }
          }
        }
      }
    }
  }
  return MarkovGame(std::move(cg), std::vector<int>(static_cast<std::size_t>(shape.n), A), S, shape.gamma,
                    std::move(rewards), std::move(kernels));
}

inline std::vector<double> random_values(Rng& rng, int states) {
  std::vector<double> v(static_cast<std::size_t>(states));
  for (double& x : v) x = uniform(rng, -5.0, 5.0);
  return v;
}

// ---------------------------------------------------------------------------
// Reference implementations.

/// All joint actions, agent 0 most significant.
inline std::vector<JointAction> all_joint_actions(const std::vector<int>& counts) {
  std::vector<JointAction> out;
  JointAction a(counts.size(), 0);
  for (;;) {
    out.push_back(a);
    int i = static_cast<int>(counts.size()) - 1;
    while (i >= 0 && ++a[i] == counts[i]) a[i--] = 0;
    if (i < 0) return out;
  }
}

inline double ref_reward(const MarkovGame& g, int s, const JointAction& a) {
  double r = 0.0;
  const auto& edges = g.cg().edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const int Ai = g.action_counts()[edges[e].first], Aj = g.action_counts()[edges[e].second];
    r += g.reward_tables()[e][(static_cast<std::size_t>(s) * Ai + a[edges[e].first]) * Aj + a[edges[e].second]];
  }
  return r;
}

inline std::vector<double> ref_kernel(const MarkovGame& g, int s, const JointAction& a) {
  const int S = g.state_count();
  std::vector<double> p(static_cast<std::size_t>(S), 0.0);
  if (!g.has_transitions()) {
    p[static_cast<std::size_t>(s)] = 1.0;
    return p;
  }
  const auto& edges = g.cg().edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const int Ai = g.action_counts()[edges[e].first], Aj = g.action_counts()[edges[e].second];
    const std::size_t base =
        ((static_cast<std::size_t>(s) * Ai + a[edges[e].first]) * Aj + a[edges[e].second]) * S;
    for (int t = 0; t < S; ++t) p[t] += (*g.transition_tables())[e][base + t];
  }
  return p;
}

inline double ref_q(const MarkovGame& g, const std::vector<double>& v, int s, const JointAction& a) {
  const auto p = ref_kernel(g, s, a);
  double q = ref_reward(g, s, a);
  for (std::size_t t = 0; t < p.size(); ++t) q += g.gamma() * p[t] * v[t];
  return q;
}

/// Dense Q table [s][joint index] by explicit enumeration.
inline std::vector<std::vector<double>> ref_q_table(const MarkovGame& g, const std::vector<double>& v) {
  const auto joints = all_joint_actions(g.action_counts());
  std::vector<std::vector<double>> q(static_cast<std::size_t>(g.state_count()));
  for (int s = 0; s < g.state_count(); ++s) {
    for (const auto& a : joints) q[s].push_back(ref_q(g, v, s, a));
  }
  return q;
}

/// Rollout computed straight from the table layout.
inline JointAction ref_rollout(const ActionDependentPolicy& pi, int s, const PartialJointAction& fixed) {
  JointAction a(static_cast<std::size_t>(pi.agent_count()), 0);
  for (Agent i : pi.adg().order()) {
    if (fixed[i]) {
      a[i] = *fixed[i];
      continue;
    }
    std::size_t idx = 0;
    for (Agent j : pi.adg().in_neighbors(i)) idx = idx * pi.action_counts()[j] + a[j];
    a[i] = pi.table(i)[static_cast<std::size_t>(s) * pi.neighbor_combos(i) + idx];
  }
  return a;
}

/// V^pi by fixed-point iteration to machine precision.
inline std::vector<double> ref_evaluate(const MarkovGame& g, const ActionDependentPolicy& pi) {
  const int S = g.state_count();
  const PartialJointAction none(static_cast<std::size_t>(g.agent_count()));
  std::vector<double> v(static_cast<std::size_t>(S), 0.0);
  for (int it = 0; it < 100000; ++it) {
    std::vector<double> next(v.size());
    double change = 0.0;
    for (int s = 0; s < S; ++s) {
      next[s] = ref_q(g, v, s, ref_rollout(pi, s, none));
      change = std::max(change, std::abs(next[s] - v[s]));
    }
    v.swap(next);
    if (g.gamma() == 0.0 || change < 1e-14) break;
  }
  return v;
}

/// V* by value iteration over the enumerated joint action space.
inline std::vector<double> ref_optimal(const MarkovGame& g) {
  const auto joints = all_joint_actions(g.action_counts());
  std::vector<double> v(static_cast<std::size_t>(g.state_count()), 0.0);
  for (int it = 0; it < 100000; ++it) {
    std::vector<double> next(v.size(), -INFINITY);
    double change = 0.0;
    for (int s = 0; s < g.state_count(); ++s) {
      for (const auto& a : joints) next[s] = std::max(next[s], ref_q(g, v, s, a));
      change = std::max(change, std::abs(next[s] - v[s]));
    }
    v.swap(next);
    if (g.gamma() == 0.0 || change < 1e-14) break;
  }
  return v;
}

/// One sweep of the update rule written directly from its definition: full
/// global Q of the counterfactual completion for every candidate action.
inline ActionDependentPolicy ref_sweep(const MarkovGame& g, const ActionDependentPolicy& pi, std::size_t& changes) {
  const auto v = ref_evaluate(g, pi);
  auto tables = pi.tables();
  changes = 0;
  for (Agent i : pi.adg().order()) {
    // Mixed policy: agents already visited hold their new tables.
    const ActionDependentPolicy mixed(pi.adg(), pi.action_counts(), pi.state_count(), tables);
    const auto& nb = pi.adg().in_neighbors(i);
    for (std::size_t entry = 0; entry < pi.entry_count(i); ++entry) {
      const int s = static_cast<int>(entry / pi.neighbor_combos(i));
      std::size_t rest = entry % pi.neighbor_combos(i);
      PartialJointAction fixed(static_cast<std::size_t>(g.agent_count()));
      for (int m = static_cast<int>(nb.size()) - 1; m >= 0; --m) {
        const int count = pi.action_counts()[nb[m]];
        fixed[nb[m]] = static_cast<Action>(rest % count);
        rest /= count;
      }
      std::vector<double> scores;
      for (Action b = 0; b < g.action_count(i); ++b) {
        fixed[i] = b;
        scores.push_back(ref_q(g, v, s, ref_rollout(mixed, s, fixed)));
      }
      const Action incumbent = pi.table(i)[entry];
      const double best = *std::max_element(scores.begin(), scores.end());
      auto better = [](double c, double inc) { return c > inc + 1e-10 * std::max(1.0, std::abs(inc)); };
      Action chosen = incumbent;
      if (better(best, scores[incumbent])) {
        for (Action b = 0; b < g.action_count(i); ++b) {
          if (!better(best, scores[b])) {
            chosen = b;
            break;
          }
        }
      }
      if (chosen != incumbent) ++changes;
      tables[i][entry] = chosen;
    }
  }
  return ActionDependentPolicy(pi.adg(), pi.action_counts(), pi.state_count(), tables);
}

/// Every deterministic independent policy of a game.
inline std::vector<ActionDependentPolicy> all_independent_policies(const MarkovGame& g) {
  const auto joints = all_joint_actions(g.action_counts());
  std::vector<int> pick(static_cast<std::size_t>(g.state_count()), static_cast<int>(joints.size()));
  std::vector<ActionDependentPolicy> out;
  for (const auto& choice : all_joint_actions(pick)) {
    std::vector<JointAction> per_state;
    for (int c : choice) per_state.push_back(joints[c]);
    out.push_back(ActionDependentPolicy::independent(g.action_counts(), per_state));
  }
  return out;
}

inline double sup_gap(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

/// Fig. 2 line-game policies.
inline ActionDependentPolicy fig2_chain_policy() {
  // pi1 = 1, pi2(a1) = a1, pi3(a2) = a2.
  auto adg = ActionDependencyGraph(AdgSpec{3, {{0, 1}, {1, 2}}, {0, 1, 2}});
  return ActionDependentPolicy::from_rule(adg, {2, 2, 2}, 1, [](Agent i, int, std::span<const Action> nb) {
    return i == 0 ? Action{1} : nb[0];
  });
}

inline ActionDependentPolicy fig2_collider_policy() {
  // Order (1,3,2); pi1 = 1, pi3 = 1, pi2(a1, a3) = 1 iff a1 = a3 = 1.
  auto adg = ActionDependencyGraph(AdgSpec{3, {{0, 1}, {2, 1}}, {0, 2, 1}});
  return ActionDependentPolicy::from_rule(adg, {2, 2, 2}, 1, [](Agent i, int, std::span<const Action> nb) {
    if (i != 1) return Action{1};
    return Action{nb[0] == 1 && nb[1] == 1 ? 1 : 0};
  });
}

inline ActionDependentPolicy fig2_independent(JointAction a) {
  const std::vector<JointAction> per_state{std::move(a)};
  return ActionDependentPolicy::independent({2, 2, 2}, per_state);
}

}  // namespace testing_support
