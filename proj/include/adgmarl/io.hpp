#pragma once

// JSON documents for games, dependency graphs and policies. Agents are 1-based
// in every document; states and actions are 0-based.
//
// Game document:
//   {"n_agents": 3, "actions": [2, 2, 2], "states": 1, "gamma": 0.0,
//    "cg_edges": [[1, 2], [2, 3]],
//    "rewards": {"1-2": [[[1.0, 0.0], [0.0, 0.6]]], ...},       // [s][a_i][a_j]
//    "transitions": {"1-2": [[[[...next-state masses...]]]]}}    // optional, [s][a_i][a_j][s']
//
// Dependency graph document:
//   {"n_agents": 3, "order": [1, 2, 3], "edges": [[1, 2], [2, 3]]}
// where [j, i] means agent i reads agent j. "order" may be omitted.
//
// Policy document:
//   {"n_agents": 3, "states": 1, "actions": [2, 2, 2], "adg": {...},
//    "agents": [{"agent": 2, "neighbors": [1], "entries": [[s, [a_1], a_2], ...]}, ...]}

#include <nlohmann/json.hpp>

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "adgmarl/error.hpp"
#include "adgmarl/game.hpp"
#include "adgmarl/graph.hpp"
#include "adgmarl/instances.hpp"
#include "adgmarl/policy.hpp"

namespace adgmarl {

using Json = nlohmann::json;

namespace detail {

inline void reject_unknown_keys(const Json& doc, std::initializer_list<std::string_view> allowed,
                                std::string_view what) {
  if (!doc.is_object()) throw ValidationError(std::string(what) + " must be a JSON object");
  for (const auto& item : doc.items()) {
    bool known = false;
    for (auto key : allowed) known = known || item.key() == key;
    if (!known) throw ValidationError("unknown key '" + item.key() + "' in " + std::string(what));
  }
}

inline const Json& require(const Json& doc, const char* key, std::string_view what) {
  auto it = doc.find(key);
  if (it == doc.end()) throw ValidationError(std::string(what) + " is missing '" + key + "'");
  return *it;
}

inline int get_int(const Json& v, std::string_view what) {
  if (!v.is_number_integer()) throw ValidationError(std::string(what) + " must be an integer");
  return v.get<int>();
}

inline double get_real(const Json& v, std::string_view what) {
  if (!v.is_number()) throw ValidationError(std::string(what) + " must be a number");
  return v.get<double>();
}

inline const Json& get_array(const Json& v, std::size_t size, std::string_view what) {
  if (!v.is_array()) throw ValidationError(std::string(what) + " must be an array");
  if (size != SIZE_MAX && v.size() != size) {
    throw ValidationError(std::string(what) + " has " + std::to_string(v.size()) + " entries, expected " +
                          std::to_string(size));
  }
  return v;
}

inline Json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ValidationError("parse error in '" + path + "': " + e.what());
  }
}

inline std::string edge_key(const Edge& e) {
  return std::to_string(e.first + 1) + "-" + std::to_string(e.second + 1);
}

/// Appends the nested array `v` (of the given shape) to `out` in row-major order.
inline void flatten_into(const Json& v, std::span<const std::size_t> shape, std::vector<double>& out,
                         const std::string& what) {
  get_array(v, shape[0], what);
  if (shape.size() == 1) {
    for (const auto& x : v) out.push_back(get_real(x, what));
    return;
  }
  for (const auto& sub : v) flatten_into(sub, shape.subspan(1), out, what);
}

inline Json nest(std::span<const double> flat, std::span<const std::size_t> shape) {
  Json out = Json::array();
  if (shape.size() == 1) {
    for (std::size_t i = 0; i < shape[0]; ++i) out.push_back(flat[i]);
    return out;
  }
  std::size_t block = 1;
  for (std::size_t d = 1; d < shape.size(); ++d) block *= shape[d];
  for (std::size_t i = 0; i < shape[0]; ++i) out.push_back(nest(flat.subspan(i * block, block), shape.subspan(1)));
  return out;
}

}  // namespace detail

inline Json game_to_json(const MarkovGame& game) {
  Json doc;
  doc["n_agents"] = game.agent_count();
  doc["actions"] = game.action_counts();
  doc["states"] = game.state_count();
  doc["gamma"] = game.gamma();
  Json edges = Json::array();
  for (const auto& e : game.cg().edges()) edges.push_back({e.first + 1, e.second + 1});
  doc["cg_edges"] = edges;
  const auto ns = static_cast<std::size_t>(game.state_count());
  Json rewards = Json::object();
  Json transitions = Json::object();
  for (std::size_t k = 0; k < game.cg().edges().size(); ++k) {
    const auto& e = game.cg().edges()[k];
    const std::size_t ni = static_cast<std::size_t>(game.action_count(e.first));
    const std::size_t nj = static_cast<std::size_t>(game.action_count(e.second));
    const std::vector<std::size_t> shape{ns, ni, nj};
    rewards[detail::edge_key(e)] = detail::nest(game.reward_tables()[k], shape);
    if (game.has_transitions()) {
      const std::vector<std::size_t> tshape{ns, ni, nj, ns};
      transitions[detail::edge_key(e)] = detail::nest((*game.transition_tables())[k], tshape);
    }
  }
  doc["rewards"] = rewards;
  if (game.has_transitions()) doc["transitions"] = transitions;
  return doc;
}

inline MarkovGame game_from_json(const Json& doc, std::uint64_t cap = kDefaultEnumerationCap) {
  constexpr std::string_view what = "game document";
  detail::reject_unknown_keys(doc, {"n_agents", "actions", "states", "gamma", "cg_edges", "rewards", "transitions"},
                              what);
  const int n = detail::get_int(detail::require(doc, "n_agents", what), "n_agents");
  if (n < 1) throw ValidationError("n_agents must be positive");
  std::vector<int> actions;
  for (const auto& a : detail::get_array(detail::require(doc, "actions", what), static_cast<std::size_t>(n), "actions")) {
    actions.push_back(detail::get_int(a, "actions entry"));
    if (actions.back() < 1) throw ValidationError("every agent needs at least one action");
  }
  const int states = detail::get_int(detail::require(doc, "states", what), "states");
  if (states < 1) throw ValidationError("states must be positive");
  const double gamma = detail::get_real(detail::require(doc, "gamma", what), "gamma");

  std::vector<Edge> edges;
  for (const auto& e : detail::get_array(detail::require(doc, "cg_edges", what), SIZE_MAX, "cg_edges")) {
    detail::get_array(e, 2, "cg_edges entry");
    const int i = detail::get_int(e[0], "cg_edges endpoint");
    const int j = detail::get_int(e[1], "cg_edges endpoint");
    if (i >= j) {
      throw ValidationError("cg_edges entry [" + std::to_string(i) + ", " + std::to_string(j) +
                            "] must satisfy i < j");
    }
    edges.push_back({i - 1, j - 1});
  }
  CoordinationGraph cg(n, edges);

  auto read_tables = [&](const Json& tables, bool with_next, const char* name) {
    if (!tables.is_object()) throw ValidationError(std::string(name) + " must be an object keyed by \"i-j\"");
    std::set<std::string> expected;
    for (const auto& e : cg.edges()) expected.insert(detail::edge_key(e));
    for (const auto& item : tables.items()) {
      if (!expected.contains(item.key())) {
        throw ValidationError(std::string(name) + " has a table for '" + item.key() +
                              "', which is not a coordination edge");
      }
    }
    MarkovGame::EdgeTables out;
    for (const auto& e : cg.edges()) {
      const std::string key = detail::edge_key(e);
      auto it = tables.find(key);
      if (it == tables.end()) throw ValidationError(std::string(name) + " is missing the table for edge " + key);
      std::vector<std::size_t> shape{static_cast<std::size_t>(states), static_cast<std::size_t>(actions[e.first]),
                                     static_cast<std::size_t>(actions[e.second])};
      if (with_next) shape.push_back(static_cast<std::size_t>(states));
      std::vector<double> flat;
      detail::flatten_into(*it, shape, flat, std::string(name) + " table " + key);
      out.push_back(std::move(flat));
    }
    return out;
  };

  auto rewards = read_tables(detail::require(doc, "rewards", what), false, "rewards");
  std::optional<MarkovGame::EdgeTables> transitions;
  if (auto it = doc.find("transitions"); it != doc.end()) transitions = read_tables(*it, true, "transitions");
  return MarkovGame(std::move(cg), std::move(actions), states, gamma, std::move(rewards), std::move(transitions), cap);
}

inline MarkovGame load_game(const std::string& path, std::uint64_t cap = kDefaultEnumerationCap) {
  return game_from_json(detail::parse_file(path), cap);
}

/// Built-in instance name or path to a game document.
inline MarkovGame resolve_game(const std::string& name_or_path, std::uint64_t cap = kDefaultEnumerationCap) {
  for (const auto& name : builtin_instance_names()) {
    if (name == name_or_path) return builtin_instance(name);
  }
  if (!std::ifstream(name_or_path)) {
    throw ValidationError("'" + name_or_path + "' is neither a built-in game nor a readable file");
  }
  return load_game(name_or_path, cap);
}

inline Json adg_to_json(const ActionDependencyGraph& adg) {
  Json doc;
  doc["n_agents"] = adg.size();
  Json order = Json::array();
  for (Agent a : adg.order()) order.push_back(a + 1);
  doc["order"] = order;
  Json edges = Json::array();
  for (const auto& e : adg.edges()) edges.push_back({e.from + 1, e.to + 1});
  doc["edges"] = edges;
  return doc;
}

/// Accepts a bare dependency-graph document or one wrapped as {"adg": {...}}
/// alongside report fields.
inline ActionDependencyGraph adg_from_json(const Json& doc) {
  if (doc.is_object() && doc.contains("adg")) {
    detail::reject_unknown_keys(doc, {"adg", "method", "edge_count", "condition", "condition_exact"}, "dependency graph report");
    return adg_from_json(doc["adg"]);
  }
  constexpr std::string_view what = "dependency graph document";
  detail::reject_unknown_keys(doc, {"n_agents", "order", "edges"}, what);
  const int n = detail::get_int(detail::require(doc, "n_agents", what), "n_agents");
  std::vector<DirectedEdge> edges;
  for (const auto& e : detail::get_array(detail::require(doc, "edges", what), SIZE_MAX, "edges")) {
    detail::get_array(e, 2, "edges entry");
    edges.push_back({detail::get_int(e[0], "edge endpoint") - 1, detail::get_int(e[1], "edge endpoint") - 1});
  }
  if (auto it = doc.find("order"); it != doc.end()) {
    std::vector<Agent> order;
    for (const auto& a : detail::get_array(*it, SIZE_MAX, "order")) order.push_back(detail::get_int(a, "order entry") - 1);
    return ActionDependencyGraph(AdgSpec{n, std::move(edges), std::move(order)});
  }
  return ActionDependencyGraph::with_default_order(n, std::move(edges));
}

inline ActionDependencyGraph load_adg(const std::string& path) { return adg_from_json(detail::parse_file(path)); }

inline Json policy_to_json(const ActionDependentPolicy& policy) {
  Json doc;
  doc["n_agents"] = policy.agent_count();
  doc["states"] = policy.state_count();
  doc["actions"] = policy.action_counts();
  doc["adg"] = adg_to_json(policy.adg());
  Json agents = Json::array();
  for (Agent i = 0; i < policy.agent_count(); ++i) {
    Json agent;
    agent["agent"] = i + 1;
    Json neighbors = Json::array();
    for (Agent j : policy.adg().in_neighbors(i)) neighbors.push_back(j + 1);
    agent["neighbors"] = neighbors;
    Json entries = Json::array();
    for (std::size_t e = 0; e < policy.entry_count(i); ++e) {
      auto [s, nb] = policy.decode_entry(i, e);
      entries.push_back({s, nb, policy.table(i)[e]});
    }
    agent["entries"] = entries;
    agents.push_back(agent);
  }
  doc["agents"] = agents;
  return doc;
}

inline ActionDependentPolicy policy_from_json(const Json& doc) {
  constexpr std::string_view what = "policy document";
  detail::reject_unknown_keys(doc, {"n_agents", "states", "actions", "adg", "agents"}, what);
  const int n = detail::get_int(detail::require(doc, "n_agents", what), "n_agents");
  const int states = detail::get_int(detail::require(doc, "states", what), "states");
  std::vector<int> actions;
  for (const auto& a : detail::get_array(detail::require(doc, "actions", what), static_cast<std::size_t>(n), "actions")) {
    actions.push_back(detail::get_int(a, "actions entry"));
  }
  ActionDependencyGraph adg = adg_from_json(detail::require(doc, "adg", what));
  if (adg.size() != n) throw ValidationError("policy dependency graph size does not match n_agents");
  ActionDependentPolicy policy = ActionDependentPolicy::constant(adg, actions, states, std::vector<Action>(static_cast<std::size_t>(n), 0));

  const Json& agents = detail::get_array(detail::require(doc, "agents", what), static_cast<std::size_t>(n), "agents");
  std::vector<bool> seen_agent(static_cast<std::size_t>(n), false);
  for (const auto& agent_doc : agents) {
    detail::reject_unknown_keys(agent_doc, {"agent", "neighbors", "entries"}, "policy agent");
    const Agent i = detail::get_int(detail::require(agent_doc, "agent", "policy agent"), "agent") - 1;
    detail::check_agent(n, i);
    if (seen_agent[i]) throw ValidationError("policy lists agent " + std::to_string(i + 1) + " twice");
    seen_agent[i] = true;
    AgentSet neighbors;
    for (const auto& j : detail::get_array(detail::require(agent_doc, "neighbors", "policy agent"), SIZE_MAX, "neighbors")) {
      neighbors.push_back(detail::get_int(j, "neighbor") - 1);
    }
    if (neighbors != adg.in_neighbors(i)) {
      throw ValidationError("neighbors of agent " + std::to_string(i + 1) + " disagree with the dependency graph");
    }
    const Json& entries = detail::get_array(detail::require(agent_doc, "entries", "policy agent"),
                                            policy.entry_count(i), "entries of agent " + std::to_string(i + 1));
    std::vector<bool> filled(policy.entry_count(i), false);
    for (const auto& entry : entries) {
      detail::get_array(entry, 3, "policy entry");
      const int s = detail::get_int(entry[0], "policy entry state");
      if (s < 0 || s >= states) throw ValidationError("policy entry state out of range");
      std::vector<Action> nb;
      for (const auto& a : detail::get_array(entry[1], neighbors.size(), "policy entry neighbour actions")) {
        nb.push_back(detail::get_int(a, "neighbour action"));
      }
      for (std::size_t m = 0; m < nb.size(); ++m) {
        if (nb[m] < 0 || nb[m] >= actions[neighbors[m]]) throw ValidationError("neighbour action out of range");
      }
      const std::size_t idx = policy.entry_index(i, s, nb);
      if (filled[idx]) throw ValidationError("policy entry repeated for agent " + std::to_string(i + 1));
      filled[idx] = true;
      policy.set_entry(i, idx, detail::get_int(entry[2], "policy entry action"));
    }
  }
  return policy;
}

inline ActionDependentPolicy load_policy(const std::string& path) { return policy_from_json(detail::parse_file(path)); }

}  // namespace adgmarl
