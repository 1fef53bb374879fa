#pragma once

// Built-in coordination polymatrix games.
//
// fig2_line: three agents on a line, two actions each. Coordinating on 0 pays
// 1.0 per edge, coordinating on 1 pays 0.6 per edge, miscoordination pays 0.
// (1,1,1) is a suboptimal Nash point worth 1.2; (0,0,0) is optimal at 2.0.
//
// star5, ring5, tree7, mesh9: five actions per agent. Rows of each payoff
// matrix index the lower-labelled agent of the edge. Edges without an explicit
// matrix use the baseline (1.0 on the diagonal, 0.1 elsewhere).

#include <array>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "adgmarl/error.hpp"
#include "adgmarl/game.hpp"
#include "adgmarl/graph.hpp"

namespace adgmarl {

namespace detail {

using Payoff5 = std::array<std::array<double, 5>, 5>;

inline Payoff5 baseline_payoff() {
  Payoff5 m{};
  for (int r = 0; r < 5; ++r) {
    for (int c = 0; c < 5; ++c) m[r][c] = r == c ? 1.0 : 0.1;
  }
  return m;
}

inline Payoff5 with_entries(Payoff5 m, std::initializer_list<std::pair<std::pair<int, int>, double>> entries) {
  for (const auto& [cell, value] : entries) m[cell.first][cell.second] = value;
  return m;
}

inline std::vector<double> flatten(const Payoff5& m) {
  std::vector<double> out;
  out.reserve(25);
  for (const auto& row : m) out.insert(out.end(), row.begin(), row.end());
  return out;
}

/// Polymatrix game with five actions per agent. `edges` use 1-based labels.
inline MarkovGame five_action_game(int n, const std::vector<std::pair<std::pair<int, int>, Payoff5>>& edges) {
  std::vector<Edge> cg_edges;
  for (const auto& [e, payoff] : edges) cg_edges.push_back({e.first - 1, e.second - 1});
  CoordinationGraph cg(n, cg_edges);
  MarkovGame::EdgeTables rewards(cg.edges().size());
  for (const auto& [e, payoff] : edges) {
    const Edge key{e.first - 1, e.second - 1};
    const auto pos = std::lower_bound(cg.edges().begin(), cg.edges().end(), key) - cg.edges().begin();
    rewards[static_cast<std::size_t>(pos)] = flatten(payoff);
  }
  return MarkovGame(std::move(cg), std::vector<int>(static_cast<std::size_t>(n), 5), 1, 0.0, std::move(rewards));
}

inline MarkovGame fig2_line() {
  CoordinationGraph cg(3, {{0, 1}, {1, 2}});
  const std::vector<double> payoff{1.0, 0.0, 0.0, 0.6};
  return MarkovGame(std::move(cg), {2, 2, 2}, 1, 0.0, {payoff, payoff});
}

inline MarkovGame star5() {
  // Rows: agent 1 (the centre). Diagonal 3.5, 3.5, 3.5, 3.25, 3.0; 0.5 elsewhere.
  Payoff5 base{};
  for (int r = 0; r < 5; ++r) {
    for (int c = 0; c < 5; ++c) base[r][c] = 0.5;
  }
  base[0][0] = base[1][1] = base[2][2] = 3.5;
  base[3][3] = 3.25;
  base[4][4] = 3.0;
  return five_action_game(5, {
                                 {{1, 2}, with_entries(base, {{{0, 1}, 5.0}, {{1, 2}, 6.0}})},
                                 {{1, 3}, with_entries(base, {{{0, 2}, 5.0}, {{1, 2}, 6.0}})},
                                 {{1, 4}, with_entries(base, {{{0, 3}, 5.0}, {{1, 2}, 6.0}})},
                                 {{1, 5}, with_entries(base, {{{0, 4}, 5.0}, {{1, 1}, 0.5}})},
                             });
}

inline MarkovGame ring5() {
  const Payoff5 base = baseline_payoff();
  return five_action_game(5, {
                                 {{1, 2}, base},
                                 {{2, 3}, with_entries(base, {{{1, 2}, 2.0}})},
                                 {{3, 4}, base},
                                 {{4, 5}, with_entries(base, {{{1, 2}, 2.0}})},
                                 {{1, 5}, with_entries(base, {{{1, 1}, 10.0}})},
                             });
}

inline MarkovGame tree7() {
  // Binary tree rooted at 1: 1-{2,3}, 2-{4,5}, 3-{6,7}.
  const Payoff5 base = baseline_payoff();
  const Payoff5 leaf = with_entries(base, {{{1, 1}, 0.5}, {{2, 2}, 1.5}});
  return five_action_game(7, {
                                 {{1, 2}, base},
                                 {{1, 3}, with_entries(base, {{{1, 1}, 2.0}, {{1, 2}, 1.5}})},
                                 {{2, 4}, base},
                                 {{2, 5}, base},
                                 {{3, 6}, leaf},
                                 {{3, 7}, leaf},
                             });
}

inline MarkovGame mesh9() {
  // 3x3 grid, row-major labels 1..9.
  const Payoff5 base = baseline_payoff();
  return five_action_game(9, {
                                 {{1, 2}, base},
                                 {{2, 3}, base},
                                 {{4, 5}, base},
                                 {{5, 6}, with_entries(base, {{{1, 2}, 2.0}})},
                                 {{7, 8}, base},
                                 {{8, 9}, base},
                                 {{1, 4}, base},
                                 {{2, 5}, base},
                                 {{3, 6}, base},
                                 {{4, 7}, base},
                                 {{5, 8}, base},
                                 {{6, 9}, with_entries(base, {{{1, 1}, 10.0}})},
                             });
}

}  // namespace detail

inline const std::vector<std::string>& builtin_instance_names() {
  static const std::vector<std::string> names{"fig2_line", "star5", "ring5", "tree7", "mesh9"};
  return names;
}

inline MarkovGame builtin_instance(std::string_view name) {
  if (name == "fig2_line") return detail::fig2_line();
  if (name == "star5") return detail::star5();
  if (name == "ring5") return detail::ring5();
  if (name == "tree7") return detail::tree7();
  if (name == "mesh9") return detail::mesh9();
  throw ValidationError("unknown built-in game '" + std::string(name) + "'");
}

}  // namespace adgmarl
