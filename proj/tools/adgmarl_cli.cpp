// Command-line front end: build and check dependency graphs, compute the
// enumerated optimum, and run seeded policy-iteration experiments.
//
// Exit codes: 0 success, 1 validation error, 2 internal error.

#include <CLI11.hpp>

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "adgmarl/adgmarl.hpp"

namespace {

using namespace adgmarl;

std::uint64_t enumeration_cap_from_env() {
  const char* raw = std::getenv("ADGMARL_ENUM_CAP");
  if (raw == nullptr || *raw == '\0') return kDefaultEnumerationCap;
  std::uint64_t cap = 0;
  auto [ptr, ec] = std::from_chars(raw, raw + std::char_traits<char>::length(raw), cap);
  if (ec != std::errc() || *ptr != '\0' || cap == 0) {
    throw ValidationError(std::string("ADGMARL_ENUM_CAP must be a positive integer, got '") + raw + "'");
  }
  return cap;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

/// A method keyword or a path to a dependency-graph document.
ActionDependencyGraph adg_argument(const MarkovGame& game, const std::string& arg) {
  for (const char* method : {"greedy", "sparse_greedy", "exhaustive", "dense", "dense_full", "empty"}) {
    if (arg == method) return build_adg(game.cg(), parse_adg_method(arg));
  }
  ActionDependencyGraph adg = load_adg(arg);
  if (adg.size() != game.agent_count()) {
    throw ValidationError("dependency graph has " + std::to_string(adg.size()) + " agents, game has " +
                          std::to_string(game.agent_count()));
  }
  return adg;
}

int build_adg_command(const std::string& game_arg, const std::string& method, const std::string& out) {
  const auto game = resolve_game(game_arg, enumeration_cap_from_env());
  const auto report = build_adg_report(game, parse_adg_method(method));
  Json doc;
  doc["method"] = method;
  doc["edge_count"] = report.adg.edge_count();
  doc["condition"] = report.condition;
  doc["condition_exact"] = report.condition_exact;
  doc["adg"] = adg_to_json(report.adg);
  write_text(out, doc.dump(2) + "\n");
  return 0;
}

int check_command(const std::string& game_arg, const std::string& adg_path) {
  const auto game = resolve_game(game_arg, enumeration_cap_from_env());
  const auto adg = adg_argument(game, adg_path);
  Json doc;
  doc["valid"] = true;
  doc["edge_count"] = adg.edge_count();
  doc["condition"] = check_condition(game.cg(), adg);
  doc["condition_superset"] = check_condition_superset(game.cg(), adg);
  std::cout << doc.dump(2) << "\n";
  return 0;
}

int oracle_command(const std::string& game_arg, double tolerance, std::size_t max_list) {
  const auto cap = enumeration_cap_from_env();
  const auto game = resolve_game(game_arg, cap);
  const auto v = value_iteration(game, tolerance, cap);
  Json doc;
  doc["optimal_value"] = v;
  if (game.state_count() == 1) {
    doc["argmax"] = maximizing_joint_actions(game, v, 0, max_list, cap);
  } else {
    Json greedy = Json::array();
    for (int s = 0; s < game.state_count(); ++s) greedy.push_back(greedy_joint_action(game, v, s, cap));
    doc["greedy_joint_action"] = greedy;
  }
  std::cout << doc.dump(2) << "\n";
  return 0;
}

int run_command(const std::string& config_path, const std::string& out, const std::string& format) {
  ExperimentConfig config = config_from_json(detail::parse_file(config_path));
  config.enumeration_cap = enumeration_cap_from_env();
  if (!out.empty()) config.output = out;
  if (format == "csv") config.format = ReportFormat::csv;
  if (format == "json") config.format = ReportFormat::json;
  const auto report = run_experiment(config);

  std::ostringstream text;
  if (config.format == ReportFormat::csv) {
    write_csv(text, report);
  } else {
    text << report_to_json(report).dump(2) << "\n";
  }
  write_text(config.output, text.str());
  std::cerr << "runs=" << report.rows.size() << " success_rate=" << format_real(report.success_rate())
            << " mean_final_value=" << format_real(report.mean_final_value()) << " adg_edges=" << report.adg_edges
            << " condition=" << (report.condition ? "true" : "false") << "\n";
  return 0;
}

int solve_command(const std::string& game_arg, const std::string& adg_arg, std::uint64_t seed, int max_sweeps,
                  const std::string& init_path, const std::string& policy_out) {
  const auto game = resolve_game(game_arg, enumeration_cap_from_env());
  const auto adg = adg_argument(game, adg_arg);
  ActionDependentPolicy init = init_path.empty() ? random_policy(adg, game.action_counts(), game.state_count(), seed)
                                                 : load_policy(init_path);
  if (!(init.adg() == adg)) throw ValidationError("initial policy uses a different dependency graph");
  auto result = ad_mpi(game, std::move(init), max_sweeps);
  if (init_path.empty()) result.trace.seed = seed;

  Json doc;
  doc["status"] = to_string(result.trace.status);
  doc["seed"] = result.trace.seed ? Json(*result.trace.seed) : Json(nullptr);
  doc["sweeps"] = result.trace.sweeps();
  doc["monotone"] = result.trace.monotone();
  doc["adg"] = adg_to_json(adg);
  doc["condition"] = check_condition(game.cg(), adg);
  Json records = Json::array();
  for (const auto& r : result.trace.records) {
    Json rec;
    rec["values"] = r.values;
    rec["policy_hash"] = r.policy_hash;
    rec["joint_actions"] = r.joint_actions;
    rec["changes"] = r.changes ? Json(*r.changes) : Json(nullptr);
    records.push_back(rec);
  }
  doc["trace"] = records;
  doc["final_value"] = result.trace.final_values();
  std::cout << doc.dump(2) << "\n";
  if (!policy_out.empty()) write_text(policy_out, policy_to_json(result.policy).dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Action-dependent multi-agent policy iteration on coordination-graph games"};
  app.require_subcommand(1);

  std::string game, method, out, adg, config, format, init, policy_out;
  std::uint64_t seed = 0;
  int max_sweeps = 100;
  double tolerance = 1e-12;
  std::size_t max_list = 100;

  auto* build = app.add_subcommand("build-adg", "Build a dependency graph for a game's coordination graph");
  build->add_option("--game", game, "Built-in name or game document")->required();
  build->add_option("--method", method, "greedy | exhaustive | dense | empty")
      ->required()
      ->check(CLI::IsMember({"greedy", "exhaustive", "dense", "empty"}));
  build->add_option("--out", out, "Output path (default: stdout)");

  auto* check = app.add_subcommand("check", "Validate a dependency graph against a game");
  check->add_option("--game", game)->required();
  check->add_option("--adg", adg, "Dependency graph document")->required();

  auto* oracle = app.add_subcommand("oracle", "Optimal values and maximising joint actions by enumeration");
  oracle->add_option("--game", game)->required();
  oracle->add_option("--tolerance", tolerance, "Value iteration residual")->check(CLI::PositiveNumber);
  oracle->add_option("--max-list", max_list, "Maximum number of maximisers to list");

  auto* run = app.add_subcommand("run", "Run a seeded restart experiment");
  run->add_option("--config", config, "Experiment config document")->required();
  run->add_option("--out", out, "Report path (overrides the config)");
  run->add_option("--format", format, "csv | json")->check(CLI::IsMember({"csv", "json"}));

  auto* solve = app.add_subcommand("solve", "Single run with a full trace");
  solve->add_option("--game", game)->required();
  solve->add_option("--adg", adg, "greedy | exhaustive | dense | empty | path")->required();
  solve->add_option("--seed", seed, "Seed for the random initial policy");
  solve->add_option("--max-sweeps", max_sweeps)->check(CLI::PositiveNumber);
  solve->add_option("--init", init, "Initial policy document (instead of a random one)");
  solve->add_option("--policy-out", policy_out, "Write the final policy here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*build) return build_adg_command(game, method, out);
    if (*check) return check_command(game, adg);
    if (*oracle) return oracle_command(game, tolerance, max_list);
    if (*run) return run_command(config, out, format);
    if (*solve) return solve_command(game, adg, seed, max_sweeps, init, policy_out);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
