#pragma once

// Restart experiments: draw seeded random initial policies on a chosen ADG,
// run policy iteration from each, and compare against the enumerated optimum.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <ostream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "adgmarl/ad_mpi.hpp"
#include "adgmarl/adg_builder.hpp"
#include "adgmarl/dp.hpp"
#include "adgmarl/error.hpp"
#include "adgmarl/game.hpp"
#include "adgmarl/io.hpp"
#include "adgmarl/policy.hpp"

namespace adgmarl {

enum class AdgMethod { greedy, exhaustive, dense, empty };

inline AdgMethod parse_adg_method(std::string_view s) {
  if (s == "greedy" || s == "sparse_greedy") return AdgMethod::greedy;
  if (s == "exhaustive") return AdgMethod::exhaustive;
  if (s == "dense" || s == "dense_full") return AdgMethod::dense;
  if (s == "empty") return AdgMethod::empty;
  throw ValidationError("unknown ADG method '" + std::string(s) + "'");
}

inline ActionDependencyGraph build_adg(const CoordinationGraph& cg, AdgMethod method) {
  switch (method) {
    case AdgMethod::greedy: return greedy_adg(cg);
    case AdgMethod::exhaustive: return min_adg_exhaustive(cg).adg;
    case AdgMethod::dense: return dense_adg(cg.size());
    case AdgMethod::empty: return empty_adg(cg.size());
  }
  throw ValidationError("unknown ADG method");
}

// `condition` is the superset form, which the dense ADG also meets;
// `condition_exact` is the equality form.
struct AdgReport {
  ActionDependencyGraph adg;
  bool condition = false;
  bool condition_exact = false;
};

inline AdgReport build_adg_report(const MarkovGame& game, AdgMethod method) {
  AdgReport report{build_adg(game.cg(), method), false, false};
  report.condition = check_condition_superset(game.cg(), report.adg);
  report.condition_exact = check_condition(game.cg(), report.adg);
  return report;
}

enum class ReportFormat { csv, json };

struct ExperimentConfig {
  std::string game;          // built-in name or path to a game document
  std::string adg_variant;   // sparse_greedy | dense_full | empty | file
  std::string adg_path;      // used when adg_variant == "file"
  std::vector<std::uint64_t> seeds;
  int max_sweeps = 100;
  double tolerance = 1e-8;
  std::string output;
  ReportFormat format = ReportFormat::csv;
  std::uint64_t enumeration_cap = kDefaultEnumerationCap;
  unsigned workers = 0;  // 0: hardware concurrency
};

inline ExperimentConfig config_from_json(const Json& doc) {
  constexpr std::string_view what = "experiment config";
  detail::reject_unknown_keys(doc, {"game", "adg_variant", "adg_path", "seeds", "max_sweeps", "tolerance", "output", "format"},
                              what);
  ExperimentConfig config;
  const Json& game = detail::require(doc, "game", what);
  if (!game.is_string()) throw ValidationError("game must be a string");
  config.game = game.get<std::string>();
  const Json& variant = detail::require(doc, "adg_variant", what);
  if (!variant.is_string()) throw ValidationError("adg_variant must be a string");
  config.adg_variant = variant.get<std::string>();
  if (auto it = doc.find("adg_path"); it != doc.end()) {
    if (!it->is_string()) throw ValidationError("adg_path must be a string");
    config.adg_path = it->get<std::string>();
  }
  for (const auto& s : detail::get_array(detail::require(doc, "seeds", what), SIZE_MAX, "seeds")) {
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0)) {
      throw ValidationError("seeds must be non-negative integers");
    }
    config.seeds.push_back(s.get<std::uint64_t>());
  }
  if (auto it = doc.find("max_sweeps"); it != doc.end()) config.max_sweeps = detail::get_int(*it, "max_sweeps");
  if (auto it = doc.find("tolerance"); it != doc.end()) config.tolerance = detail::get_real(*it, "tolerance");
  if (auto it = doc.find("output"); it != doc.end()) {
    if (!it->is_string()) throw ValidationError("output must be a string");
    config.output = it->get<std::string>();
  }
  if (auto it = doc.find("format"); it != doc.end()) {
    if (*it == "csv") {
      config.format = ReportFormat::csv;
    } else if (*it == "json") {
      config.format = ReportFormat::json;
    } else {
      throw ValidationError("format must be \"csv\" or \"json\"");
    }
  }
  return config;
}

inline void validate_config(const ExperimentConfig& config) {
  if (config.seeds.empty()) throw ValidationError("experiment needs at least one seed");
  if (!(config.tolerance > 0.0)) throw ValidationError("tolerance must be positive");
  if (config.max_sweeps < 1) throw ValidationError("max_sweeps must be at least 1");
  static constexpr std::string_view variants[] = {"sparse_greedy", "dense_full", "empty", "file"};
  if (std::find(std::begin(variants), std::end(variants), config.adg_variant) == std::end(variants)) {
    throw ValidationError("unknown adg_variant '" + config.adg_variant + "'");
  }
  if (config.adg_variant == "file" && config.adg_path.empty()) {
    throw ValidationError("adg_variant \"file\" needs adg_path");
  }
}

inline ActionDependencyGraph resolve_adg(const MarkovGame& game, const ExperimentConfig& config) {
  if (config.adg_variant == "file") {
    ActionDependencyGraph adg = load_adg(config.adg_path);
    if (adg.size() != game.agent_count()) throw ValidationError("dependency graph size does not match the game");
    return adg;
  }
  return build_adg(game.cg(), parse_adg_method(config.adg_variant));
}

struct RunRow {
  std::uint64_t seed = 0;
  AdMpiStatus status = AdMpiStatus::max_sweeps;
  std::size_t sweeps = 0;
  ValueTable final_values;
  ValueTable optimal_values;
  double gap = 0.0;  // sup-norm distance to the optimum
  std::vector<JointAction> joint_actions;
  std::size_t adg_edges = 0;
  bool monotone = true;
};

struct ExperimentReport {
  std::vector<RunRow> rows;  // sorted by seed
  ValueTable optimal_values;
  double tolerance = 0.0;
  std::size_t adg_edges = 0;
  bool condition = false;  // superset form, as in AdgReport
  bool condition_exact = false;

  std::size_t successes() const {
    return static_cast<std::size_t>(
        std::count_if(rows.begin(), rows.end(), [this](const RunRow& r) { return r.gap < tolerance; }));
  }
  double success_rate() const {
    return rows.empty() ? 0.0 : static_cast<double>(successes()) / static_cast<double>(rows.size());
  }
  /// Mean over runs of the state-averaged final value.
  double mean_final_value() const {
    if (rows.empty()) return 0.0;
    double total = 0.0;
    for (const auto& r : rows) {
      double avg = 0.0;
      for (double v : r.final_values) avg += v;
      total += avg / static_cast<double>(r.final_values.size());
    }
    return total / static_cast<double>(rows.size());
  }
};

inline RunRow run_single(const MarkovGame& game, const ActionDependencyGraph& adg, const ValueTable& optimal,
                         std::uint64_t seed, int max_sweeps) {
  auto init = random_policy(adg, game.action_counts(), game.state_count(), seed);
  auto result = ad_mpi(game, std::move(init), max_sweeps);
  result.trace.seed = seed;
  RunRow row;
  row.seed = seed;
  row.status = result.trace.status;
  row.sweeps = result.trace.sweeps();
  row.final_values = result.trace.final_values();
  row.optimal_values = optimal;
  row.gap = detail::sup_distance(row.final_values, optimal);
  row.joint_actions = result.trace.records.back().joint_actions;
  row.adg_edges = adg.edge_count();
  row.monotone = result.trace.monotone();
  return row;
}

inline constexpr double kOracleTolerance = 1e-12;

/// Seeds are spread over worker threads; rows are sorted by seed afterwards so
/// the report does not depend on scheduling.
inline ExperimentReport run_experiment(const MarkovGame& game, const ActionDependencyGraph& adg,
                                       const ExperimentConfig& config) {
  validate_config(config);
  if (adg.size() != game.agent_count()) throw ValidationError("dependency graph size does not match the game");
  ExperimentReport report;
  report.tolerance = config.tolerance;
  report.adg_edges = adg.edge_count();
  report.condition = check_condition_superset(game.cg(), adg);
  report.condition_exact = check_condition(game.cg(), adg);
  report.optimal_values = value_iteration(game, kOracleTolerance, config.enumeration_cap);

  report.rows.resize(config.seeds.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t k = next++; k < config.seeds.size(); k = next++) {
      try {
        report.rows[k] = run_single(game, adg, report.optimal_values, config.seeds[k], config.max_sweeps);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  unsigned workers = config.workers ? config.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(config.seeds.size()));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  std::stable_sort(report.rows.begin(), report.rows.end(),
                   [](const RunRow& a, const RunRow& b) { return a.seed < b.seed; });
  return report;
}

inline ExperimentReport run_experiment(const ExperimentConfig& config) {
  validate_config(config);
  MarkovGame game = resolve_game(config.game, config.enumeration_cap);
  return run_experiment(game, resolve_adg(game, config), config);
}

/// Shortest round-trip decimal representation.
inline std::string format_real(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

namespace detail {

inline std::string join_values(const ValueTable& v) {
  std::string out;
  for (std::size_t s = 0; s < v.size(); ++s) {
    if (s) out += ';';
    out += format_real(v[s]);
  }
  return out;
}

/// Actions separated by ';', states separated by '|'.
inline std::string join_joint_actions(const std::vector<JointAction>& actions) {
  std::string out;
  for (std::size_t s = 0; s < actions.size(); ++s) {
    if (s) out += '|';
    for (std::size_t i = 0; i < actions[s].size(); ++i) {
      if (i) out += ';';
      out += std::to_string(actions[s][i]);
    }
  }
  return out;
}

}  // namespace detail

inline constexpr std::string_view kCsvHeader = "seed,status,sweeps,final_value,optimal_value,gap,joint_action,adg_edges";

/// One row per seed. Multi-state games list per-state values separated by ';'
/// and per-state joint actions separated by '|'.
inline void write_csv(std::ostream& out, const ExperimentReport& report) {
  out << kCsvHeader << '\n';
  for (const auto& r : report.rows) {
    out << r.seed << ',' << to_string(r.status) << ',' << r.sweeps << ',' << detail::join_values(r.final_values) << ','
        << detail::join_values(r.optimal_values) << ',' << format_real(r.gap) << ','
        << detail::join_joint_actions(r.joint_actions) << ',' << r.adg_edges << '\n';
  }
}

inline Json report_to_json(const ExperimentReport& report) {
  Json doc;
  Json rows = Json::array();
  for (const auto& r : report.rows) {
    Json row;
    row["seed"] = r.seed;
    row["status"] = to_string(r.status);
    row["sweeps"] = r.sweeps;
    row["final_value"] = r.final_values;
    row["optimal_value"] = r.optimal_values;
    row["gap"] = r.gap;
    row["joint_action"] = r.joint_actions;
    row["adg_edges"] = r.adg_edges;
    rows.push_back(row);
  }
  doc["rows"] = rows;
  doc["success_rate"] = report.success_rate();
  doc["mean_final_value"] = report.mean_final_value();
  doc["optimal_value"] = report.optimal_values;
  doc["tolerance"] = report.tolerance;
  doc["adg_edges"] = report.adg_edges;
  doc["condition"] = report.condition;
  doc["condition_exact"] = report.condition_exact;
  return doc;
}

}  // namespace adgmarl
