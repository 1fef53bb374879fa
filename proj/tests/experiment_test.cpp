#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "support.hpp"

using namespace adgmarl;
using namespace testing_support;

namespace {

std::vector<std::uint64_t> seeds(std::uint64_t count) {
  std::vector<std::uint64_t> out(count);
  for (std::uint64_t k = 0; k < count; ++k) out[k] = k;
  return out;
}

ExperimentConfig config(const std::string& game, const std::string& variant, std::uint64_t count) {
  ExperimentConfig c;
  c.game = game;
  c.adg_variant = variant;
  c.seeds = seeds(count);
  return c;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(field);
  return out;
}

}  // namespace

TEST(AdgJson, RoundTrip) {
  Rng rng(61);
  for (int trial = 0; trial < 50; ++trial) {
    const auto adg = random_adg(rng, uniform_int(rng, 1, 7), 0.5);
    EXPECT_TRUE(adg_from_json(adg_to_json(adg)) == adg);
  }
  const auto doc = Json::parse(R"({"n_agents": 3, "order": [1, 3, 2], "edges": [[1, 2], [3, 2]]})");
  const auto collider = adg_from_json(doc);
  EXPECT_EQ(collider.order(), (std::vector<Agent>{0, 2, 1}));
  EXPECT_EQ(collider.in_neighbors(1), (AgentSet{0, 2}));
  const auto wrapped = Json::parse(R"({"method": "greedy", "edge_count": 1, "condition": true,
                                        "adg": {"n_agents": 2, "edges": [[2, 1]]}})");
  EXPECT_EQ(adg_from_json(wrapped).order(), (std::vector<Agent>{1, 0}));
}

TEST(AdgJson, Errors) {
  EXPECT_THROW(adg_from_json(Json::parse(R"({"n_agents": 2, "edges": [[1, 2], [2, 1]]})")), ValidationError);
  EXPECT_THROW(adg_from_json(Json::parse(R"({"n_agents": 2, "order": [2, 1], "edges": [[1, 2]]})")), ValidationError);
  EXPECT_THROW(adg_from_json(Json::parse(R"({"n_agents": 2, "edges": [], "extra": 1})")), ValidationError);
  EXPECT_THROW(adg_from_json(Json::parse(R"({"n_agents": 2, "edges": [[1, 3]]})")), ValidationError);
}

TEST(PolicyJson, RoundTrip) {
  Rng rng(62);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = uniform_int(rng, 1, 5);
    std::vector<int> counts(static_cast<std::size_t>(n));
    for (int& c : counts) c = uniform_int(rng, 1, 3);
    const auto pi = random_policy(random_adg(rng, n, 0.5), counts, uniform_int(rng, 1, 3), rng());
    EXPECT_TRUE(policy_from_json(policy_to_json(pi)) == pi);
  }
}

TEST(PolicyJson, Errors) {
  const auto good = policy_to_json(fig2_chain_policy());
  auto missing_entry = good;
  missing_entry["agents"][1]["entries"].erase(0);
  EXPECT_THROW(policy_from_json(missing_entry), ValidationError);
  auto bad_action = good;
  bad_action["agents"][0]["entries"][0][2] = 5;
  EXPECT_THROW(policy_from_json(bad_action), ValidationError);
  auto bad_neighbors = good;
  bad_neighbors["agents"][1]["neighbors"] = Json::array({3});
  EXPECT_THROW(policy_from_json(bad_neighbors), ValidationError);
}

TEST(ExperimentConfig, Parsing) {
  const auto c = config_from_json(Json::parse(R"({"game": "star5", "adg_variant": "dense_full", "seeds": [3, 1],
      "max_sweeps": 7, "tolerance": 1e-6, "output": "out.json", "format": "json"})"));
  EXPECT_EQ(c.game, "star5");
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{3, 1}));
  EXPECT_EQ(c.max_sweeps, 7);
  EXPECT_EQ(c.tolerance, 1e-6);
  EXPECT_EQ(c.format, ReportFormat::json);
  EXPECT_THROW(config_from_json(Json::parse(R"({"game": "star5", "adg_variant": "empty", "seeds": [1], "x": 1})")),
               ValidationError);
  EXPECT_THROW(config_from_json(Json::parse(R"({"game": "star5", "adg_variant": "empty", "seeds": [-1]})")),
               ValidationError);
  EXPECT_THROW(config_from_json(Json::parse(R"({"game": "star5", "adg_variant": "empty", "seeds": [1],
      "format": "xml"})")), ValidationError);
}

TEST(ExperimentConfig, Validation) {
  auto c = config("fig2_line", "sparse_greedy", 0);
  EXPECT_THROW(validate_config(c), ValidationError);
  c = config("fig2_line", "sparse_greedy", 3);
  c.tolerance = 0.0;
  EXPECT_THROW(validate_config(c), ValidationError);
  c = config("fig2_line", "greedy_ish", 3);
  EXPECT_THROW(validate_config(c), ValidationError);
  c = config("fig2_line", "file", 3);
  EXPECT_THROW(validate_config(c), ValidationError);
  c = config("fig2_line", "sparse_greedy", 3);
  c.max_sweeps = 0;
  EXPECT_THROW(validate_config(c), ValidationError);
}

TEST(RunExperiment, Fig2Examples) {
  const auto greedy = run_experiment(config("fig2_line", "sparse_greedy", 100));
  EXPECT_EQ(greedy.success_rate(), 1.0);
  EXPECT_EQ(greedy.optimal_values, (ValueTable{2.0}));
  EXPECT_EQ(greedy.adg_edges, 2u);
  EXPECT_TRUE(greedy.condition);
  EXPECT_TRUE(greedy.condition_exact);
  const auto empty = run_experiment(config("fig2_line", "empty", 100));
  EXPECT_LT(empty.success_rate(), 1.0);
  for (const auto& row : empty.rows) {
    if (row.gap >= 1e-8) {
      EXPECT_EQ(row.final_values, (ValueTable{1.2}));
      EXPECT_EQ(row.joint_actions.front(), (JointAction{1, 1, 1}));
    }
  }
}

TEST(RunExperiment, Star5Dense) {
  EXPECT_EQ(run_experiment(config("star5", "dense_full", 100)).success_rate(), 1.0);
}

TEST(RunExperiment, DeterministicAcrossWorkerCounts) {
  auto c = config("ring5", "empty", 40);
  c.workers = 1;
  std::ostringstream a, b, d;
  write_csv(a, run_experiment(c));
  c.workers = 4;
  write_csv(b, run_experiment(c));
  write_csv(d, run_experiment(c));
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(b.str(), d.str());
}

TEST(RunExperiment, SuccessRateMatchesRecountFromCsv) {
  auto c = config("ring5", "empty", 60);
  const auto report = run_experiment(c);
  std::ostringstream out;
  write_csv(out, report);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, kCsvHeader);
  std::size_t rows = 0, successes = 0;
  double value_sum = 0.0;
  while (std::getline(in, line)) {
    const auto fields = split(line, ',');
    ASSERT_EQ(fields.size(), 8u) << line;
    EXPECT_EQ(std::stoull(fields[0]), c.seeds[rows]);
    ++rows;
    if (std::stod(fields[5]) < c.tolerance) ++successes;
    value_sum += std::stod(fields[3]);
  }
  EXPECT_EQ(rows, report.rows.size());
  EXPECT_EQ(static_cast<double>(successes) / rows, report.success_rate());
  EXPECT_NEAR(value_sum / rows, report.mean_final_value(), 1e-12);
  EXPECT_GE(report.success_rate(), 0.0);
  EXPECT_LE(report.success_rate(), 1.0);
}

TEST(RunExperiment, MultiStateCsvAndJson) {
  Rng rng(63);
  const auto g = random_game(rng, {.n = 3, .actions = 2, .states = 2, .gamma = 0.9});
  const auto path = (std::filesystem::temp_directory_path() / "adgmarl_experiment_game.json").string();
  std::ofstream(path) << game_to_json(g).dump();
  auto c = config(path, "sparse_greedy", 10);
  const auto report = run_experiment(c);
  std::remove(path.c_str());
  EXPECT_EQ(report.success_rate(), 1.0);
  std::ostringstream out;
  write_csv(out, report);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  const auto fields = split(line, ',');
  EXPECT_EQ(split(fields[3], ';').size(), 2u);
  EXPECT_EQ(split(fields[6], '|').size(), 2u);
  const auto doc = report_to_json(report);
  EXPECT_EQ(doc["rows"].size(), 10u);
  EXPECT_EQ(doc["success_rate"], 1.0);
}

TEST(RunExperiment, AdgFromFile) {
  const auto path = (std::filesystem::temp_directory_path() / "adgmarl_experiment_adg.json").string();
  std::ofstream(path) << R"({"n_agents": 3, "order": [1, 3, 2], "edges": [[1, 2], [3, 2]]})";
  auto c = config("fig2_line", "file", 20);
  c.adg_path = path;
  const auto report = run_experiment(c);
  EXPECT_EQ(report.adg_edges, 2u);
  EXPECT_FALSE(report.condition);
  std::ofstream(path) << R"({"n_agents": 4, "edges": []})";
  EXPECT_THROW(run_experiment(c), ValidationError);
  std::remove(path.c_str());
}

TEST(BuildAdgReport, Examples) {
  const auto fig2 = builtin_instance("fig2_line");
  const auto greedy = build_adg_report(fig2, parse_adg_method("greedy"));
  EXPECT_EQ(greedy.adg.edge_count(), 2u);
  EXPECT_TRUE(greedy.condition);
  EXPECT_TRUE(greedy.condition_exact);
  const auto empty = build_adg_report(fig2, parse_adg_method("empty"));
  EXPECT_EQ(empty.adg.edge_count(), 0u);
  EXPECT_FALSE(empty.condition);
  const auto dense = build_adg_report(builtin_instance("star5"), parse_adg_method("dense"));
  EXPECT_EQ(dense.adg.edge_count(), 10u);
  EXPECT_TRUE(dense.condition);
  EXPECT_FALSE(dense.condition_exact);
  EXPECT_THROW(parse_adg_method("sparse"), ValidationError);
}

TEST(FormatReal, ShortestRoundTrip) {
  EXPECT_EQ(format_real(1.2), "1.2");
  EXPECT_EQ(format_real(2.0), "2");
  EXPECT_EQ(std::stod(format_real(0.1 + 0.2)), 0.1 + 0.2);
}
