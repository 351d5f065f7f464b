#include <gtest/gtest.h>

#include "pedf/config.hpp"

using namespace pedf;

namespace {

const std::filesystem::path kScenarios = PEDF_SCENARIO_DIR;

std::string config_error(const json& doc) {
  try {
    validate(parse_run_config(doc, kScenarios));
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(TopologyFile, Fig1FileMatchesBuiltIn) {
  auto rc = parse_run_config(json{{"topology", {{"file", "fig1.json"}}}}, kScenarios);
  const auto built = build_fig1_scenario();
  ASSERT_EQ(rc.topology.size(), built.size());
  for (NodeId n = 0; n < built.size(); ++n) {
    EXPECT_EQ(rc.topology.label(n), built.label(n));
    EXPECT_EQ(rc.topology.role(n), built.role(n));
  }
  EXPECT_EQ(rc.topology.links(), built.links());
  EXPECT_EQ(rc.source.file, (kScenarios / "fig1.json").string());
}

TEST(TopologyFile, RoundTripsThroughJson) {
  for (const char* name : {"fig1", "grid-3", "random-9"}) {
    const auto t = build_named_scenario(name);
    const auto back = topology_from_json(topology_to_json(t));
    EXPECT_EQ(back.links(), t.links()) << name;
  }
  Topology one_way;
  one_way.add_node("a", NodeRole::Source);
  one_way.add_node("b", NodeRole::Destination);
  one_way.add_link(0, 1, 3.5);
  EXPECT_EQ(topology_from_json(topology_to_json(one_way)).links(), one_way.links());
}

TEST(RunConfigFile, WorkedExample) {
  const auto rc = load_run_config(kScenarios / "fig1_worked_example.json");
  validate(rc);
  const auto& t = rc.topology;
  EXPECT_EQ(rc.sim.initial_levels[t.at("3")], 27.0);
  EXPECT_EQ(rc.sim.initial_levels[t.at("4")], 100.0);
  ASSERT_EQ(rc.sim.workload.injections.size(), 2u);
  EXPECT_EQ(rc.sim.workload.injections[0].priority, 4);
  EXPECT_EQ(rc.sim.workload.injections[1].priority, 1);
  EXPECT_EQ(rc.sim.workload.rate, 0.0);
}

TEST(RunConfigFile, ComparisonScenariosLoad) {
  for (const char* f : {"fig1_lifetime.json", "fig1_balance.json"}) {
    const auto rc = load_run_config(kScenarios / f);
    EXPECT_NO_THROW(validate(rc)) << f;
    EXPECT_EQ(rc.seeds.size(), 50u) << f;
    EXPECT_EQ(rc.policies, (std::vector<Policy>{Policy::PEDF, Policy::AlwaysBestPath})) << f;
  }
}

TEST(EffectiveConfig, ReparsesToTheSameRun) {
  auto rc = load_run_config(kScenarios / "fig1_lifetime.json");
  rc.sim.reporting.mode = ReportingParams::Latency::LinkDelay;
  rc.sim.engine.hop_limit = 7;
  const auto doc = effective_config_json(rc);
  const auto again = parse_run_config(doc);
  EXPECT_EQ(effective_config_json(again), doc);
  EXPECT_EQ(detail::fingerprint(again.topology, again.sim, 3), detail::fingerprint(rc.topology, rc.sim, 3));
  EXPECT_EQ(doc["rng"], std::string(Rng::kAlgorithm));
}

TEST(EffectiveConfig, FillsDefaults) {
  const auto doc = effective_config_json(parse_run_config(json{{"topology", "fig1"}}));
  EXPECT_EQ(doc["energy"]["tx_cost"], 0.5);
  EXPECT_EQ(doc["engine"]["hop_limit"], 18);
  EXPECT_EQ(doc["initial_levels"]["u2"], 100.0);
  EXPECT_EQ(doc["policies"], json::array({"pedf"}));
}

TEST(ConfigErrors, PriorityMixMustSumToOne) {
  const auto msg = config_error({{"topology", "fig1"}, {"workload", {{"priority_mix", {0.3, 0.3, 0.2, 0.1}}}}});
  EXPECT_NE(msg.find("priority_mix"), std::string::npos) << msg;
}

TEST(ConfigErrors, UnknownLinkEndpointNamesTheLink) {
  const json topo = {{"nodes", {{{"label", "a"}}, {{"label", "b"}}}},
                     {"links", {{{"from", "a"}, {"to", "b"}, {"delay_ms", 1}}, {{"from", "a"}, {"to", "z"}, {"delay_ms", 1}}}}};
  const auto msg = config_error({{"topology", topo}});
  EXPECT_NE(msg.find("topology.links[1].to"), std::string::npos) << msg;
  EXPECT_NE(msg.find("'z'"), std::string::npos) << msg;
}

TEST(ConfigErrors, MissingFileNamesThePath) {
  try {
    load_run_config("/nonexistent/run.json");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/run.json"), std::string::npos);
  }
}

TEST(ConfigErrors, NamesTheField) {
  const std::vector<std::pair<json, std::string>> cases = {
      {{{"topology", "fig1"}, {"energy", {{"tx_cots", 1}}}}, "tx_cots"},
      {{{"topology", "fig1"}, {"colour", 1}}, "colour"},
      {{{"topology", "mesh"}}, "topology"},
      {{{"topology", "fig1"}, {"reporting", {{"latency_ms", -1}}}}, "reporting.latency_ms"},
      {{{"topology", "fig1"}, {"workload", {{"arrival", "bursty"}}}}, "workload.arrival"},
      {{{"topology", "fig1"}, {"initial_levels", {{"3", 140}}}}, "initial_levels.3"},
      {{{"topology", "fig1"}, {"initial_levels", {{"q", 40}}}}, "initial_levels"},
      {{{"topology", "fig1"}, {"policies", {"speed"}}}, "policies"},
      {{{"topology", "fig1"}, {"seeds", "9..3"}}, "seeds"},
      {{{"topology", "fig1"}, {"schema_version", 99}}, "schema_version"},
      {{{"topology", "fig1"}, {"energy", {{"rx_cost", "cheap"}}}}, "energy.rx_cost"},
      {{{"topology", "fig1"}, {"horizon_s", 0}}, "horizon"},
      {{{"topology", "fig1"}, {"workload", {{"injections", {{{"src", "S"}, {"dst", "D"}, {"urgency", "Meh"}}}}}}},
       "workload.injections[0].urgency"},
      {{{"description", "no topology"}}, "topology"},
  };
  for (const auto& [doc, field] : cases) {
    const auto msg = config_error(doc);
    EXPECT_NE(msg.find(field), std::string::npos) << doc.dump() << " -> '" << msg << "'";
  }
}

TEST(ConfigErrors, LabelsMustBeCsvSafe) {
  const json topo = {{"nodes", {{{"label", "a,b"}}}}};
  EXPECT_NE(config_error({{"topology", topo}}).find("label"), std::string::npos);
}

TEST(ParseSeeds, Forms) {
  EXPECT_EQ(parse_seeds("7"), (std::vector<std::uint64_t>{7}));
  EXPECT_EQ(parse_seeds("1..4"), (std::vector<std::uint64_t>{1, 2, 3, 4}));
  EXPECT_EQ(parse_seeds("3,1,9"), (std::vector<std::uint64_t>{3, 1, 9}));
  EXPECT_THROW(parse_seeds(""), ConfigError);
  EXPECT_THROW(parse_seeds("1,,2"), ConfigError);
  EXPECT_THROW(parse_seeds("-1"), ConfigError);
}

TEST(ResultDocuments, MetricsJsonShape) {
  const auto rc = load_run_config(kScenarios / "fig1_worked_example.json");
  const auto r = run(rc.topology, rc.sim, Policy::PEDF, 1);
  const auto doc = metrics_to_json(r.metrics, rc.topology);
  EXPECT_EQ(doc["schema_version"], kSchemaVersion);
  EXPECT_EQ(doc["totals"]["delivered"], 2);
  EXPECT_EQ(doc["per_priority"]["4"]["delay"]["max_ms"], 50.0);
  EXPECT_EQ(doc["network"]["best_path"], json::array({"S", "1", "2", "3", "D"}));
  EXPECT_TRUE(doc["network"]["first_death_ms"].is_null());
  EXPECT_EQ(doc["nodes"].size(), rc.topology.size());

  const auto csv = energy_series_csv(r.metrics);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "time_ms,S,1,2,3,4,D,u1,u2,u3");
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), r.metrics.sample_times_ms.size() + 1);
}

TEST(ResultDocuments, ComparisonCsvHasOneRowPerPolicy) {
  auto rc = load_run_config(kScenarios / "fig1_balance.json");
  rc.sim.horizon_s = 10;
  const auto a = run(rc.topology, rc.sim, Policy::PEDF, 1).metrics;
  const auto b = run(rc.topology, rc.sim, Policy::AlwaysBestPath, 1).metrics;
  const auto report = compare({{Policy::PEDF, a}, {Policy::AlwaysBestPath, b}});
  const auto rows = comparison_csv_rows(report);
  EXPECT_EQ(std::count(rows.begin(), rows.end(), '\n'), 2);
  const auto commas = [](std::string_view s) { return std::count(s.begin(), s.end(), ','); };
  EXPECT_EQ(commas(rows.substr(0, rows.find('\n'))), commas(kComparisonCsvHeader));
  EXPECT_EQ(comparison_to_json(report)["columns"].size(), 2u);
}
