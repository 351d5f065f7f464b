#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "pedf/config.hpp"
#include "pedf/engine.hpp"
#include "pedf/metrics.hpp"
#include "pedf/scenarios.hpp"

namespace pedf {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitInvariant = 3;
inline constexpr const char* kOutDirEnv = "PEDF_OUT_DIR";

// Writes to a sibling temporary and renames, so readers never see a
// truncated file.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw std::runtime_error("short write to '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

struct RunJob {
  Policy policy;
  std::uint64_t seed;
};

struct JobResult {
  RunResult result;
  std::exception_ptr error;
};

// Executes independent runs on up to `jobs` worker threads. Each run is
// single-threaded and results come back in job order.
inline std::vector<JobResult> run_jobs(const RunConfig& rc, const std::vector<RunJob>& work, unsigned jobs) {
  std::vector<JobResult> results(work.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < work.size(); i = next++) {
      try {
        results[i].result = run(rc.topology, rc.sim, work[i].policy, work[i].seed);
      } catch (...) {
        results[i].error = std::current_exception();
      }
    }
  };
  jobs = std::clamp<unsigned>(jobs, 1, static_cast<unsigned>(std::max<std::size_t>(work.size(), 1)));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
  }
  return results;
}

inline std::filesystem::path run_dir(const std::filesystem::path& out, Policy policy, std::uint64_t seed) {
  return out / (std::string(to_string(policy)) + "-seed" + std::to_string(seed));
}

inline void write_run_outputs(const RunConfig& rc, const std::filesystem::path& dir, const RunResult& r) {
  RunConfig echo = rc;
  echo.seeds = {r.metrics.seed};
  echo.policies = {parse_policy(r.metrics.policy)};
  echo.output_dir = dir.parent_path().string();
  write_file_atomic(dir / "config.json", effective_config_json(echo).dump(2) + "\n");
  if (rc.sim.engine.record_trace) write_file_atomic(dir / "trace.csv", r.trace);
  write_file_atomic(dir / "energy.csv", energy_series_csv(r.metrics));
  write_file_atomic(dir / "metrics.json", metrics_to_json(r.metrics, rc.topology).dump(2) + "\n");
}

namespace detail {

inline double median(std::vector<double> xs) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  const auto n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

// Medians across seeds per policy; censored times count as the horizon.
inline json aggregate_json(const std::vector<ComparisonReport>& reports) {
  std::map<std::string, std::map<std::string, std::vector<double>>> series;
  std::vector<std::string> order;
  for (const auto& r : reports) {
    for (const auto& c : r.columns) {
      if (!series.contains(c.policy)) order.push_back(c.policy);
      auto& s = series[c.policy];
      s["first_death_ms"].push_back(c.first_death_ms.value_or(r.horizon_ms));
      s["best_path_first_death_ms"].push_back(c.best_path_first_death_ms.value_or(r.horizon_ms));
      s["residual_stddev"].push_back(c.residual_stddev);
      s["residual_mean"].push_back(c.residual_mean);
      for (std::size_t p = 0; p < 4; ++p) {
        s["delivery_ratio_p" + std::to_string(p + 1)].push_back(c.delivery_ratio[p]);
        s["mean_delay_ms_p" + std::to_string(p + 1)].push_back(c.delay[p].mean_ms);
      }
    }
  }
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["seeds"] = reports.size();
  doc["statistic"] = "median across seeds; censored times count as the horizon";
  json policies = json::object();
  for (const auto& name : order) {
    json col = json::object();
    for (const auto& [metric, values] : series[name]) col[metric] = median(values);
    policies[name] = col;
  }
  doc["policies"] = policies;
  return doc;
}

struct CommonOptions {
  std::string scenario;
  std::string config;
  std::optional<double> horizon;
  std::string out;
  unsigned jobs = 1;
};

inline RunConfig resolve(const CommonOptions& opt) {
  if (!opt.config.empty() && !opt.scenario.empty()) {
    throw ConfigError("--scenario and --config are mutually exclusive");
  }
  RunConfig rc;
  if (!opt.config.empty()) {
    rc = load_run_config(opt.config);
  } else {
    const std::string name = opt.scenario.empty() ? "fig1" : opt.scenario;
    rc = parse_run_config(json{{"topology", name}});
  }
  if (opt.horizon) rc.sim.horizon_s = *opt.horizon;
  if (const char* env = std::getenv(kOutDirEnv); env && *env) rc.output_dir = env;
  if (!opt.out.empty()) rc.output_dir = opt.out;
  return rc;
}

}  // namespace detail

// Command-line entry point. Subcommands: run, compare, validate, scenarios.
inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
  CLI::App app{"Priority-energy forwarding simulator for wireless sensor networks", "pedf_sim"};
  app.require_subcommand(1);

  detail::CommonOptions common;
  std::string policy_flag, seed_flag;
  auto add_common = [&common](CLI::App* sub) {
    sub->add_option("--scenario", common.scenario, "built-in scenario (see `scenarios`)");
    sub->add_option("--config", common.config, "run configuration JSON file");
    sub->add_option("--horizon", common.horizon, "simulated seconds");
    sub->add_option("--out", common.out, std::string("output directory (env ") + kOutDirEnv + ")");
  };

  auto* run_cmd = app.add_subcommand("run", "simulate one policy for one or more seeds");
  add_common(run_cmd);
  run_cmd->add_option("--policy", policy_flag, "pedf | best-path | greedy");
  run_cmd->add_option("--seed,--seeds", seed_flag, "seed, list (1,2,3) or range (1..50)");
  run_cmd->add_option("--jobs", common.jobs, "worker threads");

  auto* cmp_cmd = app.add_subcommand("compare", "run several policies per seed and compare them");
  add_common(cmp_cmd);
  cmp_cmd->add_option("--policies,--policy", policy_flag, "comma-separated policies");
  cmp_cmd->add_option("--seeds,--seed", seed_flag, "seed, list (1,2,3) or range (1..50)");
  cmp_cmd->add_option("--jobs", common.jobs, "worker threads");

  std::string validate_path;
  auto* val_cmd = app.add_subcommand("validate", "check a configuration and print it with defaults filled in");
  val_cmd->add_option("file", validate_path, "run configuration JSON file");
  val_cmd->add_option("--config", common.config, "run configuration JSON file");
  val_cmd->add_option("--scenario", common.scenario, "built-in scenario");

  auto* list_cmd = app.add_subcommand("scenarios", "list built-in scenarios");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (list_cmd->parsed()) {
      for (const auto& s : kBuiltinScenarios) out << s.name << "\t" << s.description << "\n";
      return kExitOk;
    }

    if (val_cmd->parsed()) {
      if (!validate_path.empty()) common.config = validate_path;
      if (common.config.empty() && common.scenario.empty()) throw ConfigError("validate needs a config path");
      auto rc = detail::resolve(common);
      validate(rc);
      out << effective_config_json(rc).dump(2) << "\n";
      return kExitOk;
    }

    auto rc = detail::resolve(common);
    if (!policy_flag.empty()) rc.policies = parse_policies(policy_flag);
    if (!seed_flag.empty()) rc.seeds = parse_seeds(seed_flag);
    validate(rc);
    const std::filesystem::path out_dir = rc.output_dir;

    if (run_cmd->parsed()) {
      if (rc.policies.size() != 1) throw ConfigError("run takes exactly one policy; use compare for several");
      std::vector<RunJob> work;
      for (auto seed : rc.seeds) work.push_back({rc.policies.front(), seed});
      auto results = run_jobs(rc, work, common.jobs);
      for (std::size_t i = 0; i < results.size(); ++i) {
        if (results[i].error) std::rethrow_exception(results[i].error);
      }
      for (std::size_t i = 0; i < results.size(); ++i) {
        const auto dir = run_dir(out_dir, work[i].policy, work[i].seed);
        write_run_outputs(rc, dir, results[i].result);
        out << "wrote " << dir.string() << "\n";
      }
      return kExitOk;
    }

    // compare
    std::vector<RunJob> work;
    for (auto seed : rc.seeds) {
      for (auto policy : rc.policies) work.push_back({policy, seed});
    }
    auto results = run_jobs(rc, work, common.jobs);
    for (const auto& r : results) {
      if (r.error) std::rethrow_exception(r.error);
    }
    std::vector<ComparisonReport> reports;
    std::string csv(kComparisonCsvHeader);
    for (std::size_t s = 0; s < rc.seeds.size(); ++s) {
      std::vector<std::pair<Policy, Metrics>> runs;
      for (std::size_t p = 0; p < rc.policies.size(); ++p) {
        const auto i = s * rc.policies.size() + p;
        write_run_outputs(rc, run_dir(out_dir, work[i].policy, work[i].seed), results[i].result);
        runs.emplace_back(work[i].policy, results[i].result.metrics);
      }
      auto report = compare(runs);
      write_file_atomic(out_dir / ("comparison-seed" + std::to_string(rc.seeds[s]) + ".json"),
                        comparison_to_json(report).dump(2) + "\n");
      csv += comparison_csv_rows(report);
      reports.push_back(std::move(report));
    }
    write_file_atomic(out_dir / "comparison.csv", csv);
    write_file_atomic(out_dir / "summary.json", detail::aggregate_json(reports).dump(2) + "\n");
    out << "wrote " << work.size() << " runs and " << reports.size() << " comparison reports to " << out_dir.string()
        << "\n";
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const InvariantViolation& e) {
    err << "invariant violated: " << e.name() << "\n  " << e.what() << "\n";
    return kExitInvariant;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace pedf
