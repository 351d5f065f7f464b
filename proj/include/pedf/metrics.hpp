#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pedf/forwarding.hpp"

namespace pedf {

inline constexpr int kSchemaVersion = 1;

struct DelaySummary {
  double mean_ms = 0.0;
  double p50_ms = 0.0;
  double p95_ms = 0.0;
  double max_ms = 0.0;
};

// Nearest-rank percentiles over a sample; all zero for an empty sample.
inline DelaySummary summarize_delays(std::vector<double> delays) {
  DelaySummary s;
  if (delays.empty()) return s;
  std::sort(delays.begin(), delays.end());
  double sum = 0.0;
  for (double d : delays) sum += d;
  const auto rank = [&](double q) {
    auto k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(delays.size())));
    return delays[std::clamp<std::size_t>(k, 1, delays.size()) - 1];
  };
  s.mean_ms = sum / static_cast<double>(delays.size());
  s.p50_ms = rank(0.50);
  s.p95_ms = rank(0.95);
  s.max_ms = delays.back();
  return s;
}

struct PriorityStats {
  std::uint64_t injected = 0;
  std::uint64_t delivered = 0;
  std::array<std::uint64_t, kDropReasonCount> dropped_by_reason{};
  std::vector<double> delays_ms;  // one entry per delivered packet

  std::uint64_t dropped() const {
    std::uint64_t n = 0;
    for (auto d : dropped_by_reason) n += d;
    return n;
  }
  std::uint64_t in_flight() const { return injected - delivered - dropped(); }
  double delivery_ratio() const {
    return injected ? static_cast<double>(delivered) / static_cast<double>(injected) : 0.0;
  }
  DelaySummary delay() const { return summarize_delays(delays_ms); }
};

struct NodeStats {
  std::string label;
  double initial_level = 100.0;
  double final_level = 100.0;
  std::optional<double> death_ms;
  std::uint32_t revivals = 0;
  std::uint64_t tx = 0;
  std::uint64_t rx = 0;
  std::uint64_t reports_sent = 0;
  double replenished = 0.0;  // percent actually added (after the cap)
  double idle_drained = 0.0;
  std::vector<double> level_series;  // sampled at Metrics::sample_times_ms
};

struct Metrics {
  int schema_version = kSchemaVersion;
  std::string policy;
  std::uint64_t seed = 0;
  std::string fingerprint;  // identifies topology, parameters, workload, horizon and seed
  double horizon_ms = 0.0;

  std::array<PriorityStats, 4> per_priority{};  // index 0 is priority 1
  PriorityStats invalid_priority;               // packets injected with a corrupt header

  std::vector<double> sample_times_ms;
  std::vector<NodeStats> nodes;

  std::optional<double> first_death_ms;
  std::vector<NodeId> best_path;  // static minimum-delay route of the primary flow
  std::optional<double> best_path_first_death_ms;  // first death among its relays
  std::array<std::optional<double>, 4> best_path_unusable_ms{};  // per priority

  double residual_mean = 0.0;
  double residual_stddev = 0.0;  // population std of final levels across nodes

  std::uint64_t decisions = 0;
  std::uint64_t invariant_checks = 0;

  PriorityStats totals() const {
    PriorityStats t;
    const auto add = [&t](const PriorityStats& s) {
      t.injected += s.injected;
      t.delivered += s.delivered;
      for (std::size_t i = 0; i < kDropReasonCount; ++i) t.dropped_by_reason[i] += s.dropped_by_reason[i];
      t.delays_ms.insert(t.delays_ms.end(), s.delays_ms.begin(), s.delays_ms.end());
    };
    for (const auto& s : per_priority) add(s);
    add(invalid_priority);
    return t;
  }
};

inline double population_stddev(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  return std::sqrt(var / static_cast<double>(xs.size()));
}

// Side-by-side view of runs that share topology, workload and seed.
struct ComparisonColumn {
  std::string policy;
  std::array<DelaySummary, 4> delay{};
  std::array<double, 4> delivery_ratio{};
  std::array<std::uint64_t, 4> injected{};
  std::optional<double> first_death_ms;
  std::optional<double> best_path_first_death_ms;
  std::array<std::optional<double>, 4> best_path_unusable_ms{};
  double residual_stddev = 0.0;
  double residual_mean = 0.0;
};

struct ComparisonReport {
  int schema_version = kSchemaVersion;
  std::string fingerprint;
  std::uint64_t seed = 0;
  double horizon_ms = 0.0;
  std::vector<ComparisonColumn> columns;
};

inline ComparisonReport compare(const std::vector<std::pair<Policy, Metrics>>& runs) {
  if (runs.empty()) throw std::invalid_argument("compare needs at least one run");
  ComparisonReport report;
  report.fingerprint = runs.front().second.fingerprint;
  report.seed = runs.front().second.seed;
  report.horizon_ms = runs.front().second.horizon_ms;
  for (const auto& [policy, m] : runs) {
    if (m.fingerprint != report.fingerprint) {
      throw std::invalid_argument("runs do not share topology, workload and seed (" + m.fingerprint +
                                  " vs " + report.fingerprint + ")");
    }
    ComparisonColumn col;
    col.policy = std::string(to_string(policy));
    for (std::size_t p = 0; p < 4; ++p) {
      col.delay[p] = m.per_priority[p].delay();
      col.delivery_ratio[p] = m.per_priority[p].delivery_ratio();
      col.injected[p] = m.per_priority[p].injected;
      col.best_path_unusable_ms[p] = m.best_path_unusable_ms[p];
    }
    col.first_death_ms = m.first_death_ms;
    col.best_path_first_death_ms = m.best_path_first_death_ms;
    col.residual_stddev = m.residual_stddev;
    col.residual_mean = m.residual_mean;
    report.columns.push_back(std::move(col));
  }
  return report;
}

}  // namespace pedf
