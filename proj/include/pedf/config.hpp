#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "pedf/engine.hpp"
#include "pedf/scenarios.hpp"

namespace pedf {

using json = nlohmann::ordered_json;

// Configuration problem detected before any event runs. Maps to exit status 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TopologySource {
  std::string scenario;  // built-in name, or empty
  std::string file;      // path to a topology/config JSON, or empty
  bool inline_spec = false;
};

struct RunConfig {
  TopologySource source;
  Topology topology;
  SimConfig sim;
  std::vector<Policy> policies{Policy::PEDF};
  std::vector<std::uint64_t> seeds{1};
  std::string output_dir = "out";
};

// "7", "1..50" or "1,4,9".
inline std::vector<std::uint64_t> parse_seeds(std::string_view text) {
  const auto num = [&](std::string_view s) {
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || p != s.data() + s.size()) {
      throw ConfigError("seeds: cannot parse '" + std::string(text) + "'");
    }
    return v;
  };
  std::vector<std::uint64_t> out;
  if (auto dots = text.find(".."); dots != std::string_view::npos) {
    const auto lo = num(text.substr(0, dots));
    const auto hi = num(text.substr(dots + 2));
    if (hi < lo) throw ConfigError("seeds: empty range '" + std::string(text) + "'");
    for (auto s = lo; s <= hi; ++s) out.push_back(s);
    return out;
  }
  std::size_t start = 0;
  while (start <= text.size()) {
    auto comma = text.find(',', start);
    if (comma == std::string_view::npos) comma = text.size();
    out.push_back(num(text.substr(start, comma - start)));
    start = comma + 1;
  }
  return out;
}

inline std::vector<Policy> parse_policies(std::string_view text) {
  std::vector<Policy> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto comma = text.find(',', start);
    if (comma == std::string_view::npos) comma = text.size();
    try {
      out.push_back(parse_policy(text.substr(start, comma - start)));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("policies: ") + e.what());
    }
    start = comma + 1;
  }
  return out;
}

namespace detail {

inline void reject_unknown_keys(const json& obj, std::string_view where, std::initializer_list<std::string_view> keys) {
  if (!obj.is_object()) throw ConfigError(std::string(where) + ": expected an object");
  for (const auto& [k, _] : obj.items()) {
    bool known = false;
    for (auto key : keys) known = known || key == k;
    if (!known) throw ConfigError(std::string(where) + ": unknown field '" + k + "'");
  }
}

template <typename T>
T get_field(const json& obj, std::string_view where, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string(where) + "." + key + ": wrong type");
  }
}

inline NodeId node_ref(const Topology& topo, const json& ref, const std::string& where) {
  if (ref.is_string()) {
    if (auto id = topo.find(ref.get<std::string>())) return *id;
    throw ConfigError(where + ": unknown node '" + ref.get<std::string>() + "'");
  }
  if (ref.is_number_unsigned() && ref.get<std::uint64_t>() < topo.size()) {
    return static_cast<NodeId>(ref.get<std::uint64_t>());
  }
  throw ConfigError(where + ": unknown node " + ref.dump());
}

inline NodeRole parse_role(const std::string& s, const std::string& where) {
  if (s == "relay") return NodeRole::Relay;
  if (s == "source") return NodeRole::Source;
  if (s == "destination") return NodeRole::Destination;
  throw ConfigError(where + ": unknown role '" + s + "'");
}

}  // namespace detail

// Topology document: {"nodes": [{"label", "role"}], "links": [{"from", "to",
// "delay_ms", "bidirectional"}]}. Link endpoints are labels or indices.
inline Topology topology_from_json(const json& doc) {
  detail::reject_unknown_keys(doc, "topology", {"nodes", "links", "description"});
  if (!doc.contains("nodes") || !doc["nodes"].is_array() || doc["nodes"].empty()) {
    throw ConfigError("topology.nodes: expected a non-empty array");
  }
  Topology topo;
  for (std::size_t i = 0; i < doc["nodes"].size(); ++i) {
    const auto& node = doc["nodes"][i];
    const std::string where = "topology.nodes[" + std::to_string(i) + "]";
    detail::reject_unknown_keys(node, where, {"label", "role"});
    auto label = detail::get_field<std::string>(node, where, "label", std::to_string(i));
    if (label.empty() || label.find_first_of(",\"\n\r;=") != std::string::npos) {
      throw ConfigError(where + ".label: must be non-empty without , \" ; = or newlines");
    }
    const auto role = detail::parse_role(detail::get_field<std::string>(node, where, "role", "relay"), where + ".role");
    try {
      topo.add_node(label, role);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }
  const json links = doc.value("links", json::array());
  if (!links.is_array()) throw ConfigError("topology.links: expected an array");
  for (std::size_t i = 0; i < links.size(); ++i) {
    const auto& link = links[i];
    const std::string where = "topology.links[" + std::to_string(i) + "]";
    detail::reject_unknown_keys(link, where, {"from", "to", "delay_ms", "bidirectional"});
    if (!link.contains("from") || !link.contains("to") || !link.contains("delay_ms")) {
      throw ConfigError(where + ": needs from, to and delay_ms");
    }
    const auto from = detail::node_ref(topo, link["from"], where + ".from");
    const auto to = detail::node_ref(topo, link["to"], where + ".to");
    const auto delay = detail::get_field<double>(link, where, "delay_ms", 0.0);
    try {
      if (detail::get_field<bool>(link, where, "bidirectional", true)) {
        topo.add_bidirectional(from, to, delay);
      } else {
        topo.add_link(from, to, delay);
      }
    } catch (const std::exception& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }
  return topo;
}

// Emits links with a reverse twin of equal delay once, as bidirectional.
inline json topology_to_json(const Topology& topo) {
  json doc;
  doc["nodes"] = json::array();
  for (NodeId n = 0; n < topo.size(); ++n) {
    doc["nodes"].push_back({{"label", topo.label(n)}, {"role", std::string(to_string(topo.role(n)))}});
  }
  doc["links"] = json::array();
  std::set<std::pair<NodeId, NodeId>> emitted;
  for (const auto& l : topo.links()) {
    const auto back = topo.link_delay(l.to, l.from);
    const bool twin = back && *back == l.delay_ms;
    if (twin && emitted.contains({l.to, l.from})) continue;
    emitted.insert({l.from, l.to});
    doc["links"].push_back({{"from", topo.label(l.from)},
                            {"to", topo.label(l.to)},
                            {"delay_ms", l.delay_ms},
                            {"bidirectional", twin}});
  }
  return doc;
}

namespace detail {

inline Topology load_topology(const json& spec, TopologySource& source, const std::filesystem::path& base_dir);

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path.string() + "' is not valid JSON: " + e.what());
  }
}

inline Topology load_topology(const json& spec, TopologySource& source, const std::filesystem::path& base_dir) {
  if (spec.is_string()) {
    source.scenario = spec.get<std::string>();
    try {
      return build_named_scenario(source.scenario);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("topology: ") + e.what());
    }
  }
  if (spec.is_object() && spec.contains("scenario")) {
    reject_unknown_keys(spec, "topology", {"scenario"});
    return load_topology(spec["scenario"], source, base_dir);
  }
  if (spec.is_object() && spec.contains("file")) {
    reject_unknown_keys(spec, "topology", {"file"});
    auto path = std::filesystem::path(spec["file"].get<std::string>());
    if (path.is_relative()) path = base_dir / path;
    source.file = path.string();
    auto doc = read_json_file(path);
    return topology_from_json(doc.contains("topology") ? doc["topology"] : doc);
  }
  source.inline_spec = true;
  return topology_from_json(spec);
}

inline std::array<double, 4> parse_mix(const json& v) {
  std::array<double, 4> mix{};
  if (!v.is_array() || v.size() != 4) throw ConfigError("workload.priority_mix: expected 4 weights");
  for (std::size_t i = 0; i < 4; ++i) {
    if (!v[i].is_number()) throw ConfigError("workload.priority_mix: weights must be numbers");
    mix[i] = v[i].get<double>();
  }
  return mix;
}

}  // namespace detail

// Parses a run configuration document. Relative file references resolve
// against base_dir. Every field is validated; errors name the field.
inline RunConfig parse_run_config(const json& doc, const std::filesystem::path& base_dir = ".") {
  using detail::get_field;
  detail::reject_unknown_keys(doc, "config",
                              {"schema_version", "description", "topology", "initial_levels", "energy", "reporting",
                               "workload", "engine", "policies", "horizon_s", "seeds", "output_dir", "rng"});
  if (get_field<int>(doc, "config", "schema_version", kSchemaVersion) != kSchemaVersion) {
    throw ConfigError("schema_version: unsupported (expected " + std::to_string(kSchemaVersion) + ")");
  }
  RunConfig rc;
  if (!doc.contains("topology")) throw ConfigError("topology: missing");
  rc.topology = detail::load_topology(doc["topology"], rc.source, base_dir);
  const auto& topo = rc.topology;
  auto& sim = rc.sim;

  if (doc.contains("initial_levels")) {
    const auto& levels = doc["initial_levels"];
    if (!levels.is_object()) throw ConfigError("initial_levels: expected an object of label -> percent");
    sim.initial_levels.assign(topo.size(), 100.0);
    for (const auto& [label, v] : levels.items()) {
      const auto id = detail::node_ref(topo, json(label), "initial_levels");
      if (!v.is_number() || v.get<double>() < 0.0 || v.get<double>() > 100.0) {
        throw ConfigError("initial_levels." + label + ": must be a number in [0,100]");
      }
      sim.initial_levels[id] = v.get<double>();
    }
  }

  if (doc.contains("energy")) {
    const auto& e = doc["energy"];
    detail::reject_unknown_keys(e, "energy", {"tx_cost", "rx_cost", "report_cost", "idle_drain", "replenish_rate",
                                              "hysteresis", "capacity_j"});
    auto& p = sim.energy;
    p.tx_cost = get_field(e, "energy", "tx_cost", p.tx_cost);
    p.rx_cost = get_field(e, "energy", "rx_cost", p.rx_cost);
    p.report_cost = get_field(e, "energy", "report_cost", p.report_cost);
    p.idle_drain = get_field(e, "energy", "idle_drain", p.idle_drain);
    p.replenish_rate = get_field(e, "energy", "replenish_rate", p.replenish_rate);
    p.hysteresis = get_field(e, "energy", "hysteresis", p.hysteresis);
    p.capacity_j = get_field(e, "energy", "capacity_j", p.capacity_j);
  }

  if (doc.contains("reporting")) {
    const auto& r = doc["reporting"];
    detail::reject_unknown_keys(r, "reporting", {"latency_ms"});
    if (r.contains("latency_ms")) {
      const auto& l = r["latency_ms"];
      if (l.is_string() && l.get<std::string>() == "link") {
        sim.reporting.mode = ReportingParams::Latency::LinkDelay;
      } else if (l.is_number() && l.get<double>() >= 0.0) {
        const double v = l.get<double>();
        sim.reporting.mode = v == 0.0 ? ReportingParams::Latency::Zero : ReportingParams::Latency::Fixed;
        sim.reporting.fixed_ms = v;
      } else {
        throw ConfigError("reporting.latency_ms: expected a number >= 0 or \"link\"");
      }
    }
  }

  if (doc.contains("workload")) {
    const auto& w = doc["workload"];
    detail::reject_unknown_keys(w, "workload", {"rate", "priority_mix", "arrival", "pairs", "start_ms", "injections"});
    auto& wl = sim.workload;
    wl.rate = get_field(w, "workload", "rate", wl.rate);
    if (w.contains("priority_mix")) wl.priority_mix = detail::parse_mix(w["priority_mix"]);
    const auto arrival = get_field<std::string>(w, "workload", "arrival", "periodic");
    if (arrival == "periodic") {
      wl.arrival = Workload::Arrival::Periodic;
    } else if (arrival == "poisson") {
      wl.arrival = Workload::Arrival::Poisson;
    } else {
      throw ConfigError("workload.arrival: expected \"periodic\" or \"poisson\"");
    }
    if (w.contains("pairs")) {
      if (!w["pairs"].is_array()) throw ConfigError("workload.pairs: expected an array of [src, dst]");
      for (const auto& pr : w["pairs"]) {
        if (!pr.is_array() || pr.size() != 2) throw ConfigError("workload.pairs: expected [src, dst] entries");
        wl.pairs.emplace_back(detail::node_ref(topo, pr[0], "workload.pairs"),
                              detail::node_ref(topo, pr[1], "workload.pairs"));
      }
    }
    wl.start_ms = get_field(w, "workload", "start_ms", wl.start_ms);
    if (w.contains("injections")) {
      if (!w["injections"].is_array()) throw ConfigError("workload.injections: expected an array");
      for (std::size_t i = 0; i < w["injections"].size(); ++i) {
        const auto& in = w["injections"][i];
        const std::string where = "workload.injections[" + std::to_string(i) + "]";
        detail::reject_unknown_keys(in, where, {"time_ms", "src", "dst", "priority", "urgency"});
        if (!in.contains("src") || !in.contains("dst")) throw ConfigError(where + ": needs src and dst");
        Injection inj;
        inj.time_ms = get_field(in, where, "time_ms", 0.0);
        inj.src = detail::node_ref(topo, in["src"], where + ".src");
        inj.dst = detail::node_ref(topo, in["dst"], where + ".dst");
        if (in.contains("urgency")) {
          try {
            inj.priority = assign_priority(get_field<std::string>(in, where, "urgency", "")).value;
          } catch (const std::invalid_argument& e) {
            throw ConfigError(where + ".urgency: " + e.what());
          }
        } else {
          inj.priority = get_field(in, where, "priority", 4);
        }
        wl.injections.push_back(inj);
      }
    }
  }

  if (doc.contains("engine")) {
    const auto& g = doc["engine"];
    detail::reject_unknown_keys(g, "engine", {"retry_budget", "replenish_interval_ms", "hop_limit", "processing_ms",
                                              "sample_interval_ms", "check_invariants", "record_trace"});
    auto& e = sim.engine;
    e.retry_budget = get_field(g, "engine", "retry_budget", e.retry_budget);
    e.replenish_interval_ms = get_field(g, "engine", "replenish_interval_ms", e.replenish_interval_ms);
    if (g.contains("hop_limit") && !g["hop_limit"].is_null()) {
      e.hop_limit = get_field<std::uint32_t>(g, "engine", "hop_limit", 0);
    }
    e.processing_ms = get_field(g, "engine", "processing_ms", e.processing_ms);
    e.sample_interval_ms = get_field(g, "engine", "sample_interval_ms", e.sample_interval_ms);
    e.check_invariants = get_field(g, "engine", "check_invariants", e.check_invariants);
    e.record_trace = get_field(g, "engine", "record_trace", e.record_trace);
  }

  if (doc.contains("policies")) {
    const auto& p = doc["policies"];
    rc.policies.clear();
    if (p.is_string()) {
      rc.policies = parse_policies(p.get<std::string>());
    } else if (p.is_array() && !p.empty()) {
      for (const auto& v : p) {
        if (!v.is_string()) throw ConfigError("policies: expected policy names");
        try {
          rc.policies.push_back(parse_policy(v.get<std::string>()));
        } catch (const std::invalid_argument& e) {
          throw ConfigError(std::string("policies: ") + e.what());
        }
      }
    } else {
      throw ConfigError("policies: expected a non-empty list");
    }
  }
  sim.horizon_s = get_field(doc, "config", "horizon_s", sim.horizon_s);
  if (doc.contains("seeds")) {
    const auto& s = doc["seeds"];
    if (s.is_number_unsigned()) {
      rc.seeds = {s.get<std::uint64_t>()};
    } else if (s.is_string()) {
      rc.seeds = parse_seeds(s.get<std::string>());
    } else if (s.is_array() && !s.empty()) {
      rc.seeds.clear();
      for (const auto& v : s) {
        if (!v.is_number_unsigned()) throw ConfigError("seeds: expected non-negative integers");
        rc.seeds.push_back(v.get<std::uint64_t>());
      }
    } else {
      throw ConfigError("seeds: expected an integer, a list, or a range string");
    }
  }
  rc.output_dir = get_field(doc, "config", "output_dir", rc.output_dir);
  return rc;
}

// Full validation, including the engine's own checks. Throws ConfigError.
inline void validate(const RunConfig& rc) {
  if (rc.policies.empty()) throw ConfigError("policies: empty");
  if (rc.seeds.empty()) throw ConfigError("seeds: empty");
  const auto mix = rc.sim.workload.priority_mix;
  double sum = 0.0;
  for (double v : mix) sum += v;
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ConfigError("workload.priority_mix: weights sum to " + std::to_string(sum) + ", expected 1");
  }
  try {
    validate_config(rc.topology, rc.sim);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  auto doc = detail::read_json_file(path);
  return parse_run_config(doc, path.parent_path());
}

// Effective configuration with every default filled in; parsing it back
// reproduces the run exactly.
inline json effective_config_json(const RunConfig& rc) {
  const auto& sim = rc.sim;
  const auto& topo = rc.topology;
  json doc;
  doc["schema_version"] = kSchemaVersion;
  if (!rc.source.scenario.empty()) doc["description"] = "built-in scenario " + rc.source.scenario;
  doc["topology"] = topology_to_json(topo);
  json levels = json::object();
  for (NodeId n = 0; n < topo.size(); ++n) {
    levels[topo.label(n)] = sim.initial_levels.empty() ? 100.0 : sim.initial_levels[n];
  }
  doc["initial_levels"] = levels;
  const auto& e = sim.energy;
  doc["energy"] = {{"tx_cost", e.tx_cost},
                   {"rx_cost", e.rx_cost},
                   {"report_cost", e.report_cost},
                   {"idle_drain", e.idle_drain},
                   {"replenish_rate", e.replenish_rate},
                   {"hysteresis", e.hysteresis},
                   {"capacity_j", e.capacity_j}};
  json latency;
  switch (sim.reporting.mode) {
    case ReportingParams::Latency::Zero: latency = 0.0; break;
    case ReportingParams::Latency::Fixed: latency = sim.reporting.fixed_ms; break;
    case ReportingParams::Latency::LinkDelay: latency = "link"; break;
  }
  doc["reporting"] = {{"latency_ms", latency}};
  const auto& w = sim.workload;
  json pairs = json::array();
  for (auto [s, d] : w.pairs) pairs.push_back({topo.label(s), topo.label(d)});
  json injections = json::array();
  for (const auto& in : w.injections) {
    injections.push_back(
        {{"time_ms", in.time_ms}, {"src", topo.label(in.src)}, {"dst", topo.label(in.dst)}, {"priority", in.priority}});
  }
  doc["workload"] = {{"rate", w.rate},
                     {"priority_mix", w.priority_mix},
                     {"arrival", w.arrival == Workload::Arrival::Periodic ? "periodic" : "poisson"},
                     {"pairs", pairs},
                     {"start_ms", w.start_ms},
                     {"injections", injections}};
  const auto& g = sim.engine;
  doc["engine"] = {{"retry_budget", g.retry_budget},
                   {"replenish_interval_ms", g.replenish_interval_ms},
                   {"hop_limit", g.hop_limit.value_or(static_cast<std::uint32_t>(2 * topo.size()))},
                   {"processing_ms", g.processing_ms},
                   {"sample_interval_ms", g.sample_interval_ms},
                   {"check_invariants", g.check_invariants},
                   {"record_trace", g.record_trace}};
  json policies = json::array();
  for (auto p : rc.policies) policies.push_back(std::string(to_string(p)));
  doc["policies"] = policies;
  doc["horizon_s"] = sim.horizon_s;
  doc["seeds"] = rc.seeds;
  doc["output_dir"] = rc.output_dir;
  doc["rng"] = std::string(Rng::kAlgorithm);
  return doc;
}

// --- result documents ------------------------------------------------------

namespace detail {
inline json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

inline json delay_json(const DelaySummary& d) {
  return {{"mean_ms", d.mean_ms}, {"p50_ms", d.p50_ms}, {"p95_ms", d.p95_ms}, {"max_ms", d.max_ms}};
}

inline json stats_json(const PriorityStats& s) {
  json dropped = json::object();
  for (std::size_t r = 0; r < kDropReasonCount; ++r) {
    dropped[std::string(to_string(static_cast<DropReason>(r)))] = s.dropped_by_reason[r];
  }
  return {{"injected", s.injected},
          {"delivered", s.delivered},
          {"dropped", s.dropped()},
          {"dropped_by_reason", dropped},
          {"in_flight", s.in_flight()},
          {"delivery_ratio", s.delivery_ratio()},
          {"delay", delay_json(s.delay())}};
}
}  // namespace detail

inline json metrics_to_json(const Metrics& m, const Topology& topo) {
  json doc;
  doc["schema_version"] = m.schema_version;
  doc["policy"] = m.policy;
  doc["seed"] = m.seed;
  doc["fingerprint"] = m.fingerprint;
  doc["horizon_ms"] = m.horizon_ms;
  json per = json::object();
  for (std::size_t p = 0; p < 4; ++p) per[std::to_string(p + 1)] = detail::stats_json(m.per_priority[p]);
  doc["per_priority"] = per;
  doc["invalid_priority"] = detail::stats_json(m.invalid_priority);
  doc["totals"] = detail::stats_json(m.totals());
  json bp = json::array();
  for (NodeId n : m.best_path) bp.push_back(topo.label(n));
  json unusable = json::object();
  for (std::size_t p = 0; p < 4; ++p) unusable[std::to_string(p + 1)] = detail::opt(m.best_path_unusable_ms[p]);
  doc["network"] = {{"first_death_ms", detail::opt(m.first_death_ms)},
                    {"best_path", bp},
                    {"best_path_first_death_ms", detail::opt(m.best_path_first_death_ms)},
                    {"best_path_unusable_ms", unusable},
                    {"residual_mean", m.residual_mean},
                    {"residual_stddev", m.residual_stddev}};
  json nodes = json::array();
  for (const auto& n : m.nodes) {
    nodes.push_back({{"label", n.label},
                     {"initial_level", n.initial_level},
                     {"final_level", n.final_level},
                     {"death_ms", detail::opt(n.death_ms)},
                     {"revivals", n.revivals},
                     {"tx", n.tx},
                     {"rx", n.rx},
                     {"reports_sent", n.reports_sent},
                     {"replenished", n.replenished},
                     {"idle_drained", n.idle_drained}});
  }
  doc["nodes"] = nodes;
  doc["decisions"] = m.decisions;
  doc["invariant_checks"] = m.invariant_checks;
  return doc;
}

// Residual-energy time series, one row per sample, one column per node.
inline std::string energy_series_csv(const Metrics& m) {
  std::string out = "time_ms";
  for (const auto& n : m.nodes) out += "," + n.label;
  out += '\n';
  for (std::size_t i = 0; i < m.sample_times_ms.size(); ++i) {
    out += detail::fmt_ms(m.sample_times_ms[i]);
    for (const auto& n : m.nodes) out += "," + detail::fmt_level(n.level_series[i]);
    out += '\n';
  }
  return out;
}

inline json comparison_to_json(const ComparisonReport& r) {
  json doc;
  doc["schema_version"] = r.schema_version;
  doc["fingerprint"] = r.fingerprint;
  doc["seed"] = r.seed;
  doc["horizon_ms"] = r.horizon_ms;
  json cols = json::array();
  for (const auto& c : r.columns) {
    json per = json::object();
    for (std::size_t p = 0; p < 4; ++p) {
      per[std::to_string(p + 1)] = {{"injected", c.injected[p]},
                                    {"delivery_ratio", c.delivery_ratio[p]},
                                    {"delay", detail::delay_json(c.delay[p])},
                                    {"best_path_unusable_ms", detail::opt(c.best_path_unusable_ms[p])}};
    }
    cols.push_back({{"policy", c.policy},
                    {"per_priority", per},
                    {"first_death_ms", detail::opt(c.first_death_ms)},
                    {"best_path_first_death_ms", detail::opt(c.best_path_first_death_ms)},
                    {"residual_mean", c.residual_mean},
                    {"residual_stddev", c.residual_stddev}});
  }
  doc["columns"] = cols;
  return doc;
}

inline constexpr std::string_view kComparisonCsvHeader =
    "seed,policy,first_death_ms,best_path_first_death_ms,residual_stddev,residual_mean,"
    "delivery_p1,delivery_p2,delivery_p3,delivery_p4,mean_delay_p1,mean_delay_p2,mean_delay_p3,mean_delay_p4,"
    "unusable_p1,unusable_p2,unusable_p3,unusable_p4\n";

// Plot-ready rows; censored times (no event before the horizon) are empty.
inline std::string comparison_csv_rows(const ComparisonReport& r) {
  const auto opt = [](const std::optional<double>& v) { return v ? detail::fmt_ms(*v) : std::string(); };
  std::string out;
  for (const auto& c : r.columns) {
    out += std::to_string(r.seed) + "," + c.policy + "," + opt(c.first_death_ms) + "," +
           opt(c.best_path_first_death_ms) + "," + detail::fmt_level(c.residual_stddev) + "," +
           detail::fmt_level(c.residual_mean);
    for (double v : c.delivery_ratio) out += "," + detail::fmt_level(v);
    for (const auto& d : c.delay) out += "," + detail::fmt_ms(d.mean_ms);
    for (const auto& u : c.best_path_unusable_ms) out += "," + opt(u);
    out += '\n';
  }
  return out;
}

}  // namespace pedf
