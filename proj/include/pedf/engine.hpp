#pragma once

#include <algorithm>
#include <array>
#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "pedf/energy.hpp"
#include "pedf/forwarding.hpp"
#include "pedf/metrics.hpp"
#include "pedf/reporting.hpp"
#include "pedf/rng.hpp"
#include "pedf/topology.hpp"

namespace pedf {

// Raised when an inline run-time check fails; `name` identifies the invariant.
class InvariantViolation : public std::runtime_error {
 public:
  InvariantViolation(std::string name, const std::string& what)
      : std::runtime_error(name + ": " + what), name_(std::move(name)) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

struct ReportingParams {
  enum class Latency : std::uint8_t { Zero, Fixed, LinkDelay };
  Latency mode = Latency::Zero;
  double fixed_ms = 0.0;
};

// A packet with a scripted injection time; priority is taken verbatim so a
// corrupt header can be exercised.
struct Injection {
  double time_ms = 0.0;
  NodeId src = 0;
  NodeId dst = 0;
  int priority = 4;
};

struct Workload {
  enum class Arrival : std::uint8_t { Periodic, Poisson };

  double rate = 1.0;  // packets per simulated second; 0 disables generated traffic
  std::array<double, 4> priority_mix{0.25, 0.25, 0.25, 0.25};
  Arrival arrival = Arrival::Periodic;
  std::vector<std::pair<NodeId, NodeId>> pairs;  // empty: every source x destination
  double start_ms = 0.0;
  std::vector<Injection> injections;
};

struct EngineParams {
  std::uint32_t retry_budget = 3;
  double replenish_interval_ms = 100.0;
  std::optional<std::uint32_t> hop_limit;  // default 2 x node count
  double processing_ms = 0.0;
  double sample_interval_ms = 1000.0;
  bool check_invariants = true;
  bool record_trace = true;
};

struct SimConfig {
  EnergyParams energy;
  ReportingParams reporting;
  Workload workload;
  EngineParams engine;
  std::vector<double> initial_levels;  // per node; empty means all 100
  double horizon_s = 60.0;
};

struct RunResult {
  Metrics metrics;
  std::string trace;  // CSV, empty when tracing is disabled
};

namespace detail {

inline std::string fmt_ms(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

inline std::string fmt_level(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

// FNV-1a over a canonical text rendering of everything that shapes a run.
class Fingerprint {
 public:
  void add(std::string_view s) {
    for (unsigned char c : s) {
      hash_ ^= c;
      hash_ *= 0x100000001b3ULL;
    }
    hash_ ^= 0xff;
    hash_ *= 0x100000001b3ULL;
  }
  void add(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    add(std::string_view(buf));
  }
  void add(std::uint64_t v) { add(std::to_string(v)); }
  std::string hex() const {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, hash_);
    return buf;
  }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

inline std::string fingerprint(const Topology& topo, const SimConfig& cfg, std::uint64_t seed) {
  Fingerprint f;
  for (NodeId n = 0; n < topo.size(); ++n) {
    f.add(topo.label(n));
    f.add(to_string(topo.role(n)));
  }
  auto links = topo.links();
  std::sort(links.begin(), links.end(), [](const Link& a, const Link& b) {
    return std::pair{a.from, a.to} < std::pair{b.from, b.to};
  });
  for (const auto& l : links) {
    f.add(std::uint64_t{l.from});
    f.add(std::uint64_t{l.to});
    f.add(l.delay_ms);
  }
  const auto& e = cfg.energy;
  for (double v : {e.tx_cost, e.rx_cost, e.report_cost, e.idle_drain, e.replenish_rate, e.hysteresis,
                   e.capacity_j}) {
    f.add(v);
  }
  f.add(std::uint64_t{static_cast<std::uint8_t>(cfg.reporting.mode)});
  f.add(cfg.reporting.fixed_ms);
  const auto& w = cfg.workload;
  f.add(w.rate);
  for (double v : w.priority_mix) f.add(v);
  f.add(std::uint64_t{static_cast<std::uint8_t>(w.arrival)});
  for (auto [s, d] : w.pairs) {
    f.add(std::uint64_t{s});
    f.add(std::uint64_t{d});
  }
  f.add(w.start_ms);
  for (const auto& inj : w.injections) {
    f.add(inj.time_ms);
    f.add(std::uint64_t{inj.src});
    f.add(std::uint64_t{inj.dst});
    f.add(static_cast<std::uint64_t>(inj.priority));
  }
  const auto& g = cfg.engine;
  f.add(std::uint64_t{g.retry_budget});
  f.add(g.replenish_interval_ms);
  f.add(std::uint64_t{g.hop_limit.value_or(static_cast<std::uint32_t>(2 * topo.size()))});
  f.add(g.processing_ms);
  f.add(g.sample_interval_ms);
  for (NodeId n = 0; n < topo.size(); ++n) f.add(cfg.initial_levels.empty() ? 100.0 : cfg.initial_levels[n]);
  f.add(cfg.horizon_s);
  f.add(seed);
  return f.hex();
}

}  // namespace detail

// Checks everything run() needs before the first event; throws
// std::invalid_argument naming the offending field.
inline void validate_config(const Topology& topo, const SimConfig& cfg) {
  const auto fail = [](const std::string& msg) { throw std::invalid_argument(msg); };
  cfg.energy.validate();
  if (topo.size() == 0) fail("topology has no nodes");
  if (!(cfg.horizon_s > 0.0) || !std::isfinite(cfg.horizon_s)) fail("horizon must be > 0");
  if (!cfg.initial_levels.empty()) {
    if (cfg.initial_levels.size() != topo.size()) fail("initial_levels must have one entry per node");
    for (double v : cfg.initial_levels) {
      if (!(v >= 0.0 && v <= 100.0)) fail("initial_levels entries must lie in [0,100]");
    }
  }
  const auto& w = cfg.workload;
  if (!(w.rate >= 0.0) || !std::isfinite(w.rate)) fail("workload.rate must be >= 0");
  double mix = 0.0;
  for (double v : w.priority_mix) {
    if (!(v >= 0.0)) fail("workload.priority_mix weights must be >= 0");
    mix += v;
  }
  if (std::abs(mix - 1.0) > 1e-9) fail("workload.priority_mix must sum to 1 (got " + std::to_string(mix) + ")");
  if (!(w.start_ms >= 0.0)) fail("workload.start_ms must be >= 0");
  for (auto [s, d] : w.pairs) {
    if (!topo.contains(s) || !topo.contains(d)) fail("workload.pairs references an unknown node");
  }
  if (w.rate > 0.0 && w.pairs.empty() &&
      (topo.nodes_with_role(NodeRole::Source).empty() || topo.nodes_with_role(NodeRole::Destination).empty())) {
    fail("workload.pairs is empty and the topology has no source/destination roles");
  }
  for (const auto& inj : w.injections) {
    if (!topo.contains(inj.src) || !topo.contains(inj.dst)) fail("workload.injections references an unknown node");
    if (!(inj.time_ms >= 0.0)) fail("workload.injections time must be >= 0");
  }
  if (cfg.reporting.mode == ReportingParams::Latency::Fixed && !(cfg.reporting.fixed_ms > 0.0)) {
    fail("reporting.latency must be > 0 when fixed");
  }
  const auto& g = cfg.engine;
  if (!(g.replenish_interval_ms > 0.0)) fail("engine.replenish_interval_ms must be > 0");
  if (!(g.sample_interval_ms > 0.0)) fail("engine.sample_interval_ms must be > 0");
  if (!(g.processing_ms >= 0.0)) fail("engine.processing_ms must be >= 0");
  if (g.hop_limit && *g.hop_limit == 0) fail("engine.hop_limit must be > 0");
}

// Single-threaded discrete-event run of one policy. Events execute in
// (time, seq) order; seq is assigned when an event is scheduled.
class Simulation {
 public:
  Simulation(const Topology& topo, SimConfig cfg, Policy policy, std::uint64_t seed)
      : topo_(topo), cfg_(std::move(cfg)), policy_(policy), seed_(seed), rng_(seed) {
    validate_config(topo_, cfg_);
    hop_limit_ = cfg_.engine.hop_limit.value_or(static_cast<std::uint32_t>(2 * topo_.size()));
    horizon_ms_ = cfg_.horizon_s * 1000.0;
    const auto n = topo_.size();
    state_.resize(n);
    alive_.assign(n, true);
    last_change_ms_.assign(n, -1.0);
    report_seq_.assign(n, 0);
    for (NodeId i = 0; i < n; ++i) {
      if (!cfg_.initial_levels.empty()) state_[i] = EnergyState::at(cfg_.initial_levels[i]);
      alive_[i] = state_[i].alive;
      views_.emplace_back(topo_, i);
    }
    // Deployment-time knowledge: views start at each neighbor's initial band.
    for (NodeId i = 0; i < n; ++i) {
      for (const auto& a : topo_.neighbors(i)) views_[i].seed(a.node, state_[a.node].band());
    }
    pairs_ = cfg_.workload.pairs;
    if (pairs_.empty()) {
      for (NodeId s : topo_.nodes_with_role(NodeRole::Source)) {
        for (NodeId d : topo_.nodes_with_role(NodeRole::Destination)) pairs_.emplace_back(s, d);
      }
    }
    init_metrics();
  }

  RunResult run() {
    if (cfg_.engine.record_trace) {
      trace_ += "# pedf-trace schema_version=" + std::to_string(kSchemaVersion) + "\n";
      trace_ += "time_ms,event_kind,node,packet_id,priority,detail\n";
    }
    schedule(horizon_ms_, RunEnd{});
    schedule(0.0, Sample{});
    if (cfg_.energy.replenish_rate > 0.0 || cfg_.energy.idle_drain > 0.0) {
      schedule(cfg_.engine.replenish_interval_ms, ReplenishTick{});
    }
    for (const auto& inj : cfg_.workload.injections) schedule(inj.time_ms, Inject{inj});
    if (cfg_.workload.rate > 0.0 && !pairs_.empty()) schedule(cfg_.workload.start_ms, Inject{});

    while (!queue_.empty()) {
      Event ev = queue_.top();
      queue_.pop();
      now_ = ev.time;
      if (std::holds_alternative<RunEnd>(ev.kind)) break;
      std::visit([this](auto& k) { handle(k); }, ev.kind);
      check_conservation();
    }
    finish();
    return {std::move(metrics_), std::move(trace_)};
  }

  static constexpr std::string_view kReportEvent = "report";

 private:
  struct Inject {
    std::optional<Injection> scripted;
  };
  struct HopArrive {
    Packet packet;
    NodeId from;
    NodeId to;
  };
  struct ReportDeliver {
    ReportMessage msg;
  };
  struct ReplenishTick {};
  struct Sample {};
  struct RunEnd {};
  using Kind = std::variant<Inject, HopArrive, ReportDeliver, ReplenishTick, Sample, RunEnd>;

  struct Event {
    double time;
    std::uint64_t seq;
    Kind kind;
    bool operator>(const Event& o) const { return time != o.time ? time > o.time : seq > o.seq; }
  };

  void schedule(double t, Kind kind) {
    if (std::holds_alternative<HopArrive>(kind)) ++pending_hops_;
    queue_.push(Event{t, next_seq_++, std::move(kind)});
  }

  // --- trace ---------------------------------------------------------------

  void trace(std::string_view kind, std::optional<NodeId> node, const Packet* pkt, const std::string& detail) {
    if (!cfg_.engine.record_trace) return;
    trace_ += detail::fmt_ms(now_);
    trace_ += ',';
    trace_ += kind;
    trace_ += ',';
    if (node) trace_ += topo_.label(*node);
    trace_ += ',';
    if (pkt) trace_ += std::to_string(pkt->id);
    trace_ += ',';
    if (pkt) trace_ += std::to_string(pkt->priority.value);
    trace_ += ',';
    trace_ += detail;
    trace_ += '\n';
  }

  // --- metrics -------------------------------------------------------------

  void init_metrics() {
    metrics_.policy = std::string(to_string(policy_));
    metrics_.seed = seed_;
    metrics_.fingerprint = detail::fingerprint(topo_, cfg_, seed_);
    metrics_.horizon_ms = horizon_ms_;
    metrics_.nodes.resize(topo_.size());
    for (NodeId i = 0; i < topo_.size(); ++i) {
      metrics_.nodes[i].label = topo_.label(i);
      metrics_.nodes[i].initial_level = state_[i].level;
      if (!state_[i].alive) metrics_.nodes[i].death_ms = 0.0;
    }
    std::optional<std::pair<NodeId, NodeId>> primary;
    if (!pairs_.empty()) {
      primary = pairs_.front();
    } else if (!cfg_.workload.injections.empty()) {
      primary = std::pair{cfg_.workload.injections.front().src, cfg_.workload.injections.front().dst};
    }
    if (primary) {
      if (auto r = shortest_delay_path(topo_, primary->first, primary->second)) {
        metrics_.best_path = r->hops;
        for (std::size_t i = 1; i + 1 < r->hops.size(); ++i) best_path_relays_.push_back(r->hops[i]);
      }
    }
    for (NodeId r : best_path_relays_) track_best_path(r);
  }

  PriorityStats& stats_for(const Packet& pkt) {
    return pkt.priority.valid() ? metrics_.per_priority[pkt.priority.value - 1] : metrics_.invalid_priority;
  }

  void track_best_path(NodeId n) {
    if (std::find(best_path_relays_.begin(), best_path_relays_.end(), n) == best_path_relays_.end()) return;
    for (int p = 1; p <= 4; ++p) {
      auto& slot = metrics_.best_path_unusable_ms[p - 1];
      if (!slot && (!state_[n].alive || state_[n].level <= priority_threshold(Priority{p}))) slot = now_;
    }
    if (!state_[n].alive && !metrics_.best_path_first_death_ms) metrics_.best_path_first_death_ms = now_;
  }

  void check_conservation() {
    if (!cfg_.engine.check_invariants) return;
    const auto t = metrics_.totals();
    ++metrics_.invariant_checks;
    if (t.injected != t.delivered + t.dropped() + pending_hops_) {
      throw InvariantViolation("packet_conservation",
                               "injected " + std::to_string(t.injected) + " != delivered " +
                                   std::to_string(t.delivered) + " + dropped " + std::to_string(t.dropped()) +
                                   " + in-flight " + std::to_string(pending_hops_));
    }
  }

  void finish() {
    record_sample();
    std::vector<double> finals;
    for (NodeId i = 0; i < topo_.size(); ++i) {
      metrics_.nodes[i].final_level = state_[i].level;
      finals.push_back(state_[i].level);
    }
    double mean = 0.0;
    for (double v : finals) mean += v;
    metrics_.residual_mean = mean / static_cast<double>(finals.size());
    metrics_.residual_stddev = population_stddev(finals);
    trace("run_end", std::nullopt, nullptr, "in_flight=" + std::to_string(pending_hops_));
  }

  void record_sample() {
    metrics_.sample_times_ms.push_back(now_);
    for (NodeId i = 0; i < topo_.size(); ++i) metrics_.nodes[i].level_series.push_back(state_[i].level);
  }

  // --- energy --------------------------------------------------------------

  void set_state(NodeId n, const EnergyState& s) {
    if (cfg_.engine.check_invariants) {
      ++metrics_.invariant_checks;
      if (!(s.level >= 0.0 && s.level <= 100.0)) {
        throw InvariantViolation("energy_bounds", "node " + topo_.label(n) + " level " + std::to_string(s.level));
      }
    }
    state_[n] = s;
    alive_[n] = s.alive;
  }

  void debit(NodeId n, double amount) {
    if (!state_[n].alive || amount == 0.0) return;
    auto upd = consume(state_[n], amount);
    set_state(n, upd.state);
    on_crossings(n, upd.crossings);
  }

  void on_crossings(NodeId n, const std::vector<ThresholdCrossing>& crossings) {
    if (crossings.empty()) return;
    last_change_ms_[n] = now_;
    auto& stats = metrics_.nodes[n];
    for (const auto& c : crossings) {
      const bool down = c.direction == Direction::Down;
      if (c.threshold == 0.0) {
        if (down) {
          if (!metrics_.first_death_ms) metrics_.first_death_ms = now_;
          if (!stats.death_ms) stats.death_ms = now_;
          trace("death", n, nullptr, "level=" + detail::fmt_level(state_[n].level));
        } else {
          ++stats.revivals;
          trace("revive", n, nullptr, "level=" + detail::fmt_level(state_[n].level));
        }
        continue;
      }
      trace("crossing", n, nullptr,
            std::string(down ? "down=" : "up=") + std::to_string(static_cast<int>(c.threshold)) +
                ";level=" + detail::fmt_level(state_[n].level));
    }
    track_best_path(n);
    if (policy_ == Policy::PEDF && state_[n].alive) send_reports(n, crossings.back());
  }

  double report_latency(NodeId sender, NodeId receiver) const {
    switch (cfg_.reporting.mode) {
      case ReportingParams::Latency::Zero: return 0.0;
      case ReportingParams::Latency::Fixed: return cfg_.reporting.fixed_ms;
      case ReportingParams::Latency::LinkDelay: {
        if (auto d = topo_.link_delay(sender, receiver)) return *d;
        return *topo_.link_delay(receiver, sender);
      }
    }
    return 0.0;
  }

  // One round of power-status reports; costs accrue per message sent and any
  // crossing they cause is handled once the round is complete.
  void send_reports(NodeId n, const ThresholdCrossing& crossing) {
    auto msgs = on_threshold_crossing(topo_, n, crossing, now_, report_seq_[n]++);
    std::vector<ThresholdCrossing> caused;
    for (const auto& msg : msgs) {
      if (!state_[n].alive) break;
      ++metrics_.nodes[n].reports_sent;
      trace(kReportEvent, n, nullptr,
            "band=" + std::string(to_string(msg.reported_band)) + ";to=" + topo_.label(msg.receiver));
      const double latency = report_latency(n, msg.receiver);
      if (latency == 0.0) {
        views_[msg.receiver].apply(msg, now_);
      } else {
        schedule(now_ + latency, ReportDeliver{msg});
      }
      if (cfg_.energy.report_cost > 0.0) {
        auto upd = consume(state_[n], cfg_.energy.report_cost);
        set_state(n, upd.state);
        caused.insert(caused.end(), upd.crossings.begin(), upd.crossings.end());
      }
    }
    on_crossings(n, caused);
  }

  // --- decisions -----------------------------------------------------------

  ForwardDecision decide(NodeId node, const Packet& pkt) {
    ++metrics_.decisions;
    if (policy_ != Policy::PEDF) return baseline_decide(policy_, topo_, node, pkt, alive_);
    const auto& view = views_[node];
    auto d = pedf_decide(topo_, node, pkt, view, alive_);
    if (cfg_.engine.check_invariants) check_view(node, pkt, view, d);
    return d;
  }

  void check_view(NodeId node, const Packet& pkt, const NeighborEnergyView& view, const ForwardDecision& d) {
    ++metrics_.invariant_checks;
    if (d.is_forward() && !band_permits(view.band_of(d.next), pkt.priority)) {
      throw InvariantViolation("eligibility_safety", "priority " + std::to_string(pkt.priority.value) +
                                                         " forwarded to " + topo_.label(d.next) + " viewed as " +
                                                         std::string(to_string(view.band_of(d.next))));
    }
    if (cfg_.energy.hysteresis > 0.0) return;
    for (const auto& a : topo_.neighbors(node)) {
      if (!state_[a.node].alive) continue;
      const EnergyBand truth = state_[a.node].band();
      if (view.band_of(a.node) == truth) continue;
      const double bound = report_latency(a.node, node);
      if (bound == 0.0) {
        throw InvariantViolation("report_consistency", "node " + topo_.label(node) + " views " +
                                                           topo_.label(a.node) + " as " +
                                                           std::string(to_string(view.band_of(a.node))) +
                                                           " but it is " + std::string(to_string(truth)));
      }
      if (!(last_change_ms_[a.node] >= 0.0 && now_ - last_change_ms_[a.node] <= bound)) {
        throw InvariantViolation("report_freshness", "stale view of " + topo_.label(a.node) + " at " +
                                                         topo_.label(node) + " without a crossing in the last " +
                                                         detail::fmt_ms(bound) + " ms");
      }
    }
  }

  void trace_decision(NodeId node, const Packet& pkt, const ForwardDecision& d) {
    if (d.is_forward()) {
      trace("forward", node, &pkt, "next=" + topo_.label(d.next));
    } else {
      trace("refuse", node, &pkt, std::string(to_string(d.kind)));
    }
  }

  void drop(const Packet& pkt, NodeId where, DropReason reason) {
    ++stats_for(pkt).dropped_by_reason[static_cast<std::size_t>(reason)];
    trace("drop", where, &pkt, "reason=" + std::string(to_string(reason)));
  }

  void transmit(NodeId from, NodeId to, Packet pkt) {
    if (pkt.transmissions >= hop_limit_) {
      drop(pkt, from, DropReason::TtlExceeded);
      return;
    }
    if (cfg_.engine.check_invariants && pkt.visited(to)) {
      throw InvariantViolation("loop_freedom", "packet " + std::to_string(pkt.id) + " revisits " + topo_.label(to));
    }
    ++metrics_.nodes[from].tx;
    ++pkt.transmissions;
    const double delay = *topo_.link_delay(from, to) + cfg_.engine.processing_ms;
    debit(from, cfg_.energy.tx_cost);
    schedule(now_ + delay, HopArrive{std::move(pkt), from, to});
  }

  // Decides at `node` and sends, falling back to a retransmission request to
  // the previous hop when the node cannot forward.
  void route_from(NodeId node, Packet pkt) {
    const auto d = decide(node, pkt);
    trace_decision(node, pkt, d);
    if (d.is_forward()) {
      transmit(node, d.next, std::move(pkt));
      return;
    }
    if (pkt.hop_trace.size() < 2) {
      drop(pkt, node, d.kind == ForwardDecision::Kind::InvalidPriority ? DropReason::InvalidPriority
                                                                        : DropReason::Undeliverable);
      return;
    }
    const NodeId prev = pkt.hop_trace[pkt.hop_trace.size() - 2];
    trace("retransmit_request", node, &pkt, "to=" + topo_.label(prev));
    const auto retries = pkt.retries_remaining;
    auto outcome = handle_no_route(prev, std::move(pkt),
                                   [this](NodeId at, const Packet& p) { return decide(at, p); });
    if (retries > 0) trace_decision(prev, outcome.packet, outcome.decision);
    if (outcome.dropped) {
      drop(outcome.packet, prev, *outcome.dropped);
      return;
    }
    transmit(prev, outcome.decision.next, std::move(outcome.packet));
  }

  // --- handlers ------------------------------------------------------------

  void handle(Inject& ev) {
    Packet pkt;
    if (ev.scripted) {
      const auto& s = *ev.scripted;
      pkt = Packet::make(next_packet_id_++, s.src, s.dst, Priority{s.priority}, now_, cfg_.engine.retry_budget);
    } else {
      const auto [src, dst] = pairs_.size() == 1 ? pairs_.front() : pairs_[rng_.index(pairs_.size())];
      pkt = Packet::make(next_packet_id_++, src, dst, draw_priority(), now_, cfg_.engine.retry_budget);
      const auto& w = cfg_.workload;
      const double gap = w.arrival == Workload::Arrival::Periodic ? 1000.0 / w.rate
                                                                  : 1000.0 * rng_.exponential(w.rate);
      schedule(now_ + gap, Inject{});
    }
    ++stats_for(pkt).injected;
    trace("inject", pkt.src, &pkt, "dst=" + topo_.label(pkt.dst));
    if (pkt.src == pkt.dst) {
      deliver(pkt);
    } else if (!state_[pkt.src].alive) {
      drop(pkt, pkt.src, DropReason::SourceDead);
    } else {
      route_from(pkt.src, std::move(pkt));
    }
  }

  Priority draw_priority() {
    const double u = rng_.uniform();
    double acc = 0.0;
    const auto& mix = cfg_.workload.priority_mix;
    for (int p = 0; p < 4; ++p) {
      acc += mix[p];
      if (u < acc) return Priority{p + 1};
    }
    for (int p = 3; p >= 0; --p) {
      if (mix[p] > 0.0) return Priority{p + 1};
    }
    return Priority::less_important();
  }

  void deliver(const Packet& pkt) {
    auto& s = stats_for(pkt);
    ++s.delivered;
    const double delay = now_ - pkt.created_at_ms;
    s.delays_ms.push_back(delay);
    trace("deliver", pkt.dst, &pkt, "delay_ms=" + detail::fmt_ms(delay) + ";route=" + format_hops(topo_, pkt.hop_trace));
  }

  void handle(HopArrive& ev) {
    --pending_hops_;
    Packet pkt = std::move(ev.packet);
    const NodeId at = ev.to;
    pkt.hop_trace.push_back(at);
    if (!state_[at].alive) {
      drop(pkt, at, DropReason::NodeDead);
      return;
    }
    ++metrics_.nodes[at].rx;
    trace("arrive", at, &pkt, "from=" + topo_.label(ev.from));
    debit(at, cfg_.energy.rx_cost);
    if (at == pkt.dst) {
      deliver(pkt);
      return;
    }
    if (!state_[at].alive) {
      drop(pkt, at, DropReason::NodeDead);
      return;
    }
    route_from(at, std::move(pkt));
  }

  void handle(ReportDeliver& ev) {
    const bool applied = views_[ev.msg.receiver].apply(ev.msg, now_);
    trace("report_deliver", ev.msg.receiver, nullptr,
          "from=" + topo_.label(ev.msg.sender) + ";band=" + std::string(to_string(ev.msg.reported_band)) +
              ";applied=" + (applied ? "1" : "0"));
  }

  void handle(ReplenishTick&) {
    const double dt_s = cfg_.engine.replenish_interval_ms / 1000.0;
    for (NodeId n = 0; n < topo_.size(); ++n) {
      if (cfg_.energy.idle_drain > 0.0 && state_[n].alive) {
        const double before = state_[n].level;
        debit(n, cfg_.energy.idle_drain * dt_s);
        metrics_.nodes[n].idle_drained += before - state_[n].level;
      }
      if (cfg_.energy.replenish_rate > 0.0) {
        const double before = state_[n].level;
        auto upd = replenish(state_[n], dt_s, cfg_.energy);
        set_state(n, upd.state);
        metrics_.nodes[n].replenished += state_[n].level - before;
        on_crossings(n, upd.crossings);
      }
    }
    schedule(now_ + cfg_.engine.replenish_interval_ms, ReplenishTick{});
  }

  void handle(Sample&) {
    record_sample();
    schedule(now_ + cfg_.engine.sample_interval_ms, Sample{});
  }

  void handle(RunEnd&) {}

  const Topology& topo_;
  SimConfig cfg_;
  Policy policy_;
  std::uint64_t seed_;
  Rng rng_;
  std::uint32_t hop_limit_ = 0;
  double horizon_ms_ = 0.0;

  std::vector<EnergyState> state_;
  Liveness alive_;
  std::vector<NeighborEnergyView> views_;
  std::vector<double> last_change_ms_;
  std::vector<std::uint64_t> report_seq_;
  std::vector<std::pair<NodeId, NodeId>> pairs_;
  std::vector<NodeId> best_path_relays_;

  std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
  std::uint64_t next_seq_ = 0;
  std::uint64_t next_packet_id_ = 0;
  std::uint64_t pending_hops_ = 0;
  double now_ = 0.0;

  Metrics metrics_;
  std::string trace_;
};

inline RunResult run(const Topology& topo, const SimConfig& cfg, Policy policy, std::uint64_t seed) {
  return Simulation(topo, cfg, policy, seed).run();
}

}  // namespace pedf
