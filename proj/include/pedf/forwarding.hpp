#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pedf/energy.hpp"
#include "pedf/reporting.hpp"
#include "pedf/topology.hpp"

namespace pedf {

enum class UrgencyClass : std::uint8_t { Urgent, HighlyImportant, ModeratelyImportant, LessImportant };

inline Priority assign_priority(UrgencyClass urgency) {
  switch (urgency) {
    case UrgencyClass::Urgent: return Priority::urgent();
    case UrgencyClass::HighlyImportant: return Priority::highly_important();
    case UrgencyClass::ModeratelyImportant: return Priority::moderately_important();
    case UrgencyClass::LessImportant: return Priority::less_important();
  }
  throw std::invalid_argument("unknown urgency class");
}

inline Priority assign_priority(std::string_view label) {
  if (label == "Urgent") return assign_priority(UrgencyClass::Urgent);
  if (label == "HighlyImportant") return assign_priority(UrgencyClass::HighlyImportant);
  if (label == "ModeratelyImportant") return assign_priority(UrgencyClass::ModeratelyImportant);
  if (label == "LessImportant") return assign_priority(UrgencyClass::LessImportant);
  throw std::invalid_argument("unknown urgency class '" + std::string(label) + "'");
}

struct Packet {
  std::uint64_t id = 0;
  NodeId src = 0;
  NodeId dst = 0;
  Priority priority;
  double created_at_ms = 0.0;
  std::vector<NodeId> hop_trace;  // src first; the last entry holds the packet
  std::vector<NodeId> refused;    // nodes that sent a retransmission request
  std::uint32_t retries_remaining = 3;
  std::uint32_t transmissions = 0;

  static Packet make(std::uint64_t id, NodeId src, NodeId dst, Priority priority,
                     double created_at_ms = 0.0, std::uint32_t retries = 3) {
    return Packet{id, src, dst, priority, created_at_ms, {src}, {}, retries, 0};
  }

  NodeId holder() const { return hop_trace.back(); }
  bool visited(NodeId n) const {
    return std::find(hop_trace.begin(), hop_trace.end(), n) != hop_trace.end();
  }
};

struct ForwardDecision {
  enum class Kind : std::uint8_t { Forward, NoEligibleRoute, InvalidPriority };

  Kind kind = Kind::NoEligibleRoute;
  NodeId next = 0;  // meaningful for Forward only

  static ForwardDecision forward(NodeId n) { return {Kind::Forward, n}; }
  static ForwardDecision no_route() { return {Kind::NoEligibleRoute, 0}; }
  static ForwardDecision invalid_priority() { return {Kind::InvalidPriority, 0}; }

  bool is_forward() const { return kind == Kind::Forward; }
  bool operator==(const ForwardDecision&) const = default;
};

inline std::string_view to_string(ForwardDecision::Kind k) {
  switch (k) {
    case ForwardDecision::Kind::Forward: return "forward";
    case ForwardDecision::Kind::NoEligibleRoute: return "no_eligible_route";
    case ForwardDecision::Kind::InvalidPriority: return "invalid_priority";
  }
  return "?";
}

enum class Policy : std::uint8_t { PEDF, AlwaysBestPath, EnergyAgnosticGreedy };

inline std::string_view to_string(Policy p) {
  switch (p) {
    case Policy::PEDF: return "pedf";
    case Policy::AlwaysBestPath: return "best-path";
    case Policy::EnergyAgnosticGreedy: return "greedy";
  }
  return "?";
}

inline Policy parse_policy(std::string_view s) {
  if (s == "pedf") return Policy::PEDF;
  if (s == "best-path" || s == "always-best-path") return Policy::AlwaysBestPath;
  if (s == "greedy" || s == "energy-agnostic-greedy") return Policy::EnergyAgnosticGreedy;
  throw std::invalid_argument("unknown policy '" + std::string(s) + "'");
}

// True liveness per node id. A dead neighbor never acknowledges, so deciders
// can tell it apart from a merely depleted one.
using Liveness = std::vector<bool>;

namespace detail {

inline void check_decider(const Topology& topo, NodeId node, const Packet& pkt) {
  topo.check_member(node);
  if (pkt.hop_trace.empty() || pkt.holder() != node) {
    throw std::logic_error("node " + std::to_string(node) + " does not hold packet " +
                           std::to_string(pkt.id));
  }
  if (node == pkt.dst) throw std::logic_error("decision requested at the destination");
}

// Nodes a packet may not be sent through: visited, refused, or dead.
inline std::vector<bool> blocked_mask(const Topology& topo, const Packet& pkt,
                                      const Liveness& alive) {
  std::vector<bool> blocked(topo.size(), false);
  for (NodeId n : pkt.hop_trace) blocked[n] = true;
  for (NodeId n : pkt.refused) blocked[n] = true;
  for (std::size_t i = 0; i < topo.size() && i < alive.size(); ++i) {
    if (!alive[i]) blocked[i] = true;
  }
  return blocked;
}

// Delay of the cheapest continuation node -> n -> ... -> dst avoiding blocked.
inline std::optional<double> remaining_delay(const Topology& topo, const Adjacent& hop, NodeId dst,
                                             const std::vector<bool>& blocked) {
  if (hop.node == dst) return hop.delay_ms;
  auto tail = shortest_path_masked(topo, hop.node, dst, blocked);
  if (!tail) return std::nullopt;
  return hop.delay_ms + tail->total_delay_ms;
}

}  // namespace detail

// PEDF next-hop choice. A neighbor is eligible when it is alive, unvisited,
// has not refused this packet, its viewed band permits the packet's priority
// (level strictly above 0/25/50/75 for priorities 1..4), and the destination
// is reachable from it through unblocked nodes. The eligible neighbor with the
// least link delay plus remaining shortest delay wins; ties go to the smaller id.
inline ForwardDecision pedf_decide(const Topology& topo, NodeId node, const Packet& pkt,
                                   const NeighborEnergyView& view, const Liveness& alive = {}) {
  detail::check_decider(topo, node, pkt);
  if (!pkt.priority.valid()) return ForwardDecision::invalid_priority();

  const auto blocked = detail::blocked_mask(topo, pkt, alive);
  std::optional<NodeId> best;
  double best_delay = 0.0;
  for (const auto& hop : topo.neighbors(node)) {
    if (blocked[hop.node] || !band_permits(view.band_of(hop.node), pkt.priority)) continue;
    auto delay = detail::remaining_delay(topo, hop, pkt.dst, blocked);
    if (delay && (!best || *delay < best_delay)) {
      best = hop.node;
      best_delay = *delay;
    }
  }
  return best ? ForwardDecision::forward(*best) : ForwardDecision::no_route();
}

// Energy-agnostic comparison policies. AlwaysBestPath follows the minimum-delay
// route, stepping around dead or refusing nodes only. EnergyAgnosticGreedy
// hands off to the destination when adjacent, otherwise to the live neighbor
// with the shortest link that still reaches the destination.
inline ForwardDecision baseline_decide(Policy policy, const Topology& topo, NodeId node,
                                       const Packet& pkt, const Liveness& alive = {}) {
  detail::check_decider(topo, node, pkt);
  const auto blocked = detail::blocked_mask(topo, pkt, alive);
  switch (policy) {
    case Policy::AlwaysBestPath: {
      auto route = detail::shortest_path_masked(topo, node, pkt.dst, blocked);
      return route ? ForwardDecision::forward(route->hops[1]) : ForwardDecision::no_route();
    }
    case Policy::EnergyAgnosticGreedy: {
      if (!blocked[pkt.dst] && topo.link_delay(node, pkt.dst)) {
        return ForwardDecision::forward(pkt.dst);
      }
      std::optional<Adjacent> best;
      for (const auto& hop : topo.neighbors(node)) {
        if (blocked[hop.node]) continue;
        if (best && hop.delay_ms >= best->delay_ms) continue;
        if (detail::shortest_path_masked(topo, hop.node, pkt.dst, blocked)) best = hop;
      }
      return best ? ForwardDecision::forward(best->node) : ForwardDecision::no_route();
    }
    case Policy::PEDF: break;
  }
  throw std::invalid_argument("baseline_decide called with the PEDF policy");
}

enum class DropReason : std::uint8_t {
  Undeliverable,
  InvalidPriority,
  TtlExceeded,
  SourceDead,
  NodeDead,
};

inline constexpr std::size_t kDropReasonCount = 5;

inline std::string_view to_string(DropReason r) {
  switch (r) {
    case DropReason::Undeliverable: return "Undeliverable";
    case DropReason::InvalidPriority: return "InvalidPriority";
    case DropReason::TtlExceeded: return "TtlExceeded";
    case DropReason::SourceDead: return "SourceDead";
    case DropReason::NodeDead: return "NodeDead";
  }
  return "?";
}

struct RetransmissionOutcome {
  Packet packet;
  ForwardDecision decision;           // prev's re-decision; Forward unless dropped
  std::optional<DropReason> dropped;  // set when the packet is abandoned
};

// Recovery for a refusal at the packet's holder: the packet returns to the
// previous hop, which spends one retry, marks the refusing node ineligible and
// decides again. Exhausted retries, or a previous hop with nothing eligible,
// abandon the packet as Undeliverable. `decide(prev, packet)` is the policy's
// decision function.
template <typename Decide>
RetransmissionOutcome handle_no_route(NodeId prev, Packet pkt, Decide&& decide) {
  if (pkt.hop_trace.size() < 2 || pkt.hop_trace[pkt.hop_trace.size() - 2] != prev) {
    throw std::logic_error("retransmission requested from a node that is not the previous hop");
  }
  const NodeId refuser = pkt.holder();
  pkt.hop_trace.pop_back();
  if (std::find(pkt.refused.begin(), pkt.refused.end(), refuser) == pkt.refused.end()) {
    pkt.refused.push_back(refuser);
  }
  if (pkt.retries_remaining == 0) {
    return {std::move(pkt), ForwardDecision::no_route(), DropReason::Undeliverable};
  }
  --pkt.retries_remaining;
  ForwardDecision d = decide(prev, std::as_const(pkt));
  if (!d.is_forward()) {
    const auto reason = d.kind == ForwardDecision::Kind::InvalidPriority ? DropReason::InvalidPriority
                                                                         : DropReason::Undeliverable;
    return {std::move(pkt), d, reason};
  }
  return {std::move(pkt), d, std::nullopt};
}

}  // namespace pedf
