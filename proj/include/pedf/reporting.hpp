#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "pedf/energy.hpp"
#include "pedf/topology.hpp"

namespace pedf {

// Power-status notification from a node to one node that forwards through it.
// `seq` orders reports from one sender that share a timestamp.
struct ReportMessage {
  NodeId sender;
  NodeId receiver;
  EnergyBand reported_band;
  double sent_at_ms;
  std::uint64_t seq = 0;

  bool operator==(const ReportMessage&) const = default;
};

// One report per predecessor of `node` (every node that has `node` as a next
// hop), carrying the band the node holds after `crossing`. The caller debits
// report_cost for each message it actually sends.
inline std::vector<ReportMessage> on_threshold_crossing(const Topology& topo, NodeId node,
                                                        const ThresholdCrossing& crossing,
                                                        double clock_ms, std::uint64_t seq = 0) {
  std::vector<ReportMessage> out;
  const EnergyBand band = band_after(crossing);
  for (NodeId pred : topo.predecessors(node)) {
    out.push_back({node, pred, band, clock_ms, seq});
  }
  return out;
}

// A node's last-known band for each of its outgoing neighbors. Every entry
// starts at CaseIV: nodes are deployed fully charged.
class NeighborEnergyView {
 public:
  struct Entry {
    EnergyBand band = EnergyBand::CaseIV;
    double last_updated_ms = 0.0;
    double origin_sent_ms = -1.0;  // sent_at of the applied report, -1 before any
    std::uint64_t origin_seq = 0;
    bool operator==(const Entry&) const = default;
  };

  NeighborEnergyView() = default;

  NeighborEnergyView(const Topology& topo, NodeId owner) : owner_(owner) {
    for (const auto& a : topo.neighbors(owner)) entries_.emplace(a.node, Entry{});
  }

  NodeId owner() const { return owner_; }
  const std::map<NodeId, Entry>& entries() const { return entries_; }

  EnergyBand band_of(NodeId neighbor) const { return entry(neighbor).band; }

  const Entry& entry(NodeId neighbor) const {
    auto it = entries_.find(neighbor);
    if (it == entries_.end()) {
      throw std::out_of_range("node " + std::to_string(neighbor) + " is not a neighbor of " +
                              std::to_string(owner_));
    }
    return it->second;
  }

  // Sets an entry without a report, e.g. for deployment-time knowledge.
  void seed(NodeId neighbor, EnergyBand band) { mutable_entry(neighbor).band = band; }

  // Returns false when the message is older than the stored report.
  bool apply(const ReportMessage& msg, double arrival_ms) {
    if (arrival_ms < msg.sent_at_ms) {
      throw std::invalid_argument("report arrives before it was sent");
    }
    Entry& e = mutable_entry(msg.sender);
    if (msg.sent_at_ms < e.origin_sent_ms ||
        (msg.sent_at_ms == e.origin_sent_ms && msg.seq < e.origin_seq)) {
      return false;
    }
    if (msg.sent_at_ms == e.origin_sent_ms && msg.seq == e.origin_seq && msg.reported_band == e.band) {
      return false;  // duplicate
    }
    e = Entry{msg.reported_band, arrival_ms, msg.sent_at_ms, msg.seq};
    return true;
  }

  bool operator==(const NeighborEnergyView&) const = default;

 private:
  Entry& mutable_entry(NodeId neighbor) {
    auto it = entries_.find(neighbor);
    if (it == entries_.end()) {
      throw std::invalid_argument("report from node " + std::to_string(neighbor) +
                                  ", which is not a neighbor of " + std::to_string(owner_));
    }
    return it->second;
  }

  NodeId owner_ = 0;
  std::map<NodeId, Entry> entries_;
};

inline NeighborEnergyView apply_report(NeighborEnergyView view, const ReportMessage& msg,
                                       double arrival_ms) {
  view.apply(msg, arrival_ms);
  return view;
}

}  // namespace pedf
