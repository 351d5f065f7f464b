#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pedf {

using NodeId = std::uint32_t;

enum class NodeRole : std::uint8_t { Relay, Source, Destination };

inline std::string_view to_string(NodeRole role) {
  switch (role) {
    case NodeRole::Source: return "source";
    case NodeRole::Destination: return "destination";
    case NodeRole::Relay: break;
  }
  return "relay";
}

struct Link {
  NodeId from;
  NodeId to;
  double delay_ms;
  bool operator==(const Link&) const = default;
};

struct Adjacent {
  NodeId node;
  double delay_ms;
};

// Simple path with its accumulated link delay.
struct Route {
  std::vector<NodeId> hops;
  double total_delay_ms = 0.0;

  bool operator==(const Route&) const = default;
};

// Static directed graph of sensor nodes. Node ids are dense, assigned in
// insertion order. Bidirectional links are stored as two directed links.
class Topology {
 public:
  NodeId add_node(std::string label, NodeRole role = NodeRole::Relay) {
    if (find(label)) {
      throw std::invalid_argument("duplicate node label '" + label + "'");
    }
    const auto id = static_cast<NodeId>(labels_.size());
    labels_.push_back(std::move(label));
    roles_.push_back(role);
    out_.emplace_back();
    in_.emplace_back();
    return id;
  }

  void add_link(NodeId from, NodeId to, double delay_ms) {
    check_member(from);
    check_member(to);
    if (from == to) {
      throw std::invalid_argument("self-loop on node " + labels_[from]);
    }
    if (!(delay_ms > 0.0) || !std::isfinite(delay_ms)) {
      throw std::invalid_argument("link " + labels_[from] + "->" + labels_[to] +
                                  " needs a positive finite delay");
    }
    if (link_delay(from, to)) {
      throw std::invalid_argument("duplicate link " + labels_[from] + "->" + labels_[to]);
    }
    links_.push_back({from, to, delay_ms});
    auto& adj = out_[from];
    adj.insert(std::upper_bound(adj.begin(), adj.end(), to,
                                [](NodeId v, const Adjacent& a) { return v < a.node; }),
               Adjacent{to, delay_ms});
    auto& pred = in_[to];
    pred.insert(std::upper_bound(pred.begin(), pred.end(), from), from);
  }

  void add_bidirectional(NodeId a, NodeId b, double delay_ms) {
    add_link(a, b, delay_ms);
    add_link(b, a, delay_ms);
  }

  std::size_t size() const { return labels_.size(); }
  bool contains(NodeId n) const { return n < labels_.size(); }
  const std::vector<Link>& links() const { return links_; }

  // Outgoing adjacency, ascending by node id.
  std::span<const Adjacent> neighbors(NodeId n) const {
    check_member(n);
    return out_[n];
  }

  // Nodes with a link into n, ascending. These are the nodes that consult n's
  // energy when forwarding.
  std::span<const NodeId> predecessors(NodeId n) const {
    check_member(n);
    return in_[n];
  }

  std::optional<double> link_delay(NodeId from, NodeId to) const {
    check_member(from);
    for (const auto& a : out_[from]) {
      if (a.node == to) return a.delay_ms;
    }
    return std::nullopt;
  }

  const std::string& label(NodeId n) const {
    check_member(n);
    return labels_[n];
  }

  NodeRole role(NodeId n) const {
    check_member(n);
    return roles_[n];
  }

  void set_role(NodeId n, NodeRole role) {
    check_member(n);
    roles_[n] = role;
  }

  std::optional<NodeId> find(std::string_view label) const {
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      if (labels_[i] == label) return static_cast<NodeId>(i);
    }
    return std::nullopt;
  }

  NodeId at(std::string_view label) const {
    if (auto id = find(label)) return *id;
    throw std::out_of_range("unknown node '" + std::string(label) + "'");
  }

  std::vector<NodeId> nodes_with_role(NodeRole role) const {
    std::vector<NodeId> out;
    for (std::size_t i = 0; i < roles_.size(); ++i) {
      if (roles_[i] == role) out.push_back(static_cast<NodeId>(i));
    }
    return out;
  }

  void check_member(NodeId n) const {
    if (!contains(n)) {
      throw std::out_of_range("node " + std::to_string(n) + " is not in the topology");
    }
  }

 private:
  std::vector<std::string> labels_;
  std::vector<NodeRole> roles_;
  std::vector<Link> links_;
  std::vector<std::vector<Adjacent>> out_;
  std::vector<std::vector<NodeId>> in_;
};

// Adjacency list of n as (neighbor, delay) pairs in ascending id order.
inline std::vector<std::pair<NodeId, double>> neighbors(const Topology& topo, NodeId n) {
  std::vector<std::pair<NodeId, double>> out;
  for (const auto& a : topo.neighbors(n)) out.emplace_back(a.node, a.delay_ms);
  return out;
}

namespace detail {

// Lexicographic Dijkstra over (delay, hop sequence). Positive delays make the
// prefix of an optimal path optimal for its own endpoint, so settling by the
// full label yields the lexicographically smallest minimum-delay path.
// `blocked` is indexed by node id; src must not be blocked.
inline std::optional<Route> shortest_path_masked(const Topology& topo, NodeId src, NodeId dst,
                                                 const std::vector<bool>& blocked) {
  if (src == dst) return Route{{src}, 0.0};
  if (blocked[dst]) return std::nullopt;

  struct Label {
    double delay;
    std::vector<NodeId> path;
    bool operator>(const Label& o) const {
      if (delay != o.delay) return delay > o.delay;
      return path > o.path;
    }
  };
  const auto n = topo.size();
  std::vector<std::optional<Label>> best(n);
  std::vector<bool> settled(n, false);
  std::priority_queue<Label, std::vector<Label>, std::greater<>> open;
  best[src] = Label{0.0, {src}};
  open.push(*best[src]);

  while (!open.empty()) {
    Label cur = open.top();
    open.pop();
    const NodeId u = cur.path.back();
    if (settled[u]) continue;
    settled[u] = true;
    if (u == dst) return Route{std::move(cur.path), cur.delay};
    for (const auto& a : topo.neighbors(u)) {
      if (blocked[a.node] || settled[a.node]) continue;
      Label cand{cur.delay + a.delay_ms, cur.path};
      cand.path.push_back(a.node);
      if (!best[a.node] || *best[a.node] > cand) {
        best[a.node] = cand;
        open.push(std::move(cand));
      }
    }
  }
  return std::nullopt;
}

}  // namespace detail

// Minimum total-delay simple path from src to dst that avoids every node in
// `excluded`. Ties go to the lexicographically smallest hop sequence.
// Returns nullopt when dst is unreachable.
inline std::optional<Route> shortest_delay_path(const Topology& topo, NodeId src, NodeId dst,
                                                std::span<const NodeId> excluded = {}) {
  topo.check_member(src);
  topo.check_member(dst);
  std::vector<bool> blocked(topo.size(), false);
  for (NodeId x : excluded) {
    topo.check_member(x);
    if (x == src || x == dst) {
      throw std::invalid_argument("excluded set contains an endpoint");
    }
    blocked[x] = true;
  }
  return detail::shortest_path_masked(topo, src, dst, blocked);
}

inline double route_delay(const Topology& topo, std::span<const NodeId> hops) {
  double total = 0.0;
  for (std::size_t i = 1; i < hops.size(); ++i) {
    auto d = topo.link_delay(hops[i - 1], hops[i]);
    if (!d) throw std::invalid_argument("hops are not linked");
    total += *d;
  }
  return total;
}

// Labels of a hop sequence joined with '-', e.g. "S-1-2-3-D".
inline std::string format_hops(const Topology& topo, std::span<const NodeId> hops) {
  std::string out;
  for (std::size_t i = 0; i < hops.size(); ++i) {
    if (i) out += '-';
    out += topo.label(hops[i]);
  }
  return out;
}

}  // namespace pedf
