#pragma once

#include <charconv>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pedf/rng.hpp"
#include "pedf/topology.hpp"

namespace pedf {

// Link delays of the nine-node reference network, in milliseconds.
struct Fig1Delays {
  double s_1 = 10.0;
  double one_2 = 10.0;
  double two_3 = 10.0;  // best branch
  double three_d = 10.0;
  double two_4 = 15.0;  // second branch
  double four_d = 15.0;
  double s_u1 = 20.0;  // unlabeled detour S-u1-u2-u3-D
  double u1_u2 = 20.0;
  double u2_u3 = 20.0;
  double u3_d = 20.0;
};

// Nine nodes: S, 1, 2, 3, 4, D carry the labelled routes (S-1-2, then 2-3-D
// as the best branch and 2-4-D as the second); u1, u2, u3 form a slow detour
// from S to D that touches neither branch. All links are bidirectional.
inline Topology build_fig1_scenario(const Fig1Delays& d = {}) {
  Topology t;
  const NodeId s = t.add_node("S", NodeRole::Source);
  const NodeId n1 = t.add_node("1");
  const NodeId n2 = t.add_node("2");
  const NodeId n3 = t.add_node("3");
  const NodeId n4 = t.add_node("4");
  const NodeId dst = t.add_node("D", NodeRole::Destination);
  const NodeId u1 = t.add_node("u1");
  const NodeId u2 = t.add_node("u2");
  const NodeId u3 = t.add_node("u3");
  t.add_bidirectional(s, n1, d.s_1);
  t.add_bidirectional(n1, n2, d.one_2);
  t.add_bidirectional(n2, n3, d.two_3);
  t.add_bidirectional(n3, dst, d.three_d);
  t.add_bidirectional(n2, n4, d.two_4);
  t.add_bidirectional(n4, dst, d.four_d);
  t.add_bidirectional(s, u1, d.s_u1);
  t.add_bidirectional(u1, u2, d.u1_u2);
  t.add_bidirectional(u2, u3, d.u2_u3);
  t.add_bidirectional(u3, dst, d.u3_d);
  return t;
}

// Chain 0-1-...-(n-1) with unit-spaced 10 ms links; source 0, sink n-1.
inline Topology build_line_scenario(std::size_t n = 5, double delay_ms = 10.0) {
  if (n < 2) throw std::invalid_argument("line scenario needs at least 2 nodes");
  Topology t;
  for (std::size_t i = 0; i < n; ++i) {
    t.add_node("n" + std::to_string(i), i == 0       ? NodeRole::Source
                                        : i == n - 1 ? NodeRole::Destination
                                                     : NodeRole::Relay);
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    t.add_bidirectional(static_cast<NodeId>(i), static_cast<NodeId>(i + 1), delay_ms);
  }
  return t;
}

// side x side lattice; horizontal links 10 ms, vertical 12 ms. Source at the
// top-left corner, sink at the bottom-right.
inline Topology build_grid_scenario(std::size_t side = 4) {
  if (side < 2) throw std::invalid_argument("grid scenario needs side >= 2");
  Topology t;
  const auto id = [side](std::size_t r, std::size_t c) { return static_cast<NodeId>(r * side + c); };
  for (std::size_t r = 0; r < side; ++r) {
    for (std::size_t c = 0; c < side; ++c) {
      const bool first = r == 0 && c == 0;
      const bool last = r == side - 1 && c == side - 1;
      t.add_node("g" + std::to_string(r) + "_" + std::to_string(c),
                 first ? NodeRole::Source : last ? NodeRole::Destination : NodeRole::Relay);
    }
  }
  for (std::size_t r = 0; r < side; ++r) {
    for (std::size_t c = 0; c < side; ++c) {
      if (c + 1 < side) t.add_bidirectional(id(r, c), id(r, c + 1), 10.0);
      if (r + 1 < side) t.add_bidirectional(id(r, c), id(r + 1, c), 12.0);
    }
  }
  return t;
}

// Connected random graph: a random spanning tree plus extra chords, integer
// delays in [1, 20] ms, all links bidirectional. Source 0, sink n-1.
inline Topology build_random_scenario(std::size_t n, std::uint64_t seed = 1, double extra_link_prob = 0.25) {
  if (n < 2) throw std::invalid_argument("random scenario needs at least 2 nodes");
  Rng rng(seed);
  Topology t;
  for (std::size_t i = 0; i < n; ++i) {
    t.add_node("r" + std::to_string(i), i == 0       ? NodeRole::Source
                                        : i == n - 1 ? NodeRole::Destination
                                                     : NodeRole::Relay);
  }
  for (std::size_t i = 1; i < n; ++i) {
    const auto parent = static_cast<NodeId>(rng.index(i));
    t.add_bidirectional(parent, static_cast<NodeId>(i), rng.between(1, 20));
  }
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      const auto na = static_cast<NodeId>(a), nb = static_cast<NodeId>(b);
      if (t.link_delay(na, nb)) continue;
      if (rng.uniform() < extra_link_prob) t.add_bidirectional(na, nb, rng.between(1, 20));
    }
  }
  return t;
}

struct ScenarioInfo {
  std::string_view name;
  std::string_view description;
};

inline constexpr ScenarioInfo kBuiltinScenarios[] = {
    {"fig1", "nine-node reference network: S-1-2, best branch 2-3-D, second branch 2-4-D, detour S-u1-u2-u3-D"},
    {"line[-N]", "chain of N nodes (default 5), 10 ms links"},
    {"grid[-K]", "K x K lattice (default 4), 10 ms horizontal / 12 ms vertical links"},
    {"random-N", "connected random graph of N nodes, delays 1..20 ms, topology seed 1"},
};

namespace detail {
inline std::optional<std::size_t> suffix_number(std::string_view name, std::string_view prefix) {
  if (name.substr(0, prefix.size()) != prefix) return std::nullopt;
  auto rest = name.substr(prefix.size());
  std::size_t v = 0;
  auto [p, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), v);
  if (ec != std::errc{} || p != rest.data() + rest.size()) return std::nullopt;
  return v;
}
}  // namespace detail

// Resolves a built-in scenario name such as "fig1", "line-7", "grid" or "random-12".
inline Topology build_named_scenario(std::string_view name) {
  if (name == "fig1") return build_fig1_scenario();
  if (name == "line") return build_line_scenario();
  if (name == "grid") return build_grid_scenario();
  if (auto n = detail::suffix_number(name, "line-")) return build_line_scenario(*n);
  if (auto n = detail::suffix_number(name, "grid-")) return build_grid_scenario(*n);
  if (auto n = detail::suffix_number(name, "random-")) return build_random_scenario(*n);
  throw std::invalid_argument("unknown scenario '" + std::string(name) + "'");
}

}  // namespace pedf
