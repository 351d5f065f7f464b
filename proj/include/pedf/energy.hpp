#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pedf {

// Packet urgency carried in the header. Values outside 1..4 can appear in a
// corrupted header; the forwarding step rejects them.
struct Priority {
  int value = 4;

  constexpr bool valid() const { return value >= 1 && value <= 4; }
  constexpr bool operator==(const Priority&) const = default;
  constexpr auto operator<=>(const Priority&) const = default;

  static constexpr Priority urgent() { return {1}; }
  static constexpr Priority highly_important() { return {2}; }
  static constexpr Priority moderately_important() { return {3}; }
  static constexpr Priority less_important() { return {4}; }
};

inline Priority make_priority(int value) {
  Priority p{value};
  if (!p.valid()) {
    throw std::out_of_range("priority must be in 1..4, got " + std::to_string(value));
  }
  return p;
}

enum class EnergyBand : std::uint8_t { CaseI = 1, CaseII = 2, CaseIII = 3, CaseIV = 4 };

inline std::string_view to_string(EnergyBand band) {
  switch (band) {
    case EnergyBand::CaseI: return "CaseI";
    case EnergyBand::CaseII: return "CaseII";
    case EnergyBand::CaseIII: return "CaseIII";
    case EnergyBand::CaseIV: return "CaseIV";
  }
  return "?";
}

// Level a priority needs strictly exceeded at the next hop: 0, 25, 50, 75.
constexpr double priority_threshold(Priority p) { return 25.0 * (p.value - 1); }

// Bands are right-closed: CaseI = [0,25], CaseII = (25,50], CaseIII = (50,75],
// CaseIV = (75,100].
inline EnergyBand classify_band(double level) {
  if (!(level >= 0.0 && level <= 100.0)) {
    throw std::out_of_range("energy level outside [0,100]: " + std::to_string(level));
  }
  if (level > 75.0) return EnergyBand::CaseIV;
  if (level > 50.0) return EnergyBand::CaseIII;
  if (level > 25.0) return EnergyBand::CaseII;
  return EnergyBand::CaseI;
}

class PrioritySet {
 public:
  constexpr PrioritySet() = default;

  constexpr void insert(Priority p) {
    if (p.valid()) bits_ |= static_cast<std::uint8_t>(1u << (p.value - 1));
  }
  constexpr bool contains(Priority p) const {
    return p.valid() && (bits_ >> (p.value - 1)) & 1u;
  }
  constexpr bool subset_of(PrioritySet other) const { return (bits_ & ~other.bits_) == 0; }
  constexpr std::size_t size() const { return std::popcount(static_cast<unsigned>(bits_)); }
  constexpr bool operator==(const PrioritySet&) const = default;

  std::vector<int> values() const {
    std::vector<int> out;
    for (int v = 1; v <= 4; ++v) {
      if (contains(Priority{v})) out.push_back(v);
    }
    return out;
  }

 private:
  std::uint8_t bits_ = 0;
};

// Priorities a node in `band` may forward: CaseI {1} up to CaseIV {1,2,3,4}.
constexpr PrioritySet eligible_priorities(EnergyBand band) {
  PrioritySet out;
  for (int v = 1; v <= static_cast<int>(band); ++v) out.insert(Priority{v});
  return out;
}

constexpr bool band_permits(EnergyBand band, Priority p) {
  return eligible_priorities(band).contains(p);
}

struct EnergyParams {
  double tx_cost = 0.5;         // percent per packet transmitted
  double rx_cost = 0.25;        // percent per packet received
  double report_cost = 0.1;     // percent per report message sent
  double idle_drain = 0.0;      // percent per simulated second
  double replenish_rate = 0.0;  // percent per simulated second, 0 disables solar
  double hysteresis = 0.0;      // margin above a threshold before an upward crossing counts
  double capacity_j = 10.0;     // documentation only

  void validate() const {
    const std::array<std::pair<const char*, double>, 7> fields{{{"tx_cost", tx_cost},
                                                                {"rx_cost", rx_cost},
                                                                {"report_cost", report_cost},
                                                                {"idle_drain", idle_drain},
                                                                {"replenish_rate", replenish_rate},
                                                                {"hysteresis", hysteresis},
                                                                {"capacity_j", capacity_j}}};
    for (const auto& [name, v] : fields) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw std::invalid_argument(std::string("energy.") + name + " must be a finite value >= 0");
      }
    }
    if (capacity_j <= 0.0) throw std::invalid_argument("energy.capacity_j must be > 0");
  }
};

struct EnergyState {
  double level = 100.0;  // percent of capacity
  bool alive = true;

  static EnergyState at(double level) {
    classify_band(level);
    return {level, level > 0.0};
  }
  EnergyBand band() const { return classify_band(level); }
  bool operator==(const EnergyState&) const = default;
};

enum class Direction : std::uint8_t { Down, Up };

// Critical level passed by an energy update. A downward crossing of 0 is a
// death; an upward crossing of 0 is a revival by replenishment.
struct ThresholdCrossing {
  double threshold;
  Direction direction;
  bool operator==(const ThresholdCrossing&) const = default;
};

inline constexpr std::array<double, 3> kCriticalLevels{75.0, 50.0, 25.0};

struct EnergyUpdate {
  EnergyState state;
  std::vector<ThresholdCrossing> crossings;
};

// Debits `amount` percent, floored at 0. Downward crossings of {75,50,25,0}
// satisfy old > T >= new and are listed from high to low.
inline EnergyUpdate consume(EnergyState state, double amount) {
  if (!(amount >= 0.0) || !std::isfinite(amount)) {
    throw std::invalid_argument("consumption must be a finite amount >= 0");
  }
  if (!state.alive) throw std::logic_error("consume on a dead node");
  const double old_level = state.level;
  const double new_level = std::max(0.0, old_level - amount);
  EnergyUpdate out{{new_level, new_level > 0.0}, {}};
  for (double t : kCriticalLevels) {
    if (old_level > t && t >= new_level) out.crossings.push_back({t, Direction::Down});
  }
  if (old_level > 0.0 && new_level <= 0.0) out.crossings.push_back({0.0, Direction::Down});
  return out;
}

// Adds replenish_rate * elapsed, capped at 100. Upward crossings satisfy
// old <= T + hysteresis < new and are listed from low to high, preceded by a
// revival crossing when a dead node regains energy.
inline EnergyUpdate replenish(EnergyState state, double elapsed_s, const EnergyParams& params) {
  if (!(elapsed_s >= 0.0) || !std::isfinite(elapsed_s)) {
    throw std::invalid_argument("elapsed time must be >= 0");
  }
  const double old_level = state.level;
  const double new_level = std::min(100.0, old_level + params.replenish_rate * elapsed_s);
  EnergyUpdate out{{new_level, new_level > 0.0}, {}};
  if (!state.alive && out.state.alive) out.crossings.push_back({0.0, Direction::Up});
  for (auto it = kCriticalLevels.rbegin(); it != kCriticalLevels.rend(); ++it) {
    const double mark = *it + params.hysteresis;
    if (old_level <= mark && mark < new_level) out.crossings.push_back({*it, Direction::Up});
  }
  return out;
}

// Band a node holds right after `c`, assuming c is the last crossing of its
// update: a fall through T lands in T's own band, a rise lands just above it.
inline EnergyBand band_after(const ThresholdCrossing& c) {
  if (c.direction == Direction::Down || c.threshold == 0.0) return classify_band(c.threshold);
  return classify_band(std::min(100.0, c.threshold + 1e-9));
}

}  // namespace pedf
