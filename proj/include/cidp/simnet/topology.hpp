#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cidp/error.hpp"

namespace cidp::simnet {

enum class SimErrc {
  invalid_topology,
  disconnected,
  event_budget_exceeded,
  transmit_bound_violated,
  nonidentical_copies,
  invalid_params,
  empty_input,
};

const char* to_string(SimErrc code);

using SimError = Error<SimErrc>;

struct LineSpec {
  std::uint32_t nodes = 2;
  double spacing = 1.0;
  double radius = 1.0;
};

struct GridSpec {
  std::uint32_t cols = 2;
  std::uint32_t rows = 2;
  double spacing = 1.0;
  double radius = 1.0;
};

// Uniform placement in a side x side square, unit-disk links.
struct RggSpec {
  std::uint32_t nodes = 2;
  double radius = 1.0;
  double side = 1.0;
};

using TopologySpec = std::variant<LineSpec, GridSpec, RggSpec>;

// "line:K[:radius]", "grid:AxB[:radius]", "rgg:N:radius:side".
TopologySpec parse_topology(std::string_view text);
std::string format_topology(const TopologySpec& spec);
std::uint32_t node_count(const TopologySpec& spec);

struct Position {
  double x = 0;
  double y = 0;
  bool operator==(const Position&) const = default;
};

// Node 0 is the initiator.
struct Topology {
  std::vector<Position> positions;
  double radius = 0;
  std::vector<std::vector<std::uint32_t>> adjacency;  // sorted ids
  std::vector<int> hops;                               // BFS from node 0
  int attempts = 1;                                    // rgg placements tried

  std::size_t size() const { return positions.size(); }
  int max_hops() const;
  bool operator==(const Topology&) const = default;
};

inline constexpr int kRggMaxAttempts = 1000;

// Deterministic in `seed`. RGG placements are redrawn until connected;
// throws SimError(disconnected) once the retry budget is spent.
Topology build_topology(const TopologySpec& spec, std::uint64_t seed);

// Unit-disk graph over explicit positions plus BFS hop counts (-1 where
// unreachable).
Topology connect(std::vector<Position> positions, double radius);

}  // namespace cidp::simnet
