#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cidp/framing.hpp"
#include "cidp/protocol.hpp"
#include "cidp/simnet/radio.hpp"
#include "cidp/simnet/topology.hpp"

namespace cidp::simnet {

using protocol::Nanos;

Nanos from_us(double us);
double to_us(Nanos t);

// Airtime of one frame on the radio.
Nanos airtime(const RadioParams& radio, const framing::FramingParams& framing);
// Airtime plus turnaround: the spacing of consecutive flood hops.
Nanos slot_length(const RadioParams& radio,
                  const framing::FramingParams& framing);

// Protocol parameters for a topology; round_period follows
// protocol::default_round_period unless `round_period` is given.
protocol::ProtocolParams make_protocol_params(
    const Topology& topology, const RadioParams& radio,
    const framing::FramingParams& framing, int n_max,
    std::optional<Nanos> round_period = std::nullopt,
    bool initiator_timeout_retx = true);

struct NodeResult {
  int hops = 0;
  bool delivered = false;
  std::optional<Nanos> completion;
  std::vector<std::optional<Nanos>> first_rx;  // index n-1
  bool object_intact = true;  // delivered bytes equal the disseminated object
  Bytes object;               // only with SimOptions::keep_objects
};

struct RunResult {
  std::uint64_t seed = 0;
  std::string rng = Rng::kName;
  int n_max = 0;
  std::size_t packets = 0;
  Nanos slot{0};
  Nanos round_period{0};
  std::vector<NodeResult> nodes;  // node 0 is the initiator

  std::uint64_t transmissions = 0;
  int max_round_transmissions = 0;  // highest per-node per-round count
  // Longest gap between a round's start and its last transmission.
  Nanos longest_round{0};
  std::uint64_t events = 0;

  std::size_t delivered_count() const;  // excluding the initiator
};

struct SimOptions {
  std::uint64_t event_budget = 50'000'000;
  bool keep_objects = false;
};

// Floods `packets` from node 0. Deterministic in `seed`: one RNG stream,
// drawn in event order. Events are ordered by (time, kind, node, insertion).
// Throws SimError(transmit_bound_violated / nonidentical_copies) if the
// protocol breaks its per-round transmit bound or relays a payload that
// differs from the source.
RunResult run_dissemination(const Topology& topology,
                            const RadioParams& radio,
                            const protocol::ProtocolParams& proto,
                            const framing::FramingParams& framing,
                            const std::vector<framing::Packet>& packets,
                            std::uint64_t seed, const SimOptions& options = {});

// Raw CSV: seed,node,hops,delivered,completion_us,pk1_us,...,pkM_us
std::string csv_header(std::size_t packets);
std::string csv_rows(const RunResult& run);

}  // namespace cidp::simnet
