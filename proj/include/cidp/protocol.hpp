#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <variant>
#include <vector>

#include "cidp/bytes.hpp"
#include "cidp/error.hpp"
#include "cidp/framing.hpp"

namespace cidp::protocol {

using Nanos = std::chrono::nanoseconds;
using framing::Packet;

enum class ProtocolErrc {
  invalid_n,
  empty_patch,
  invalid_packets,
  unknown_timer,
  invalid_params,
};

const char* to_string(ProtocolErrc code);

using ProtocolError = Error<ProtocolErrc>;

// ceil(log2(N + 1)); throws ProtocolError(invalid_n) for N = 0.
int compute_nmax(std::uint32_t n);
// floor(log2(N + 1)), the reading that gives 6 for N = 94.
int compute_nmax_floor(std::uint32_t n);

struct ProtocolParams {
  int n_max = 1;
  Nanos slot{0};              // airtime of one packet plus turnaround
  Nanos round_period{0};      // between round starts at the initiator
  Nanos processing_delay{0};  // reception end to relay start
  bool initiator_timeout_retx = true;

  void validate() const;
};

// Slots reserved per round. A lossless flood ends after about hops + 2 *
// n_max slots; under loss, late first receptions stretch every node's
// rx/tx alternation, so the reservation is (2 * hops + 4 * n_max + 4)
// slots. Rounds that overlap collide at the receivers.
Nanos default_round_period(int hops, int n_max, Nanos slot);

enum class Role { initiator, relay };

struct TimerId {
  enum class Kind : std::uint8_t { round_start, retransmit };
  Kind kind = Kind::round_start;
  std::uint8_t round = 0;
  int serial = 0;  // n_tx when a retransmit timer was armed

  bool operator==(const TimerId&) const = default;
};

struct NodeState {
  std::uint32_t node_id = 0;
  Role role = Role::relay;
  std::uint16_t current_version = 0;
  std::uint8_t current_seq = 0;  // 0 = idle
  int n_tx = 0;
  std::map<std::uint8_t, Packet> buffer;  // relay byte cleared
  bool delivered = false;
  std::optional<std::uint8_t> total_known;

  // Initiator bookkeeping.
  std::vector<Packet> source;
  bool heard_since_tx = false;
  std::uint8_t last_relay = 0;

  bool operator==(const NodeState&) const = default;
};

NodeState make_relay(std::uint32_t node_id, std::uint16_t version = 0);

struct Transmit {
  Packet packet;
  Nanos at{0};
  bool operator==(const Transmit&) const = default;
};

struct SetTimer {
  TimerId id;
  Nanos at{0};
  bool operator==(const SetTimer&) const = default;
};

struct DeliverComplete {
  Bytes object;
  Nanos at{0};
  bool operator==(const DeliverComplete&) const = default;
};

using Action = std::variant<Transmit, SetTimer, DeliverComplete>;

struct Step {
  NodeState state;
  std::vector<Action> actions;
};

// Reception handler. Stale versions are ignored, a newer version resets the
// node, a higher sequence number opens a new round, and packets of the
// current round are relayed while n_tx < n_max. Late fragments of earlier
// rounds are stored but never relayed.
Step on_packet(NodeState state, const Packet& packet, Nanos now,
               const ProtocolParams& params);

// Initiator round pacing and timeout retransmission. Relays own no timers.
Step on_timer(NodeState state, const TimerId& id, Nanos now,
              const ProtocolParams& params);

// Turns `state` into the initiator for `packets` and transmits packet 1.
Step start_dissemination(NodeState state, std::vector<Packet> packets,
                         Nanos now, const ProtocolParams& params);

inline bool is_complete(const NodeState& state) { return state.delivered; }

}  // namespace cidp::protocol
