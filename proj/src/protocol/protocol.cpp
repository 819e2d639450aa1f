#include "cidp/protocol.hpp"

#include <string>

namespace cidp::protocol {

const char* to_string(ProtocolErrc code) {
  switch (code) {
    case ProtocolErrc::invalid_n: return "InvalidN";
    case ProtocolErrc::empty_patch: return "EmptyPatch";
    case ProtocolErrc::invalid_packets: return "InvalidPackets";
    case ProtocolErrc::unknown_timer: return "UnknownTimer";
    case ProtocolErrc::invalid_params: return "InvalidParams";
  }
  return "?";
}

namespace {

[[noreturn]] void fail(ProtocolErrc code, const std::string& msg) {
  throw ProtocolError(code, std::string(to_string(code)) + ": " + msg);
}

Packet normalized(const Packet& p) {
  Packet copy = p;
  copy.header.relay = 0;
  return copy;
}

bool buffer_complete(const NodeState& s) {
  if (!s.total_known) return false;
  for (unsigned n = 1; n <= *s.total_known; ++n)
    if (!s.buffer.count(static_cast<std::uint8_t>(n))) return false;
  return true;
}

void arm_retransmit(NodeState& s, Nanos tx_at, const ProtocolParams& params,
                    std::vector<Action>& actions) {
  if (s.role != Role::initiator || !params.initiator_timeout_retx) return;
  if (s.n_tx >= params.n_max) return;
  actions.push_back(SetTimer{
      TimerId{TimerId::Kind::retransmit, s.current_seq, s.n_tx},
      tx_at + 2 * params.slot});
}

// Transmits packet `s.current_seq` from the initiator's source list.
void initiator_send(NodeState& s, std::uint8_t relay, Nanos at,
                    const ProtocolParams& params,
                    std::vector<Action>& actions) {
  Packet p = s.source[s.current_seq - 1];
  p.header.relay = relay;
  actions.push_back(Transmit{std::move(p), at});
  ++s.n_tx;
  s.last_relay = relay;
  s.heard_since_tx = false;
  arm_retransmit(s, at, params, actions);
}

void begin_round(NodeState& s, std::uint8_t round, Nanos now,
                 const ProtocolParams& params, std::vector<Action>& actions) {
  s.current_seq = round;
  s.n_tx = 0;
  initiator_send(s, 0, now, params, actions);
  if (round < s.source.size())
    actions.push_back(
        SetTimer{TimerId{TimerId::Kind::round_start,
                         static_cast<std::uint8_t>(round + 1), 0},
                 now + params.round_period});
}

}  // namespace

int compute_nmax(std::uint32_t n) {
  if (n == 0) fail(ProtocolErrc::invalid_n, "network size must be >= 1");
  // Smallest k with 2^k >= n + 1.
  std::uint64_t target = std::uint64_t{n} + 1;
  int k = 0;
  while ((std::uint64_t{1} << k) < target) ++k;
  return k;
}

int compute_nmax_floor(std::uint32_t n) {
  if (n == 0) fail(ProtocolErrc::invalid_n, "network size must be >= 1");
  std::uint64_t target = std::uint64_t{n} + 1;
  int k = 0;
  while ((std::uint64_t{1} << (k + 1)) <= target) ++k;
  return k;
}

void ProtocolParams::validate() const {
  if (n_max < 1) fail(ProtocolErrc::invalid_params, "N_max must be >= 1");
  if (slot <= Nanos{0}) fail(ProtocolErrc::invalid_params, "slot must be > 0");
  if (round_period < slot)
    fail(ProtocolErrc::invalid_params, "round period shorter than a slot");
  if (processing_delay < Nanos{0})
    fail(ProtocolErrc::invalid_params, "negative processing delay");
}

Nanos default_round_period(int hops, int n_max, Nanos slot) {
  return (2 * hops + 4 * n_max + 4) * slot;
}

NodeState make_relay(std::uint32_t node_id, std::uint16_t version) {
  NodeState s;
  s.node_id = node_id;
  s.current_version = version;
  return s;
}

Step on_packet(NodeState state, const Packet& packet, Nanos now,
               const ProtocolParams& params) {
  Step step;
  const auto& h = packet.header;

  if (h.version < state.current_version) {
    step.state = std::move(state);
    return step;
  }
  if (h.version > state.current_version)
    state = make_relay(state.node_id, h.version);
  if (!state.total_known) state.total_known = h.total;

  if (h.seq > state.current_seq) {
    state.current_seq = h.seq;
    state.n_tx = 0;
  }

  state.buffer.try_emplace(h.seq, normalized(packet));

  if (h.seq == state.current_seq) {
    state.heard_since_tx = true;
    if (state.n_tx < params.n_max) {
      Packet copy = packet;
      copy.header.relay = static_cast<std::uint8_t>(h.relay + 1);
      Nanos at = now + params.processing_delay;
      ++state.n_tx;
      if (state.role == Role::initiator) {
        state.last_relay = copy.header.relay;
        state.heard_since_tx = false;
        step.actions.push_back(Transmit{std::move(copy), at});
        arm_retransmit(state, at, params, step.actions);
      } else {
        step.actions.push_back(Transmit{std::move(copy), at});
      }
    }
  }

  if (!state.delivered && buffer_complete(state)) {
    std::vector<Packet> parts;
    parts.reserve(state.buffer.size());
    for (const auto& [n, p] : state.buffer) parts.push_back(p);
    step.actions.push_back(DeliverComplete{framing::reassemble(parts), now});
    state.delivered = true;
  }

  step.state = std::move(state);
  return step;
}

Step on_timer(NodeState state, const TimerId& id, Nanos now,
              const ProtocolParams& params) {
  if (state.role != Role::initiator || state.source.empty())
    fail(ProtocolErrc::unknown_timer,
         "node " + std::to_string(state.node_id) + " owns no timers");
  if (id.round == 0 || id.round > state.source.size())
    fail(ProtocolErrc::unknown_timer,
         "round " + std::to_string(id.round) + " outside the patch");

  Step step;
  switch (id.kind) {
    case TimerId::Kind::round_start:
      begin_round(state, id.round, now, params, step.actions);
      break;
    case TimerId::Kind::retransmit:
      // Superseded when the round moved on or the initiator transmitted
      // again since the timer was armed.
      if (id.round == state.current_seq && id.serial == state.n_tx &&
          !state.heard_since_tx && state.n_tx < params.n_max) {
        initiator_send(state, static_cast<std::uint8_t>(state.last_relay + 2),
                       now, params, step.actions);
      }
      break;
  }
  step.state = std::move(state);
  return step;
}

Step start_dissemination(NodeState state, std::vector<Packet> packets,
                         Nanos now, const ProtocolParams& params) {
  if (packets.empty()) fail(ProtocolErrc::empty_patch, "no packets to send");
  for (std::size_t i = 0; i < packets.size(); ++i) {
    const auto& h = packets[i].header;
    if (h.seq != i + 1 || h.total != packets.size() ||
        !packets[i].same_object(packets.front()))
      fail(ProtocolErrc::invalid_packets,
           "packet list is not a complete 1..M sequence");
  }

  const auto& first = packets.front().header;
  NodeState s = make_relay(state.node_id, first.version);
  s.role = Role::initiator;
  s.total_known = first.total;
  for (const auto& p : packets) s.buffer.emplace(p.header.seq, normalized(p));
  s.delivered = true;
  s.source = std::move(packets);

  Step step;
  begin_round(s, 1, now, params, step.actions);
  step.state = std::move(s);
  return step;
}

}  // namespace cidp::protocol
