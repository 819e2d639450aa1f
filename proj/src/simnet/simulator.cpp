#include "cidp/simnet/simulator.hpp"

#include <cmath>
#include <memory>
#include <queue>
#include <sstream>

namespace cidp::simnet {

using framing::Packet;
using protocol::NodeState;
using protocol::TimerId;

Nanos from_us(double us) { return Nanos{std::llround(us * 1000.0)}; }

double to_us(Nanos t) { return static_cast<double>(t.count()) / 1000.0; }

Nanos airtime(const RadioParams& radio,
              const framing::FramingParams& framing) {
  return from_us(radio.t_byte_us * static_cast<double>(framing.frame_bytes()));
}

Nanos slot_length(const RadioParams& radio,
                  const framing::FramingParams& framing) {
  return airtime(radio, framing) + from_us(radio.t_proc_us);
}

protocol::ProtocolParams make_protocol_params(
    const Topology& topology, const RadioParams& radio,
    const framing::FramingParams& framing, int n_max,
    std::optional<Nanos> round_period, bool initiator_timeout_retx) {
  protocol::ProtocolParams p;
  p.n_max = n_max;
  p.slot = slot_length(radio, framing);
  p.processing_delay = from_us(radio.t_proc_us);
  p.round_period = round_period.value_or(
      protocol::default_round_period(topology.max_hops(), n_max, p.slot));
  p.initiator_timeout_retx = initiator_timeout_retx;
  p.validate();
  return p;
}

std::size_t RunResult::delivered_count() const {
  std::size_t n = 0;
  for (std::size_t i = 1; i < nodes.size(); ++i) n += nodes[i].delivered;
  return n;
}

namespace {

[[noreturn]] void fail(SimErrc code, const std::string& msg) {
  throw SimError(code, std::string(to_string(code)) + ": " + msg);
}

enum class EventKind : int {
  reception_resolve = 0,
  timer = 1,
  transmit_start = 2,
  run_end = 3,
};

struct Event {
  Nanos time{0};
  EventKind kind = EventKind::run_end;
  std::uint32_t node = 0;
  std::uint64_t order = 0;  // insertion counter, last tie-breaker
  Packet packet;            // transmit_start
  TimerId timer;            // timer
};

struct EventAfter {
  bool operator()(const Event& a, const Event& b) const {
    if (a.time != b.time) return a.time > b.time;
    if (a.kind != b.kind) return a.kind > b.kind;
    if (a.node != b.node) return a.node > b.node;
    return a.order > b.order;
  }
};

// Frames overlapping at one receiver. Transmissions starting at the same
// instant form a constructive-interference group; any other overlap is a
// collision.
struct Window {
  bool active = false;
  Nanos start{0};
  Nanos end{0};
  bool deaf = false;
  bool collided = false;
  std::vector<Arrival> group;
  std::vector<std::shared_ptr<const Bytes>> frames;
};

class Engine {
 public:
  Engine(const Topology& topology, const RadioParams& radio,
         const protocol::ProtocolParams& proto,
         const framing::FramingParams& framing,
         const std::vector<Packet>& packets, std::uint64_t seed,
         const SimOptions& options)
      : topo_(topology),
        radio_(radio),
        proto_(proto),
        framing_(framing),
        packets_(packets),
        options_(options),
        rng_(seed),
        air_(airtime(radio, framing)),
        frame_bytes_(framing.frame_bytes()) {
    const std::size_t n = topo_.size();
    states_.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
      states_.push_back(protocol::make_relay(static_cast<std::uint32_t>(i)));
    windows_.resize(n);
    tx_busy_until_.assign(n, Nanos{-1});
    round_tx_.assign(n, std::vector<int>(packets_.size() + 1, 0));

    result_.seed = seed;
    result_.n_max = proto.n_max;
    result_.packets = packets_.size();
    result_.slot = proto.slot;
    result_.round_period = proto.round_period;
    result_.nodes.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      result_.nodes[i].hops = topo_.hops[i];
      result_.nodes[i].first_rx.assign(packets_.size(), std::nullopt);
    }
    object_ = framing::reassemble(packets_);
  }

  RunResult run() {
    auto step = protocol::start_dissemination(states_[0], packets_, Nanos{0},
                                              proto_);
    states_[0] = std::move(step.state);
    auto& init = result_.nodes[0];
    init.delivered = true;
    init.completion = Nanos{0};
    for (auto& t : init.first_rx) t = Nanos{0};
    handle(0, step.actions);

    Event end;
    end.time = proto_.round_period *
               static_cast<std::int64_t>(packets_.size() + 4);
    end.kind = EventKind::run_end;
    push(std::move(end));

    while (!queue_.empty()) {
      if (++result_.events > options_.event_budget)
        fail(SimErrc::event_budget_exceeded,
             std::to_string(options_.event_budget) + " events processed");
      Event ev = queue_.top();
      queue_.pop();
      if (ev.kind == EventKind::run_end) break;
      switch (ev.kind) {
        case EventKind::transmit_start: transmit(ev); break;
        case EventKind::reception_resolve: resolve(ev); break;
        case EventKind::timer: timer(ev); break;
        case EventKind::run_end: break;
      }
    }
    return std::move(result_);
  }

 private:
  void push(Event ev) {
    ev.order = order_++;
    queue_.push(std::move(ev));
  }

  void handle(std::uint32_t node, std::vector<protocol::Action>& actions) {
    for (auto& action : actions) {
      if (auto* tx = std::get_if<protocol::Transmit>(&action)) {
        Event ev;
        ev.time = tx->at;
        ev.kind = EventKind::transmit_start;
        ev.node = node;
        ev.packet = std::move(tx->packet);
        push(std::move(ev));
      } else if (auto* t = std::get_if<protocol::SetTimer>(&action)) {
        Event ev;
        ev.time = t->at;
        ev.kind = EventKind::timer;
        ev.node = node;
        ev.timer = t->id;
        push(std::move(ev));
      } else if (auto* d = std::get_if<protocol::DeliverComplete>(&action)) {
        auto& nr = result_.nodes[node];
        nr.delivered = true;
        nr.completion = d->at;
        nr.object_intact = d->object == object_;
        if (options_.keep_objects) nr.object = std::move(d->object);
      }
    }
  }

  void transmit(const Event& ev) {
    const std::uint32_t u = ev.node;
    const auto& h = ev.packet.header;
    if (h.seq == 0 || h.seq > packets_.size())
      fail(SimErrc::nonidentical_copies, "transmission outside the patch");
    const Packet& src = packets_[h.seq - 1];
    if (!ev.packet.same_object(src) || ev.packet.payload != src.payload)
      fail(SimErrc::nonidentical_copies,
           "node " + std::to_string(u) + " relayed a modified copy of n = " +
               std::to_string(h.seq));
    int& count = round_tx_[u][h.seq];
    if (++count > proto_.n_max)
      fail(SimErrc::transmit_bound_violated,
           "node " + std::to_string(u) + " transmitted " +
               std::to_string(count) + " times in round " +
               std::to_string(h.seq));
    result_.max_round_transmissions =
        std::max(result_.max_round_transmissions, count);
    ++result_.transmissions;
    if (u == 0 && h.relay == 0) round_start_ = ev.time;
    result_.longest_round =
        std::max(result_.longest_round, ev.time - round_start_ + air_);

    const Nanos t = ev.time;
    const Nanos end = t + air_;
    tx_busy_until_[u] = end;
    if (windows_[u].active && windows_[u].end > t) windows_[u].deaf = true;

    auto frame = std::make_shared<const Bytes>(framing::encode(ev.packet));
    const double jitter = draw_jitter(radio_, rng_);

    for (auto v : topo_.adjacency[u]) {
      if (tx_busy_until_[v] > t) continue;  // half duplex
      Window& w = windows_[v];
      if (w.active && w.end > t) {
        if (w.start == t) {
          w.group.push_back({u, jitter, frame.get()});
          w.frames.push_back(frame);
        } else {
          w.collided = true;
        }
        continue;
      }
      w = Window{};
      w.active = true;
      w.start = t;
      w.end = end;
      w.group.push_back({u, jitter, frame.get()});
      w.frames.push_back(frame);
      Event res;
      res.time = end;
      res.kind = EventKind::reception_resolve;
      res.node = v;
      push(std::move(res));
    }
  }

  void resolve(const Event& ev) {
    const std::uint32_t v = ev.node;
    Window w = std::move(windows_[v]);
    windows_[v] = Window{};
    if (!w.active || w.deaf || w.collided) return;
    if (!ci_reception(w.group, frame_bytes_, radio_, rng_)) return;

    Packet pkt;
    try {
      pkt = framing::decode(*w.group.front().frame);
    } catch (const framing::FramingError&) {
      return;
    }
    auto& slot = result_.nodes[v].first_rx[pkt.header.seq - 1];
    if (!slot) slot = ev.time;

    auto step = protocol::on_packet(std::move(states_[v]), pkt, ev.time,
                                    proto_);
    states_[v] = std::move(step.state);
    handle(v, step.actions);
  }

  void timer(const Event& ev) {
    auto step =
        protocol::on_timer(std::move(states_[ev.node]), ev.timer, ev.time,
                           proto_);
    states_[ev.node] = std::move(step.state);
    handle(ev.node, step.actions);
  }

  const Topology& topo_;
  const RadioParams& radio_;
  const protocol::ProtocolParams& proto_;
  const framing::FramingParams& framing_;
  const std::vector<Packet>& packets_;
  const SimOptions& options_;
  Rng rng_;
  const Nanos air_;
  const std::size_t frame_bytes_;

  std::priority_queue<Event, std::vector<Event>, EventAfter> queue_;
  std::uint64_t order_ = 0;
  Nanos round_start_{0};
  std::vector<NodeState> states_;
  std::vector<Window> windows_;
  std::vector<Nanos> tx_busy_until_;
  std::vector<std::vector<int>> round_tx_;
  Bytes object_;
  RunResult result_;
};

}  // namespace

RunResult run_dissemination(const Topology& topology,
                            const RadioParams& radio,
                            const protocol::ProtocolParams& proto,
                            const framing::FramingParams& framing,
                            const std::vector<Packet>& packets,
                            std::uint64_t seed, const SimOptions& options) {
  radio.validate();
  proto.validate();
  if (topology.size() == 0)
    fail(SimErrc::invalid_topology, "empty topology");
  for (int h : topology.hops)
    if (h < 0) fail(SimErrc::disconnected, "topology is not connected");
  if (packets.empty())
    throw protocol::ProtocolError(protocol::ProtocolErrc::empty_patch,
                                  "EmptyPatch: no packets to disseminate");
  for (const auto& p : packets)
    if (p.payload.size() != framing.payload_size)
      fail(SimErrc::invalid_params, "packet payload does not match L_pkt");
  Engine engine(topology, radio, proto, framing, packets, seed, options);
  return engine.run();
}

namespace {

std::string format_time(Nanos t) {
  auto ns = t.count();
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s%lld.%03lld", ns < 0 ? "-" : "",
                static_cast<long long>(std::llabs(ns) / 1000),
                static_cast<long long>(std::llabs(ns) % 1000));
  return buf;
}

}  // namespace

std::string csv_header(std::size_t packets) {
  std::string out = "seed,node,hops,delivered,completion_us";
  for (std::size_t i = 1; i <= packets; ++i)
    out += ",pk" + std::to_string(i) + "_us";
  out += '\n';
  return out;
}

std::string csv_rows(const RunResult& run) {
  std::string out;
  for (std::size_t i = 0; i < run.nodes.size(); ++i) {
    const auto& n = run.nodes[i];
    out += std::to_string(run.seed) + ',' + std::to_string(i) + ',' +
           std::to_string(n.hops) + ',' + (n.delivered ? "1" : "0") + ',';
    if (n.completion) out += format_time(*n.completion);
    for (const auto& t : n.first_rx) {
      out += ',';
      if (t) out += format_time(*t);
    }
    out += '\n';
  }
  return out;
}

}  // namespace cidp::simnet
