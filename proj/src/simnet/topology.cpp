#include "cidp/simnet/topology.hpp"

#include <algorithm>
#include <charconv>
#include <deque>
#include <sstream>

#include "cidp/simnet/rng.hpp"

namespace cidp::simnet {

const char* to_string(SimErrc code) {
  switch (code) {
    case SimErrc::invalid_topology: return "InvalidTopology";
    case SimErrc::disconnected: return "Disconnected";
    case SimErrc::event_budget_exceeded: return "EventBudgetExceeded";
    case SimErrc::transmit_bound_violated: return "TransmitBoundViolated";
    case SimErrc::nonidentical_copies: return "NonIdenticalCopies";
    case SimErrc::invalid_params: return "InvalidParams";
    case SimErrc::empty_input: return "EmptyInput";
  }
  return "?";
}

namespace {

[[noreturn]] void fail(SimErrc code, const std::string& msg) {
  throw SimError(code, std::string(to_string(code)) + ": " + msg);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::uint32_t to_count(std::string_view tok, std::string_view whole) {
  std::uint32_t v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || p != tok.data() + tok.size() || v == 0)
    fail(SimErrc::invalid_topology, "bad count in '" + std::string(whole) + "'");
  return v;
}

double to_real(std::string_view tok, std::string_view whole) {
  double v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || p != tok.data() + tok.size() || !(v > 0))
    fail(SimErrc::invalid_topology,
         "bad length in '" + std::string(whole) + "'");
  return v;
}

}  // namespace

TopologySpec parse_topology(std::string_view text) {
  auto parts = split(text, ':');
  if (parts[0] == "line" && (parts.size() == 2 || parts.size() == 3)) {
    LineSpec s;
    s.nodes = to_count(parts[1], text);
    if (parts.size() == 3) s.radius = to_real(parts[2], text);
    return s;
  }
  if (parts[0] == "grid" && (parts.size() == 2 || parts.size() == 3)) {
    auto dims = split(parts[1], 'x');
    if (dims.size() != 2)
      fail(SimErrc::invalid_topology, "grid needs AxB: " + std::string(text));
    GridSpec s;
    s.cols = to_count(dims[0], text);
    s.rows = to_count(dims[1], text);
    if (parts.size() == 3) s.radius = to_real(parts[2], text);
    return s;
  }
  if (parts[0] == "rgg" && parts.size() == 4) {
    RggSpec s;
    s.nodes = to_count(parts[1], text);
    s.radius = to_real(parts[2], text);
    s.side = to_real(parts[3], text);
    return s;
  }
  fail(SimErrc::invalid_topology, "unrecognized topology '" +
                                      std::string(text) + "'");
}

std::string format_topology(const TopologySpec& spec) {
  std::ostringstream out;
  if (const auto* l = std::get_if<LineSpec>(&spec)) {
    out << "line:" << l->nodes << ':' << l->radius;
  } else if (const auto* g = std::get_if<GridSpec>(&spec)) {
    out << "grid:" << g->cols << 'x' << g->rows << ':' << g->radius;
  } else {
    const auto& r = std::get<RggSpec>(spec);
    out << "rgg:" << r.nodes << ':' << r.radius << ':' << r.side;
  }
  return out.str();
}

std::uint32_t node_count(const TopologySpec& spec) {
  if (const auto* l = std::get_if<LineSpec>(&spec)) return l->nodes;
  if (const auto* g = std::get_if<GridSpec>(&spec)) return g->cols * g->rows;
  return std::get<RggSpec>(spec).nodes;
}

int Topology::max_hops() const {
  int m = 0;
  for (int h : hops) m = std::max(m, h);
  return m;
}

Topology connect(std::vector<Position> positions, double radius) {
  Topology t;
  t.radius = radius;
  t.positions = std::move(positions);
  const std::size_t n = t.positions.size();
  t.adjacency.assign(n, {});
  const double r2 = radius * radius;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double dx = t.positions[i].x - t.positions[j].x;
      double dy = t.positions[i].y - t.positions[j].y;
      if (dx * dx + dy * dy <= r2) {
        t.adjacency[i].push_back(static_cast<std::uint32_t>(j));
        t.adjacency[j].push_back(static_cast<std::uint32_t>(i));
      }
    }
  }
  for (auto& adj : t.adjacency) std::sort(adj.begin(), adj.end());

  t.hops.assign(n, -1);
  if (n == 0) return t;
  std::deque<std::uint32_t> queue{0};
  t.hops[0] = 0;
  while (!queue.empty()) {
    auto u = queue.front();
    queue.pop_front();
    for (auto v : t.adjacency[u]) {
      if (t.hops[v] < 0) {
        t.hops[v] = t.hops[u] + 1;
        queue.push_back(v);
      }
    }
  }
  return t;
}

namespace {

bool connected(const Topology& t) {
  return std::all_of(t.hops.begin(), t.hops.end(),
                     [](int h) { return h >= 0; });
}

}  // namespace

Topology build_topology(const TopologySpec& spec, std::uint64_t seed) {
  if (const auto* l = std::get_if<LineSpec>(&spec)) {
    if (l->nodes == 0 || !(l->spacing > 0) || !(l->radius > 0))
      fail(SimErrc::invalid_topology, "line parameters must be positive");
    std::vector<Position> pos;
    for (std::uint32_t i = 0; i < l->nodes; ++i)
      pos.push_back({i * l->spacing, 0.0});
    auto t = connect(std::move(pos), l->radius);
    if (!connected(t))
      fail(SimErrc::disconnected, "line radius below node spacing");
    return t;
  }
  if (const auto* g = std::get_if<GridSpec>(&spec)) {
    if (g->cols == 0 || g->rows == 0 || !(g->spacing > 0) || !(g->radius > 0))
      fail(SimErrc::invalid_topology, "grid parameters must be positive");
    std::vector<Position> pos;
    for (std::uint32_t r = 0; r < g->rows; ++r)
      for (std::uint32_t c = 0; c < g->cols; ++c)
        pos.push_back({c * g->spacing, r * g->spacing});
    auto t = connect(std::move(pos), g->radius);
    if (!connected(t))
      fail(SimErrc::disconnected, "grid radius below node spacing");
    return t;
  }

  const auto& r = std::get<RggSpec>(spec);
  if (r.nodes == 0 || !(r.radius > 0) || !(r.side > 0))
    fail(SimErrc::invalid_topology, "rgg parameters must be positive");
  Rng rng(mix_seed(seed, 0x7090));
  for (int attempt = 1; attempt <= kRggMaxAttempts; ++attempt) {
    std::vector<Position> pos(r.nodes);
    for (auto& p : pos) {
      p.x = rng.uniform() * r.side;
      p.y = rng.uniform() * r.side;
    }
    auto t = connect(std::move(pos), r.radius);
    if (connected(t)) {
      t.attempts = attempt;
      return t;
    }
  }
  fail(SimErrc::disconnected,
       "no connected placement of " + std::to_string(r.nodes) +
           " nodes after " + std::to_string(kRggMaxAttempts) + " attempts");
}

}  // namespace cidp::simnet
