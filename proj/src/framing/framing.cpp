#include "cidp/framing.hpp"

#include <algorithm>
#include <map>

namespace cidp::framing {

const char* to_string(FramingErrc code) {
  switch (code) {
    case FramingErrc::empty_object: return "EmptyObject";
    case FramingErrc::object_too_large: return "ObjectTooLarge";
    case FramingErrc::missing_fragments: return "MissingFragments";
    case FramingErrc::inconsistent_headers: return "InconsistentHeaders";
    case FramingErrc::truncated: return "Truncated";
    case FramingErrc::invariant_violation: return "InvariantViolation";
  }
  return "?";
}

namespace {

[[noreturn]] void fail(FramingErrc code, const std::string& msg) {
  throw FramingError(code, std::string(to_string(code)) + ": " + msg);
}

}  // namespace

void check_packet(const Packet& p) {
  const auto& h = p.header;
  const std::size_t l_pkt = p.payload.size();
  if (l_pkt == 0) fail(FramingErrc::invariant_violation, "empty payload");
  if (h.total == 0) fail(FramingErrc::invariant_violation, "M = 0");
  if (h.seq == 0 || h.seq > h.total)
    fail(FramingErrc::invariant_violation,
         "sequence number " + std::to_string(h.seq) + " outside 1.." +
             std::to_string(h.total));
  std::size_t cap = std::size_t{h.total} * l_pkt;
  if (h.obj_len > cap || h.obj_len <= cap - l_pkt)
    fail(FramingErrc::invariant_violation,
         "obj_len " + std::to_string(h.obj_len) + " inconsistent with M = " +
             std::to_string(h.total) + ", L_pkt = " + std::to_string(l_pkt));
  if (h.seq == h.total) {
    std::size_t used = h.obj_len - (cap - l_pkt);
    if (std::any_of(p.payload.begin() + static_cast<std::ptrdiff_t>(used),
                    p.payload.end(), [](std::uint8_t b) { return b != 0; }))
      fail(FramingErrc::invariant_violation, "nonzero padding");
  }
}

std::vector<Packet> fragment(ByteView object, const FramingParams& params,
                             std::uint16_t version) {
  const std::size_t l_pkt = params.payload_size;
  if (l_pkt == 0) fail(FramingErrc::invariant_violation, "L_pkt = 0");
  if (object.empty()) fail(FramingErrc::empty_object, "nothing to fragment");
  std::size_t m = (object.size() + l_pkt - 1) / l_pkt;
  if (m > kMaxPackets || object.size() > 0xffff)
    fail(FramingErrc::object_too_large,
         std::to_string(object.size()) + " bytes need " + std::to_string(m) +
             " packets");

  std::vector<Packet> out;
  out.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    Packet p;
    p.header.version = version;
    p.header.total = static_cast<std::uint8_t>(m);
    p.header.seq = static_cast<std::uint8_t>(i + 1);
    p.header.obj_len = static_cast<std::uint16_t>(object.size());
    p.payload.assign(l_pkt, 0);
    std::size_t from = i * l_pkt;
    std::size_t n = std::min(l_pkt, object.size() - from);
    std::copy_n(object.begin() + static_cast<std::ptrdiff_t>(from), n,
                p.payload.begin());
    out.push_back(std::move(p));
  }
  return out;
}

Bytes reassemble(const std::vector<Packet>& packets) {
  if (packets.empty())
    fail(FramingErrc::missing_fragments, "no packets");
  const Packet& first = packets.front();
  std::map<std::uint8_t, const Packet*> by_seq;
  for (const auto& p : packets) {
    check_packet(p);
    if (!p.same_object(first) || p.payload.size() != first.payload.size())
      fail(FramingErrc::inconsistent_headers,
           "packets belong to different objects");
    auto [it, fresh] = by_seq.emplace(p.header.seq, &p);
    if (!fresh && it->second->payload != p.payload)
      fail(FramingErrc::inconsistent_headers,
           "conflicting payloads for n = " + std::to_string(p.header.seq));
  }

  std::vector<std::uint8_t> missing;
  for (unsigned n = 1; n <= first.header.total; ++n)
    if (!by_seq.count(static_cast<std::uint8_t>(n)))
      missing.push_back(static_cast<std::uint8_t>(n));
  if (!missing.empty()) {
    std::string list;
    for (auto n : missing) list += (list.empty() ? "" : ",") + std::to_string(n);
    throw FramingError(FramingErrc::missing_fragments,
                       "MissingFragments: [" + list + "]", missing);
  }

  Bytes out;
  out.reserve(std::size_t{first.header.total} * first.payload.size());
  for (const auto& [n, p] : by_seq)
    out.insert(out.end(), p->payload.begin(), p->payload.end());
  out.resize(first.header.obj_len);
  return out;
}

Bytes encode(const Packet& p) {
  check_packet(p);
  Bytes out;
  out.reserve(kHeaderSize + p.payload.size());
  put_u16le(out, p.header.version);
  out.push_back(p.header.total);
  out.push_back(p.header.seq);
  out.push_back(p.header.relay);
  put_u16le(out, p.header.obj_len);
  out.insert(out.end(), p.payload.begin(), p.payload.end());
  return out;
}

Packet decode(ByteView bytes) {
  if (bytes.size() <= kHeaderSize)
    fail(FramingErrc::truncated,
         std::to_string(bytes.size()) + " bytes cannot hold a packet");
  Packet p;
  p.header.version = get_u16le(bytes, 0);
  p.header.total = bytes[2];
  p.header.seq = bytes[3];
  p.header.relay = bytes[4];
  p.header.obj_len = get_u16le(bytes, 5);
  p.payload.assign(bytes.begin() + kHeaderSize, bytes.end());
  check_packet(p);
  return p;
}

Packet decode(ByteView bytes, const FramingParams& params) {
  if (bytes.size() < kHeaderSize + params.payload_size)
    fail(FramingErrc::truncated, "expected " +
                                     std::to_string(kHeaderSize +
                                                    params.payload_size) +
                                     " bytes, got " +
                                     std::to_string(bytes.size()));
  if (bytes.size() > kHeaderSize + params.payload_size)
    fail(FramingErrc::invariant_violation, "packet longer than L_pkt");
  return decode(bytes);
}

}  // namespace cidp::framing
