#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "cidp/bytes.hpp"
#include "cidp/error.hpp"

namespace cidp::framing {

enum class FramingErrc {
  empty_object,
  object_too_large,
  missing_fragments,
  inconsistent_headers,
  truncated,
  invariant_violation,
};

const char* to_string(FramingErrc code);

class FramingError : public Error<FramingErrc> {
 public:
  FramingError(FramingErrc code, const std::string& what,
               std::vector<std::uint8_t> missing = {})
      : Error(code, what), missing_(std::move(missing)) {}

  // Absent sequence numbers for missing_fragments.
  const std::vector<std::uint8_t>& missing() const { return missing_; }

 private:
  std::vector<std::uint8_t> missing_;
};

inline constexpr std::size_t kHeaderSize = 7;
inline constexpr std::size_t kDefaultPayload = 36;
inline constexpr std::size_t kMaxPackets = 255;

struct FramingParams {
  std::size_t payload_size = kDefaultPayload;  // L_pkt
  std::size_t phy_overhead = 10;               // airtime accounting only

  // Bytes on air for one packet.
  std::size_t frame_bytes() const {
    return phy_overhead + kHeaderSize + payload_size;
  }
};

struct Header {
  std::uint16_t version = 0;
  std::uint8_t total = 0;    // M, packets in the object
  std::uint8_t seq = 0;      // n, 1-based
  std::uint8_t relay = 0;    // relay count of this copy
  std::uint16_t obj_len = 0; // object length before padding

  bool operator==(const Header&) const = default;
};

struct Packet {
  Header header;
  Bytes payload;

  // Same object identity: version, M and obj_len. The relay byte is ignored.
  bool same_object(const Packet& other) const {
    return header.version == other.header.version &&
           header.total == other.header.total &&
           header.obj_len == other.header.obj_len;
  }
  bool operator==(const Packet&) const = default;
};

// Splits an object into ceil(|object| / L_pkt) packets, n = 1..M; the last
// payload is zero-padded.
std::vector<Packet> fragment(ByteView object, const FramingParams& params,
                             std::uint16_t version);

// Inverse of fragment. Duplicate sequence numbers are tolerated when their
// payloads agree.
Bytes reassemble(const std::vector<Packet>& packets);

// Little-endian: version(2) | M(1) | n(1) | relay(1) | obj_len(2) | payload.
Bytes encode(const Packet& packet);
// Infers L_pkt from the input length.
Packet decode(ByteView bytes);
// Requires exactly kHeaderSize + L_pkt bytes.
Packet decode(ByteView bytes, const FramingParams& params);

// Throws FramingError(invariant_violation) if the header and payload
// disagree.
void check_packet(const Packet& packet);

}  // namespace cidp::framing
