#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "cidp/bytes.hpp"
#include "cidp/patchgen/firmware.hpp"

namespace cidp::patchgen {

// Equal-size content rewrite of an existing symbol.
struct ReplaceContent {
  std::string name;
  std::uint32_t address = 0;
  Bytes content;
  bool operator==(const ReplaceContent&) const = default;
};

struct Append {
  Symbol symbol;
  bool operator==(const Append&) const = default;
};

struct Remove {
  std::string name;
  std::uint32_t address = 0;
  std::uint32_t size = 0;
  bool operator==(const Remove&) const = default;
};

struct SetVersion {
  std::uint32_t version = 0;
  bool operator==(const SetVersion&) const = default;
};

using RecordOp = std::variant<ReplaceContent, Append, Remove, SetVersion>;

struct PatchRecord {
  Section section = Section::code;  // ignored for SetVersion
  RecordOp op;

  // Byte range touched in the image; empty for SetVersion.
  std::uint32_t address() const;
  std::uint32_t extent() const;

  bool operator==(const PatchRecord&) const = default;
};

// Canonical record order: section, then address, then op; SetVersion last.
bool canonical_less(const PatchRecord& a, const PatchRecord& b);

struct Patch {
  std::uint32_t base_version = 0;
  std::uint32_t target_version = 0;
  std::vector<PatchRecord> records;

  bool operator==(const Patch&) const = default;
};

// Binary form: "CIDP" | base u32le | target u32le | records...
Bytes serialize(const Patch& patch);
Patch deserialize(ByteView bytes);

// Compressed form: "CIDZ" | rle(serialize(patch)).
Bytes serialize_compressed(const Patch& patch);
// Accepts either the plain or the compressed form.
Patch deserialize_any(ByteView bytes);

Patch diff(const FirmwareImage& old, const FirmwareImage& updated);
FirmwareImage apply(const FirmwareImage& old, const Patch& patch);

}  // namespace cidp::patchgen
