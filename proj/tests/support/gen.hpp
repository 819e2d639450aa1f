#pragma once

// Random firmware images, mutation scripts and independent oracles shared by
// the unit tests and the acceptance binary.

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cidp/patchgen/firmware.hpp"
#include "cidp/patchgen/patch.hpp"

namespace cidp::testing {

using patchgen::FirmwareImage;
using patchgen::Section;
using patchgen::Symbol;

using Prng = std::mt19937_64;

Bytes random_bytes(Prng& rng, std::size_t n);

// A placed, valid image: code from 0, data from 4096, bss down from 8192,
// with symbols packed in each section.
FirmwareImage random_image(Prng& rng, std::uint32_t version = 1);

// Unplaced proposal derived from `old`: removals, equal-size rewrites,
// resizes and additions. With `fit` the net growth stays inside the code
// room and the free gap; without it the script may overflow.
FirmwareImage random_proposal(Prng& rng, const FirmwareImage& old, bool fit);

// Byte-level rendering of an image: address -> byte (256 marks an
// uninitialized bss byte). Built without the library's layout helpers.
using ByteMap = std::map<std::uint32_t, int>;
ByteMap render(const FirmwareImage& image);

// Addresses whose occupancy or value differs between two renderings.
std::vector<std::uint32_t> modified_addresses(const ByteMap& a, const ByteMap& b);

// Placement oracle: paints survivors and appended symbols byte by byte
// onto a map of the address space and reports whether every byte fits
// without collision. Growth fronts start at the old section ends.
bool placement_fits(const FirmwareImage& old, const FirmwareImage& proposed);

// Symbol instances (section, name, address, size) that were removed, added
// or rewritten in place between two placed images.
struct SymbolDelta {
  std::size_t removed = 0;
  std::size_t added = 0;
  std::size_t rewritten = 0;
  std::map<Section, std::size_t> per_section;
  std::size_t total() const { return removed + added + rewritten; }
};
SymbolDelta symbol_delta(const FirmwareImage& old, const FirmwareImage& updated);

// Hand-rolled run-length reference decoder for the codec definition.
std::optional<Bytes> reference_decode(const Bytes& encoded);

}  // namespace cidp::testing
