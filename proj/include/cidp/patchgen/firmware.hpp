#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "cidp/bytes.hpp"
#include "cidp/error.hpp"

namespace cidp::patchgen {

enum class PatchErrc {
  free_gap_exhausted,
  duplicate_symbol,
  not_address_stable,
  version_mismatch,
  unknown_symbol,
  truncated_stream,
  not_found,
  duplicate_version,
  invalid_image,
  invalid_patch,
  parse_error,
  io_error,
};

using PatchError = Error<PatchErrc>;

const char* to_string(PatchErrc code);

enum class Section : std::uint8_t { code = 0, data = 1, bss = 2 };
enum class SymbolKind : std::uint8_t {
  function = 0,
  init_global = 1,
  uninit_global = 2,
};

inline constexpr Section kAllSections[] = {Section::code, Section::data,
                                           Section::bss};

const char* to_string(Section s);
const char* to_string(SymbolKind k);
SymbolKind kind_for(Section s);

// A function or global variable. Addresses are absolute byte offsets in the
// image address space; uninit globals carry no content.
struct Symbol {
  std::string name;
  SymbolKind kind = SymbolKind::function;
  std::uint32_t size = 0;
  Bytes content;
  std::uint32_t address = 0;

  std::uint32_t end() const { return address + size; }
  bool operator==(const Symbol&) const = default;
};

struct LayoutParams {
  std::uint32_t code_base = 0;
  std::uint32_t data_base = 0;
  std::uint32_t bss_top = 0;

  bool operator==(const LayoutParams&) const = default;
};

// Symbol-level program image under the amended layout: code grows up from
// code_base, initialized data grows up from data_base and uninitialized data
// grows down from bss_top. The range between the data end and the bss floor
// is the free gap.
struct FirmwareImage {
  std::uint32_t version = 0;
  LayoutParams layout;
  std::vector<Symbol> code;
  std::vector<Symbol> data;
  std::vector<Symbol> bss;

  std::vector<Symbol>& section(Section s);
  const std::vector<Symbol>& section(Section s) const;

  // One past the highest used code/data byte, or the section base if empty.
  std::uint32_t code_end() const;
  std::uint32_t data_end() const;
  // Lowest used bss byte, or bss_top if empty.
  std::uint32_t bss_floor() const;
  std::uint32_t free_gap() const;
  // Upper bound for code; data_base when code sits below data, else
  // unbounded.
  std::uint32_t code_limit() const;

  const Symbol* find(Section s, std::string_view name) const;

  // Throws PatchError(invalid_image / duplicate_symbol / free_gap_exhausted)
  // when any layout invariant is broken.
  void validate() const;

  bool operator==(const FirmwareImage&) const = default;
};

// Text container: header `layout code_base=.. data_base=.. bss_top=..
// version=..` followed by `<section> <name> <kind> <size> <hex|-> [@addr]`
// lines. '#' starts a comment. Symbols without @addr get address 0 (an
// unplaced proposal for reorganize).
FirmwareImage parse_image(std::string_view text);
std::string format_image(const FirmwareImage& image);
FirmwareImage load_image(const std::string& path);
void save_image(const std::string& path, const FirmwareImage& image);

// SHA-256 over the canonical text form.
std::string image_digest(const FirmwareImage& image);

// Places `proposed` against `old`: symbols kept by name and size keep their
// old address, new functions and init globals are appended after the old
// section end, new uninit globals are pushed below the old bss floor.
FirmwareImage reorganize(const FirmwareImage& old,
                         const FirmwareImage& proposed);

}  // namespace cidp::patchgen
