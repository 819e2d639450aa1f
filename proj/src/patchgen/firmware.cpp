#include "cidp/patchgen/firmware.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace cidp::patchgen {

const char* to_string(PatchErrc code) {
  switch (code) {
    case PatchErrc::free_gap_exhausted: return "FreeGapExhausted";
    case PatchErrc::duplicate_symbol: return "DuplicateSymbol";
    case PatchErrc::not_address_stable: return "NotAddressStable";
    case PatchErrc::version_mismatch: return "VersionMismatch";
    case PatchErrc::unknown_symbol: return "UnknownSymbol";
    case PatchErrc::truncated_stream: return "TruncatedStream";
    case PatchErrc::not_found: return "NotFound";
    case PatchErrc::duplicate_version: return "DuplicateVersion";
    case PatchErrc::invalid_image: return "InvalidImage";
    case PatchErrc::invalid_patch: return "InvalidPatch";
    case PatchErrc::parse_error: return "ParseError";
    case PatchErrc::io_error: return "IoError";
  }
  return "?";
}

const char* to_string(Section s) {
  switch (s) {
    case Section::code: return "code";
    case Section::data: return "data";
    case Section::bss: return "bss";
  }
  return "?";
}

const char* to_string(SymbolKind k) {
  switch (k) {
    case SymbolKind::function: return "function";
    case SymbolKind::init_global: return "init_global";
    case SymbolKind::uninit_global: return "uninit_global";
  }
  return "?";
}

SymbolKind kind_for(Section s) {
  switch (s) {
    case Section::code: return SymbolKind::function;
    case Section::data: return SymbolKind::init_global;
    case Section::bss: return SymbolKind::uninit_global;
  }
  return SymbolKind::function;
}

std::vector<Symbol>& FirmwareImage::section(Section s) {
  switch (s) {
    case Section::code: return code;
    case Section::data: return data;
    case Section::bss: return bss;
  }
  return code;
}

const std::vector<Symbol>& FirmwareImage::section(Section s) const {
  return const_cast<FirmwareImage*>(this)->section(s);
}

std::uint32_t FirmwareImage::code_end() const {
  std::uint32_t end = layout.code_base;
  for (const auto& s : code) end = std::max(end, s.end());
  return end;
}

std::uint32_t FirmwareImage::data_end() const {
  std::uint32_t end = layout.data_base;
  for (const auto& s : data) end = std::max(end, s.end());
  return end;
}

std::uint32_t FirmwareImage::bss_floor() const {
  std::uint32_t floor = layout.bss_top;
  for (const auto& s : bss) floor = std::min(floor, s.address);
  return floor;
}

std::uint32_t FirmwareImage::free_gap() const {
  auto lo = data_end();
  auto hi = bss_floor();
  return hi > lo ? hi - lo : 0;
}

std::uint32_t FirmwareImage::code_limit() const {
  if (layout.code_base < layout.data_base) return layout.data_base;
  return std::numeric_limits<std::uint32_t>::max();
}

const Symbol* FirmwareImage::find(Section s, std::string_view name) const {
  for (const auto& sym : section(s))
    if (sym.name == name) return &sym;
  return nullptr;
}

namespace {

[[noreturn]] void fail(PatchErrc code, const std::string& msg) {
  throw PatchError(code, std::string(to_string(code)) + ": " + msg);
}

void check_names_unique(const FirmwareImage& image, Section s) {
  std::set<std::string_view> seen;
  for (const auto& sym : image.section(s)) {
    if (!seen.insert(sym.name).second)
      fail(PatchErrc::duplicate_symbol,
           std::string(to_string(s)) + " symbol '" + sym.name + "'");
  }
}

void check_symbol_shape(const Symbol& sym, Section s) {
  if (sym.kind != kind_for(s))
    fail(PatchErrc::invalid_image, "symbol '" + sym.name + "' of kind " +
                                       to_string(sym.kind) + " in section " +
                                       to_string(s));
  if (sym.size == 0)
    fail(PatchErrc::invalid_image, "symbol '" + sym.name + "' has size 0");
  std::size_t want = sym.kind == SymbolKind::uninit_global ? 0 : sym.size;
  if (sym.content.size() != want)
    fail(PatchErrc::invalid_image,
         "symbol '" + sym.name + "' content length does not match size");
  if (sym.name.empty() || sym.name.size() > 255 ||
      sym.name.find_first_of(" \t\r\n#") != std::string::npos)
    fail(PatchErrc::invalid_image, "bad symbol name '" + sym.name + "'");
}

}  // namespace

void FirmwareImage::validate() const {
  if (layout.data_base > layout.bss_top)
    fail(PatchErrc::invalid_image, "data_base above bss_top");
  for (Section s : kAllSections) {
    check_names_unique(*this, s);
    const auto& syms = section(s);
    std::uint64_t lo = s == Section::code ? layout.code_base : layout.data_base;
    std::uint64_t hi = s == Section::code ? code_limit() : layout.bss_top;
    std::uint64_t prev_end = lo;
    for (const auto& sym : syms) {
      check_symbol_shape(sym, s);
      std::uint64_t end = std::uint64_t{sym.address} + sym.size;
      if (sym.address < prev_end || end > hi)
        fail(PatchErrc::invalid_image,
             "symbol '" + sym.name + "' overlaps or leaves its section");
      prev_end = end;
    }
  }
  if (data_end() > bss_floor())
    fail(PatchErrc::free_gap_exhausted, "data meets bss");
}

// ---------------------------------------------------------------------------
// text container

namespace {

std::uint64_t parse_number(std::string_view tok, std::size_t line) {
  int base = 10;
  if (tok.size() > 2 && tok[0] == '0' && (tok[1] == 'x' || tok[1] == 'X')) {
    tok.remove_prefix(2);
    base = 16;
  }
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v, base);
  if (ec != std::errc{} || p != tok.data() + tok.size() ||
      v > std::numeric_limits<std::uint32_t>::max())
    fail(PatchErrc::parse_error,
         "line " + std::to_string(line) + ": bad number '" + std::string(tok) +
             "'");
  return v;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

Section parse_section(std::string_view tok, std::size_t line) {
  if (tok == "code") return Section::code;
  if (tok == "data") return Section::data;
  if (tok == "bss") return Section::bss;
  fail(PatchErrc::parse_error,
       "line " + std::to_string(line) + ": unknown section '" +
           std::string(tok) + "'");
}

SymbolKind parse_kind(std::string_view tok, std::size_t line) {
  if (tok == "function") return SymbolKind::function;
  if (tok == "init_global") return SymbolKind::init_global;
  if (tok == "uninit_global") return SymbolKind::uninit_global;
  fail(PatchErrc::parse_error, "line " + std::to_string(line) +
                                   ": unknown kind '" + std::string(tok) + "'");
}

}  // namespace

FirmwareImage parse_image(std::string_view text) {
  FirmwareImage image;
  bool have_header = false;
  std::size_t line_no = 0;
  while (!text.empty()) {
    auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    auto tok = split_ws(line);
    if (tok.empty()) continue;

    if (!have_header) {
      if (tok[0] != "layout")
        fail(PatchErrc::parse_error, "missing layout header");
      bool seen[4] = {};
      for (std::size_t i = 1; i < tok.size(); ++i) {
        auto eq = tok[i].find('=');
        if (eq == std::string_view::npos)
          fail(PatchErrc::parse_error, "malformed header field");
        auto key = tok[i].substr(0, eq);
        auto v = static_cast<std::uint32_t>(
            parse_number(tok[i].substr(eq + 1), line_no));
        if (key == "code_base") {
          image.layout.code_base = v;
          seen[0] = true;
        } else if (key == "data_base") {
          image.layout.data_base = v;
          seen[1] = true;
        } else if (key == "bss_top") {
          image.layout.bss_top = v;
          seen[2] = true;
        } else if (key == "version") {
          image.version = v;
          seen[3] = true;
        } else {
          fail(PatchErrc::parse_error,
               "unknown header field '" + std::string(key) + "'");
        }
      }
      if (!(seen[0] && seen[1] && seen[2] && seen[3]))
        fail(PatchErrc::parse_error, "incomplete layout header");
      have_header = true;
      continue;
    }

    if (tok.size() != 5 && tok.size() != 6)
      fail(PatchErrc::parse_error,
           "line " + std::to_string(line_no) + ": expected 5 or 6 fields");
    Section sec = parse_section(tok[0], line_no);
    Symbol sym;
    sym.name = std::string(tok[1]);
    sym.kind = parse_kind(tok[2], line_no);
    sym.size = static_cast<std::uint32_t>(parse_number(tok[3], line_no));
    if (tok[4] != "-") {
      auto content = from_hex(tok[4]);
      if (!content)
        fail(PatchErrc::parse_error,
             "line " + std::to_string(line_no) + ": bad hex content");
      sym.content = std::move(*content);
    }
    if (tok.size() == 6) {
      if (tok[5].empty() || tok[5][0] != '@')
        fail(PatchErrc::parse_error,
             "line " + std::to_string(line_no) + ": expected @address");
      sym.address =
          static_cast<std::uint32_t>(parse_number(tok[5].substr(1), line_no));
    }
    check_symbol_shape(sym, sec);
    image.section(sec).push_back(std::move(sym));
  }
  if (!have_header) fail(PatchErrc::parse_error, "empty image");
  for (Section s : kAllSections) check_names_unique(image, s);
  return image;
}

std::string format_image(const FirmwareImage& image) {
  std::ostringstream out;
  out << "layout code_base=" << image.layout.code_base
      << " data_base=" << image.layout.data_base
      << " bss_top=" << image.layout.bss_top << " version=" << image.version
      << '\n';
  for (Section s : kAllSections) {
    for (const auto& sym : image.section(s)) {
      out << to_string(s) << ' ' << sym.name << ' ' << to_string(sym.kind)
          << ' ' << sym.size << ' '
          << (sym.content.empty() ? std::string("-") : to_hex(sym.content))
          << " @" << sym.address << '\n';
    }
  }
  return out.str();
}

FirmwareImage load_image(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(PatchErrc::io_error, "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_image(buf.str());
}

void save_image(const std::string& path, const FirmwareImage& image) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(PatchErrc::io_error, "cannot write " + path);
  out << format_image(image);
  if (!out) fail(PatchErrc::io_error, "write failed for " + path);
}

std::string image_digest(const FirmwareImage& image) {
  std::string text = format_image(image);
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr) !=
      1)
    fail(PatchErrc::io_error, "sha256 failed");
  return to_hex(ByteView(md, len));
}

// ---------------------------------------------------------------------------
// reorganize

FirmwareImage reorganize(const FirmwareImage& old,
                         const FirmwareImage& proposed) {
  if (!(old.layout == proposed.layout))
    fail(PatchErrc::invalid_image, "layout parameters differ");

  FirmwareImage out;
  out.version = proposed.version;
  out.layout = old.layout;

  for (Section s : kAllSections) {
    check_names_unique(proposed, s);
    // Growth fronts start from the old image so that freed space inside the
    // old extent is never reused by this update.
    std::uint64_t up = s == Section::code ? old.code_end() : old.data_end();
    std::uint64_t down = old.bss_floor();
    auto& placed = out.section(s);
    for (const auto& want : proposed.section(s)) {
      check_symbol_shape(want, s);
      Symbol sym = want;
      const Symbol* prev = old.find(s, want.name);
      if (prev && prev->size == want.size) {
        sym.address = prev->address;
      } else if (s == Section::bss) {
        if (down < want.size)
          fail(PatchErrc::free_gap_exhausted, "bss underflow at '" + want.name + "'");
        down -= want.size;
        sym.address = static_cast<std::uint32_t>(down);
      } else {
        sym.address = static_cast<std::uint32_t>(up);
        up += want.size;
        std::uint64_t limit =
            s == Section::code ? old.code_limit() : old.layout.bss_top;
        if (up > limit)
          fail(PatchErrc::free_gap_exhausted,
               std::string(to_string(s)) + " overflow at '" + want.name + "'");
      }
      placed.push_back(std::move(sym));
    }
    std::stable_sort(placed.begin(), placed.end(),
                     [](const Symbol& a, const Symbol& b) {
                       return a.address < b.address;
                     });
  }

  if (out.data_end() > out.bss_floor())
    fail(PatchErrc::free_gap_exhausted,
         "data end " + std::to_string(out.data_end()) + " meets bss floor " +
             std::to_string(out.bss_floor()));
  out.validate();
  return out;
}

}  // namespace cidp::patchgen
