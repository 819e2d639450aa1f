#include "cidp/patchgen/patch.hpp"

#include <algorithm>
#include <cstring>
#include <tuple>

#include "cidp/patchgen/rle.hpp"

namespace cidp::patchgen {

namespace {

constexpr char kMagicPlain[4] = {'C', 'I', 'D', 'P'};
constexpr char kMagicCompressed[4] = {'C', 'I', 'D', 'Z'};
constexpr std::uint8_t kNoSection = 0xff;

[[noreturn]] void fail(PatchErrc code, const std::string& msg) {
  throw PatchError(code, std::string(to_string(code)) + ": " + msg);
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

int section_rank(const PatchRecord& r) {
  if (std::holds_alternative<SetVersion>(r.op)) return 3;
  return static_cast<int>(r.section);
}

const std::string& record_name(const PatchRecord& r) {
  static const std::string none;
  return std::visit(overloaded{
                        [](const ReplaceContent& op) -> const std::string& {
                          return op.name;
                        },
                        [](const Append& op) -> const std::string& {
                          return op.symbol.name;
                        },
                        [](const Remove& op) -> const std::string& {
                          return op.name;
                        },
                        [](const SetVersion&) -> const std::string& {
                          return none;
                        },
                    },
                    r.op);
}

}  // namespace

std::uint32_t PatchRecord::address() const {
  return std::visit(
      overloaded{
          [](const ReplaceContent& op) { return op.address; },
          [](const Append& op) { return op.symbol.address; },
          [](const Remove& op) { return op.address; },
          [](const SetVersion&) { return std::uint32_t{0}; },
      },
      op);
}

std::uint32_t PatchRecord::extent() const {
  return std::visit(
      overloaded{
          [](const ReplaceContent& op) {
            return static_cast<std::uint32_t>(op.content.size());
          },
          [](const Append& op) { return op.symbol.size; },
          [](const Remove& op) { return op.size; },
          [](const SetVersion&) { return std::uint32_t{0}; },
      },
      op);
}

bool canonical_less(const PatchRecord& a, const PatchRecord& b) {
  return std::make_tuple(section_rank(a), a.address(), a.op.index(),
                         std::cref(record_name(a))) <
         std::make_tuple(section_rank(b), b.address(), b.op.index(),
                         std::cref(record_name(b)));
}

// ---------------------------------------------------------------------------
// serialization

namespace {

void put_name(Bytes& out, const std::string& name) {
  if (name.empty() || name.size() > 255)
    fail(PatchErrc::invalid_patch, "symbol name length out of range");
  out.push_back(static_cast<std::uint8_t>(name.size()));
  out.insert(out.end(), name.begin(), name.end());
}

void put_blob(Bytes& out, const Bytes& blob) {
  put_u32le(out, static_cast<std::uint32_t>(blob.size()));
  out.insert(out.end(), blob.begin(), blob.end());
}

class Reader {
 public:
  explicit Reader(ByteView in) : in_(in) {}

  bool done() const { return pos_ == in_.size(); }

  void need(std::size_t n) const {
    if (in_.size() - pos_ < n)
      fail(PatchErrc::truncated_stream, "patch stream ends early");
  }
  std::uint8_t u8() {
    need(1);
    return in_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    auto v = get_u32le(in_, pos_);
    pos_ += 4;
    return v;
  }
  std::string name() {
    std::size_t n = u8();
    if (n == 0) fail(PatchErrc::invalid_patch, "empty symbol name");
    need(n);
    std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  Bytes blob() {
    std::size_t n = u32();
    need(n);
    Bytes b(in_.begin() + static_cast<std::ptrdiff_t>(pos_),
            in_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return b;
  }

 private:
  ByteView in_;
  std::size_t pos_ = 0;
};

Section read_section(std::uint8_t b) {
  if (b > 2) fail(PatchErrc::invalid_patch, "bad section byte");
  return static_cast<Section>(b);
}

}  // namespace

Bytes serialize(const Patch& patch) {
  if (patch.base_version >= patch.target_version)
    fail(PatchErrc::invalid_patch, "base version must precede target version");
  Bytes out(kMagicPlain, kMagicPlain + 4);
  put_u32le(out, patch.base_version);
  put_u32le(out, patch.target_version);
  for (const auto& rec : patch.records) {
    out.push_back(static_cast<std::uint8_t>(rec.op.index()));
    std::visit(
        overloaded{
            [&](const ReplaceContent& op) {
              out.push_back(static_cast<std::uint8_t>(rec.section));
              put_name(out, op.name);
              put_u32le(out, op.address);
              put_blob(out, op.content);
            },
            [&](const Append& op) {
              out.push_back(static_cast<std::uint8_t>(rec.section));
              put_name(out, op.symbol.name);
              out.push_back(static_cast<std::uint8_t>(op.symbol.kind));
              put_u32le(out, op.symbol.size);
              put_u32le(out, op.symbol.address);
              put_blob(out, op.symbol.content);
            },
            [&](const Remove& op) {
              out.push_back(static_cast<std::uint8_t>(rec.section));
              put_name(out, op.name);
              put_u32le(out, op.address);
              put_u32le(out, op.size);
            },
            [&](const SetVersion& op) {
              out.push_back(kNoSection);
              put_u32le(out, op.version);
            },
        },
        rec.op);
  }
  return out;
}

Patch deserialize(ByteView bytes) {
  if (bytes.size() < 12)
    fail(PatchErrc::truncated_stream, "patch shorter than its header");
  if (std::memcmp(bytes.data(), kMagicPlain, 4) != 0)
    fail(PatchErrc::invalid_patch, "bad magic");
  Patch patch;
  patch.base_version = get_u32le(bytes, 4);
  patch.target_version = get_u32le(bytes, 8);
  if (patch.base_version >= patch.target_version)
    fail(PatchErrc::invalid_patch, "base version must precede target version");
  Reader rd(bytes.subspan(12));
  while (!rd.done()) {
    PatchRecord rec;
    std::uint8_t op = rd.u8();
    std::uint8_t sec = rd.u8();
    switch (op) {
      case 0: {
        rec.section = read_section(sec);
        ReplaceContent r;
        r.name = rd.name();
        r.address = rd.u32();
        r.content = rd.blob();
        rec.op = std::move(r);
        break;
      }
      case 1: {
        rec.section = read_section(sec);
        Append a;
        a.symbol.name = rd.name();
        std::uint8_t kind = rd.u8();
        if (kind > 2) fail(PatchErrc::invalid_patch, "bad symbol kind");
        a.symbol.kind = static_cast<SymbolKind>(kind);
        a.symbol.size = rd.u32();
        a.symbol.address = rd.u32();
        a.symbol.content = rd.blob();
        rec.op = std::move(a);
        break;
      }
      case 2: {
        rec.section = read_section(sec);
        Remove r;
        r.name = rd.name();
        r.address = rd.u32();
        r.size = rd.u32();
        rec.op = std::move(r);
        break;
      }
      case 3:
        if (sec != kNoSection)
          fail(PatchErrc::invalid_patch, "set_version carries a section");
        rec.op = SetVersion{rd.u32()};
        break;
      default:
        fail(PatchErrc::invalid_patch, "unknown record op");
    }
    patch.records.push_back(std::move(rec));
  }
  return patch;
}

Bytes serialize_compressed(const Patch& patch) {
  Bytes raw = serialize(patch);
  Bytes out(kMagicCompressed, kMagicCompressed + 4);
  Bytes enc = compress(raw);
  out.insert(out.end(), enc.begin(), enc.end());
  return out;
}

Patch deserialize_any(ByteView bytes) {
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), kMagicCompressed, 4) == 0)
    return deserialize(decompress(bytes.subspan(4)));
  return deserialize(bytes);
}

// ---------------------------------------------------------------------------
// diff / apply

Patch diff(const FirmwareImage& old, const FirmwareImage& updated) {
  if (!(old.layout == updated.layout))
    fail(PatchErrc::invalid_image, "layout parameters differ");
  if (updated.version <= old.version)
    fail(PatchErrc::version_mismatch,
         "new version " + std::to_string(updated.version) +
             " does not follow " + std::to_string(old.version));
  old.validate();
  updated.validate();

  Patch patch;
  patch.base_version = old.version;
  patch.target_version = updated.version;

  for (Section s : kAllSections) {
    for (const auto& prev : old.section(s)) {
      const Symbol* next = updated.find(s, prev.name);
      if (!next) {
        patch.records.push_back({s, Remove{prev.name, prev.address, prev.size}});
        continue;
      }
      if (next->size != prev.size) {
        patch.records.push_back({s, Remove{prev.name, prev.address, prev.size}});
        patch.records.push_back({s, Append{*next}});
        continue;
      }
      if (next->address != prev.address)
        fail(PatchErrc::not_address_stable,
             std::string(to_string(s)) + " symbol '" + prev.name +
                 "' moved from " + std::to_string(prev.address) + " to " +
                 std::to_string(next->address));
      if (next->content != prev.content)
        patch.records.push_back(
            {s, ReplaceContent{prev.name, prev.address, next->content}});
    }
    for (const auto& next : updated.section(s)) {
      if (!old.find(s, next.name)) patch.records.push_back({s, Append{next}});
    }
  }
  patch.records.push_back({Section::code, SetVersion{updated.version}});
  std::sort(patch.records.begin(), patch.records.end(), canonical_less);
  return patch;
}

namespace {

std::vector<Symbol>::iterator find_named(std::vector<Symbol>& syms,
                                         const std::string& name, Section s) {
  auto it = std::find_if(syms.begin(), syms.end(),
                         [&](const Symbol& x) { return x.name == name; });
  if (it == syms.end())
    fail(PatchErrc::unknown_symbol,
         std::string(to_string(s)) + " symbol '" + name + "'");
  return it;
}

}  // namespace

FirmwareImage apply(const FirmwareImage& old, const Patch& patch) {
  if (old.version != patch.base_version)
    fail(PatchErrc::version_mismatch,
         "image is version " + std::to_string(old.version) +
             ", patch expects " + std::to_string(patch.base_version));
  if (patch.target_version <= patch.base_version)
    fail(PatchErrc::invalid_patch, "patch does not advance the version");

  for (const auto& rec : patch.records) {
    if (const auto* op = std::get_if<SetVersion>(&rec.op);
        op && op->version != patch.target_version)
      fail(PatchErrc::invalid_patch, "set_version disagrees with header");
  }

  FirmwareImage out = old;

  // Removes go first so a resized symbol can be re-appended under its name.
  for (const auto& rec : patch.records) {
    if (const auto* op = std::get_if<Remove>(&rec.op)) {
      auto& syms = out.section(rec.section);
      auto it = find_named(syms, op->name, rec.section);
      if (it->address != op->address || it->size != op->size)
        fail(PatchErrc::invalid_patch,
             "remove of '" + op->name + "' does not match its placement");
      syms.erase(it);
    }
  }
  for (const auto& rec : patch.records) {
    if (const auto* op = std::get_if<ReplaceContent>(&rec.op)) {
      auto& syms = out.section(rec.section);
      auto it = find_named(syms, op->name, rec.section);
      if (it->kind == SymbolKind::uninit_global ||
          op->content.size() != it->size || it->address != op->address)
        fail(PatchErrc::invalid_patch,
             "replace of '" + op->name + "' changes its size or placement");
      it->content = op->content;
    }
  }
  for (const auto& rec : patch.records) {
    if (const auto* op = std::get_if<Append>(&rec.op)) {
      auto& syms = out.section(rec.section);
      if (out.find(rec.section, op->symbol.name))
        fail(PatchErrc::duplicate_symbol,
             std::string(to_string(rec.section)) + " symbol '" +
                 op->symbol.name + "'");
      auto pos = std::upper_bound(syms.begin(), syms.end(),
                                  op->symbol.address,
                                  [](std::uint32_t a, const Symbol& s) {
                                    return a < s.address;
                                  });
      syms.insert(pos, op->symbol);
    }
  }

  out.version = patch.target_version;
  try {
    out.validate();
  } catch (const PatchError& e) {
    if (e.code() == PatchErrc::invalid_image)
      fail(PatchErrc::invalid_patch, e.what());
    throw;
  }
  return out;
}

}  // namespace cidp::patchgen
