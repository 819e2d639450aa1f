#include "cidp/patchgen/version_store.hpp"

#include <cstring>
#include <fstream>
#include <iterator>

namespace cidp::patchgen {

namespace fs = std::filesystem;

namespace {

constexpr char kMagic[4] = {'C', 'I', 'D', 'V'};

[[noreturn]] void fail(PatchErrc code, const std::string& msg) {
  throw PatchError(code, std::string(to_string(code)) + ": " + msg);
}

Bytes encode_entry(const VersionEntry& e) {
  Bytes out(kMagic, kMagic + 4);
  for (const std::string* s : {&e.old_digest, &e.new_digest}) {
    out.push_back(static_cast<std::uint8_t>(s->size()));
    out.insert(out.end(), s->begin(), s->end());
  }
  out.insert(out.end(), e.patch_bytes.begin(), e.patch_bytes.end());
  return out;
}

VersionEntry decode_entry(ByteView in, const fs::path& where) {
  if (in.size() < 4 || std::memcmp(in.data(), kMagic, 4) != 0)
    fail(PatchErrc::io_error, "corrupt version entry " + where.string());
  VersionEntry e;
  std::size_t pos = 4;
  for (std::string* s : {&e.old_digest, &e.new_digest}) {
    if (pos >= in.size())
      fail(PatchErrc::io_error, "corrupt version entry " + where.string());
    std::size_t n = in[pos++];
    if (in.size() - pos < n)
      fail(PatchErrc::io_error, "corrupt version entry " + where.string());
    s->assign(reinterpret_cast<const char*>(in.data() + pos), n);
    pos += n;
  }
  e.patch_bytes.assign(in.begin() + static_cast<std::ptrdiff_t>(pos),
                       in.end());
  return e;
}

Bytes read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) fail(PatchErrc::io_error, "cannot open " + p.string());
  return Bytes(std::istreambuf_iterator<char>(in),
               std::istreambuf_iterator<char>());
}

}  // namespace

VersionStore::VersionStore(fs::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) fail(PatchErrc::io_error, "cannot create " + dir_.string());
}

fs::path VersionStore::path_for(std::uint32_t base,
                                std::uint32_t target) const {
  return dir_ / (std::to_string(base) + "_" + std::to_string(target) +
                 ".patch");
}

bool VersionStore::contains(std::uint32_t base, std::uint32_t target) const {
  return fs::exists(path_for(base, target));
}

void VersionStore::store(const FirmwareImage& old,
                         const FirmwareImage& updated,
                         const Bytes& patch_bytes) {
  Patch parsed = deserialize_any(patch_bytes);
  if (parsed.base_version != old.version ||
      parsed.target_version != updated.version)
    fail(PatchErrc::version_mismatch,
         "patch versions do not match the stored images");

  VersionEntry entry{image_digest(old), image_digest(updated), patch_bytes};
  fs::path target = path_for(old.version, updated.version);
  if (fs::exists(target)) {
    if (lookup(old.version, updated.version) == entry) return;
    fail(PatchErrc::duplicate_version,
         "version pair already stored with different contents: " +
             target.filename().string());
  }

  Bytes blob = encode_entry(entry);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(PatchErrc::io_error, "cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(blob.data()),
              static_cast<std::streamsize>(blob.size()));
    if (!out) fail(PatchErrc::io_error, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) fail(PatchErrc::io_error, "cannot commit " + target.string());
}

void VersionStore::store(const FirmwareImage& old,
                         const FirmwareImage& updated, const Patch& patch) {
  store(old, updated, serialize(patch));
}

VersionEntry VersionStore::lookup(std::uint32_t base,
                                  std::uint32_t target) const {
  fs::path p = path_for(base, target);
  if (!fs::exists(p))
    fail(PatchErrc::not_found, "no patch stored for " + std::to_string(base) +
                                   " -> " + std::to_string(target));
  return decode_entry(read_file(p), p);
}

}  // namespace cidp::patchgen
