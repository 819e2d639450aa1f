#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "cidp/bytes.hpp"
#include "cidp/patchgen/firmware.hpp"
#include "cidp/patchgen/patch.hpp"

namespace cidp::patchgen {

struct VersionEntry {
  std::string old_digest;
  std::string new_digest;
  Bytes patch_bytes;

  Patch patch() const { return deserialize_any(patch_bytes); }
  bool operator==(const VersionEntry&) const = default;
};

// Directory of immutable (old, new, patch) tuples, one file per version pair
// named <base>_<target>.patch. Single writer.
class VersionStore {
 public:
  explicit VersionStore(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path path_for(std::uint32_t base,
                                 std::uint32_t target) const;

  // Storing identical bytes under an existing key is a no-op; different
  // bytes throw PatchError(duplicate_version).
  void store(const FirmwareImage& old, const FirmwareImage& updated,
             const Bytes& patch_bytes);
  void store(const FirmwareImage& old, const FirmwareImage& updated,
             const Patch& patch);

  // Throws PatchError(not_found) for an absent pair.
  VersionEntry lookup(std::uint32_t base, std::uint32_t target) const;
  bool contains(std::uint32_t base, std::uint32_t target) const;

 private:
  std::filesystem::path dir_;
};

}  // namespace cidp::patchgen
