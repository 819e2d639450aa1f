#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cidp/framing.hpp"
#include "cidp/patchgen/firmware.hpp"
#include "cidp/simnet/radio.hpp"

namespace cidp::bench {

struct PipelineInput {
  patchgen::FirmwareImage old_image;
  patchgen::FirmwareImage new_image;  // proposed; placed by reorganize
  std::string topology = "line:3";
  simnet::RadioParams radio;
  framing::FramingParams framing;
  std::optional<int> n_max;
  bool nmax_floor = false;
  std::uint64_t seed = 1;
  std::string store_dir;  // records the version pair when set
};

struct NodeVerdict {
  std::uint32_t node = 0;
  int hops = 0;
  bool delivered = false;
  bool verified = false;
  std::string detail;
};

struct PipelineReport {
  std::uint16_t base_version = 0;
  std::uint16_t target_version = 0;
  std::size_t records = 0;
  std::size_t patch_bytes = 0;       // serialized
  std::size_t compressed_bytes = 0;  // disseminated object
  std::size_t packets = 0;           // M
  int n_max = 0;
  std::string new_digest;
  std::vector<NodeVerdict> nodes;  // non-initiator nodes

  std::size_t delivered() const;
  std::size_t verified() const;
  // No delivered node failed verification.
  bool ok() const { return verified() == delivered(); }
};

// reorganize -> diff -> compress -> fragment -> one simulated flood -> per
// delivered node: decompress, apply, compare with the placed new image.
PipelineReport run_pipeline(const PipelineInput& input);

std::string format_report(const PipelineReport& report);

}  // namespace cidp::bench
