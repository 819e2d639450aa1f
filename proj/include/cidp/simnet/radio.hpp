#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "cidp/bytes.hpp"
#include "cidp/simnet/rng.hpp"

namespace cidp::simnet {

// Alignment window for constructive interference, in microseconds.
inline constexpr double kCiThresholdUs = 0.5;

struct RadioParams {
  double t_byte_us = 32.0;        // 250 kbps
  double t_proc_us = 23.0;        // software turnaround
  double delta_ci_us = kCiThresholdUs;
  double sigma_jitter_us = 0.1;   // per-transmission start offset std-dev
  double eps_byte = 0.0;          // independent per-byte corruption

  // Throws SimError(invalid_params).
  void validate() const;
};

// One concurrent transmission as seen by a receiver.
struct Arrival {
  std::uint32_t transmitter = 0;
  double jitter_us = 0.0;
  const Bytes* frame = nullptr;
};

// Start offset of one transmission: N(0, sigma^2) truncated at 3 sigma.
double draw_jitter(const RadioParams& params, Rng& rng);

// Probability that a frame of `frame_bytes` survives byte corruption.
double byte_survival(const RadioParams& params, std::size_t frame_bytes);

// Reception of a same-slot group: all frames bit-identical, start spread
// below delta_ci, then one Bernoulli draw on byte survival.
bool ci_reception(std::span<const Arrival> group, std::size_t frame_bytes,
                  const RadioParams& params, Rng& rng);

}  // namespace cidp::simnet
