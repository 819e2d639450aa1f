#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cidp/error.hpp"
#include "cidp/framing.hpp"
#include "cidp/simnet/radio.hpp"

namespace cidp::bench {

enum class BenchErrc {
  config_error,
  runtime_error,
  verification_failure,
  calibration_failed,
};

const char* to_string(BenchErrc code);

using BenchError = Error<BenchErrc>;

// Per-byte corruption probability at which unfragmented floods of a
// 128-byte patch reach 99.34% reliability on rgg:94:30:100 with N_max = 6
// (measured there: 0.99471 over the 500 runs of the fig8 preset).
// Produced by tools/calibrate_fig8.sh (`cidp calibrate --seed 1`).
inline constexpr double kCalibratedEpsByte = 0.013125;

enum class SweepVariable { none, n, l, n_max, eps_byte, sigma_jitter };

const char* to_string(SweepVariable v);
SweepVariable parse_sweep_variable(std::string_view text);

struct SweepSpec {
  SweepVariable variable = SweepVariable::none;
  std::vector<double> values;
};

// cidp: fragmented into L_pkt payloads; glossy: the whole object in one
// packet.
enum class Mode { cidp, glossy };

const char* to_string(Mode m);

struct ExperimentConfig {
  std::string name = "custom";
  std::string topology = "rgg:94:30:100";
  // Under an N sweep of an rgg topology, scale the square side with sqrt(N)
  // so node density stays that of the base spec.
  bool density_scaling = true;
  simnet::RadioParams radio;
  framing::FramingParams framing;
  std::size_t patch_bytes = 128;  // synthetic patch size
  std::string patch_file;         // overrides patch_bytes when set
  std::optional<int> n_max;       // derived from N when absent
  bool nmax_floor = false;
  std::optional<double> round_period_us;
  bool initiator_retx = true;
  std::vector<Mode> modes{Mode::cidp};
  std::size_t runs = 100;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  SweepSpec sweep;
  unsigned jobs = 1;

  // Throws BenchError(config_error).
  void validate() const;
};

// Flat `key = value` lines; '#' and ';' start comments. Keys not in the
// schema are rejected. Values override `base`.
ExperimentConfig parse_config(std::string_view text, ExperimentConfig base);
ExperimentConfig load_config(const std::string& path, ExperimentConfig base);
std::string format_config(const ExperimentConfig& config);

struct Preset {
  std::string name;
  std::string description;
  ExperimentConfig config;
};

const std::vector<Preset>& presets();
// Throws BenchError(config_error) for an unknown name.
const Preset& find_preset(std::string_view name);

}  // namespace cidp::bench
