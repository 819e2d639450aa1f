#include "cidp/simnet/radio.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cidp/simnet/topology.hpp"

namespace cidp::simnet {

void RadioParams::validate() const {
  auto bad = [](const std::string& what) {
    throw SimError(SimErrc::invalid_params, "InvalidParams: " + what);
  };
  if (!(t_byte_us > 0)) bad("t_byte must be > 0");
  if (!(t_proc_us > 0)) bad("t_proc must be > 0");
  if (delta_ci_us != kCiThresholdUs) bad("delta_ci is fixed at 0.5 us");
  if (!(sigma_jitter_us >= 0)) bad("sigma_jitter must be >= 0");
  if (!(eps_byte >= 0 && eps_byte <= 1)) bad("eps_byte must lie in [0, 1]");
}

double draw_jitter(const RadioParams& params, Rng& rng) {
  return rng.truncated_normal(params.sigma_jitter_us, 3.0);
}

double byte_survival(const RadioParams& params, std::size_t frame_bytes) {
  if (params.eps_byte <= 0) return 1.0;
  if (params.eps_byte >= 1) return 0.0;
  return std::pow(1.0 - params.eps_byte, static_cast<double>(frame_bytes));
}

bool ci_reception(std::span<const Arrival> group, std::size_t frame_bytes,
                  const RadioParams& params, Rng& rng) {
  if (group.empty()) return false;
  const Bytes* first = group.front().frame;
  double lo = group.front().jitter_us;
  double hi = lo;
  for (const auto& a : group) {
    if (a.frame != first && (!a.frame || !first || *a.frame != *first))
      return false;
    lo = std::min(lo, a.jitter_us);
    hi = std::max(hi, a.jitter_us);
  }
  if (hi - lo >= params.delta_ci_us) return false;
  return rng.bernoulli(byte_survival(params, frame_bytes));
}

}  // namespace cidp::simnet
