#pragma once

#include <string>
#include <vector>

#include "cidp/bench/config.hpp"

namespace cidp::bench {

struct CalibrationSpec {
  double target = 0.9934;  // Glossy-mode reliability at the operating point
  double eps_lo = 0.0;
  double eps_hi = 0.02;
  double tolerance = 0.003;
  double resolution = 0.0001;  // stop once the bracket is this narrow
  // Operating point: topology, patch length, N_max, radio, runs, seed, jobs.
  // eps_byte is overwritten by the search; modes and sweep are ignored.
  ExperimentConfig base = find_preset("fig8").config;
};

struct CalibrationStep {
  double eps_byte = 0;
  double reliability = 0;
  double rel_stderr = 0;
};

struct CalibrationResult {
  double eps_byte = 0;
  double reliability = 0;
  double reliability_stderr = 0;
  std::vector<CalibrationStep> steps;  // in evaluation order
};

// Glossy-mode reliability for `base` at one eps_byte. All evaluations reuse
// the seeds seed .. seed + runs - 1.
CalibrationStep evaluate_glossy(const ExperimentConfig& base, double eps_byte);

// Bisection on eps_byte, reliability being nonincreasing in eps_byte.
// Throws BenchError(calibration_failed) when [eps_lo, eps_hi] cannot reach
// the target or the converged point misses it by more than the tolerance.
CalibrationResult calibrate(const CalibrationSpec& spec);

// INI record: operating point, result and the bisection trace.
std::string format_calibration(const CalibrationSpec& spec,
                               const CalibrationResult& result);

}  // namespace cidp::bench
