#include "cidp/bench/calibrate.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "cidp/bench/experiment.hpp"

namespace cidp::bench {

namespace {

[[noreturn]] void calibration_fail(const std::string& msg) {
  throw BenchError(BenchErrc::calibration_failed, "CalibrationFailed: " + msg);
}

std::string g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

CalibrationStep evaluate_glossy(const ExperimentConfig& base, double eps_byte) {
  ExperimentConfig c = base;
  c.radio.eps_byte = eps_byte;
  c.sweep = {};
  auto point = run_point(resolve_point(c, Mode::glossy, std::nullopt), c.runs,
                         c.seed, c.jobs);
  return {eps_byte, point.metrics.reliability, point.metrics.reliability_stderr};
}

CalibrationResult calibrate(const CalibrationSpec& spec) {
  if (!(spec.target > 0 && spec.target <= 1))
    throw BenchError(BenchErrc::config_error,
                     "ConfigError: calibration target must lie in (0, 1]");
  if (!(spec.eps_lo >= 0 && spec.eps_lo < spec.eps_hi && spec.eps_hi <= 1))
    throw BenchError(BenchErrc::config_error,
                     "ConfigError: need 0 <= eps_lo < eps_hi <= 1");
  spec.base.validate();

  CalibrationResult r;
  auto eval = [&](double eps) {
    r.steps.push_back(evaluate_glossy(spec.base, eps));
    return r.steps.back();
  };
  auto finish = [&](const CalibrationStep& s) {
    r.eps_byte = s.eps_byte;
    r.reliability = s.reliability;
    r.reliability_stderr = s.rel_stderr;
    return r;
  };

  auto lo = eval(spec.eps_lo);
  if (lo.reliability <= spec.target) {
    if (spec.target - lo.reliability <= spec.tolerance) return finish(lo);
    calibration_fail("reliability " + g(lo.reliability) + " at eps_byte " +
                     g(spec.eps_lo) + " is already below target " +
                     g(spec.target));
  }
  auto hi = eval(spec.eps_hi);
  if (hi.reliability > spec.target + spec.tolerance)
    calibration_fail("reliability " + g(hi.reliability) + " at eps_byte " +
                     g(spec.eps_hi) + " stays above target " + g(spec.target));

  // Invariant: rel(lo) > target >= rel(hi) (up to the tolerance at hi).
  while (hi.eps_byte - lo.eps_byte > spec.resolution) {
    auto mid = eval(0.5 * (lo.eps_byte + hi.eps_byte));
    (mid.reliability > spec.target ? lo : hi) = mid;
  }
  const auto& best = std::abs(lo.reliability - spec.target) <=
                             std::abs(hi.reliability - spec.target)
                         ? lo
                         : hi;
  if (std::abs(best.reliability - spec.target) > spec.tolerance)
    calibration_fail("closest point eps_byte " + g(best.eps_byte) +
                     " gives reliability " + g(best.reliability) +
                     ", outside target +/- " + g(spec.tolerance));
  return finish(best);
}

std::string format_calibration(const CalibrationSpec& spec,
                               const CalibrationResult& result) {
  std::ostringstream o;
  o.precision(10);
  o << "# eps_byte calibration: Glossy-mode reliability target " << spec.target
    << "\n"
    << "topology = " << spec.base.topology << "\n"
    << "patch_bytes = " << spec.base.patch_bytes << "\n"
    << "n_max = " << (spec.base.n_max ? std::to_string(*spec.base.n_max) : "auto")
    << "\n"
    << "runs = " << spec.base.runs << "\n"
    << "seed = " << spec.base.seed << "\n"
    << "bracket = " << spec.eps_lo << "," << spec.eps_hi << "\n"
    << "tolerance = " << spec.tolerance << "\n"
    << "eps_byte = " << result.eps_byte << "\n"
    << "reliability = " << result.reliability << "\n"
    << "reliability_stderr = " << result.reliability_stderr << "\n";
  for (std::size_t i = 0; i < result.steps.size(); ++i)
    o << "# step " << i << ": eps_byte " << result.steps[i].eps_byte
      << " reliability " << result.steps[i].reliability << " +/- "
      << result.steps[i].rel_stderr << "\n";
  return o.str();
}

}  // namespace cidp::bench
