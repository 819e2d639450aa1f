#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cidp/bench/config.hpp"
#include "cidp/simnet/metrics.hpp"
#include "cidp/simnet/simulator.hpp"

namespace cidp::bench {

// Everything one sweep point needs, with the sweep value folded in.
struct PointSetup {
  Mode mode = Mode::cidp;
  std::string variable;  // sweep variable name, "N" when there is no sweep
  double value = 0;
  simnet::TopologySpec topology;
  simnet::RadioParams radio;
  framing::FramingParams framing;
  Bytes object;
  int n_max = 1;
  std::optional<double> round_period_us;
  bool initiator_retx = true;
};

struct PointResult {
  PointSetup setup;
  std::vector<simnet::RunResult> runs;  // ascending seed
  simnet::Metrics metrics;
};

struct ExperimentResult {
  std::vector<Mode> modes;
  std::vector<std::vector<PointResult>> points;  // [mode][sweep point]
};

// Deterministic filler for synthetic patches.
Bytes synthetic_object(std::size_t size);

PointSetup resolve_point(const ExperimentConfig& config, Mode mode,
                         std::optional<double> value);

// Run i uses seed + i for both topology placement and the simulation, so
// every point of a sweep sees the same seeds. Work is spread over `jobs`
// threads; results are stored by run index.
PointResult run_point(const PointSetup& setup, std::size_t runs,
                      std::uint64_t seed, unsigned jobs,
                      const simnet::SimOptions& options = {});

ExperimentResult run_experiment(const ExperimentConfig& config);

std::string format_value(double v);

// CSV and SVG artifacts; returns the written paths.
std::vector<std::string> write_outputs(const ExperimentConfig& config,
                                       const ExperimentResult& result);

// Individual artifacts, exposed for tests.
std::string raw_csv(const PointResult& point);
std::string aggregate_csv(const std::vector<PointResult>& points);
std::string summary_csv(const std::vector<PointResult>& points);
std::string latency_cdf_csv(const std::vector<PointResult>& points);
std::string reliability_cdf_csv(const std::vector<PointResult>& points);
std::string latency_by_hops_csv(const std::vector<PointResult>& points);

}  // namespace cidp::bench
