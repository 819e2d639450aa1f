#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "cidp/simnet/simulator.hpp"

namespace cidp::simnet {

inline constexpr double kCdfQuantiles[] = {0.01, 0.05, 0.10, 0.25, 0.50,
                                           0.75, 0.90, 0.95, 0.99, 1.00};

struct Metrics {
  std::size_t runs = 0;
  std::size_t node_trials = 0;  // non-initiator (node, run) pairs
  std::size_t delivered = 0;

  double reliability = 0;         // delivered / node_trials
  double reliability_stderr = 0;  // binomial over node trials
  double packet_reliability = 0;  // received (node, run, packet) fraction
  double run_reliability = 0;     // runs in which every node delivered

  std::vector<double> latency_us;  // completion times, sorted
  double mean_latency_us = 0;
  double latency_stderr_us = 0;
  double p50_us = 0;
  double p90_us = 0;
  double p99_us = 0;
  // (quantile, completion time) pooled over all runs.
  std::vector<std::pair<double, double>> latency_cdf;
  // Per-run reliability values, sorted, for the reliability CDF.
  std::vector<double> run_reliabilities;
};

// Linear interpolation between closest ranks; `sorted` must be ascending.
double quantile(const std::vector<double>& sorted, double q);

// Throws SimError(empty_input) for an empty list.
Metrics compute_metrics(const std::vector<RunResult>& runs);

}  // namespace cidp::simnet
