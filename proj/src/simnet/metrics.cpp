#include "cidp/simnet/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace cidp::simnet {

double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  q = std::clamp(q, 0.0, 1.0);
  double pos = q * static_cast<double>(sorted.size() - 1);
  auto lo = static_cast<std::size_t>(std::floor(pos));
  auto hi = std::min(lo + 1, sorted.size() - 1);
  double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

Metrics compute_metrics(const std::vector<RunResult>& runs) {
  if (runs.empty())
    throw SimError(SimErrc::empty_input, "EmptyInput: no runs to aggregate");

  Metrics m;
  m.runs = runs.size();
  std::size_t packet_trials = 0;
  std::size_t packets_received = 0;
  std::size_t complete_runs = 0;

  for (const auto& run : runs) {
    std::size_t run_nodes = 0;
    std::size_t run_delivered = 0;
    for (std::size_t i = 1; i < run.nodes.size(); ++i) {
      const auto& n = run.nodes[i];
      ++run_nodes;
      if (n.delivered) {
        ++run_delivered;
        m.latency_us.push_back(to_us(*n.completion));
      }
      for (const auto& t : n.first_rx) {
        ++packet_trials;
        packets_received += t.has_value();
      }
    }
    m.node_trials += run_nodes;
    m.delivered += run_delivered;
    complete_runs += run_delivered == run_nodes;
    m.run_reliabilities.push_back(
        run_nodes ? static_cast<double>(run_delivered) / run_nodes : 1.0);
  }

  if (m.node_trials > 0) {
    double n = static_cast<double>(m.node_trials);
    m.reliability = static_cast<double>(m.delivered) / n;
    m.reliability_stderr =
        std::sqrt(m.reliability * (1.0 - m.reliability) / n);
  } else {
    m.reliability = 1.0;
  }
  m.packet_reliability =
      packet_trials ? static_cast<double>(packets_received) / packet_trials
                    : 1.0;
  m.run_reliability = static_cast<double>(complete_runs) / m.runs;

  std::sort(m.latency_us.begin(), m.latency_us.end());
  std::sort(m.run_reliabilities.begin(), m.run_reliabilities.end());
  if (!m.latency_us.empty()) {
    double sum = 0;
    for (double x : m.latency_us) sum += x;
    const double count = static_cast<double>(m.latency_us.size());
    m.mean_latency_us = sum / count;
    if (m.latency_us.size() > 1) {
      double ss = 0;
      for (double x : m.latency_us)
        ss += (x - m.mean_latency_us) * (x - m.mean_latency_us);
      m.latency_stderr_us = std::sqrt(ss / (count - 1) / count);
    }
    m.p50_us = quantile(m.latency_us, 0.50);
    m.p90_us = quantile(m.latency_us, 0.90);
    m.p99_us = quantile(m.latency_us, 0.99);
    for (double q : kCdfQuantiles)
      m.latency_cdf.emplace_back(q, quantile(m.latency_us, q));
  }
  return m;
}

}  // namespace cidp::simnet
