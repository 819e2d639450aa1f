#include <doctest.h>

#include "cidp/simnet/metrics.hpp"

using namespace cidp;
using namespace cidp::simnet;

namespace {

// One run with `nodes` non-initiator nodes, the first `delivered` complete.
RunResult fake_run(std::size_t nodes, std::size_t delivered, double base_us = 100) {
  RunResult r;
  r.packets = 1;
  r.nodes.resize(nodes + 1);
  r.nodes[0].delivered = true;
  r.nodes[0].completion = Nanos{0};
  r.nodes[0].first_rx = {Nanos{0}};
  for (std::size_t i = 1; i <= nodes; ++i) {
    auto& n = r.nodes[i];
    n.hops = 1;
    n.first_rx.resize(1);
    if (i <= delivered) {
      n.delivered = true;
      n.completion = from_us(base_us * static_cast<double>(i));
      n.first_rx[0] = n.completion;
    }
  }
  return r;
}

}  // namespace

TEST_CASE("all delivered gives reliability one") {
  std::vector<RunResult> runs(10, fake_run(5, 5));
  auto m = compute_metrics(runs);
  CHECK(m.reliability == 1.0);
  CHECK(m.run_reliability == 1.0);
  CHECK(m.packet_reliability == 1.0);
  CHECK(m.node_trials == 50);
  CHECK(m.reliability_stderr == 0.0);
}

TEST_CASE("one incomplete node-run out of 100") {
  std::vector<RunResult> runs(9, fake_run(10, 10));
  runs.push_back(fake_run(10, 9));
  auto m = compute_metrics(runs);
  CHECK(m.reliability == doctest::Approx(0.99));
  CHECK(m.run_reliability == doctest::Approx(0.9));
  CHECK(m.reliability_stderr == doctest::Approx(std::sqrt(0.99 * 0.01 / 100)));
  CHECK(m.run_reliabilities.front() == doctest::Approx(0.9));
}

TEST_CASE("latency statistics and quantiles") {
  auto m = compute_metrics({fake_run(5, 5)});  // 100..500 us
  CHECK(m.mean_latency_us == doctest::Approx(300));
  CHECK(m.p50_us == doctest::Approx(300));
  CHECK(m.p90_us == doctest::Approx(460));
  CHECK(m.latency_stderr_us == doctest::Approx(std::sqrt(25000.0 / 5)));
  REQUIRE(m.latency_cdf.size() == std::size(kCdfQuantiles));
  CHECK(m.latency_cdf.back().second == doctest::Approx(500));
  CHECK(quantile({1, 2, 3, 4}, 0.5) == doctest::Approx(2.5));
  CHECK(quantile({7}, 0.99) == 7);
}

TEST_CASE("empty input is an error") {
  try {
    compute_metrics({});
    FAIL("expected EmptyInput");
  } catch (const SimError& e) {
    CHECK(e.code() == SimErrc::empty_input);
  }
}
