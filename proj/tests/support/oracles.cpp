#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cidp/simnet/simulator.hpp"

namespace cidp::testing::oracle {

double aligned_pair_probability(double sigma, double window) {
  const double a = 3.0 * sigma;
  const double z = std::erf(3.0 / std::sqrt(2.0));  // mass inside +/- 3 sigma
  auto pdf = [&](double x) {
    return std::exp(-0.5 * x * x / (sigma * sigma)) /
           (sigma * std::sqrt(2.0 * std::numbers::pi)) / z;
  };
  auto cdf = [&](double x) {
    x = std::clamp(x, -a, a);
    double phi = 0.5 * (1.0 + std::erf(x / (sigma * std::sqrt(2.0))));
    return (phi - 0.5 * (1.0 - z)) / z;  // (Phi(x) - Phi(-3)) / z
  };
  const int n = 20000;  // even
  const double h = 2.0 * a / n;
  double sum = 0;
  for (int i = 0; i <= n; ++i) {
    double x = -a + i * h;
    double w = (i == 0 || i == n) ? 1 : (i % 2 ? 4 : 2);
    sum += w * pdf(x) * (cdf(x + window) - cdf(x - window));
  }
  return sum * h / 3.0;
}

ChainResult two_node_chain(double eps_byte, std::size_t payload, int n_max,
                           int runs, std::uint64_t seed) {
  using namespace simnet;
  ChainResult r;
  double p = std::pow(1.0 - eps_byte, 10.0 + 7.0 + static_cast<double>(payload));
  r.expected = 1.0 - std::pow(1.0 - p, n_max);

  auto topo = build_topology(parse_topology("line:2"), seed);
  RadioParams radio;
  radio.eps_byte = eps_byte;
  framing::FramingParams fp{payload, 10};
  auto proto = make_protocol_params(topo, radio, fp, n_max);
  auto packets = framing::fragment(Bytes(payload, 0x5a), fp, 1);
  int delivered = 0;
  for (int i = 0; i < runs; ++i) {
    auto run = run_dissemination(topo, radio, proto, fp, packets,
                                 seed + static_cast<std::uint64_t>(i));
    delivered += run.nodes[1].delivered;
    r.max_round_transmissions = std::max(r.max_round_transmissions, run.max_round_transmissions);
  }
  r.measured = static_cast<double>(delivered) / runs;
  return r;
}

}  // namespace cidp::testing::oracle
