#pragma once

#include <cstddef>
#include <cstdint>

namespace cidp::testing::oracle {

// P(|d1 - d2| < window) for independent d_i ~ N(0, sigma^2) truncated at
// +/- 3 sigma, by Simpson integration over erf-based CDFs.
double aligned_pair_probability(double sigma, double window);

struct ChainResult {
  double expected = 0;  // 1 - (1 - p)^n_max, p = (1 - eps)^(10 + 7 + L)
  double measured = 0;
  int max_round_transmissions = 0;
};

// Single-packet floods over line:2 with seeds seed .. seed + runs - 1.
ChainResult two_node_chain(double eps_byte, std::size_t payload, int n_max,
                           int runs, std::uint64_t seed);

}  // namespace cidp::testing::oracle
