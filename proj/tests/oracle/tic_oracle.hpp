#pragma once

#include <vector>

#include "dyncal/sensor_model.hpp"
#include "dyncal/weights.hpp"

namespace dyncal::test {

struct OracleOutput {
  std::vector<double> drift;
  std::vector<double> offset;
};

// Straightforward double-precision forward pass over a weight bundle, with
// no shared code from the library's network. Heads are fixed at 8.
OracleOutput tic_oracle_forward(const WeightBundle& weights, const Window& window);

}  // namespace dyncal::test
