#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dflow/optim/config.hpp"

namespace dflow {

struct AdamState {
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  std::uint64_t step = 0;
};

/// One bias-corrected Adam update of `params` in place. Moments are sized on
/// first use; afterwards every span must keep the same length.
void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads,
               const OptimConfig& config);

}  // namespace dflow
