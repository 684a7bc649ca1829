#pragma once

#include <cstddef>
#include <cstdint>
#include <nlohmann/json_fwd.hpp>

namespace dflow {

enum class ConsistencyMode {
  /// Interpolated node translations only: |t_i + v_i^A - v_i^B|^2.
  TranslationOnly,
  /// Full embedded-deformation position of the anchor, rotations included.
  Embedded,
};

struct OptimConfig {
  double alpha = 0.1;
  double learning_rate = 0.001;
  std::size_t iterations = 3000;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;
  ConsistencyMode consistency = ConsistencyMode::TranslationOnly;

  /// Throws InvalidParams unless alpha >= 0, lr > 0, iterations >= 1,
  /// betas in [0, 1) and epsilon > 0.
  void validate() const;
};

/// Field-wise override of `base`; unknown keys throw InvalidParams.
OptimConfig optim_config_from_json(const nlohmann::json& j, OptimConfig base = {});

}  // namespace dflow
