#include "dflow/optim/config.hpp"

#include <cmath>
#include <nlohmann/json.hpp>
#include <string>

#include "dflow/errors.hpp"

namespace dflow {

void OptimConfig::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw InvalidParams("alpha must be >= 0");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw InvalidParams("learning_rate must be > 0");
  }
  if (iterations < 1) throw InvalidParams("iterations must be >= 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw InvalidParams("beta1 must be in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw InvalidParams("beta2 must be in [0, 1)");
  if (!(epsilon > 0.0)) throw InvalidParams("epsilon must be > 0");
}

OptimConfig optim_config_from_json(const nlohmann::json& j, OptimConfig base) {
  if (!j.is_object()) throw InvalidParams("optimizer config must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "alpha") base.alpha = value.get<double>();
      else if (key == "learning_rate") base.learning_rate = value.get<double>();
      else if (key == "iterations") {
        const auto n = value.get<long long>();
        if (n < 1) throw InvalidParams("iterations must be >= 1");
        base.iterations = static_cast<std::size_t>(n);
      } else if (key == "beta1") base.beta1 = value.get<double>();
      else if (key == "beta2") base.beta2 = value.get<double>();
      else if (key == "epsilon") base.epsilon = value.get<double>();
      else if (key == "seed") base.seed = value.get<std::uint64_t>();
      else if (key == "consistency_mode") {
        const auto mode = value.get<std::string>();
        if (mode == "translation") base.consistency = ConsistencyMode::TranslationOnly;
        else if (mode == "embedded") base.consistency = ConsistencyMode::Embedded;
        else throw InvalidParams("consistency_mode must be \"translation\" or \"embedded\"");
      } else {
        throw InvalidParams("unknown optimizer config key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidParams(std::string("bad optimizer config value: ") + e.what());
  }
  base.validate();
  return base;
}

}  // namespace dflow
