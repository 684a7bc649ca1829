#include "dflow/optim/adam.hpp"

#include <cmath>

#include "dflow/errors.hpp"

namespace dflow {

void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads,
               const OptimConfig& config) {
  if (params.size() != grads.size()) throw InvalidInput("parameter and gradient sizes differ");
  if (state.first_moment.empty() && state.step == 0) {
    state.first_moment.assign(params.size(), 0.0);
    state.second_moment.assign(params.size(), 0.0);
  }
  if (state.first_moment.size() != params.size()) throw InvalidInput("Adam state size mismatch");

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(config.beta1, t);
  const double correction2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    double& m = state.first_moment[i];
    double& v = state.second_moment[i];
    m = config.beta1 * m + (1.0 - config.beta1) * g;
    v = config.beta2 * v + (1.0 - config.beta2) * g * g;
    const double m_hat = m / correction1;
    const double v_hat = v / correction2;
    params[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
  }
}

}  // namespace dflow
