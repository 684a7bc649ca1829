#include "dflow/optim/optimize.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "dflow/defgraph/rotation.hpp"
#include "dflow/errors.hpp"

namespace dflow {

void adam_step(AdamState& state, DeformationGraph& graph, const std::vector<NodeGradient>& grads,
               const OptimConfig& config) {
  const std::size_t n = graph.size();
  std::vector<double> params(6 * n);
  std::vector<double> flat_grad(6 * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) {
      params[6 * i + c] = graph.params[i].rotation[c];
      params[6 * i + 3 + c] = graph.params[i].translation[c];
      flat_grad[6 * i + c] = grads[i].rotation[c];
      flat_grad[6 * i + 3 + c] = grads[i].translation[c];
    }
  }
  adam_step(state, params, flat_grad, config);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 rotation(params[6 * i], params[6 * i + 1], params[6 * i + 2]);
    graph.params[i].rotation = canonical_axis_angle(rotation);
    graph.params[i].translation = Vec3(params[6 * i + 3], params[6 * i + 4], params[6 * i + 5]);
  }
}

OptimState optimize_graph(DeformationGraph& graph, const InterpolationWeights& weights,
                          const AnchorSet& anchors, const OptimConfig& config) {
  config.validate();
  if (anchors.empty()) throw EmptyAnchorSet();
  OptimState state;
  state.history.reserve(config.iterations);
  std::vector<NodeGradient> grad;
  for (std::size_t it = 0; it < config.iterations; ++it) {
    const LossTerms terms = loss_and_gradient(graph, weights, anchors, config, grad);
    if (!std::isfinite(terms.total) || !std::isfinite(terms.arap) ||
        !std::isfinite(terms.consistency)) {
      throw NonFiniteLoss(it);
    }
    state.history.push_back(terms);
    adam_step(state.adam, graph, grad, config);
  }
  return state;
}

void write_history_csv(const std::filesystem::path& path, const std::vector<LossTerms>& history) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << "iteration,l_arap,l_con,l_dg\n";
  char buf[128];
  for (std::size_t i = 0; i < history.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g\n", i, history[i].arap,
                  history[i].consistency, history[i].total);
    out << buf;
  }
}

}  // namespace dflow
