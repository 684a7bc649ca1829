#pragma once

#include <filesystem>
#include <vector>

#include "dflow/defgraph/graph.hpp"
#include "dflow/optim/adam.hpp"
#include "dflow/optim/loss.hpp"

namespace dflow {

struct OptimState {
  AdamState adam;
  /// Loss evaluated at the start of each iteration, before its update.
  std::vector<LossTerms> history;
};

/// Adam step on every node's (axis-angle, translation) followed by
/// re-canonicalizing the axis-angle to magnitude <= pi.
void adam_step(AdamState& state, DeformationGraph& graph, const std::vector<NodeGradient>& grads,
               const OptimConfig& config);

/// Runs `config.iterations` Adam steps on `graph.params`, minimizing
/// L_ARAP + alpha * L_Con. Throws NonFiniteLoss with the failing iteration.
OptimState optimize_graph(DeformationGraph& graph, const InterpolationWeights& weights,
                          const AnchorSet& anchors, const OptimConfig& config);

/// CSV with header `iteration,l_arap,l_con,l_dg`, one row per iteration.
void write_history_csv(const std::filesystem::path& path, const std::vector<LossTerms>& history);

}  // namespace dflow
