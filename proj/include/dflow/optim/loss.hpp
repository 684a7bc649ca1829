#pragma once

#include <vector>

#include "dflow/defgraph/graph.hpp"
#include "dflow/optim/anchors.hpp"
#include "dflow/optim/config.hpp"

namespace dflow {

struct LossTerms {
  double total = 0.0;        ///< L_DG = L_ARAP + alpha * L_Con
  double arap = 0.0;
  double consistency = 0.0;  ///< unweighted L_Con
};

struct NodeGradient {
  Vec3 rotation = Vec3::Zero();     ///< d L / d axis-angle
  Vec3 translation = Vec3::Zero();  ///< d L / d translation
};

/// Mean over directed graph edges (j, k) of
///   |R_j (g_k - g_j) + g_j + t_j - (g_k + t_k)|^2.
double arap_loss(const DeformationGraph& graph);

/// Mean squared anchor residual. Throws EmptyAnchorSet.
double consistency_loss(const DeformationGraph& graph, const InterpolationWeights& weights,
                        const AnchorSet& anchors,
                        ConsistencyMode mode = ConsistencyMode::TranslationOnly);

LossTerms total_loss(const DeformationGraph& graph, const InterpolationWeights& weights,
                     const AnchorSet& anchors, const OptimConfig& config);

/// Loss and its exact gradient with respect to every node's parameters.
/// Accumulation order is fixed, so results do not depend on thread count.
LossTerms loss_and_gradient(const DeformationGraph& graph, const InterpolationWeights& weights,
                            const AnchorSet& anchors, const OptimConfig& config,
                            std::vector<NodeGradient>& gradient);

std::vector<NodeGradient> gradients(const DeformationGraph& graph,
                                    const InterpolationWeights& weights, const AnchorSet& anchors,
                                    const OptimConfig& config);

}  // namespace dflow
