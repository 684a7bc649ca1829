#include "dflow/optim/loss.hpp"

#include "dflow/defgraph/rotation.hpp"
#include "dflow/errors.hpp"
#include "dflow/parallel.hpp"

namespace dflow {
namespace {

struct NodeCache {
  std::vector<Mat3> rotation;
  std::vector<Mat3> jacobian;  // right Jacobian, filled only when gradients are needed
};

NodeCache make_cache(const DeformationGraph& graph, bool with_jacobian) {
  NodeCache cache;
  cache.rotation.resize(graph.size());
  if (with_jacobian) cache.jacobian.resize(graph.size());
  for (std::size_t i = 0; i < graph.size(); ++i) {
    cache.rotation[i] = rotation_from_axis_angle(graph.params[i].rotation);
    if (with_jacobian) cache.jacobian[i] = right_jacobian(graph.params[i].rotation);
  }
  return cache;
}

// d/dw of (R(w) d) transposed, applied to g:  J_r^T [d]_x R^T g
Vec3 rotation_pullback(const Mat3& r, const Mat3& jr, const Vec3& d, const Vec3& g) {
  return jr.transpose() * (d.cross(r.transpose() * g));
}

double arap_term(const DeformationGraph& graph, const NodeCache& cache,
                 std::vector<NodeGradient>* grad) {
  const auto& edges = graph.edges();
  if (edges.empty()) return 0.0;
  const auto& g = graph.nodes();
  const auto& p = graph.params;
  const double scale = 1.0 / static_cast<double>(2 * edges.size());

  // residual[2e] is the (a -> b) direction of edge e, residual[2e + 1] the reverse.
  std::vector<Vec3> residual(2 * edges.size());
  parallel_for(edges.size(), [&](std::size_t e) {
    const auto [a, b] = edges[e];
    // displacement form, so zero params give an exactly zero residual
    const Vec3 ab = g[b] - g[a];
    const Vec3 dt = p[a].translation - p[b].translation;
    residual[2 * e] = (cache.rotation[a] - Mat3::Identity()) * ab + dt;
    residual[2 * e + 1] = (cache.rotation[b] - Mat3::Identity()) * (-ab) - dt;
  });

  double sum = 0.0;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto [a, b] = edges[e];
    for (int dir = 0; dir < 2; ++dir) {
      const Vec3& r = residual[2 * e + dir];
      sum += r.squaredNorm();
      if (!grad) continue;
      const auto j = dir == 0 ? a : b;
      const auto k = dir == 0 ? b : a;
      const Vec3 gr = 2.0 * scale * r;
      (*grad)[j].translation += gr;
      (*grad)[k].translation -= gr;
      (*grad)[j].rotation += rotation_pullback(cache.rotation[j], cache.jacobian[j], g[k] - g[j], gr);
    }
  }
  return sum * scale;
}

double consistency_term(const DeformationGraph& graph, const NodeCache& cache,
                        const InterpolationWeights& weights, const AnchorSet& anchors,
                        ConsistencyMode mode, double grad_scale, std::vector<NodeGradient>* grad) {
  if (anchors.empty()) throw EmptyAnchorSet();
  const auto& items = anchors.items();
  const auto& g = graph.nodes();
  const auto& p = graph.params;
  for (const auto& a : items) {
    if (a.vertex >= weights.vertex_count()) {
      throw InvalidInput("interpolation weights do not cover anchor vertex " + std::to_string(a.vertex));
    }
  }

  std::vector<Vec3> residual(items.size());
  parallel_for(items.size(), [&](std::size_t i) {
    const Anchor& a = items[i];
    const auto ids = weights.nodes_of(a.vertex);
    const auto w = weights.weights_of(a.vertex);
    Vec3 t = Vec3::Zero();
    for (std::size_t j = 0; j < ids.size(); ++j) {
      if (w[j] == 0.0) continue;
      const auto n = ids[j];
      if (mode == ConsistencyMode::TranslationOnly) {
        t += w[j] * p[n].translation;
      } else {
        t += w[j] * ((cache.rotation[n] - Mat3::Identity()) * (a.source - g[n]) + p[n].translation);
      }
    }
    residual[i] = t + a.source - a.target;
  });

  const double scale = 1.0 / static_cast<double>(items.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const Vec3& r = residual[i];
    sum += r.squaredNorm();
    if (!grad) continue;
    const Anchor& a = items[i];
    const auto ids = weights.nodes_of(a.vertex);
    const auto w = weights.weights_of(a.vertex);
    const Vec3 gr = 2.0 * grad_scale * scale * r;
    for (std::size_t j = 0; j < ids.size(); ++j) {
      if (w[j] == 0.0) continue;
      const auto n = ids[j];
      (*grad)[n].translation += w[j] * gr;
      if (mode == ConsistencyMode::Embedded) {
        (*grad)[n].rotation +=
            rotation_pullback(cache.rotation[n], cache.jacobian[n], a.source - g[n], w[j] * gr);
      }
    }
  }
  return sum * scale;
}

}  // namespace

double arap_loss(const DeformationGraph& graph) {
  return arap_term(graph, make_cache(graph, false), nullptr);
}

double consistency_loss(const DeformationGraph& graph, const InterpolationWeights& weights,
                        const AnchorSet& anchors, ConsistencyMode mode) {
  return consistency_term(graph, make_cache(graph, false), weights, anchors, mode, 1.0, nullptr);
}

LossTerms total_loss(const DeformationGraph& graph, const InterpolationWeights& weights,
                     const AnchorSet& anchors, const OptimConfig& config) {
  const auto cache = make_cache(graph, false);
  LossTerms terms;
  terms.arap = arap_term(graph, cache, nullptr);
  terms.consistency =
      consistency_term(graph, cache, weights, anchors, config.consistency, config.alpha, nullptr);
  terms.total = terms.arap + config.alpha * terms.consistency;
  return terms;
}

LossTerms loss_and_gradient(const DeformationGraph& graph, const InterpolationWeights& weights,
                            const AnchorSet& anchors, const OptimConfig& config,
                            std::vector<NodeGradient>& gradient) {
  gradient.assign(graph.size(), NodeGradient{});
  const auto cache = make_cache(graph, true);
  LossTerms terms;
  terms.arap = arap_term(graph, cache, &gradient);
  terms.consistency = consistency_term(graph, cache, weights, anchors, config.consistency,
                                       config.alpha, &gradient);
  terms.total = terms.arap + config.alpha * terms.consistency;
  return terms;
}

std::vector<NodeGradient> gradients(const DeformationGraph& graph,
                                    const InterpolationWeights& weights, const AnchorSet& anchors,
                                    const OptimConfig& config) {
  std::vector<NodeGradient> out;
  loss_and_gradient(graph, weights, anchors, config, out);
  return out;
}

}  // namespace dflow
