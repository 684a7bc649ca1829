#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dflow/correspond/filter3d.hpp"
#include "dflow/correspond/lift.hpp"
#include "dflow/correspond/matches.hpp"
#include "dflow/defgraph/graph.hpp"
#include "dflow/eval/metrics.hpp"
#include "dflow/flow/flow.hpp"
#include "dflow/optim/anchors.hpp"
#include "dflow/optim/config.hpp"
#include "dflow/optim/loss.hpp"

namespace dflow {

enum class SurfaceDistanceMode { Vertex, Triangle };

/// Every tunable of the pipeline with its default.
struct PipelineConfig {
  // flow
  std::size_t k = kDefaultNeighbors;
  double surface_gate = kDefaultSurfaceGate;
  SurfaceDistanceMode surface_distance = SurfaceDistanceMode::Vertex;
  // graph and optimizer
  std::size_t target_nodes = kDefaultGraphNodes;
  OptimConfig optim;
  RotationBlend rotation_blend = RotationBlend::Quaternion;
  TranslationBlend translation_blend = TranslationBlend::Linear;
  // correspondences
  double confidence_threshold = 0.5;
  std::int32_t density_radius = 1;
  PatchScore patch_score = PatchScore::Neighbors;
  /// Absolute cluster radius; unset means a fraction of the mesh diagonal.
  std::optional<double> cluster_radius;
  double cluster_radius_fraction = kDefaultClusterRadiusFraction;
  double kappa = 3.0;
  std::size_t min_cluster = 3;
  // metrics
  std::size_t metric_samples = kDefaultSurfaceSamples;
  std::uint32_t metric_resolution = kDefaultIouResolution;
  double success_threshold = kSuccessThreshold;

  std::uint64_t seed = 0;

  /// Throws InvalidParams on the first field outside its module's range.
  void validate() const;
  FieldOptions field_options() const;
  Filter3dParams filter_params(const TriMesh& mesh) const;
  EvalOptions eval_options() const;
};

/// Field-wise override of `base`. Unknown keys and bad values throw
/// InvalidParams; the result is validated.
PipelineConfig pipeline_config_from_json(const nlohmann::json& j, PipelineConfig base = {});
PipelineConfig read_pipeline_config(const std::filesystem::path& path, PipelineConfig base = {});
nlohmann::json to_json(const PipelineConfig& config);

struct FilterStats {
  std::size_t input = 0;
  std::size_t confident = 0;
  std::size_t fused = 0;
  std::size_t lifted = 0;
  std::size_t lift_skipped = 0;
  std::size_t filtered = 0;
  std::size_t anchors = 0;
  std::size_t duplicates = 0;
  double cluster_radius = 0.0;
};

struct FilterOutput {
  std::vector<Anchor> anchors;
  FilterStats stats;
};

/// confidence_filter, fuse_multiview, lift_pairs, filter_3d and
/// snap_to_anchors in sequence. An empty result is returned, not thrown.
FilterOutput run_filter_matches(std::span<const RawMatch> matches, const DepthView& target,
                                std::span<const DepthView> views, const TriMesh& mesh,
                                const PipelineConfig& config);

struct OptimizeOutput {
  DeformationGraph graph;
  TransformField field;
  std::vector<LossTerms> history;
};

/// decimate, build_graph, compute_interpolation, optimize_graph and
/// field_from_graph. The node target and K are clamped to what the mesh
/// provides.
OptimizeOutput run_optimize(const TriMesh& mesh, const std::vector<Anchor>& anchors,
                            const PipelineConfig& config);

/// JSON Lines, one {"p": [x, y, z]} per point.
std::vector<Point3> read_points(const std::filesystem::path& path);
void write_points(const std::filesystem::path& path, std::span<const Point3> points);

/// JSON Lines, one {"samples": [[x, y, z], ...]} per ray.
std::vector<std::vector<Point3>> read_rays(const std::filesystem::path& path);
/// JSON Lines, one {"samples": [{"p", "d", "near_surface"}, ...]} per ray.
void write_warped_rays(const std::filesystem::path& path,
                       const std::vector<std::vector<WarpedSample>>& rays);

}  // namespace dflow
