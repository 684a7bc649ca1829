#include "dflow/cli/pipeline.hpp"

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <string>

#include "dflow/defgraph/decimate.hpp"
#include "dflow/errors.hpp"
#include "dflow/optim/optimize.hpp"

namespace dflow {
namespace {

template <class T>
T get_positive_count(const nlohmann::json& v, const char* key) {
  const auto n = v.get<long long>();
  if (n < 1) throw InvalidParams(std::string(key) + " must be >= 1");
  return static_cast<T>(n);
}

Point3 point_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw InvalidInput("expected a 3-element array");
  return Point3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

nlohmann::json point_to_json(const Vec3& p) { return {p.x(), p.y(), p.z()}; }

// Calls fn(json, line_no) for each non-blank line, prefixing errors with file:line.
template <class Fn>
void for_each_json_line(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      fn(nlohmann::json::parse(line));
    } catch (const std::exception& e) {
      throw InvalidInput(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path.string());
  return out;
}

}  // namespace

void PipelineConfig::validate() const {
  if (k < 1) throw InvalidParams("k must be >= 1");
  if (!(surface_gate >= 0.0) || !std::isfinite(surface_gate)) throw InvalidParams("surface_gate must be >= 0");
  if (target_nodes < 1) throw InvalidParams("target_nodes must be >= 1");
  optim.validate();
  if (!(confidence_threshold >= 0.0 && confidence_threshold <= 1.0)) {
    throw InvalidParams("confidence_threshold must lie in [0, 1]");
  }
  if (density_radius < 1) throw InvalidParams("density_radius must be >= 1");
  if (cluster_radius && !(*cluster_radius > 0.0 && std::isfinite(*cluster_radius))) {
    throw InvalidParams("cluster_radius must be > 0");
  }
  if (!(cluster_radius_fraction > 0.0) || !std::isfinite(cluster_radius_fraction)) {
    throw InvalidParams("cluster_radius_fraction must be > 0");
  }
  Filter3dParams{1.0, kappa, min_cluster}.validate();
  if (metric_samples < 1) throw InvalidParams("metric_samples must be >= 1");
  if (metric_resolution < 16) throw InvalidParams("metric_resolution must be >= 16");
  if (!(success_threshold > 0.0)) throw InvalidParams("success_threshold must be > 0");
}

FieldOptions PipelineConfig::field_options() const {
  return FieldOptions{rotation_blend, translation_blend, k, surface_gate};
}

Filter3dParams PipelineConfig::filter_params(const TriMesh& mesh) const {
  const double radius = cluster_radius ? *cluster_radius : cluster_radius_fraction * mesh.bounds().diagonal();
  if (!(radius > 0.0)) throw InvalidInput("mesh bounding box is degenerate; set cluster_radius");
  return Filter3dParams{radius, kappa, min_cluster};
}

EvalOptions PipelineConfig::eval_options() const {
  return EvalOptions{metric_samples, metric_resolution, seed, success_threshold};
}

PipelineConfig pipeline_config_from_json(const nlohmann::json& j, PipelineConfig c) {
  if (!j.is_object()) throw InvalidParams("config must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "k") c.k = get_positive_count<std::size_t>(v, "k");
      else if (key == "surface_gate") c.surface_gate = v.get<double>();
      else if (key == "surface_distance_mode") {
        const auto s = v.get<std::string>();
        if (s == "vertex") c.surface_distance = SurfaceDistanceMode::Vertex;
        else if (s == "triangle") c.surface_distance = SurfaceDistanceMode::Triangle;
        else throw InvalidParams("surface_distance_mode must be \"vertex\" or \"triangle\"");
      } else if (key == "target_nodes") c.target_nodes = get_positive_count<std::size_t>(v, "target_nodes");
      else if (key == "alpha" || key == "learning_rate" || key == "iterations" || key == "beta1" ||
               key == "beta2" || key == "consistency_mode") {
        c.optim = optim_config_from_json(nlohmann::json{{key, v}}, c.optim);
      } else if (key == "adam_epsilon") c.optim.epsilon = v.get<double>();
      else if (key == "rotation_blend") {
        const auto s = v.get<std::string>();
        if (s == "quaternion") c.rotation_blend = RotationBlend::Quaternion;
        else if (s == "linear_polar") c.rotation_blend = RotationBlend::LinearPolar;
        else throw InvalidParams("rotation_blend must be \"quaternion\" or \"linear_polar\"");
      } else if (key == "translation_blend") {
        const auto s = v.get<std::string>();
        if (s == "linear") c.translation_blend = TranslationBlend::Linear;
        else if (s == "embedded") c.translation_blend = TranslationBlend::Embedded;
        else throw InvalidParams("translation_blend must be \"linear\" or \"embedded\"");
      } else if (key == "confidence_threshold") c.confidence_threshold = v.get<double>();
      else if (key == "density_radius") c.density_radius = get_positive_count<std::int32_t>(v, "density_radius");
      else if (key == "patch_score") {
        const auto s = v.get<std::string>();
        if (s == "neighbors") c.patch_score = PatchScore::Neighbors;
        else if (s == "connected") c.patch_score = PatchScore::ConnectedPatch;
        else throw InvalidParams("patch_score must be \"neighbors\" or \"connected\"");
      } else if (key == "cluster_radius") {
        if (v.is_null()) c.cluster_radius.reset();
        else c.cluster_radius = v.get<double>();
      } else if (key == "cluster_radius_fraction") c.cluster_radius_fraction = v.get<double>();
      else if (key == "kappa") c.kappa = v.get<double>();
      else if (key == "min_cluster") c.min_cluster = get_positive_count<std::size_t>(v, "min_cluster");
      else if (key == "metric_samples") c.metric_samples = get_positive_count<std::size_t>(v, "metric_samples");
      else if (key == "metric_resolution") {
        c.metric_resolution = get_positive_count<std::uint32_t>(v, "metric_resolution");
      } else if (key == "success_threshold") c.success_threshold = v.get<double>();
      else if (key == "seed") {
        c.seed = v.get<std::uint64_t>();
        c.optim.seed = c.seed;
      } else {
        throw InvalidParams("unknown config key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidParams(std::string("bad config value: ") + e.what());
  }
  c.validate();
  return c;
}

PipelineConfig read_pipeline_config(const std::filesystem::path& path, PipelineConfig base) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidInput(path.string() + ": " + e.what());
  }
  try {
    return pipeline_config_from_json(j, base);
  } catch (const InvalidParams& e) {
    throw InvalidParams(path.string() + ": " + e.what());
  }
}

nlohmann::json to_json(const PipelineConfig& c) {
  nlohmann::json j;
  j["k"] = c.k;
  j["surface_gate"] = c.surface_gate;
  j["surface_distance_mode"] = c.surface_distance == SurfaceDistanceMode::Vertex ? "vertex" : "triangle";
  j["target_nodes"] = c.target_nodes;
  j["alpha"] = c.optim.alpha;
  j["learning_rate"] = c.optim.learning_rate;
  j["iterations"] = c.optim.iterations;
  j["beta1"] = c.optim.beta1;
  j["beta2"] = c.optim.beta2;
  j["adam_epsilon"] = c.optim.epsilon;
  j["consistency_mode"] = c.optim.consistency == ConsistencyMode::TranslationOnly ? "translation" : "embedded";
  j["rotation_blend"] = c.rotation_blend == RotationBlend::Quaternion ? "quaternion" : "linear_polar";
  j["translation_blend"] = c.translation_blend == TranslationBlend::Linear ? "linear" : "embedded";
  j["confidence_threshold"] = c.confidence_threshold;
  j["density_radius"] = c.density_radius;
  j["patch_score"] = c.patch_score == PatchScore::Neighbors ? "neighbors" : "connected";
  j["cluster_radius"] = c.cluster_radius ? nlohmann::json(*c.cluster_radius) : nlohmann::json(nullptr);
  j["cluster_radius_fraction"] = c.cluster_radius_fraction;
  j["kappa"] = c.kappa;
  j["min_cluster"] = c.min_cluster;
  j["metric_samples"] = c.metric_samples;
  j["metric_resolution"] = c.metric_resolution;
  j["success_threshold"] = c.success_threshold;
  j["seed"] = c.seed;
  return j;
}

FilterOutput run_filter_matches(std::span<const RawMatch> matches, const DepthView& target,
                                std::span<const DepthView> views, const TriMesh& mesh,
                                const PipelineConfig& config) {
  const Filter3dParams params = config.filter_params(mesh);
  FilterOutput out;
  out.stats.input = matches.size();
  out.stats.cluster_radius = params.radius;
  const auto confident = confidence_filter(matches, config.confidence_threshold);
  out.stats.confident = confident.size();
  const auto fused = fuse_multiview(confident, config.density_radius, config.patch_score);
  out.stats.fused = fused.size();
  const auto lifted = lift_pairs(fused, target, views);
  out.stats.lifted = lifted.pairs.size();
  out.stats.lift_skipped = lifted.skipped;
  const auto filtered = filter_3d(lifted.pairs, params);
  out.stats.filtered = filtered.size();
  if (filtered.empty()) return out;
  const KnnIndex index(mesh.vertices());
  auto snapped = snap_to_anchors(filtered, mesh, index);
  out.stats.anchors = snapped.anchors.size();
  out.stats.duplicates = snapped.duplicates;
  out.anchors = std::move(snapped.anchors);
  return out;
}

OptimizeOutput run_optimize(const TriMesh& mesh, const std::vector<Anchor>& anchors,
                            const PipelineConfig& config) {
  config.validate();
  const AnchorSet set(anchors, mesh.vertices());
  if (set.empty()) throw EmptyAnchorSet();
  const TriMesh coarse = decimate(mesh, std::min(config.target_nodes, mesh.vertex_count()));
  DeformationGraph graph = build_graph(coarse);
  const std::size_t k = std::min(config.k, graph.size());
  const auto weights = compute_interpolation(graph, mesh.vertices(), k);
  OptimState state = optimize_graph(graph, weights, set, config.optim);
  FieldOptions options = config.field_options();
  options.k = std::min(config.k, mesh.vertex_count());
  TransformField field = field_from_graph(graph, mesh.vertices(), weights, options);
  return OptimizeOutput{std::move(graph), std::move(field), std::move(state.history)};
}

std::vector<Point3> read_points(const std::filesystem::path& path) {
  std::vector<Point3> points;
  for_each_json_line(path, [&](const nlohmann::json& j) {
    const Point3 p = point_from_json(j.at("p"));
    if (!p.allFinite()) throw InvalidInput("non-finite point");
    points.push_back(p);
  });
  return points;
}

void write_points(const std::filesystem::path& path, std::span<const Point3> points) {
  auto out = open_output(path);
  for (const auto& p : points) out << nlohmann::json{{"p", point_to_json(p)}}.dump() << '\n';
}

std::vector<std::vector<Point3>> read_rays(const std::filesystem::path& path) {
  std::vector<std::vector<Point3>> rays;
  for_each_json_line(path, [&](const nlohmann::json& j) {
    std::vector<Point3> samples;
    for (const auto& s : j.at("samples")) {
      samples.push_back(point_from_json(s));
      if (!samples.back().allFinite()) throw InvalidInput("non-finite sample");
    }
    if (samples.size() < 2) throw InvalidInput("a ray needs at least two samples");
    rays.push_back(std::move(samples));
  });
  return rays;
}

void write_warped_rays(const std::filesystem::path& path,
                       const std::vector<std::vector<WarpedSample>>& rays) {
  auto out = open_output(path);
  for (const auto& ray : rays) {
    nlohmann::json samples = nlohmann::json::array();
    for (const auto& s : ray) {
      samples.push_back({{"p", point_to_json(s.point)},
                         {"d", point_to_json(s.direction)},
                         {"near_surface", s.near_surface}});
    }
    out << nlohmann::json{{"samples", samples}}.dump() << '\n';
  }
}

}  // namespace dflow
