// dflow: command-line front end for the deformation-flow pipeline.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>

#include "dflow/cli/pipeline.hpp"
#include "dflow/correspond/camera.hpp"
#include "dflow/correspond/correspond_io.hpp"
#include "dflow/defgraph/graph_io.hpp"
#include "dflow/errors.hpp"
#include "dflow/eval/metrics.hpp"
#include "dflow/eval/render.hpp"
#include "dflow/eval/synth.hpp"
#include "dflow/flow/field_io.hpp"
#include "dflow/geometry/io.hpp"
#include "dflow/optim/optimize.hpp"
#include "dflow/parallel.hpp"

namespace fs = std::filesystem;
using namespace dflow;

namespace {

enum Exit { kOk = 0, kFailure = 1, kInput = 2, kEmpty = 3, kNumeric = 4 };

struct EmptyResult : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  bool verbose = false;
};

PipelineConfig load_config(const Globals& g) {
  PipelineConfig c;
  if (!g.config_path.empty()) c = read_pipeline_config(g.config_path);
  if (g.seed) {
    c.seed = *g.seed;
    c.optim.seed = *g.seed;
  }
  if (g.verbose) std::cerr << "config: " << to_json(c).dump() << '\n';
  return c;
}

void stat(const char* name, std::size_t value) { std::fprintf(stderr, "%-22s %zu\n", name, value); }
void stat(const char* name, double value) { std::fprintf(stderr, "%-22s %.9g\n", name, value); }

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

// filter-matches

struct FilterArgs {
  std::string matches, cameras, depth_dir, mesh, output;
  std::string target_camera, target_depth;
};

int cmd_filter(const Globals& g, const FilterArgs& a) {
  const PipelineConfig config = load_config(g);
  const auto matches = read_matches(a.matches);
  const auto cameras = read_cameras(a.cameras);
  const TriMesh mesh = read_mesh(a.mesh);
  const fs::path dir(a.depth_dir);
  const fs::path target_cam_path = a.target_camera.empty() ? dir / "target_camera.json" : fs::path(a.target_camera);
  const fs::path target_depth_path = a.target_depth.empty() ? dir / "depth_target.pfm" : fs::path(a.target_depth);
  const auto target_cams = read_cameras(target_cam_path);
  if (target_cams.size() != 1) throw InvalidInput(target_cam_path.string() + ": expected exactly one camera");
  const DepthView target{target_cams[0], read_pfm(target_depth_path)};
  std::vector<DepthView> views;
  for (std::size_t i = 0; i < cameras.size(); ++i) {
    views.push_back({cameras[i], read_pfm(dir / depth_filename(static_cast<std::int32_t>(i)))});
  }

  const auto result = run_filter_matches(matches, target, views, mesh, config);
  const auto& s = result.stats;
  stat("matches", s.input);
  stat("after confidence", s.confident);
  stat("after fusion", s.fused);
  stat("lifted", s.lifted);
  stat("lift skipped", s.lift_skipped);
  stat("cluster radius", s.cluster_radius);
  stat("after 3d filter", s.filtered);
  stat("anchors", s.anchors);
  stat("duplicate vertices", s.duplicates);
  if (result.anchors.empty()) throw EmptyResult("no anchors survived");
  write_anchors(a.output, result.anchors);
  return kOk;
}

// optimize

struct OptimizeArgs {
  std::string mesh, anchors, out_dir;
};

int cmd_optimize(const Globals& g, const OptimizeArgs& a) {
  const PipelineConfig config = load_config(g);
  const TriMesh mesh = read_mesh(a.mesh);
  const auto anchors = read_anchors(a.anchors);
  const auto out = run_optimize(mesh, anchors, config);
  stat("vertices", mesh.vertex_count());
  stat("graph nodes", out.graph.size());
  stat("graph edges", out.graph.edges().size());
  stat("anchors", anchors.size());
  stat("iterations", out.history.size());
  const auto& last = out.history.back();
  stat("final l_arap", last.arap);
  stat("final l_con", last.consistency);
  std::fprintf(stderr, "%-22s %.17g\n", "final l_dg", last.total);

  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  write_field(dir / "field.dfield", out.field);
  write_graph(dir / "graph.dgraph", out.graph);
  write_history_csv(dir / "history.csv", out.history);
  return kOk;
}

// warp

struct WarpArgs {
  std::string field, input, output, mode = "auto", direction = "forward", surface_mesh;
};

bool has_mesh_extension(const fs::path& p) {
  const auto ext = p.extension().string();
  return ext == ".obj" || ext == ".ply";
}

int cmd_warp(const Globals& g, const WarpArgs& a) {
  const PipelineConfig config = load_config(g);
  std::string mode = a.mode;
  if (mode == "auto") {
    if (!has_mesh_extension(a.input)) throw InvalidInput("cannot infer --mode from " + a.input + "; pass points or rays");
    mode = "mesh";
  }
  const Direction direction = a.direction == "forward" ? Direction::Forward : Direction::Backward;
  const TransformField field = read_field(fs::path(a.field));

  if (mode == "mesh") {
    const TriMesh mesh = read_mesh(a.input);
    TriMesh out = direction == Direction::Forward
                      ? warp_mesh(field, mesh)
                      : TriMesh(warp_points(field, mesh.vertices(), Direction::Backward), mesh.faces());
    stat("vertices", out.vertex_count());
    write_mesh(a.output, out);
  } else if (mode == "points") {
    const auto points = read_points(a.input);
    const Side side = direction == Direction::Forward ? Side::Original : Side::Transformed;
    const auto out = warp_points(field, points, direction);
    std::size_t near = 0;
    for (const auto& p : points) near += is_near_surface(field, p, side) ? 1 : 0;
    stat("points", points.size());
    stat("near surface", near);
    write_points(a.output, out);
  } else {
    const auto rays = read_rays(a.input);
    std::optional<TriangleSurface> surface;
    if (config.surface_distance == SurfaceDistanceMode::Triangle) {
      if (a.surface_mesh.empty()) throw InvalidInput("surface_distance_mode \"triangle\" needs --surface-mesh");
      TriMesh rest = read_mesh(a.surface_mesh);
      if (rest.vertex_count() != field.size()) {
        throw InvalidInput(a.surface_mesh + ": vertex count does not match the field's anchors");
      }
      surface = direction == Direction::Forward ? TriangleSurface(std::move(rest))
                                                : transformed_surface(field, rest.faces());
    }
    std::vector<std::vector<WarpedSample>> out;
    std::size_t samples = 0, near = 0, copied = 0;
    for (const auto& ray : rays) {
      out.push_back(warp_ray_samples(field, ray, surface ? &*surface : nullptr, direction));
      for (const auto& s : out.back()) {
        ++samples;
        near += s.near_surface ? 1 : 0;
        copied += s.direction_copied ? 1 : 0;
      }
    }
    stat("rays", rays.size());
    stat("samples", samples);
    stat("near surface", near);
    stat("copied directions", copied);
    write_warped_rays(a.output, out);
  }
  return kOk;
}

// eval

struct EvalArgs {
  std::string predicted, truth, output;
};

int cmd_eval(const Globals& g, const EvalArgs& a) {
  const PipelineConfig config = load_config(g);
  const TriMesh pred = read_mesh(a.predicted);
  const TriMesh gt = read_mesh(a.truth);
  const MetricReport r = evaluate(pred, gt, config.eval_options());
  if (r.non_watertight) std::cerr << "warning: more than 0.1% of voxel rays crossed an open surface\n";
  const auto j = to_json(r);
  if (!a.output.empty()) write_json(a.output, j);
  std::cout << j.dump() << '\n';
  return kOk;
}

// synth

struct SynthArgs {
  std::string kind, out_dir;
  SynthParams params;
  bool fixture = false;
  FixtureParams fixture_params;
};

int cmd_synth(const Globals& g, const SynthArgs& a) {
  const PipelineConfig config = load_config(g);
  const SyntheticKind kind = synthetic_kind_from_string(a.kind);
  SynthParams params = a.params;
  params.k = config.k;
  params.surface_gate = config.surface_gate;
  params.validate(kind);
  const auto scene = make_synthetic(kind, params, config.seed);

  auto anchors_of = [](const std::vector<LabeledPair>& pairs) {
    std::vector<Anchor> out;
    for (const auto& p : pairs) out.push_back({p.vertex, p.pair.source, p.pair.target});
    return out;
  };
  nlohmann::json outliers = nlohmann::json::array();
  for (std::size_t i = 0; i < scene.contaminated.size(); ++i) {
    if (scene.contaminated[i].outlier) outliers.push_back(i);
  }
  nlohmann::json manifest = {
      {"kind", to_string(kind)},
      {"seed", config.seed},
      {"angle_deg", params.angle_deg},
      {"pairs", params.pairs},
      {"contamination", params.contamination},
      {"outliers", scene.outliers},
      {"outlier_indices", outliers},
      {"files",
       {{"rest", "rest.obj"},
        {"transformed", "transformed.obj"},
        {"field", "gt.dfield"},
        {"clean", "anchors_clean.jsonl"},
        {"contaminated", "anchors_contaminated.jsonl"}}},
  };

  std::optional<MatchFixture> fixture;
  if (a.fixture) {
    fixture = make_match_fixture(scene.rest, scene.transformed, a.fixture_params, config.seed);
    nlohmann::json bad = nlohmann::json::array();
    for (std::size_t i = 0; i < fixture->outlier.size(); ++i) {
      if (fixture->outlier[i]) bad.push_back(i);
    }
    manifest["fixture"] = {{"matches", "matches.jsonl"},
                           {"cameras", "cameras.json"},
                           {"depth_dir", "depth"},
                           {"clean", fixture->clean},
                           {"outlier_matches", bad}};
  }

  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  write_mesh(dir / "rest.obj", scene.rest);
  write_mesh(dir / "transformed.obj", scene.transformed);
  write_field(dir / "gt.dfield", scene.truth);
  write_anchors(dir / "anchors_clean.jsonl", anchors_of(scene.clean));
  write_anchors(dir / "anchors_contaminated.jsonl", anchors_of(scene.contaminated));
  if (fixture) {
    fs::create_directories(dir / "depth");
    write_matches(dir / "matches.jsonl", fixture->matches);
    write_cameras(dir / "cameras.json", fixture->cameras);
    for (std::size_t i = 0; i < fixture->depths.size(); ++i) {
      write_pfm(dir / "depth" / depth_filename(static_cast<std::int32_t>(i)), fixture->depths[i]);
    }
    write_cameras(dir / "depth" / "target_camera.json", {fixture->target_camera});
    write_pfm(dir / "depth" / "depth_target.pfm", fixture->target_depth);
  }
  write_json(dir / "manifest.json", manifest);
  stat("vertices", scene.rest.vertex_count());
  stat("clean pairs", scene.clean.size());
  stat("outliers", scene.outliers);
  if (fixture) stat("fixture matches", fixture->matches.size());
  return kOk;
}

// poses

struct PosesArgs {
  std::size_t count = 200;
  double radius = 1.0;
  std::vector<double> center = {0.0, 0.0, 0.0};
  std::vector<double> yaws = kDefaultYawsDeg;
  std::uint32_t image_size = 512;
  double focal = 0.0;
  std::string output;
};

int cmd_poses(const Globals& g, const PosesArgs& a) {
  load_config(g);
  const auto poses = hemisphere_poses(a.count, a.radius, Point3(a.center[0], a.center[1], a.center[2]), a.yaws);
  std::vector<Camera> cameras;
  for (const auto& pose : poses) {
    Camera c;
    c.width = c.height = a.image_size;
    c.fx = c.fy = a.focal > 0.0 ? a.focal : static_cast<double>(a.image_size);
    c.cx = c.cy = (a.image_size - 1) / 2.0;
    c.pose = pose;
    cameras.push_back(c);
  }
  write_cameras(a.output, cameras);
  stat("cameras", cameras.size());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deformation-flow pipeline: correspondence filtering, graph optimization, warping and evaluation"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config_path, "JSON config overriding defaults field-wise");
  app.add_option("--seed", g.seed, "Random seed (overrides the config)");
  app.add_option("--threads", g.threads, "Worker thread cap; results do not depend on it");
  app.add_flag("--verbose", g.verbose, "Print the effective config");

  FilterArgs fa;
  auto* filter = app.add_subcommand("filter-matches", "Turn raw 2D matches into mesh anchors");
  filter->add_option("matches", fa.matches, "matches.jsonl")->required();
  filter->add_option("cameras", fa.cameras, "cameras.json of the original views")->required();
  filter->add_option("depth_dir", fa.depth_dir, "directory with depth_NNNN.pfm per view")->required();
  filter->add_option("mesh", fa.mesh, "original mesh")->required();
  filter->add_option("-o,--output", fa.output, "anchors.jsonl")->required();
  filter->add_option("--target-camera", fa.target_camera, "transformed-view camera (default <depth_dir>/target_camera.json)");
  filter->add_option("--target-depth", fa.target_depth, "transformed-view depth (default <depth_dir>/depth_target.pfm)");

  OptimizeArgs oa;
  auto* optimize = app.add_subcommand("optimize", "Fit the deformation graph to anchors");
  optimize->add_option("mesh", oa.mesh, "original mesh")->required();
  optimize->add_option("anchors", oa.anchors, "anchors.jsonl")->required();
  optimize->add_option("-o,--out-dir", oa.out_dir, "writes field.dfield, graph.dgraph, history.csv")->required();

  WarpArgs wa;
  auto* warp = app.add_subcommand("warp", "Apply a transform field to a mesh, points or ray samples");
  warp->add_option("field", wa.field, "field.dfield")->required();
  warp->add_option("input", wa.input, "mesh, points.jsonl or rays.jsonl")->required();
  warp->add_option("-o,--output", wa.output, "warped output")->required();
  warp->add_option("--mode", wa.mode, "auto, mesh, points or rays")
      ->check(CLI::IsMember({"auto", "mesh", "points", "rays"}));
  warp->add_option("--direction", wa.direction, "forward or backward")
      ->check(CLI::IsMember({"forward", "backward"}));
  warp->add_option("--surface-mesh", wa.surface_mesh, "original mesh for triangle surface gating");

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "Chamfer distance, volume IoU and success");
  eval->add_option("predicted", ea.predicted, "predicted mesh")->required();
  eval->add_option("truth", ea.truth, "ground-truth mesh")->required();
  eval->add_option("-o,--output", ea.output, "also write the metrics JSON here");

  SynthArgs sa;
  auto* synth = app.add_subcommand("synth", "Write a synthetic deformation fixture");
  synth->add_option("kind", sa.kind, "bend, twist or articulate")->required();
  synth->add_option("-o,--out-dir", sa.out_dir, "output directory")->required();
  synth->add_option("--angle", sa.params.angle_deg, "degrees (twist: degrees per unit length)");
  synth->add_option("--pairs", sa.params.pairs, "clean correspondences");
  synth->add_option("--contamination", sa.params.contamination, "outlier fraction in [0, 1)");
  synth->add_flag("--fixture", sa.fixture, "also render cameras, depth maps and raw matches");
  synth->add_option("--fixture-clean", sa.fixture_params.clean, "clean raw matches");
  synth->add_option("--fixture-outliers", sa.fixture_params.outliers, "outlier raw matches");
  synth->add_option("--fixture-views", sa.fixture_params.views, "original views");
  synth->add_option("--image-size", sa.fixture_params.image_size, "fixture raster size");

  PosesArgs pa;
  auto* poses = app.add_subcommand("poses", "Hemisphere camera poses");
  poses->add_option("--count", pa.count, "positions on the hemisphere")->check(CLI::PositiveNumber);
  poses->add_option("--radius", pa.radius, "distance to the center");
  poses->add_option("--center", pa.center, "x y z")->expected(3);
  poses->add_option("--yaws", pa.yaws, "roll angles in degrees per position")->expected(1, -1);
  poses->add_option("--image-size", pa.image_size, "raster width and height");
  poses->add_option("--focal", pa.focal, "focal length in pixels (default: image size)");
  poses->add_option("-o,--output", pa.output, "cameras.json")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInput;
  }

  try {
    set_thread_count(g.threads);
    if (*filter) return cmd_filter(g, fa);
    if (*optimize) return cmd_optimize(g, oa);
    if (*warp) return cmd_warp(g, wa);
    if (*eval) return cmd_eval(g, ea);
    if (*synth) return cmd_synth(g, sa);
    if (*poses) return cmd_poses(g, pa);
  } catch (const EmptyResult& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kEmpty;
  } catch (const NonFiniteLoss& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumeric;
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInput;
  } catch (const DegenerateDirection& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInput;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInput;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}
