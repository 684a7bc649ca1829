#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "dflow/cli/pipeline.hpp"
#include "dflow/errors.hpp"
#include "dflow/eval/metrics.hpp"
#include "dflow/flow/field_io.hpp"
#include "dflow/geometry/io.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace dflow;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

class Sandbox {
 public:
  explicit Sandbox(const std::string& name) : dir_(fs::temp_directory_path() / ("dflow_cli_" + name)) {
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  ~Sandbox() { fs::remove_all(dir_); }
  fs::path operator/(const std::string& name) const { return dir_ / name; }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  Run run(const std::string& args) const {
    const std::string cmd = std::string(DFLOW_CLI) + " " + args + " > " + path("stdout.txt") + " 2> " + path("stderr.txt");
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(dir_ / "stdout.txt"), slurp(dir_ / "stderr.txt")};
  }

 private:
  fs::path dir_;
};

std::vector<json> read_jsonl(const fs::path& p) {
  std::vector<json> out;
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line)) out.push_back(json::parse(line));
  return out;
}

}  // namespace

TEST_CASE("pipeline config") {
  const PipelineConfig d;
  CHECK(d.k == 20);
  CHECK(d.surface_gate == 7e-5);
  CHECK(d.optim.alpha == 0.1);
  CHECK(d.optim.learning_rate == 0.001);
  CHECK(d.optim.iterations == 3000);
  CHECK(d.target_nodes == 2000);
  CHECK(d.confidence_threshold == 0.5);
  CHECK(d.kappa == 3.0);
  CHECK(d.min_cluster == 3);
  CHECK(d.metric_resolution == 128);

  const json j = to_json(d);
  CHECK(to_json(pipeline_config_from_json(j)) == j);

  const auto c = pipeline_config_from_json(json{{"k", 5}, {"seed", 9}, {"patch_score", "connected"}, {"cluster_radius", 0.1}});
  CHECK(c.k == 5);
  CHECK(c.seed == 9);
  CHECK(c.optim.seed == 9);
  CHECK(c.patch_score == PatchScore::ConnectedPatch);
  CHECK(c.cluster_radius == 0.1);
  CHECK(c.optim.alpha == 0.1);

  CHECK_THROWS_AS(pipeline_config_from_json(json{{"nope", 1}}), InvalidParams);
  CHECK_THROWS_AS(pipeline_config_from_json(json{{"k", 0}}), InvalidParams);
  CHECK_THROWS_AS(pipeline_config_from_json(json{{"k", "twenty"}}), InvalidParams);
  CHECK_THROWS_AS(pipeline_config_from_json(json{{"min_cluster", 1}}), InvalidParams);
  CHECK_THROWS_AS(pipeline_config_from_json(json{{"confidence_threshold", 2}}), InvalidParams);
  CHECK_THROWS_AS(pipeline_config_from_json(json{{"metric_resolution", 8}}), InvalidParams);
  CHECK_THROWS_AS(pipeline_config_from_json(json{{"translation_blend", "cubic"}}), InvalidParams);
  CHECK_THROWS_AS(pipeline_config_from_json(json::array()), InvalidParams);
}

TEST_CASE("cli: poses") {
  Sandbox box("poses");
  REQUIRE(box.run("poses --count 200 --radius 2 --center 0 0 0 -o " + box.path("a.json")).code == 0);
  REQUIRE(box.run("poses --count 200 --radius 2 --center 0 0 0 -o " + box.path("b.json")).code == 0);
  CHECK(slurp(box / "a.json") == slurp(box / "b.json"));
  const auto cams = json::parse(slurp(box / "a.json"));
  REQUIRE(cams.size() == 1400);
  for (const auto& c : cams) {
    const auto t = c.at("T_wc").get<std::vector<double>>();
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 3; ++k) r(i, k) = t[4 * i + k];
    CHECK((r.transpose() * r - Mat3::Identity()).norm() < 1e-9);
    CHECK(r.determinant() == doctest::Approx(1.0));
  }
  CHECK(box.run("poses --count 0 -o " + box.path("c.json")).code == 2);
}

TEST_CASE("cli: synth") {
  Sandbox box("synth");
  REQUIRE(box.run("--seed 4 synth bend --angle 0 -o " + box.path("flat")).code == 0);
  CHECK(read_mesh(box / "flat/rest.obj").vertices() == read_mesh(box / "flat/transformed.obj").vertices());

  REQUIRE(box.run("--seed 4 synth twist --contamination 0.3 -o " + box.path("a")).code == 0);
  REQUIRE(box.run("--seed 4 synth twist --contamination 0.3 -o " + box.path("b")).code == 0);
  for (const char* f : {"rest.obj", "transformed.obj", "gt.dfield", "anchors_clean.jsonl",
                        "anchors_contaminated.jsonl", "manifest.json"}) {
    CHECK(slurp(box / ("a/" + std::string(f))) == slurp(box / ("b/" + std::string(f))));
  }
  const auto manifest = json::parse(slurp(box / "a/manifest.json"));
  CHECK(manifest.at("outliers") == 150);
  CHECK(manifest.at("outlier_indices").size() == 150);
  CHECK(read_jsonl(box / "a/anchors_contaminated.jsonl").size() == 500);

  const auto bad = box.run("synth bend --angle 95 -o " + box.path("bad"));
  CHECK(bad.code == 2);
  CHECK_FALSE(fs::exists(box / "bad"));
  CHECK(box.run("synth fold -o " + box.path("bad")).code == 2);
}

TEST_CASE("cli: filter-matches") {
  Sandbox box("filter");
  REQUIRE(box.run("--seed 2 synth bend --contamination 0.3 --fixture -o " + box.path("s")).code == 0);
  const std::string inputs = box.path("s/cameras.json") + " " + box.path("s/depth") + " " + box.path("s/rest.obj");

  const auto r = box.run("filter-matches " + box.path("s/matches.jsonl") + " " + inputs + " -o " + box.path("a.jsonl"));
  REQUIRE(r.code == 0);
  CHECK(r.err.find("anchors") != std::string::npos);
  REQUIRE(box.run("filter-matches " + box.path("s/matches.jsonl") + " " + inputs + " -o " + box.path("b.jsonl")).code == 0);
  CHECK(slurp(box / "a.jsonl") == slurp(box / "b.jsonl"));

  // at least 90% of the injected outliers are gone: surviving anchors whose
  // target disagrees with the true flow
  const TransformField truth = read_field(box / "s/gt.dfield");
  const auto anchors = read_jsonl(box / "a.jsonl");
  const double tol = 0.02;
  std::size_t wrong = 0;
  for (const auto& a : anchors) {
    const Point3 va(a["va"][0], a["va"][1], a["va"][2]);
    const Point3 vb(a["vb"][0], a["vb"][1], a["vb"][2]);
    if ((forward_flow(truth, va) - vb).norm() > tol) ++wrong;
  }
  CHECK(anchors.size() > 100);
  CHECK(wrong <= 15);

  std::ofstream(box / "empty.jsonl").close();
  const auto empty = box.run("filter-matches " + box.path("empty.jsonl") + " " + inputs + " -o " + box.path("c.jsonl"));
  CHECK(empty.code == 3);
  CHECK(empty.err.find("no anchors survived") != std::string::npos);
  CHECK_FALSE(fs::exists(box / "c.jsonl"));

  std::ofstream(box / "broken.jsonl") << "{\"view\":0,\"ub\":1,\"vb\":1,\"ua\":1,\"va\":1,\"conf\":1}\n{\"view\":\n";
  const auto broken = box.run("filter-matches " + box.path("broken.jsonl") + " " + inputs + " -o " + box.path("c.jsonl"));
  CHECK(broken.code == 2);
  CHECK(broken.err.find("broken.jsonl:2") != std::string::npos);
}

TEST_CASE("cli: optimize recovers a global translation") {
  Sandbox box("optimize");
  const auto mesh = testing::sphere_mesh(20, 0.3);
  write_mesh(box / "mesh.obj", mesh);
  const Vec3 shift(0.1, -0.05, 0.2);
  {
    std::ofstream out(box / "anchors.jsonl");
    for (std::size_t i = 0; i < mesh.vertex_count(); i += 3) {
      const Point3& v = mesh.vertices()[i];
      const Point3 w = v + shift;
      out << json{{"vid", i}, {"va", {v.x(), v.y(), v.z()}}, {"vb", {w.x(), w.y(), w.z()}}}.dump() << '\n';
    }
  }
  std::ofstream(box / "config.json") << R"({"target_nodes": 60})";
  const auto r = box.run("--config " + box.path("config.json") + " optimize " + box.path("mesh.obj") + " " +
                         box.path("anchors.jsonl") + " -o " + box.path("out"));
  REQUIRE(r.code == 0);
  const auto graph = json::parse(slurp(box / "out/graph.dgraph"));
  CHECK(graph.at("nodes").size() == 60);
  for (const auto& p : graph.at("params")) {
    const Vec3 t(p["translation"][0], p["translation"][1], p["translation"][2]);
    CHECK((t - shift).norm() < 1e-4);
  }

  std::ifstream csv(box / "out/history.csv");
  std::string line, last;
  std::getline(csv, line);
  CHECK(line == "iteration,l_arap,l_con,l_dg");
  std::size_t rows = 0;
  while (std::getline(csv, line)) {
    ++rows;
    last = line;
  }
  CHECK(rows == 3000);
  const std::string printed = r.err.substr(r.err.find("final l_dg") + 10);
  CHECK(std::stod(printed) == std::stod(last.substr(last.rfind(',') + 1)));

  // warping the mesh through the fitted field moves it by the shift
  REQUIRE(box.run("warp " + box.path("out/field.dfield") + " " + box.path("mesh.obj") + " -o " + box.path("w.obj")).code == 0);
  const auto warped = read_mesh(box / "w.obj");
  for (std::size_t i = 0; i < mesh.vertex_count(); ++i) {
    CHECK((warped.vertices()[i] - mesh.vertices()[i] - shift).norm() < 1e-4);
  }

  std::ofstream(box / "empty.jsonl").close();
  CHECK(box.run("optimize " + box.path("mesh.obj") + " " + box.path("empty.jsonl") + " -o " + box.path("none")).code == 2);
  CHECK_FALSE(fs::exists(box / "none"));
}

TEST_CASE("cli: non-finite loss") {
  Sandbox box("nonfinite");
  const auto mesh = testing::sphere_mesh(12, 0.3);
  write_mesh(box / "mesh.obj", mesh);
  const Point3& v = mesh.vertices()[0];
  std::ofstream(box / "a.jsonl") << json{{"vid", 0}, {"va", {v.x(), v.y(), v.z()}}, {"vb", {1e300, 1e300, 1e300}}}.dump() << '\n';
  const auto r = box.run("optimize " + box.path("mesh.obj") + " " + box.path("a.jsonl") + " -o " + box.path("out"));
  CHECK(r.code == 4);
  CHECK(r.err.find("iteration 0") != std::string::npos);
  CHECK_FALSE(fs::exists(box / "out"));
}

TEST_CASE("cli: warp") {
  Sandbox box("warp");
  REQUIRE(box.run("--seed 1 synth bend -o " + box.path("s")).code == 0);
  const auto rest = read_mesh(box / "s/rest.obj");

  // identity field on the rest mesh
  write_field(box / "id.dfield", TransformField::identity(rest.vertices()));
  REQUIRE(box.run("warp " + box.path("id.dfield") + " " + box.path("s/rest.obj") + " -o " + box.path("same.obj")).code == 0);
  const auto same = read_mesh(box / "same.obj");
  CHECK(same.vertices() == rest.vertices());
  CHECK(same.faces() == rest.faces());

  // forward then backward on surface points
  const auto points = sample_surface(rest, 2000, 3);
  write_points(box / "p.jsonl", points);
  const std::string field = box.path("s/gt.dfield") + " ";
  REQUIRE(box.run("warp " + field + box.path("p.jsonl") + " --mode points -o " + box.path("f.jsonl")).code == 0);
  REQUIRE(box.run("warp " + field + box.path("f.jsonl") + " --mode points --direction backward -o " + box.path("b.jsonl")).code == 0);
  const auto back = read_points(box / "b.jsonl");
  REQUIRE(back.size() == points.size());
  double worst = 0;
  for (std::size_t i = 0; i < points.size(); ++i) worst = std::max(worst, (back[i] - points[i]).norm());
  CHECK(worst < 1e-3 * rest.bounds().diagonal());

  // rays: one along rest vertices, one far from the surface
  {
    std::ofstream out(box / "rays.jsonl");
    json near = json::array(), far = json::array();
    for (int i = 0; i < 4; ++i) {
      const Point3& v = rest.vertices()[200 + i];
      near.push_back({v.x(), v.y(), v.z()});
      far.push_back({5.0 + i, 5.0, 5.0});
    }
    out << json{{"samples", near}}.dump() << '\n' << json{{"samples", far}}.dump() << '\n';
  }
  REQUIRE(box.run("warp " + field + box.path("rays.jsonl") + " --mode rays -o " + box.path("r.jsonl")).code == 0);
  const auto rays = read_jsonl(box / "r.jsonl");
  REQUIRE(rays.size() == 2);
  for (const auto& s : rays[1]["samples"]) CHECK(s["near_surface"] == false);
  REQUIRE(box.run("warp " + field + box.path("rays.jsonl") + " --mode rays --direction forward -o " + box.path("rf.jsonl")).code == 0);
  const auto forward = read_jsonl(box / "rf.jsonl");
  for (const auto& s : forward[0]["samples"]) {
    CHECK(s["near_surface"] == true);
    const Vec3 d(s["d"][0], s["d"][1], s["d"][2]);
    CHECK(d.norm() == doctest::Approx(1.0));
  }
  for (const auto& s : forward[1]["samples"]) CHECK(s["near_surface"] == false);

  std::ofstream(box / "tri.json") << R"({"surface_distance_mode": "triangle"})";
  CHECK(box.run("--config " + box.path("tri.json") + " warp " + field + box.path("rays.jsonl") + " --mode rays -o " + box.path("t.jsonl")).code == 2);
  REQUIRE(box.run("--config " + box.path("tri.json") + " warp " + field + box.path("rays.jsonl") + " --mode rays --direction forward --surface-mesh " +
                  box.path("s/rest.obj") + " -o " + box.path("t.jsonl")).code == 0);
  const auto tri = read_jsonl(box / "t.jsonl");
  for (const auto& s : tri[0]["samples"]) CHECK(s["near_surface"] == true);

  std::ofstream(box / "junk.jsonl") << "not json\n";
  const auto junk = box.run("warp " + field + box.path("junk.jsonl") + " --mode points -o " + box.path("j.jsonl"));
  CHECK(junk.code == 2);
  CHECK(junk.err.find("junk.jsonl:1") != std::string::npos);
  CHECK(box.run("warp " + field + box.path("junk.jsonl") + " -o " + box.path("j.jsonl")).code == 2);
}

TEST_CASE("cli: eval") {
  Sandbox box("eval");
  write_mesh(box / "a.obj", testing::box_mesh(Point3(0, 0, 0), Point3(1, 1, 1)));
  write_mesh(box / "b.obj", testing::box_mesh(Point3(0.5, 0, 0), Point3(1.5, 1, 1)));
  auto r = box.run("eval " + box.path("a.obj") + " " + box.path("a.obj"));
  REQUIRE(r.code == 0);
  auto j = json::parse(r.out);
  CHECK(j["cd"] == 0.0);
  CHECK(j["vmiou"] == 1.0);
  CHECK(j["success"] == true);

  r = box.run("eval " + box.path("a.obj") + " " + box.path("b.obj") + " -o " + box.path("m.json"));
  REQUIRE(r.code == 0);
  j = json::parse(r.out);
  CHECK(std::abs(j["vmiou"].get<double>() - 1.0 / 3.0) < 0.01);
  CHECK(j["cd_x1000"].get<double>() == 1000.0 * j["cd"].get<double>());
  CHECK(json::parse(slurp(box / "m.json")) == j);

  std::ofstream(box / "bad.obj") << "v 0 0 0\nf 1 2 3\n";
  CHECK(box.run("eval " + box.path("bad.obj") + " " + box.path("a.obj")).code == 2);
  std::ofstream(box / "cfg.json") << R"({"bogus": true})";
  CHECK(box.run("--config " + box.path("cfg.json") + " eval " + box.path("a.obj") + " " + box.path("a.obj")).code == 2);
}
