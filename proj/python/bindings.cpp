#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "dflow/cli/pipeline.hpp"
#include "dflow/correspond/camera.hpp"
#include "dflow/correspond/filter3d.hpp"
#include "dflow/defgraph/decimate.hpp"
#include "dflow/errors.hpp"
#include "dflow/eval/metrics.hpp"
#include "dflow/eval/synth.hpp"
#include "dflow/flow/field_io.hpp"
#include "dflow/flow/flow.hpp"
#include "dflow/geometry/knn.hpp"
#include "dflow/optim/optimize.hpp"
#include "dflow/parallel.hpp"

namespace py = pybind11;
using namespace dflow;

namespace {

using Points = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;
using Faces = Eigen::Matrix<std::int32_t, Eigen::Dynamic, 3, Eigen::RowMajor>;

std::vector<Point3> to_points(const Points& m) {
  std::vector<Point3> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) out[i] = m.row(i).transpose();
  return out;
}

Points from_points(const std::vector<Point3>& p) {
  Points m(static_cast<Eigen::Index>(p.size()), 3);
  for (std::size_t i = 0; i < p.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = p[i].transpose();
  return m;
}

TriMesh to_mesh(const Points& v, const Faces& f) {
  std::vector<Face> faces(static_cast<std::size_t>(f.rows()));
  for (Eigen::Index i = 0; i < f.rows(); ++i) faces[i] = {f(i, 0), f(i, 1), f(i, 2)};
  return TriMesh(to_points(v), std::move(faces));
}

Faces from_faces(const std::vector<Face>& faces) {
  Faces m(static_cast<Eigen::Index>(faces.size()), 3);
  for (std::size_t i = 0; i < faces.size(); ++i) {
    for (int c = 0; c < 3; ++c) m(static_cast<Eigen::Index>(i), c) = faces[i][c];
  }
  return m;
}

py::tuple mesh_tuple(const TriMesh& m) { return py::make_tuple(from_points(m.vertices()), from_faces(m.faces())); }

py::array_t<double> rotations_array(const std::vector<Mat3>& rs) {
  py::array_t<double> out({static_cast<py::ssize_t>(rs.size()), py::ssize_t{3}, py::ssize_t{3}});
  auto a = out.mutable_unchecked<3>();
  for (std::size_t i = 0; i < rs.size(); ++i)
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) a(static_cast<py::ssize_t>(i), r, c) = rs[i](r, c);
  return out;
}

std::vector<Mat3> to_rotations(const py::array_t<double, py::array::c_style | py::array::forcecast>& arr) {
  if (arr.ndim() != 3 || arr.shape(1) != 3 || arr.shape(2) != 3) throw InvalidInput("rotations must have shape (n, 3, 3)");
  auto a = arr.unchecked<3>();
  std::vector<Mat3> out(static_cast<std::size_t>(arr.shape(0)));
  for (std::size_t i = 0; i < out.size(); ++i)
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) out[i](r, c) = a(static_cast<py::ssize_t>(i), r, c);
  return out;
}

PipelineConfig config_from(const std::string& text) {
  if (text.empty()) return {};
  try {
    return pipeline_config_from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidParams(std::string("config is not valid JSON: ") + e.what());
  }
}

std::vector<Anchor> to_anchors(const std::vector<std::uint32_t>& vertices, const Points& src, const Points& dst) {
  if (static_cast<Eigen::Index>(vertices.size()) != src.rows() || src.rows() != dst.rows()) {
    throw InvalidInput("anchor arrays differ in length");
  }
  std::vector<Anchor> out;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    out.push_back({vertices[i], src.row(r).transpose(), dst.row(r).transpose()});
  }
  return out;
}

std::vector<CorrespondencePair> to_pairs(const Points& src, const Points& dst) {
  if (src.rows() != dst.rows()) throw InvalidInput("source and target differ in length");
  std::vector<CorrespondencePair> out(static_cast<std::size_t>(src.rows()));
  for (Eigen::Index i = 0; i < src.rows(); ++i) {
    out[i].source = src.row(i).transpose();
    out[i].target = dst.row(i).transpose();
  }
  return out;
}

py::dict scene_dict(const SyntheticScene& s) {
  std::vector<std::uint32_t> vertices;
  std::vector<Point3> targets, contaminated;
  std::vector<bool> outlier;
  for (std::size_t i = 0; i < s.clean.size(); ++i) {
    vertices.push_back(s.clean[i].vertex);
    targets.push_back(s.clean[i].pair.target);
    contaminated.push_back(s.contaminated[i].pair.target);
    outlier.push_back(s.contaminated[i].outlier);
  }
  py::dict d;
  d["kind"] = to_string(s.kind);
  d["rest"] = mesh_tuple(s.rest);
  d["transformed"] = mesh_tuple(s.transformed);
  d["field"] = s.truth;
  d["vertices"] = vertices;
  d["targets"] = from_points(targets);
  d["contaminated_targets"] = from_points(contaminated);
  d["outlier"] = outlier;
  return d;
}

}  // namespace

PYBIND11_MODULE(_dflow, m) {
  m.doc() = "Deformation-graph scene flow: fields, optimization, correspondence filtering and metrics.";

  // translators run newest first, so the base class goes in first
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<NonFiniteLoss>(m, "NonFiniteLoss", PyExc_ArithmeticError);
  py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);

  m.def("set_thread_count", &set_thread_count, py::arg("count"));
  m.def("default_config", [] { return to_json(PipelineConfig{}).dump(); },
        "Defaults as a JSON string.");
  m.def("check_config", [](const std::string& text) { return to_json(config_from(text)).dump(); },
        py::arg("config"), "Validates a JSON config and returns it merged with the defaults.");

  m.def("knn", [](const Points& points, const Points& queries, std::size_t k) {
    if (k < 1 || k > static_cast<std::size_t>(points.rows())) throw InvalidInput("k must lie in [1, len(points)]");
    const KnnIndex index(to_points(points));
    const auto q = to_points(queries);
    Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> ids(q.size(), k);
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> dist(q.size(), k);
    for (std::size_t i = 0; i < q.size(); ++i) {
      const auto hits = index.query(q[i], k);
      for (std::size_t j = 0; j < k; ++j) {
        ids(i, j) = hits[j].index;
        dist(i, j) = hits[j].distance;
      }
    }
    return py::make_tuple(ids, dist);
  }, py::arg("points"), py::arg("queries"), py::arg("k"));

  py::class_<TransformField>(m, "TransformField")
      .def(py::init([](const Points& anchors, const py::array_t<double, py::array::c_style | py::array::forcecast>& rotations,
                       const Points& translations, std::size_t k, double gate) {
             std::vector<Vec3> t = to_points(translations);
             return TransformField(to_points(anchors), to_rotations(rotations), std::move(t), k, gate);
           }),
           py::arg("anchors"), py::arg("rotations"), py::arg("translations"), py::arg("k") = kDefaultNeighbors,
           py::arg("surface_gate") = kDefaultSurfaceGate)
      .def_static("identity", [](const Points& anchors, std::size_t k, double gate) {
             return TransformField::identity(to_points(anchors), k, gate);
           }, py::arg("anchors"), py::arg("k") = kDefaultNeighbors, py::arg("surface_gate") = kDefaultSurfaceGate)
      .def_static("load", [](const std::string& path) { return read_field(std::filesystem::path(path)); })
      .def("save", [](const TransformField& f, const std::string& path) { write_field(std::filesystem::path(path), f); })
      .def("__len__", &TransformField::size)
      .def_property_readonly("k", &TransformField::k)
      .def_property_readonly("surface_gate", &TransformField::surface_gate)
      .def_property_readonly("anchors", [](const TransformField& f) { return from_points(f.anchors()); })
      .def_property_readonly("rotations", [](const TransformField& f) { return rotations_array(f.rotations()); })
      .def_property_readonly("translations", [](const TransformField& f) {
        return from_points(std::vector<Point3>(f.translations().begin(), f.translations().end()));
      })
      .def("forward", [](const TransformField& f, const Points& p) {
        return from_points(warp_points(f, to_points(p), Direction::Forward));
      }, py::arg("points"))
      .def("backward", [](const TransformField& f, const Points& p) {
        return from_points(warp_points(f, to_points(p), Direction::Backward));
      }, py::arg("points"))
      .def("near_surface", [](const TransformField& f, const Points& p, bool transformed) {
        std::vector<bool> out;
        for (const auto& q : to_points(p)) {
          out.push_back(is_near_surface(f, q, transformed ? Side::Transformed : Side::Original));
        }
        return out;
      }, py::arg("points"), py::arg("transformed") = false)
      .def("warp_mesh", [](const TransformField& f, const Points& v, const Faces& faces) {
        return mesh_tuple(warp_mesh(f, to_mesh(v, faces)));
      }, py::arg("vertices"), py::arg("faces"))
      .def("warp_ray", [](const TransformField& f, const Points& samples, bool backward) {
        const auto out = warp_ray_samples(f, to_points(samples), nullptr,
                                          backward ? Direction::Backward : Direction::Forward);
        std::vector<Point3> pts, dirs;
        std::vector<bool> near;
        for (const auto& s : out) {
          pts.push_back(s.point);
          dirs.push_back(s.direction);
          near.push_back(s.near_surface);
        }
        return py::make_tuple(from_points(pts), from_points(dirs), near);
      }, py::arg("samples"), py::arg("backward") = true);

  m.def("decimate", [](const Points& v, const Faces& f, std::size_t target) {
    return mesh_tuple(decimate(to_mesh(v, f), target));
  }, py::arg("vertices"), py::arg("faces"), py::arg("target"));

  m.def("optimize", [](const Points& v, const Faces& f, const std::vector<std::uint32_t>& vertices,
                       const Points& targets, const std::string& config) {
    const TriMesh mesh = to_mesh(v, f);
    std::vector<Point3> sources;
    for (auto i : vertices) {
      if (i >= mesh.vertex_count()) throw InvalidInput("anchor vertex out of range");
      sources.push_back(mesh.vertices()[i]);
    }
    const auto anchors = to_anchors(vertices, from_points(sources), targets);
    const PipelineConfig c = config_from(config);
    OptimizeOutput out = [&] {
      py::gil_scoped_release release;
      return run_optimize(mesh, anchors, c);
    }();
    std::vector<Point3> rot, trans;
    for (const auto& p : out.graph.params) {
      rot.push_back(p.rotation);
      trans.push_back(p.translation);
    }
    Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor> history(out.history.size(), 3);
    for (std::size_t i = 0; i < out.history.size(); ++i) {
      history.row(static_cast<Eigen::Index>(i)) << out.history[i].arap, out.history[i].consistency, out.history[i].total;
    }
    py::dict d;
    d["field"] = std::move(out.field);
    d["nodes"] = from_points(out.graph.nodes());
    d["node_rotations"] = from_points(rot);
    d["node_translations"] = from_points(trans);
    d["history"] = history;
    return d;
  }, py::arg("vertices"), py::arg("faces"), py::arg("anchor_vertices"), py::arg("anchor_targets"),
     py::arg("config") = "");

  m.def("filter_pairs", [](const Points& src, const Points& dst, double radius, double kappa, std::size_t min_cluster) {
    const auto r = filter_3d_indices(to_pairs(src, dst), Filter3dParams{radius, kappa, min_cluster});
    return r.kept;
  }, py::arg("source"), py::arg("target"), py::arg("radius"), py::arg("kappa") = 3.0, py::arg("min_cluster") = 3);

  m.def("hemisphere_poses", [](std::size_t count, double radius, const Vec3& center, const std::vector<double>& yaws) {
    const auto poses = hemisphere_poses(count, radius, center, yaws);
    py::array_t<double> out({static_cast<py::ssize_t>(poses.size()), py::ssize_t{4}, py::ssize_t{4}});
    auto a = out.mutable_unchecked<3>();
    for (std::size_t i = 0; i < poses.size(); ++i)
      for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) a(static_cast<py::ssize_t>(i), r, c) = poses[i](r, c);
    return out;
  }, py::arg("count"), py::arg("radius"), py::arg("center"), py::arg("yaws") = kDefaultYawsDeg);

  m.def("chamfer_distance", [](const Points& a, const Points& b) {
    return chamfer_distance(to_points(a), to_points(b));
  }, py::arg("a"), py::arg("b"));
  m.def("volume_iou", [](const Points& va, const Faces& fa, const Points& vb, const Faces& fb, std::uint32_t res) {
    return volume_iou(to_mesh(va, fa), to_mesh(vb, fb), res);
  }, py::arg("vertices_a"), py::arg("faces_a"), py::arg("vertices_b"), py::arg("faces_b"),
     py::arg("resolution") = kDefaultIouResolution);
  m.def("success", [](double cd, double threshold) { return success(cd, threshold); }, py::arg("cd"),
        py::arg("threshold") = kSuccessThreshold);
  m.def("evaluate", [](const Points& vp, const Faces& fp, const Points& vt, const Faces& ft, const std::string& config) {
    return to_json(evaluate(to_mesh(vp, fp), to_mesh(vt, ft), config_from(config).eval_options())).dump();
  }, py::arg("pred_vertices"), py::arg("pred_faces"), py::arg("gt_vertices"), py::arg("gt_faces"), py::arg("config") = "");

  m.def("make_synthetic", [](const std::string& kind, double angle_deg, std::size_t pairs, double contamination,
                             std::uint64_t seed) {
    SynthParams p;
    p.angle_deg = angle_deg;
    p.pairs = pairs;
    p.contamination = contamination;
    return scene_dict(make_synthetic(synthetic_kind_from_string(kind), p, seed));
  }, py::arg("kind"), py::arg("angle_deg") = 45.0, py::arg("pairs") = 500, py::arg("contamination") = 0.0,
     py::arg("seed") = 0);
}
