#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dflow/geometry/mesh.hpp"

namespace dflow {

inline constexpr std::size_t kDefaultSurfaceSamples = 100000;
inline constexpr std::uint32_t kDefaultIouResolution = 128;
inline constexpr double kSuccessThreshold = 0.004;

/// mean_a min_b |a - b|^2 + mean_b min_a |a - b|^2. Throws EmptySet.
double chamfer_distance(std::span<const Point3> a, std::span<const Point3> b);

/// `count` points uniformly distributed over the surface by area. The
/// sequence depends only on the mesh, count and seed.
std::vector<Point3> sample_surface(const TriMesh& mesh, std::size_t count, std::uint64_t seed);

/// Chamfer distance between area-uniform samples of two meshes, both drawn
/// with `seed` so identical meshes score exactly 0.
double chamfer_distance(const TriMesh& a, const TriMesh& b,
                        std::size_t samples = kDefaultSurfaceSamples, std::uint64_t seed = 0);

struct VolumeIou {
  double iou = 0.0;
  /// Fraction of rays (both meshes) that crossed the surface an odd number
  /// of times.
  double odd_ray_fraction = 0.0;
  /// Set when odd_ray_fraction exceeds 0.1%, a sign of non-watertight input.
  bool non_watertight = false;
};

/// Voxelizes both meshes on a resolution^3 grid spanning their joint bounding
/// box, by parity ray casting along +x through voxel centers, and returns
/// |A and B| / |A or B|.
VolumeIou volume_iou_detailed(const TriMesh& a, const TriMesh& b,
                              std::uint32_t resolution = kDefaultIouResolution);
double volume_iou(const TriMesh& a, const TriMesh& b, std::uint32_t resolution = kDefaultIouResolution);

/// cd < threshold.
bool success(double cd, double threshold = kSuccessThreshold);

struct MetricReport {
  double cd = 0.0;
  double cd_x1000 = 0.0;
  double vmiou = 0.0;
  bool success = false;
  bool non_watertight = false;
};

struct EvalOptions {
  std::size_t samples = kDefaultSurfaceSamples;
  std::uint32_t resolution = kDefaultIouResolution;
  std::uint64_t seed = 0;
  double threshold = kSuccessThreshold;
};

MetricReport evaluate(const TriMesh& predicted, const TriMesh& truth, const EvalOptions& options = {});

/// {"cd", "cd_x1000", "vmiou", "success"}
nlohmann::json to_json(const MetricReport& report);

}  // namespace dflow
