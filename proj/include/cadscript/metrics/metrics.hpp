#pragma once

// Reconstruction and set-level metrics. Raw functions return unscaled
// values; the reporting layer (evaluate_sets) applies the x10^3 factor to
// CD, ECD and MMD and x10^2 to JSD.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cadscript/metrics/point_cloud.hpp"

namespace cadscript::metrics {

inline constexpr double kDistanceScale = 1e3;
inline constexpr double kDivergenceScale = 1e2;

// Nearest neighbour in `to` for every point of `from`.
std::vector<KdTree::Hit> nearest_neighbors(const std::vector<Vec3>& from, const std::vector<Vec3>& to);

// Symmetric mean squared nearest-neighbour distance.
double chamfer(const PointCloud& x, const PointCloud& y);
double chamfer(const std::vector<Vec3>& x, const std::vector<Vec3>& y);

struct EdgeParams {
  double radius = 0.004;
  double normal_dot_threshold = 0.2;

  void check() const;
};

// Point i is an edge point when some j != i lies within `radius` and
// |n_i . n_j| < threshold. Ascending indices.
std::vector<std::size_t> classify_edge_points(const PointCloud& cloud, const EdgeParams& params = {});

PointCloud subset(const PointCloud& cloud, const std::vector<std::size_t>& indices);

// Chamfer distance between the edge subsets; nullopt when either is empty.
std::optional<double> edge_chamfer(const PointCloud& x, const PointCloud& y, const EdgeParams& params = {});

double normal_consistency(const PointCloud& x, const PointCloud& y);

// chamfer(G[g], S[s]) for every pair, indexed [s][g].
using DistanceMatrix = std::vector<std::vector<double>>;
DistanceMatrix chamfer_matrix(const std::vector<PointCloud>& refs, const std::vector<PointCloud>& gens);

// Percentage of reference shapes that are the nearest reference of at least
// one generated shape.
double coverage(const DistanceMatrix& d);
double coverage(const std::vector<PointCloud>& refs, const std::vector<PointCloud>& gens);

// Mean over references of the distance to the closest generated shape
// (unscaled).
double mmd(const DistanceMatrix& d);
double mmd(const std::vector<PointCloud>& refs, const std::vector<PointCloud>& gens);

// Occupancy frequencies over a resolution^3 grid covering [-0.5, 0.5]^3;
// points outside are clamped to the border cells.
struct VoxelDistribution {
  int resolution = 32;
  std::vector<double> p;  // sums to 1
};
VoxelDistribution voxel_distribution(const std::vector<PointCloud>& clouds, int resolution = 32);

// Natural-log Jensen-Shannon divergence (unscaled, at most ln 2).
double jsd(const VoxelDistribution& a, const VoxelDistribution& b);
double jsd(const std::vector<PointCloud>& refs, const std::vector<PointCloud>& gens, int resolution = 32);

// Percentage of generated programs that failed to construct.
double invalidity_ratio(std::size_t n_invalid, std::size_t n_generated);

struct EvalProtocol {
  std::size_t points_accuracy = 100000;
  std::size_t points_distribution = 2000;
  std::size_t subset_size = 3000;
  std::size_t repeats = 10;
  std::uint64_t seed = 0;
  int voxel_resolution = 32;
  EdgeParams edge;
  unsigned threads = 0;  // 0: hardware concurrency; results do not depend on it

  void check() const;
  nlohmann::ordered_json to_json() const;
  static EvalProtocol from_json(const nlohmann::json& j);
};

// One shape of a set; a generated entry without a mesh failed to construct.
struct ShapeEntry {
  std::string label;
  std::optional<Mesh> mesh;
};

struct PairResult {
  std::string label;
  bool valid = false;
  double cd = 0;               // x10^3
  std::optional<double> ecd;   // x10^3, nullopt when undefined
  double nc = 0;
};

struct MetricsReport {
  EvalProtocol protocol;
  std::size_t n_reference = 0;
  std::size_t n_generated = 0;
  std::size_t n_invalid = 0;
  std::size_t ecd_undefined = 0;
  std::optional<double> cd_median, ecd_median, nc_median;
  double cov_pct = 0;
  double mmd = 0;  // x10^3
  double jsd = 0;  // x10^2
  double ir_pct = 0;
  std::size_t subset_reference = 0, subset_generated = 0;
  std::vector<PairResult> pairs;

  nlohmann::ordered_json to_json() const;
  std::string pairs_csv() const;
  // CD, ECD, NC, MMD, COV, JSD, IR.
  std::string table() const;
};

// Generated entries pair with references by label. Generated labels with no
// reference count as invalid; references with no generated entry are an
// error (std::invalid_argument), as is an empty reference set.
MetricsReport evaluate_sets(const std::vector<ShapeEntry>& refs, const std::vector<ShapeEntry>& gens,
                            const EvalProtocol& protocol = {});

// Seed for an independent stream derived from (seed, stream, index).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

double median(std::vector<double> values);

}  // namespace cadscript::metrics
