#include "cadscript/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "parallel.hpp"

namespace cadscript::metrics {

std::vector<KdTree::Hit> nearest_neighbors(const std::vector<Vec3>& from, const std::vector<Vec3>& to) {
  KdTree tree(to);
  std::vector<KdTree::Hit> hits;
  hits.reserve(from.size());
  for (const auto& p : from) hits.push_back(tree.nearest(p));
  return hits;
}

namespace {

double mean_squared(const std::vector<KdTree::Hit>& hits) {
  double sum = 0;
  for (const auto& h : hits) sum += h.squared_distance;
  return sum / static_cast<double>(hits.size());
}

}  // namespace

double chamfer(const std::vector<Vec3>& x, const std::vector<Vec3>& y) {
  if (x.empty() || y.empty()) throw std::invalid_argument("chamfer of an empty point set");
  return mean_squared(nearest_neighbors(x, y)) + mean_squared(nearest_neighbors(y, x));
}

double chamfer(const PointCloud& x, const PointCloud& y) { return chamfer(x.points, y.points); }

void EdgeParams::check() const {
  if (!(radius > 0)) throw std::invalid_argument("edge radius must be positive");
  if (!(normal_dot_threshold > 0 && normal_dot_threshold < 1)) {
    throw std::invalid_argument("normal dot threshold must lie in (0, 1)");
  }
}

std::vector<std::size_t> classify_edge_points(const PointCloud& cloud, const EdgeParams& params) {
  params.check();
  KdTree tree(cloud.points);
  std::vector<std::size_t> edges;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (auto j : tree.within(cloud.points[i], params.radius)) {
      if (j != i && std::abs(geom::dot(cloud.normals[i], cloud.normals[j])) < params.normal_dot_threshold) {
        edges.push_back(i);
        break;
      }
    }
  }
  return edges;
}

PointCloud subset(const PointCloud& cloud, const std::vector<std::size_t>& indices) {
  PointCloud out;
  out.points.reserve(indices.size());
  out.normals.reserve(indices.size());
  for (auto i : indices) {
    out.points.push_back(cloud.points.at(i));
    out.normals.push_back(cloud.normals.at(i));
  }
  return out;
}

std::optional<double> edge_chamfer(const PointCloud& x, const PointCloud& y, const EdgeParams& params) {
  auto ex = classify_edge_points(x, params);
  auto ey = classify_edge_points(y, params);
  if (ex.empty() || ey.empty()) return std::nullopt;
  return chamfer(subset(x, ex), subset(y, ey));
}

double normal_consistency(const PointCloud& x, const PointCloud& y) {
  if (x.empty() || y.empty()) throw std::invalid_argument("normal consistency of an empty point set");
  auto mean_dot = [](const PointCloud& from, const PointCloud& to) {
    double sum = 0;
    auto hits = nearest_neighbors(from.points, to.points);
    for (std::size_t i = 0; i < hits.size(); ++i) sum += geom::dot(from.normals[i], to.normals[hits[i].index]);
    return sum / static_cast<double>(hits.size());
  };
  return 0.5 * (mean_dot(x, y) + mean_dot(y, x));
}

DistanceMatrix chamfer_matrix(const std::vector<PointCloud>& refs, const std::vector<PointCloud>& gens) {
  DistanceMatrix d(refs.size(), std::vector<double>(gens.size()));
  for (std::size_t s = 0; s < refs.size(); ++s) {
    for (std::size_t g = 0; g < gens.size(); ++g) d[s][g] = chamfer(gens[g], refs[s]);
  }
  return d;
}

double coverage(const DistanceMatrix& d) {
  if (d.empty() || d.front().empty()) throw std::invalid_argument("coverage of an empty set");
  std::set<std::size_t> matched;
  for (std::size_t g = 0; g < d.front().size(); ++g) {
    std::size_t best = 0;
    for (std::size_t s = 1; s < d.size(); ++s) {
      if (d[s][g] < d[best][g]) best = s;
    }
    matched.insert(best);
  }
  return 100.0 * static_cast<double>(matched.size()) / static_cast<double>(d.size());
}

double coverage(const std::vector<PointCloud>& refs, const std::vector<PointCloud>& gens) {
  return coverage(chamfer_matrix(refs, gens));
}

double mmd(const DistanceMatrix& d) {
  if (d.empty() || d.front().empty()) throw std::invalid_argument("mmd of an empty set");
  double sum = 0;
  for (const auto& row : d) sum += *std::min_element(row.begin(), row.end());
  return sum / static_cast<double>(d.size());
}

double mmd(const std::vector<PointCloud>& refs, const std::vector<PointCloud>& gens) {
  return mmd(chamfer_matrix(refs, gens));
}

VoxelDistribution voxel_distribution(const std::vector<PointCloud>& clouds, int resolution) {
  if (resolution < 1) throw std::invalid_argument("voxel resolution must be at least 1");
  auto r = static_cast<std::size_t>(resolution);
  std::vector<std::size_t> counts(r * r * r, 0);
  std::size_t total = 0;
  auto cell = [&](double v) {
    double c = std::floor((v + 0.5) * resolution);
    return static_cast<std::size_t>(std::clamp(c, 0.0, static_cast<double>(resolution - 1)));
  };
  for (const auto& cloud : clouds) {
    for (const auto& p : cloud.points) {
      ++counts[(cell(p.x) * r + cell(p.y)) * r + cell(p.z)];
      ++total;
    }
  }
  if (total == 0) throw std::invalid_argument("voxel distribution of no points");
  VoxelDistribution dist{resolution, std::vector<double>(counts.size())};
  for (std::size_t i = 0; i < counts.size(); ++i) {
    dist.p[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
  }
  return dist;
}

double jsd(const VoxelDistribution& a, const VoxelDistribution& b) {
  if (a.p.size() != b.p.size()) throw std::invalid_argument("voxel grids differ");
  // Summed per cell so that swapping the arguments gives the same bits.
  double sum = 0;
  for (std::size_t i = 0; i < a.p.size(); ++i) {
    double p = a.p[i], q = b.p[i];
    if (p == 0 && q == 0) continue;
    double m = (p + q) * 0.5;
    double tp = p > 0 ? p * std::log(p / m) : 0;  // 0 log 0 = 0
    double tq = q > 0 ? q * std::log(q / m) : 0;
    sum += 0.5 * (tp + tq);
  }
  return std::max(sum, 0.0);
}

double jsd(const std::vector<PointCloud>& refs, const std::vector<PointCloud>& gens, int resolution) {
  return jsd(voxel_distribution(refs, resolution), voxel_distribution(gens, resolution));
}

double invalidity_ratio(std::size_t n_invalid, std::size_t n_generated) {
  if (n_generated == 0) throw std::invalid_argument("invalidity ratio of zero generated programs");
  if (n_invalid > n_generated) throw std::invalid_argument("more invalid than generated programs");
  return static_cast<double>(n_invalid) / static_cast<double>(n_generated) * 100.0;
}

// ---------------------------------------------------------------------------

void EvalProtocol::check() const {
  if (points_accuracy == 0 || points_distribution == 0 || subset_size == 0 || repeats == 0) {
    throw std::invalid_argument("protocol sizes must be positive");
  }
  if (voxel_resolution < 1) throw std::invalid_argument("voxel resolution must be at least 1");
  edge.check();
}

nlohmann::ordered_json EvalProtocol::to_json() const {
  nlohmann::ordered_json j;
  j["points_accuracy"] = points_accuracy;
  j["points_distribution"] = points_distribution;
  j["subset_size"] = subset_size;
  j["repeats"] = repeats;
  j["seed"] = seed;
  j["voxel_resolution"] = voxel_resolution;
  j["edge_radius"] = edge.radius;
  j["edge_normal_dot_threshold"] = edge.normal_dot_threshold;
  j["normalization"] = "reference bounding box center to origin, max extent to 1";
  j["jsd_log"] = "natural";
  return j;
}

EvalProtocol EvalProtocol::from_json(const nlohmann::json& j) {
  static const std::set<std::string> known = {
      "points_accuracy", "points_distribution", "subset_size",     "repeats",  "seed",
      "voxel_resolution", "edge_radius",        "edge_normal_dot_threshold", "normalization", "jsd_log",
      "threads"};
  if (!j.is_object()) throw std::invalid_argument("protocol must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (known.count(key) == 0) throw std::invalid_argument("unknown protocol field '" + key + "'");
  }
  EvalProtocol p;
  try {
    p.points_accuracy = j.value("points_accuracy", p.points_accuracy);
    p.points_distribution = j.value("points_distribution", p.points_distribution);
    p.subset_size = j.value("subset_size", p.subset_size);
    p.repeats = j.value("repeats", p.repeats);
    p.seed = j.value("seed", p.seed);
    p.voxel_resolution = j.value("voxel_resolution", p.voxel_resolution);
    p.edge.radius = j.value("edge_radius", p.edge.radius);
    p.edge.normal_dot_threshold = j.value("edge_normal_dot_threshold", p.edge.normal_dot_threshold);
    p.threads = j.value("threads", p.threads);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("bad protocol field: ") + e.what());
  }
  p.check();
  return p;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  // splitmix64 over the three words.
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(seed) ^ stream) ^ index);
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of no values");
  std::sort(values.begin(), values.end());
  std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

namespace {

// Both shapes of a pair draw from the same stream (keyed by the reference
// index), so identical meshes give identical clouds.
enum Stream : std::uint64_t { kPair = 1, kDistribution, kRepeat };

// First k indices of a seeded Fisher-Yates shuffle of [0, n), ascending.
std::vector<std::size_t> choose(std::size_t n, std::size_t k, std::mt19937_64& rng) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = 0; i < k; ++i) {
    auto span = static_cast<double>(n - i);
    auto j = i + std::min(n - i - 1, static_cast<std::size_t>(static_cast<double>(rng() >> 11) * 0x1.0p-53 * span));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

nlohmann::ordered_json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

std::string fixed(const std::optional<double>& v, int decimals) {
  if (!v) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, *v);
  return buf;
}

}  // namespace

MetricsReport evaluate_sets(const std::vector<ShapeEntry>& refs, const std::vector<ShapeEntry>& gens,
                            const EvalProtocol& protocol) {
  protocol.check();
  if (refs.empty()) throw std::invalid_argument("empty reference set");
  if (gens.empty()) throw std::invalid_argument("empty generated set");
  std::map<std::string, std::size_t> ref_index;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    if (!refs[i].mesh) throw std::invalid_argument("reference '" + refs[i].label + "' has no mesh");
    if (!ref_index.emplace(refs[i].label, i).second) {
      throw std::invalid_argument("duplicate reference label '" + refs[i].label + "'");
    }
  }
  std::set<std::string> gen_labels;
  for (const auto& g : gens) {
    if (!gen_labels.insert(g.label).second) throw std::invalid_argument("duplicate generated label '" + g.label + "'");
  }
  for (const auto& r : refs) {
    if (gen_labels.count(r.label) == 0) throw std::invalid_argument("reference '" + r.label + "' has no generated entry");
  }

  MetricsReport report;
  report.protocol = protocol;
  report.n_reference = refs.size();
  report.n_generated = gens.size();
  report.pairs.resize(gens.size());

  // Per-pair accuracy metrics, size-relative via the reference's transform.
  detail::parallel_for(gens.size(), protocol.threads, [&](std::size_t i) {
    PairResult& out = report.pairs[i];
    out.label = gens[i].label;
    auto it = ref_index.find(gens[i].label);
    if (!gens[i].mesh || it == ref_index.end()) return;
    const Mesh& ref_mesh = *refs[it->second].mesh;
    BBox box = geom::bounding_box(ref_mesh);
    PointCloud y = sample_surface(unit_normalize(ref_mesh, box), protocol.points_accuracy,
                                  derive_seed(protocol.seed, kPair, it->second));
    PointCloud x = sample_surface(unit_normalize(*gens[i].mesh, box), protocol.points_accuracy,
                                  derive_seed(protocol.seed, kPair, it->second));
    out.valid = true;
    out.cd = chamfer(x, y) * kDistanceScale;
    if (auto e = edge_chamfer(x, y, protocol.edge)) out.ecd = *e * kDistanceScale;
    out.nc = normal_consistency(x, y);
  });

  std::vector<double> cds, ecds, ncs;
  for (const auto& p : report.pairs) {
    if (!p.valid) {
      ++report.n_invalid;
      continue;
    }
    cds.push_back(p.cd);
    ncs.push_back(p.nc);
    if (p.ecd) {
      ecds.push_back(*p.ecd);
    } else {
      ++report.ecd_undefined;
    }
  }
  report.ir_pct = invalidity_ratio(report.n_invalid, report.n_generated);
  if (!cds.empty()) {
    report.cd_median = median(cds);
    report.nc_median = median(ncs);
  }
  if (!ecds.empty()) report.ecd_median = median(ecds);

  // Distribution metrics on each shape normalized by its own box.
  std::vector<std::size_t> valid_gens;
  for (std::size_t i = 0; i < gens.size(); ++i) {
    if (report.pairs[i].valid) valid_gens.push_back(i);
  }
  if (valid_gens.empty()) return report;

  std::vector<PointCloud> ref_clouds(refs.size()), gen_clouds(valid_gens.size());
  detail::parallel_for(refs.size() + valid_gens.size(), protocol.threads, [&](std::size_t k) {
    bool is_ref = k < refs.size();
    std::size_t i = is_ref ? k : valid_gens[k - refs.size()];
    const Mesh& m = is_ref ? *refs[i].mesh : *gens[i].mesh;
    std::size_t stream = is_ref ? i : ref_index.at(gens[i].label);
    PointCloud c = sample_surface(unit_normalize(m, geom::bounding_box(m)), protocol.points_distribution,
                                  derive_seed(protocol.seed, kDistribution, stream));
    (is_ref ? ref_clouds[k] : gen_clouds[k - refs.size()]) = std::move(c);
  });

  DistanceMatrix full(refs.size(), std::vector<double>(valid_gens.size()));
  detail::parallel_for(refs.size(), protocol.threads, [&](std::size_t s) {
    for (std::size_t g = 0; g < valid_gens.size(); ++g) full[s][g] = chamfer(gen_clouds[g], ref_clouds[s]);
  });

  std::size_t k_ref = std::min(protocol.subset_size, refs.size());
  std::size_t k_gen = std::min(protocol.subset_size, valid_gens.size());
  report.subset_reference = k_ref;
  report.subset_generated = k_gen;
  double cov_sum = 0, mmd_sum = 0, jsd_sum = 0;
  for (std::size_t r = 0; r < protocol.repeats; ++r) {
    std::mt19937_64 rng(derive_seed(protocol.seed, kRepeat, r));
    auto rs = choose(refs.size(), k_ref, rng);
    auto gs = choose(valid_gens.size(), k_gen, rng);
    DistanceMatrix d(rs.size(), std::vector<double>(gs.size()));
    std::vector<PointCloud> rc, gc;
    for (std::size_t a = 0; a < rs.size(); ++a) {
      for (std::size_t b = 0; b < gs.size(); ++b) d[a][b] = full[rs[a]][gs[b]];
      rc.push_back(ref_clouds[rs[a]]);
    }
    for (auto b : gs) gc.push_back(gen_clouds[b]);
    cov_sum += coverage(d);
    mmd_sum += mmd(d);
    jsd_sum += jsd(rc, gc, protocol.voxel_resolution);
  }
  auto reps = static_cast<double>(protocol.repeats);
  report.cov_pct = cov_sum / reps;
  report.mmd = mmd_sum / reps * kDistanceScale;
  report.jsd = jsd_sum / reps * kDivergenceScale;
  return report;
}

nlohmann::ordered_json MetricsReport::to_json() const {
  nlohmann::ordered_json j;
  j["protocol"] = protocol.to_json();
  j["n_reference"] = n_reference;
  j["n_generated"] = n_generated;
  j["n_invalid"] = n_invalid;
  j["cd_median"] = optional_number(cd_median);
  j["ecd_median"] = optional_number(ecd_median);
  j["ecd_undefined"] = ecd_undefined;
  j["nc_median"] = optional_number(nc_median);
  j["mmd"] = mmd;
  j["cov_pct"] = cov_pct;
  j["jsd"] = jsd;
  j["ir_pct"] = ir_pct;
  j["subset_reference"] = subset_reference;
  j["subset_generated"] = subset_generated;
  j["scales"] = {{"cd", kDistanceScale}, {"ecd", kDistanceScale}, {"mmd", kDistanceScale}, {"jsd", kDivergenceScale}};
  auto rows = nlohmann::ordered_json::array();
  for (const auto& p : pairs) {
    nlohmann::ordered_json row;
    row["label"] = p.label;
    row["valid"] = p.valid;
    row["cd"] = p.valid ? nlohmann::ordered_json(p.cd) : nlohmann::ordered_json(nullptr);
    row["ecd"] = optional_number(p.ecd);
    row["nc"] = p.valid ? nlohmann::ordered_json(p.nc) : nlohmann::ordered_json(nullptr);
    rows.push_back(row);
  }
  j["pairs"] = rows;
  return j;
}

std::string MetricsReport::pairs_csv() const {
  std::ostringstream os;
  os << "label,valid,cd,ecd,nc\n";
  for (const auto& p : pairs) {
    os << p.label << ',' << (p.valid ? "true" : "false") << ',';
    if (p.valid) os << geom::format_double(p.cd);
    os << ',';
    if (p.ecd) os << geom::format_double(*p.ecd);
    os << ',';
    if (p.valid) os << geom::format_double(p.nc);
    os << '\n';
  }
  return os.str();
}

std::string MetricsReport::table() const {
  std::ostringstream os;
  os << "CD\tECD\tNC\tMMD\tCOV\tJSD\tIR\n";
  os << fixed(cd_median, 3) << '\t' << fixed(ecd_median, 3) << '\t' << fixed(nc_median, 3) << '\t'
     << fixed(mmd, 3) << '\t' << fixed(cov_pct, 2) << '\t' << fixed(jsd, 3) << '\t' << fixed(ir_pct, 2) << '\n';
  return os.str();
}

}  // namespace cadscript::metrics
