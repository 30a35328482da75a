#include "cadscript/validate.hpp"

#include <algorithm>
#include <cmath>

#include "cadscript/geom/interpret.hpp"
#include "cadscript/metrics/point_cloud.hpp"
#include "cadscript/normalize.hpp"
#include "cadscript/parser.hpp"

namespace cadscript {

std::string_view to_string(ValidationResult::Status status) {
  switch (status) {
    case ValidationResult::Status::VerifiedGeometric:
      return "verified-geometric";
    case ValidationResult::Status::VerifiedStructural:
      return "verified-structural";
    case ValidationResult::Status::Failed:
      return "failed";
  }
  return "failed";
}

nlohmann::ordered_json ValidationResult::to_json() const {
  nlohmann::ordered_json j;
  j["status"] = to_string(status);
  j["chamfer_to_original"] = chamfer_to_original ? nlohmann::ordered_json(*chamfer_to_original) : nullptr;
  j["reason"] = reason;
  return j;
}

std::vector<std::string> structural_signature(const Program& program) {
  const Identifier erased("_");
  std::vector<std::string> out;
  for (Feature f : program.features) {
    f.id = erased;
    transform_queries(f, [&](Query& q) {
      q.op_id = erased;
      q.disambiguation.clear();
    });
    if (SketchBody* body = f.mutable_entities()) {
      for (auto& e : *body) e.id = erased;
    }
    Program single;
    single.features.push_back(std::move(f));
    out.push_back(emit(single));
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

ValidationResult failed(std::string reason) {
  return {ValidationResult::Status::Failed, std::nullopt, std::move(reason)};
}

geom::Mesh merged(const std::vector<geom::Body>& bodies) {
  geom::Mesh m;
  for (const auto& b : bodies) m.append(b.mesh);
  return m;
}

double mean_squared_distance(const metrics::PointCloud& from, const geom::Mesh& to) {
  double sum = 0;
  for (const auto& p : from.points) sum += geom::squared_distance_to_mesh(p, to);
  return sum / static_cast<double>(from.size());
}

ValidationResult structural(const Program& lowered, const Program& normalized, const ValidationOptions& options) {
  Program reference;
  try {
    reference = round_precision(eliminate_dead_code(simplify_operations(lowered)), options.decimals);
  } catch (const PassError& e) {
    return failed(std::string("raw program cannot be normalized: ") + e.what());
  }
  if (structural_signature(reference) != structural_signature(normalized)) {
    return failed("feature multisets differ");
  }
  return {ValidationResult::Status::VerifiedStructural, std::nullopt, "outside the geometry subset"};
}

}  // namespace

ValidationResult validate_equivalence(const Program& raw, const Program& normalized,
                                      const ValidationOptions& options) {
  Program lowered;
  try {
    lowered = fold_numeric_expressions(standardize_units(explicit_sketch_params(raw)));
  } catch (const PassError& e) {
    return failed(std::string("raw does not construct: ") + e.what());
  }
  Program reference = round_precision(lowered, options.decimals);

  std::vector<geom::Body> raw_bodies;
  try {
    raw_bodies = geom::interpret(reference);
  } catch (const geom::InterpretError& e) {
    if (e.reason() == geom::InterpretReason::UnsupportedOperation) return structural(lowered, normalized, options);
    return failed(std::string("raw does not construct: ") + e.what());
  }
  std::vector<geom::Body> norm_bodies;
  try {
    norm_bodies = geom::interpret(normalized);
  } catch (const geom::InterpretError& e) {
    return failed(std::string("normalized does not construct: ") + e.what());
  }

  geom::Mesh a = merged(raw_bodies);
  geom::Mesh b = merged(norm_bodies);
  auto pa = metrics::sample_surface(a, options.samples, options.seed);
  auto pb = metrics::sample_surface(b, options.samples, options.seed);
  double cd = mean_squared_distance(pa, b) + mean_squared_distance(pb, a);
  double relative = std::sqrt(cd) / geom::bounding_box(a).diagonal();
  if (!(relative <= options.tolerance)) {
    return {ValidationResult::Status::Failed, relative, "geometry differs"};
  }
  return {ValidationResult::Status::VerifiedGeometric, relative, ""};
}

}  // namespace cadscript
