#include "manifest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

namespace cadscript::cli {

bool ManifestEntry::has_flag(std::string_view flag) const {
  return std::find(flags.begin(), flags.end(), flag) != flags.end();
}

namespace {

std::string require_string(const nlohmann::json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j[key].is_string()) throw std::invalid_argument(where + ": '" + key + "' must be a string");
  return j[key].get<std::string>();
}

std::optional<std::string> optional_string(const nlohmann::json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  if (!j[key].is_string()) throw std::invalid_argument(where + ": '" + key + "' must be a string or null");
  return j[key].get<std::string>();
}

std::filesystem::path relative_to(const std::filesystem::path& p, const std::filesystem::path& base) {
  return p.lexically_proximate(base).generic_string();
}

}  // namespace

Manifest Manifest::from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object() || !j.contains("entries") || !j["entries"].is_array()) {
    throw std::invalid_argument("manifest: expected an object with an 'entries' array");
  }
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() != "entries" && it.key() != "version") {
      throw std::invalid_argument("manifest: unknown key '" + it.key() + "'");
    }
  }
  if (j.contains("version") && j["version"] != 1) throw std::invalid_argument("manifest: unsupported version");

  static const std::set<std::string> known = {"id", "raw", "canonical", "mesh", "split", "flags"};
  Manifest m;
  m.base_dir = base_dir;
  std::set<std::string> ids;
  std::size_t index = 0;
  for (const auto& e : j["entries"]) {
    std::string where = "manifest entry " + std::to_string(index++);
    if (!e.is_object()) throw std::invalid_argument(where + ": expected an object");
    for (auto it = e.begin(); it != e.end(); ++it) {
      if (known.count(it.key()) == 0) throw std::invalid_argument(where + ": unknown key '" + it.key() + "'");
    }
    ManifestEntry entry;
    entry.id = require_string(e, "id", where);
    if (!ids.insert(entry.id).second) throw std::invalid_argument("manifest: duplicate id '" + entry.id + "'");
    entry.raw_path = base_dir / require_string(e, "raw", where);
    if (auto c = optional_string(e, "canonical", where)) entry.canonical_path = base_dir / *c;
    if (auto mesh = optional_string(e, "mesh", where)) entry.mesh_path = base_dir / *mesh;
    std::string split = e.contains("split") ? require_string(e, "split", where) : "train";
    if (split == "train") {
      entry.split = Split::Train;
    } else if (split == "test") {
      entry.split = Split::Test;
    } else {
      throw std::invalid_argument(where + ": split must be 'train' or 'test'");
    }
    if (e.contains("flags")) {
      if (!e["flags"].is_array()) throw std::invalid_argument(where + ": 'flags' must be an array");
      for (const auto& f : e["flags"]) {
        if (!f.is_string()) throw std::invalid_argument(where + ": flags must be strings");
        entry.flags.push_back(f.get<std::string>());
      }
    }
    bool missing = !std::filesystem::exists(entry.raw_path) ||
                   (entry.canonical_path && !std::filesystem::exists(*entry.canonical_path)) ||
                   (entry.mesh_path && !std::filesystem::exists(*entry.mesh_path));
    if (missing && !entry.has_flag("missing")) entry.flags.push_back("missing");
    m.entries.push_back(std::move(entry));
  }
  return m;
}

Manifest Manifest::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read manifest " + path.string());
  auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw std::invalid_argument("manifest " + path.string() + " is not valid JSON");
  return from_json(j, path.parent_path());
}

nlohmann::ordered_json Manifest::to_json() const {
  nlohmann::ordered_json j;
  j["version"] = 1;
  j["entries"] = nlohmann::ordered_json::array();
  for (const auto& e : entries) {
    nlohmann::ordered_json o;
    o["id"] = e.id;
    o["raw"] = relative_to(e.raw_path, base_dir);
    o["canonical"] = e.canonical_path ? nlohmann::ordered_json(relative_to(*e.canonical_path, base_dir).string())
                                      : nullptr;
    o["mesh"] = e.mesh_path ? nlohmann::ordered_json(relative_to(*e.mesh_path, base_dir).string()) : nullptr;
    o["split"] = e.split == Split::Train ? "train" : "test";
    o["flags"] = e.flags;
    j["entries"].push_back(std::move(o));
  }
  return j;
}

const ManifestEntry* Manifest::find(const std::string& id) const {
  for (const auto& e : entries) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

// --- statistics -------------------------------------------------------------

void StatsReport::add(const Program& program) {
  if (op_counts.empty()) {
    for (OpKind k : all_op_kinds()) op_counts[k] = 0;
    for (std::size_t i = 0; i < kEntityKindCount; ++i) primitive_counts[static_cast<EntityKind>(i)] = 0;
  }
  ++programs;
  for (const auto& f : program.features) {
    ++features;
    ++op_counts[f.kind];
    for (const auto& e : f.entities()) ++primitive_counts[e.kind];
  }
}

double StatsReport::fraction(OpKind kind) const {
  auto it = op_counts.find(kind);
  if (features == 0 || it == op_counts.end()) return 0;
  return static_cast<double>(it->second) / static_cast<double>(features);
}

nlohmann::ordered_json StatsReport::to_json() const {
  nlohmann::ordered_json j;
  j["programs"] = programs;
  j["features"] = features;
  j["operations"] = nlohmann::ordered_json::object();
  for (OpKind k : all_op_kinds()) {
    auto it = op_counts.find(k);
    std::size_t n = it == op_counts.end() ? 0 : it->second;
    j["operations"][std::string(to_string(k))] = {{"count", n}, {"fraction", fraction(k)}};
  }
  j["primitives"] = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < kEntityKindCount; ++i) {
    auto kind = static_cast<EntityKind>(i);
    auto it = primitive_counts.find(kind);
    j["primitives"][std::string(entity_keyword(kind))] = it == primitive_counts.end() ? 0 : it->second;
  }
  return j;
}

namespace {

std::optional<OpKind> kind_from_name(const std::string& name) {
  for (OpKind k : all_op_kinds()) {
    if (to_string(k) == name) return k;
  }
  return op_kind_from_keyword(name);
}

}  // namespace

std::map<OpKind, double> read_target_fractions(const nlohmann::json& j) {
  std::map<OpKind, double> out;
  for (OpKind k : all_op_kinds()) out[k] = 0;
  auto set = [&](const std::string& name, const nlohmann::json& v) {
    auto kind = kind_from_name(name);
    if (!kind) throw std::invalid_argument("target: unknown operation '" + name + "'");
    if (!v.is_number() || v.get<double>() < 0) throw std::invalid_argument("target: bad fraction for " + name);
    out[*kind] = v.get<double>();
  };
  if (j.contains("fractions") && j["fractions"].is_object()) {
    for (auto it = j["fractions"].begin(); it != j["fractions"].end(); ++it) set(it.key(), it.value());
  } else if (j.contains("operations") && j["operations"].is_object()) {
    for (auto it = j["operations"].begin(); it != j["operations"].end(); ++it) {
      if (!it.value().contains("fraction")) throw std::invalid_argument("target: missing fraction for " + it.key());
      set(it.key(), it.value()["fraction"]);
    }
  } else {
    throw std::invalid_argument("target: expected 'fractions' or 'operations'");
  }
  double total = 0;
  for (const auto& [k, v] : out) total += v;
  if (std::abs(total - 1) > 1e-6) throw std::invalid_argument("target: fractions must sum to 1");
  return out;
}

MatchResult match_distribution(const std::vector<std::pair<std::string, Program>>& candidates,
                               const std::map<OpKind, double>& target, std::size_t count) {
  if (count > candidates.size()) throw std::invalid_argument("requested more programs than candidates");
  const auto& kinds = all_op_kinds();
  std::vector<std::vector<std::size_t>> counts(candidates.size(), std::vector<std::size_t>(kinds.size(), 0));
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    for (const auto& f : candidates[i].second.features) ++counts[i][static_cast<std::size_t>(f.kind)];
  }
  auto target_of = [&](std::size_t k) {
    auto it = target.find(kinds[k]);
    return it == target.end() ? 0.0 : it->second;
  };
  auto l1 = [&](const std::vector<std::size_t>& c) {
    std::size_t total = 0;
    for (auto n : c) total += n;
    double d = 0;
    for (std::size_t k = 0; k < kinds.size(); ++k) {
      double f = total == 0 ? 0 : static_cast<double>(c[k]) / static_cast<double>(total);
      d += std::abs(f - target_of(k));
    }
    return d;
  };

  MatchResult result;
  std::vector<bool> used(candidates.size(), false);
  std::vector<std::size_t> acc(kinds.size(), 0);
  for (std::size_t step = 0; step < count; ++step) {
    std::size_t best = candidates.size();
    double best_d = 0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (used[i]) continue;
      std::vector<std::size_t> trial = acc;
      for (std::size_t k = 0; k < kinds.size(); ++k) trial[k] += counts[i][k];
      double d = l1(trial);
      if (best == candidates.size() || d < best_d) {
        best = i;
        best_d = d;
      }
    }
    used[best] = true;
    for (std::size_t k = 0; k < kinds.size(); ++k) acc[k] += counts[best][k];
    result.ids.push_back(candidates[best].first);
  }
  result.l1 = l1(acc);
  return result;
}

}  // namespace cadscript::cli
