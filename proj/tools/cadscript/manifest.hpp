#pragma once

// Corpus manifest and operation statistics. Schema: docs/manifest.md.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cadscript/ast.hpp"

namespace cadscript::cli {

enum class Split { Train, Test };

struct ManifestEntry {
  std::string id;
  std::filesystem::path raw_path;  // resolved against the manifest directory
  std::optional<std::filesystem::path> canonical_path;
  std::optional<std::filesystem::path> mesh_path;
  Split split = Split::Train;
  std::vector<std::string> flags;  // "missing" is added when a listed path does not exist

  bool has_flag(std::string_view flag) const;
};

struct Manifest {
  std::filesystem::path base_dir;
  std::vector<ManifestEntry> entries;

  // Throws std::invalid_argument on schema violations or duplicate ids.
  static Manifest from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
  static Manifest load(const std::filesystem::path& path);
  nlohmann::ordered_json to_json() const;

  const ManifestEntry* find(const std::string& id) const;
};

struct StatsReport {
  std::size_t programs = 0;
  std::size_t features = 0;
  std::map<OpKind, std::size_t> op_counts;              // every kind, zeros included
  std::map<EntityKind, std::size_t> primitive_counts;  // every kind, zeros included

  void add(const Program& program);
  double fraction(OpKind kind) const;
  nlohmann::ordered_json to_json() const;
};

// Target fractions keyed by OpKind. Accepts a StatsReport JSON
// ({"operations": {"Extrude": {"fraction": f}, ...}}) or a plain
// {"fractions": {"Extrude": f, ...}}; names may be kinds or keywords.
std::map<OpKind, double> read_target_fractions(const nlohmann::json& j);

struct MatchResult {
  std::vector<std::string> ids;
  double l1 = 0;  // sum over kinds of |fraction - target|
};

// Greedy selection of `count` candidates: each step adds the candidate that
// minimizes the L1 distance between the selection's operation fractions and
// the target. Ties go to the earlier candidate. An approximation.
MatchResult match_distribution(const std::vector<std::pair<std::string, Program>>& candidates,
                               const std::map<OpKind, double>& target, std::size_t count);

}  // namespace cadscript::cli
