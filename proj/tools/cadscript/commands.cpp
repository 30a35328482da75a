#include "commands.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include "cadscript/annotate/annotate.hpp"
#include "cadscript/geom/interpret.hpp"
#include "cadscript/json_io.hpp"
#include "cadscript/metrics/point_cloud.hpp"
#include "manifest.hpp"

namespace cadscript::cli {

// --- config -----------------------------------------------------------------

namespace {

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw std::invalid_argument(where + " must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (known.count(it.key()) == 0) throw std::invalid_argument(where + ": unknown key '" + it.key() + "'");
  }
}

}  // namespace

Config Config::from_json(const nlohmann::json& j) {
  reject_unknown(j, {"normalize", "validation", "eval", "annotate"}, "config");
  Config c;
  try {
    if (j.contains("normalize")) c.normalize = PassConfig::from_json(nlohmann::ordered_json(j["normalize"]));
    if (j.contains("validation")) {
      const auto& v = j["validation"];
      reject_unknown(v, {"tolerance", "decimals", "samples", "seed"}, "config.validation");
      c.validation.tolerance = v.value("tolerance", c.validation.tolerance);
      c.validation.decimals = v.value("decimals", c.validation.decimals);
      c.validation.samples = v.value("samples", c.validation.samples);
      c.validation.seed = v.value("seed", c.validation.seed);
    }
    if (j.contains("eval")) c.eval = metrics::EvalProtocol::from_json(j["eval"]);
    if (j.contains("annotate")) {
      const auto& a = j["annotate"];
      reject_unknown(a, {"retries", "parallelism"}, "config.annotate");
      c.annotate_retries = a.value("retries", c.annotate_retries);
      c.annotate_parallelism = a.value("parallelism", c.annotate_parallelism);
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  return c;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config " + path.string());
  auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw std::invalid_argument("config " + path.string() + " is not valid JSON");
  return from_json(j);
}

Config Config::resolve(const std::optional<std::filesystem::path>& path) {
  if (path) return load(*path);
  const char* env = std::getenv("CADSCRIPT_CONFIG");
  if (env != nullptr && *env != '\0') return load(env);
  return {};
}

// --- helpers ----------------------------------------------------------------

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

Program load_lowered_program(const std::filesystem::path& path) {
  Program p = parse(read_text(path), Dialect::Raw, path.string());
  return fold_numeric_expressions(standardize_units(explicit_sketch_params(p)));
}

namespace {

class ConstructionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

geom::Mesh merge(const std::vector<geom::Body>& bodies) {
  geom::Mesh m;
  for (const auto& b : bodies) m.append(b.mesh);
  return m;
}

std::vector<std::filesystem::path> program_files(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".fs") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string location(const std::filesystem::path& path, const ParseError& e) {
  return path.string() + ":" + std::to_string(e.line()) + ":" + std::to_string(e.column()) + ": " + e.message();
}

}  // namespace

geom::Mesh load_mesh(const std::filesystem::path& path) {
  auto ext = path.extension();
  if (ext == ".obj") return geom::read_obj(read_text(path));
  if (ext == ".stl") return geom::read_stl(read_text(path));
  if (ext == ".fs") {
    Program p = load_lowered_program(path);
    try {
      return merge(geom::interpret(p));
    } catch (const geom::InterpretError& e) {
      throw ConstructionError(e.what());
    }
  }
  throw std::invalid_argument("unsupported shape file " + path.string() + " (expected .obj, .stl or .fs)");
}

std::map<std::string, std::filesystem::path> shape_files(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw std::invalid_argument(dir.string() + " is not a directory");
  std::map<std::string, std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    auto ext = e.path().extension();
    if (!e.is_regular_file() || (ext != ".obj" && ext != ".stl" && ext != ".fs")) continue;
    auto [it, fresh] = out.emplace(e.path().stem().string(), e.path());
    if (!fresh) throw std::invalid_argument("two shape files share the stem '" + it->first + "' in " + dir.string());
  }
  return out;
}

// --- parse ------------------------------------------------------------------

int cmd_parse(const ParseArgs& args, Io io) {
  std::string text = read_text(args.input);
  try {
    Program p = parse(text, args.dialect, args.input.string());
    if (args.json) {
      io.out << to_json(p).dump(2) << "\n";
    } else {
      io.out << emit(p);
    }
    return kExitOk;
  } catch (const ParseError& e) {
    io.err << location(args.input, e) << "\n";
    return kExitInput;
  }
}

// --- normalize --------------------------------------------------------------

namespace {

struct NormalizeOutcome {
  std::string canonical;
  nlohmann::ordered_json report;
  std::optional<std::string> reject_reason;
};

NormalizeOutcome normalize_one(const std::filesystem::path& path, const NormalizeArgs& args) {
  NormalizeOutcome o;
  o.report["source"] = path.filename().string();
  Program raw;
  try {
    raw = parse(read_text(path), Dialect::Raw, path.string());
  } catch (const ParseError& e) {
    o.reject_reason = "parse error: " + location(path, e);
    o.report["error"] = *o.reject_reason;
    return o;
  }
  NormalizeResult result;
  try {
    result = normalize(raw, args.config.normalize);
  } catch (const PassError& e) {
    o.reject_reason = std::string("normalization failed: ") + e.what();
    o.report["error"] = *o.reject_reason;
    return o;
  }
  o.canonical = emit(result.program);
  o.report["passes"] = result.report.to_json()["passes"];
  if (!args.skip_validation) {
    ValidationResult v = validate_equivalence(raw, result.program, args.config.validation);
    o.report["validation"] = v.to_json();
    if (!v.verified()) o.reject_reason = "validation failed: " + v.reason;
  }
  return o;
}

}  // namespace

int cmd_normalize(const NormalizeArgs& args, Io io) {
  if (!std::filesystem::exists(args.input)) {
    io.err << "no such file or directory: " << args.input.string() << "\n";
    return kExitInput;
  }
  bool batch = std::filesystem::is_directory(args.input);
  if (!batch) {
    NormalizeOutcome o = normalize_one(args.input, args);
    if (o.reject_reason) {
      io.err << args.input.string() << ": " << *o.reject_reason << "\n";
      if (args.report) io.err << o.report.dump(2) << "\n";
      return kExitFailure;
    }
    if (args.output) {
      write_text(*args.output, o.canonical);
      if (args.report) {
        auto rp = *args.output;
        write_text(rp.replace_extension(".report.json"), o.report.dump(2) + "\n");
      }
    } else {
      io.out << o.canonical;
      if (args.report) io.err << o.report.dump(2) << "\n";
    }
    return kExitOk;
  }

  if (!args.output) {
    io.err << "a directory input needs --out DIR\n";
    return kExitInput;
  }
  const auto out_dir = *args.output;
  const auto reject_dir = args.reject_dir.value_or(out_dir / "rejected");
  auto files = program_files(args.input);
  std::vector<NormalizeOutcome> outcomes(files.size());
  for (std::size_t i = 0; i < files.size(); ++i) outcomes[i] = normalize_one(files[i], args);

  std::filesystem::create_directories(out_dir);
  nlohmann::ordered_json summary;
  std::vector<std::string> rejected;
  for (std::size_t i = 0; i < files.size(); ++i) {
    const auto stem = files[i].stem().string();
    const auto& o = outcomes[i];
    if (o.reject_reason) {
      rejected.push_back(stem);
      std::filesystem::create_directories(reject_dir);
      std::filesystem::copy_file(files[i], reject_dir / files[i].filename(),
                                 std::filesystem::copy_options::overwrite_existing);
      write_text(reject_dir / (stem + ".reason.json"), o.report.dump(2) + "\n");
      io.err << files[i].string() << ": " << *o.reject_reason << "\n";
      continue;
    }
    write_text(out_dir / (stem + ".fs"), o.canonical);
    if (args.report) write_text(out_dir / (stem + ".report.json"), o.report.dump(2) + "\n");
  }
  summary["processed"] = files.size();
  summary["normalized"] = files.size() - rejected.size();
  summary["rejected"] = rejected.size();
  summary["discard_rate"] = files.empty() ? 0.0 : static_cast<double>(rejected.size()) / static_cast<double>(files.size());
  summary["rejected_ids"] = rejected;
  io.out << summary.dump(2) << "\n";
  return rejected.empty() ? kExitOk : kExitFailure;
}

// --- validate ---------------------------------------------------------------

int cmd_validate(const ValidateArgs& args, Io io) {
  Program raw;
  Program canonical;
  try {
    raw = parse(read_text(args.raw), Dialect::Raw, args.raw.string());
  } catch (const ParseError& e) {
    io.err << location(args.raw, e) << "\n";
    return kExitInput;
  }
  try {
    canonical = parse(read_text(args.canonical), Dialect::Canonical, args.canonical.string());
  } catch (const ParseError& e) {
    io.err << location(args.canonical, e) << "\n";
    return kExitInput;
  }
  ValidationResult v = validate_equivalence(raw, canonical, args.options);
  io.out << v.to_json().dump(2) << "\n";
  return v.verified() ? kExitOk : kExitFailure;
}

// --- interpret --------------------------------------------------------------

int cmd_interpret(const InterpretArgs& args, Io io) {
  Program p;
  try {
    p = load_lowered_program(args.input);
  } catch (const ParseError& e) {
    io.err << location(args.input, e) << "\n";
    return kExitInput;
  } catch (const PassError& e) {
    io.err << args.input.string() << ": " << e.what() << "\n";
    return kExitInput;
  }
  std::vector<geom::Body> bodies;
  try {
    bodies = geom::interpret(p);
  } catch (const geom::InterpretError& e) {
    nlohmann::ordered_json j;
    j["valid"] = false;
    j["feature"] = e.feature().text();
    j["reason"] = to_string(e.reason());
    j["message"] = e.what();
    io.out << j.dump(2) << "\n";
    return kExitFailure;
  }
  geom::Mesh merged = merge(bodies);
  geom::BBox box = geom::bounding_box(merged);
  nlohmann::ordered_json j;
  j["valid"] = true;
  j["bodies"] = nlohmann::ordered_json::array();
  for (const auto& b : bodies) {
    nlohmann::ordered_json o;
    o["ids"] = nlohmann::ordered_json::array();
    for (const auto& id : b.ids) o["ids"].push_back(id.text());
    o["vertices"] = b.mesh.vertices.size();
    o["triangles"] = b.mesh.triangles.size();
    o["volume"] = geom::mesh_volume(b.mesh);
    o["watertight"] = geom::is_watertight(b.mesh);
    j["bodies"].push_back(std::move(o));
  }
  j["bbox"] = {{"min", {box.min.x, box.min.y, box.min.z}}, {"max", {box.max.x, box.max.y, box.max.z}}};
  j["bbox_prompt"] = geom::bbox_prompt(box);
  io.out << j.dump(2) << "\n";
  if (args.stl) write_text(*args.stl, geom::write_stl(merged, args.input.stem().string()));
  if (args.obj) write_text(*args.obj, geom::write_obj(merged));
  return kExitOk;
}

// --- sample -----------------------------------------------------------------

int cmd_sample(const SampleArgs& args, Io io) {
  geom::Mesh mesh;
  try {
    mesh = load_mesh(args.input);
  } catch (const ConstructionError& e) {
    io.err << args.input.string() << ": " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    io.err << args.input.string() << ": " << e.what() << "\n";
    return kExitInput;
  }
  if (args.unit) mesh = metrics::unit_normalize(mesh, geom::bounding_box(mesh));
  metrics::PointCloud cloud = metrics::sample_surface(mesh, args.n, args.seed);
  write_text(args.output, metrics::write_xyz(cloud));
  io.out << "wrote " << cloud.size() << " points to " << args.output.string() << "\n";
  return kExitOk;
}

// --- eval -------------------------------------------------------------------

int cmd_eval(const EvalArgs& args, Io io) {
  std::map<std::string, std::filesystem::path> refs_files;
  std::map<std::string, std::filesystem::path> gen_files;
  try {
    refs_files = shape_files(args.ref_dir);
    gen_files = shape_files(args.gen_dir);
  } catch (const std::exception& e) {
    io.err << e.what() << "\n";
    return kExitInput;
  }
  std::vector<metrics::ShapeEntry> refs;
  for (const auto& [stem, path] : refs_files) {
    try {
      refs.push_back({stem, load_mesh(path)});
    } catch (const std::exception& e) {
      io.err << "reference " << path.string() << ": " << e.what() << "\n";
      return kExitInput;
    }
  }
  std::vector<metrics::ShapeEntry> gens;
  for (const auto& [stem, path] : gen_files) {
    metrics::ShapeEntry entry{stem, std::nullopt};
    try {
      entry.mesh = load_mesh(path);
      if (!geom::check_mesh(*entry.mesh).empty()) entry.mesh.reset();
    } catch (const std::exception&) {
      entry.mesh.reset();  // counted as invalid
    }
    gens.push_back(std::move(entry));
  }
  metrics::MetricsReport report;
  try {
    report = metrics::evaluate_sets(refs, gens, args.protocol);
  } catch (const std::invalid_argument& e) {
    io.err << e.what() << "\n";
    return kExitInput;
  }
  io.out << report.table();
  if (args.out_json) write_text(*args.out_json, report.to_json().dump(2) + "\n");
  if (args.out_csv) write_text(*args.out_csv, report.pairs_csv());
  return kExitOk;
}

// --- stats ------------------------------------------------------------------

int cmd_stats(const StatsArgs& args, Io io) {
  std::vector<std::pair<std::string, std::filesystem::path>> sources;
  try {
    if (std::filesystem::is_directory(args.input)) {
      for (const auto& p : program_files(args.input)) sources.emplace_back(p.stem().string(), p);
    } else {
      Manifest m = Manifest::load(args.input);
      for (const auto& e : m.entries) {
        if (e.has_flag("missing") || e.has_flag("broken")) continue;
        if (args.split && (*args.split == "test") != (e.split == Split::Test)) continue;
        sources.emplace_back(e.id, e.canonical_path.value_or(e.raw_path));
      }
    }
  } catch (const std::exception& e) {
    io.err << e.what() << "\n";
    return kExitInput;
  }
  std::vector<std::pair<std::string, Program>> programs;
  StatsReport report;
  for (const auto& [id, path] : sources) {
    try {
      Program p = parse(read_text(path), Dialect::Raw, path.string());
      report.add(p);
      programs.emplace_back(id, std::move(p));
    } catch (const ParseError& e) {
      io.err << location(path, e) << "\n";
      return kExitInput;
    }
  }
  nlohmann::ordered_json j = report.to_json();
  if (args.match_target) {
    try {
      auto target = read_target_fractions(nlohmann::json::parse(read_text(*args.match_target)));
      std::size_t count = args.match_count == 0 ? programs.size() : args.match_count;
      MatchResult m = match_distribution(programs, target, count);
      j["match"] = {{"method", "greedy L1 (approximation)"}, {"count", count}, {"l1", m.l1}, {"ids", m.ids}};
    } catch (const std::exception& e) {
      io.err << e.what() << "\n";
      return kExitInput;
    }
  }
  io.out << j.dump(2) << "\n";
  return kExitOk;
}

// --- annotate ---------------------------------------------------------------

int cmd_annotate(const AnnotateArgs& args, Io io) {
  using namespace cadscript::annotate;
  std::vector<BatchItem> items;
  annotate::DocumentationSet docs;
  PipelineConfig config;
  try {
    std::vector<std::pair<std::string, std::filesystem::path>> sources;
    if (std::filesystem::is_directory(args.input)) {
      for (const auto& p : program_files(args.input)) sources.emplace_back(p.stem().string(), p);
    } else if (args.input.extension() == ".json") {
      Manifest m = Manifest::load(args.input);
      for (const auto& e : m.entries) {
        if (e.canonical_path && !e.has_flag("missing") && !e.has_flag("broken")) sources.emplace_back(e.id, *e.canonical_path);
      }
    } else {
      sources.emplace_back(args.input.stem().string(), args.input);
    }
    for (const auto& [id, path] : sources) {
      items.push_back({id, parse(read_text(path), Dialect::Canonical, path.string())});
    }
    docs = DocumentationSet::load(args.docs);
    config.retries = args.config.annotate_retries;
    config.annotator_system_text = read_text(args.annotator_prompt);
    config.reviewer_system_text = read_text(args.reviewer_prompt);
    if (args.fewshot) {
      std::ifstream in(*args.fewshot);
      config.fewshot = read_fewshot_jsonl(in);
    }
  } catch (const ParseError& e) {
    io.err << "input is not canonical: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    io.err << e.what() << "\n";
    return kExitInput;
  }

  std::unique_ptr<CompletionClient> client;
  try {
    if (args.client == "mock") {
      client = std::make_unique<MockClient>();
    } else if (args.client == "http") {
      client = HttpClient::from_environment();
    } else if (args.client == "replay") {
      if (!args.replay) throw std::invalid_argument("--client replay needs --replay FILE");
      std::ifstream in(*args.replay);
      if (!in) throw std::invalid_argument("cannot read " + args.replay->string());
      client = std::make_unique<ReplayClient>(ReplayClient::read_jsonl(in));
    } else {
      throw std::invalid_argument("unknown client '" + args.client + "'");
    }
  } catch (const std::exception& e) {
    io.err << e.what() << "\n";
    return kExitInput;
  }

  std::optional<RecordingClient> recorder;
  CompletionClient* active = client.get();
  if (args.record) active = &recorder.emplace(*client);

  auto records = run_batch(items, *active, docs, config, std::max(1u, args.config.annotate_parallelism));
  std::ostringstream os;
  write_jsonl(os, records);
  write_text(args.output, os.str());
  if (recorder) {
    std::ostringstream rec;
    recorder->write_jsonl(rec);
    write_text(*args.record, rec.str());
  }
  std::size_t failed = 0;
  for (const auto& r : records) {
    if (!r.error.empty()) {
      ++failed;
      io.err << r.id << ": " << r.error << "\n";
    }
  }
  io.out << "annotated " << records.size() - failed << " of " << records.size() << " programs\n";
  return failed == 0 ? kExitOk : kExitFailure;
}

}  // namespace cadscript::cli
