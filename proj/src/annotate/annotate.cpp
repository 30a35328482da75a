#include "cadscript/annotate/annotate.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "../metrics/parallel.hpp"
#include "cadscript/parser.hpp"

namespace cadscript::annotate {

std::string_view to_string(Role role) { return role == Role::Annotator ? "annotator" : "reviewer"; }

// --- documentation ----------------------------------------------------------

DocumentationSet DocumentationSet::parse_markdown(std::string_view text) {
  DocumentationSet docs;
  std::optional<OpKind> current;
  std::string body;
  auto flush = [&] {
    if (!current) return;
    while (!body.empty() && (body.back() == '\n' || body.back() == ' ')) body.pop_back();
    docs.sections_[*current] = body;
  };
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    if (line.rfind("## ", 0) == 0) {
      flush();
      current.reset();
      body.clear();
      auto open = line.find('`');
      auto close = open == std::string::npos ? open : line.find('`', open + 1);
      if (close != std::string::npos) {
        current = op_kind_from_keyword(line.substr(open + 1, close - open - 1));
      }
      if (current) body = line + "\n";
      continue;
    }
    if (line.rfind("# ", 0) == 0) {
      flush();
      current.reset();
      body.clear();
      continue;
    }
    if (current) body += line + "\n";
  }
  flush();
  return docs;
}

DocumentationSet DocumentationSet::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read documentation file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_markdown(ss.str());
}

const std::string* DocumentationSet::find(OpKind kind) const {
  auto it = sections_.find(kind);
  return it == sections_.end() ? nullptr : &it->second;
}

std::vector<std::string> DocumentationSet::select(const Program& program) const {
  std::set<OpKind> kinds;
  for (const auto& f : program.features) kinds.insert(f.kind);
  std::vector<std::string> out;
  for (OpKind k : kinds) {
    const std::string* text = find(k);
    if (text == nullptr) throw std::invalid_argument("no documentation for " + std::string(op_keyword(k)));
    out.push_back(*text);
  }
  return out;
}

// --- bundles ----------------------------------------------------------------

void PromptBundle::check() const {
  if (role == Role::Annotator && draft) throw std::invalid_argument("annotator bundle carries a draft");
  if (role == Role::Reviewer && (!draft || draft->empty())) {
    throw std::invalid_argument("reviewer bundle needs a non-empty draft");
  }
  try {
    parse(payload_code, Dialect::Canonical);
  } catch (const std::exception& e) {
    throw std::invalid_argument(std::string("payload is not canonical: ") + e.what());
  }
}

std::string PromptBundle::render_user() const {
  std::string out;
  if (!documentation_excerpts.empty()) {
    out += "# Documentation\n\n";
    for (const auto& d : documentation_excerpts) out += d + "\n\n";
  }
  for (std::size_t i = 0; i < fewshot_examples.size(); ++i) {
    out += "# Example " + std::to_string(i + 1) + "\n\n```\n" + fewshot_examples[i].code + "```\n\n" +
           fewshot_examples[i].description + "\n\n";
  }
  out += "# Program\n\n```\n" + payload_code + "```\n";
  if (draft) out += "\n# Draft description\n\n" + *draft + "\n";
  return out;
}

nlohmann::ordered_json PromptBundle::to_json() const {
  nlohmann::ordered_json j;
  j["role"] = to_string(role);
  j["system_text"] = system_text;
  j["documentation_excerpts"] = documentation_excerpts;
  j["fewshot_examples"] = nlohmann::ordered_json::array();
  for (const auto& e : fewshot_examples) {
    j["fewshot_examples"].push_back({{"code", e.code}, {"description", e.description}});
  }
  j["payload_code"] = payload_code;
  j["draft"] = draft ? nlohmann::ordered_json(*draft) : nullptr;
  return j;
}

namespace {

std::string canonical_text(const Program& program) {
  std::string text = emit(program);
  try {
    parse(text, Dialect::Canonical);
  } catch (const std::exception& e) {
    throw std::invalid_argument(std::string("program is not canonical: ") + e.what());
  }
  return text;
}

}  // namespace

PromptBundle assemble_annotator_prompt(const Program& program, const DocumentationSet& docs,
                                       const std::vector<FewShotExample>& fewshot, std::string system_text) {
  PromptBundle b;
  b.role = Role::Annotator;
  b.system_text = std::move(system_text);
  b.payload_code = canonical_text(program);
  b.documentation_excerpts = docs.select(program);
  b.fewshot_examples = fewshot;
  return b;
}

PromptBundle assemble_reviewer_prompt(const Program& program, const std::string& draft,
                                      const DocumentationSet& docs, std::string system_text) {
  if (draft.empty()) throw std::invalid_argument("reviewer needs a non-empty draft");
  PromptBundle b;
  b.role = Role::Reviewer;
  b.system_text = std::move(system_text);
  b.payload_code = canonical_text(program);
  b.documentation_excerpts = docs.select(program);
  b.draft = draft;
  return b;
}

// --- clients ----------------------------------------------------------------

std::string bundle_key(const PromptBundle& bundle) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bundle.to_json().dump()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string MockClient::complete(const PromptBundle& bundle) {
  if (bundle.role == Role::Reviewer) return "Reviewed: " + bundle.draft.value_or("");
  Program p = parse(bundle.payload_code, Dialect::Canonical);
  std::string out = "The design has " + std::to_string(p.features.size()) + " operations.";
  for (const auto& f : p.features) {
    out += " " + f.id.text() + " is a " + std::string(to_string(f.kind));
    if (f.kind == OpKind::Sketch) out += " with " + std::to_string(f.entities().size()) + " entities";
    out += ".";
  }
  return out + " [" + bundle_key(bundle) + "]";
}

std::string RecordingClient::complete(const PromptBundle& bundle) {
  std::string response = inner_.complete(bundle);
  std::lock_guard lock(mutex_);
  records_[bundle_key(bundle)] = {bundle.role, response};
  return response;
}

void RecordingClient::write_jsonl(std::ostream& out) const {
  std::lock_guard lock(mutex_);
  for (const auto& [key, rec] : records_) {
    nlohmann::ordered_json j;
    j["key"] = key;
    j["role"] = to_string(rec.first);
    j["response"] = rec.second;
    out << j.dump() << "\n";
  }
}

ReplayClient ReplayClient::read_jsonl(std::istream& in, std::string model_id) {
  ReplayClient c;
  c.model_id_ = std::move(model_id);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) {
    ++n;
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("key") || !j.contains("response")) {
      throw std::invalid_argument("recording line " + std::to_string(n) + ": expected {key, response}");
    }
    c.responses_[j["key"].get<std::string>()] = j["response"].get<std::string>();
  }
  return c;
}

std::string ReplayClient::complete(const PromptBundle& bundle) {
  auto it = responses_.find(bundle_key(bundle));
  if (it == responses_.end()) throw CompletionError("no recorded response for bundle " + bundle_key(bundle));
  return it->second;
}

// --- pipeline ---------------------------------------------------------------

void PipelineConfig::check() const {
  if (retries < 0) throw std::invalid_argument("retries must be >= 0");
}

PipelineError::PipelineError(Role stage, int attempts, const std::string& detail)
    : std::runtime_error(std::string(to_string(stage)) + " failed after " + std::to_string(attempts) +
                         " attempt(s): " + detail),
      stage_(stage),
      attempts_(attempts) {}

namespace {

std::string call_with_retries(CompletionClient& client, const PromptBundle& bundle, int retries, int& attempts,
                              std::chrono::milliseconds& elapsed) {
  auto start = std::chrono::steady_clock::now();
  std::string last_error;
  for (attempts = 1; attempts <= retries + 1; ++attempts) {
    try {
      std::string text = client.complete(bundle);
      if (text.empty()) throw CompletionError("empty completion");
      elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
      return text;
    } catch (const std::exception& e) {
      last_error = e.what();
    }
  }
  throw PipelineError(bundle.role, retries + 1, last_error);
}

}  // namespace

Annotation run_pipeline(const Program& program, CompletionClient& client, const DocumentationSet& docs,
                        const PipelineConfig& config) {
  config.check();
  Annotation a;
  a.model_id = client.model_id();
  PromptBundle first = assemble_annotator_prompt(program, docs, config.fewshot, config.annotator_system_text);
  a.draft_text = call_with_retries(client, first, config.retries, a.annotator_attempts, a.annotator_time);
  PromptBundle second = assemble_reviewer_prompt(program, a.draft_text, docs, config.reviewer_system_text);
  a.reviewed_text = call_with_retries(client, second, config.retries, a.reviewer_attempts, a.reviewer_time);
  return a;
}

nlohmann::ordered_json BatchRecord::to_json() const {
  nlohmann::ordered_json j;
  j["id"] = id;
  j["code"] = code;
  j["draft"] = draft;
  j["reviewed"] = reviewed;
  if (!error.empty()) j["error"] = error;
  return j;
}

std::vector<BatchRecord> run_batch(const std::vector<BatchItem>& items, CompletionClient& client,
                                   const DocumentationSet& docs, const PipelineConfig& config,
                                   unsigned parallelism) {
  config.check();
  if (parallelism == 0) throw std::invalid_argument("parallelism must be >= 1");
  std::vector<BatchRecord> out(items.size());
  metrics::detail::parallel_for(items.size(), parallelism, [&](std::size_t i) {
    BatchRecord& r = out[i];
    r.id = items[i].id;
    try {
      r.code = emit(items[i].program);
      Annotation a = run_pipeline(items[i].program, client, docs, config);
      r.draft = std::move(a.draft_text);
      r.reviewed = std::move(a.reviewed_text);
    } catch (const std::exception& e) {
      r.error = e.what();
    }
  });
  return out;
}

void write_jsonl(std::ostream& out, const std::vector<BatchRecord>& records) {
  for (const auto& r : records) out << r.to_json().dump() << "\n";
}

std::vector<FewShotExample> read_fewshot_jsonl(std::istream& in) {
  std::vector<FewShotExample> out;
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) {
    ++n;
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("code") || !j.contains("description")) {
      throw std::invalid_argument("few-shot line " + std::to_string(n) + ": expected {code, description}");
    }
    out.push_back({j["code"].get<std::string>(), j["description"].get<std::string>()});
  }
  return out;
}

}  // namespace cadscript::annotate
