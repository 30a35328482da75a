#pragma once

// Two-stage description pipeline: an Annotator drafts a description of a
// canonical program, a Reviewer refines it. Prompt texts are opaque data
// files; the completion backend is pluggable.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cadscript/ast.hpp"

namespace cadscript::annotate {

enum class Role { Annotator, Reviewer };
std::string_view to_string(Role role);

struct FewShotExample {
  std::string code;
  std::string description;
};

// Per-operation documentation, keyed by OpKind. Loaded from a markdown file
// whose level-2 headings name the operation keyword in backticks, e.g.
// "## Extrude (`opExtrude`)".
class DocumentationSet {
 public:
  static DocumentationSet parse_markdown(std::string_view text);
  static DocumentationSet load(const std::filesystem::path& path);

  void set(OpKind kind, std::string text) { sections_[kind] = std::move(text); }
  const std::string* find(OpKind kind) const;
  std::size_t size() const { return sections_.size(); }

  // Sections for the distinct kinds in `program`, in OpKind order. Throws
  // when a kind has no section.
  std::vector<std::string> select(const Program& program) const;

 private:
  std::map<OpKind, std::string> sections_;
};

struct PromptBundle {
  Role role = Role::Annotator;
  std::string system_text;
  std::vector<std::string> documentation_excerpts;
  std::vector<FewShotExample> fewshot_examples;
  std::string payload_code;
  std::optional<std::string> draft;  // Reviewer only

  // Throws std::invalid_argument on a role/draft mismatch or a payload that
  // is not canonical.
  void check() const;

  // User-message text sent alongside system_text.
  std::string render_user() const;
  nlohmann::ordered_json to_json() const;
};

PromptBundle assemble_annotator_prompt(const Program& program, const DocumentationSet& docs,
                                       const std::vector<FewShotExample>& fewshot,
                                       std::string system_text = {});
PromptBundle assemble_reviewer_prompt(const Program& program, const std::string& draft,
                                      const DocumentationSet& docs, std::string system_text = {});

class CompletionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CompletionClient {
 public:
  virtual ~CompletionClient() = default;
  // Must be safe to call from several threads.
  virtual std::string complete(const PromptBundle& bundle) = 0;
  virtual std::string model_id() const = 0;
};

// Deterministic templated output derived only from bundle content.
class MockClient : public CompletionClient {
 public:
  std::string complete(const PromptBundle& bundle) override;
  std::string model_id() const override { return "mock-v1"; }
};

// Stable key of a bundle: FNV-1a over its JSON, as 16 hex digits.
std::string bundle_key(const PromptBundle& bundle);

// Wraps another client and keeps every (key, response) pair.
class RecordingClient : public CompletionClient {
 public:
  explicit RecordingClient(CompletionClient& inner) : inner_(inner) {}
  std::string complete(const PromptBundle& bundle) override;
  std::string model_id() const override { return inner_.model_id(); }
  // One {"key", "role", "response"} object per line, sorted by key.
  void write_jsonl(std::ostream& out) const;

 private:
  CompletionClient& inner_;
  mutable std::mutex mutex_;
  std::map<std::string, std::pair<Role, std::string>> records_;
};

// Answers from a recording; unknown bundles raise CompletionError.
class ReplayClient : public CompletionClient {
 public:
  static ReplayClient read_jsonl(std::istream& in, std::string model_id = "replay");
  std::string complete(const PromptBundle& bundle) override;
  std::string model_id() const override { return model_id_; }

 private:
  std::string model_id_;
  std::map<std::string, std::string> responses_;
};

// OpenAI-style chat-completions endpoint. Configuration comes from the
// environment only:
//   CADSCRIPT_LLM_ENDPOINT  e.g. https://host/v1/chat/completions (required)
//   CADSCRIPT_LLM_API_KEY   bearer token (optional)
//   CADSCRIPT_LLM_MODEL     model name (default "default")
//   CADSCRIPT_LLM_TIMEOUT   seconds (default 120)
class HttpClient : public CompletionClient {
 public:
  static std::unique_ptr<HttpClient> from_environment();
  std::string complete(const PromptBundle& bundle) override;
  std::string model_id() const override { return model_; }

 private:
  std::string scheme_host_;
  std::string path_;
  std::string api_key_;
  std::string model_;
  int timeout_seconds_ = 120;
};

struct PipelineConfig {
  int retries = 3;  // extra attempts per stage after the first failure
  std::string annotator_system_text;
  std::string reviewer_system_text;
  std::vector<FewShotExample> fewshot;

  void check() const;
};

struct Annotation {
  std::string draft_text;
  std::string reviewed_text;
  std::string model_id;
  int annotator_attempts = 0;
  int reviewer_attempts = 0;
  std::chrono::milliseconds annotator_time{0};
  std::chrono::milliseconds reviewer_time{0};
};

class PipelineError : public std::runtime_error {
 public:
  PipelineError(Role stage, int attempts, const std::string& detail);
  Role stage() const { return stage_; }
  int attempts() const { return attempts_; }

 private:
  Role stage_;
  int attempts_;
};

Annotation run_pipeline(const Program& program, CompletionClient& client, const DocumentationSet& docs,
                        const PipelineConfig& config);

struct BatchItem {
  std::string id;
  Program program;
};

struct BatchRecord {
  std::string id;
  std::string code;
  std::string draft;
  std::string reviewed;
  std::string error;  // empty on success

  nlohmann::ordered_json to_json() const;  // {id, code, draft, reviewed[, error]}
};

// At most `parallelism` items are in flight; records come back in input
// order. Per-item failures are recorded, not thrown.
std::vector<BatchRecord> run_batch(const std::vector<BatchItem>& items, CompletionClient& client,
                                   const DocumentationSet& docs, const PipelineConfig& config,
                                   unsigned parallelism);

void write_jsonl(std::ostream& out, const std::vector<BatchRecord>& records);

// Reads few-shot examples from JSONL lines {"code": ..., "description": ...}.
std::vector<FewShotExample> read_fewshot_jsonl(std::istream& in);

}  // namespace cadscript::annotate
