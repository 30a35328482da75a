#include <gtest/gtest.h>

#include <httplib.h>

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "cadscript/annotate/annotate.hpp"
#include "cadscript/parser.hpp"
#include "test_support.hpp"

using namespace cadscript;
using namespace cadscript::annotate;

namespace {

const char* kPrism =
    "newSketch(F0, entities = {\n"
    "    circle(S0, center = (0.00, 0.00), radius = 5.00);\n"
    "});\n"
    "opExtrude(F1, profile = makeQuery(F0, SKETCH_REGION, FACE), depth = 10.00);\n";

Program prism() { return parse(kPrism, Dialect::Canonical); }

DocumentationSet docs() { return DocumentationSet::load(std::filesystem::path(CADSCRIPT_DOCS_DIR) / "operations.md"); }

// Fails the first `failures` calls of the given role, then defers to the mock.
class FlakyClient : public CompletionClient {
 public:
  FlakyClient(Role role, int failures) : role_(role), failures_(failures) {}
  std::string complete(const PromptBundle& b) override {
    if (b.role == role_ && calls_++ < failures_) throw CompletionError("transient");
    return mock_.complete(b);
  }
  std::string model_id() const override { return "flaky"; }

 private:
  Role role_;
  int failures_;
  int calls_ = 0;
  MockClient mock_;
};

class CountingClient : public CompletionClient {
 public:
  std::string complete(const PromptBundle& b) override {
    int now = ++in_flight_;
    int seen = peak_.load();
    while (now > seen && !peak_.compare_exchange_weak(seen, now)) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
    --in_flight_;
    return mock_.complete(b);
  }
  std::string model_id() const override { return "counting"; }
  int peak() const { return peak_; }

 private:
  std::atomic<int> in_flight_{0};
  std::atomic<int> peak_{0};
  MockClient mock_;
};

std::set<std::string> headings(const std::vector<std::string>& excerpts) {
  std::set<std::string> out;
  for (const auto& e : excerpts) out.insert(e.substr(0, e.find('\n')));
  return out;
}

}  // namespace

TEST(Documentation, EveryOperationHasASection) {
  DocumentationSet d = docs();
  EXPECT_EQ(d.size(), all_op_kinds().size());
  for (OpKind k : all_op_kinds()) EXPECT_NE(d.find(k), nullptr) << op_keyword(k);
}

TEST(Documentation, SelectionMatchesKindsPresent) {
  DocumentationSet d = docs();
  PromptBundle b = assemble_annotator_prompt(prism(), d, {});
  EXPECT_EQ(headings(b.documentation_excerpts),
            (std::set<std::string>{"## Sketch (`newSketch`)", "## Extrude (`opExtrude`)"}));

  for (const auto& path : testing_support::corpus_files("canonical")) {
    Program p = parse(testing_support::read_file(path), Dialect::Canonical);
    std::set<std::string> expected;
    for (const auto& f : p.features) {
      expected.insert("## " + std::string(to_string(f.kind)) + " (`" + std::string(op_keyword(f.kind)) + "`)");
    }
    EXPECT_EQ(headings(d.select(p)), expected) << path;
  }
}

TEST(PromptBundle, AnnotatorBundle) {
  PromptBundle b = assemble_annotator_prompt(prism(), docs(), {}, "system");
  EXPECT_EQ(b.role, Role::Annotator);
  EXPECT_EQ(b.payload_code, kPrism);
  EXPECT_TRUE(b.fewshot_examples.empty());
  EXPECT_FALSE(b.draft.has_value());
  EXPECT_NO_THROW(b.check());
  EXPECT_EQ(b.render_user().find("Draft"), std::string::npos);

  std::vector<FewShotExample> shots = {{kPrism, "A cylinder."}};
  PromptBundle with = assemble_annotator_prompt(prism(), docs(), shots);
  ASSERT_EQ(with.fewshot_examples.size(), 1u);
  EXPECT_NE(with.render_user().find("A cylinder."), std::string::npos);
}

TEST(PromptBundle, RawProgramRejected) {
  Program raw = parse("newSketch(sk, entities = { circle(c, center = (0, 0), radius = 1); });", Dialect::Raw);
  EXPECT_THROW(assemble_annotator_prompt(raw, docs(), {}), std::invalid_argument);
  EXPECT_THROW(assemble_reviewer_prompt(raw, "draft", docs()), std::invalid_argument);
}

TEST(PromptBundle, ReviewerBundle) {
  EXPECT_THROW(assemble_reviewer_prompt(prism(), "", docs()), std::invalid_argument);
  PromptBundle b = assemble_reviewer_prompt(prism(), "A disc.", docs());
  EXPECT_EQ(b.role, Role::Reviewer);
  EXPECT_EQ(b.draft.value(), "A disc.");
  EXPECT_EQ(b.payload_code, kPrism);
  EXPECT_NO_THROW(b.check());
  b.draft.reset();
  EXPECT_THROW(b.check(), std::invalid_argument);
}

TEST(Pipeline, MockIsDeterministicAndMatchesGolden) {
  MockClient client;
  PipelineConfig config;
  Annotation a = run_pipeline(prism(), client, docs(), config);
  Annotation b = run_pipeline(prism(), client, docs(), config);
  EXPECT_EQ(a.draft_text, b.draft_text);
  EXPECT_EQ(a.reviewed_text, b.reviewed_text);
  EXPECT_EQ(a.reviewed_text, "Reviewed: " + a.draft_text);
  EXPECT_EQ(a.annotator_attempts, 1);
  EXPECT_EQ(a.model_id, "mock-v1");

  std::ostringstream out;
  write_jsonl(out, run_batch({{"prism", prism()}}, client, docs(), config, 1));
  auto golden_path = std::filesystem::path(CADSCRIPT_TEST_DATA_DIR) / "annotate_mock.jsonl";
  if (std::getenv("CADSCRIPT_REGENERATE_GOLDEN") != nullptr) std::ofstream(golden_path) << out.str();
  std::string golden = testing_support::read_file(golden_path);
  EXPECT_EQ(out.str(), golden);
}

TEST(Pipeline, RetriesThenSucceeds) {
  FlakyClient client(Role::Annotator, 2);
  PipelineConfig config;
  config.retries = 3;
  Annotation a = run_pipeline(prism(), client, docs(), config);
  EXPECT_EQ(a.annotator_attempts, 3);
  EXPECT_EQ(a.reviewer_attempts, 1);
  EXPECT_FALSE(a.reviewed_text.empty());
}

TEST(Pipeline, ExhaustedRetriesNameStage) {
  FlakyClient client(Role::Reviewer, 100);
  PipelineConfig config;
  config.retries = 2;
  try {
    run_pipeline(prism(), client, docs(), config);
    FAIL() << "expected PipelineError";
  } catch (const PipelineError& e) {
    EXPECT_EQ(e.stage(), Role::Reviewer);
    EXPECT_EQ(e.attempts(), 3);
    EXPECT_NE(std::string(e.what()).find("reviewer"), std::string::npos);
  }
}

TEST(Batch, BoundedParallelismAndInputOrder) {
  std::vector<BatchItem> items;
  for (int i = 0; i < 12; ++i) items.push_back({"item" + std::to_string(i), prism()});
  items[5].program.features.pop_back();
  items[5].program.features[0].id = Identifier("sk");  // not canonical
  CountingClient client;
  auto records = run_batch(items, client, docs(), PipelineConfig{}, 3);
  ASSERT_EQ(records.size(), items.size());
  for (std::size_t i = 0; i < items.size(); ++i) EXPECT_EQ(records[i].id, items[i].id);
  EXPECT_LE(client.peak(), 3);
  EXPECT_FALSE(records[5].error.empty());
  EXPECT_TRUE(records[4].error.empty());

  std::ostringstream out;
  write_jsonl(out, records);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  auto j = nlohmann::ordered_json::parse(line);
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  EXPECT_EQ(keys, (std::vector<std::string>{"id", "code", "draft", "reviewed"}));
}

TEST(Clients, RecordThenReplay) {
  MockClient mock;
  RecordingClient recorder(mock);
  Annotation live = run_pipeline(prism(), recorder, docs(), PipelineConfig{});
  std::stringstream log;
  recorder.write_jsonl(log);
  ReplayClient replay = ReplayClient::read_jsonl(log);
  Annotation again = run_pipeline(prism(), replay, docs(), PipelineConfig{});
  EXPECT_EQ(again.draft_text, live.draft_text);
  EXPECT_EQ(again.reviewed_text, live.reviewed_text);

  PipelineConfig other;
  other.annotator_system_text = "different";
  other.retries = 0;
  EXPECT_THROW(run_pipeline(prism(), replay, docs(), other), PipelineError);
}

TEST(Clients, HttpAgainstLocalServer) {
  httplib::Server server;
  std::string seen_auth;
  nlohmann::json seen_body;
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    seen_auth = req.get_header_value("Authorization");
    seen_body = nlohmann::json::parse(req.body);
    res.set_content(R"({"choices":[{"message":{"role":"assistant","content":"A short cylinder."}}]})",
                    "application/json");
  });
  int port = server.bind_to_any_port("127.0.0.1");
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  std::string endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
  setenv("CADSCRIPT_LLM_ENDPOINT", endpoint.c_str(), 1);
  setenv("CADSCRIPT_LLM_API_KEY", "test-key", 1);
  setenv("CADSCRIPT_LLM_MODEL", "tiny", 1);
  auto client = HttpClient::from_environment();
  PromptBundle b = assemble_annotator_prompt(prism(), docs(), {}, "system prompt");
  EXPECT_EQ(client->complete(b), "A short cylinder.");
  EXPECT_EQ(client->model_id(), "tiny");
  EXPECT_EQ(seen_auth, "Bearer test-key");
  EXPECT_EQ(seen_body["model"], "tiny");
  EXPECT_EQ(seen_body["messages"][0]["content"], "system prompt");
  EXPECT_EQ(seen_body["messages"][1]["content"], b.render_user());

  server.stop();
  t.join();
  unsetenv("CADSCRIPT_LLM_ENDPOINT");
  unsetenv("CADSCRIPT_LLM_API_KEY");
  unsetenv("CADSCRIPT_LLM_MODEL");
  EXPECT_THROW(HttpClient::from_environment(), std::invalid_argument);
}
