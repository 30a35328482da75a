#include <httplib.h>

#include <cstdlib>

#include "cadscript/annotate/annotate.hpp"

namespace cadscript::annotate {

namespace {

std::string env(const char* name, std::string fallback = {}) {
  const char* v = std::getenv(name);
  return v != nullptr && *v != '\0' ? std::string(v) : fallback;
}

}  // namespace

std::unique_ptr<HttpClient> HttpClient::from_environment() {
  std::string endpoint = env("CADSCRIPT_LLM_ENDPOINT");
  if (endpoint.empty()) throw std::invalid_argument("CADSCRIPT_LLM_ENDPOINT is not set");
  auto scheme_end = endpoint.find("://");
  if (scheme_end == std::string::npos) throw std::invalid_argument("endpoint must start with http:// or https://");
  auto path_start = endpoint.find('/', scheme_end + 3);
  auto c = std::unique_ptr<HttpClient>(new HttpClient);
  c->scheme_host_ = endpoint.substr(0, path_start);
  c->path_ = path_start == std::string::npos ? "/" : endpoint.substr(path_start);
  c->api_key_ = env("CADSCRIPT_LLM_API_KEY");
  c->model_ = env("CADSCRIPT_LLM_MODEL", "default");
  c->timeout_seconds_ = std::stoi(env("CADSCRIPT_LLM_TIMEOUT", "120"));
  return c;
}

std::string HttpClient::complete(const PromptBundle& bundle) {
  nlohmann::json body;
  body["model"] = model_;
  body["messages"] = nlohmann::json::array();
  if (!bundle.system_text.empty()) body["messages"].push_back({{"role", "system"}, {"content", bundle.system_text}});
  body["messages"].push_back({{"role", "user"}, {"content", bundle.render_user()}});

  httplib::Client client(scheme_host_);
  client.set_connection_timeout(timeout_seconds_);
  client.set_read_timeout(timeout_seconds_);
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
  auto res = client.Post(path_, headers, body.dump(), "application/json");
  if (!res) throw CompletionError("request failed: " + httplib::to_string(res.error()));
  if (res->status != 200) throw CompletionError("HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
  auto j = nlohmann::json::parse(res->body, nullptr, false);
  if (j.is_discarded() || !j.contains("choices") || j["choices"].empty()) {
    throw CompletionError("malformed completion response");
  }
  const auto& content = j["choices"][0]["message"]["content"];
  if (!content.is_string()) throw CompletionError("completion has no text content");
  return content.get<std::string>();
}

}  // namespace cadscript::annotate
