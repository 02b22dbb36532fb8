#include "etsx/llm_backend.hpp"

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "json.hpp"

#ifndef ETSX_NO_HTTP
#define CPPHTTPLIB_NO_EXCEPTIONS 0
#include "httplib.h"
#endif

namespace etsx::llm {

using json = nlohmann::json;

std::string BackendRequest::key() const {
  std::ostringstream os;
  os << "model=" << params.model << "\x1f"
     << "temperature=" << params.temperature << "\x1f"
     << "system=" << system << "\x1f"
     << "user=" << user;
  return fnv1a_hex(os.str());
}

MockBackend MockBackend::from_rules_file(const std::string& path) {
  json rules = json::parse(read_file(path));
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& r : rules)
    out.emplace_back(r.at("match").get<std::string>(), r.at("reply").get<std::string>());
  return MockBackend(std::move(out));
}

void MockBackend::add_rule(std::string match, std::string reply) {
  rules_.emplace_back(std::move(match), std::move(reply));
}

std::string MockBackend::complete(const BackendRequest& request) {
  std::string haystack = request.system + "\n" + request.user;
  for (const auto& [match, reply] : rules_) {
    if (haystack.find(match) != std::string::npos) return reply;
  }
  return default_reply_;
}

ReplayBackend::ReplayBackend(std::string cassette_path, std::shared_ptr<Backend> inner)
    : path_(std::move(cassette_path)), inner_(std::move(inner)) {
  load();
}

ReplayBackend::~ReplayBackend() {
  try {
    if (dirty_) save();
  } catch (...) {
    // destructor must not throw; an unsaved cassette surfaces on replay
  }
}

void ReplayBackend::load() {
  if (!std::filesystem::exists(path_)) return;
  json j = json::parse(read_file(path_));
  for (auto it = j.begin(); it != j.end(); ++it)
    cassette_[it.key()] = it.value().get<std::string>();
}

void ReplayBackend::save() {
  json j = json::object();
  for (const auto& [k, v] : cassette_) j[k] = v;
  write_file(path_, j.dump(2));
  dirty_ = false;
}

std::string ReplayBackend::complete(const BackendRequest& request) {
  std::string key = request.key();
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cassette_.find(key);
    if (it != cassette_.end()) return it->second;
  }
  if (!inner_) throw BackendFailure("cassette miss for request " + key + " (" + path_ + ")");
  std::string reply = inner_->complete(request);
  {
    std::lock_guard<std::mutex> lock(mu_);
    cassette_[key] = reply;
    dirty_ = true;
    save();
  }
  return reply;
}

HttpBackend::HttpBackend() {
  const char* ep = std::getenv("ETSX_LLM_ENDPOINT");
  if (!ep || !*ep) throw Error("ETSX_LLM_ENDPOINT is not set");
  endpoint_ = ep;
  const char* model = std::getenv("ETSX_LLM_MODEL");
  model_ = model ? model : "";
  const char* key = std::getenv("ETSX_LLM_API_KEY");
  api_key_ = key ? key : "";
}

HttpBackend::HttpBackend(std::string endpoint, std::string model, std::string api_key)
    : endpoint_(std::move(endpoint)), model_(std::move(model)), api_key_(std::move(api_key)) {}

std::string HttpBackend::complete(const BackendRequest& request) {
#ifdef ETSX_NO_HTTP
  (void)request;
  throw BackendFailure("HTTP backend disabled at build time");
#else
  // endpoint form: http(s)://host[:port]/path
  auto scheme_end = endpoint_.find("://");
  if (scheme_end == std::string::npos) throw BackendFailure("bad endpoint " + endpoint_);
  auto path_begin = endpoint_.find('/', scheme_end + 3);
  std::string host = endpoint_.substr(0, path_begin == std::string::npos ? endpoint_.size()
                                                                         : path_begin);
  std::string path = path_begin == std::string::npos ? "/" : endpoint_.substr(path_begin);

  json body;
  body["model"] = request.params.model.empty() ? model_ : request.params.model;
  body["temperature"] = request.params.temperature;
  body["messages"] = json::array({json{{"role", "system"}, {"content", request.system}},
                                  json{{"role", "user"}, {"content", request.user}}});

  httplib::Client client(host);
  client.set_read_timeout(120, 0);
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
  auto res = client.Post(path, headers, body.dump(), "application/json");
  if (!res) throw BackendFailure("HTTP request failed: " + httplib::to_string(res.error()));
  if (res->status != 200)
    throw BackendFailure("HTTP status " + std::to_string(res->status) + ": " + res->body);
  json reply = json::parse(res->body);
  try {
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw BackendFailure(std::string("unexpected completion payload: ") + e.what());
  }
#endif
}

std::shared_ptr<Backend> make_backend(const std::string& kind, const std::string& mock_rules_path,
                                      const std::string& cassette_path) {
  if (kind == "mock") {
    if (!mock_rules_path.empty())
      return std::make_shared<MockBackend>(MockBackend::from_rules_file(mock_rules_path));
    return std::make_shared<MockBackend>();
  }
  if (kind == "replay") {
    if (cassette_path.empty()) throw Error("replay backend needs a cassette path");
    return std::make_shared<ReplayBackend>(cassette_path);
  }
  if (kind == "remote") return std::make_shared<HttpBackend>();
  throw Error("unknown backend kind '" + kind + "' (mock|replay|remote)");
}

}  // namespace etsx::llm
