#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "etsx/common.hpp"

namespace etsx::llm {

struct GenParams {
  double temperature = 0.0;  // pinned for reproducibility
  std::string model;
};

struct BackendRequest {
  std::string system;
  std::string user;
  GenParams params;

  // canonical key for cassettes and mock matching
  std::string key() const;
};

// Raised when a backend cannot produce a completion; never fabricates one.
class BackendFailure : public Error {
public:
  explicit BackendFailure(const std::string& msg) : Error(msg) {}
};

class Backend {
public:
  virtual ~Backend() = default;
  virtual std::string name() const = 0;
  virtual std::string complete(const BackendRequest& request) = 0;
};

// Deterministic mock: ordered substring rules, first match wins; falls
// back to a fixed canned reply. Rules can be loaded from a JSON file
// [{"match": "...", "reply": "..."}, ...].
class MockBackend : public Backend {
public:
  MockBackend() = default;
  explicit MockBackend(std::vector<std::pair<std::string, std::string>> rules)
      : rules_(std::move(rules)) {}
  static MockBackend from_rules_file(const std::string& path);

  void add_rule(std::string match, std::string reply);
  void set_default_reply(std::string reply) { default_reply_ = std::move(reply); }

  std::string name() const override { return "mock"; }
  std::string complete(const BackendRequest& request) override;

private:
  std::vector<std::pair<std::string, std::string>> rules_;
  std::string default_reply_ = "[mock-explanation]";
};

// Request-hash -> completion cassette. In record mode misses are served
// by the inner backend and appended to the cassette; otherwise a miss is
// a failure.
class ReplayBackend : public Backend {
public:
  explicit ReplayBackend(std::string cassette_path, std::shared_ptr<Backend> inner = nullptr);
  ~ReplayBackend() override;

  std::string name() const override { return "replay"; }
  std::string complete(const BackendRequest& request) override;

private:
  void load();
  void save();
  std::string path_;
  std::shared_ptr<Backend> inner_;
  std::map<std::string, std::string> cassette_;
  bool dirty_ = false;
  std::mutex mu_;
};

// Chat-completion-style JSON over HTTP. Endpoint, model, and key come
// from ETSX_LLM_ENDPOINT, ETSX_LLM_MODEL, ETSX_LLM_API_KEY.
class HttpBackend : public Backend {
public:
  HttpBackend();  // throws when ETSX_LLM_ENDPOINT is unset
  HttpBackend(std::string endpoint, std::string model, std::string api_key);

  std::string name() const override { return "http"; }
  std::string complete(const BackendRequest& request) override;

private:
  std::string endpoint_, model_, api_key_;
};

// Test helper: every request fails.
class FailingBackend : public Backend {
public:
  std::string name() const override { return "failing"; }
  std::string complete(const BackendRequest&) override {
    throw BackendFailure("backend unavailable");
  }
};

std::shared_ptr<Backend> make_backend(const std::string& kind,
                                      const std::string& mock_rules_path = "",
                                      const std::string& cassette_path = "");

}  // namespace etsx::llm
