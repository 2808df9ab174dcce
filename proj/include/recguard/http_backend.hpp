#pragma once

#include <string>

#include "recguard/chat.hpp"

namespace recguard {

/// Exponential backoff on transient failures only (timeout, 429, 5xx).
struct RetryPolicy {
  int max_retries = 3;
  int base_delay_ms = 250;
  double factor = 2.0;
};

struct HttpBackendConfig {
  std::string base_url;  // e.g. "http://127.0.0.1:8081/v1"
  std::string model;
  std::string api_key;  // sent as "Authorization: Bearer ..." when non-empty
  int timeout_ms = 30000;
  RetryPolicy retry;
};

/// Client for chat-completions-compatible endpoints. Holds only immutable
/// configuration; each call opens its own connection, so instances are safe
/// for concurrent use.
class HttpBackend : public Backend {
 public:
  explicit HttpBackend(HttpBackendConfig config);

  ChatCompletion complete(const ChatRequest& request) override;
  std::string id() const override;

  const HttpBackendConfig& config() const { return config_; }

 private:
  HttpBackendConfig config_;
  std::string host_;  // scheme://host[:port]
  std::string path_prefix_;
};

}  // namespace recguard
