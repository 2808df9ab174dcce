#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>
#include <json.hpp>

#include "recguard/http_backend.hpp"

#include <chrono>
#include <cmath>
#include <thread>

#include "recguard/errors.hpp"

namespace recguard {

namespace {

using nlohmann::json;

json request_body(const HttpBackendConfig& config, const ChatRequest& request) {
  json messages = json::array();
  for (const auto& m : request.messages) {
    messages.push_back({{"role", role_name(m.role)}, {"content", m.content}});
  }
  json body = {
      {"model", config.model},
      {"messages", std::move(messages)},
      {"temperature", request.temperature},
      {"max_tokens", request.max_tokens},
  };
  if (request.seed) body["seed"] = *request.seed;
  return body;
}

FinishReason finish_reason_from(const std::string& name) {
  if (name == "length") return FinishReason::Length;
  if (name == "content_filter" || name == "filtered") return FinishReason::Filtered;
  return FinishReason::Stop;
}

ChatCompletion parse_completion(const std::string& body, const std::string& fallback_model) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception& e) {
    throw Error(Errc::ProtocolError, std::string("unparseable upstream body: ") + e.what());
  }
  try {
    const auto& choices = j.at("choices");
    if (!choices.is_array() || choices.empty()) {
      throw Error(Errc::ProtocolError, "upstream body has no choices");
    }
    const auto& first = choices.at(0);
    ChatCompletion completion;
    completion.text = first.at("message").at("content").get<std::string>();
    completion.model_id = j.value("model", fallback_model);
    if (j.contains("usage")) {
      completion.prompt_tokens = j["usage"].value("prompt_tokens", 0L);
      completion.completion_tokens = j["usage"].value("completion_tokens", 0L);
    }
    completion.finish_reason = finish_reason_from(first.value("finish_reason", "stop"));
    return completion;
  } catch (const json::exception& e) {
    throw Error(Errc::ProtocolError, std::string("malformed upstream body: ") + e.what());
  }
}

void split_url(const std::string& base_url, std::string& host, std::string& prefix) {
  auto scheme_end = base_url.find("://");
  std::size_t path_start = scheme_end == std::string::npos
                               ? base_url.find('/')
                               : base_url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    host = base_url;
    prefix.clear();
  } else {
    host = base_url.substr(0, path_start);
    prefix = base_url.substr(path_start);
  }
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
}

}  // namespace

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
  if (config_.base_url.empty()) {
    throw Error(Errc::ConfigError, "http backend requires a base URL");
  }
  split_url(config_.base_url, host_, path_prefix_);
}

std::string HttpBackend::id() const {
  return "http:" + config_.model + "@" + host_;
}

ChatCompletion HttpBackend::complete(const ChatRequest& request) {
  request.validate();
  const std::string body = request_body(config_, request).dump();
  const std::string path = path_prefix_ + "/chat/completions";

  httplib::Headers headers;
  if (!config_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + config_.api_key);
  }

  int attempts = config_.retry.max_retries + 1;
  double delay_ms = config_.retry.base_delay_ms;
  Errc last_errc = Errc::Timeout;
  std::string last_detail;

  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(
          std::chrono::milliseconds(static_cast<long>(std::lround(delay_ms))));
      delay_ms *= config_.retry.factor;
    }
    httplib::Client client(host_);
    client.set_connection_timeout(0, config_.timeout_ms * 1000LL);
    client.set_read_timeout(config_.timeout_ms / 1000, (config_.timeout_ms % 1000) * 1000);
    client.set_write_timeout(config_.timeout_ms / 1000, (config_.timeout_ms % 1000) * 1000);

    auto result = client.Post(path, headers, body, "application/json");
    if (!result) {
      // Connection/read failures are transient; retry.
      last_errc = Errc::Timeout;
      last_detail = httplib::to_string(result.error());
      continue;
    }
    int status = result->status;
    if (status == 200) {
      return parse_completion(result->body, config_.model);
    }
    if (status == 429) {
      last_errc = Errc::RateLimited;
      last_detail = "upstream 429";
      continue;
    }
    if (status >= 500) {
      last_errc = Errc::ProtocolError;
      last_detail = "upstream " + std::to_string(status);
      continue;
    }
    // Other 4xx: not transient, never retried.
    throw Error(Errc::ProtocolError,
                "upstream " + std::to_string(status) + ": " + result->body.substr(0, 200));
  }
  throw Error(last_errc, last_detail + " after " +
                             std::to_string(config_.retry.max_retries) + " retries");
}

}  // namespace recguard
