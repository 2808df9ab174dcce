#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>
#include <json.hpp>

#include "recguard/gateway.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <thread>

#include "recguard/errors.hpp"
#include "recguard/http_backend.hpp"
#include "recguard/json_io.hpp"
#include "recguard/scripted_backend.hpp"
#include "recguard/text.hpp"
#include "recguard/util.hpp"

namespace recguard {

namespace {

using nlohmann::json;

std::string redact_text(const std::string& s) {
  return "sha256:" + util::sha256_hex(s).substr(0, 16);
}

json audit_record_json(const AuditRecord& record, bool redact) {
  GuardTrace trace = record.trace;
  std::string visible = record.client_visible_text;
  if (redact) {
    trace.original_prompt = redact_text(trace.original_prompt);
    trace.initial_response = redact_text(trace.initial_response);
    for (auto& candidate : trace.inverted_candidates) candidate.text = redact_text(candidate.text);
    visible = redact_text(visible);
  }
  return json{{"request_id", record.request_id},
              {"received_at", record.received_at},
              {"client_visible_text", visible},
              {"decision", guard_decision_name(record.decision)},
              {"latency_ms", record.latency_ms},
              {"trace", jsonio::to_json(trace)}};
}

// Transport-level mapping; a Blocked verdict is application content and
// never reaches this function.
int http_status_for(Errc code) {
  switch (code) {
    case Errc::EmptyPrompt: return 400;
    case Errc::PromptTooLong: return 413;
    case Errc::BackendFailure:
    case Errc::Timeout:
    case Errc::RateLimited:
    case Errc::ProtocolError:
    case Errc::NoRuleMatched:
    case Errc::InversionFailure:
    case Errc::EmptyVerdictList: return 502;
    default: return 500;
  }
}

void send_error(httplib::Response& res, int status, const std::string& code,
                const std::string& message) {
  res.status = status;
  res.set_content(json{{"error", {{"code", code}, {"message", message}}}}.dump(),
                  "application/json");
}

AggregationPolicy aggregation_policy_from_name(const std::string& name) {
  if (name == "AnyUnsafeBlocks") return AggregationPolicy::AnyUnsafeBlocks;
  if (name == "MajorityBlocks") return AggregationPolicy::MajorityBlocks;
  throw Error(Errc::ConfigError, "unknown aggregation_policy '" + name + "'");
}

void read_guard_config(const json& j, GuardConfig& guard) {
  if (j.contains("candidate_count")) j.at("candidate_count").get_to(guard.candidate_count);
  if (j.contains("aggregation_policy")) {
    guard.aggregation_policy =
        aggregation_policy_from_name(j.at("aggregation_policy").get<std::string>());
  }
  if (j.contains("refusal_text")) j.at("refusal_text").get_to(guard.refusal_text);
  if (j.contains("counterbalance_caution")) {
    j.at("counterbalance_caution").get_to(guard.counterbalance_caution);
  }
  if (j.contains("temperature")) j.at("temperature").get_to(guard.generation.temperature);
  if (j.contains("max_tokens")) j.at("max_tokens").get_to(guard.generation.max_tokens);
  if (j.contains("seed") && !j.at("seed").is_null()) {
    guard.generation.seed = j.at("seed").get<long>();
  }
  if (j.contains("max_input_chars")) j.at("max_input_chars").get_to(guard.max_input_chars);
}

}  // namespace

const char* service_mode_name(ServiceMode m) {
  switch (m) {
    case ServiceMode::Guarded: return "guarded";
    case ServiceMode::Baseline: return "baseline";
  }
  return "?";
}

ServiceMode service_mode_from_name(const std::string& name) {
  if (name == "guarded") return ServiceMode::Guarded;
  if (name == "baseline") return ServiceMode::Baseline;
  throw Error(Errc::ConfigError, "unknown service mode '" + name + "'");
}

std::pair<std::string, int> ServiceConfig::split_listen_address() const {
  std::size_t colon = listen_address.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == listen_address.size()) {
    throw Error(Errc::ConfigError, "listen_address must be host:port, got '" + listen_address + "'");
  }
  std::string host = listen_address.substr(0, colon);
  int port = 0;
  try {
    std::size_t used = 0;
    port = std::stoi(listen_address.substr(colon + 1), &used);
    if (used != listen_address.size() - colon - 1) throw std::invalid_argument("trailing chars");
  } catch (const std::exception&) {
    throw Error(Errc::ConfigError, "listen_address port is not a number: '" + listen_address + "'");
  }
  if (port < 0 || port > 65535) {
    throw Error(Errc::ConfigError, "listen_address port out of range: " + std::to_string(port));
  }
  return {host, port};
}

void ServiceConfig::validate() const {
  if (backend.kind != "scripted" && backend.kind != "http") {
    throw Error(Errc::ConfigError, "backend.kind must be 'scripted' or 'http', got '" +
                                       backend.kind + "'");
  }
  if (backend.endpoint.empty()) throw Error(Errc::ConfigError, "backend.endpoint must be set");
  if (backend.timeout_ms < 1) throw Error(Errc::ConfigError, "backend.timeout_ms must be >= 1");
  if (backend.max_retries < 0) throw Error(Errc::ConfigError, "backend.max_retries must be >= 0");
  if (parallelism_limit < 1) throw Error(Errc::ConfigError, "parallelism_limit must be >= 1");
  if (audit_path.empty()) throw Error(Errc::ConfigError, "audit_path must be set");
  split_listen_address();
  guard.validate();
}

ServiceConfig load_service_config(const std::filesystem::path& path) {
  std::string content;
  try {
    content = util::read_file(path);
  } catch (const Error& e) {
    throw Error(Errc::ConfigError, e.what());
  }
  json j;
  try {
    j = json::parse(content);
  } catch (const json::exception& e) {
    throw Error(Errc::ConfigError, path.string() + ": " + e.what());
  }
  if (!j.is_object()) {
    throw Error(Errc::ConfigError, path.string() + ": top level must be a JSON object");
  }

  ServiceConfig config;
  try {
    if (j.contains("listen_address")) j.at("listen_address").get_to(config.listen_address);
    if (j.contains("mode")) config.mode = service_mode_from_name(j.at("mode").get<std::string>());
    if (j.contains("backend")) {
      const json& b = j.at("backend");
      if (b.contains("kind")) b.at("kind").get_to(config.backend.kind);
      if (b.contains("endpoint")) b.at("endpoint").get_to(config.backend.endpoint);
      if (b.contains("model")) b.at("model").get_to(config.backend.model);
      if (b.contains("timeout_ms")) b.at("timeout_ms").get_to(config.backend.timeout_ms);
      if (b.contains("max_retries")) b.at("max_retries").get_to(config.backend.max_retries);
    }
    if (j.contains("guard")) read_guard_config(j.at("guard"), config.guard);
    if (j.contains("audit_path")) config.audit_path = j.at("audit_path").get<std::string>();
    if (j.contains("parallelism_limit")) j.at("parallelism_limit").get_to(config.parallelism_limit);
    if (j.contains("data_dir")) config.data_dir = j.at("data_dir").get<std::string>();
    if (j.contains("redact_audit")) j.at("redact_audit").get_to(config.redact_audit);
    if (j.contains("enable_commands")) j.at("enable_commands").get_to(config.enable_commands);
  } catch (const json::exception& e) {
    throw Error(Errc::ConfigError, path.string() + ": " + e.what());
  }
  config.validate();
  return config;
}

AuditLog::AuditLog(std::filesystem::path path, bool redact)
    : path_(std::move(path)), redact_(redact) {
  out_.open(path_, std::ios::out | std::ios::app);
  if (!out_) {
    throw Error(Errc::AuditWriteFailure, "cannot open '" + path_.string() + "' for append");
  }
}

void AuditLog::append(const AuditRecord& record) {
  std::string line = audit_record_json(record, redact_).dump();
  std::lock_guard<std::mutex> lock(mutex_);
  out_ << line << '\n';
  out_.flush();
  if (!out_) {
    throw Error(Errc::AuditWriteFailure, "write to '" + path_.string() + "' failed");
  }
  lines_.fetch_add(1);
}

GuardStack build_guard_stack(const ServiceConfig& config) {
  config.validate();
  GuardStack stack;
  if (config.backend.kind == "scripted") {
    stack.backend = ScriptedBackend::shared_from_jsonl(config.backend.endpoint);
  } else {
    HttpBackendConfig http;
    http.base_url = config.backend.endpoint;
    if (const char* url = std::getenv("RECGUARD_BASE_URL")) http.base_url = url;
    http.model = config.backend.model;
    if (const char* key = std::getenv("RECGUARD_API_KEY")) http.api_key = key;
    http.timeout_ms = config.backend.timeout_ms;
    http.retry.max_retries = config.backend.max_retries;
    stack.backend = std::make_shared<HttpBackend>(http);
  }
  TemplateLibrary templates = TemplateLibrary::load(config.data_dir / "templates");
  stack.inverter = std::make_shared<LlmInverter>(stack.backend, templates.inversion_prompt());
  stack.evaluator = std::make_shared<LlmJudgeEvaluator>(
      stack.backend, config.guard, templates.judge_prompt(), templates.judge_caution());
  return stack;
}

struct GatewayServer::Impl {
  httplib::Server svr;
  std::thread thread;
};

GatewayServer::GatewayServer(ServiceConfig config, std::shared_ptr<Backend> backend,
                             std::shared_ptr<Inverter> inverter,
                             std::shared_ptr<SafetyEvaluator> evaluator)
    : config_(std::move(config)),
      backend_(std::move(backend)),
      inverter_(std::move(inverter)),
      evaluator_(std::move(evaluator)),
      impl_(std::make_unique<Impl>()) {
  config_.validate();
  audit_ = std::make_unique<AuditLog>(config_.audit_path, config_.redact_audit);
  // Completions saturate at parallelism_limit; the spare threads keep
  // /healthz responsive while the pipeline is busy.
  impl_->svr.new_task_queue = [n = config_.parallelism_limit + 4] {
    return new httplib::ThreadPool(static_cast<std::size_t>(n));
  };
  install_routes();
}

GatewayServer::~GatewayServer() { stop(); }

void GatewayServer::install_routes() {
  impl_->svr.Get("/healthz", [this](const httplib::Request&, httplib::Response& res) {
    json body = {{"status", "ok"},
                 {"mode", service_mode_name(config_.mode)},
                 {"config_digest", jsonio::config_digest(config_.guard)},
                 {"backend", backend_->id()},
                 {"requests_completed", completed_.load()},
                 {"audit_lines", audit_->lines_written()},
                 {"audit_failures", audit_failures_.load()},
                 {"in_flight", in_flight_.load()}};
    res.set_content(body.dump(), "application/json");
  });

  impl_->svr.Post("/v1/chat/completions",
                  [this](const httplib::Request& req, httplib::Response& res) {
    struct Release {
      std::atomic<int>& counter;
      ~Release() { counter.fetch_sub(1); }
    } release{in_flight_};
    if (in_flight_.fetch_add(1) + 1 > config_.parallelism_limit) {
      res.set_header("Retry-After", "1");
      send_error(res, 429, "overloaded", "parallelism limit reached, retry shortly");
      return;
    }

    const std::string received_at = util::iso8601_now();
    const auto t0 = std::chrono::steady_clock::now();

    json j;
    try {
      j = json::parse(req.body);
    } catch (const json::exception& e) {
      send_error(res, 400, "bad_request", std::string("body is not valid JSON: ") + e.what());
      return;
    }
    if (!j.is_object() || !j.contains("messages") || !j.at("messages").is_array() ||
        j.at("messages").empty()) {
      send_error(res, 400, "bad_request", "'messages' must be a non-empty array");
      return;
    }

    ChatRequest chat;
    chat.temperature = config_.guard.generation.temperature;
    chat.max_tokens = config_.guard.generation.max_tokens;
    chat.seed = config_.guard.generation.seed;
    for (const json& m : j.at("messages")) {
      if (!m.is_object() || !m.contains("role") || !m.at("role").is_string() ||
          !m.contains("content") || !m.at("content").is_string()) {
        send_error(res, 400, "bad_request", "each message needs string 'role' and 'content'");
        return;
      }
      auto role = role_from_name(m.at("role").get<std::string>());
      if (!role) {
        send_error(res, 400, "bad_request",
                   "unknown role '" + m.at("role").get<std::string>() + "'");
        return;
      }
      chat.messages.push_back({*role, m.at("content").get<std::string>()});
    }
    try {
      if (j.contains("temperature")) chat.temperature = j.at("temperature").get<double>();
      if (j.contains("max_tokens")) chat.max_tokens = j.at("max_tokens").get<int>();
      if (j.contains("seed") && !j.at("seed").is_null()) chat.seed = j.at("seed").get<long>();
      chat.validate();
    } catch (const std::exception& e) {
      send_error(res, 400, "bad_request", e.what());
      return;
    }

    const std::string* prompt = chat.final_user_message();
    if (prompt == nullptr || text::trim(*prompt).empty()) {
      send_error(res, 400, "bad_request", "no non-empty user message to guard");
      return;
    }
    if (prompt->size() > static_cast<std::size_t>(config_.guard.max_input_chars)) {
      send_error(res, 413, "prompt_too_long",
                 "prompt length " + std::to_string(prompt->size()) + " exceeds " +
                     std::to_string(config_.guard.max_input_chars));
      return;
    }

    GuardDecision decision = GuardDecision::Allowed;
    GuardTrace trace;
    std::string content;
    std::string model_id = backend_->id();

    std::optional<CommandKeyword> command;
    if (config_.enable_commands) command = detect_command(*prompt);
    if (command) {
      // Debug keywords are stateless here: no prior exchange is stored.
      trace.original_prompt = *prompt;
      trace.backend_id = model_id;
      trace.timestamp = received_at;
      content = std::string("Command '") + command_keyword_name(*command) +
                "' acknowledged, but this service stores no conversation state to report.";
    } else {
      try {
        if (config_.mode == ServiceMode::Baseline) {
          trace.original_prompt = *prompt;
          trace.backend_id = model_id;
          trace.timestamp = received_at;
          ChatCompletion completion = backend_->complete(chat);
          trace.stage_durations_ms["generate"] =
              std::chrono::duration_cast<std::chrono::milliseconds>(
                  std::chrono::steady_clock::now() - t0)
                  .count();
          trace.initial_response = completion.text;
          if (!completion.model_id.empty()) model_id = completion.model_id;
          content = completion.text;
          decision = detect_refusal(content) ? GuardDecision::BaselineRefused
                                             : GuardDecision::Allowed;
        } else {
          GuardOutcome outcome = run_pipeline(chat, config_.guard, *backend_, *inverter_,
                                              *evaluator_);
          decision = outcome.decision;
          content = std::move(outcome.final_text);
          trace = std::move(outcome.trace);
        }
      } catch (const Error& e) {
        send_error(res, http_status_for(e.code()), errc_name(e.code()), e.what());
        return;
      } catch (const std::exception& e) {
        send_error(res, 500, "internal", e.what());
        return;
      }
    }

    AuditRecord record;
    record.request_id = util::new_request_id();
    record.received_at = received_at;
    record.client_visible_text = content;
    record.trace = std::move(trace);
    record.decision = decision;
    record.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                            std::chrono::steady_clock::now() - t0)
                            .count();

    json body = {{"id", record.request_id},
                 {"object", "chat.completion"},
                 {"created", static_cast<long>(std::time(nullptr))},
                 {"model", model_id},
                 {"choices",
                  json::array({json{{"index", 0},
                                    {"message", {{"role", "assistant"}, {"content", content}}},
                                    {"finish_reason", "stop"}}})},
                 {"guard",
                  {{"decision", guard_decision_name(decision)},
                   {"mode", service_mode_name(config_.mode)}}}};

    // The line must be on disk before the client sees the answer.
    try {
      audit_->append(record);
    } catch (const Error&) {
      audit_failures_.fetch_add(1);
    }

    res.set_content(body.dump(), "application/json");
    completed_.fetch_add(1);
  });
}

void GatewayServer::start() {
  auto [host, port] = config_.split_listen_address();
  if (port == 0) {
    int picked = impl_->svr.bind_to_any_port(host);
    if (picked <= 0) {
      throw Error(Errc::ConfigError, "cannot bind '" + host + "' on an ephemeral port");
    }
    port_ = picked;
  } else {
    if (!impl_->svr.bind_to_port(host, port)) {
      throw Error(Errc::ConfigError, "cannot bind '" + config_.listen_address + "'");
    }
    port_ = port;
  }
  impl_->thread = std::thread([this] { impl_->svr.listen_after_bind(); });
  for (int i = 0; i < 2000 && !impl_->svr.is_running(); ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(1));
  }
  if (!impl_->svr.is_running()) {
    throw Error(Errc::ConfigError, "server did not come up on '" + config_.listen_address + "'");
  }
}

void GatewayServer::stop() {
  if (impl_->thread.joinable()) {
    impl_->svr.stop();
    impl_->thread.join();
  }
}

}  // namespace recguard
