#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <string>
#include <utility>

#include "recguard/guard.hpp"

namespace recguard {

enum class ServiceMode { Guarded, Baseline };

const char* service_mode_name(ServiceMode m);
ServiceMode service_mode_from_name(const std::string& name);

// Which model the service talks to. "scripted" reads a rule table from
// `endpoint` (a file path); "http" forwards to a chat-completions endpoint
// at `endpoint` (a base URL). Credentials never appear here — the API key
// comes from the environment (RECGUARD_API_KEY) at wiring time.
struct BackendDescriptor {
  std::string kind = "scripted";
  std::string endpoint;
  std::string model;
  int timeout_ms = 30000;
  int max_retries = 3;
};

struct ServiceConfig {
  std::string listen_address = "127.0.0.1:8080";
  ServiceMode mode = ServiceMode::Guarded;
  BackendDescriptor backend;
  GuardConfig guard;
  std::filesystem::path audit_path = "audit.jsonl";
  int parallelism_limit = 8;
  // Root of the shipped assets (templates/, wrappers.jsonl, words_10k.txt,
  // lexicon.jsonl); needed to assemble the inverter and judge.
  std::filesystem::path data_dir = "data";
  // Replace prompt and generated text in audit lines with content hashes.
  bool redact_audit = false;
  // Debug keywords (prompt/response/score/...) stay off in production.
  bool enable_commands = false;

  void validate() const;
  std::pair<std::string, int> split_listen_address() const;
};

// Reads a JSON config file. Unknown keys are ignored; missing keys keep the
// defaults above. Throws Error(ConfigError) on unreadable files, bad JSON,
// or invariant violations.
ServiceConfig load_service_config(const std::filesystem::path& path);

struct AuditRecord {
  std::string request_id;
  std::string received_at;
  std::string client_visible_text;
  GuardTrace trace;
  GuardDecision decision = GuardDecision::Allowed;
  long latency_ms = 0;
};

// Append-only JSONL sink and the single serialization point of the service:
// one line per completed request, written and flushed under a lock before
// the HTTP response leaves, so lines never interleave.
class AuditLog {
 public:
  // Opens the file in append mode; throws Error(AuditWriteFailure) when the
  // path cannot be opened for writing.
  explicit AuditLog(std::filesystem::path path, bool redact = false);

  // Throws Error(AuditWriteFailure) when the write or flush fails. The
  // caller decides whether that is fatal (the gateway answers anyway and
  // surfaces a counter on /healthz).
  void append(const AuditRecord& record);

  long lines_written() const { return lines_.load(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  bool redact_;
  std::mutex mutex_;
  std::ofstream out_;
  std::atomic<long> lines_{0};
};

// The backend plus the guard collaborators assembled from one config.
// Inverter and judge share the generation backend, mirroring a deployment
// where one model plays every role.
struct GuardStack {
  std::shared_ptr<Backend> backend;
  std::shared_ptr<Inverter> inverter;
  std::shared_ptr<SafetyEvaluator> evaluator;
};

GuardStack build_guard_stack(const ServiceConfig& config);

// HTTP front end: POST /v1/chat/completions (guarded or pass-through per
// config.mode) and GET /healthz. Blocked verdicts are application content
// and return 200 with the refusal text; transport-level failures map to
// 400/413/429/502. The hidden initial response of a Blocked request exists
// nowhere but the audit log.
class GatewayServer {
 public:
  GatewayServer(ServiceConfig config, std::shared_ptr<Backend> backend,
                std::shared_ptr<Inverter> inverter, std::shared_ptr<SafetyEvaluator> evaluator);
  ~GatewayServer();

  GatewayServer(const GatewayServer&) = delete;
  GatewayServer& operator=(const GatewayServer&) = delete;

  // Binds the configured address (a ":0" port picks an ephemeral one, see
  // port()) and serves on a background thread until stop(). Throws
  // Error(ConfigError) when the address cannot be bound.
  void start();
  void stop();

  int port() const { return port_; }
  const ServiceConfig& config() const { return config_; }
  const AuditLog& audit() const { return *audit_; }
  long audit_failures() const { return audit_failures_.load(); }
  long requests_completed() const { return completed_.load(); }

 private:
  struct Impl;  // keeps the HTTP server types out of this header

  void install_routes();

  ServiceConfig config_;
  std::shared_ptr<Backend> backend_;
  std::shared_ptr<Inverter> inverter_;
  std::shared_ptr<SafetyEvaluator> evaluator_;
  std::unique_ptr<AuditLog> audit_;
  std::unique_ptr<Impl> impl_;
  int port_ = 0;
  std::atomic<int> in_flight_{0};
  std::atomic<long> completed_{0};
  std::atomic<long> audit_failures_{0};
};

}  // namespace recguard
