// Command-line front end: one-shot guarded exchanges, the HTTP service,
// corpus benchmarks, corpus validation, and audit-trace lookup.

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "recguard/corpus.hpp"
#include "recguard/errors.hpp"
#include "recguard/gateway.hpp"
#include "recguard/guard.hpp"
#include "recguard/harness.hpp"
#include "recguard/json_io.hpp"
#include "recguard/safety.hpp"
#include "recguard/wrappers.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::atomic<bool> g_stop{false};

void handle_signal(int) { g_stop.store(true); }

std::string default_data_dir() {
  if (const char* env = std::getenv("RECGUARD_DATA_DIR"); env && *env) return env;
  return "data";
}

recguard::ServiceConfig local_config(const std::string& data_dir) {
  recguard::ServiceConfig cfg;
  cfg.data_dir = data_dir;
  cfg.backend.kind = "scripted";
  cfg.backend.endpoint = (fs::path(data_dir) / "scripts" / "default_rules.jsonl").string();
  return cfg;
}

int cmd_ask(const std::string& data_dir, const std::string& prompt, bool show_trace) {
  auto cfg = local_config(data_dir);
  auto stack = recguard::build_guard_stack(cfg);
  auto outcome =
      recguard::run_pipeline(prompt, cfg.guard, *stack.backend, *stack.inverter, *stack.evaluator);

  std::cout << "decision: " << recguard::guard_decision_name(outcome.decision) << "\n";
  std::cout << outcome.final_text << "\n";
  if (show_trace) {
    std::cout << "\n--- trace ---\n";
    const auto& t = outcome.trace;
    std::cout << "backend: " << t.backend_id << "\n";
    std::cout << "started: " << t.timestamp << "\n";
    if (outcome.decision != recguard::GuardDecision::Allowed) {
      // The hidden response is shown here only because the caller asked to
      // inspect the pipeline; the service never returns it.
      std::cout << "hidden initial response: " << t.initial_response << "\n";
    }
    for (std::size_t i = 0; i < t.inverted_candidates.size(); ++i) {
      std::cout << "candidate " << (i + 1) << ": " << t.inverted_candidates[i].text << "\n";
      if (i < t.verdicts.size()) {
        std::cout << "  verdict: " << recguard::safety_label_name(t.verdicts[i].label);
        if (t.verdicts[i].rationale) std::cout << " (" << *t.verdicts[i].rationale << ")";
        std::cout << "\n";
      }
    }
    for (const auto& [stage, ms] : t.stage_durations_ms) {
      std::cout << "stage " << stage << ": " << ms << " ms\n";
    }
  }
  return 0;
}

int cmd_serve(const std::string& config_path) {
  auto cfg = recguard::load_service_config(config_path);
  auto stack = recguard::build_guard_stack(cfg);
  recguard::GatewayServer server(cfg, stack.backend, stack.inverter, stack.evaluator);
  server.start();
  std::cout << "listening on " << cfg.listen_address << " ("
            << (cfg.mode == recguard::ServiceMode::Guarded ? "guarded" : "baseline")
            << " mode), audit -> " << cfg.audit_path << "\n";
  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);
  while (!g_stop.load()) {
    std::this_thread::sleep_for(std::chrono::milliseconds(200));
  }
  std::cout << "shutting down\n";
  server.stop();
  return 0;
}

int cmd_bench(const std::string& data_dir, const std::string& corpus_path, int trials,
              const std::string& variant) {
  auto cfg = local_config(data_dir);
  auto stack = recguard::build_guard_stack(cfg);
  auto corpus = recguard::load_corpus(corpus_path);
  auto lexicon = recguard::Lexicon::load(fs::path(data_dir) / "lexicon.jsonl");
  auto wrappers = recguard::WrapperLibrary::load(fs::path(data_dir) / "wrappers.jsonl",
                                                 fs::path(data_dir) / "words_10k.txt");

  std::set<recguard::BenchVariant> variants;
  if (variant == "baseline" || variant == "both") variants.insert(recguard::BenchVariant::Baseline);
  if (variant == "guarded" || variant == "both") variants.insert(recguard::BenchVariant::Guarded);

  auto reports = recguard::run_benchmark(corpus, trials, variants, cfg.guard, *stack.backend,
                                         *stack.inverter, *stack.evaluator);

  std::map<recguard::BenchVariant, recguard::Metrics> metrics;
  for (const auto& [v, report] : reports) {
    metrics.emplace(v, recguard::compute_metrics(report, corpus.entries, lexicon, wrappers));
    std::cout << "== " << recguard::bench_variant_name(v) << " (" << report.trials
              << " trials/entry) ==\n";
    std::cout << recguard::format_metrics_table(metrics.at(v)) << "\n";
  }
  if (variants.size() == 2) {
    auto comparison = recguard::compare_reports(metrics.at(recguard::BenchVariant::Baseline),
                                                metrics.at(recguard::BenchVariant::Guarded),
                                                reports.at(recguard::BenchVariant::Guarded),
                                                corpus.entries);
    std::cout << "== baseline vs guarded ==\n";
    std::cout << recguard::format_comparison_table(comparison);
  }
  return 0;
}

int cmd_corpus_validate(const std::string& path) {
  auto issues = recguard::validate_corpus(path);
  if (!issues.empty()) {
    for (const auto& issue : issues) {
      std::cerr << recguard::errc_name(issue.code) << ": " << issue.detail << "\n";
    }
    return 2;
  }
  auto corpus = recguard::load_corpus(path);
  std::size_t adversarial = 0, benign = 0, borderline = 0;
  for (const auto& e : corpus.entries) {
    if (e.cls == recguard::EntryClass::Adversarial) ++adversarial;
    else if (e.cls == recguard::EntryClass::Benign) ++benign;
    else ++borderline;
  }
  std::cout << path << ": " << corpus.entries.size() << " entries (" << adversarial
            << " adversarial, " << benign << " benign, " << borderline
            << " borderline), version " << corpus.version.substr(0, 12) << "\n";
  return 0;
}

int cmd_trace_show(const std::string& audit_path, const std::string& request_id) {
  std::ifstream in(audit_path);
  if (!in) {
    std::cerr << "cannot open audit log: " << audit_path << "\n";
    return 2;
  }
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      std::cerr << audit_path << ":" << lineno << ": unparseable audit line skipped\n";
      continue;
    }
    if (j.value("request_id", "") == request_id) {
      std::cout << j.dump(2) << "\n";
      return 0;
    }
  }
  std::cerr << "request id not found in " << audit_path << ": " << request_id << "\n";
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"recursive-guard chat service and benchmark harness"};
  app.require_subcommand(1);

  std::string data_dir = default_data_dir();
  app.add_option("--data-dir", data_dir, "directory with rules, templates, lexicon, wrappers")
      ->envname("RECGUARD_DATA_DIR");

  std::string prompt;
  bool show_trace = false;
  auto* ask = app.add_subcommand("ask", "run one guarded exchange and print the decision");
  ask->add_option("prompt", prompt, "the user prompt")->required();
  ask->add_flag("--trace", show_trace, "print the full pipeline trace");

  std::string config_path;
  auto* serve = app.add_subcommand("serve", "run the HTTP service");
  serve->add_option("--config", config_path, "service configuration file")->required();

  std::string corpus_path;
  int trials = 5;
  std::string variant = "both";
  auto* bench = app.add_subcommand("bench", "replay a corpus and print metrics");
  bench->add_option("--corpus", corpus_path, "corpus JSONL file")->required();
  bench->add_option("--trials", trials, "trials per entry")->check(CLI::PositiveNumber);
  bench->add_option("--variant", variant, "baseline, guarded, or both")
      ->check(CLI::IsMember({"baseline", "guarded", "both"}));

  auto* corpus_cmd = app.add_subcommand("corpus", "corpus utilities");
  corpus_cmd->require_subcommand(1);
  std::string validate_path;
  auto* validate = corpus_cmd->add_subcommand("validate", "check a corpus file");
  validate->add_option("file", validate_path, "corpus JSONL file")->required();

  auto* trace_cmd = app.add_subcommand("trace", "audit log utilities");
  trace_cmd->require_subcommand(1);
  std::string audit_path, request_id;
  auto* show = trace_cmd->add_subcommand("show", "print one audit record");
  show->add_option("file", audit_path, "audit JSONL file")->required();
  show->add_option("request_id", request_id, "request id to look up")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      // --help and friends
      return app.exit(e);
    }
    std::cerr << e.what() << "\n\n" << app.help() << std::flush;
    return 1;
  }

  try {
    if (*ask) return cmd_ask(data_dir, prompt, show_trace);
    if (*serve) return cmd_serve(config_path);
    if (*bench) return cmd_bench(data_dir, corpus_path, trials, variant);
    if (*validate) return cmd_corpus_validate(validate_path);
    if (*show) return cmd_trace_show(audit_path, request_id);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
