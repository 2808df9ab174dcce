#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "recguard/corpus.hpp"
#include "recguard/guard.hpp"

namespace recguard {

// Outcome of one (entry, trial) execution.  Failed records a transport or
// pipeline error; failed trials never enter rate numerators or denominators.
enum class TrialOutcome { Allowed, Blocked, BaselineRefused, Failed };

const char* trial_outcome_name(TrialOutcome o);

// True for the outcomes that count as "the user did not get the answer".
inline bool trial_outcome_blocks(TrialOutcome o) {
  return o == TrialOutcome::Blocked || o == TrialOutcome::BaselineRefused;
}

bool outcome_satisfies(ExpectedGuarded expected, TrialOutcome outcome);
bool outcome_satisfies(ExpectedBaseline expected, TrialOutcome outcome);

enum class BenchVariant { Baseline, Guarded };

const char* bench_variant_name(BenchVariant v);

struct RunReport {
  std::string variant;
  std::string corpus_version;
  std::string config_digest;
  int trials = 0;
  // entry id → outcome per trial (length == trials)
  std::map<std::string, std::vector<TrialOutcome>> outcomes;
  // entry id → error detail for each Failed trial, in trial order
  std::map<std::string, std::vector<std::string>> failures;
  std::string started;
  std::string finished;
};

struct Metrics {
  std::string corpus_version;
  // Absent when the corpus has no entry of the respective class: no data is
  // reported as no data, not as zero.
  std::optional<double> adversarial_block_rate;
  std::optional<double> benign_refusal_rate;
  std::map<HarmCategory, double> per_category;
  std::map<WrapperKind, double> per_wrapper;
  // metric name → (low, high), 95% Wilson score interval
  std::map<std::string, std::pair<double, double>> wilson_95;
  long adversarial_trials = 0;
  long benign_trials = 0;
  long failed_trials = 0;
};

struct ComparisonRow {
  std::string metric;
  std::optional<double> baseline;
  std::optional<double> guarded;
  std::optional<double> delta;  // guarded − baseline when both present
};

struct Comparison {
  std::vector<ComparisonRow> rows;
  // ids of entries whose guarded outcomes violate expected_guarded
  std::vector<std::string> expectation_violations;
};

struct BenchOptions {
  // 0 → library default thread count.  Trials run in parallel only when
  // every collaborator declares itself safe for concurrent use.
  int max_threads = 0;
  bool force_serial = false;
};

// Replays every entry `trials` times per requested variant.  Baseline sends
// the prompt straight to the backend and derives the outcome with the
// refusal detector; Guarded runs the full pipeline.  Per-trial errors are
// recorded as Failed outcomes and never abort the run.
std::map<BenchVariant, RunReport> run_benchmark(const Corpus& corpus, int trials,
                                                const std::set<BenchVariant>& variants,
                                                const GuardConfig& config, Backend& backend,
                                                Inverter& inverter, SafetyEvaluator& evaluator,
                                                const BenchOptions& options = {});

// Single-threaded reference runner; the parallel runner must agree with it
// outcome-for-outcome on a deterministic backend.
std::map<BenchVariant, RunReport> run_benchmark_serial(const Corpus& corpus, int trials,
                                                       const std::set<BenchVariant>& variants,
                                                       const GuardConfig& config, Backend& backend,
                                                       Inverter& inverter,
                                                       SafetyEvaluator& evaluator);

// 95% Wilson score interval for `successes` out of `trials` (trials >= 1).
std::pair<double, double> wilson_interval(long successes, long trials);

// Aggregates a report into rates.  Category attribution goes through the
// deterministic oracle (lexicon over the wrapper-stripped entry text), so
// metrics do not depend on which evaluator produced the decisions.
// Throws Error(CoverageMismatch) when report and entries disagree.
Metrics compute_metrics(const RunReport& report, const std::vector<CorpusEntry>& entries,
                        const Lexicon& lexicon, const WrapperLibrary& wrappers);

// Per-metric deltas (guarded − baseline).  Throws
// Error(CorpusVersionMismatch) when the metrics come from different corpus
// versions.  The 4-argument form also flags expectation violations.
Comparison compare_reports(const Metrics& baseline, const Metrics& guarded);
Comparison compare_reports(const Metrics& baseline, const Metrics& guarded,
                           const RunReport& guarded_report,
                           const std::vector<CorpusEntry>& entries);

std::string format_metrics_table(const Metrics& metrics);
std::string format_comparison_table(const Comparison& comparison);

}  // namespace recguard
