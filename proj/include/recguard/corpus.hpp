#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "recguard/errors.hpp"
#include "recguard/wrappers.hpp"

namespace recguard {

enum class EntryClass { Adversarial, Benign, Borderline };
enum class ExpectedGuarded { Blocked, Allowed, Either };
enum class ExpectedBaseline { Refused, Answered, Either };

const char* entry_class_name(EntryClass c);
const char* expected_guarded_name(ExpectedGuarded e);
const char* expected_baseline_name(ExpectedBaseline e);

// One benchmark prompt.  Borderline entries feed the over-refusal metric;
// their expectations are usually Either because their outcome is a judgment
// call, not a contract.
struct CorpusEntry {
  std::string id;
  std::string text;
  EntryClass cls = EntryClass::Benign;
  std::set<WrapperKind> wrappers;
  ExpectedGuarded expected_guarded = ExpectedGuarded::Either;
  ExpectedBaseline expected_baseline = ExpectedBaseline::Either;
  std::string source_note;
};

struct Corpus {
  std::string version;  // digest of the corpus file
  std::vector<CorpusEntry> entries;
};

struct CorpusIssue {
  Errc code = Errc::SchemaViolation;
  std::string detail;  // includes file:line
};

// Parses and validates without throwing; every problem found is returned.
std::vector<CorpusIssue> validate_corpus(const std::filesystem::path& path);

// Strict load: throws the first issue as Error(issue.code).  An empty file
// yields an empty corpus with a warning on stderr.
Corpus load_corpus(const std::filesystem::path& path);

}  // namespace recguard
