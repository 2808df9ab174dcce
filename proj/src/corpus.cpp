#include "recguard/corpus.hpp"

#include <json.hpp>

#include <cstdio>
#include <map>
#include <sstream>

#include "recguard/text.hpp"
#include "recguard/util.hpp"

namespace recguard {

const char* entry_class_name(EntryClass c) {
  switch (c) {
    case EntryClass::Adversarial: return "Adversarial";
    case EntryClass::Benign: return "Benign";
    case EntryClass::Borderline: return "Borderline";
  }
  return "?";
}

const char* expected_guarded_name(ExpectedGuarded e) {
  switch (e) {
    case ExpectedGuarded::Blocked: return "Blocked";
    case ExpectedGuarded::Allowed: return "Allowed";
    case ExpectedGuarded::Either: return "Either";
  }
  return "?";
}

const char* expected_baseline_name(ExpectedBaseline e) {
  switch (e) {
    case ExpectedBaseline::Refused: return "Refused";
    case ExpectedBaseline::Answered: return "Answered";
    case ExpectedBaseline::Either: return "Either";
  }
  return "?";
}

namespace {

template <typename Enum>
bool parse_enum_field(const std::string& value, Enum* out,
                      std::initializer_list<std::pair<const char*, Enum>> table) {
  for (const auto& [name, e] : table) {
    if (value == name) {
      *out = e;
      return true;
    }
  }
  return false;
}

struct ParseResult {
  std::vector<CorpusEntry> entries;
  std::vector<CorpusIssue> issues;
};

ParseResult parse_corpus(const std::string& content, const std::string& where) {
  ParseResult result;
  std::map<std::string, int> first_line_of_id;

  std::istringstream in(content);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    std::string at = where + ":" + std::to_string(lineno);

    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      result.issues.push_back({Errc::SchemaViolation, at + ": " + e.what()});
      continue;
    }
    if (!j.is_object()) {
      result.issues.push_back({Errc::SchemaViolation, at + ": entry is not an object"});
      continue;
    }

    CorpusEntry entry;
    entry.id = j.value("id", "");
    entry.text = j.value("text", "");
    entry.source_note = j.value("source_note", "");

    bool ok = true;
    if (entry.id.empty()) {
      result.issues.push_back({Errc::SchemaViolation, at + ": field 'id' missing or empty"});
      ok = false;
    }
    if (entry.text.empty()) {
      result.issues.push_back({Errc::SchemaViolation, at + ": field 'text' missing or empty"});
      ok = false;
    }

    std::string cls = j.value("class", "");
    if (!parse_enum_field(cls, &entry.cls,
                          {std::pair<const char*, EntryClass>{"Adversarial", EntryClass::Adversarial},
                           {"Benign", EntryClass::Benign},
                           {"Borderline", EntryClass::Borderline}})) {
      result.issues.push_back({Errc::SchemaViolation, at + ": field 'class' has bad value '" + cls + "'"});
      ok = false;
    }

    std::string eg = j.value("expected_guarded", "");
    if (!parse_enum_field(eg, &entry.expected_guarded,
                          {std::pair<const char*, ExpectedGuarded>{"Blocked", ExpectedGuarded::Blocked},
                           {"Allowed", ExpectedGuarded::Allowed},
                           {"Either", ExpectedGuarded::Either}})) {
      result.issues.push_back(
          {Errc::SchemaViolation, at + ": field 'expected_guarded' has bad value '" + eg + "'"});
      ok = false;
    }

    std::string eb = j.value("expected_baseline", "");
    if (!parse_enum_field(eb, &entry.expected_baseline,
                          {std::pair<const char*, ExpectedBaseline>{"Refused", ExpectedBaseline::Refused},
                           {"Answered", ExpectedBaseline::Answered},
                           {"Either", ExpectedBaseline::Either}})) {
      result.issues.push_back(
          {Errc::SchemaViolation, at + ": field 'expected_baseline' has bad value '" + eb + "'"});
      ok = false;
    }

    if (j.contains("wrappers")) {
      if (!j["wrappers"].is_array()) {
        result.issues.push_back({Errc::SchemaViolation, at + ": field 'wrappers' is not an array"});
        ok = false;
      } else {
        for (const auto& w : j["wrappers"]) {
          auto kind = wrapper_kind_from_name(w.is_string() ? w.get<std::string>() : "");
          if (!kind) {
            result.issues.push_back(
                {Errc::SchemaViolation, at + ": unknown wrapper kind " + w.dump()});
            ok = false;
            continue;
          }
          entry.wrappers.insert(*kind);
        }
      }
    }

    if (ok && entry.cls == EntryClass::Benign && !entry.wrappers.empty()) {
      result.issues.push_back(
          {Errc::SchemaViolation, at + ": benign entry '" + entry.id + "' lists wrappers"});
      ok = false;
    }

    if (!entry.id.empty()) {
      auto [it, inserted] = first_line_of_id.emplace(entry.id, lineno);
      if (!inserted) {
        result.issues.push_back({Errc::DuplicateId,
                                 at + ": id '" + entry.id + "' already used on line " +
                                     std::to_string(it->second)});
        ok = false;
      }
    }

    if (ok) result.entries.push_back(std::move(entry));
  }
  return result;
}

}  // namespace

std::vector<CorpusIssue> validate_corpus(const std::filesystem::path& path) {
  std::string content;
  try {
    content = util::read_file(path);
  } catch (const Error& e) {
    return {{e.code(), e.what()}};
  }
  return parse_corpus(content, path.string()).issues;
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::string content = util::read_file(path);
  ParseResult parsed = parse_corpus(content, path.string());
  if (!parsed.issues.empty()) {
    const CorpusIssue& first = parsed.issues.front();
    std::string detail = first.detail;
    if (parsed.issues.size() > 1) {
      detail += " (+" + std::to_string(parsed.issues.size() - 1) + " more issues)";
    }
    throw Error(first.code, detail);
  }
  if (parsed.entries.empty()) {
    std::fprintf(stderr, "warning: corpus %s contains no entries\n", path.string().c_str());
  }

  Corpus corpus;
  corpus.version = util::sha256_hex(content).substr(0, 12);
  corpus.entries = std::move(parsed.entries);
  return corpus;
}

}  // namespace recguard
