#include "recguard/safety.hpp"

#include <json.hpp>

#include <cctype>
#include <regex>
#include <sstream>

#include "recguard/errors.hpp"
#include "recguard/refusals.hpp"
#include "recguard/text.hpp"
#include "recguard/util.hpp"

namespace recguard {

const char* harm_category_name(HarmCategory c) {
  switch (c) {
    case HarmCategory::IllegalActivity: return "IllegalActivity";
    case HarmCategory::PrivateDataExtraction: return "PrivateDataExtraction";
    case HarmCategory::HateOrStereotype: return "HateOrStereotype";
    case HarmCategory::Disinformation: return "Disinformation";
    case HarmCategory::MalwareOrCyber: return "MalwareOrCyber";
  }
  return "?";
}

std::optional<HarmCategory> harm_category_from_name(std::string_view name) {
  for (HarmCategory c : kAllHarmCategories) {
    if (name == harm_category_name(c)) return c;
  }
  return std::nullopt;
}

const char* safety_label_name(SafetyLabel l) {
  switch (l) {
    case SafetyLabel::Safe: return "Safe";
    case SafetyLabel::Unsafe: return "Unsafe";
    case SafetyLabel::Uncertain: return "Uncertain";
  }
  return "?";
}

Lexicon Lexicon::load(const std::filesystem::path& jsonl_path) {
  std::string content = util::read_file(jsonl_path);

  Lexicon lex;
  lex.version_ = util::sha256_hex(content).substr(0, 12);

  std::istringstream in(content);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(Errc::SchemaViolation,
                  jsonl_path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    std::string category_name = j.value("category", "");
    auto category = harm_category_from_name(category_name);
    if (!category) {
      throw Error(Errc::SchemaViolation, jsonl_path.string() + ":" + std::to_string(lineno) +
                                             ": unknown category '" + category_name + "'");
    }
    std::string term = text::casefold(text::trim(j.value("term", "")));
    if (term.empty()) {
      throw Error(Errc::SchemaViolation,
                  jsonl_path.string() + ":" + std::to_string(lineno) + ": empty term");
    }
    auto& terms = lex.entries_[*category];
    for (const auto& existing : terms) {
      if (existing == term) {
        throw Error(Errc::SchemaViolation, jsonl_path.string() + ":" + std::to_string(lineno) +
                                               ": duplicate term '" + term + "'");
      }
    }
    terms.push_back(std::move(term));
  }

  for (HarmCategory c : kAllHarmCategories) {
    auto it = lex.entries_.find(c);
    if (it == lex.entries_.end() || it->second.empty()) {
      throw Error(Errc::SchemaViolation, jsonl_path.string() + ": category " +
                                             std::string(harm_category_name(c)) + " has no terms");
    }
  }
  return lex;
}

std::size_t Lexicon::term_count() const {
  std::size_t n = 0;
  for (const auto& [category, terms] : entries_) n += terms.size();
  return n;
}

SafetyVerdict classify_lexicon(const std::string& prompt, const Lexicon& lexicon) {
  if (text::trim(prompt).empty()) {
    throw std::invalid_argument("classify_lexicon: empty prompt");
  }
  std::string folded = text::casefold(prompt);

  SafetyVerdict verdict;
  verdict.evaluator_id = "lexicon:" + lexicon.version();
  for (const auto& [category, terms] : lexicon.entries()) {
    for (const auto& term : terms) {
      if (folded.find(term) != std::string::npos) {
        verdict.categories.insert(category);
        verdict.matched_terms.push_back(term);
      }
    }
  }
  verdict.label = verdict.matched_terms.empty() ? SafetyLabel::Safe : SafetyLabel::Unsafe;
  return verdict;
}

int parse_score(const std::string& sample) {
  static const std::regex int_re(R"([-+]?\d+)");
  std::smatch m;
  if (!std::regex_search(sample, m, int_re)) {
    throw Error(Errc::NoScoreFound, "no integer token in \"" + sample.substr(0, 80) + "\"");
  }
  long value;
  try {
    value = std::stol(m[0].str());
  } catch (const std::out_of_range&) {
    value = m[0].str()[0] == '-' ? -10 : 10;
  }
  if (value < -10) return -10;
  if (value > 10) return 10;
  return static_cast<int>(value);
}

namespace {

// Leading word match: `word` at the start of the trimmed text, not merely a
// prefix of a longer word ("note" must not count as "no").
bool leads_with_word(const std::string& folded_trimmed, std::string_view word) {
  if (folded_trimmed.size() < word.size()) return false;
  if (folded_trimmed.compare(0, word.size(), word) != 0) return false;
  if (folded_trimmed.size() == word.size()) return true;
  unsigned char next = static_cast<unsigned char>(folded_trimmed[word.size()]);
  return !std::isalpha(next);
}

}  // namespace

SafetyLabel parse_verdict(const std::string& sample) {
  std::string folded = text::casefold(text::trim(sample));
  static const std::regex negative_re(R"((^|[^a-z])negative([^a-z]|$))");
  if (std::regex_search(folded, negative_re)) return SafetyLabel::Unsafe;
  if (detect_refusal(folded)) return SafetyLabel::Unsafe;
  if (leads_with_word(folded, "yes")) return SafetyLabel::Safe;
  if (leads_with_word(folded, "no")) return SafetyLabel::Unsafe;
  return SafetyLabel::Uncertain;
}

SafetyVerdict judge_via_llm(const std::string& prompt, Backend& backend,
                            const GuardConfig& config, const InstructionTemplate& tmpl,
                            const std::string& caution_text) {
  if (text::trim(prompt).empty()) {
    throw std::invalid_argument("judge_via_llm: empty prompt");
  }

  std::map<std::string, std::string> bindings{{"question", prompt}};
  if (config.counterbalance_caution && !caution_text.empty()) {
    bindings["caution"] = text::trim(caution_text) + "\n\n";
  }

  ChatRequest req;
  req.messages.push_back({Role::User, render(tmpl, bindings)});
  req.temperature = config.generation.temperature;
  req.max_tokens = config.generation.max_tokens;
  req.seed = config.generation.seed;

  ChatCompletion completion = backend.complete(req);

  SafetyVerdict verdict;
  verdict.label = parse_verdict(completion.text);
  verdict.rationale = completion.text;
  verdict.evaluator_id = "judge:" + tmpl.version + "@" + backend.id();
  return verdict;
}

LexiconEvaluator::LexiconEvaluator(std::shared_ptr<const Lexicon> lexicon)
    : lexicon_(std::move(lexicon)) {
  if (!lexicon_) throw std::invalid_argument("LexiconEvaluator: null lexicon");
}

SafetyVerdict LexiconEvaluator::evaluate(const std::string& question) {
  return classify_lexicon(question, *lexicon_);
}

std::string LexiconEvaluator::id() const { return "lexicon:" + lexicon_->version(); }

LlmJudgeEvaluator::LlmJudgeEvaluator(std::shared_ptr<Backend> backend, GuardConfig config,
                                     InstructionTemplate judge_template, std::string caution_text)
    : backend_(std::move(backend)),
      config_(std::move(config)),
      tmpl_(std::move(judge_template)),
      caution_text_(std::move(caution_text)) {
  if (!backend_) throw std::invalid_argument("LlmJudgeEvaluator: null backend");
}

SafetyVerdict LlmJudgeEvaluator::evaluate(const std::string& question) {
  return judge_via_llm(question, *backend_, config_, tmpl_, caution_text_);
}

std::string LlmJudgeEvaluator::id() const {
  return "judge:" + tmpl_.version + "@" + backend_->id();
}

bool LlmJudgeEvaluator::concurrent_safe() const { return backend_->concurrent_safe(); }

}  // namespace recguard
