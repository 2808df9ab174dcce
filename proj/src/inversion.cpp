#include "recguard/inversion.hpp"

#include <regex>
#include <unordered_set>

#include "recguard/errors.hpp"
#include "recguard/text.hpp"

namespace recguard {

const char* inversion_source_name(InversionSource s) {
  switch (s) {
    case InversionSource::LlmInversion: return "LlmInversion";
    case InversionSource::RuleInversion: return "RuleInversion";
  }
  return "?";
}

std::vector<InvertedCandidate> parse_candidates(const std::string& completion_text, int k) {
  if (k < 1) throw std::invalid_argument("parse_candidates: k must be >= 1");

  static const std::regex line_re(R"(^\s*\d{1,3}\s*[.)]\s*(.*\S)\s*$)");
  std::vector<InvertedCandidate> out;
  std::unordered_set<std::string> seen;
  for (const auto& line : text::split_lines(completion_text)) {
    if (out.size() == static_cast<std::size_t>(k)) break;
    std::smatch m;
    if (!std::regex_match(line, m, line_re)) continue;
    std::string candidate = text::trim(m[1].str());
    std::string key = text::casefold(text::normalize_space(candidate));
    if (key.empty() || !seen.insert(key).second) continue;
    out.push_back({std::move(candidate), static_cast<int>(out.size()) + 1,
                   InversionSource::LlmInversion});
  }
  return out;
}

namespace {

std::vector<InvertedCandidate> run_inversion(const std::string& response_text, int k,
                                             Backend& backend, const InstructionTemplate& tmpl,
                                             const std::string* context) {
  if (k < 1) throw std::invalid_argument("invert_via_llm: k must be >= 1");
  if (text::trim(response_text).empty()) {
    throw Error(Errc::InversionFailure, "initial response is empty; nothing to invert");
  }

  std::string prompt = render(tmpl, {{"response", response_text}, {"count", std::to_string(k)}});
  if (context && !context->empty()) {
    prompt += "\n\nFor context, the message that produced the response was:\n" + *context;
  }

  ChatRequest req;
  req.messages.push_back({Role::User, prompt});
  req.temperature = 0.0;

  ChatCompletion completion = backend.complete(req);
  auto candidates = parse_candidates(completion.text, k);
  if (candidates.empty()) {
    std::string head = completion.text.substr(0, 120);
    throw Error(Errc::InversionFailure,
                "completion contains no numbered candidate lines: \"" + head + "\"");
  }
  return candidates;
}

}  // namespace

std::vector<InvertedCandidate> invert_via_llm(const std::string& response_text, int k,
                                              Backend& backend,
                                              const InstructionTemplate& tmpl) {
  return run_inversion(response_text, k, backend, tmpl, nullptr);
}

std::vector<InvertedCandidate> invert_via_llm(const std::string& response_text, int k,
                                              Backend& backend, const InstructionTemplate& tmpl,
                                              const std::string& original_prompt_context) {
  return run_inversion(response_text, k, backend, tmpl, &original_prompt_context);
}

std::vector<InvertedCandidate> rule_invert(const std::string& original_prompt,
                                           const WrapperLibrary& lib) {
  SimplifiedPrompt simplified = strip_wrappers(original_prompt, lib);
  return {{simplified.text, 1, InversionSource::RuleInversion}};
}

LlmInverter::LlmInverter(std::shared_ptr<Backend> backend, InstructionTemplate tmpl,
                         bool include_context)
    : backend_(std::move(backend)), tmpl_(std::move(tmpl)), include_context_(include_context) {
  if (!backend_) throw std::invalid_argument("LlmInverter: null backend");
}

std::vector<InvertedCandidate> LlmInverter::invert(const std::string& response_text,
                                                   const std::string& original_prompt, int k) {
  if (include_context_) {
    return invert_via_llm(response_text, k, *backend_, tmpl_, original_prompt);
  }
  return invert_via_llm(response_text, k, *backend_, tmpl_);
}

std::string LlmInverter::id() const { return "inverter:llm:" + tmpl_.version; }

bool LlmInverter::concurrent_safe() const { return backend_->concurrent_safe(); }

RuleInverter::RuleInverter(std::shared_ptr<const WrapperLibrary> lib) : lib_(std::move(lib)) {
  if (!lib_) throw std::invalid_argument("RuleInverter: null wrapper library");
}

std::vector<InvertedCandidate> RuleInverter::invert(const std::string& /*response_text*/,
                                                    const std::string& original_prompt,
                                                    int /*k*/) {
  return rule_invert(original_prompt, *lib_);
}

std::string RuleInverter::id() const { return "inverter:rules:" + lib_->version(); }

}  // namespace recguard
