#include "recguard/templates.hpp"

#include <regex>
#include <sstream>

#include "recguard/errors.hpp"
#include "recguard/text.hpp"
#include "recguard/util.hpp"

namespace recguard {

namespace {

const std::regex kPlaceholderRe(R"(\{\{([A-Za-z0-9_]+)\}\})");

std::set<std::string> scan_placeholders(const std::string& text) {
  std::set<std::string> names;
  auto begin = std::sregex_iterator(text.begin(), text.end(), kPlaceholderRe);
  for (auto it = begin; it != std::sregex_iterator(); ++it) {
    names.insert((*it)[1].str());
  }
  return names;
}

}  // namespace

InstructionTemplate make_template(std::string id, std::string text,
                                  const std::set<std::string>& optional_placeholders) {
  InstructionTemplate tmpl;
  tmpl.id = std::move(id);
  tmpl.text = std::move(text);
  tmpl.version = util::sha256_hex(tmpl.text).substr(0, 12);
  for (const auto& name : scan_placeholders(tmpl.text)) {
    if (!optional_placeholders.count(name)) tmpl.required_placeholders.insert(name);
  }
  return tmpl;
}

std::string render(const InstructionTemplate& tmpl,
                   const std::map<std::string, std::string>& bindings) {
  std::vector<std::string> missing;
  for (const auto& name : tmpl.required_placeholders) {
    if (!bindings.count(name)) missing.push_back(name);
  }
  if (!missing.empty()) {
    std::string detail = "template '" + tmpl.id + "' missing binding(s):";
    for (const auto& name : missing) detail += " " + name;
    throw Error(Errc::MissingPlaceholder, detail);
  }

  // Single left-to-right pass; binding values are not re-expanded.
  std::string out;
  out.reserve(tmpl.text.size());
  std::size_t pos = 0;
  auto begin = std::sregex_iterator(tmpl.text.begin(), tmpl.text.end(), kPlaceholderRe);
  for (auto it = begin; it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    out.append(tmpl.text, pos, static_cast<std::size_t>(m.position(0)) - pos);
    auto found = bindings.find(m[1].str());
    if (found != bindings.end()) out += found->second;
    pos = static_cast<std::size_t>(m.position(0) + m.length(0));
  }
  out.append(tmpl.text, pos, std::string::npos);
  return out;
}

const char* command_keyword_name(CommandKeyword k) {
  switch (k) {
    case CommandKeyword::Prompt: return "prompt";
    case CommandKeyword::Response: return "response";
    case CommandKeyword::Score: return "score";
    case CommandKeyword::Explanation: return "explanation";
    case CommandKeyword::Repeat: return "repeat";
  }
  return "?";
}

std::optional<CommandKeyword> detect_command(std::string_view user_text) {
  std::string key = text::casefold(text::trim(user_text));
  if (key == "prompt") return CommandKeyword::Prompt;
  if (key == "response") return CommandKeyword::Response;
  if (key == "score") return CommandKeyword::Score;
  if (key == "explanation") return CommandKeyword::Explanation;
  if (key == "repeat") return CommandKeyword::Repeat;
  return std::nullopt;
}

namespace {

std::string load_pinned(const std::filesystem::path& dir, const std::string& name,
                        const std::map<std::string, std::string>& pins) {
  auto path = dir / name;
  std::string text = util::read_file(path);
  auto pin = pins.find(name);
  if (pin == pins.end()) {
    throw Error(Errc::SchemaViolation, "digests.sha256 has no entry for " + name);
  }
  std::string actual = util::sha256_hex(text);
  if (actual != pin->second) {
    throw Error(Errc::SchemaViolation,
                name + " does not match its pinned digest (expected " + pin->second +
                    ", got " + actual + ")");
  }
  return text;
}

std::map<std::string, std::string> parse_digest_manifest(const std::string& body,
                                                         const std::filesystem::path& path) {
  std::map<std::string, std::string> pins;
  std::istringstream in(body);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = text::trim(line);
    if (t.empty()) continue;
    // "<64 hex>  <name>" as written by sha256sum.
    auto space = t.find(' ');
    if (space != 64 || t.size() < 67) {
      throw Error(Errc::SchemaViolation,
                  path.string() + ":" + std::to_string(lineno) + ": malformed digest line");
    }
    std::string digest = t.substr(0, 64);
    std::string name = text::trim(t.substr(space));
    if (!name.empty() && name.front() == '*') name.erase(0, 1);  // binary-mode marker
    pins[name] = digest;
  }
  return pins;
}

}  // namespace

TemplateLibrary TemplateLibrary::load(const std::filesystem::path& dir) {
  auto manifest_path = dir / "digests.sha256";
  auto pins = parse_digest_manifest(util::read_file(manifest_path), manifest_path);

  TemplateLibrary lib;
  lib.dir_ = dir;
  lib.final_instructions_ =
      make_template("final_instructions", load_pinned(dir, "final_instructions.txt", pins));
  lib.initial_instructions_ =
      make_template("initial_instructions", load_pinned(dir, "initial_instructions.txt", pins));
  lib.inversion_prompt_ =
      make_template("inversion_prompt", load_pinned(dir, "inversion_prompt.txt", pins));
  lib.judge_prompt_ =
      make_template("judge_prompt", load_pinned(dir, "judge_prompt.txt", pins), {"caution"});
  lib.judge_caution_ = load_pinned(dir, "judge_caution.txt", pins);

  if (!lib.final_instructions_.required_placeholders.empty()) {
    throw Error(Errc::SchemaViolation, "final_instructions.txt must not contain placeholders");
  }
  return lib;
}

}  // namespace recguard
