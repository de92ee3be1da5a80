#include <fstream>

#include "json.hpp"

#include "mfm/error.hpp"
#include "mfm/llmclient.hpp"

namespace mfm {

namespace detail {
extern const std::string_view kPromptEnglish;
extern const std::string_view kPromptChinese;
extern const std::string_view kPromptItalian;
}  // namespace detail

std::string_view to_string(PromptLanguage l) noexcept {
  switch (l) {
    case PromptLanguage::english: return "en";
    case PromptLanguage::chinese: return "zh";
    case PromptLanguage::italian: return "it";
  }
  return "en";
}

std::optional<PromptLanguage> parse_prompt_language(std::string_view s) noexcept {
  if (s == "en" || s == "english") return PromptLanguage::english;
  if (s == "zh" || s == "chinese") return PromptLanguage::chinese;
  if (s == "it" || s == "italian") return PromptLanguage::italian;
  return std::nullopt;
}

std::string_view system_prompt_template(PromptLanguage lang) noexcept {
  switch (lang) {
    case PromptLanguage::english: return detail::kPromptEnglish;
    case PromptLanguage::chinese: return detail::kPromptChinese;
    case PromptLanguage::italian: return detail::kPromptItalian;
  }
  return detail::kPromptEnglish;
}

std::string system_prompt(PromptLanguage lang, std::string_view culture) {
  constexpr std::string_view placeholder = "{culture}";
  if (culture.empty()) culture = "Chinese";
  std::string out(system_prompt_template(lang));
  for (auto pos = out.find(placeholder); pos != std::string::npos; pos = out.find(placeholder, pos + culture.size())) {
    out.replace(pos, placeholder.size(), culture);
  }
  return out;
}

std::string answer_json(const LabelSet& labels, std::string_view rationale) {
  nlohmann::ordered_json j;
  j["rationale"] = rationale;
  std::string names;
  for (Label l : labels.to_vector()) {
    if (!names.empty()) names += ", ";
    names += to_string(l);
  }
  j["labels"] = std::move(names);
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

std::vector<Shot> load_shots(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::vector<Shot> shots;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(path, lineno, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("id") || !j.contains("text") || !j.contains("labels")) {
      throw ParseError(path, lineno, "shot needs id, text and labels");
    }
    Shot s;
    s.id = j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump();
    s.text = j["text"].get<std::string>();
    auto add = [&](const nlohmann::json& v) {
      if (!v.is_string()) throw ParseError(path, lineno, "labels must be strings");
      auto l = parse_label(v.get<std::string>());
      if (!l) throw ParseError(path, lineno, "unknown label \"" + v.get<std::string>() + "\"");
      s.labels.insert(*l);
    };
    if (j["labels"].is_array()) {
      for (const auto& v : j["labels"]) add(v);
    } else {
      add(j["labels"]);
    }
    if (s.labels.empty()) throw ParseError(path, lineno, "shot has no labels");
    if (j.contains("rationale") && j["rationale"].is_string()) s.rationale = j["rationale"].get<std::string>();
    shots.push_back(std::move(s));
  }
  return shots;
}

std::vector<Shot> shots_from_dataset(const Dataset& source, std::span<const std::string> ids) {
  std::vector<Shot> shots;
  for (const auto& id : ids) {
    const Document* d = source.find(id);
    if (!d) throw ValidationError("shot " + id + " not found in " + source.name());
    Shot s;
    s.id = d->id;
    s.text = d->text;
    s.labels.insert(d->gold);
    shots.push_back(std::move(s));
  }
  return shots;
}

std::vector<ChatMessage> build_prompt(const Document& target, std::span<const Shot> shots, PromptLanguage lang,
                                      std::string_view culture,
                                      const std::unordered_set<std::string>& benchmark_ids) {
  std::vector<ChatMessage> messages;
  messages.reserve(2 + 2 * shots.size());
  messages.push_back({"system", system_prompt(lang, culture)});
  for (const auto& shot : shots) {
    if (shot.id == target.id || benchmark_ids.contains(shot.id)) {
      throw ValidationError("few-shot example " + shot.id + " is a benchmark document");
    }
    messages.push_back({"user", shot.text});
    messages.push_back({"assistant", answer_json(shot.labels, shot.rationale)});
  }
  messages.push_back({"user", target.text});
  return messages;
}

}  // namespace mfm
