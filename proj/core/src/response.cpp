#include <algorithm>
#include <cctype>
#include <utility>

#include "json.hpp"
#include "mfm/llmclient.hpp"
#include "text_util.hpp"

namespace mfm {

std::string_view to_string(ParseStatus s) noexcept {
  switch (s) {
    case ParseStatus::parsed: return "parsed";
    case ParseStatus::repaired: return "repaired";
    case ParseStatus::failed: return "failed";
  }
  return "failed";
}

namespace {

struct Alias {
  std::string_view text;
  Label label;
};

// Names recognised when scanning free text. ASCII names need word boundaries.
constexpr Alias kFoundationAliases[] = {
    {"care", Label::care},          {"fairness", Label::fairness},   {"loyalty", Label::loyalty},
    {"authority", Label::authority}, {"sanctity", Label::sanctity},   {"关爱", Label::care},
    {"关怀", Label::care},           {"公平", Label::fairness},       {"忠诚", Label::loyalty},
    {"权威", Label::authority},      {"圣洁", Label::sanctity},       {"神圣", Label::sanctity},
    {"cura", Label::care},          {"equità", Label::fairness},     {"equita", Label::fairness},
    {"lealtà", Label::loyalty},      {"lealta", Label::loyalty},      {"autorità", Label::authority},
    {"autorita", Label::authority},  {"santità", Label::sanctity},    {"santita", Label::sanctity},
    {"purezza", Label::sanctity},
};

constexpr Alias kOtherAliases[] = {
    {"non-moral", Label::none}, {"nonmoral", Label::none}, {"none", Label::none},
    {"无", Label::none},        {"nessuno", Label::none},  {"unknown", Label::unknown},
    {"未知", Label::unknown},   {"sconosciuto", Label::unknown},
};

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool is_word_byte(char c) {
  auto u = static_cast<unsigned char>(c);
  return std::isalnum(u) || c == '_';
}

std::optional<Label> label_from_name(std::string_view name) {
  auto trimmed = detail::trim(name);
  if (auto l = parse_label(trimmed)) return *l == Label::nonmoral ? Label::none : *l;
  auto lower = ascii_lower(trimmed);
  for (const auto& a : kFoundationAliases) {
    if (lower == a.text) return a.label;
  }
  for (const auto& a : kOtherAliases) {
    if (lower == a.text) return a.label;
  }
  return std::nullopt;
}

// Applies the truncation and none/unknown rules to labels in stated order.
LabelSet normalize(const std::vector<Label>& ordered) {
  LabelSet out;
  for (Label l : ordered) {
    if (is_foundation(l) && out.foundation_count() < kMaxPredictedFoundations) out.insert(l);
  }
  if (out.has_foundation()) return out;
  if (std::find(ordered.begin(), ordered.end(), Label::none) != ordered.end()) return LabelSet{Label::none};
  if (std::find(ordered.begin(), ordered.end(), Label::unknown) != ordered.end()) return LabelSet{Label::unknown};
  return out;
}

// Splits "care, fairness" style strings.
std::vector<std::string_view> split_names(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  auto emit = [&](std::size_t end) {
    auto piece = detail::trim(s.substr(start, end - start));
    if (!piece.empty()) out.push_back(piece);
  };
  for (std::size_t i = 0; i < s.size();) {
    std::size_t sep = 0;
    if (s[i] == ',' || s[i] == ';' || s[i] == '|' || s[i] == '/') sep = 1;
    else if (s.substr(i, 3) == "、" || s.substr(i, 3) == "，") sep = 3;
    if (sep) {
      emit(i);
      i += sep;
      start = i;
    } else {
      ++i;
    }
  }
  emit(s.size());
  return out;
}

// Labels from a JSON object; nullopt when any label is not recognised.
std::optional<ParsedResponse> from_object(const nlohmann::json& j) {
  if (!j.is_object()) return std::nullopt;
  const nlohmann::json* labels = nullptr;
  for (const char* key : {"labels", "label"}) {
    if (j.contains(key)) {
      labels = &j[key];
      break;
    }
  }
  if (!labels) return std::nullopt;
  std::vector<Label> ordered;
  auto add = [&](const nlohmann::json& v) -> bool {
    if (!v.is_string()) return false;
    const auto text = v.get<std::string>();
    // "care/harm" style pairs are one label, otherwise '/' separates names.
    if (auto whole = label_from_name(text)) {
      ordered.push_back(*whole);
      return true;
    }
    auto names = split_names(text);
    if (names.empty()) return true;
    for (auto n : names) {
      auto l = label_from_name(n);
      if (!l) return false;
      ordered.push_back(*l);
    }
    return true;
  };
  if (labels->is_array()) {
    for (const auto& v : *labels) {
      if (!add(v)) return std::nullopt;
    }
  } else if (!add(*labels)) {
    return std::nullopt;
  }
  ParsedResponse r;
  r.labels = ordered.empty() ? LabelSet{Label::none} : normalize(ordered);
  if (j.contains("rationale") && j["rationale"].is_string()) r.rationale = j["rationale"].get<std::string>();
  return r;
}

std::optional<nlohmann::json> try_json(std::string_view text) {
  auto j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) return std::nullopt;
  return j;
}

// Foundation names in order of first appearance; none/unknown only if no
// foundation is named.
std::vector<Label> scan_names(std::string_view text) {
  const auto lower = ascii_lower(text);
  auto scan = [&](std::span<const Alias> aliases) {
    std::vector<std::pair<std::size_t, Label>> hits;
    for (const auto& a : aliases) {
      const bool ascii = std::all_of(a.text.begin(), a.text.end(), [](char c) { return (c & 0x80) == 0; });
      for (auto pos = lower.find(a.text); pos != std::string::npos; pos = lower.find(a.text, pos + 1)) {
        const auto end = pos + a.text.size();
        if (ascii && ((pos > 0 && is_word_byte(lower[pos - 1])) || (end < lower.size() && is_word_byte(lower[end])))) {
          continue;
        }
        hits.emplace_back(pos, a.label);
        break;
      }
    }
    std::stable_sort(hits.begin(), hits.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    std::vector<Label> out;
    for (const auto& h : hits) out.push_back(h.second);
    return out;
  };
  auto found = scan(kFoundationAliases);
  if (!found.empty()) return found;
  return scan(kOtherAliases);
}

}  // namespace

ParsedResponse parse_response(std::string_view text) {
  const auto trimmed = detail::trim(text);
  if (auto j = try_json(trimmed)) {
    if (auto r = from_object(*j)) {
      r->status = ParseStatus::parsed;
      return *r;
    }
  }

  std::optional<std::string> rationale;
  if (auto open = trimmed.find('{'); open != std::string_view::npos) {
    if (auto close = trimmed.rfind('}'); close != std::string_view::npos && close > open) {
      if (auto j = try_json(trimmed.substr(open, close - open + 1))) {
        if (auto r = from_object(*j)) {
          r->status = ParseStatus::repaired;
          return *r;
        }
        if (j->is_object() && j->contains("rationale") && (*j)["rationale"].is_string()) {
          rationale = (*j)["rationale"].get<std::string>();
        }
      }
    }
  }

  // Prefer names after a "labels" key so the rationale does not leak labels.
  std::string_view region = trimmed;
  if (auto key = ascii_lower(trimmed).find("label"); key != std::string::npos) region = trimmed.substr(key + 5);
  auto names = scan_names(region);
  if (names.empty() && region.size() != trimmed.size()) names = scan_names(trimmed);
  ParsedResponse r;
  r.rationale = std::move(rationale);
  if (!names.empty()) {
    r.labels = normalize(names);
    r.status = ParseStatus::repaired;
    return r;
  }
  r.labels = LabelSet{Label::unknown};
  r.status = ParseStatus::failed;
  return r;
}

}  // namespace mfm
