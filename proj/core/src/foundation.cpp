#include "mfm/foundation.hpp"

#include <algorithm>
#include <cctype>

#include "mfm/error.hpp"

namespace mfm {

namespace {

constexpr std::array<std::string_view, kLabelCount> kNames = {
    "care", "fairness", "loyalty", "authority", "sanctity", "nonmoral", "none", "unknown"};

constexpr std::array<std::string_view, kLabelCount> kShortNames = {
    "Care", "Fair", "Loya", "Auth", "Sanc", "NonM", "None", "Unkn"};

// Vice-pole names, accepted as the second half of "virtue/vice".
constexpr std::array<std::string_view, kFoundationCount> kViceNames = {
    "harm", "cheating", "betrayal", "subversion", "degradation"};

std::string lowercase_trimmed(std::string_view text) {
  auto begin = text.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) return {};
  auto end = text.find_last_not_of(" \t\r\n");
  std::string out(text.substr(begin, end - begin + 1));
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

std::string_view to_string(Label l) noexcept { return kNames[index_of(l)]; }

std::string_view short_name(Label l) noexcept { return kShortNames[index_of(l)]; }

std::optional<Label> parse_label(std::string_view text) noexcept {
  std::string s = lowercase_trimmed(text);
  if (s == "non-moral" || s == "non_moral" || s == "non moral") return Label::nonmoral;
  if (auto slash = s.find('/'); slash != std::string::npos) {
    std::string virtue = s.substr(0, slash);
    std::string vice = s.substr(slash + 1);
    for (std::size_t i = 0; i < kFoundationCount; ++i) {
      if (virtue == kNames[i] && vice == kViceNames[i]) return static_cast<Label>(i);
    }
    return std::nullopt;
  }
  for (std::size_t i = 0; i < kLabelCount; ++i) {
    if (s == kNames[i]) return static_cast<Label>(i);
  }
  return std::nullopt;
}

Label parse_label_or_throw(std::string_view text, std::string_view context) {
  if (auto l = parse_label(text)) return *l;
  throw ValidationError(std::string(context) + ": unknown label \"" + std::string(text) + "\"");
}

bool LabelSet::has_foundation() const noexcept { return foundation_count() > 0; }

std::size_t LabelSet::foundation_count() const noexcept {
  std::size_t n = 0;
  for (Label f : kFoundations) n += contains(f) ? 1 : 0;
  return n;
}

std::vector<Label> LabelSet::to_vector() const {
  std::vector<Label> out;
  for (std::size_t i = 0; i < kLabelCount; ++i) {
    if (bits_.test(i)) out.push_back(static_cast<Label>(i));
  }
  return out;
}

std::string to_string(const LabelSet& set) {
  if (set.empty()) return "{}";
  std::string out;
  for (Label l : set.to_vector()) {
    if (!out.empty()) out += ',';
    out += to_string(l);
  }
  return out;
}

}  // namespace mfm
