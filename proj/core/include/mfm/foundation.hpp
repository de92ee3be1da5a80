#pragma once

#include <array>
#include <bitset>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mfm {

/// Closed label set. The first five values are the moral foundations (named by
/// their virtue pole); nonmoral only occurs as a training gold label, none and
/// unknown only in predictions.
enum class Label : std::uint8_t {
  care = 0,
  fairness,
  loyalty,
  authority,
  sanctity,
  nonmoral,
  none,
  unknown,
};

inline constexpr std::size_t kFoundationCount = 5;

using FoundationArray = std::array<double, kFoundationCount>;

inline constexpr std::size_t kLabelCount = 8;

inline constexpr std::array<Label, kFoundationCount> kFoundations = {
    Label::care, Label::fairness, Label::loyalty, Label::authority, Label::sanctity};

/// Column order used by report tables (Auth, Care, Fair, Loya, Sanc).
inline constexpr std::array<Label, kFoundationCount> kReportOrder = {
    Label::authority, Label::care, Label::fairness, Label::loyalty, Label::sanctity};

constexpr bool is_foundation(Label l) noexcept {
  return static_cast<std::uint8_t>(l) < kFoundationCount;
}

constexpr std::size_t index_of(Label l) noexcept { return static_cast<std::size_t>(l); }

std::string_view to_string(Label l) noexcept;

/// Four-letter column heading ("Auth", "Care", ...).
std::string_view short_name(Label l) noexcept;

/// Parses a canonical lowercase name. Also accepts the virtue/vice pair form
/// ("care/harm") and "non-moral". Case-insensitive.
std::optional<Label> parse_label(std::string_view text) noexcept;

/// Like parse_label but throws ValidationError mentioning `context`.
Label parse_label_or_throw(std::string_view text, std::string_view context);

/// Small value-type set over Label, iterated in enum order.
class LabelSet {
 public:
  LabelSet() = default;
  LabelSet(std::initializer_list<Label> labels) {
    for (Label l : labels) insert(l);
  }

  void insert(Label l) noexcept { bits_.set(index_of(l)); }
  void erase(Label l) noexcept { bits_.reset(index_of(l)); }
  bool contains(Label l) const noexcept { return bits_.test(index_of(l)); }
  bool empty() const noexcept { return bits_.none(); }
  std::size_t size() const noexcept { return bits_.count(); }

  /// True when at least one moral foundation is present.
  bool has_foundation() const noexcept;
  std::size_t foundation_count() const noexcept;

  std::vector<Label> to_vector() const;

  friend bool operator==(const LabelSet&, const LabelSet&) = default;

 private:
  std::bitset<kLabelCount> bits_;
};

/// "care,fairness" style rendering; "{}" when empty.
std::string to_string(const LabelSet& set);

}  // namespace mfm
