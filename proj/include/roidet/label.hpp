#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace roidet {

// Index order matches classifier output rows: melanoma, nevus, other.
enum class Label : int { Melanoma = 0, Nevus = 1, Other = 2 };

inline constexpr int kNumClasses = 3;
inline constexpr std::array<Label, kNumClasses> kAllLabels = {Label::Melanoma, Label::Nevus,
                                                              Label::Other};

constexpr int index_of(Label l) { return static_cast<int>(l); }

constexpr std::string_view to_string(Label l) {
  switch (l) {
    case Label::Melanoma: return "melanoma";
    case Label::Nevus: return "nevus";
    case Label::Other: return "other";
  }
  return "?";
}

constexpr std::optional<Label> parse_label(std::string_view s) {
  if (s == "melanoma") return Label::Melanoma;
  if (s == "nevus") return Label::Nevus;
  if (s == "other") return Label::Other;
  return std::nullopt;
}

constexpr bool is_slide_label(Label l) { return l != Label::Other; }

}  // namespace roidet
