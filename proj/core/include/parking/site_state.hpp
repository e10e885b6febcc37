#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace parking {

/// Joint occupation code of one vertex in the two parking lines.
///
/// The code reads the two layer bits as a binary number: bit 0 is the first
/// line, bit 1 the second line.
///
///   0  both lines vacant
///   1  first line only
///   2  second line only
///   3  both lines occupied
class SiteState {
 public:
  constexpr SiteState() = default;

  constexpr explicit SiteState(int code) : code_(static_cast<std::uint8_t>(code)) {
    if (code < 0 || code > 3) {
      throw std::invalid_argument("SiteState code must be in [0, 3], got " +
                                  std::to_string(code));
    }
  }

  static constexpr SiteState vacant() { return SiteState(0); }

  constexpr int code() const { return code_; }
  constexpr bool first_line() const { return (code_ & 1U) != 0; }
  constexpr bool second_line() const { return (code_ & 2U) != 0; }
  constexpr int occupied_lines() const { return (code_ & 1U) + ((code_ >> 1) & 1U); }

  friend constexpr bool operator==(SiteState, SiteState) = default;

 private:
  std::uint8_t code_ = 0;
};

enum class ModelVariant : std::uint8_t { NoScreening = 0, Screening = 1 };

inline constexpr ModelVariant kAllVariants[] = {ModelVariant::NoScreening,
                                                ModelVariant::Screening};

constexpr std::string_view to_string(ModelVariant model) {
  return model == ModelVariant::Screening ? "screening" : "noscreening";
}

inline ModelVariant parse_model(std::string_view name) {
  if (name == "noscreening") return ModelVariant::NoScreening;
  if (name == "screening") return ModelVariant::Screening;
  throw std::invalid_argument("unknown model '" + std::string(name) +
                              "' (expected noscreening or screening)");
}

/// States of a site and its two ring neighbours, in left-to-right order.
struct NeighborhoodTriple {
  SiteState left;
  SiteState center;
  SiteState right;

  /// Dense index in [0, 64): left * 16 + center * 4 + right.
  constexpr int index() const { return left.code() * 16 + center.code() * 4 + right.code(); }

  static constexpr NeighborhoodTriple from_index(int index) {
    return {SiteState((index >> 4) & 3), SiteState((index >> 2) & 3), SiteState(index & 3)};
  }

  friend constexpr bool operator==(const NeighborhoodTriple&, const NeighborhoodTriple&) = default;
};

inline constexpr int kTripleCount = 64;

/// What an arrival attempt does to the centre of its neighbourhood.
enum class TransitionKind : std::uint8_t {
  None,                 // attempt discarded
  FirstLine,            // 0 -> 1
  SecondLineFromEmpty,  // 0 -> 2
  SecondLineOnTop,      // 1 -> 3
};

/// Centre state after `kind` is applied to `center`. None leaves it unchanged.
constexpr SiteState apply(TransitionKind kind, SiteState center) {
  switch (kind) {
    case TransitionKind::FirstLine:
      return SiteState(1);
    case TransitionKind::SecondLineFromEmpty:
      return SiteState(2);
    case TransitionKind::SecondLineOnTop:
      return SiteState(3);
    case TransitionKind::None:
      break;
  }
  return center;
}

}  // namespace parking
