#pragma once

#include <array>
#include <cstdint>

#include "parking/site_state.hpp"

namespace parking {

/// Exhaustive rate table of the two-line parking generator.
///
/// Rates are keyed by the state the centre site moves to (1, 2 or 3) and the
/// full neighbourhood triple. Every entry is 0 or 1. The table is built once
/// from the enumerated list of unit rates; every unlisted pair is 0.
class RateTable {
 public:
  static const RateTable& instance();

  int rate(ModelVariant model, SiteState target, const NeighborhoodTriple& triple) const {
    return rates_[variant_index(model)][target.code()][triple.index()];
  }

  /// Resulting centre code for an attempt on the triple with the given index.
  std::uint8_t outcome_code(ModelVariant model, int triple_index) const {
    return outcome_[variant_index(model)][triple_index];
  }

  TransitionKind outcome(ModelVariant model, const NeighborhoodTriple& triple) const {
    return kinds_[variant_index(model)][triple.index()];
  }

 private:
  RateTable();

  static constexpr int variant_index(ModelVariant model) { return static_cast<int>(model); }

  std::array<std::array<std::array<std::uint8_t, kTripleCount>, 4>, 2> rates_{};
  std::array<std::array<TransitionKind, kTripleCount>, 2> kinds_{};
  std::array<std::array<std::uint8_t, kTripleCount>, 2> outcome_{};
};

/// Rate (0 or 1) for the centre of `triple` to become `target`.
int transition_rate(ModelVariant model, SiteState target, const NeighborhoodTriple& triple);

/// The unique enabled transition at the centre of `triple`, or None.
///
/// A car first tries the first line; if that is blocked it tries the second
/// line; if that is blocked too the attempt is discarded.
TransitionKind attempt_outcome(ModelVariant model, const NeighborhoodTriple& triple);

}  // namespace parking
