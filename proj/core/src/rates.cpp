#include "parking/rates.hpp"

namespace parking {

namespace {

struct Triple {
  int left, center, right;
};

constexpr int index_of(Triple t) { return t.left * 16 + t.center * 4 + t.right; }

// Unit rates, keyed by resulting centre state.
constexpr Triple kFirstLineNoScreening[] = {{0, 0, 0}, {2, 0, 0}, {0, 0, 2}, {2, 0, 2}};
constexpr Triple kFirstLineScreening[] = {{0, 0, 0}};
constexpr Triple kSecondLineFromEmpty[] = {{1, 0, 0}, {0, 0, 1}, {1, 0, 1}};
constexpr Triple kSecondLineOnTop[] = {{0, 1, 0}};

}  // namespace

RateTable::RateTable() {
  auto mark = [this](ModelVariant model, int target, const auto& triples) {
    for (const Triple& t : triples) rates_[variant_index(model)][target][index_of(t)] = 1;
  };

  mark(ModelVariant::NoScreening, 1, kFirstLineNoScreening);
  mark(ModelVariant::Screening, 1, kFirstLineScreening);
  for (ModelVariant model : kAllVariants) {
    mark(model, 2, kSecondLineFromEmpty);
    mark(model, 3, kSecondLineOnTop);
  }

  for (ModelVariant model : kAllVariants) {
    const int v = variant_index(model);
    for (int i = 0; i < kTripleCount; ++i) {
      const int center = (i >> 2) & 3;
      TransitionKind kind = TransitionKind::None;
      if (rates_[v][1][i] == 1) {
        kind = TransitionKind::FirstLine;
      } else if (center == 0 && rates_[v][2][i] == 1) {
        kind = TransitionKind::SecondLineFromEmpty;
      } else if (center == 1 && rates_[v][3][i] == 1) {
        kind = TransitionKind::SecondLineOnTop;
      }
      kinds_[v][i] = kind;
      outcome_[v][i] = static_cast<std::uint8_t>(apply(kind, SiteState(center)).code());
    }
  }
}

const RateTable& RateTable::instance() {
  static const RateTable table;
  return table;
}

int transition_rate(ModelVariant model, SiteState target, const NeighborhoodTriple& triple) {
  return RateTable::instance().rate(model, target, triple);
}

TransitionKind attempt_outcome(ModelVariant model, const NeighborhoodTriple& triple) {
  return RateTable::instance().outcome(model, triple);
}

}  // namespace parking
