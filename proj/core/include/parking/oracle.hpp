#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "parking/site_state.hpp"

namespace parking::oracle {

inline constexpr std::size_t kMinSites = 3;
inline constexpr std::size_t kMaxSites = 8;

/// Ring configuration in base 4; site k occupies bits 2k and 2k+1.
using Config = std::uint32_t;

constexpr SiteState site_of(Config config, std::size_t site) {
  return SiteState(static_cast<int>((config >> (2 * site)) & 3U));
}

constexpr Config with_site(Config config, std::size_t site, SiteState state) {
  const Config mask = Config{3} << (2 * site);
  return (config & ~mask) | (static_cast<Config>(state.code()) << (2 * site));
}

Config encode(std::span<const SiteState> states);

/// Sparse generator of the jump process on a ring of 3..8 sites. Every
/// off-diagonal rate is 1; the diagonal holds minus the number of enabled
/// transitions.
class GeneratorMatrix {
 public:
  ModelVariant model() const { return model_; }
  std::size_t sites() const { return sites_; }
  std::size_t dimension() const { return diagonal_.size(); }

  /// Configurations reachable from `from` by one unit-rate transition.
  std::span<const Config> targets(Config from) const {
    return {targets_.data() + offsets_[from], targets_.data() + offsets_[from + 1]};
  }
  double diagonal(Config from) const { return diagonal_[from]; }
  double row_sum(Config from) const {
    return diagonal_[from] + static_cast<double>(targets(from).size());
  }
  bool jammed(Config config) const { return targets(config).empty(); }

 private:
  friend GeneratorMatrix build_generator(ModelVariant model, std::size_t sites);

  ModelVariant model_ = ModelVariant::NoScreening;
  std::size_t sites_ = 0;
  std::vector<std::size_t> offsets_;
  std::vector<Config> targets_;
  std::vector<double> diagonal_;
};

/// Throws std::invalid_argument unless 3 <= sites <= 8.
GeneratorMatrix build_generator(ModelVariant model, std::size_t sites);

/// Probability vector over all 4^N ring configurations.
class FullDistribution {
 public:
  /// Point mass on the all-vacant ring.
  static FullDistribution vacuum(std::size_t sites);

  std::size_t sites() const { return sites_; }
  std::span<const double> probs() const { return probs_; }
  double operator[](Config config) const { return probs_[config]; }
  double total() const;
  double min_entry() const;

 private:
  friend std::vector<FullDistribution> evolve(const GeneratorMatrix&, std::span<const double>);

  FullDistribution(std::size_t sites, std::vector<double> probs)
      : sites_(sites), probs_(std::move(probs)) {}

  std::size_t sites_ = 0;
  std::vector<double> probs_;
};

inline constexpr double kMaxEvolveStep = 1e-3;

/// Distribution at each of the (nondecreasing) `times`, solving the forward
/// equation from the vacuum with classical RK4 and steps of at most 1e-3.
/// Only configurations reachable from the vacuum are integrated; the rest
/// stay at probability zero.
std::vector<FullDistribution> evolve(const GeneratorMatrix& generator,
                                     std::span<const double> times);

FullDistribution evolve(const GeneratorMatrix& generator, double t);

/// Probability that the window of consecutive sites starting at `offset`
/// shows `pattern`.
double marginal(const FullDistribution& dist, std::span<const SiteState> pattern,
                std::size_t offset = 0);

/// Total probability of configurations with no enabled transition.
double jammed_mass(const GeneratorMatrix& generator, const FullDistribution& dist);

}  // namespace parking::oracle
