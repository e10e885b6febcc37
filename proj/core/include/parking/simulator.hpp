#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "parking/rates.hpp"
#include "parking/site_state.hpp"

namespace parking {

/// Consecutive site states, read left to right along the ring.
using Pattern = std::vector<SiteState>;

/// Parses "0,1,0" (or "010") into a pattern. Throws std::invalid_argument.
Pattern parse_pattern(std::string_view text);

/// Compact label such as "010", used for column names.
std::string pattern_label(const Pattern& pattern);

/// Ring of sites with a mask of frozen (arrival-suppressed) sites.
class Lattice {
 public:
  explicit Lattice(std::size_t size, std::span<const std::size_t> frozen_sites = {});

  std::size_t size() const { return codes_.size(); }
  SiteState state(std::size_t site) const { return SiteState(codes_[site]); }
  bool frozen(std::size_t site) const { return frozen_[site] != 0; }
  std::span<const std::uint8_t> codes() const { return codes_; }
  std::size_t unfrozen_count() const { return unfrozen_count_; }

  std::size_t left_of(std::size_t site) const { return site == 0 ? size() - 1 : site - 1; }
  std::size_t right_of(std::size_t site) const { return site + 1 == size() ? 0 : site + 1; }

  NeighborhoodTriple neighborhood(std::size_t site) const {
    return {state(left_of(site)), state(site), state(right_of(site))};
  }

  /// Overwrites one site. Throws std::logic_error on a frozen site.
  void set(std::size_t site, SiteState value);

  /// Applies one arrival attempt at `site`; returns the new centre code.
  std::uint8_t attempt(ModelVariant model, std::size_t site) {
    const int index = codes_[left_of(site)] * 16 + codes_[site] * 4 + codes_[right_of(site)];
    const std::uint8_t next = RateTable::instance().outcome_code(model, index);
    codes_[site] = next;
    return next;
  }

  /// First violated structural invariant, if any: first-line exclusion,
  /// second-line exclusion, second-line support, frozen sites vacant.
  std::optional<std::string> invariant_violation() const;

 private:
  std::vector<std::uint8_t> codes_;
  std::vector<std::uint8_t> frozen_;
  std::size_t unfrozen_count_ = 0;
};

/// Fraction of ring windows matching `pattern`, over windows that contain no
/// frozen site. Throws std::invalid_argument if no such window exists.
double estimate_pattern_density(const Lattice& lattice, std::span<const SiteState> pattern);

struct SimConfig {
  std::size_t size = 10000;
  double t_max = 15.0;
  ModelVariant model = ModelVariant::NoScreening;
  std::uint64_t master_seed = 1;
  std::size_t replicas = 100;
  std::vector<double> sample_times;
  std::vector<std::size_t> frozen_sites;
  std::vector<Pattern> patterns;
  bool record_events = false;

  /// Throws std::invalid_argument describing the first problem found.
  void validate() const;
};

/// 0, step, 2*step, ... up to t_max (t_max itself always included).
std::vector<double> default_sample_times(double t_max, double step = 0.25);

struct DensitySample {
  double time = 0.0;
  std::array<double, 4> site_density{};
  std::vector<double> pattern_density;  // aligned with SimConfig::patterns

  double line1() const { return site_density[1] + site_density[3]; }
  double line2() const { return site_density[2] + site_density[3]; }
};

struct AttemptEvent {
  double time;
  std::size_t site;
  SiteState before;
  SiteState after;
};

struct ReplicaResult {
  std::vector<DensitySample> samples;
  Lattice final_lattice;
  std::uint64_t attempts = 0;
  std::vector<AttemptEvent> events;  // only with SimConfig::record_events
};

/// Seed of replica `replica_index`: splitmix64 applied to
/// master_seed + (replica_index + 1) * 0x9E3779B97F4A7C15. Both steps are
/// bijections on 64-bit words, so distinct indices give distinct seeds.
std::uint64_t derive_replica_seed(std::uint64_t master_seed, std::uint64_t replica_index);

/// Simulates one replica of the jump process from the all-vacant ring.
///
/// Attempts arrive as a Poisson process of rate 1 per unfrozen site. The
/// horizon is cut into blocks; each block draws a Poisson count, uniform
/// times and uniform unfrozen sites, and is processed in (time, site) order.
/// A sample at time s sees every attempt with time <= s.
ReplicaResult run_replica(const SimConfig& config, std::size_t replica_index);

/// Runs all replicas, possibly on several threads, and returns their samples
/// in replica-index order. `threads == 0` picks the hardware concurrency.
std::vector<std::vector<DensitySample>> run_replicas(const SimConfig& config,
                                                     unsigned threads = 1);

/// Estimates of the one-sided densities next to frozen site 0.
struct OneSidedSample {
  double time = 0.0;
  std::array<double, 3> f{};  // state of site 1 is 0, 1, 2
  double f3 = 0.0;            // state of site 1 is 3
  double r = 0.0;             // site 1 in state 1 and site 2 in state 0
};

/// Per-time indicator samples of one replica (each value is 0 or 1).
std::vector<OneSidedSample> one_sided_replica(const SimConfig& config,
                                              std::size_t replica_index);

/// one_sided_replica for every replica, in replica-index order.
std::vector<std::vector<OneSidedSample>> run_one_sided_replicas(const SimConfig& config,
                                                                unsigned threads = 1);

/// Replica averages of one_sided_replica. Requires frozen_sites {0} or {0, 2}
/// and size >= 200.
std::vector<OneSidedSample> run_one_sided(const SimConfig& config, unsigned threads = 1);

inline constexpr std::size_t kMinOneSidedSize = 200;

}  // namespace parking
