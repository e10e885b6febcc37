#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "parking/ode.hpp"
#include "parking/simulator.hpp"

namespace parking::analysis {

struct AggregateEstimate {
  double mean = 0.0;
  double std_error = 0.0;  // sqrt(unbiased sample variance / replicas)
  std::size_t replicas = 0;
};

/// Mean and standard error over replicas. The result does not depend on the
/// order of `values` (they are summed in sorted order). Needs >= 2 values.
AggregateEstimate aggregate(std::span<const double> values);

/// Aggregates `extract(sample)` over replicas at the sample with time `time`.
template <class Sample, class Extract>
AggregateEstimate aggregate_at(std::span<const std::vector<Sample>> replicas, double time,
                               Extract&& extract) {
  std::vector<double> values;
  values.reserve(replicas.size());
  for (const auto& replica : replicas) {
    const Sample* hit = nullptr;
    for (const Sample& s : replica) {
      if (s.time > time - 1e-9 && s.time < time + 1e-9) {
        hit = &s;
        break;
      }
    }
    if (hit == nullptr) {
      throw std::invalid_argument("time " + std::to_string(time) + " was not sampled");
    }
    values.push_back(extract(*hit));
  }
  return aggregate(values);
}

enum class ReferenceSource { Ode, Oracle, ClosedForm };

std::string_view to_string(ReferenceSource source);

struct ComparisonPolicy {
  double z_threshold = 4.0;
  double abs_floor = 1e-3;
};

struct ComparisonReport {
  std::string observable;
  double time = 0.0;
  double reference = 0.0;
  ReferenceSource source = ReferenceSource::Oracle;
  AggregateEstimate estimate;
  double z_score = 0.0;  // +-inf when the estimate has zero spread and differs
  bool pass = false;
  /// Empty on pass. Failures against infinite-lattice references (ode,
  /// closed-form) are labelled "finite-size"; against the oracle "mismatch".
  std::string note;
};

/// Pass iff |z| <= z_threshold or |mean - reference| <= abs_floor.
ComparisonReport compare(std::string observable, double time, double reference,
                         ReferenceSource source, const AggregateEstimate& estimate,
                         const ComparisonPolicy& policy);

/// line2 / line1. Throws std::invalid_argument if line1 <= 0.
double increase_factor(double line1, double line2);

/// Neighbour pair (s, s') of a vacant site for which the triple density
/// factorizes as f(s) f(s') e^{-t}.
struct FactorizationPair {
  int left;
  int right;

  friend bool operator==(const FactorizationPair&, const FactorizationPair&) = default;
};

/// Pairs where a vacant centre implies the centre never received a car:
/// (0,0), (0,1), (1,0), (1,1), (2,2) without screening. With screening a
/// centre between two second-line cars can stay vacant after an arrival, so
/// (2,2) is dropped.
std::vector<FactorizationPair> admissible_factorization_pairs(ModelVariant model);

Pattern factorization_pattern(FactorizationPair pair);

inline constexpr std::size_t kMinFactorizationSize = 1000;

/// Compares plain bulk densities of (s, 0, s') with f(s) f(s') e^{-t} from the
/// ODE. `replicas` are the samples of a run with `config`, whose patterns must
/// include each requested triple. Throws std::invalid_argument for a pair
/// outside the admissible set, a ring below 1000 sites, or a missing pattern.
std::vector<ComparisonReport> check_factorization(
    const SimConfig& config, std::span<const std::vector<DensitySample>> replicas,
    const ode::Trajectory& trajectory, std::span<const double> times,
    std::span<const FactorizationPair> pairs, const ComparisonPolicy& policy = {});

/// Site densities and requested patterns against exact oracle marginals on the
/// same ring (size 3..8), at every sample time of the run.
std::vector<ComparisonReport> compare_with_oracle(
    const SimConfig& config, std::span<const std::vector<DensitySample>> replicas,
    std::span<const double> times, const ComparisonPolicy& policy = {});

/// Site densities, line densities and D(0,1,0) (when requested as a pattern)
/// against the infinite-lattice ODE; admissible factorization triples are
/// checked too when the ring has at least 1000 sites.
std::vector<ComparisonReport> compare_with_ode(
    const SimConfig& config, std::span<const std::vector<DensitySample>> replicas,
    const ode::Trajectory& trajectory, std::span<const double> times,
    const ComparisonPolicy& policy = {});

/// One-sided estimates against closed forms. `next_to_frozen` comes from a run
/// with site 0 frozen and is checked against exp(e^{-t} - 1) for f0 + f2
/// (model without screening only); `between_frozen` from a run with sites 0
/// and 2 frozen, checked against t e^{-t} for the state-1 fraction of site 1.
/// Either span may be empty.
std::vector<ComparisonReport> compare_with_closed_forms(
    ModelVariant model, std::span<const std::vector<OneSidedSample>> next_to_frozen,
    std::span<const std::vector<OneSidedSample>> between_frozen, std::span<const double> times,
    const ComparisonPolicy& policy = {});

/// Observable name of a pattern in reports, e.g. "D(0,1,0)".
std::string pattern_observable(const Pattern& pattern);

}  // namespace parking::analysis
