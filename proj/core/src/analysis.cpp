#include "parking/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "parking/oracle.hpp"

namespace parking::analysis {

namespace {

// Neumaier-compensated sum of already sorted values.
double compensated_sum(const std::vector<double>& values) {
  double sum = 0.0;
  double carry = 0.0;
  for (double v : values) {
    const double t = sum + v;
    carry += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  return sum + carry;
}

std::size_t pattern_index(const SimConfig& config, const Pattern& pattern) {
  const auto it = std::find(config.patterns.begin(), config.patterns.end(), pattern);
  if (it == config.patterns.end()) {
    throw std::invalid_argument("pattern " + pattern_label(pattern) + " was not sampled");
  }
  return static_cast<std::size_t>(it - config.patterns.begin());
}

const char* kSiteObservables[] = {"D0", "D1", "D2", "D3"};

}  // namespace

AggregateEstimate aggregate(std::span<const double> values) {
  if (values.size() < 2) throw std::invalid_argument("aggregate needs at least 2 replicas");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());
  const double mean = compensated_sum(sorted) / n;
  std::vector<double> squares;
  squares.reserve(sorted.size());
  for (double v : sorted) squares.push_back((v - mean) * (v - mean));
  std::sort(squares.begin(), squares.end());
  const double variance = compensated_sum(squares) / (n - 1.0);
  return {mean, std::sqrt(variance / n), sorted.size()};
}

std::string_view to_string(ReferenceSource source) {
  switch (source) {
    case ReferenceSource::Ode:
      return "ode";
    case ReferenceSource::Oracle:
      return "oracle";
    case ReferenceSource::ClosedForm:
      return "closed-form";
  }
  return "unknown";
}

ComparisonReport compare(std::string observable, double time, double reference,
                         ReferenceSource source, const AggregateEstimate& estimate,
                         const ComparisonPolicy& policy) {
  ComparisonReport report;
  report.observable = std::move(observable);
  report.time = time;
  report.reference = reference;
  report.source = source;
  report.estimate = estimate;
  const double diff = estimate.mean - reference;
  if (estimate.std_error > 0.0) {
    report.z_score = diff / estimate.std_error;
  } else if (diff == 0.0) {
    report.z_score = 0.0;
  } else {
    report.z_score = std::copysign(std::numeric_limits<double>::infinity(), diff);
  }
  report.pass = std::abs(report.z_score) <= policy.z_threshold || std::abs(diff) <= policy.abs_floor;
  if (!report.pass) report.note = source == ReferenceSource::Oracle ? "mismatch" : "finite-size";
  return report;
}

double increase_factor(double line1, double line2) {
  if (!(line1 > 0.0)) throw std::invalid_argument("increase factor needs a positive line1");
  return line2 / line1;
}

std::vector<FactorizationPair> admissible_factorization_pairs(ModelVariant model) {
  std::vector<FactorizationPair> pairs = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  if (model == ModelVariant::NoScreening) pairs.push_back({2, 2});
  return pairs;
}

Pattern factorization_pattern(FactorizationPair pair) {
  return {SiteState(pair.left), SiteState(0), SiteState(pair.right)};
}

std::string pattern_observable(const Pattern& pattern) {
  std::string out = "D(";
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    if (i > 0) out += ',';
    out += static_cast<char>('0' + pattern[i].code());
  }
  return out + ")";
}

std::vector<ComparisonReport> check_factorization(
    const SimConfig& config, std::span<const std::vector<DensitySample>> replicas,
    const ode::Trajectory& trajectory, std::span<const double> times,
    std::span<const FactorizationPair> pairs, const ComparisonPolicy& policy) {
  const auto admissible = admissible_factorization_pairs(config.model);
  for (const FactorizationPair& pair : pairs) {
    if (std::find(admissible.begin(), admissible.end(), pair) == admissible.end()) {
      throw std::invalid_argument("pair (" + std::to_string(pair.left) + "," +
                                  std::to_string(pair.right) +
                                  ") is outside the admissible factorization set");
    }
  }
  if (config.size < kMinFactorizationSize) {
    throw std::invalid_argument("factorization check needs a ring of at least 1000 sites");
  }
  if (trajectory.model != config.model) {
    throw std::invalid_argument("trajectory and simulation use different models");
  }

  std::vector<ComparisonReport> out;
  for (double t : times) {
    const ode::OdeState& y = trajectory.at(t);
    const double f[3] = {y.f0, y.f1, y.f2};
    for (const FactorizationPair& pair : pairs) {
      const Pattern pattern = factorization_pattern(pair);
      const std::size_t index = pattern_index(config, pattern);
      const AggregateEstimate est = aggregate_at<DensitySample>(
          replicas, t, [&](const DensitySample& s) { return s.pattern_density[index]; });
      const double reference = f[pair.left] * f[pair.right] * std::exp(-t);
      out.push_back(compare(pattern_observable(pattern), t, reference, ReferenceSource::Ode, est,
                            policy));
    }
  }
  return out;
}

std::vector<ComparisonReport> compare_with_oracle(
    const SimConfig& config, std::span<const std::vector<DensitySample>> replicas,
    std::span<const double> times, const ComparisonPolicy& policy) {
  const oracle::GeneratorMatrix gen = oracle::build_generator(config.model, config.size);
  if (!config.frozen_sites.empty()) {
    throw std::invalid_argument("oracle comparison needs a ring without frozen sites");
  }
  const auto dists = oracle::evolve(gen, times);

  std::vector<ComparisonReport> out;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double t = times[k];
    for (int s = 0; s < 4; ++s) {
      const Pattern single = {SiteState(s)};
      const AggregateEstimate est = aggregate_at<DensitySample>(
          replicas, t, [&](const DensitySample& d) { return d.site_density[s]; });
      out.push_back(compare(kSiteObservables[s], t, oracle::marginal(dists[k], single),
                            ReferenceSource::Oracle, est, policy));
    }
    for (std::size_t p = 0; p < config.patterns.size(); ++p) {
      const AggregateEstimate est = aggregate_at<DensitySample>(
          replicas, t, [&](const DensitySample& d) { return d.pattern_density[p]; });
      out.push_back(compare(pattern_observable(config.patterns[p]), t,
                            oracle::marginal(dists[k], config.patterns[p]),
                            ReferenceSource::Oracle, est, policy));
    }
  }
  return out;
}

std::vector<ComparisonReport> compare_with_ode(
    const SimConfig& config, std::span<const std::vector<DensitySample>> replicas,
    const ode::Trajectory& trajectory, std::span<const double> times,
    const ComparisonPolicy& policy) {
  if (trajectory.model != config.model) {
    throw std::invalid_argument("trajectory and simulation use different models");
  }
  const Pattern triple010 = {SiteState(0), SiteState(1), SiteState(0)};
  const bool has010 =
      std::find(config.patterns.begin(), config.patterns.end(), triple010) != config.patterns.end();

  std::vector<ComparisonReport> out;
  for (double t : times) {
    const ode::OdeState& y = trajectory.at(t);
    const double site_ref[4] = {y.d0, y.d1, y.d2, y.d3};
    for (int s = 0; s < 4; ++s) {
      const AggregateEstimate est = aggregate_at<DensitySample>(
          replicas, t, [&](const DensitySample& d) { return d.site_density[s]; });
      out.push_back(compare(kSiteObservables[s], t, site_ref[s], ReferenceSource::Ode, est, policy));
    }
    out.push_back(compare("line1", t, y.line1(), ReferenceSource::Ode,
                          aggregate_at<DensitySample>(
                              replicas, t, [](const DensitySample& d) { return d.line1(); }),
                          policy));
    out.push_back(compare("line2", t, y.line2(), ReferenceSource::Ode,
                          aggregate_at<DensitySample>(
                              replicas, t, [](const DensitySample& d) { return d.line2(); }),
                          policy));
    if (has010) {
      const std::size_t index = pattern_index(config, triple010);
      out.push_back(compare(pattern_observable(triple010), t, y.d010, ReferenceSource::Ode,
                            aggregate_at<DensitySample>(replicas, t,
                                                        [&](const DensitySample& d) {
                                                          return d.pattern_density[index];
                                                        }),
                            policy));
    }
  }

  if (config.size >= kMinFactorizationSize) {
    std::vector<FactorizationPair> sampled;
    for (const FactorizationPair& pair : admissible_factorization_pairs(config.model)) {
      const Pattern pattern = factorization_pattern(pair);
      if (std::find(config.patterns.begin(), config.patterns.end(), pattern) !=
          config.patterns.end()) {
        sampled.push_back(pair);
      }
    }
    auto triples = check_factorization(config, replicas, trajectory, times, sampled, policy);
    out.insert(out.end(), std::make_move_iterator(triples.begin()),
               std::make_move_iterator(triples.end()));
  }
  return out;
}

std::vector<ComparisonReport> compare_with_closed_forms(
    ModelVariant model, std::span<const std::vector<OneSidedSample>> next_to_frozen,
    std::span<const std::vector<OneSidedSample>> between_frozen, std::span<const double> times,
    const ComparisonPolicy& policy) {
  std::vector<ComparisonReport> out;
  for (double t : times) {
    if (!next_to_frozen.empty() && model == ModelVariant::NoScreening) {
      const AggregateEstimate est = aggregate_at<OneSidedSample>(
          next_to_frozen, t, [](const OneSidedSample& s) { return s.f[0] + s.f[2]; });
      out.push_back(compare("f0+f2", t, ode::closed_form_fsum(t), ReferenceSource::ClosedForm,
                            est, policy));
    }
    if (!between_frozen.empty()) {
      const AggregateEstimate est = aggregate_at<OneSidedSample>(
          between_frozen, t, [](const OneSidedSample& s) { return s.f[1]; });
      out.push_back(compare("P(m1=1|N0=N2=0)", t, ode::isolated_single_car(t),
                            ReferenceSource::ClosedForm, est, policy));
    }
  }
  return out;
}

}  // namespace parking::analysis
