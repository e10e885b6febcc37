#include "parking/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "parking/rates.hpp"

namespace parking::oracle {

Config encode(std::span<const SiteState> states) {
  Config c = 0;
  for (std::size_t k = 0; k < states.size(); ++k) c = with_site(c, k, states[k]);
  return c;
}

GeneratorMatrix build_generator(ModelVariant model, std::size_t sites) {
  if (sites < kMinSites || sites > kMaxSites) {
    throw std::invalid_argument("oracle ring size must be in [3, 8], got " +
                                std::to_string(sites));
  }
  GeneratorMatrix gen;
  gen.model_ = model;
  gen.sites_ = sites;
  const std::size_t dim = std::size_t{1} << (2 * sites);
  gen.offsets_.reserve(dim + 1);
  gen.diagonal_.resize(dim);
  gen.offsets_.push_back(0);

  const RateTable& table = RateTable::instance();
  for (Config c = 0; c < dim; ++c) {
    std::size_t outgoing = 0;
    for (std::size_t k = 0; k < sites; ++k) {
      const NeighborhoodTriple triple{site_of(c, (k + sites - 1) % sites), site_of(c, k),
                                      site_of(c, (k + 1) % sites)};
      for (int target = 1; target < 4; ++target) {
        if (table.rate(model, SiteState(target), triple) == 1) {
          gen.targets_.push_back(with_site(c, k, SiteState(target)));
          ++outgoing;
        }
      }
    }
    gen.diagonal_[c] = -static_cast<double>(outgoing);
    gen.offsets_.push_back(gen.targets_.size());
  }
  return gen;
}

FullDistribution FullDistribution::vacuum(std::size_t sites) {
  if (sites < kMinSites || sites > kMaxSites) {
    throw std::invalid_argument("oracle ring size must be in [3, 8]");
  }
  std::vector<double> p(std::size_t{1} << (2 * sites), 0.0);
  p[0] = 1.0;
  return {sites, std::move(p)};
}

double FullDistribution::total() const {
  double sum = 0.0;
  for (double p : probs_) sum += p;
  return sum;
}

double FullDistribution::min_entry() const {
  return *std::min_element(probs_.begin(), probs_.end());
}

namespace {

// Generator restricted to the configurations reachable from the vacuum, with
// local indices.
struct ReachableGenerator {
  std::vector<Config> configs;
  std::vector<std::size_t> offsets;
  std::vector<std::size_t> targets;
  std::vector<double> exit_rates;

  void apply(const std::vector<double>& p, std::vector<double>& dp) const {
    std::fill(dp.begin(), dp.end(), 0.0);
    for (std::size_t i = 0; i < configs.size(); ++i) {
      dp[i] -= exit_rates[i] * p[i];
      for (std::size_t e = offsets[i]; e < offsets[i + 1]; ++e) dp[targets[e]] += p[i];
    }
  }
};

ReachableGenerator restrict_to_reachable(const GeneratorMatrix& gen) {
  std::vector<std::size_t> local(gen.dimension(), SIZE_MAX);
  ReachableGenerator r;
  r.configs.push_back(0);
  local[0] = 0;
  for (std::size_t i = 0; i < r.configs.size(); ++i) {
    for (Config t : gen.targets(r.configs[i])) {
      if (local[t] == SIZE_MAX) {
        local[t] = r.configs.size();
        r.configs.push_back(t);
      }
    }
  }
  r.offsets.push_back(0);
  for (Config c : r.configs) {
    for (Config t : gen.targets(c)) r.targets.push_back(local[t]);
    r.offsets.push_back(r.targets.size());
    r.exit_rates.push_back(-gen.diagonal(c));
  }
  return r;
}

}  // namespace

std::vector<FullDistribution> evolve(const GeneratorMatrix& generator,
                                     std::span<const double> times) {
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] >= 0.0) || !std::isfinite(times[i]) || (i > 0 && times[i] < times[i - 1])) {
      throw std::invalid_argument("evolve times must be finite, nonnegative and sorted");
    }
  }
  const ReachableGenerator r = restrict_to_reachable(generator);
  const std::size_t n = r.configs.size();
  std::vector<double> p(n, 0.0), k1(n), k2(n), k3(n), k4(n), tmp(n);
  p[0] = 1.0;

  auto step = [&](double h) {
    r.apply(p, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = p[i] + 0.5 * h * k1[i];
    r.apply(tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = p[i] + 0.5 * h * k2[i];
    r.apply(tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = p[i] + h * k3[i];
    r.apply(tmp, k4);
    for (std::size_t i = 0; i < n; ++i) {
      p[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
  };

  std::vector<FullDistribution> out;
  out.reserve(times.size());
  double now = 0.0;
  for (double target : times) {
    const double span = target - now;
    if (span > 0.0) {
      const auto steps = static_cast<std::size_t>(std::ceil(span / kMaxEvolveStep - 1e-9));
      const double h = span / static_cast<double>(steps);
      for (std::size_t s = 0; s < steps; ++s) step(h);
      now = target;
    }
    std::vector<double> full(generator.dimension(), 0.0);
    for (std::size_t i = 0; i < n; ++i) full[r.configs[i]] = p[i];
    out.push_back(FullDistribution(generator.sites(), std::move(full)));
  }
  return out;
}

FullDistribution evolve(const GeneratorMatrix& generator, double t) {
  const double times[] = {t};
  return std::move(evolve(generator, times).front());
}

double marginal(const FullDistribution& dist, std::span<const SiteState> pattern,
                std::size_t offset) {
  const std::size_t n = dist.sites();
  if (pattern.empty() || pattern.size() > n) {
    throw std::invalid_argument("pattern length must be in [1, ring size]");
  }
  const auto probs = dist.probs();
  double sum = 0.0;
  for (Config c = 0; c < probs.size(); ++c) {
    if (probs[c] == 0.0) continue;
    bool match = true;
    for (std::size_t j = 0; j < pattern.size() && match; ++j) {
      match = site_of(c, (offset + j) % n) == pattern[j];
    }
    if (match) sum += probs[c];
  }
  return sum;
}

double jammed_mass(const GeneratorMatrix& generator, const FullDistribution& dist) {
  const auto probs = dist.probs();
  double sum = 0.0;
  for (Config c = 0; c < probs.size(); ++c) {
    if (generator.jammed(c)) sum += probs[c];
  }
  return sum;
}

}  // namespace parking::oracle
