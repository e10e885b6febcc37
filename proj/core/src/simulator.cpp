#include "parking/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <random>
#include <stdexcept>
#include <thread>

namespace parking {

namespace {

// Expected number of attempts generated and sorted at once.
constexpr double kAttemptsPerBlock = 65536.0;

struct Attempt {
  double time;
  std::size_t site;

  friend bool operator<(const Attempt& a, const Attempt& b) {
    return a.time < b.time || (a.time == b.time && a.site < b.site);
  }
};

std::vector<double> resolved_sample_times(const SimConfig& config) {
  return config.sample_times.empty() ? default_sample_times(config.t_max) : config.sample_times;
}

std::array<double, 4> site_densities(const Lattice& lattice) {
  std::array<std::size_t, 4> counts{};
  const auto codes = lattice.codes();
  for (std::size_t i = 0; i < codes.size(); ++i) {
    if (!lattice.frozen(i)) ++counts[codes[i]];
  }
  std::array<double, 4> out{};
  const auto denom = static_cast<double>(lattice.unfrozen_count());
  for (int s = 0; s < 4; ++s) out[s] = static_cast<double>(counts[s]) / denom;
  return out;
}

// Runs one replica on `lattice` and calls observe(time, lattice) once per
// sample time, in order. Returns the number of attempts processed.
template <class Observer>
std::uint64_t simulate(const SimConfig& config, std::size_t replica_index, Lattice& lattice,
                       std::vector<AttemptEvent>* events, Observer&& observe) {
  const std::vector<double> sample_times = resolved_sample_times(config);

  std::vector<std::size_t> unfrozen;
  unfrozen.reserve(lattice.unfrozen_count());
  for (std::size_t i = 0; i < lattice.size(); ++i) {
    if (!lattice.frozen(i)) unfrozen.push_back(i);
  }
  const auto rate = static_cast<double>(unfrozen.size());

  std::mt19937_64 rng(derive_replica_seed(config.master_seed, replica_index));
  std::uniform_int_distribution<std::size_t> pick_site(0, unfrozen.size() - 1);

  std::size_t next_sample = 0;
  std::uint64_t processed = 0;
  std::vector<Attempt> block;

  const double expected_total = rate * config.t_max;
  const auto block_count =
      static_cast<std::size_t>(std::max(1.0, std::ceil(expected_total / kAttemptsPerBlock)));
  const double block_length = config.t_max / static_cast<double>(block_count);

  for (std::size_t b = 0; b < block_count && config.t_max > 0.0; ++b) {
    const double lo = block_length * static_cast<double>(b);
    const double hi = b + 1 == block_count ? config.t_max : block_length * static_cast<double>(b + 1);
    const double mean = rate * (hi - lo);
    std::uint64_t count = 0;
    if (mean > 0.0) {
      std::poisson_distribution<std::uint64_t> arrivals(mean);
      count = arrivals(rng);
    }

    std::uniform_real_distribution<double> pick_time(lo, hi);
    block.resize(count);
    for (Attempt& a : block) {
      a.time = pick_time(rng);
      a.site = unfrozen[pick_site(rng)];
    }
    std::sort(block.begin(), block.end());

    for (const Attempt& a : block) {
      while (next_sample < sample_times.size() && sample_times[next_sample] < a.time) {
        observe(sample_times[next_sample++], std::as_const(lattice));
      }
      const SiteState before = lattice.state(a.site);
      const std::uint8_t after = lattice.attempt(config.model, a.site);
      if (events != nullptr) {
        events->push_back({a.time, a.site, before, SiteState(after)});
      }
    }
    processed += count;
  }

  while (next_sample < sample_times.size()) {
    observe(sample_times[next_sample++], std::as_const(lattice));
  }
  return processed;
}

template <class Result, class Fn>
std::vector<Result> for_each_replica(std::size_t replicas, unsigned threads, Fn&& fn) {
  std::vector<Result> out(replicas);
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, replicas));

  if (threads <= 1) {
    for (std::size_t i = 0; i < replicas; ++i) out[i] = fn(i);
    return out;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> workers;
    workers.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < replicas; i = next++) {
          try {
            out[i] = fn(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next = replicas;
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

void validate_one_sided(const SimConfig& config) {
  config.validate();
  std::vector<std::size_t> frozen = config.frozen_sites;
  std::sort(frozen.begin(), frozen.end());
  const bool single = frozen == std::vector<std::size_t>{0};
  const bool pair = frozen == std::vector<std::size_t>{0, 2};
  if (!single && !pair) {
    throw std::invalid_argument("one-sided runs need frozen sites {0} or {0,2}");
  }
  if (config.size < kMinOneSidedSize) {
    throw std::invalid_argument("one-sided runs need at least " +
                                std::to_string(kMinOneSidedSize) + " sites");
  }
}

}  // namespace

Pattern parse_pattern(std::string_view text) {
  Pattern out;
  for (char c : text) {
    if (c == ',' || c == ' ') continue;
    if (c < '0' || c > '3') {
      throw std::invalid_argument("malformed pattern '" + std::string(text) +
                                  "': states must be digits 0-3");
    }
    out.emplace_back(c - '0');
  }
  if (out.empty()) throw std::invalid_argument("empty pattern");
  return out;
}

std::string pattern_label(const Pattern& pattern) {
  std::string out;
  for (SiteState s : pattern) out.push_back(static_cast<char>('0' + s.code()));
  return out;
}

Lattice::Lattice(std::size_t size, std::span<const std::size_t> frozen_sites)
    : codes_(size, 0), frozen_(size, 0) {
  for (std::size_t site : frozen_sites) {
    if (site >= size) throw std::invalid_argument("frozen site index out of range");
    frozen_[site] = 1;
  }
  unfrozen_count_ = static_cast<std::size_t>(std::count(frozen_.begin(), frozen_.end(), 0));
}

void Lattice::set(std::size_t site, SiteState value) {
  if (frozen(site)) throw std::logic_error("cannot change a frozen site");
  codes_[site] = static_cast<std::uint8_t>(value.code());
}

std::optional<std::string> Lattice::invariant_violation() const {
  const std::size_t n = size();
  for (std::size_t i = 0; i < n; ++i) {
    const SiteState here = state(i);
    const SiteState left = state(left_of(i));
    const SiteState right = state(right_of(i));
    const std::string where = " at site " + std::to_string(i);
    if (frozen(i) && here.code() != 0) return "frozen site occupied" + where;
    if (here.first_line() && right.first_line()) return "adjacent first-line cars" + where;
    if (here.second_line() && right.second_line()) return "adjacent second-line cars" + where;
    if (here.second_line() && !here.first_line() && !left.first_line() && !right.first_line()) {
      return "unsupported second-line car" + where;
    }
  }
  return std::nullopt;
}

double estimate_pattern_density(const Lattice& lattice, std::span<const SiteState> pattern) {
  const std::size_t n = lattice.size();
  const std::size_t len = pattern.size();
  if (len == 0 || len > n) {
    throw std::invalid_argument("pattern length must be in [1, lattice size]");
  }
  const auto codes = lattice.codes();
  std::size_t windows = 0;
  std::size_t matches = 0;
  for (std::size_t start = 0; start < n; ++start) {
    bool admissible = true;
    bool match = true;
    for (std::size_t j = 0; j < len; ++j) {
      const std::size_t site = (start + j) % n;
      if (lattice.frozen(site)) {
        admissible = false;
        break;
      }
      match = match && codes[site] == pattern[j].code();
    }
    if (!admissible) continue;
    ++windows;
    if (match) ++matches;
  }
  if (windows == 0) throw std::invalid_argument("no window free of frozen sites");
  return static_cast<double>(matches) / static_cast<double>(windows);
}

void SimConfig::validate() const {
  if (size < 3) throw std::invalid_argument("ring size must be at least 3");
  if (!(t_max >= 0.0) || !std::isfinite(t_max)) {
    throw std::invalid_argument("t_max must be finite and nonnegative");
  }
  if (replicas == 0) throw std::invalid_argument("replicas must be positive");
  for (std::size_t i = 0; i < sample_times.size(); ++i) {
    if (!(sample_times[i] >= 0.0) || sample_times[i] > t_max) {
      throw std::invalid_argument("sample times must lie in [0, t_max]");
    }
    if (i > 0 && sample_times[i] < sample_times[i - 1]) {
      throw std::invalid_argument("sample times must be nondecreasing");
    }
  }
  std::vector<std::size_t> frozen = frozen_sites;
  std::sort(frozen.begin(), frozen.end());
  if (std::adjacent_find(frozen.begin(), frozen.end()) != frozen.end()) {
    throw std::invalid_argument("frozen sites must be distinct");
  }
  if (!frozen.empty() && frozen.back() >= size) {
    throw std::invalid_argument("frozen site index out of range");
  }
  if (frozen.size() >= size) throw std::invalid_argument("every site is frozen");
  for (const Pattern& p : patterns) {
    if (p.empty() || p.size() > size) {
      throw std::invalid_argument("pattern length must be in [1, ring size]");
    }
  }
}

std::vector<double> default_sample_times(double t_max, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("sample step must be positive");
  std::vector<double> out;
  for (std::size_t k = 0;; ++k) {
    const double t = step * static_cast<double>(k);
    if (t >= t_max - 1e-12) break;
    out.push_back(t);
  }
  out.push_back(t_max);
  return out;
}

std::uint64_t derive_replica_seed(std::uint64_t master_seed, std::uint64_t replica_index) {
  std::uint64_t z = master_seed + (replica_index + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

ReplicaResult run_replica(const SimConfig& config, std::size_t replica_index) {
  config.validate();
  if (replica_index >= config.replicas) throw std::invalid_argument("replica index out of range");

  ReplicaResult result{{}, Lattice(config.size, config.frozen_sites), 0, {}};
  auto observe = [&](double time, const Lattice& lattice) {
    DensitySample sample;
    sample.time = time;
    sample.site_density = site_densities(lattice);
    sample.pattern_density.reserve(config.patterns.size());
    for (const Pattern& p : config.patterns) {
      sample.pattern_density.push_back(estimate_pattern_density(lattice, p));
    }
    result.samples.push_back(std::move(sample));
  };
  result.attempts = simulate(config, replica_index, result.final_lattice,
                             config.record_events ? &result.events : nullptr, observe);
  return result;
}

std::vector<std::vector<DensitySample>> run_replicas(const SimConfig& config, unsigned threads) {
  config.validate();
  return for_each_replica<std::vector<DensitySample>>(
      config.replicas, threads, [&](std::size_t i) { return run_replica(config, i).samples; });
}

std::vector<OneSidedSample> one_sided_replica(const SimConfig& config, std::size_t replica_index) {
  validate_one_sided(config);
  if (replica_index >= config.replicas) throw std::invalid_argument("replica index out of range");

  Lattice lattice(config.size, config.frozen_sites);
  std::vector<OneSidedSample> out;
  auto observe = [&](double time, const Lattice& l) {
    OneSidedSample s;
    s.time = time;
    const int m1 = l.state(1).code();
    const int m2 = l.state(2).code();
    if (m1 < 3) {
      s.f[m1] = 1.0;
    } else {
      s.f3 = 1.0;
    }
    s.r = (m1 == 1 && m2 == 0) ? 1.0 : 0.0;
    out.push_back(s);
  };
  simulate(config, replica_index, lattice, nullptr, observe);
  return out;
}

std::vector<std::vector<OneSidedSample>> run_one_sided_replicas(const SimConfig& config,
                                                                unsigned threads) {
  validate_one_sided(config);
  return for_each_replica<std::vector<OneSidedSample>>(
      config.replicas, threads, [&](std::size_t i) { return one_sided_replica(config, i); });
}

std::vector<OneSidedSample> run_one_sided(const SimConfig& config, unsigned threads) {
  const auto replicas = run_one_sided_replicas(config, threads);
  std::vector<OneSidedSample> mean = replicas.front();
  for (OneSidedSample& s : mean) s = OneSidedSample{s.time, {}, 0.0, 0.0};
  for (const auto& replica : replicas) {
    for (std::size_t k = 0; k < replica.size(); ++k) {
      for (int s = 0; s < 3; ++s) mean[k].f[s] += replica[k].f[s];
      mean[k].f3 += replica[k].f3;
      mean[k].r += replica[k].r;
    }
  }
  const auto n = static_cast<double>(replicas.size());
  for (OneSidedSample& s : mean) {
    for (double& v : s.f) v /= n;
    s.f3 /= n;
    s.r /= n;
  }
  return mean;
}

}  // namespace parking
