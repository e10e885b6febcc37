#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "parking/analysis.hpp"
#include "parking/ode.hpp"
#include "parking/oracle.hpp"
#include "parking/simulator.hpp"

#ifndef PARKING_VERSION
#define PARKING_VERSION "0.0.0"
#endif

namespace parking::cli {

namespace {

using nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) : file_(path, std::ios::binary | std::ios::trunc) {
    if (!file_) throw UsageError("cannot open '" + path + "' for writing");
  }

  void header(const std::vector<std::string>& columns) {
    for (std::size_t i = 0; i < columns.size(); ++i) file_ << (i ? "," : "") << columns[i];
    file_ << '\n';
  }

  void row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      file_ << (i ? "," : "") << format_double(values[i]);
    }
    file_ << '\n';
  }

  void close() {
    file_.close();
    if (!file_) throw UsageError("failed to write CSV output");
  }

 private:
  std::ofstream file_;
};

void write_json(const std::string& path, const json& doc) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw UsageError("cannot open '" + path + "' for writing");
  file << doc.dump(2) << '\n';
  if (!file) throw UsageError("failed to write '" + path + "'");
}

json manifest(const std::string& subcommand, const std::vector<std::string>& args,
              json config, const std::vector<std::string>& outputs) {
  return {{"tool", "parking"},     {"version", PARKING_VERSION}, {"subcommand", subcommand},
          {"args", args},          {"config", std::move(config)}, {"outputs", outputs}};
}

std::string manifest_path(const std::string& out) { return out + ".manifest.json"; }

std::vector<Pattern> parse_patterns(const std::vector<std::string>& texts) {
  std::vector<Pattern> out;
  for (const std::string& t : texts) out.push_back(parse_pattern(t));
  return out;
}

std::vector<std::string> pattern_labels(const std::vector<Pattern>& patterns) {
  std::vector<std::string> out;
  for (const Pattern& p : patterns) out.push_back(pattern_label(p));
  return out;
}

void check_sorted_times(const std::vector<double>& times, double t_max) {
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] >= 0.0) || times[i] > t_max) {
      throw UsageError("times must lie in [0, " + format_double(t_max) + "]");
    }
    if (i > 0 && times[i] < times[i - 1]) throw UsageError("times must be sorted");
  }
}

// ---------------------------------------------------------------- ode

struct OdeOptions {
  std::string model = "noscreening";
  double t_max = 30.0;
  double step = 1e-3;
  std::size_t stride = 1;
  std::string out;
  std::string summary;
};

int cmd_ode(const OdeOptions& o, const std::vector<std::string>& args, std::ostream& out) {
  const ode::OdeSpec spec{parse_model(o.model), o.t_max, o.step, o.stride};
  spec.validate();
  const ode::Trajectory traj = ode::integrate(spec);
  const ode::LimitSummary limits = ode::summarize(traj);
  const bool converged =
      limits.t_end >= ode::kMinLimitHorizon && limits.residual_drift <= ode::kMaxResidualDrift;

  CsvWriter csv(o.out);
  csv.header({"t", "D0", "D1", "D2", "D3", "f0", "f1", "f2", "R", "D010", "line1", "line2"});
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const ode::OdeState& y = traj.states[i];
    csv.row({traj.times[i], y.d0, y.d1, y.d2, y.d3, y.f0, y.f1, y.f2, y.r, y.d010, y.line1(),
             y.line2()});
  }
  csv.close();

  const std::string summary_path = o.summary.empty() ? o.out + ".summary.json" : o.summary;
  const json config = {{"model", o.model}, {"t_max", o.t_max}, {"step", o.step},
                       {"record_stride", o.stride}};
  const json summary = {{"model", o.model},
                        {"t_end", limits.t_end},
                        {"line1", limits.line1},
                        {"line2", limits.line2},
                        {"increase_factor", limits.increase_factor},
                        {"residual_drift", limits.residual_drift},
                        {"converged", converged}};
  write_json(summary_path, summary);
  write_json(manifest_path(o.out), manifest("ode", args, config, {o.out, summary_path}));
  out << summary.dump(2) << '\n';
  return kOk;
}

// ----------------------------------------------------------- simulate

struct SimOptions {
  std::string model = "noscreening";
  std::size_t sites = 10000;
  double t_max = 15.0;
  std::size_t replicas = 100;
  std::uint64_t seed = 1;
  std::vector<std::size_t> frozen;
  std::vector<std::string> patterns;
  std::vector<double> times;
  double sample_step = 0.25;
  unsigned threads = 0;
  std::string out;
};

SimConfig to_config(const SimOptions& o) {
  SimConfig c;
  c.size = o.sites;
  c.t_max = o.t_max;
  c.model = parse_model(o.model);
  c.master_seed = o.seed;
  c.replicas = o.replicas;
  c.frozen_sites = o.frozen;
  c.patterns = parse_patterns(o.patterns);
  if (o.times.empty()) {
    c.sample_times = default_sample_times(o.t_max, o.sample_step);
  } else {
    check_sorted_times(o.times, o.t_max);
    c.sample_times = o.times;
  }
  c.validate();
  return c;
}

json config_json(const SimConfig& c) {
  return {{"model", std::string(to_string(c.model))},
          {"sites", c.size},
          {"t_max", c.t_max},
          {"replicas", c.replicas},
          {"seed", c.master_seed},
          {"frozen", c.frozen_sites},
          {"patterns", pattern_labels(c.patterns)},
          {"sample_times", c.sample_times}};
}

int cmd_simulate(const SimOptions& o, const std::vector<std::string>& args, std::ostream& out) {
  const SimConfig config = to_config(o);
  if (config.replicas < 2) throw UsageError("simulate needs at least 2 replicas for error bars");
  const auto replicas = run_replicas(config, o.threads);

  std::vector<std::string> columns = {"t"};
  auto add = [&](const std::string& name) {
    columns.push_back(name + "_mean");
    columns.push_back(name + "_stderr");
  };
  for (int s = 0; s < 4; ++s) add("D" + std::to_string(s));
  for (const Pattern& p : config.patterns) add("D" + pattern_label(p));
  add("line1");
  add("line2");

  CsvWriter csv(o.out);
  csv.header(columns);
  using analysis::aggregate_at;
  for (double t : config.sample_times) {
    std::vector<double> row = {t};
    auto push = [&](const analysis::AggregateEstimate& e) {
      row.push_back(e.mean);
      row.push_back(e.std_error);
    };
    for (int s = 0; s < 4; ++s) {
      push(aggregate_at<DensitySample>(replicas, t,
                                       [&](const DensitySample& d) { return d.site_density[s]; }));
    }
    for (std::size_t p = 0; p < config.patterns.size(); ++p) {
      push(aggregate_at<DensitySample>(
          replicas, t, [&](const DensitySample& d) { return d.pattern_density[p]; }));
    }
    push(aggregate_at<DensitySample>(replicas, t, [](const DensitySample& d) { return d.line1(); }));
    push(aggregate_at<DensitySample>(replicas, t, [](const DensitySample& d) { return d.line2(); }));
    csv.row(row);
  }
  csv.close();
  write_json(manifest_path(o.out), manifest("simulate", args, config_json(config), {o.out}));

  const DensitySample& last = replicas.front().back();
  out << "simulated " << config.replicas << " replicas of " << config.size << " sites to t="
      << format_double(last.time) << '\n';
  return kOk;
}

// ------------------------------------------------------------- oracle

struct OracleOptions {
  std::string model = "noscreening";
  std::size_t sites = 6;
  std::vector<double> times = {0.0};
  std::vector<std::string> patterns;
  std::string out;
};

int cmd_oracle(const OracleOptions& o, const std::vector<std::string>& args, std::ostream& out) {
  const ModelVariant model = parse_model(o.model);
  const oracle::GeneratorMatrix gen = oracle::build_generator(model, o.sites);
  const std::vector<Pattern> patterns = parse_patterns(o.patterns);
  check_sorted_times(o.times, std::numeric_limits<double>::max());
  for (const Pattern& p : patterns) {
    if (p.size() > o.sites) throw UsageError("pattern longer than the ring");
  }
  const auto dists = oracle::evolve(gen, o.times);

  std::vector<std::string> columns = {"t", "D0", "D1", "D2", "D3"};
  for (const Pattern& p : patterns) columns.push_back("D" + pattern_label(p));
  CsvWriter csv(o.out);
  csv.header(columns);
  for (std::size_t k = 0; k < o.times.size(); ++k) {
    std::vector<double> row = {o.times[k]};
    for (int s = 0; s < 4; ++s) {
      const Pattern single = {SiteState(s)};
      row.push_back(oracle::marginal(dists[k], single));
    }
    for (const Pattern& p : patterns) row.push_back(oracle::marginal(dists[k], p));
    csv.row(row);
  }
  csv.close();
  const json config = {{"model", o.model},
                       {"sites", o.sites},
                       {"times", o.times},
                       {"patterns", pattern_labels(patterns)}};
  write_json(manifest_path(o.out), manifest("oracle", args, config, {o.out}));
  out << "exact marginals for " << o.sites << " sites at " << o.times.size() << " times\n";
  return kOk;
}

// ------------------------------------------------------------ compare

struct CompareOptions {
  std::string reference;
  SimOptions sim;
  double z_threshold = 4.0;
  double abs_floor = 1e-3;
  std::string out = "-";
};

json report_json(const analysis::ComparisonReport& r) {
  return {{"observable", r.observable},
          {"time", r.time},
          {"reference", r.reference},
          {"source", std::string(analysis::to_string(r.source))},
          {"mean", r.estimate.mean},
          {"stderr", r.estimate.std_error},
          {"replicas", r.estimate.replicas},
          {"z_score", std::isfinite(r.z_score) ? json(r.z_score) : json(r.z_score > 0 ? "inf" : "-inf")},
          {"verdict", r.pass ? "pass" : "fail"},
          {"note", r.note}};
}

int cmd_compare(CompareOptions o, const CLI::App& sub, const std::vector<std::string>& args,
                std::ostream& out) {
  auto given = [&](const char* flag) { return sub.count(flag) > 0; };
  SimOptions& s = o.sim;

  // Reference-specific defaults for flags the user did not set.
  if (o.reference == "oracle") {
    if (!given("--sites")) s.sites = 6;
    if (!given("--replicas")) s.replicas = 100000;
    if (!given("--times")) s.times = {0.5, 1.0, 2.0, 5.0};
    if (!given("--patterns")) s.patterns = {"010", "000", "101"};
  } else if (o.reference == "ode") {
    if (!given("--patterns")) s.patterns = {"010", "000", "001", "100", "101", "202"};
    if (!given("--times")) s.times = {s.t_max};
  } else {
    if (!given("--sites")) s.sites = kMinOneSidedSize;
    if (!given("--replicas")) s.replicas = 20000;
    if (!given("--times")) s.times = {0.5, 1.0, 2.0};
  }
  if (!given("--t-max") && !s.times.empty()) {
    s.t_max = std::max(o.reference == "ode" ? s.t_max : 0.0,
                       *std::max_element(s.times.begin(), s.times.end()));
  }

  const analysis::ComparisonPolicy policy{o.z_threshold, o.abs_floor};
  SimConfig config = to_config(s);
  if (config.replicas < 2) throw UsageError("compare needs at least 2 replicas");
  std::vector<analysis::ComparisonReport> reports;
  json extra = json::object();

  if (o.reference == "oracle") {
    if (config.size > oracle::kMaxSites) {
      throw UsageError("oracle reference needs --sites in [3, 8]");
    }
    const auto replicas = run_replicas(config, s.threads);
    reports = analysis::compare_with_oracle(config, replicas, config.sample_times, policy);
  } else if (o.reference == "ode") {
    const ode::Trajectory traj = ode::integrate({config.model, config.t_max, 1e-3, 1});
    const auto replicas = run_replicas(config, s.threads);
    reports = analysis::compare_with_ode(config, replicas, traj, config.sample_times, policy);
    extra["finite_size_note"] =
        "ode values describe the infinite line; deviations on small rings are finite-size effects";
  } else {
    SimConfig between = config;
    between.frozen_sites = {0, 2};
    std::vector<std::vector<OneSidedSample>> next_to_frozen;
    if (config.model == ModelVariant::NoScreening) {
      SimConfig single = config;
      single.frozen_sites = {0};
      next_to_frozen = run_one_sided_replicas(single, s.threads);
    }
    const auto isolated = run_one_sided_replicas(between, s.threads);
    reports = analysis::compare_with_closed_forms(config.model, next_to_frozen, isolated,
                                                  config.sample_times, policy);
  }

  const bool all_pass =
      std::all_of(reports.begin(), reports.end(), [](const auto& r) { return r.pass; });
  json doc = {{"manifest", manifest("compare", args,
                                    json{{"reference", o.reference},
                                         {"z_threshold", o.z_threshold},
                                         {"abs_floor", o.abs_floor},
                                         {"simulation", config_json(config)}},
                                    {o.out})},
              {"all_pass", all_pass},
              {"reports", json::array()}};
  for (const auto& r : reports) doc["reports"].push_back(report_json(r));
  for (auto& [key, value] : extra.items()) doc[key] = value;

  if (o.out == "-") {
    out << doc.dump(2) << '\n';
  } else {
    write_json(o.out, doc);
    const auto passed = std::count_if(reports.begin(), reports.end(), [](const auto& r) { return r.pass; });
    out << passed << "/" << reports.size() << " comparisons pass\n";
  }
  return all_pass ? kOk : kComparisonFailed;
}

// ------------------------------------------------------------- replay

std::vector<std::string> replay_args(const std::string& path, const std::string& out_override) {
  std::ifstream file(path);
  if (!file) throw UsageError("cannot read manifest '" + path + "'");
  json doc;
  try {
    doc = json::parse(file);
  } catch (const json::exception& e) {
    throw UsageError("malformed manifest: " + std::string(e.what()));
  }
  if (doc.contains("manifest")) doc = doc["manifest"];
  if (!doc.contains("args") || !doc["args"].is_array()) throw UsageError("manifest has no args");
  auto args = doc["args"].get<std::vector<std::string>>();
  if (args.empty() || args.front() == "replay") throw UsageError("manifest cannot be replayed");
  if (out_override.empty()) return args;

  std::vector<std::string> rewritten;
  bool replaced = false;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if ((args[i] == "--out" || args[i] == "--summary") && i + 1 < args.size()) {
      if (args[i] == "--out") {
        rewritten.insert(rewritten.end(), {"--out", out_override});
        replaced = true;
      }
      ++i;
    } else if (args[i].rfind("--out=", 0) == 0) {
      rewritten.push_back("--out=" + out_override);
      replaced = true;
    } else if (args[i].rfind("--summary=", 0) != 0) {
      rewritten.push_back(args[i]);
    }
  }
  if (!replaced) rewritten.insert(rewritten.end(), {"--out", out_override});
  return rewritten;
}

void add_model(CLI::App* app, std::string& model) {
  app->add_option("--model", model, "noscreening or screening")
      ->check(CLI::IsMember({"noscreening", "screening"}))
      ->capture_default_str();
}

void add_sim_options(CLI::App* app, SimOptions& s) {
  add_model(app, s.model);
  app->add_option("--sites", s.sites, "ring size")->check(CLI::Range(std::size_t{3}, SIZE_MAX / 4))
      ->capture_default_str();
  app->add_option("--t-max", s.t_max, "time horizon")->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  app->add_option("--replicas", s.replicas, "independent replicas")->check(CLI::PositiveNumber)
      ->capture_default_str();
  app->add_option("--seed", s.seed, "master seed")->capture_default_str();
  app->add_option("--frozen", s.frozen, "frozen site indices, comma separated")->delimiter(',');
  app->add_option("--patterns", s.patterns, "local patterns such as 0,1,0 or 010");
  app->add_option("--times", s.times, "sample times, comma separated")->delimiter(',');
  app->add_option("--sample-step", s.sample_step, "spacing of default sample times")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app->add_option("--threads", s.threads, "worker threads (0 = all cores)")->capture_default_str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-line discrete car parking: ODE solutions, simulation and exact oracle",
               "parking"};
  app.require_subcommand(1);
  app.set_version_flag("--version", PARKING_VERSION);

  OdeOptions ode_opt;
  auto* ode_cmd = app.add_subcommand("ode", "integrate the closed density ODE system");
  add_model(ode_cmd, ode_opt.model);
  ode_cmd->add_option("--t-max", ode_opt.t_max, "integration horizon")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  ode_cmd->add_option("--step", ode_opt.step, "RK4 step")->capture_default_str();
  ode_cmd->add_option("--stride", ode_opt.stride, "record every n-th step")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  ode_cmd->add_option("--out", ode_opt.out, "trajectory CSV path")->required();
  ode_cmd->add_option("--summary", ode_opt.summary, "limit summary JSON path (default OUT.summary.json)");

  SimOptions sim_opt;
  auto* sim_cmd = app.add_subcommand("simulate", "kinetic Monte Carlo on a ring");
  add_sim_options(sim_cmd, sim_opt);
  sim_cmd->add_option("--out", sim_opt.out, "aggregated samples CSV path")->required();

  OracleOptions oracle_opt;
  auto* oracle_cmd = app.add_subcommand("oracle", "exact marginals on a ring of 3..8 sites");
  add_model(oracle_cmd, oracle_opt.model);
  oracle_cmd->add_option("--sites", oracle_opt.sites, "ring size")->capture_default_str();
  oracle_cmd->add_option("--times", oracle_opt.times, "times, comma separated")->delimiter(',');
  oracle_cmd->add_option("--patterns", oracle_opt.patterns, "local patterns such as 0,1,0");
  oracle_cmd->add_option("--out", oracle_opt.out, "marginals CSV path")->required();

  CompareOptions cmp_opt;
  auto* cmp_cmd = app.add_subcommand("compare", "simulation against ode, oracle or closed forms");
  cmp_cmd->add_option("--reference", cmp_opt.reference, "ode, oracle or closed-form")
      ->required()
      ->check(CLI::IsMember({"ode", "oracle", "closed-form"}));
  add_sim_options(cmp_cmd, cmp_opt.sim);
  cmp_cmd->add_option("--z-threshold", cmp_opt.z_threshold, "pass if |z| is at most this")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmp_cmd->add_option("--abs-floor", cmp_opt.abs_floor, "pass if |mean - reference| is at most this")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmp_cmd->add_option("--out", cmp_opt.out, "report JSON path, - for stdout")->capture_default_str();

  std::string replay_manifest;
  std::string replay_out;
  auto* replay_cmd = app.add_subcommand("replay", "re-run the command recorded in a manifest");
  replay_cmd->add_option("manifest", replay_manifest, "manifest JSON path")->required();
  replay_cmd->add_option("--out", replay_out, "write to this path instead of the recorded one");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (ode_cmd->parsed()) return cmd_ode(ode_opt, args, out);
    if (sim_cmd->parsed()) return cmd_simulate(sim_opt, args, out);
    if (oracle_cmd->parsed()) return cmd_oracle(oracle_opt, args, out);
    if (cmp_cmd->parsed()) return cmd_compare(cmp_opt, *cmp_cmd, args, out);
    if (replay_cmd->parsed()) return run(replay_args(replay_manifest, replay_out), out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::out_of_range& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
  return kConfigError;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace parking::cli
