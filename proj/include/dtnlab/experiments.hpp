#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dtnlab/contact_plan.hpp"
#include "dtnlab/lp_oracle.hpp"
#include "dtnlab/simulator.hpp"

namespace dtnlab {

inline constexpr std::string_view kToolVersion = "0.1.0";

enum class Scheme { deltime, hops, lp };

std::string_view to_string(Scheme s);
Scheme parse_scheme(std::string_view text);

enum class Injection {
  burst,     // `load` packets per source at t = 0
  per_state  // `load` packets per source at every state start
};

struct TrafficConfig {
  NodeId destination{11};
  std::vector<NodeId> no_ttl_sources{NodeId{1}, NodeId{2}, NodeId{3}, NodeId{4}, NodeId{5}};
  std::vector<NodeId> ttl_sources{NodeId{6}, NodeId{7}, NodeId{8}, NodeId{9}, NodeId{10}};
  double ttl = 20.0;
  Injection injection = Injection::burst;
};

struct LpConfig {
  bool soft = false;
  bool prune = true;
  /// Per-state weights; empty means w(q) = q.
  std::vector<double> weights;
};

struct ScenarioConfig {
  TopologyConfig topology;
  TrafficConfig traffic;
  int k = 10;
  std::vector<Scheme> schemes{Scheme::deltime, Scheme::hops, Scheme::lp};
  std::vector<std::uint64_t> seeds;
  std::vector<std::int64_t> loads;
};

/// 25 seeds, 11 nodes, 10 states of 10 s, density 0.2, capacity 10, all
/// traffic to node 11, nodes 6-10 with a 20 s ttl.
ScenarioConfig default_scenario();

/// Throws Error on an invalid configuration.
void check_scenario(const ScenarioConfig& cfg, const LpConfig& lp);

struct ScenarioFile {
  ScenarioConfig scenario;
  LpConfig lp;
};

/// JSON document; see README for the schema. Missing keys take the defaults
/// of default_scenario().
ScenarioFile parse_scenario(std::string_view json);
std::string scenario_to_json(const ScenarioFile& file);

struct Scenario {
  ContactPlan plan;
  std::vector<Demand> demands;
};

Scenario build_scenario(const ScenarioConfig& cfg, std::uint64_t seed, std::int64_t load);
std::vector<Demand> build_demands(const ScenarioConfig& cfg, const StateGrid& grid, std::int64_t load);

enum class RunStatus { ok, infeasible, unbounded, numerical_failure, error };

std::string_view to_string(RunStatus s);

struct RunRow {
  std::uint64_t seed = 0;
  std::int64_t load = 0;
  Scheme scheme = Scheme::deltime;
  RunStatus status = RunStatus::ok;
  Metrics metrics;
  double generated = 0.0;
  double delivered = 0.0;
  double transmissions = 0.0;
  std::string message;
};

struct SweepResult {
  ScenarioFile config;
  /// Ordered by (seed, load, scheme).
  std::vector<RunRow> runs;
};

/// Runs every (seed, load, scheme) cell on the same plan and demands per
/// (seed, load). Failures are recorded per run and never abort the sweep.
SweepResult run_sweep(const ScenarioFile& cfg, int workers = 1);

/// Runs every configured scheme on one (plan, demands) pair.
std::vector<RunRow> run_cell(const ContactPlan& plan, std::span<const Demand> demands, const ScenarioConfig& cfg,
                             const LpConfig& lp, RouteTableCache* cache = nullptr);

enum class MetricKind { delivery_ratio, mean_hops, mean_delay, energy_efficiency };

inline constexpr MetricKind kAllMetrics[] = {MetricKind::delivery_ratio, MetricKind::mean_hops,
                                             MetricKind::mean_delay, MetricKind::energy_efficiency};

std::string_view to_string(MetricKind m);
std::optional<double> metric_of(const Metrics& m, MetricKind kind);

struct Summary {
  double mean = 0.0;
  std::optional<double> stddev;  // sample standard deviation, needs n >= 2
  int n = 0;
};

/// Mean over the runs of (scheme, load) whose metric is defined.
std::optional<Summary> summarize_cell(const SweepResult& result, Scheme scheme, std::int64_t load, MetricKind kind);

/// One panel: `load` column, then mean/std/n per configured scheme in the
/// fixed order DELTIME, HOPS, LP.
std::string panel_csv(const SweepResult& result, MetricKind kind);
std::string runs_to_csv(const SweepResult& result);
SweepResult runs_from_csv(const ScenarioFile& config, std::string_view csv);
std::string manifest_json(const SweepResult& result);
std::uint64_t config_hash(const ScenarioFile& cfg);

/// Writes runs.csv, manifest.json and the four panel CSVs into `dir`.
void write_sweep(const SweepResult& result, const std::filesystem::path& dir);
/// Rewrites the panels of a directory produced by write_sweep from its
/// manifest and runs.csv. Returns the loaded result.
SweepResult report_sweep(const std::filesystem::path& dir, const std::filesystem::path& out);

}  // namespace dtnlab
