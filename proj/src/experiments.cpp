#include "dtnlab/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>

namespace dtnlab {

namespace {

using nlohmann::json;

constexpr Scheme kSchemeOrder[] = {Scheme::deltime, Scheme::hops, Scheme::lp};

std::string num(double v) { return fmt::format("{}", v); }

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot read {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write {}", path.string()));
  out << text;
}

std::vector<NodeId> node_list(const json& j, std::string_view key) {
  if (!j.is_array()) throw Error(fmt::format("'{}' must be an array of node ids", key));
  std::vector<NodeId> out;
  for (const auto& v : j) out.push_back(NodeId{v.get<std::int32_t>()});
  return out;
}

void reject_unknown(const json& j, std::initializer_list<std::string_view> keys, std::string_view where) {
  if (!j.is_object()) throw Error(fmt::format("'{}' must be an object", where));
  for (const auto& [k, v] : j.items()) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
      throw Error(fmt::format("unknown key '{}' in {}", k, where));
    }
  }
}

double parse_double(std::string_view text, std::string_view what) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) throw Error(fmt::format("bad {} '{}'", what, text));
  return v;
}

template <typename Int>
Int parse_int(std::string_view text, std::string_view what) {
  Int v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) throw Error(fmt::format("bad {} '{}'", what, text));
  return v;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = line.find(sep, pos);
    out.push_back(line.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
    if (next == std::string_view::npos) return out;
    pos = next + 1;
  }
}

RunRow run_simulated(std::span<const Demand> demands, Scheme scheme, RouteTableCache& cache) {
  RunRow row;
  row.scheme = scheme;
  const auto result = run_simulation(cache, demands, scheme == Scheme::hops ? Policy::hops : Policy::deltime);
  const auto counts = count_outcomes(result);
  row.metrics = compute_metrics(result);
  row.generated = static_cast<double>(counts.generated);
  row.delivered = static_cast<double>(counts.delivered_on_time);
  row.transmissions = static_cast<double>(counts.transmissions);
  return row;
}

RunRow run_lp(const ContactPlan& plan, std::span<const Demand> demands, const LpConfig& cfg) {
  RunRow row;
  row.scheme = Scheme::lp;
  const auto commodities = demands_to_commodities(demands);
  for (const auto& c : commodities) row.generated += c.amount;
  if (row.generated == 0) return row;
  const auto weights =
      cfg.weights.empty() ? StateWeights::linear(plan.grid.state_count) : StateWeights(cfg.weights);
  const auto problem = build_lp(plan, commodities, weights, {cfg.prune, cfg.soft});
  const auto solution = solve_lp(problem);
  switch (solution.status) {
    case lp::Status::optimal:
      break;
    case lp::Status::infeasible:
      row.status = RunStatus::infeasible;
      return row;
    case lp::Status::unbounded:
      row.status = RunStatus::unbounded;
      return row;
    case lp::Status::numerical_failure:
      row.status = RunStatus::numerical_failure;
      return row;
  }
  row.metrics = lp_metrics(problem, solution);
  row.delivered = row.generated;
  for (std::size_t c = 0; c < problem.commodities.size(); ++c) {
    if (cfg.soft) row.delivered -= solution.values[problem.drop_var(c)];
    for (std::size_t a = 0; a < problem.arcs.size(); ++a) row.transmissions += solution.values[problem.flow_var(a, c)];
  }
  return row;
}

json scenario_json(const ScenarioFile& f) {
  const auto& s = f.scenario;
  json j;
  j["topology"] = {{"nodes", s.topology.node_count},
                   {"states", s.topology.grid.state_count},
                   {"state_duration", s.topology.grid.state_duration},
                   {"density", s.topology.density},
                   {"capacity", s.topology.capacity}};
  auto ids = [](const std::vector<NodeId>& v) {
    json a = json::array();
    for (auto id : v) a.push_back(value(id));
    return a;
  };
  j["traffic"] = {{"destination", value(s.traffic.destination)},
                  {"no_ttl_sources", ids(s.traffic.no_ttl_sources)},
                  {"ttl_sources", ids(s.traffic.ttl_sources)},
                  {"ttl", s.traffic.ttl},
                  {"injection", s.traffic.injection == Injection::burst ? "burst" : "per_state"}};
  j["routing"] = {{"k", s.k}};
  json schemes = json::array();
  for (auto sc : s.schemes) schemes.push_back(std::string(to_string(sc)));
  j["schemes"] = schemes;
  j["seeds"] = s.seeds;
  j["loads"] = s.loads;
  j["lp"] = {{"soft", f.lp.soft}, {"prune", f.lp.prune}, {"weights", f.lp.weights}};
  return j;
}

}  // namespace

std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::deltime:
      return "DELTIME";
    case Scheme::hops:
      return "HOPS";
    case Scheme::lp:
      return "LP";
  }
  return "?";
}

Scheme parse_scheme(std::string_view text) {
  std::string upper(text);
  std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
  if (upper == "DELTIME") return Scheme::deltime;
  if (upper == "HOPS") return Scheme::hops;
  if (upper == "LP") return Scheme::lp;
  throw Error(fmt::format("unknown scheme '{}'", text));
}

std::string_view to_string(RunStatus s) {
  switch (s) {
    case RunStatus::ok:
      return "ok";
    case RunStatus::infeasible:
      return "infeasible";
    case RunStatus::unbounded:
      return "unbounded";
    case RunStatus::numerical_failure:
      return "numerical_failure";
    case RunStatus::error:
      return "error";
  }
  return "?";
}

std::string_view to_string(MetricKind m) {
  switch (m) {
    case MetricKind::delivery_ratio:
      return "delivery_ratio";
    case MetricKind::mean_hops:
      return "mean_hops";
    case MetricKind::mean_delay:
      return "mean_delay";
    case MetricKind::energy_efficiency:
      return "energy_efficiency";
  }
  return "?";
}

std::optional<double> metric_of(const Metrics& m, MetricKind kind) {
  switch (kind) {
    case MetricKind::delivery_ratio:
      return m.delivery_ratio;
    case MetricKind::mean_hops:
      return m.mean_hops;
    case MetricKind::mean_delay:
      return m.mean_delay;
    case MetricKind::energy_efficiency:
      return m.energy_efficiency;
  }
  return std::nullopt;
}

ScenarioConfig default_scenario() {
  ScenarioConfig cfg;
  for (std::uint64_t s = 1; s <= 25; ++s) cfg.seeds.push_back(s);
  cfg.loads = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  return cfg;
}

void check_scenario(const ScenarioConfig& cfg, const LpConfig& lp) {
  const auto& topo = cfg.topology;
  if (topo.node_count < 2) throw Error("topology needs at least 2 nodes");
  if (!(topo.density >= 0 && topo.density <= 1)) throw Error("density must lie in [0, 1]");
  if (topo.capacity < 0) throw Error("capacity must be >= 0");
  if (topo.grid.state_count < 1 || !(topo.grid.state_duration > 0)) throw Error("invalid state grid");
  auto in_range = [&](NodeId id) { return value(id) >= 1 && value(id) <= topo.node_count; };
  const auto& tr = cfg.traffic;
  if (!in_range(tr.destination)) throw Error(fmt::format("destination {} is not a node", value(tr.destination)));
  std::set<std::int32_t> seen;
  for (const auto* group : {&tr.no_ttl_sources, &tr.ttl_sources}) {
    for (auto id : *group) {
      if (!in_range(id)) throw Error(fmt::format("source {} is not a node", value(id)));
      if (id == tr.destination) throw Error("the destination cannot be a source");
      if (!seen.insert(value(id)).second) throw Error(fmt::format("source {} listed twice", value(id)));
    }
  }
  if (!(tr.ttl >= 0)) throw Error("ttl must be >= 0");
  if (cfg.k < 1) throw Error("k must be >= 1");
  if (cfg.schemes.empty()) throw Error("no schemes selected");
  std::set<Scheme> schemes(cfg.schemes.begin(), cfg.schemes.end());
  if (schemes.size() != cfg.schemes.size()) throw Error("duplicate scheme");
  if (cfg.seeds.empty()) throw Error("no seeds");
  if (cfg.loads.empty()) throw Error("no loads");
  for (auto l : cfg.loads) {
    if (l < 0) throw Error("loads must be >= 0");
  }
  if (!lp.weights.empty()) {
    if (static_cast<int>(lp.weights.size()) != topo.grid.state_count) {
      throw Error("lp weights must list one weight per state");
    }
    StateWeights check(lp.weights);
  }
}

ScenarioFile parse_scenario(std::string_view text) {
  ScenarioFile out;
  out.scenario = default_scenario();
  auto& s = out.scenario;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(fmt::format("scenario is not valid JSON: {}", e.what()));
  }
  try {
    reject_unknown(j, {"topology", "traffic", "routing", "schemes", "seeds", "loads", "lp"}, "scenario");
    if (j.contains("topology")) {
      const auto& t = j["topology"];
      reject_unknown(t, {"nodes", "states", "state_duration", "density", "capacity"}, "topology");
      s.topology.node_count = t.value("nodes", s.topology.node_count);
      s.topology.grid.state_count = t.value("states", s.topology.grid.state_count);
      s.topology.grid.state_duration = t.value("state_duration", s.topology.grid.state_duration);
      s.topology.density = t.value("density", s.topology.density);
      s.topology.capacity = t.value("capacity", s.topology.capacity);
    }
    if (j.contains("traffic")) {
      const auto& t = j["traffic"];
      reject_unknown(t, {"destination", "no_ttl_sources", "ttl_sources", "ttl", "injection"}, "traffic");
      if (t.contains("destination")) s.traffic.destination = NodeId{t["destination"].get<std::int32_t>()};
      if (t.contains("no_ttl_sources")) s.traffic.no_ttl_sources = node_list(t["no_ttl_sources"], "no_ttl_sources");
      if (t.contains("ttl_sources")) s.traffic.ttl_sources = node_list(t["ttl_sources"], "ttl_sources");
      s.traffic.ttl = t.value("ttl", s.traffic.ttl);
      if (t.contains("injection")) {
        const auto inj = t["injection"].get<std::string>();
        if (inj == "burst") {
          s.traffic.injection = Injection::burst;
        } else if (inj == "per_state") {
          s.traffic.injection = Injection::per_state;
        } else {
          throw Error(fmt::format("unknown injection mode '{}'", inj));
        }
      }
    }
    if (j.contains("routing")) {
      reject_unknown(j["routing"], {"k"}, "routing");
      s.k = j["routing"].value("k", s.k);
    }
    if (j.contains("schemes")) {
      s.schemes.clear();
      for (const auto& v : j["schemes"]) s.schemes.push_back(parse_scheme(v.get<std::string>()));
    }
    if (j.contains("seeds")) s.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    if (j.contains("loads")) s.loads = j["loads"].get<std::vector<std::int64_t>>();
    if (j.contains("lp")) {
      const auto& l = j["lp"];
      reject_unknown(l, {"soft", "prune", "weights"}, "lp");
      out.lp.soft = l.value("soft", out.lp.soft);
      out.lp.prune = l.value("prune", out.lp.prune);
      if (l.contains("weights")) out.lp.weights = l["weights"].get<std::vector<double>>();
    }
  } catch (const json::exception& e) {
    throw Error(fmt::format("invalid scenario: {}", e.what()));
  }
  check_scenario(out.scenario, out.lp);
  return out;
}

std::string scenario_to_json(const ScenarioFile& file) { return scenario_json(file).dump(2) + "\n"; }

std::vector<Demand> build_demands(const ScenarioConfig& cfg, const StateGrid& grid, std::int64_t load) {
  std::vector<std::pair<NodeId, double>> sources;
  for (auto id : cfg.traffic.no_ttl_sources) sources.emplace_back(id, kInfinity);
  for (auto id : cfg.traffic.ttl_sources) sources.emplace_back(id, cfg.traffic.ttl);
  std::sort(sources.begin(), sources.end(), [](const auto& a, const auto& b) { return value(a.first) < value(b.first); });
  std::vector<Demand> out;
  if (load <= 0) return out;
  const int injections = cfg.traffic.injection == Injection::burst ? 1 : grid.state_count;
  for (int q = 0; q < injections; ++q) {
    for (const auto& [id, ttl] : sources) out.push_back({id, cfg.traffic.destination, grid.timestamp(q), ttl, load});
  }
  return out;
}

Scenario build_scenario(const ScenarioConfig& cfg, std::uint64_t seed, std::int64_t load) {
  check_scenario(cfg, {});
  TopologyConfig topo = cfg.topology;
  topo.seed = seed;
  Scenario s;
  s.plan = generate_random_topology(topo);
  s.demands = build_demands(cfg, s.plan.grid, load);
  return s;
}

std::vector<RunRow> run_cell(const ContactPlan& plan, std::span<const Demand> demands, const ScenarioConfig& cfg,
                             const LpConfig& lp, RouteTableCache* cache) {
  std::optional<RouteTableCache> local;
  std::vector<RunRow> rows;
  for (Scheme scheme : kSchemeOrder) {
    if (std::find(cfg.schemes.begin(), cfg.schemes.end(), scheme) == cfg.schemes.end()) continue;
    RunRow row;
    try {
      if (scheme == Scheme::lp) {
        row = run_lp(plan, demands, lp);
      } else {
        if (!cache) {
          local.emplace(plan, cfg.k);
          cache = &*local;
        }
        row = run_simulated(demands, scheme, *cache);
      }
    } catch (const std::exception& e) {
      row = RunRow{};
      row.scheme = scheme;
      row.status = RunStatus::error;
      row.message = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

SweepResult run_sweep(const ScenarioFile& file, int workers) {
  const auto& cfg = file.scenario;
  check_scenario(cfg, file.lp);
  std::vector<std::vector<RunRow>> per_seed(cfg.seeds.size());

  auto run_seed = [&](std::size_t i) {
    const std::uint64_t seed = cfg.seeds[i];
    std::vector<RunRow> rows;
    ContactPlan plan;
    try {
      plan = build_scenario(cfg, seed, 0).plan;
    } catch (const std::exception& e) {
      for (auto load : cfg.loads) {
        for (Scheme scheme : kSchemeOrder) {
          if (std::find(cfg.schemes.begin(), cfg.schemes.end(), scheme) == cfg.schemes.end()) continue;
          RunRow row;
          row.seed = seed;
          row.load = load;
          row.scheme = scheme;
          row.status = RunStatus::error;
          row.message = e.what();
          rows.push_back(std::move(row));
        }
      }
      per_seed[i] = std::move(rows);
      return;
    }
    RouteTableCache cache(plan, cfg.k);
    for (auto load : cfg.loads) {
      const auto demands = build_demands(cfg, plan.grid, load);
      for (auto& row : run_cell(plan, demands, cfg, file.lp, &cache)) {
        row.seed = seed;
        row.load = load;
        rows.push_back(std::move(row));
      }
    }
    per_seed[i] = std::move(rows);
  };

  const int n = std::max(1, std::min<int>(workers, static_cast<int>(cfg.seeds.size())));
  if (n == 1) {
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i) run_seed(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < n; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < cfg.seeds.size(); i = next++) run_seed(i);
      });
    }
    for (auto& t : pool) t.join();
  }

  SweepResult result;
  result.config = file;
  for (auto& rows : per_seed) {
    for (auto& r : rows) result.runs.push_back(std::move(r));
  }
  return result;
}

std::optional<Summary> summarize_cell(const SweepResult& result, Scheme scheme, std::int64_t load, MetricKind kind) {
  std::vector<double> xs;
  for (const auto& r : result.runs) {
    if (r.scheme != scheme || r.load != load || r.status != RunStatus::ok) continue;
    if (auto v = metric_of(r.metrics, kind)) xs.push_back(*v);
  }
  if (xs.empty()) return std::nullopt;
  Summary s;
  s.n = static_cast<int>(xs.size());
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / s.n;
  if (s.n >= 2) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(ss / (s.n - 1));
  }
  return s;
}

std::string panel_csv(const SweepResult& result, MetricKind kind) {
  const auto& cfg = result.config.scenario;
  std::vector<Scheme> schemes;
  for (Scheme s : kSchemeOrder) {
    if (std::find(cfg.schemes.begin(), cfg.schemes.end(), s) != cfg.schemes.end()) schemes.push_back(s);
  }
  std::string out = "load";
  for (Scheme s : schemes) out += fmt::format(",{0}_mean,{0}_std,{0}_n", to_string(s));
  out += '\n';
  for (auto load : cfg.loads) {
    out += std::to_string(load);
    for (Scheme s : schemes) {
      const auto sum = summarize_cell(result, s, load, kind);
      if (sum) {
        out += fmt::format(",{},{},{}", num(sum->mean), opt_num(sum->stddev), sum->n);
      } else {
        out += ",,,0";
      }
    }
    out += '\n';
  }
  return out;
}

std::string runs_to_csv(const SweepResult& result) {
  std::string out =
      "seed,load,scheme,status,generated,delivered,transmissions,delivery_ratio,mean_hops,mean_delay,"
      "energy_efficiency,message\n";
  for (const auto& r : result.runs) {
    std::string msg = r.message;
    std::replace(msg.begin(), msg.end(), ',', ';');
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", r.seed, r.load, to_string(r.scheme),
                       to_string(r.status), num(r.generated), num(r.delivered), num(r.transmissions),
                       opt_num(r.metrics.delivery_ratio), opt_num(r.metrics.mean_hops),
                       opt_num(r.metrics.mean_delay), opt_num(r.metrics.energy_efficiency), msg);
  }
  return out;
}

SweepResult runs_from_csv(const ScenarioFile& config, std::string_view csv) {
  SweepResult result;
  result.config = config;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos < csv.size()) {
    const auto nl = csv.find('\n', pos);
    std::string_view line = csv.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? csv.size() : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line_no == 1 || line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 12) throw Error(fmt::format("runs.csv line {}: expected 12 fields", line_no));
    RunRow r;
    r.seed = parse_int<std::uint64_t>(f[0], "seed");
    r.load = parse_int<std::int64_t>(f[1], "load");
    r.scheme = parse_scheme(f[2]);
    const std::string_view status = f[3];
    bool known = false;
    for (auto s : {RunStatus::ok, RunStatus::infeasible, RunStatus::unbounded, RunStatus::numerical_failure,
                   RunStatus::error}) {
      if (to_string(s) == status) {
        r.status = s;
        known = true;
      }
    }
    if (!known) throw Error(fmt::format("runs.csv line {}: unknown status '{}'", line_no, status));
    r.generated = parse_double(f[4], "generated");
    r.delivered = parse_double(f[5], "delivered");
    r.transmissions = parse_double(f[6], "transmissions");
    auto opt = [](std::string_view t) -> std::optional<double> {
      if (t.empty()) return std::nullopt;
      return parse_double(t, "metric");
    };
    r.metrics.delivery_ratio = opt(f[7]);
    r.metrics.mean_hops = opt(f[8]);
    r.metrics.mean_delay = opt(f[9]);
    r.metrics.energy_efficiency = opt(f[10]);
    r.message = std::string(f[11]);
    result.runs.push_back(std::move(r));
  }
  return result;
}

std::uint64_t config_hash(const ScenarioFile& cfg) {
  const std::string text = scenario_json(cfg).dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string manifest_json(const SweepResult& result) {
  json j;
  j["tool"] = "dtnlab";
  j["version"] = std::string(kToolVersion);
  j["config_hash"] = fmt::format("{:016x}", config_hash(result.config));
  j["seeds"] = result.config.scenario.seeds;
  j["config"] = scenario_json(result.config);
  json files = json::array({"runs.csv"});
  for (auto kind : kAllMetrics) files.push_back(fmt::format("panel_{}.csv", to_string(kind)));
  j["files"] = files;
  return j.dump(2) + "\n";
}

void write_sweep(const SweepResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file(dir / "runs.csv", runs_to_csv(result));
  write_file(dir / "manifest.json", manifest_json(result));
  for (auto kind : kAllMetrics) write_file(dir / fmt::format("panel_{}.csv", to_string(kind)), panel_csv(result, kind));
}

SweepResult report_sweep(const std::filesystem::path& dir, const std::filesystem::path& out) {
  json manifest;
  try {
    manifest = json::parse(read_file(dir / "manifest.json"));
  } catch (const json::exception& e) {
    throw Error(fmt::format("bad manifest: {}", e.what()));
  }
  if (!manifest.contains("config")) throw Error("manifest has no config");
  const auto config = parse_scenario(manifest["config"].dump());
  auto result = runs_from_csv(config, read_file(dir / "runs.csv"));
  std::filesystem::create_directories(out);
  for (auto kind : kAllMetrics) write_file(out / fmt::format("panel_{}.csv", to_string(kind)), panel_csv(result, kind));
  return result;
}

}  // namespace dtnlab
