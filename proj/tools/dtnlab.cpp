// dtnlab: command-line front end.
//
// Exit status: 0 success, 1 domain error (bad plan, infeasible LP, failed
// verification), 2 usage error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "dtnlab/experiments.hpp"

namespace {

using namespace dtnlab;
using nlohmann::json;

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot read {}", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, std::string_view text) {
  if (path.empty() || path == "-") {
    std::fwrite(text.data(), 1, text.size(), stdout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write {}", path));
  out << text;
}

ContactPlan load_plan(const std::string& path) { return parse_contact_plan(read_text(path)); }

json metrics_object(const Metrics& m) { return json::parse(metrics_to_json(m)); }

std::vector<double> parse_weights(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(fmt::format("bad weight '{}'", item));
    }
  }
  return out;
}

StateWeights weights_for(const ContactPlan& plan, const std::string& text) {
  if (text.empty()) return StateWeights::linear(plan.grid.state_count);
  return StateWeights(parse_weights(text));
}

json violations_json(const std::vector<Violation>& vs) {
  json arr = json::array();
  for (const auto& v : vs) arr.push_back({{"constraint", std::string(to_string(v.tag))}, {"where", v.where}, {"excess", v.excess}});
  return arr;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dtnlab: contact graph routing and LP bound experiments"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "write a random contact plan");
  TopologyConfig topo;
  int gen_states = topo.grid.state_count;
  double gen_dur = topo.grid.state_duration;
  std::string gen_out;
  std::string gen_demands_out;
  std::int64_t gen_load = 0;
  gen->add_option("--nodes", topo.node_count, "node count")->capture_default_str();
  gen->add_option("--states", gen_states, "state count")->capture_default_str();
  gen->add_option("--dur", gen_dur, "state duration in seconds")->capture_default_str();
  gen->add_option("--density", topo.density, "per-state link probability")->capture_default_str();
  gen->add_option("--capacity", topo.capacity, "packets per contact per state")->capture_default_str();
  gen->add_option("--seed", topo.seed, "random seed")->capture_default_str();
  gen->add_option("--out", gen_out, "plan file (default stdout)");
  gen->add_option("--demands-out", gen_demands_out, "also write the default all-to-one demands for --load");
  gen->add_option("--load", gen_load, "packets per source for --demands-out")->capture_default_str();

  // validate
  auto* val = app.add_subcommand("validate", "check a contact plan");
  std::string val_plan;
  val->add_option("--plan", val_plan, "plan file")->required();

  // routes
  auto* routes = app.add_subcommand("routes", "dump a node's route table as CSV");
  std::string routes_plan;
  int routes_node = 0;
  std::vector<int> routes_dest;
  double routes_t = 0.0;
  int routes_k = 10;
  routes->add_option("--plan", routes_plan, "plan file")->required();
  routes->add_option("--node", routes_node, "table owner")->required();
  routes->add_option("--dest", routes_dest, "destinations (default all other nodes)");
  routes->add_option("--t-now", routes_t, "computation time")->capture_default_str();
  routes->add_option("--k", routes_k, "routes per destination")->capture_default_str();

  // sim
  auto* sim = app.add_subcommand("sim", "run one simulation, print metrics JSON");
  std::string sim_plan, sim_demands, sim_policy = "deltime", sim_records;
  int sim_k = 10;
  sim->add_option("--plan", sim_plan, "plan file")->required();
  sim->add_option("--demands", sim_demands, "demands JSON")->required();
  sim->add_option("--policy", sim_policy, "deltime or hops")->capture_default_str();
  sim->add_option("--k", sim_k, "routes per destination")->capture_default_str();
  sim->add_option("--records", sim_records, "per-packet CSV output");

  // lp
  auto* lpc = app.add_subcommand("lp", "solve the LP bound, print metrics JSON");
  std::string lp_plan, lp_demands, lp_weights, lp_solution, lp_file;
  bool lp_soft = false, lp_no_prune = false;
  lpc->add_option("--plan", lp_plan, "plan file")->required();
  lpc->add_option("--demands", lp_demands, "demands JSON")->required();
  lpc->add_option("--weights", lp_weights, "comma-separated per-state weights (default 1,2,...)");
  lpc->add_flag("--soft", lp_soft, "allow priced drops");
  lpc->add_flag("--no-prune", lp_no_prune, "keep unreachable variables");
  lpc->add_option("--solution", lp_solution, "write nonzero flows as CSV");
  lpc->add_option("--lp-file", lp_file, "write the model in LP format");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "run a scenario sweep");
  std::string sweep_config, sweep_out;
  int sweep_workers = 1;
  sweep->add_option("--config", sweep_config, "scenario JSON (default built-in scenario)");
  sweep->add_option("--out", sweep_out, "output directory")->required();
  sweep->add_option("--workers", sweep_workers, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);

  // verify
  auto* ver = app.add_subcommand("verify", "re-check a stored LP solution");
  std::string ver_plan, ver_demands, ver_solution, ver_weights;
  bool ver_soft = false;
  double ver_tol = 1e-6;
  ver->add_option("--plan", ver_plan, "plan file")->required();
  ver->add_option("--demands", ver_demands, "demands JSON")->required();
  ver->add_option("--solution", ver_solution, "flow CSV from lp --solution")->required();
  ver->add_option("--weights", ver_weights, "per-state weights used for the objective");
  ver->add_flag("--soft", ver_soft, "solution comes from a soft model");
  ver->add_option("--tol", ver_tol, "absolute tolerance")->capture_default_str();

  // report
  auto* rep = app.add_subcommand("report", "rebuild the panels of a sweep directory");
  std::string rep_dir, rep_out;
  rep->add_option("--dir", rep_dir, "sweep directory")->required();
  rep->add_option("--out", rep_out, "panel directory (default --dir)");

  if (argc < 2) {
    std::cerr << app.help();
    return 2;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*gen) {
      topo.grid = StateGrid{gen_states, gen_dur};
      const auto plan = generate_random_topology(topo);
      std::string text = fmt::format(
          "# dtnlab {} gen --nodes {} --states {} --dur {} --density {} --capacity {} --seed {}\n", kToolVersion,
          topo.node_count, gen_states, gen_dur, topo.density, topo.capacity, topo.seed);
      text += serialize_contact_plan(plan);
      write_text(gen_out, text);
      if (!gen_demands_out.empty()) {
        auto cfg = default_scenario();
        cfg.topology = topo;
        check_scenario(cfg, {});
        write_text(gen_demands_out, demands_to_json(build_demands(cfg, plan.grid, gen_load)));
      }
    } else if (*val) {
      try {
        const auto plan = load_plan(val_plan);
        const auto diags = validate(plan);
        for (const auto& d : diags) fmt::print("{}: {}\n", d.code, d.message);
        if (!diags.empty()) return 1;
        fmt::print("ok: {} nodes, {} contacts, {} states of {} s\n", plan.nodes.size(), plan.contacts.size(),
                   plan.grid.state_count, plan.grid.state_duration);
      } catch (const PlanError& e) {
        fmt::print("{}: {}\n", val_plan, e.what());
        return 1;
      }
    } else if (*routes) {
      const auto plan = load_plan(routes_plan);
      std::set<NodeId> dests;
      if (routes_dest.empty()) {
        for (const auto& n : plan.nodes) {
          if (value(n.id) != routes_node) dests.insert(n.id);
        }
      } else {
        for (int d : routes_dest) dests.insert(NodeId{d});
      }
      const auto table = build_route_table(plan, NodeId{routes_node}, routes_t, routes_k, dests);
      std::string out = "route_id,owner,dest,contacts,delivery_time,hops,expiration,max_volume\n";
      int id = 0;
      for (const auto& [dest, list] : table.routes) {
        for (const auto& r : list) {
          std::string contacts;
          for (std::size_t i = 0; i < r.contacts.size(); ++i) {
            if (i) contacts += ' ';
            contacts += std::to_string(value(r.contacts[i]));
          }
          out += fmt::format("{},{},{},{},{},{},{},{}\n", ++id, routes_node, value(dest), contacts, r.delivery_time,
                             r.hops, r.expiration, r.max_volume);
        }
      }
      write_text("", out);
    } else if (*sim) {
      const auto plan = load_plan(sim_plan);
      const auto demands = parse_demands(read_text(sim_demands));
      const auto policy = parse_policy(sim_policy);
      const auto result = run_simulation(plan, demands, policy, sim_k);
      if (!sim_records.empty()) write_text(sim_records, records_to_csv(result));
      json j = metrics_object(compute_metrics(result));
      json manifest;
      manifest["command"] = "sim";
      manifest["version"] = std::string(kToolVersion);
      manifest["policy"] = std::string(to_string(policy));
      manifest["k"] = sim_k;
      j["manifest"] = manifest;
      fmt::print("{}\n", j.dump());
    } else if (*lpc) {
      const auto plan = load_plan(lp_plan);
      const auto demands = parse_demands(read_text(lp_demands));
      const auto problem =
          build_lp(plan, demands_to_commodities(demands), weights_for(plan, lp_weights), {!lp_no_prune, lp_soft});
      if (!lp_file.empty()) write_text(lp_file, to_lp_format(problem));
      const auto solution = solve_lp(problem);
      json j;
      j["status"] = std::string(lp::to_string(solution.status));
      json manifest;
      manifest["command"] = "lp";
      manifest["version"] = std::string(kToolVersion);
      manifest["soft"] = lp_soft;
      manifest["prune"] = !lp_no_prune;
      manifest["weights"] = lp_weights.empty() ? std::string("linear") : lp_weights;
      j["manifest"] = manifest;
      if (solution.status == lp::Status::optimal) {
        const json metrics = metrics_object(lp_metrics(problem, solution));
        for (const auto& [k, v] : metrics.items()) j[k] = v;
        j["objective"] = solution.objective;
        j["violations"] = violations_json(verify_solution(problem, solution, 1e-6));
        if (!lp_solution.empty()) write_text(lp_solution, solution_to_csv(problem, solution));
      }
      fmt::print("{}\n", j.dump());
      if (solution.status != lp::Status::optimal) return 1;
    } else if (*sweep) {
      ScenarioFile file{default_scenario(), {}};
      if (!sweep_config.empty()) file = parse_scenario(read_text(sweep_config));
      const auto result = run_sweep(file, sweep_workers);
      write_sweep(result, sweep_out);
      fmt::print("{}", manifest_json(result));
    } else if (*ver) {
      const auto plan = load_plan(ver_plan);
      const auto demands = parse_demands(read_text(ver_demands));
      const auto problem =
          build_lp(plan, demands_to_commodities(demands), weights_for(plan, ver_weights), {true, ver_soft});
      const auto solution = solution_from_csv(problem, read_text(ver_solution));
      const auto violations = verify_solution(problem, solution, ver_tol);
      json j;
      j["valid"] = violations.empty();
      j["objective"] = solution.objective;
      j["violations"] = violations_json(violations);
      fmt::print("{}\n", j.dump());
      if (!violations.empty()) return 1;
    } else if (*rep) {
      const auto result = report_sweep(rep_dir, rep_out.empty() ? rep_dir : rep_out);
      json j;
      j["config_hash"] = fmt::format("{:016x}", config_hash(result.config));
      j["runs"] = result.runs.size();
      json cells = json::array();
      for (auto kind : kAllMetrics) cells.push_back(fmt::format("panel_{}.csv", to_string(kind)));
      j["files"] = cells;
      fmt::print("{}\n", j.dump());
    }
  } catch (const PlanError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
