// Command-line front end: solve one instance, trace one simulation, run a
// full sweep, or compare bandwidth calibration variants.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "ensim/cosched.hpp"
#include "ensim/experiment.hpp"
#include "ensim/rounding.hpp"
#include "ensim/sim.hpp"

namespace {

using nlohmann::json;

struct CommonOpts {
  std::string config_path;
  std::string out_path = "-";
  std::string format = "csv";
  long long seed_override = -1;
  std::string calibration;
  std::string policy;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "Experiment config file (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", opts.out_path, "Output path ('-' for stdout)");
  cmd->add_option("--format", opts.format, "Output format")
      ->check(CLI::IsMember({"csv", "jsonl"}));
  cmd->add_option("--seed-override", opts.seed_override,
                  "Replace the seed list with seed, seed+1, ...");
  cmd->add_option("--calibration", opts.calibration, "Bandwidth calibration variant")
      ->check(CLI::IsMember({"baseline", "b1", "b2", "b3"}));
  cmd->add_option("--policy", opts.policy, "Restrict to one <node>:<core> policy pair");
}

ensim::ExperimentConfig load_config(const CommonOpts& opts) {
  ensim::ExperimentConfig cfg = ensim::parse_config(opts.config_path);
  if (opts.seed_override >= 0) {
    cfg.seeds.clear();
    for (int i = 0; i < cfg.trials; ++i) {
      cfg.seeds.push_back(static_cast<std::uint64_t>(opts.seed_override + i));
    }
  }
  if (!opts.calibration.empty()) cfg.calibration = ensim::parse_variant(opts.calibration);
  if (!opts.policy.empty()) cfg.policies = {ensim::parse_policy(opts.policy)};
  return cfg;
}

void write_output(const std::string& content, const std::string& path) {
  if (path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
}

// First sweep value / scenario / seed of the config: the instance the solve
// and simulate sub-commands operate on.
struct OneInstance {
  ensim::Instance instance;
  ensim::ScenarioSpec scenario;
  double sweep_value = 0.0;
  std::uint64_t seed = 0;
};

OneInstance first_instance(const ensim::ExperimentConfig& cfg) {
  OneInstance one;
  one.scenario = cfg.scenarios.front();
  one.sweep_value = cfg.sweep_values.empty() ? 0.0 : cfg.sweep_values.front();
  one.seed = cfg.seeds.front();
  one.instance = ensim::make_instance(cfg, one.scenario, one.sweep_value, one.seed);
  return one;
}

int cmd_solve(const CommonOpts& opts) {
  const auto cfg = load_config(opts);
  const auto one = first_instance(cfg);
  const auto& inst = one.instance;
  const auto policy = cfg.policies.front();

  const auto solution =
      ensim::policy_alloc(inst.partition, inst.ensemble, inst.platform, policy.node, policy.core);
  const auto integer =
      ensim::round_allocation(solution, inst.ensemble, inst.partition, inst.platform);

  json out;
  out["scenario"] = ensim::scenario_name(one.scenario);
  out["seed"] = one.seed;
  out["node_policy"] = ensim::policy_name(policy.node);
  out["core_policy"] = ensim::policy_name(policy.core);
  out["t_star"] = solution.equalized_time;
  out["n_tilde"] = solution.n_tilde;
  out["u_per_group"] = solution.u_star_per_group;
  for (const auto& [id, a] : solution.allocation.apps) {
    out["rational"][id] = {{"nodes", a.nodes}, {"cores", a.cores}};
  }
  for (const auto& [id, a] : integer.apps) {
    out["integer"][id] = {{"nodes", static_cast<long long>(a.nodes)},
                          {"cores", static_cast<long long>(a.cores)}};
  }
  out["modeled_makespan"] = ensim::modeled_makespan(inst.ensemble, inst.partition, integer,
                                                    inst.platform.bandwidth_per_node);
  write_output(out.dump(2) + "\n", opts.out_path);
  return 0;
}

int cmd_simulate(const CommonOpts& opts) {
  const auto cfg = load_config(opts);
  const auto one = first_instance(cfg);
  const auto& inst = one.instance;
  const auto policy = cfg.policies.front();

  const auto solution =
      ensim::policy_alloc(inst.partition, inst.ensemble, inst.platform, policy.node, policy.core);
  const auto integer =
      ensim::round_allocation(solution, inst.ensemble, inst.partition, inst.platform);
  const auto report =
      ensim::simulate(inst.ensemble, inst.partition, integer, inst.platform, cfg.pipeline_depth);
  write_output(ensim::trace_csv(report), opts.out_path);
  return 0;
}

int cmd_sweep(const CommonOpts& opts) {
  const auto cfg = load_config(opts);
  const auto rows = ensim::run_experiment(cfg);
  write_output(ensim::export_rows(rows, opts.format), opts.out_path);
  for (const auto& r : rows) {
    if (!r.error.empty()) return 1;
  }
  return 0;
}

int cmd_calibrate(const CommonOpts& opts) {
  const auto cfg = load_config(opts);
  const auto policy = cfg.policies.front();
  std::vector<double> values = cfg.sweep_values;
  if (values.empty()) values.push_back(0.0);

  std::string out = "scenario,sweep_value,seed,variant,effective_bandwidth,estimate,simulated,ratio\n";
  bool any_error = false;
  char buf[256];
  for (double value : values) {
    for (const auto& scenario : cfg.scenarios) {
      for (int trial = 0; trial < cfg.trials; ++trial) {
        const std::uint64_t seed = cfg.seeds[trial];
        try {
          const auto inst = ensim::make_instance(cfg, scenario, value, seed);
          const auto solution = ensim::policy_alloc(inst.partition, inst.ensemble, inst.platform,
                                                    policy.node, policy.core);
          const auto integer =
              ensim::round_allocation(solution, inst.ensemble, inst.partition, inst.platform);
          const auto report = ensim::simulate(inst.ensemble, inst.partition, integer,
                                              inst.platform, cfg.pipeline_depth);
          double n_tilde_int = 0.0;
          for (const auto& g : inst.partition.not_co_scheduled) {
            if (!g.empty()) n_tilde_int += integer.at(*g.begin()).nodes;
          }
          for (const auto variant :
               {ensim::BandwidthVariant::Baseline, ensim::BandwidthVariant::B1,
                ensim::BandwidthVariant::B2, ensim::BandwidthVariant::B3}) {
            const auto cal =
                ensim::calibrate_bandwidth(inst.platform, inst.partition, n_tilde_int, variant);
            const double estimate = ensim::modeled_makespan(inst.ensemble, inst.partition,
                                                            integer, cal.effective_bandwidth);
            std::snprintf(buf, sizeof(buf), "%s,%.12g,%llu,%s,%.12g,%.12g,%.12g,%.12g\n",
                          ensim::scenario_name(scenario).c_str(), value,
                          static_cast<unsigned long long>(seed),
                          ensim::variant_name(variant).c_str(), cal.effective_bandwidth,
                          estimate, report.makespan, report.makespan / estimate);
            out += buf;
          }
        } catch (const std::exception& e) {
          any_error = true;
          std::snprintf(buf, sizeof(buf), "%s,%.12g,%llu,error,,,,\n",
                        ensim::scenario_name(scenario).c_str(), value,
                        static_cast<unsigned long long>(seed));
          out += buf;
          std::cerr << "calibrate: row failed: " << e.what() << "\n";
        }
      }
    }
  }
  write_output(out, opts.out_path);
  return any_error ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Co-scheduling and co-allocation toolkit for in-situ workflow ensembles"};
  app.require_subcommand(1);

  CommonOpts solve_opts, simulate_opts, sweep_opts, calibrate_opts;
  auto* solve = app.add_subcommand("solve", "Solve one instance and print the allocation");
  add_common(solve, solve_opts);
  auto* simulate = app.add_subcommand("simulate", "Simulate one instance and print the trace");
  add_common(simulate, simulate_opts);
  auto* sweep = app.add_subcommand("sweep", "Run the full experiment product");
  add_common(sweep, sweep_opts);
  auto* calibrate =
      app.add_subcommand("calibrate", "Compare bandwidth variants against the simulator");
  add_common(calibrate, calibrate_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return cmd_solve(solve_opts);
    if (simulate->parsed()) return cmd_simulate(simulate_opts);
    if (sweep->parsed()) return cmd_sweep(sweep_opts);
    if (calibrate->parsed()) return cmd_calibrate(calibrate_opts);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
