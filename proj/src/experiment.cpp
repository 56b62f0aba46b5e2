#include "ensim/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "ensim/rounding.hpp"
#include "ensim/sim.hpp"

namespace ensim {

using nlohmann::json;

namespace {

constexpr double kGB = 1e9;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

std::string policy_name(NodePolicy p) {
  return p == NodePolicy::CoAlloc ? "coalloc" : "evalloc";
}

std::string policy_name(CorePolicy p) {
  return p == CorePolicy::CoAlloc ? "coalloc" : "evalloc";
}

PolicyPair parse_policy(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) {
    throw std::invalid_argument("parse_policy(): expected <node>:<core> in '" + spec + "'");
  }
  auto parse_one = [&](const std::string& s) {
    if (s == "coalloc") return 0;
    if (s == "evalloc") return 1;
    throw std::invalid_argument("parse_policy(): unknown policy '" + s +
                                "' (expected coalloc or evalloc)");
  };
  PolicyPair p;
  p.node = parse_one(spec.substr(0, colon)) == 0 ? NodePolicy::CoAlloc : NodePolicy::EvAlloc;
  p.core = parse_one(spec.substr(colon + 1)) == 0 ? CorePolicy::CoAlloc : CorePolicy::EvAlloc;
  return p;
}

std::string variant_name(BandwidthVariant v) {
  switch (v) {
    case BandwidthVariant::Baseline:
      return "baseline";
    case BandwidthVariant::B1:
      return "b1";
    case BandwidthVariant::B2:
      return "b2";
    case BandwidthVariant::B3:
      return "b3";
  }
  return "unknown";
}

BandwidthVariant parse_variant(const std::string& name) {
  if (name == "baseline") return BandwidthVariant::Baseline;
  if (name == "b1") return BandwidthVariant::B1;
  if (name == "b2") return BandwidthVariant::B2;
  if (name == "b3") return BandwidthVariant::B3;
  throw std::invalid_argument("parse_variant(): unknown calibration '" + name + "'");
}

std::string sweep_axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::None:
      return "none";
    case SweepAxis::DataVolume:
      return "data_volume";
    case SweepAxis::NNodes:
      return "n_nodes";
    case SweepAxis::AnalysesPerSim:
      return "analyses_per_sim";
    case SweepAxis::NSims:
      return "n_sims";
  }
  return "unknown";
}

namespace {

SweepAxis parse_axis(const std::string& name) {
  if (name == "data_volume") return SweepAxis::DataVolume;
  if (name == "n_nodes") return SweepAxis::NNodes;
  if (name == "analyses_per_sim") return SweepAxis::AnalysesPerSim;
  if (name == "n_sims") return SweepAxis::NSims;
  throw std::invalid_argument("sweep.axis: unknown axis '" + name + "'");
}

void reject_unknown_keys(const json& obj, const std::vector<std::string>& known,
                         const std::string& where, std::vector<std::string>& errors) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      errors.push_back(where + ": unknown key '" + key + "'");
    }
  }
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config parse error: ") + e.what());
  }

  std::vector<std::string> errors;
  ExperimentConfig cfg;

  reject_unknown_keys(root,
                      {"platform", "generator", "scenarios", "policies", "sweep", "trials",
                       "seeds", "calibration", "pipeline_depth"},
                      "config", errors);

  try {
    if (!root.contains("platform")) {
      errors.push_back("platform: required section missing");
    } else {
      const auto& p = root["platform"];
      reject_unknown_keys(p, {"nodes", "cores_per_node", "mem_per_node_gb", "bandwidth_gbps"},
                          "platform", errors);
      cfg.platform.n_nodes = p.value("nodes", 0);
      cfg.platform.cores_per_node = p.value("cores_per_node", 0);
      cfg.platform.mem_per_node = p.value("mem_per_node_gb", 0.0) * kGB;
      cfg.platform.bandwidth_per_node = p.value("bandwidth_gbps", 0.0) * kGB;
      if (cfg.platform.n_nodes <= 0) errors.push_back("platform.nodes: must be positive");
      if (cfg.platform.cores_per_node <= 0) {
        errors.push_back("platform.cores_per_node: must be positive");
      }
      if (cfg.platform.mem_per_node <= 0) {
        errors.push_back("platform.mem_per_node_gb: must be positive");
      }
      if (cfg.platform.bandwidth_per_node <= 0) {
        errors.push_back("platform.bandwidth_gbps: must be positive");
      }
    }

    if (!root.contains("generator")) {
      errors.push_back("generator: required section missing");
    } else {
      const auto& g = root["generator"];
      reject_unknown_keys(g,
                          {"n_sims", "analyses_per_sim", "sim_seq_time", "analysis_time_range",
                           "data_volume_gb", "sim_mem_gb", "analysis_mem_gb", "n_steps"},
                          "generator", errors);
      cfg.generator.n_sims = g.value("n_sims", 0);
      cfg.generator.analyses_per_sim = g.value("analyses_per_sim", 0);
      cfg.generator.sim_seq_time = g.value("sim_seq_time", 0.0);
      if (g.contains("analysis_time_range")) {
        const auto& r = g["analysis_time_range"];
        if (!r.is_array() || r.size() != 2) {
          errors.push_back("generator.analysis_time_range: expected [lo, hi]");
        } else {
          cfg.generator.analysis_time_lo = r[0].get<double>();
          cfg.generator.analysis_time_hi = r[1].get<double>();
        }
      }
      cfg.generator.data_volume = g.value("data_volume_gb", 0.0) * kGB;
      cfg.generator.sim_mem = g.value("sim_mem_gb", 0.0) * kGB;
      cfg.generator.analysis_mem = g.value("analysis_mem_gb", 0.0) * kGB;
      cfg.generator.n_steps = g.value("n_steps", 1);
      if (cfg.generator.n_sims <= 0) errors.push_back("generator.n_sims: must be positive");
      if (cfg.generator.analyses_per_sim <= 0) {
        errors.push_back("generator.analyses_per_sim: must be positive");
      }
      if (cfg.generator.sim_seq_time <= 0) {
        errors.push_back("generator.sim_seq_time: must be positive");
      }
      if (cfg.generator.analysis_time_lo <= 0 ||
          cfg.generator.analysis_time_hi < cfg.generator.analysis_time_lo) {
        errors.push_back("generator.analysis_time_range: need 0 < lo <= hi");
      }
      if (cfg.generator.data_volume < 0) {
        errors.push_back("generator.data_volume_gb: must be non-negative");
      }
      if (cfg.generator.n_steps < 1) errors.push_back("generator.n_steps: must be at least 1");
    }

    if (root.contains("scenarios")) {
      for (const auto& s : root["scenarios"]) {
        try {
          cfg.scenarios.push_back(parse_scenario(s.get<std::string>()));
        } catch (const std::exception& e) {
          errors.push_back(std::string("scenarios: ") + e.what());
        }
      }
      if (cfg.scenarios.empty()) errors.push_back("scenarios: list is empty");
    } else {
      for (const char* name :
           {"ideal", "increasing-25", "increasing-50", "increasing-75", "in-transit"}) {
        cfg.scenarios.push_back(parse_scenario(name));
      }
    }

    if (root.contains("policies")) {
      for (const auto& p : root["policies"]) {
        try {
          cfg.policies.push_back(
              parse_policy(p.value("node", "coalloc") + ":" + p.value("core", "coalloc")));
        } catch (const std::exception& e) {
          errors.push_back(std::string("policies: ") + e.what());
        }
      }
      if (cfg.policies.empty()) errors.push_back("policies: list is empty");
    } else {
      cfg.policies.push_back({NodePolicy::CoAlloc, CorePolicy::CoAlloc});
    }

    if (root.contains("sweep")) {
      const auto& s = root["sweep"];
      reject_unknown_keys(s, {"axis", "values"}, "sweep", errors);
      try {
        cfg.sweep_axis = parse_axis(s.value("axis", ""));
      } catch (const std::exception& e) {
        errors.push_back(e.what());
      }
      for (const auto& v : s.value("values", std::vector<double>{})) {
        double value = v;
        if (cfg.sweep_axis == SweepAxis::DataVolume) value *= kGB;
        if (value <= 0) errors.push_back("sweep.values: must be positive");
        cfg.sweep_values.push_back(value);
      }
      if (cfg.sweep_values.empty()) errors.push_back("sweep.values: list is empty");
    }

    cfg.trials = root.value("trials", 5);
    if (cfg.trials < 1) errors.push_back("trials: must be at least 1");
    if (root.contains("seeds")) {
      for (const auto& s : root["seeds"]) cfg.seeds.push_back(s.get<std::uint64_t>());
    } else {
      for (int i = 1; i <= cfg.trials; ++i) cfg.seeds.push_back(static_cast<std::uint64_t>(i));
    }
    if (static_cast<int>(cfg.seeds.size()) < cfg.trials) {
      errors.push_back("seeds: need at least 'trials' entries");
    }

    if (root.contains("calibration")) {
      try {
        cfg.calibration = parse_variant(root["calibration"].get<std::string>());
      } catch (const std::exception& e) {
        errors.push_back(std::string("calibration: ") + e.what());
      }
    }
    cfg.pipeline_depth = root.value("pipeline_depth", 1);
    if (cfg.pipeline_depth < 1) errors.push_back("pipeline_depth: must be at least 1");
  } catch (const json::exception& e) {
    errors.push_back(std::string("config type error: ") + e.what());
  }

  if (!errors.empty()) {
    std::string joined = "invalid config:";
    for (const auto& e : errors) joined += "\n  - " + e;
    throw std::invalid_argument(joined);
  }
  return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("parse_config(): cannot read '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

Instance make_instance(const ExperimentConfig& cfg, const ScenarioSpec& scenario,
                       double sweep_value, std::uint64_t seed) {
  Instance inst;
  inst.platform = cfg.platform;
  GeneratorConfig g = cfg.generator;
  switch (cfg.sweep_axis) {
    case SweepAxis::None:
      break;
    case SweepAxis::DataVolume:
      g.data_volume = sweep_value;
      break;
    case SweepAxis::NNodes:
      inst.platform.n_nodes = static_cast<int>(std::lround(sweep_value));
      break;
    case SweepAxis::AnalysesPerSim:
      g.analyses_per_sim = static_cast<int>(std::lround(sweep_value));
      break;
    case SweepAxis::NSims:
      g.n_sims = static_cast<int>(std::lround(sweep_value));
      break;
  }
  g.seed = seed;
  inst.ensemble = generate_ensemble(g);
  inst.partition = make_partition(inst.ensemble, scenario);
  return inst;
}

namespace {

std::string digest(const Allocation& alloc) {
  std::string out;
  for (const auto& [id, a] : alloc.apps) {
    if (!out.empty()) out += " ";
    out += id + ":" + std::to_string(static_cast<long long>(a.nodes)) + "x" +
           std::to_string(static_cast<long long>(a.cores));
  }
  return out;
}

}  // namespace

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg) {
  std::vector<double> values = cfg.sweep_values;
  if (values.empty()) values.push_back(0.0);

  std::vector<ResultRow> rows;
  for (double value : values) {
    for (const auto& scenario : cfg.scenarios) {
      for (const auto& policy : cfg.policies) {
        for (int trial = 0; trial < cfg.trials; ++trial) {
          ResultRow row;
          row.scenario = scenario_name(scenario);
          row.sweep_value = value;
          row.node_policy = policy_name(policy.node);
          row.core_policy = policy_name(policy.core);
          row.seed = cfg.seeds[trial];
          try {
            const Instance inst = make_instance(cfg, scenario, value, row.seed);
            row.pc_size = inst.partition.co_count();
            row.pnc_size = inst.partition.remote_count();

            const RationalSolution solution =
                policy_alloc(inst.partition, inst.ensemble, inst.platform, policy.node,
                             policy.core);
            row.t_star = solution.equalized_time;

            const Allocation integer =
                round_allocation(solution, inst.ensemble, inst.partition, inst.platform);
            row.alloc_digest = digest(integer);
            row.modeled = modeled_makespan(inst.ensemble, inst.partition, integer,
                                           inst.platform.bandwidth_per_node);

            double n_tilde_int = 0.0;
            for (const auto& g : inst.partition.not_co_scheduled) {
              if (!g.empty()) n_tilde_int += integer.at(*g.begin()).nodes;
            }
            const CalibrationModel cal =
                calibrate_bandwidth(inst.platform, inst.partition, n_tilde_int, cfg.calibration);
            row.calibrated = modeled_makespan(inst.ensemble, inst.partition, integer,
                                              cal.effective_bandwidth);

            const SimReport rep = simulate(inst.ensemble, inst.partition, integer,
                                           inst.platform, cfg.pipeline_depth);
            row.simulated = rep.makespan;
          } catch (const std::exception& e) {
            row.error = e.what();
          }
          rows.push_back(std::move(row));
        }
      }
    }
  }
  return rows;
}

namespace {

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

std::string export_rows(const std::vector<ResultRow>& rows, const std::string& format) {
  if (rows.empty()) throw std::invalid_argument("export_rows(): no rows");
  if (format != "csv" && format != "jsonl") {
    throw std::invalid_argument("export_rows(): unknown format '" + format + "'");
  }

  // Normalization baseline: the (coalloc, coalloc) row of the same
  // scenario/value/seed.
  std::map<std::string, const ResultRow*> baseline;
  auto group_key = [](const ResultRow& r) {
    return r.scenario + "|" + fmt(r.sweep_value) + "|" + std::to_string(r.seed);
  };
  for (const auto& r : rows) {
    if (r.node_policy == "coalloc" && r.core_policy == "coalloc" && r.error.empty()) {
      baseline[group_key(r)] = &r;
    }
  }
  auto normalized = [&](const ResultRow& r, bool simulated) -> std::string {
    auto it = baseline.find(group_key(r));
    if (it == baseline.end() || !r.error.empty()) return "";
    const double base = simulated ? it->second->simulated : it->second->modeled;
    if (base <= 0) return "";
    return fmt((simulated ? r.simulated : r.modeled) / base);
  };

  std::string out;
  if (format == "csv") {
    out =
        "scenario,sweep_value,node_policy,core_policy,seed,t_star,modeled_makespan,"
        "calibrated_makespan,simulated_makespan,pc_size,pnc_size,normalized_modeled,"
        "normalized_simulated,alloc_digest,error\n";
    for (const auto& r : rows) {
      out += r.scenario + "," + fmt(r.sweep_value) + "," + r.node_policy + "," + r.core_policy +
             "," + std::to_string(r.seed) + ",";
      if (r.error.empty()) {
        out += fmt(r.t_star) + "," + fmt(r.modeled) + "," + fmt(r.calibrated) + "," +
               fmt(r.simulated) + "," + std::to_string(r.pc_size) + "," +
               std::to_string(r.pnc_size) + "," + normalized(r, false) + "," +
               normalized(r, true) + "," + csv_escape(r.alloc_digest) + ",";
      } else {
        out += ",,,,";
        out += std::to_string(r.pc_size) + "," + std::to_string(r.pnc_size) + ",,,,";
        out += csv_escape(r.error);
      }
      out += "\n";
    }
  } else {
    for (const auto& r : rows) {
      json j;
      j["scenario"] = r.scenario;
      j["sweep_value"] = r.sweep_value;
      j["node_policy"] = r.node_policy;
      j["core_policy"] = r.core_policy;
      j["seed"] = r.seed;
      if (r.error.empty()) {
        j["t_star"] = r.t_star;
        j["modeled_makespan"] = r.modeled;
        j["calibrated_makespan"] = r.calibrated;
        j["simulated_makespan"] = r.simulated;
        j["pc_size"] = r.pc_size;
        j["pnc_size"] = r.pnc_size;
        const std::string nm = normalized(r, false);
        const std::string ns = normalized(r, true);
        if (!nm.empty()) j["normalized_modeled"] = std::stod(nm);
        if (!ns.empty()) j["normalized_simulated"] = std::stod(ns);
        j["alloc_digest"] = r.alloc_digest;
      } else {
        j["error"] = r.error;
      }
      out += j.dump() + "\n";
    }
  }
  return out;
}

void export_rows_to_file(const std::vector<ResultRow>& rows, const std::string& format,
                         const std::string& path) {
  const std::string content = export_rows(rows, format);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("export_rows_to_file(): cannot write '" + path + "'");
  out << content;
  if (!out) throw std::runtime_error("export_rows_to_file(): write failed for '" + path + "'");
}

}  // namespace ensim
