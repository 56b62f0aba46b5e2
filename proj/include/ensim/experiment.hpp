// Experiment orchestration: config ingestion, the sweep/trial/policy product,
// per-row solve+round+simulate pipeline, and CSV/JSONL export.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ensim/coalloc.hpp"
#include "ensim/model.hpp"
#include "ensim/perf.hpp"
#include "ensim/scenarios.hpp"

namespace ensim {

enum class SweepAxis { None, DataVolume, NNodes, AnalysesPerSim, NSims };

struct PolicyPair {
  NodePolicy node = NodePolicy::CoAlloc;
  CorePolicy core = CorePolicy::CoAlloc;
};

struct ExperimentConfig {
  Platform platform;
  GeneratorConfig generator;
  std::vector<ScenarioSpec> scenarios;
  std::vector<PolicyPair> policies;
  SweepAxis sweep_axis = SweepAxis::None;
  std::vector<double> sweep_values;  // bytes for data_volume, counts otherwise
  int trials = 5;
  std::vector<std::uint64_t> seeds;
  BandwidthVariant calibration = BandwidthVariant::B3;
  int pipeline_depth = 1;
};

struct ResultRow {
  std::string scenario;
  double sweep_value = 0.0;
  std::string node_policy;
  std::string core_policy;
  std::uint64_t seed = 0;
  double t_star = 0.0;      // rational equalized per-iteration time
  double modeled = 0.0;     // model at nominal bandwidth, integer allocation
  double calibrated = 0.0;  // model at the calibrated effective bandwidth
  double simulated = 0.0;
  std::size_t pc_size = 0;
  std::size_t pnc_size = 0;
  std::string alloc_digest;  // "app:nodesxcores" pairs, id order
  std::string error;         // non-empty when the row failed
};

std::string policy_name(NodePolicy p);
std::string policy_name(CorePolicy p);
PolicyPair parse_policy(const std::string& spec);  // "coalloc:evalloc"
std::string variant_name(BandwidthVariant v);
BandwidthVariant parse_variant(const std::string& name);
std::string sweep_axis_name(SweepAxis axis);

// JSON config file; unknown keys rejected, defaults applied, all validation
// errors reported together. Volumes/memory are given in GB (1e9 bytes) and
// bandwidth in GB/s in the file; values here are bytes and bytes/s.
ExperimentConfig parse_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);  // same, from a string

// The full product: sweep value x scenario x policy x trial. Row failures
// (e.g. infeasible rounding) are recorded in the row and the run continues.
std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg);

// Materializes one instance of the config (a single sweep value + seed).
struct Instance {
  Ensemble ensemble;
  Partition partition;
  Platform platform;
};
Instance make_instance(const ExperimentConfig& cfg, const ScenarioSpec& scenario,
                       double sweep_value, std::uint64_t seed);

// "csv" or "jsonl". Adds normalized columns: each row's makespans divided by
// the (coalloc, coalloc) row of the same scenario/value/seed when present.
std::string export_rows(const std::vector<ResultRow>& rows, const std::string& format);
void export_rows_to_file(const std::vector<ResultRow>& rows, const std::string& format,
                         const std::string& path);

}  // namespace ensim
