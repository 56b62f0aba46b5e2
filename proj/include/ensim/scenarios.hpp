// Ensemble generation and the experimental partition families
// (ideal, in-transit, increasing-x%, decreasing-x%).
#pragma once

#include <cstdint>
#include <string>

#include "ensim/model.hpp"

namespace ensim {

enum class ScenarioKind { Ideal, InTransit, Increasing, Decreasing };

struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::Ideal;
  double x = 0.0;  // percentage in (0, 100) for Increasing/Decreasing
};

std::string scenario_name(const ScenarioSpec& s);
ScenarioSpec parse_scenario(const std::string& name);  // e.g. "increasing-50"

struct GeneratorConfig {
  int n_sims = 0;
  int analyses_per_sim = 0;
  double sim_seq_time = 0.0;          // seconds, identical for every simulation
  double analysis_time_lo = 0.5;      // fraction of sim_seq_time
  double analysis_time_hi = 1.5;
  double data_volume = 0.0;           // bytes, identical for every analysis
  double sim_mem = 0.0;               // bytes
  double analysis_mem = 0.0;          // bytes
  int n_steps = 1;
  std::uint64_t seed = 0;
};

// Deterministic per seed: identical simulations, analyses with sequential
// times drawn uniformly from [lo, hi] * sim_seq_time and a fixed data volume.
Ensemble generate_ensemble(const GeneratorConfig& cfg);

// Ideal: everything co-located. InTransit: every analysis in one
// analysis-only group. Increasing/Decreasing x: the ceil(x% * |A|) analyses
// with the largest sequential times (ties by id) form one analysis-only
// group. The two differ only in the order evictions are reported; as sets of
// analyses the partitions are identical.
Partition make_partition(const Ensemble& ensemble, const ScenarioSpec& scenario);

}  // namespace ensim
