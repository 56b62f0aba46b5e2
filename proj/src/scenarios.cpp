#include "ensim/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace ensim {

std::string scenario_name(const ScenarioSpec& s) {
  switch (s.kind) {
    case ScenarioKind::Ideal:
      return "ideal";
    case ScenarioKind::InTransit:
      return "in-transit";
    case ScenarioKind::Increasing:
      return "increasing-" + std::to_string(static_cast<int>(std::lround(s.x)));
    case ScenarioKind::Decreasing:
      return "decreasing-" + std::to_string(static_cast<int>(std::lround(s.x)));
  }
  return "unknown";
}

ScenarioSpec parse_scenario(const std::string& name) {
  if (name == "ideal") return {ScenarioKind::Ideal, 0.0};
  if (name == "in-transit" || name == "intransit") return {ScenarioKind::InTransit, 0.0};
  for (const auto& [prefix, kind] :
       {std::pair<std::string, ScenarioKind>{"increasing-", ScenarioKind::Increasing},
        std::pair<std::string, ScenarioKind>{"decreasing-", ScenarioKind::Decreasing}}) {
    if (name.rfind(prefix, 0) == 0) {
      const double x = std::stod(name.substr(prefix.size()));
      if (x <= 0 || x >= 100) {
        throw std::invalid_argument("parse_scenario(): percentage out of (0,100) in '" + name +
                                    "'");
      }
      return {kind, x};
    }
  }
  throw std::invalid_argument("parse_scenario(): unknown scenario '" + name + "'");
}

namespace {

// Portable uniform doubles built directly from the engine's pinned bit
// stream, so generated ensembles are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform(double lo, double hi) {
    const double u = static_cast<double>(gen_() >> 11) * 0x1.0p-53;  // [0, 1)
    return lo + u * (hi - lo);
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace

Ensemble generate_ensemble(const GeneratorConfig& cfg) {
  if (cfg.n_sims <= 0 || cfg.analyses_per_sim <= 0) {
    throw std::invalid_argument("generate_ensemble(): n_sims and analyses_per_sim must be positive");
  }
  if (cfg.sim_seq_time <= 0) {
    throw std::invalid_argument("generate_ensemble(): sim_seq_time must be positive");
  }
  if (cfg.analysis_time_lo <= 0 || cfg.analysis_time_hi < cfg.analysis_time_lo) {
    throw std::invalid_argument("generate_ensemble(): invalid analysis_time range");
  }
  if (cfg.data_volume < 0 || cfg.sim_mem < 0 || cfg.analysis_mem < 0) {
    throw std::invalid_argument("generate_ensemble(): negative volume or memory");
  }
  if (cfg.n_steps < 1) {
    throw std::invalid_argument("generate_ensemble(): n_steps must be at least 1");
  }

  Rng rng(cfg.seed);
  Ensemble e;
  e.n_steps = cfg.n_steps;
  for (int i = 1; i <= cfg.n_sims; ++i) {
    SimulationSpec s;
    s.id = "s" + std::to_string(i);
    s.seq_time = cfg.sim_seq_time;
    s.mem = cfg.sim_mem;
    e.simulations.push_back(s);
    for (int j = 1; j <= cfg.analyses_per_sim; ++j) {
      AnalysisSpec a;
      a.id = s.id + "a" + std::to_string(j);
      a.seq_time = cfg.sim_seq_time * rng.uniform(cfg.analysis_time_lo, cfg.analysis_time_hi);
      a.data_volume = cfg.data_volume;
      a.mem = cfg.analysis_mem;
      a.coupled_sim = s.id;
      e.analyses.push_back(a);
    }
  }
  return e;
}

Partition make_partition(const Ensemble& ensemble, const ScenarioSpec& scenario) {
  Partition p;
  switch (scenario.kind) {
    case ScenarioKind::Ideal:
      for (const auto& a : ensemble.analyses) p.co_scheduled.insert(a.id);
      return p;
    case ScenarioKind::InTransit: {
      std::set<std::string> all;
      for (const auto& a : ensemble.analyses) all.insert(a.id);
      p.not_co_scheduled.push_back(std::move(all));
      return p;
    }
    case ScenarioKind::Increasing:
    case ScenarioKind::Decreasing:
      break;
  }

  if (scenario.x <= 0 || scenario.x >= 100) {
    throw std::invalid_argument("make_partition(): percentage must be in (0,100)");
  }
  std::vector<const AnalysisSpec*> ranked;
  for (const auto& a : ensemble.analyses) ranked.push_back(&a);
  std::sort(ranked.begin(), ranked.end(), [](const AnalysisSpec* a, const AnalysisSpec* b) {
    if (a->seq_time != b->seq_time) return a->seq_time > b->seq_time;
    return a->id < b->id;
  });
  const auto count = static_cast<std::size_t>(
      std::ceil(scenario.x / 100.0 * static_cast<double>(ranked.size())));
  std::set<std::string> remote;
  for (std::size_t i = 0; i < count && i < ranked.size(); ++i) remote.insert(ranked[i]->id);
  for (const auto& a : ensemble.analyses) {
    if (!remote.count(a.id)) p.co_scheduled.insert(a.id);
  }
  p.not_co_scheduled.push_back(std::move(remote));
  return p;
}

}  // namespace ensim
