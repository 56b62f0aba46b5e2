#include "ensim/model.hpp"

#include <algorithm>
#include <stdexcept>

namespace ensim {

const SimulationSpec* Ensemble::find_simulation(const std::string& id) const {
  for (const auto& s : simulations) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

const AnalysisSpec* Ensemble::find_analysis(const std::string& id) const {
  for (const auto& a : analyses) {
    if (a.id == id) return &a;
  }
  return nullptr;
}

std::vector<const AnalysisSpec*> Ensemble::coupled_analyses(const std::string& sim_id) const {
  std::vector<const AnalysisSpec*> out;
  for (const auto& a : analyses) {
    if (a.coupled_sim == sim_id) out.push_back(&a);
  }
  return out;
}

double Ensemble::total_seq_time() const {
  double q = 0.0;
  for (const auto& s : simulations) q += s.seq_time;
  for (const auto& a : analyses) q += a.seq_time;
  return q;
}

bool Partition::is_co_scheduled(const std::string& analysis_id) const {
  return co_scheduled.count(analysis_id) > 0;
}

std::size_t Partition::remote_count() const {
  std::size_t n = 0;
  for (const auto& g : not_co_scheduled) n += g.size();
  return n;
}

const AppAlloc& Allocation::at(const std::string& id) const {
  auto it = apps.find(id);
  if (it == apps.end()) {
    throw std::invalid_argument("Allocation::at(): no allocation for app '" + id + "'");
  }
  return it->second;
}

std::vector<CoschedGroup> cosched_groups(const Ensemble& ensemble, const Partition& partition) {
  std::vector<CoschedGroup> out;
  for (const auto& s : ensemble.simulations) {
    CoschedGroup g;
    g.label = s.id;
    g.simulation = s.id;
    for (const auto* a : ensemble.coupled_analyses(s.id)) {
      if (partition.is_co_scheduled(a->id)) g.analyses.push_back(a->id);
    }
    std::sort(g.analyses.begin(), g.analyses.end());
    out.push_back(std::move(g));
  }
  for (std::size_t i = 0; i < partition.not_co_scheduled.size(); ++i) {
    CoschedGroup g;
    g.label = "nc:" + std::to_string(i);
    g.analyses.assign(partition.not_co_scheduled[i].begin(),
                      partition.not_co_scheduled[i].end());
    out.push_back(std::move(g));
  }
  return out;
}

std::vector<std::string> validate(const Ensemble& ensemble, const Platform& platform) {
  std::vector<std::string> errors;
  if (platform.n_nodes <= 0) errors.push_back("platform: n_nodes must be positive");
  if (platform.cores_per_node <= 0) errors.push_back("platform: cores_per_node must be positive");
  if (platform.mem_per_node <= 0) errors.push_back("platform: mem_per_node must be positive");
  if (platform.bandwidth_per_node <= 0) {
    errors.push_back("platform: bandwidth_per_node must be positive");
  }
  if (ensemble.n_steps < 1) errors.push_back("ensemble: n_steps must be at least 1");

  std::set<std::string> ids;
  for (const auto& s : ensemble.simulations) {
    if (!ids.insert(s.id).second) errors.push_back("duplicate app id '" + s.id + "'");
    if (s.seq_time <= 0) errors.push_back("simulation '" + s.id + "': seq_time must be positive");
    if (s.mem < 0) errors.push_back("simulation '" + s.id + "': mem must be non-negative");
  }
  for (const auto& a : ensemble.analyses) {
    if (!ids.insert(a.id).second) errors.push_back("duplicate app id '" + a.id + "'");
    if (a.seq_time <= 0) errors.push_back("analysis '" + a.id + "': seq_time must be positive");
    if (a.data_volume < 0) {
      errors.push_back("analysis '" + a.id + "': data_volume must be non-negative");
    }
    if (a.mem < 0) errors.push_back("analysis '" + a.id + "': mem must be non-negative");
    if (ensemble.find_simulation(a.coupled_sim) == nullptr) {
      errors.push_back("analysis '" + a.id + "': coupled simulation '" + a.coupled_sim +
                       "' does not exist");
    }
  }
  for (const auto& s : ensemble.simulations) {
    if (ensemble.coupled_analyses(s.id).empty()) {
      errors.push_back("simulation '" + s.id + "': has no coupled analysis");
    }
  }
  return errors;
}

std::vector<std::string> validate_partition(const Partition& partition,
                                            const Ensemble& ensemble) {
  std::vector<std::string> errors;
  std::map<std::string, int> seen;
  for (const auto& id : partition.co_scheduled) seen[id]++;
  for (std::size_t i = 0; i < partition.not_co_scheduled.size(); ++i) {
    if (partition.not_co_scheduled[i].empty()) {
      errors.push_back("analysis-only group " + std::to_string(i) + " is empty");
    }
    for (const auto& id : partition.not_co_scheduled[i]) seen[id]++;
  }
  for (const auto& [id, count] : seen) {
    if (ensemble.find_analysis(id) == nullptr) {
      errors.push_back("partition references unknown analysis '" + id + "'");
    }
    if (count > 1) {
      errors.push_back("analysis '" + id + "' appears in more than one partition slot");
    }
  }
  for (const auto& a : ensemble.analyses) {
    if (seen.find(a.id) == seen.end()) {
      errors.push_back("analysis '" + a.id + "' is not covered by the partition");
    }
  }
  return errors;
}

std::set<std::string> mapping_of(const Partition& partition, const Ensemble& ensemble,
                                 const std::string& sim_id) {
  if (ensemble.find_simulation(sim_id) == nullptr) {
    throw std::invalid_argument("mapping_of(): unknown simulation '" + sim_id + "'");
  }
  std::set<std::string> out;
  for (const auto* a : ensemble.coupled_analyses(sim_id)) {
    if (partition.is_co_scheduled(a->id)) out.insert(a->id);
  }
  return out;
}

}  // namespace ensim
