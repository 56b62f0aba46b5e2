// Domain types: platform, ensemble of simulations and analyses, partitions
// into co-scheduled / analysis-only groups, and resource allocations.
#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace ensim {

// A cluster of identical nodes. Units are seconds, bytes and bytes/s
// throughout; all four fields must be strictly positive.
struct Platform {
  int n_nodes = 0;
  int cores_per_node = 0;
  double mem_per_node = 0.0;        // bytes
  double bandwidth_per_node = 0.0;  // bytes/s
};

struct SimulationSpec {
  std::string id;
  double seq_time = 0.0;  // seconds for one iteration on a single core
  double mem = 0.0;       // resident bytes on each node it runs on
};

struct AnalysisSpec {
  std::string id;
  double seq_time = 0.0;     // seconds for one iteration on a single core
  double data_volume = 0.0;  // bytes consumed per iteration
  double mem = 0.0;          // resident bytes on each node it runs on
  std::string coupled_sim;   // id of the simulation that produces its input
};

// A set of simulations, each coupled with one or more analyses, iterating in
// lock step for n_steps iterations.
struct Ensemble {
  std::vector<SimulationSpec> simulations;
  std::vector<AnalysisSpec> analyses;
  int n_steps = 1;

  const SimulationSpec* find_simulation(const std::string& id) const;
  const AnalysisSpec* find_analysis(const std::string& id) const;
  // Analyses coupled to the given simulation, in declaration order.
  std::vector<const AnalysisSpec*> coupled_analyses(const std::string& sim_id) const;
  double total_seq_time() const;  // sum of seq_time over all apps
};

// Splits the analyses into those sharing nodes with their coupled simulation
// (co_scheduled) and disjoint analysis-only groups, each of which runs on its
// own set of nodes.
struct Partition {
  std::set<std::string> co_scheduled;
  std::vector<std::set<std::string>> not_co_scheduled;

  bool is_co_scheduled(const std::string& analysis_id) const;
  std::size_t co_count() const { return co_scheduled.size(); }
  std::size_t remote_count() const;  // analyses across all analysis-only groups
};

enum class AllocKind { Rational, Integer };

struct AppAlloc {
  double nodes = 0.0;
  double cores = 0.0;  // cores per node
};

// Node and core shares for every application. Rational allocations carry the
// exact solver output; integer ones are deployable.
struct Allocation {
  AllocKind kind = AllocKind::Rational;
  std::map<std::string, AppAlloc> apps;

  const AppAlloc& at(const std::string& id) const;  // throws if id is missing
};

// One scheduling unit induced by a partition: a simulation plus its
// co-scheduled analyses, or an analysis-only group. Units are ordered
// simulations first (declaration order), then analysis-only groups; the label
// is the simulation id or "nc:<index>".
struct CoschedGroup {
  std::string label;
  std::optional<std::string> simulation;
  std::vector<std::string> analyses;  // sorted by id
};

std::vector<CoschedGroup> cosched_groups(const Ensemble& ensemble,
                                         const Partition& partition);

// Returns a list of violations; empty means valid. Checks platform
// positivity, id uniqueness, coupling references, sign constraints and that
// every simulation has at least one analysis.
std::vector<std::string> validate(const Ensemble& ensemble, const Platform& platform);

// Returns a list of violations; empty means valid. Checks that the partition
// covers every analysis exactly once, references only known analyses, and has
// no empty analysis-only group.
std::vector<std::string> validate_partition(const Partition& partition,
                                            const Ensemble& ensemble);

// The co-scheduled analyses of one simulation (its coupled set intersected
// with the co-scheduled set), sorted by id.
std::set<std::string> mapping_of(const Partition& partition, const Ensemble& ensemble,
                                 const std::string& sim_id);

}  // namespace ensim
