// Greedy search for a partition that fits per-node memory: start from the
// all-co-located partition, evict analyses from overcommitted allocations to
// analysis-only groups, repeat until everything fits.
#pragma once

#include <map>
#include <string>
#include <vector>

#include "ensim/coalloc.hpp"
#include "ensim/model.hpp"

namespace ensim {

struct FeasibilityReport {
  bool feasible = false;            // true iff evicted is empty
  std::vector<std::string> evicted;  // analyses to move out, in eviction order
  std::map<std::string, double> violations;  // allocation label -> excess bytes
};

// Memory check per scheduling unit. Simulation-based units over the per-node
// memory M contribute evictees (chosen by evict_order, minimally) to the
// report; analysis-only units only record their excess, since they are split
// rather than evicted. Throws when a single application exceeds M by itself.
FeasibilityReport check_feasibility(const Ensemble& ensemble, const Partition& partition,
                                    const Platform& platform);

// Eviction priority: largest memory footprint first, then smaller sequential
// time, then id.
std::vector<std::string> evict_order(const std::vector<const AnalysisSpec*>& candidates);

struct CoSchedResult {
  Partition partition;
  RationalSolution solution;
  int iterations = 0;
};

// The full greedy loop. Evicted analyses pool into analysis-only groups,
// packed first-fit-decreasing by memory so every group fits M. Throws on hard
// infeasibility.
CoSchedResult co_sched(const Ensemble& ensemble, const Platform& platform);

}  // namespace ensim
