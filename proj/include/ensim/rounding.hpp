// Integer relaxation of rational allocations: sum-preserving rounding at
// node level (two stages: simulation-based and analysis-only) and at core
// level inside each scheduling unit.
#pragma once

#include <map>
#include <string>
#include <vector>

#include "ensim/coalloc.hpp"
#include "ensim/model.hpp"

namespace ensim {

struct RoundTarget {
  std::string id;
  double value = 0.0;   // rational amount
  double weight = 0.0;  // round-up priority (larger wins)
};

struct RoundingPlan {
  std::vector<RoundTarget> targets;
  long long target_sum = 0;
};

// Rounds every target to its floor or ceiling so the total equals target_sum
// exactly. The k = s - Σ⌊x⌋ round-ups go to the fractional targets with the
// largest weights; ties break by id. Throws if the sum cannot be met that way
// or if any target would end below 1.
std::map<std::string, long long> sum_preserving_round(const RoundingPlan& plan);

// Node counts per scheduling unit (simulation id or "nc:<i>" label).
// Simulation-based units share round(N - n_tilde) nodes, clamped so each unit
// can get at least one node; analysis-only units share the rest. Weights are
// Q(S_i ∪ m(S_i)) for simulation-based units and B·Q + U for analysis-only
// ones.
std::map<std::string, long long> round_nodes(const RationalSolution& solution,
                                             const Ensemble& ensemble,
                                             const Partition& partition,
                                             const Platform& platform);

struct CoreTarget {
  std::string id;
  double cores = 0.0;
  double seq_time = 0.0;  // round-up priority: larger single-core time wins
};

// Integer cores per member of one scheduling unit, summing to cores_per_node.
std::map<std::string, long long> round_cores(const std::vector<CoreTarget>& members,
                                             int cores_per_node);

// Full integer allocation: rounded nodes per unit, then rounded cores per
// member of each unit.
Allocation round_allocation(const RationalSolution& solution, const Ensemble& ensemble,
                            const Partition& partition, const Platform& platform);

}  // namespace ensim
