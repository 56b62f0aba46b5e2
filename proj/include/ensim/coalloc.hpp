// Rational resource allocation: the root-finding step for analysis-only
// groups, the two-stage node/core distribution, and the policy matrix
// (co-optimized vs. even splits at node and core level).
#pragma once

#include <map>
#include <string>
#include <vector>

#include "ensim/model.hpp"
#include "ensim/perf.hpp"

namespace ensim {

enum class NodePolicy { CoAlloc, EvAlloc };
enum class CorePolicy { CoAlloc, EvAlloc };

// Solved shares for one analysis-only group.
struct GroupSolution {
  std::vector<std::string> members;  // analysis ids, sorted
  double nodes = 0.0;
  std::map<std::string, double> cores;
  double u = 0.0;  // sum of cores * data_volume under the solved cores
};

struct AnalysisOnlyAllocation {
  std::vector<GroupSolution> groups;
  double n_tilde = 0.0;  // total nodes over all analysis-only groups
  double u_total = 0.0;  // sum of the groups' u values
};

struct SimBasedAllocation {
  std::string sim_id;
  double nodes = 0.0;
  double sim_cores = 0.0;
  std::map<std::string, double> analysis_cores;  // co-scheduled analyses
};

// Full rational solution for a partition.
struct RationalSolution {
  Allocation allocation;  // kind == Rational; covers every app
  double n_tilde = 0.0;
  std::vector<double> u_star_per_group;  // per analysis-only group, group order
  double equalized_time = 0.0;           // slowest app's per-iteration time
};

// Solves sum_k Q(A_k) / (B*Qg + U - C*V_k) = 1/B for U on one analysis-only
// group (Qg = group's aggregate sequential time). The left side is strictly
// decreasing in U, so the root is unique; it is bracketed and bisected.
// Groups where every volume is zero yield U = 0; single-member groups use the
// closed form U = C*V. q_context only scales the bracketing tolerances.
double solve_u_star(const std::vector<const AnalysisSpec*>& group,
                    const Platform& platform, double q_context);

// Node and core shares for the analysis-only groups of the partition.
AnalysisOnlyAllocation alloc_analysis_only(const Partition& partition,
                                           const Ensemble& ensemble,
                                           const Platform& platform);

// Node and core shares for each simulation and its co-scheduled analyses,
// splitting the N - n_tilde nodes left over by the analysis-only stage.
// Throws if n_tilde >= N.
std::vector<SimBasedAllocation> alloc_simulation_based(const Partition& partition,
                                                       const Ensemble& ensemble,
                                                       const Platform& platform,
                                                       double n_tilde);

// The co-optimized allocation: analysis-only stage, then simulation-based
// stage. All node shares sum to exactly N and every app's per-iteration time
// is equalized.
RationalSolution co_alloc(const Partition& partition, const Ensemble& ensemble,
                          const Platform& platform);

// Generalized allocation under a (node, core) policy pair. EvAlloc at node
// level splits N evenly over scheduling units; EvAlloc at core level splits C
// evenly over the apps sharing a unit. (CoAlloc, CoAlloc) equals co_alloc.
RationalSolution policy_alloc(const Partition& partition, const Ensemble& ensemble,
                              const Platform& platform, NodePolicy node_policy,
                              CorePolicy core_policy);

// Even split at both levels.
RationalSolution ev_alloc(const Partition& partition, const Ensemble& ensemble,
                          const Platform& platform);

}  // namespace ensim
