// Analytical performance model: per-iteration times, aggregate quantities,
// modeled makespan and effective-bandwidth calibration variants.
#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ensim/model.hpp"

namespace ensim {

// Effective-bandwidth estimators used when predicting contended transfers.
// Baseline uses the nominal per-node bandwidth; B1-B3 scale it down by
// increasingly detailed contention factors.
enum class BandwidthVariant { Baseline, B1, B2, B3 };

struct CalibrationModel {
  BandwidthVariant variant = BandwidthVariant::Baseline;
  double effective_bandwidth = 0.0;  // bytes/s
};

// Time of one simulation iteration on nodes*cores cores.
double iter_time_sim(const SimulationSpec& sim, double nodes, double cores);

// Time of one analysis iteration. Remote analyses (not co_located) add the
// transfer term data_volume / (bandwidth * nodes).
double iter_time_analysis(const AnalysisSpec& analysis, double nodes, double cores,
                          bool co_located, double bandwidth);

// Q: sum of sequential iteration times.
double q_sum(const std::vector<double>& seq_times);
double q_of(const Ensemble& ensemble, const std::set<std::string>& app_ids);

// U: sum of cores*data_volume over analyses, as (cores, volume) pairs.
double u_sum(const std::vector<std::pair<double, double>>& cores_and_volumes);

// n_steps times the slowest app's per-iteration time under the allocation.
double modeled_makespan(const Ensemble& ensemble, const Partition& partition,
                        const Allocation& allocation, double bandwidth);

// Equalized per-iteration time of one scheduling unit with aggregate
// sequential time q_members and remote traffic term u_remote, running on
// `nodes` nodes with cores_per_node cores each:
//   (bandwidth * q_members + u_remote) / (bandwidth * cores_per_node * nodes)
double unit_alloc_time(double q_members, double u_remote, double nodes,
                       int cores_per_node, double bandwidth);

// Effective bandwidth for the requested variant. n_tilde is the node count of
// the analysis-only part of the partition. Degenerate inputs (no remote
// analyses, zero n_tilde, ...) fall back to Baseline.
CalibrationModel calibrate_bandwidth(const Platform& platform, const Partition& partition,
                                     double n_tilde, BandwidthVariant variant);

}  // namespace ensim
