// Discrete-event simulator: per-iteration Compute/Write/Read stages with
// coupling dependencies and max-min fair sharing of per-node bandwidth.
#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ensim/model.hpp"

namespace ensim {

enum class Stage { Compute, Write, Read };

std::string stage_name(Stage s);

struct StageEvent {
  std::string app;
  int iter = 0;
  Stage stage = Stage::Compute;
  double start = 0.0;
  double end = 0.0;
};

// One point-to-point transfer belonging to a remote Read. A Read of V bytes
// by an analysis on n nodes is split into n flows of V/n bytes, one per
// destination node, sourced round-robin from the producer's nodes.
struct Flow {
  std::vector<int> src_nodes;
  std::vector<int> dst_nodes;
  double bytes = 0.0;  // remaining
  std::string analysis;
  int iter = 0;
};

struct SimReport {
  double makespan = 0.0;
  std::vector<StageEvent> timeline;
  std::map<std::string, double> mean_period;  // app -> last completion / n_steps
  std::vector<std::pair<double, double>> bandwidth_trace;  // (time, total bytes/s)
};

// Max-min fair rates (bytes/s), index-aligned with the flows: every node
// caps the sum of its incident flows' rates at bandwidth_per_node;
// water-filling freezes bottlenecked flows until all are fixed.
std::vector<double> bandwidth_share(const std::vector<Flow>& flows, const Platform& platform);

// Runs the ensemble to completion under an integer allocation. Per iteration
// k a simulation Computes then Writes; an analysis Reads the previous
// iteration's frame (an initial frame is preloaded, so the first Read has no
// producer dependency) then Computes. Writes are instantaneous but block
// until the coupled analyses have freed the exchange buffer: with
// pipeline_depth d, Write k waits for Read k-d+1. Co-located or zero-volume
// Reads are instantaneous; remote Reads create flows served at max-min fair
// rates.
SimReport simulate(const Ensemble& ensemble, const Partition& partition,
                   const Allocation& allocation, const Platform& platform,
                   int pipeline_depth = 1);

// report.makespan / modeled; throws if modeled is zero.
double simulated_vs_modeled(const SimReport& report, double modeled);

// Line-oriented trace: one "app,iter,stage,start,end" row per event plus a
// closing summary row with the makespan.
std::string trace_csv(const SimReport& report);

}  // namespace ensim
