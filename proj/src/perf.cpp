#include "ensim/perf.hpp"

#include <algorithm>
#include <stdexcept>

namespace ensim {

namespace {

void check_share(const char* fn, double nodes, double cores) {
  if (nodes <= 0 || cores <= 0) {
    throw std::invalid_argument(std::string(fn) + "(): nodes and cores must be positive");
  }
}

}  // namespace

double iter_time_sim(const SimulationSpec& sim, double nodes, double cores) {
  check_share("iter_time_sim", nodes, cores);
  return sim.seq_time / (nodes * cores);
}

double iter_time_analysis(const AnalysisSpec& analysis, double nodes, double cores,
                          bool co_located, double bandwidth) {
  check_share("iter_time_analysis", nodes, cores);
  double t = analysis.seq_time / (nodes * cores);
  if (!co_located) {
    if (bandwidth <= 0) {
      throw std::invalid_argument("iter_time_analysis(): bandwidth must be positive");
    }
    t += analysis.data_volume / (bandwidth * nodes);
  }
  return t;
}

double q_sum(const std::vector<double>& seq_times) {
  double q = 0.0;
  for (double t : seq_times) q += t;
  return q;
}

double q_of(const Ensemble& ensemble, const std::set<std::string>& app_ids) {
  double q = 0.0;
  for (const auto& id : app_ids) {
    if (const auto* s = ensemble.find_simulation(id)) {
      q += s->seq_time;
    } else if (const auto* a = ensemble.find_analysis(id)) {
      q += a->seq_time;
    } else {
      throw std::invalid_argument("q_of(): unknown app '" + id + "'");
    }
  }
  return q;
}

double u_sum(const std::vector<std::pair<double, double>>& cores_and_volumes) {
  double u = 0.0;
  for (const auto& [cores, volume] : cores_and_volumes) u += cores * volume;
  return u;
}

double modeled_makespan(const Ensemble& ensemble, const Partition& partition,
                        const Allocation& allocation, double bandwidth) {
  double worst = 0.0;
  for (const auto& s : ensemble.simulations) {
    const AppAlloc& a = allocation.at(s.id);
    worst = std::max(worst, iter_time_sim(s, a.nodes, a.cores));
  }
  for (const auto& an : ensemble.analyses) {
    const AppAlloc& a = allocation.at(an.id);
    worst = std::max(worst, iter_time_analysis(an, a.nodes, a.cores,
                                               partition.is_co_scheduled(an.id), bandwidth));
  }
  return ensemble.n_steps * worst;
}

double unit_alloc_time(double q_members, double u_remote, double nodes,
                       int cores_per_node, double bandwidth) {
  if (nodes <= 0 || cores_per_node <= 0 || bandwidth <= 0) {
    throw std::invalid_argument(
        "unit_alloc_time(): nodes, cores_per_node and bandwidth must be positive");
  }
  return (bandwidth * q_members + u_remote) / (bandwidth * cores_per_node * nodes);
}

CalibrationModel calibrate_bandwidth(const Platform& platform, const Partition& partition,
                                     double n_tilde, BandwidthVariant variant) {
  const double B = platform.bandwidth_per_node;
  if (B <= 0) {
    throw std::invalid_argument("calibrate_bandwidth(): bandwidth_per_node must be positive");
  }
  const double pnc = static_cast<double>(partition.remote_count());

  CalibrationModel model;
  model.variant = variant;
  double divisor = 1.0;
  switch (variant) {
    case BandwidthVariant::Baseline:
      divisor = 1.0;
      break;
    case BandwidthVariant::B1:
      divisor = pnc;
      break;
    case BandwidthVariant::B2:
      divisor = n_tilde;
      break;
    case BandwidthVariant::B3:
      divisor = n_tilde * pnc;
      break;
  }
  if (divisor <= 0) {
    // Degenerate partition (no remote analyses or no analysis-only nodes):
    // fall back to the nominal bandwidth.
    model.variant = BandwidthVariant::Baseline;
    divisor = 1.0;
  }
  model.effective_bandwidth = B / divisor;
  return model;
}

}  // namespace ensim
