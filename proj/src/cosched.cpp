#include "ensim/cosched.hpp"

#include <algorithm>
#include <stdexcept>

namespace ensim {

std::vector<std::string> evict_order(const std::vector<const AnalysisSpec*>& candidates) {
  if (candidates.empty()) {
    throw std::invalid_argument("evict_order(): empty candidate set");
  }
  std::vector<const AnalysisSpec*> sorted = candidates;
  std::sort(sorted.begin(), sorted.end(), [](const AnalysisSpec* a, const AnalysisSpec* b) {
    if (a->mem != b->mem) return a->mem > b->mem;
    if (a->seq_time != b->seq_time) return a->seq_time < b->seq_time;
    return a->id < b->id;
  });
  std::vector<std::string> out;
  for (const auto* a : sorted) out.push_back(a->id);
  return out;
}

FeasibilityReport check_feasibility(const Ensemble& ensemble, const Partition& partition,
                                    const Platform& platform) {
  const double M = platform.mem_per_node;
  FeasibilityReport report;

  for (const auto& s : ensemble.simulations) {
    if (s.mem > M) {
      throw std::runtime_error("check_feasibility(): simulation '" + s.id +
                               "' alone exceeds per-node memory");
    }
    std::vector<const AnalysisSpec*> co_located;
    double sum = s.mem;
    for (const auto* a : ensemble.coupled_analyses(s.id)) {
      if (partition.is_co_scheduled(a->id)) {
        co_located.push_back(a);
        sum += a->mem;
      }
    }
    if (sum <= M) continue;
    report.violations[s.id] = sum - M;
    for (const auto& id : evict_order(co_located)) {
      report.evicted.push_back(id);
      sum -= ensemble.find_analysis(id)->mem;
      if (sum <= M) break;
    }
  }

  for (std::size_t i = 0; i < partition.not_co_scheduled.size(); ++i) {
    double sum = 0.0;
    for (const auto& id : partition.not_co_scheduled[i]) {
      const auto* a = ensemble.find_analysis(id);
      if (a == nullptr) {
        throw std::invalid_argument("check_feasibility(): unknown analysis '" + id + "'");
      }
      if (a->mem > M) {
        throw std::runtime_error("check_feasibility(): analysis '" + id +
                                 "' alone exceeds per-node memory");
      }
      sum += a->mem;
    }
    if (sum > M) report.violations["nc:" + std::to_string(i)] = sum - M;
  }

  report.feasible = report.evicted.empty();
  return report;
}

namespace {

// First-fit-decreasing by memory footprint into groups of total footprint at
// most M. Every item fits individually (checked by the caller).
std::vector<std::set<std::string>> pack_analysis_only(const std::vector<const AnalysisSpec*>& pool,
                                                      double M) {
  std::vector<const AnalysisSpec*> sorted = pool;
  std::sort(sorted.begin(), sorted.end(), [](const AnalysisSpec* a, const AnalysisSpec* b) {
    if (a->mem != b->mem) return a->mem > b->mem;
    return a->id < b->id;
  });
  std::vector<std::set<std::string>> groups;
  std::vector<double> loads;
  for (const auto* a : sorted) {
    bool placed = false;
    for (std::size_t i = 0; i < groups.size(); ++i) {
      if (loads[i] + a->mem <= M) {
        groups[i].insert(a->id);
        loads[i] += a->mem;
        placed = true;
        break;
      }
    }
    if (!placed) {
      groups.push_back({a->id});
      loads.push_back(a->mem);
    }
  }
  return groups;
}

}  // namespace

CoSchedResult co_sched(const Ensemble& ensemble, const Platform& platform) {
  if (auto errors = validate(ensemble, platform); !errors.empty()) {
    throw std::invalid_argument("co_sched(): invalid ensemble: " + errors.front());
  }

  Partition partition;
  for (const auto& a : ensemble.analyses) partition.co_scheduled.insert(a.id);

  std::vector<const AnalysisSpec*> nc_pool;
  const int max_iterations = static_cast<int>(ensemble.analyses.size()) + 1;
  CoSchedResult result;
  for (int iter = 1; iter <= max_iterations; ++iter) {
    result.iterations = iter;
    result.solution = co_alloc(partition, ensemble, platform);
    const auto report = check_feasibility(ensemble, partition, platform);
    if (report.evicted.empty()) {
      result.partition = partition;
      return result;
    }
    for (const auto& id : report.evicted) {
      partition.co_scheduled.erase(id);
      nc_pool.push_back(ensemble.find_analysis(id));
    }
    partition.not_co_scheduled = pack_analysis_only(nc_pool, platform.mem_per_node);
  }
  throw std::runtime_error("co_sched(): failed to reach a feasible partition");
}

}  // namespace ensim
