#include "ensim/rounding.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ensim {

namespace {

// Values within 1e-9 (relative) of an integer are treated as that integer, so
// solver noise around exact splits does not leak into floor/ceil decisions.
double snap(double x) {
  const double r = std::round(x);
  if (std::abs(x - r) <= 1e-9 * std::max(1.0, std::abs(x))) return r;
  return x;
}

}  // namespace

std::map<std::string, long long> sum_preserving_round(const RoundingPlan& plan) {
  const long long s = plan.target_sum;
  const long long count = static_cast<long long>(plan.targets.size());
  if (count == 0) {
    if (s != 0) throw std::invalid_argument("sum_preserving_round(): no targets for a non-zero sum");
    return {};
  }
  if (s < count) {
    throw std::runtime_error("sum_preserving_round(): target sum " + std::to_string(s) +
                             " cannot give each of " + std::to_string(count) +
                             " targets at least 1");
  }

  std::map<std::string, long long> out;
  std::vector<const RoundTarget*> fractional;
  long long floor_sum = 0;
  for (const auto& t : plan.targets) {
    if (t.value <= 0) {
      throw std::invalid_argument("sum_preserving_round(): target '" + t.id +
                                  "' has non-positive value");
    }
    if (out.count(t.id)) {
      throw std::invalid_argument("sum_preserving_round(): duplicate target '" + t.id + "'");
    }
    const double v = snap(t.value);
    const long long fl = static_cast<long long>(std::floor(v));
    out[t.id] = fl;
    floor_sum += fl;
    if (v != std::floor(v)) fractional.push_back(&t);
  }

  const long long k = s - floor_sum;
  if (k < 0 || k > static_cast<long long>(fractional.size())) {
    throw std::runtime_error(
        "sum_preserving_round(): target sum " + std::to_string(s) +
        " is not reachable by rounding each value to its floor or ceiling");
  }
  std::sort(fractional.begin(), fractional.end(),
            [](const RoundTarget* a, const RoundTarget* b) {
              if (a->weight != b->weight) return a->weight > b->weight;
              return a->id < b->id;
            });
  for (long long i = 0; i < k; ++i) out[fractional[i]->id] += 1;

  for (const auto& [id, v] : out) {
    if (v < 1) {
      throw std::runtime_error("sum_preserving_round(): target '" + id +
                               "' would receive no resources");
    }
  }
  return out;
}

std::map<std::string, long long> round_nodes(const RationalSolution& solution,
                                             const Ensemble& ensemble,
                                             const Partition& partition,
                                             const Platform& platform) {
  const auto units = cosched_groups(ensemble, partition);
  const long long N = platform.n_nodes;
  const double B = platform.bandwidth_per_node;

  RoundingPlan sim_plan;
  RoundingPlan nc_plan;
  std::size_t nc_index = 0;
  for (const auto& unit : units) {
    const double nodes = unit.simulation
                             ? solution.allocation.at(*unit.simulation).nodes
                             : solution.allocation.at(unit.analyses.front()).nodes;
    if (unit.simulation) {
      double q_unit = ensemble.find_simulation(*unit.simulation)->seq_time;
      for (const auto& id : unit.analyses) q_unit += ensemble.find_analysis(id)->seq_time;
      sim_plan.targets.push_back({unit.label, nodes, q_unit});
    } else {
      double qg = 0.0;
      for (const auto& id : unit.analyses) qg += ensemble.find_analysis(id)->seq_time;
      const double u = nc_index < solution.u_star_per_group.size()
                           ? solution.u_star_per_group[nc_index]
                           : 0.0;
      nc_plan.targets.push_back({unit.label, nodes, B * qg + u});
      ++nc_index;
    }
  }

  long long s_sim = N;
  if (!nc_plan.targets.empty()) {
    const long long n_sim_units = static_cast<long long>(sim_plan.targets.size());
    const long long n_nc_units = static_cast<long long>(nc_plan.targets.size());
    if (n_sim_units + n_nc_units > N) {
      throw std::runtime_error("round_nodes(): more scheduling units than nodes");
    }
    s_sim = std::llround(static_cast<double>(N) - solution.n_tilde);
    s_sim = std::clamp(s_sim, n_sim_units, N - n_nc_units);
  }

  std::map<std::string, long long> out;
  if (!sim_plan.targets.empty()) {
    sim_plan.target_sum = s_sim;
    out = sum_preserving_round(sim_plan);
  } else {
    s_sim = 0;
  }
  if (!nc_plan.targets.empty()) {
    nc_plan.target_sum = N - s_sim;
    auto nc = sum_preserving_round(nc_plan);
    out.insert(nc.begin(), nc.end());
  }
  return out;
}

std::map<std::string, long long> round_cores(const std::vector<CoreTarget>& members,
                                             int cores_per_node) {
  if (static_cast<long long>(members.size()) > cores_per_node) {
    throw std::runtime_error("round_cores(): " + std::to_string(members.size()) +
                             " apps cannot each get a core out of " +
                             std::to_string(cores_per_node));
  }
  RoundingPlan plan;
  plan.target_sum = cores_per_node;
  for (const auto& m : members) plan.targets.push_back({m.id, m.cores, m.seq_time});
  return sum_preserving_round(plan);
}

Allocation round_allocation(const RationalSolution& solution, const Ensemble& ensemble,
                            const Partition& partition, const Platform& platform) {
  const auto node_counts = round_nodes(solution, ensemble, partition, platform);
  const auto units = cosched_groups(ensemble, partition);

  Allocation out;
  out.kind = AllocKind::Integer;
  for (const auto& unit : units) {
    const long long nodes = node_counts.at(unit.label);
    std::vector<CoreTarget> members;
    if (unit.simulation) {
      const auto* s = ensemble.find_simulation(*unit.simulation);
      members.push_back({s->id, solution.allocation.at(s->id).cores, s->seq_time});
    }
    for (const auto& id : unit.analyses) {
      members.push_back(
          {id, solution.allocation.at(id).cores, ensemble.find_analysis(id)->seq_time});
    }
    const auto cores = round_cores(members, platform.cores_per_node);
    for (const auto& m : members) {
      out.apps[m.id] = {static_cast<double>(nodes), static_cast<double>(cores.at(m.id))};
    }
  }
  return out;
}

}  // namespace ensim
