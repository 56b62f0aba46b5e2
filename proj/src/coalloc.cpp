#include "ensim/coalloc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ensim {

namespace {

double group_q(const std::vector<const AnalysisSpec*>& group) {
  double q = 0.0;
  for (const auto* a : group) q += a->seq_time;
  return q;
}

std::vector<std::vector<const AnalysisSpec*>> resolve_groups(const Partition& partition,
                                                             const Ensemble& ensemble,
                                                             const char* fn) {
  std::vector<std::vector<const AnalysisSpec*>> out;
  for (const auto& g : partition.not_co_scheduled) {
    std::vector<const AnalysisSpec*> members;
    for (const auto& id : g) {
      const auto* a = ensemble.find_analysis(id);
      if (a == nullptr) {
        throw std::invalid_argument(std::string(fn) + "(): unknown analysis '" + id + "'");
      }
      members.push_back(a);
    }
    std::sort(members.begin(), members.end(),
              [](const AnalysisSpec* x, const AnalysisSpec* y) { return x->id < y->id; });
    out.push_back(std::move(members));
  }
  return out;
}

// Core share of one analysis inside a solved analysis-only group.
double nc_core_share(const AnalysisSpec& a, double qg, double u_star, const Platform& p) {
  const double B = p.bandwidth_per_node;
  const double C = p.cores_per_node;
  const double denom = B * qg + u_star - C * a.data_volume;
  if (denom <= 0) {
    throw std::runtime_error("co_alloc: non-positive core denominator for analysis '" + a.id +
                             "' (data volume too large for its group)");
  }
  return B * a.seq_time * C / denom;
}

}  // namespace

double solve_u_star(const std::vector<const AnalysisSpec*>& group, const Platform& platform,
                    double q_context) {
  if (group.empty()) throw std::invalid_argument("solve_u_star(): empty group");
  const double B = platform.bandwidth_per_node;
  const double C = platform.cores_per_node;
  if (B <= 0 || C <= 0) {
    throw std::invalid_argument("solve_u_star(): platform bandwidth and cores must be positive");
  }
  for (const auto* a : group) {
    if (a->seq_time <= 0) {
      throw std::invalid_argument("solve_u_star(): analysis '" + a->id +
                                  "' has non-positive seq_time");
    }
    if (a->data_volume < 0) {
      throw std::invalid_argument("solve_u_star(): analysis '" + a->id +
                                  "' has negative data_volume");
    }
  }

  const double qg = group_q(group);
  double v_min = group.front()->data_volume;
  double v_max = v_min;
  for (const auto* a : group) {
    v_min = std::min(v_min, a->data_volume);
    v_max = std::max(v_max, a->data_volume);
  }

  // With equal volumes every denominator collapses to B*qg at U = C*V, and
  // the left side sums to exactly 1/B: closed form, no iteration needed.
  // This also covers single-member and all-zero-volume groups.
  if (v_max == v_min) return C * v_max;

  const double target = 1.0 / B;
  auto lhs = [&](double u) {
    double s = 0.0;
    for (const auto* a : group) s += a->seq_time / (B * qg + u - C * a->data_volume);
    return s;
  };

  // The left side diverges as u approaches C*v_max - B*qg from above and
  // decreases strictly beyond it, so the root is bracketed between there and
  // a geometrically grown upper bound.
  const double lo_bound = C * v_max - B * qg;
  const double scale = std::max({B * qg, C * v_max, B * q_context, 1.0});
  double lo = 0.0;
  if (lo_bound >= 0) {
    double eps = 1e-9 * scale;
    lo = lo_bound + eps;
    while (lhs(lo) <= target && eps > 1e-18 * scale) {
      eps *= 0.5;
      lo = lo_bound + eps;
    }
  }
  if (lhs(lo) <= target) return lo;  // root numerically at the bracket edge

  double hi = std::max(2.0 * lo, scale);
  int guard = 0;
  while (lhs(hi) > target) {
    hi *= 2.0;
    if (++guard > 200) throw std::runtime_error("solve_u_star(): failed to bracket the root");
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // interval is at floating-point resolution
    if (lhs(mid) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return (std::abs(lhs(lo) - target) <= std::abs(lhs(hi) - target)) ? lo : hi;
}

AnalysisOnlyAllocation alloc_analysis_only(const Partition& partition, const Ensemble& ensemble,
                                           const Platform& platform) {
  AnalysisOnlyAllocation out;
  if (partition.not_co_scheduled.empty()) return out;

  const double B = platform.bandwidth_per_node;
  const double N = platform.n_nodes;
  const double q_all = ensemble.total_seq_time();
  auto specs = resolve_groups(partition, ensemble, "alloc_analysis_only");

  std::vector<double> u_star;
  double u_total = 0.0;
  for (const auto& members : specs) {
    u_star.push_back(solve_u_star(members, platform, q_all));
    u_total += u_star.back();
  }

  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& members = specs[i];
    const double qg = group_q(members);
    GroupSolution sol;
    sol.nodes = (B * qg + u_star[i]) / (B * q_all + u_total) * N;
    double u_realized = 0.0;
    for (const auto* a : members) {
      sol.members.push_back(a->id);
      const double c = nc_core_share(*a, qg, u_star[i], platform);
      sol.cores[a->id] = c;
      u_realized += c * a->data_volume;
    }
    sol.u = u_realized;
    out.n_tilde += sol.nodes;
    out.u_total += u_realized;
    out.groups.push_back(std::move(sol));
  }
  return out;
}

std::vector<SimBasedAllocation> alloc_simulation_based(const Partition& partition,
                                                       const Ensemble& ensemble,
                                                       const Platform& platform,
                                                       double n_tilde) {
  const double N = platform.n_nodes;
  const double C = platform.cores_per_node;
  if (n_tilde >= N) {
    throw std::runtime_error(
        "alloc_simulation_based(): analysis-only groups require all " + std::to_string(N) +
        " nodes; nothing is left for the simulations");
  }

  double q_sb = 0.0;  // all sims plus co-scheduled analyses
  for (const auto& s : ensemble.simulations) q_sb += s.seq_time;
  for (const auto& a : ensemble.analyses) {
    if (partition.is_co_scheduled(a.id)) q_sb += a.seq_time;
  }

  std::vector<SimBasedAllocation> out;
  for (const auto& s : ensemble.simulations) {
    const auto m = mapping_of(partition, ensemble, s.id);
    const double q_unit = s.seq_time + q_of(ensemble, m);
    SimBasedAllocation sb;
    sb.sim_id = s.id;
    sb.nodes = q_unit / q_sb * (N - n_tilde);
    sb.sim_cores = s.seq_time / q_unit * C;
    for (const auto& id : m) {
      sb.analysis_cores[id] = ensemble.find_analysis(id)->seq_time / q_unit * C;
    }
    out.push_back(std::move(sb));
  }
  return out;
}

RationalSolution policy_alloc(const Partition& partition, const Ensemble& ensemble,
                              const Platform& platform, NodePolicy node_policy,
                              CorePolicy core_policy) {
  if (auto errors = validate(ensemble, platform); !errors.empty()) {
    throw std::invalid_argument("policy_alloc(): invalid ensemble: " + errors.front());
  }
  if (auto errors = validate_partition(partition, ensemble); !errors.empty()) {
    throw std::invalid_argument("policy_alloc(): invalid partition: " + errors.front());
  }

  const double B = platform.bandwidth_per_node;
  const double C = platform.cores_per_node;
  const double N = platform.n_nodes;
  const auto units = cosched_groups(ensemble, partition);
  if (units.size() > static_cast<std::size_t>(platform.n_nodes)) {
    throw std::runtime_error("policy_alloc(): " + std::to_string(units.size()) +
                             " scheduling units exceed the " +
                             std::to_string(platform.n_nodes) + " available nodes");
  }

  const auto nc_specs = resolve_groups(partition, ensemble, "policy_alloc");
  const std::size_t n_nc = nc_specs.size();
  const double q_all = ensemble.total_seq_time();

  // Solved traffic terms drive CoAlloc node shares and CoAlloc core shares.
  std::vector<double> u_solved(n_nc, 0.0);
  if (node_policy == NodePolicy::CoAlloc || core_policy == CorePolicy::CoAlloc) {
    for (std::size_t i = 0; i < n_nc; ++i) {
      u_solved[i] = solve_u_star(nc_specs[i], platform, q_all);
    }
  }

  RationalSolution sol;
  sol.allocation.kind = AllocKind::Rational;

  // Node shares per scheduling unit.
  std::vector<double> nc_nodes(n_nc, 0.0);
  std::map<std::string, double> sim_nodes;
  if (node_policy == NodePolicy::EvAlloc) {
    const double share = N / static_cast<double>(units.size());
    for (std::size_t i = 0; i < n_nc; ++i) nc_nodes[i] = share;
    for (const auto& s : ensemble.simulations) sim_nodes[s.id] = share;
    sol.n_tilde = share * static_cast<double>(n_nc);
  } else {
    double u_total = 0.0;
    for (double u : u_solved) u_total += u;
    for (std::size_t i = 0; i < n_nc; ++i) {
      nc_nodes[i] = (B * group_q(nc_specs[i]) + u_solved[i]) / (B * q_all + u_total) * N;
      sol.n_tilde += nc_nodes[i];
    }
    if (!ensemble.simulations.empty()) {
      auto sim_based = alloc_simulation_based(partition, ensemble, platform, sol.n_tilde);
      for (const auto& sb : sim_based) sim_nodes[sb.sim_id] = sb.nodes;
    }
  }

  // Core shares within each unit, and the assembled per-app allocation.
  std::size_t nc_index = 0;
  for (const auto& unit : units) {
    if (unit.simulation) {
      const auto& s = *ensemble.find_simulation(*unit.simulation);
      const double nodes = sim_nodes.at(s.id);
      const double q_unit = s.seq_time + [&] {
        double q = 0.0;
        for (const auto& id : unit.analyses) q += ensemble.find_analysis(id)->seq_time;
        return q;
      }();
      if (core_policy == CorePolicy::CoAlloc) {
        sol.allocation.apps[s.id] = {nodes, s.seq_time / q_unit * C};
        for (const auto& id : unit.analyses) {
          sol.allocation.apps[id] = {nodes, ensemble.find_analysis(id)->seq_time / q_unit * C};
        }
      } else {
        const double share = C / static_cast<double>(1 + unit.analyses.size());
        sol.allocation.apps[s.id] = {nodes, share};
        for (const auto& id : unit.analyses) sol.allocation.apps[id] = {nodes, share};
      }
    } else {
      const auto& members = nc_specs[nc_index];
      const double nodes = nc_nodes[nc_index];
      const double qg = group_q(members);
      double u_realized = 0.0;
      for (const auto* a : members) {
        double c = 0.0;
        if (core_policy == CorePolicy::CoAlloc) {
          c = nc_core_share(*a, qg, u_solved[nc_index], platform);
        } else {
          c = C / static_cast<double>(members.size());
        }
        sol.allocation.apps[a->id] = {nodes, c};
        u_realized += c * a->data_volume;
      }
      sol.u_star_per_group.push_back(u_realized);
      ++nc_index;
    }
  }

  sol.equalized_time =
      modeled_makespan(ensemble, partition, sol.allocation, B) / ensemble.n_steps;
  return sol;
}

RationalSolution co_alloc(const Partition& partition, const Ensemble& ensemble,
                          const Platform& platform) {
  return policy_alloc(partition, ensemble, platform, NodePolicy::CoAlloc, CorePolicy::CoAlloc);
}

RationalSolution ev_alloc(const Partition& partition, const Ensemble& ensemble,
                          const Platform& platform) {
  return policy_alloc(partition, ensemble, platform, NodePolicy::EvAlloc, CorePolicy::EvAlloc);
}

}  // namespace ensim
