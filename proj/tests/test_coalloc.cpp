#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "common.hpp"
#include "doctest.h"
#include "ensim/coalloc.hpp"
#include "ensim/perf.hpp"
#include "ensim/scenarios.hpp"

using namespace ensim;
using namespace testutil;

namespace {

std::vector<const AnalysisSpec*> ptrs(const std::vector<AnalysisSpec>& specs) {
  std::vector<const AnalysisSpec*> out;
  for (const auto& a : specs) out.push_back(&a);
  return out;
}

double residual(const std::vector<AnalysisSpec>& group, const Platform& p, double u) {
  const double B = p.bandwidth_per_node;
  const double C = p.cores_per_node;
  double qg = 0.0;
  for (const auto& a : group) qg += a.seq_time;
  double lhs = 0.0;
  for (const auto& a : group) lhs += a.seq_time / (B * qg + u - C * a.data_volume);
  return std::abs(lhs - 1.0 / B);
}

// Core shares implied by a solved traffic term, straight from the defining
// relation; used to verify the exactness identities independently.
std::vector<double> implied_cores(const std::vector<AnalysisSpec>& group, const Platform& p,
                                  double u) {
  const double B = p.bandwidth_per_node;
  const double C = p.cores_per_node;
  double qg = 0.0;
  for (const auto& a : group) qg += a.seq_time;
  std::vector<double> cores;
  for (const auto& a : group) {
    const double denom = B * qg + u - C * a.data_volume;
    REQUIRE(denom > 0.0);
    cores.push_back(B * a.seq_time * C / denom);
  }
  return cores;
}

// The ensemble behind the worked example: two simulations of 4 s each, one
// co-located analysis (2 s) and one remote analysis (3 s, 5 GB) on a
// 10-node, 4-core, 1 GB/s platform. Every share works out to a small
// rational: nodes 20/11, 40/33, 230/33; the common per-iteration time is
// exactly 0.825 s.
Ensemble worked_ensemble() {
  Ensemble e;
  e.n_steps = 4;
  e.simulations = {sim_spec("s1", 4.0), sim_spec("s2", 4.0)};
  e.analyses = {analysis_spec("s1a1", 2.0, 5e9, "s1"),
                analysis_spec("s2a1", 3.0, 5e9, "s2")};
  return e;
}

Partition worked_partition() {
  Partition p;
  p.co_scheduled = {"s1a1"};
  p.not_co_scheduled = {{"s2a1"}};
  return p;
}

// Applies the implemented allocation rules to a mapping that may place a
// remote analysis inside a foreign simulation's unit: hosted members draw
// cores in proportion to their sequential time (like any other unit member)
// and pay their transfer out of the hosting unit's node share, while
// analysis-only groups keep the solved-traffic shares. Returns the resulting
// per-iteration makespan, i.e. the slowest application's time.
double hosted_mapping_time(const Ensemble& e, const Platform& plat,
                           const std::set<std::string>& co,
                           const std::vector<std::set<std::string>>& pool,
                           const std::map<std::string, std::string>& hosted) {
  const double B = plat.bandwidth_per_node;
  const double C = plat.cores_per_node;
  const double N = plat.n_nodes;
  const double q_all = e.total_seq_time();

  std::vector<double> u_star(pool.size(), 0.0);
  std::vector<double> qg(pool.size(), 0.0);
  double u_total = 0.0;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    std::vector<const AnalysisSpec*> members;
    for (const auto& id : pool[i]) {
      members.push_back(e.find_analysis(id));
      qg[i] += members.back()->seq_time;
    }
    u_star[i] = solve_u_star(members, plat, q_all);
    u_total += u_star[i];
  }

  double n_tilde = 0.0;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    n_tilde += (B * qg[i] + u_star[i]) / (B * q_all + u_total) * N;
  }

  // Aggregate sequential time on the simulation side: every application that
  // is not in an analysis-only group, hosted foreigners included.
  double q_sb = 0.0;
  for (const auto& s : e.simulations) q_sb += s.seq_time;
  for (const auto& a : e.analyses) {
    if (co.count(a.id) || hosted.count(a.id)) q_sb += a.seq_time;
  }

  double worst = 0.0;
  for (const auto& s : e.simulations) {
    double q_unit = s.seq_time;
    std::vector<const AnalysisSpec*> remote_members;
    for (const auto& a : e.analyses) {
      if (co.count(a.id) && a.coupled_sim == s.id) q_unit += a.seq_time;
      if (auto it = hosted.find(a.id); it != hosted.end() && it->second == s.id) {
        q_unit += a.seq_time;
        remote_members.push_back(&a);
      }
    }
    const double nodes = q_unit / q_sb * (N - n_tilde);
    // Cores proportional to sequential time equalize all local members at
    // q_unit / (nodes * C); a hosted member adds its transfer on top.
    worst = std::max(worst, q_unit / (nodes * C));
    for (const auto* a : remote_members) {
      worst = std::max(worst, q_unit / (nodes * C) + a->data_volume / (B * nodes));
    }
  }

  for (std::size_t i = 0; i < pool.size(); ++i) {
    const double nodes = (B * qg[i] + u_star[i]) / (B * q_all + u_total) * N;
    for (const auto& id : pool[i]) {
      const auto* a = e.find_analysis(id);
      const double c = B * a->seq_time * C / (B * qg[i] + u_star[i] - C * a->data_volume);
      worst = std::max(worst, a->seq_time / (nodes * c) + a->data_volume / (B * nodes));
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("solve_u_star: closed forms and input validation") {
  const Platform plat = make_platform(8, 4, 64, 1);

  SUBCASE("single-member groups use cores times volume") {
    const std::vector<AnalysisSpec> g = {analysis_spec("a", 3.0, 5e9, "s1")};
    CHECK(solve_u_star(ptrs(g), plat, 10.0) == 4.0 * 5e9);
  }
  SUBCASE("equal volumes collapse to the same closed form") {
    const std::vector<AnalysisSpec> g = {analysis_spec("a", 2.0, 3e9, "s1"),
                                         analysis_spec("b", 7.0, 3e9, "s1")};
    CHECK(solve_u_star(ptrs(g), plat, 10.0) == 4.0 * 3e9);
  }
  SUBCASE("all-zero volumes yield zero traffic") {
    const std::vector<AnalysisSpec> g = {analysis_spec("a", 2.0, 0.0, "s1"),
                                         analysis_spec("b", 7.0, 0.0, "s1")};
    CHECK(solve_u_star(ptrs(g), plat, 10.0) == 0.0);
  }
  SUBCASE("bad inputs are rejected") {
    CHECK_THROWS_AS(solve_u_star({}, plat, 10.0), std::invalid_argument);
    const std::vector<AnalysisSpec> flat = {analysis_spec("a", 0.0, 1e9, "s1")};
    CHECK_THROWS_AS(solve_u_star(ptrs(flat), plat, 10.0), std::invalid_argument);
    const std::vector<AnalysisSpec> neg = {analysis_spec("a", 1.0, -1e9, "s1")};
    CHECK_THROWS_AS(solve_u_star(ptrs(neg), plat, 10.0), std::invalid_argument);
    Platform bad = plat;
    bad.bandwidth_per_node = 0.0;
    const std::vector<AnalysisSpec> ok = {analysis_spec("a", 1.0, 1e9, "s1")};
    CHECK_THROWS_AS(solve_u_star(ptrs(ok), bad, 10.0), std::invalid_argument);
  }
}

TEST_CASE("solve_u_star: two-volume group matches the quadratic closed form") {
  // Two analyses of 100 s with volumes 8 GB and 2 GB on a 16-core, 10 GB/s
  // platform. Scaling the defining relation to units of 1e9 gives
  // 1000/(u + 1872) + 1000/(u + 1968) = 1, i.e. u^2 + 1840 u - 155904 = 0,
  // whose positive root is (-1840 + sqrt(4009216)) / 2.
  const Platform plat = make_platform(8, 16, 64, 10);
  const std::vector<AnalysisSpec> g = {analysis_spec("a", 100.0, 8e9, "s1"),
                                       analysis_spec("b", 100.0, 2e9, "s1")};
  const double expected = (-1840.0 + std::sqrt(4009216.0)) / 2.0 * 1e9;
  const double u = solve_u_star(ptrs(g), plat, 200.0);
  CHECK(rel_close(u, expected, 1e-12));
  CHECK(residual(g, plat, u) < 1e-12 / plat.bandwidth_per_node);

  const auto cores = implied_cores(g, plat, u);
  CHECK(rel_close(cores[0] + cores[1], 16.0, 1e-9));
  CHECK(rel_close(cores[0] * 8e9 + cores[1] * 2e9, u, 1e-9));
}

TEST_CASE("solve_u_star: root pinned near the bracket floor") {
  // A huge-volume member pushes the feasible region's lower edge above zero:
  // with times 1 s and 2 s, volumes 50 GB and 0 on 4 cores at 1 GB/s the
  // scaled relation is 1/(u - 197) + 2/(u + 3) = 1, root (197 + sqrt(39609))/2.
  const Platform plat = make_platform(8, 4, 64, 1);
  const std::vector<AnalysisSpec> g = {analysis_spec("a", 1.0, 50e9, "s1"),
                                       analysis_spec("b", 2.0, 0.0, "s1")};
  const double expected = (197.0 + std::sqrt(39609.0)) / 2.0 * 1e9;
  const double u = solve_u_star(ptrs(g), plat, 3.0);
  CHECK(rel_close(u, expected, 1e-12));
  CHECK(residual(g, plat, u) < 1e-12 / plat.bandwidth_per_node);
}

TEST_CASE("solve_u_star: defining relations hold across random groups") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> q_draw(0.5, 10.0);
  std::uniform_real_distribution<double> v_draw(0.0, 8e9);
  const int cores_options[] = {4, 8, 16, 32};
  const double bw_options[] = {1.0, 10.0};

  for (int trial = 0; trial < 100; ++trial) {
    const int size = 2 + static_cast<int>(rng() % 4);
    const Platform plat = make_platform(8, cores_options[rng() % 4], 64, bw_options[rng() % 2]);
    std::vector<AnalysisSpec> g;
    double v_min = 8e9;
    double v_max = 0.0;
    for (int i = 0; i < size; ++i) {
      const double v = v_draw(rng);
      v_min = std::min(v_min, v);
      v_max = std::max(v_max, v);
      g.push_back(analysis_spec("a" + std::to_string(i), q_draw(rng), v, "s1"));
    }

    CAPTURE(trial);
    const double u = solve_u_star(ptrs(g), plat, 50.0);
    const double C = plat.cores_per_node;
    CHECK(residual(g, plat, u) < 1e-12 / plat.bandwidth_per_node);
    // The traffic term is a core-weighted mean of the volumes scaled by C, so
    // it must land between C*v_min and C*v_max.
    CHECK(u >= C * v_min - 1e-6);
    CHECK(u <= C * v_max + 1e-6);

    const auto cores = implied_cores(g, plat, u);
    double core_sum = 0.0;
    double traffic = 0.0;
    for (std::size_t i = 0; i < cores.size(); ++i) {
      core_sum += cores[i];
      traffic += cores[i] * g[i].data_volume;
    }
    CHECK(rel_close(core_sum, C, 1e-9));
    CHECK(rel_close(traffic, u, 1e-9));
  }
}

TEST_CASE("worked example: exact two-stage shares") {
  const Ensemble e = worked_ensemble();
  const Partition p = worked_partition();
  const Platform plat = make_platform(10, 4, 64, 1);

  SUBCASE("analysis-only stage") {
    const auto nc = alloc_analysis_only(p, e, plat);
    REQUIRE(nc.groups.size() == 1);
    CHECK(nc.groups[0].members == std::vector<std::string>{"s2a1"});
    CHECK(rel_close(nc.groups[0].nodes, 230.0 / 33.0, 1e-12));
    CHECK(rel_close(nc.groups[0].cores.at("s2a1"), 4.0, 1e-12));
    CHECK(rel_close(nc.groups[0].u, 20e9, 1e-12));
    CHECK(rel_close(nc.n_tilde, 230.0 / 33.0, 1e-12));
    CHECK(rel_close(nc.u_total, 20e9, 1e-12));
  }

  SUBCASE("simulation stage") {
    const auto sb = alloc_simulation_based(p, e, plat, 230.0 / 33.0);
    REQUIRE(sb.size() == 2);
    CHECK(sb[0].sim_id == "s1");
    CHECK(rel_close(sb[0].nodes, 20.0 / 11.0, 1e-12));
    CHECK(rel_close(sb[0].sim_cores, 8.0 / 3.0, 1e-12));
    CHECK(rel_close(sb[0].analysis_cores.at("s1a1"), 4.0 / 3.0, 1e-12));
    CHECK(sb[1].sim_id == "s2");
    CHECK(rel_close(sb[1].nodes, 40.0 / 33.0, 1e-12));
    CHECK(rel_close(sb[1].sim_cores, 4.0, 1e-12));
    CHECK(sb[1].analysis_cores.empty());
  }

  SUBCASE("full solution") {
    const auto sol = co_alloc(p, e, plat);
    CHECK(rel_close(sol.n_tilde, 230.0 / 33.0, 1e-12));
    REQUIRE(sol.u_star_per_group.size() == 1);
    CHECK(rel_close(sol.u_star_per_group[0], 20e9, 1e-12));
    CHECK(rel_close(sol.equalized_time, 0.825, 1e-12));

    CHECK(rel_close(sol.allocation.at("s1").nodes, 20.0 / 11.0, 1e-12));
    CHECK(rel_close(sol.allocation.at("s1").cores, 8.0 / 3.0, 1e-12));
    CHECK(rel_close(sol.allocation.at("s1a1").nodes, 20.0 / 11.0, 1e-12));
    CHECK(rel_close(sol.allocation.at("s1a1").cores, 4.0 / 3.0, 1e-12));
    CHECK(rel_close(sol.allocation.at("s2").nodes, 40.0 / 33.0, 1e-12));
    CHECK(rel_close(sol.allocation.at("s2").cores, 4.0, 1e-12));
    CHECK(rel_close(sol.allocation.at("s2a1").nodes, 230.0 / 33.0, 1e-12));
    CHECK(rel_close(sol.allocation.at("s2a1").cores, 4.0, 1e-12));

    double node_sum = 0.0;
    node_sum += sol.allocation.at("s1").nodes;
    node_sum += sol.allocation.at("s2").nodes;
    node_sum += sol.allocation.at("s2a1").nodes;
    CHECK(rel_close(node_sum, 10.0, 1e-12));

    CHECK(rel_close(modeled_makespan(e, p, sol.allocation, plat.bandwidth_per_node), 3.3,
                    1e-12));
    // Independent equal-finish-time oracle over the same units.
    CHECK(rel_close(oracle_equalized_time(oracle_units(e, p), 10, 4, 1e9), 0.825, 1e-12));
  }
}

TEST_CASE("policy variants split evenly where requested") {
  const Ensemble e = worked_ensemble();
  const Partition p = worked_partition();
  const Platform plat = make_platform(10, 4, 64, 1);

  SUBCASE("even nodes, even cores") {
    const auto sol = ev_alloc(p, e, plat);
    CHECK(rel_close(sol.n_tilde, 10.0 / 3.0, 1e-12));
    for (const auto& id : {"s1", "s1a1", "s2", "s2a1"}) {
      CHECK(rel_close(sol.allocation.at(id).nodes, 10.0 / 3.0, 1e-12));
    }
    CHECK(rel_close(sol.allocation.at("s1").cores, 2.0, 1e-12));
    CHECK(rel_close(sol.allocation.at("s1a1").cores, 2.0, 1e-12));
    CHECK(rel_close(sol.allocation.at("s2").cores, 4.0, 1e-12));
    CHECK(rel_close(sol.allocation.at("s2a1").cores, 4.0, 1e-12));
    // The remote analysis is the straggler: 3/(10/3 * 4) + 5/(10/3).
    CHECK(rel_close(sol.equalized_time, 1.725, 1e-12));
  }

  SUBCASE("solved nodes, even cores") {
    const auto sol = policy_alloc(p, e, plat, NodePolicy::CoAlloc, CorePolicy::EvAlloc);
    CHECK(rel_close(sol.allocation.at("s1").nodes, 20.0 / 11.0, 1e-12));
    CHECK(rel_close(sol.allocation.at("s2").nodes, 40.0 / 33.0, 1e-12));
    CHECK(rel_close(sol.allocation.at("s2a1").nodes, 230.0 / 33.0, 1e-12));
    CHECK(rel_close(sol.allocation.at("s1").cores, 2.0, 1e-12));
    CHECK(rel_close(sol.allocation.at("s1a1").cores, 2.0, 1e-12));
    // The simulation of the first unit becomes the straggler: 4/(20/11 * 2).
    CHECK(rel_close(sol.equalized_time, 1.1, 1e-12));
  }

  SUBCASE("even nodes, solved cores") {
    const auto sol = policy_alloc(p, e, plat, NodePolicy::EvAlloc, CorePolicy::CoAlloc);
    CHECK(rel_close(sol.allocation.at("s1").nodes, 10.0 / 3.0, 1e-12));
    CHECK(rel_close(sol.allocation.at("s1").cores, 8.0 / 3.0, 1e-12));
    CHECK(rel_close(sol.allocation.at("s1a1").cores, 4.0 / 3.0, 1e-12));
    CHECK(rel_close(sol.allocation.at("s2a1").cores, 4.0, 1e-12));
    CHECK(rel_close(sol.equalized_time, 1.725, 1e-12));
  }

  SUBCASE("solved nodes and cores reduce to co_alloc") {
    const auto a = policy_alloc(p, e, plat, NodePolicy::CoAlloc, CorePolicy::CoAlloc);
    const auto b = co_alloc(p, e, plat);
    for (const auto& [id, share] : b.allocation.apps) {
      CHECK(a.allocation.at(id).nodes == share.nodes);
      CHECK(a.allocation.at(id).cores == share.cores);
    }
    CHECK(a.equalized_time == b.equalized_time);
  }
}

TEST_CASE("co_alloc equalizes every application and exhausts the platform") {
  const double volumes[] = {0.0, 1e9, 4e9, 8e9};
  const double bws[] = {1.0, 10.0};
  const ScenarioSpec scenarios[] = {{ScenarioKind::Ideal, 0.0},
                                    {ScenarioKind::InTransit, 0.0},
                                    {ScenarioKind::Increasing, 25.0},
                                    {ScenarioKind::Increasing, 50.0},
                                    {ScenarioKind::Increasing, 75.0},
                                    {ScenarioKind::Decreasing, 50.0}};
  int solved = 0;
  for (int seed = 0; seed < 50; ++seed) {
    GeneratorConfig cfg;
    cfg.n_sims = 1 + seed % 4;
    cfg.analyses_per_sim = 1 + (seed / 4) % 4;
    cfg.sim_seq_time = 6.0;
    cfg.data_volume = volumes[seed % 4];
    cfg.sim_mem = 1e9;
    cfg.analysis_mem = 1e9;
    cfg.n_steps = 2;
    cfg.seed = 100 + static_cast<std::uint64_t>(seed);
    const Ensemble e = generate_ensemble(cfg);
    const Platform plat = make_platform(32, 8, 256, bws[seed % 2]);
    const double B = plat.bandwidth_per_node;

    for (const auto& sc : scenarios) {
      const Partition p = make_partition(e, sc);
      const auto sol = co_alloc(p, e, plat);
      CAPTURE(seed);
      CAPTURE(scenario_name(sc));

      double t_min = std::numeric_limits<double>::infinity();
      double t_max = 0.0;
      double node_sum = 0.0;
      for (const auto& s : e.simulations) {
        const auto& share = sol.allocation.at(s.id);
        const double t = iter_time_sim(s, share.nodes, share.cores);
        t_min = std::min(t_min, t);
        t_max = std::max(t_max, t);
      }
      for (const auto& a : e.analyses) {
        const auto& share = sol.allocation.at(a.id);
        const double t =
            iter_time_analysis(a, share.nodes, share.cores, p.is_co_scheduled(a.id), B);
        t_min = std::min(t_min, t);
        t_max = std::max(t_max, t);
      }
      CHECK(t_max / t_min <= 1.0 + 1e-9);
      CHECK(rel_close(sol.equalized_time, t_max, 1e-12));

      // Node shares sum to the whole machine; cores sum to C inside each unit.
      std::size_t nc_index = 0;
      for (const auto& unit : cosched_groups(e, p)) {
        double cores = 0.0;
        if (unit.simulation) {
          node_sum += sol.allocation.at(*unit.simulation).nodes;
          cores += sol.allocation.at(*unit.simulation).cores;
        } else {
          node_sum += sol.allocation.at(*unit.analyses.begin()).nodes;
        }
        double q_members = 0.0;
        double u_remote = 0.0;
        if (unit.simulation) {
          q_members += e.find_simulation(*unit.simulation)->seq_time;
        } else {
          u_remote = sol.u_star_per_group.at(nc_index++);
        }
        for (const auto& id : unit.analyses) {
          cores += sol.allocation.at(id).cores;
          q_members += e.find_analysis(id)->seq_time;
        }
        CHECK(rel_close(cores, plat.cores_per_node, 1e-9));
        const double nodes = unit.simulation ? sol.allocation.at(*unit.simulation).nodes
                                             : sol.allocation.at(*unit.analyses.begin()).nodes;
        CHECK(rel_close(
            unit_alloc_time(q_members, u_remote, nodes, plat.cores_per_node, B),
            sol.equalized_time, 1e-9));
      }
      CHECK(rel_close(node_sum, plat.n_nodes, 1e-9));

      // Cross-check the whole pipeline against the independent oracle.
      CHECK(rel_close(oracle_equalized_time(oracle_units(e, p), plat.n_nodes,
                                            plat.cores_per_node, B),
                      sol.equalized_time, 1e-9));
      ++solved;
    }
  }
  CHECK(solved == 50 * 6);
}

TEST_CASE("moving an analysis out of co-scheduling never improves the modeled time") {
  const Platform plat = make_platform(32, 8, 256, 1);
  int violations = 0;
  int strict_increases = 0;
  int moves = 0;
  for (int seed = 0; seed < 100; ++seed) {
    GeneratorConfig cfg;
    cfg.n_sims = 1 + seed % 4;
    cfg.analyses_per_sim = 1 + (seed / 4) % 4;
    cfg.sim_seq_time = 6.0;
    cfg.data_volume = static_cast<double>(seed % 5) * 2e9;
    cfg.sim_mem = 1e9;
    cfg.analysis_mem = 1e9;
    cfg.n_steps = 2;
    cfg.seed = 1000 + static_cast<std::uint64_t>(seed);
    const Ensemble e = generate_ensemble(cfg);

    const ScenarioSpec bases[] = {{ScenarioKind::Ideal, 0.0}, {ScenarioKind::Increasing, 50.0}};
    for (const auto& base : bases) {
      const Partition p0 = make_partition(e, base);
      const double t0 = co_alloc(p0, e, plat).equalized_time;
      for (const auto& id : p0.co_scheduled) {
        Partition p1 = p0;
        p1.co_scheduled.erase(id);
        if (p1.not_co_scheduled.empty()) {
          p1.not_co_scheduled.push_back({id});
        } else {
          p1.not_co_scheduled[0].insert(id);
        }
        const double t1 = co_alloc(p1, e, plat).equalized_time;
        if (t1 < t0 * (1.0 - 1e-9)) ++violations;
        if (t1 > t0 * (1.0 + 1e-9)) ++strict_increases;
        ++moves;
      }
    }
  }
  CHECK(violations == 0);
  // The property is not vacuous: breaking up an all-co-located mapping with a
  // positive data volume strictly increases the equalized time.
  CHECK(strict_increases > 0);
  CHECK(moves > 100);
}

TEST_CASE("analysis-only placement beats foreign hosting under the allocation rules") {
  const Platform plat = make_platform(16, 8, 256, 1);

  // Generated uniform-volume instances plus one hand-built ensemble with
  // distinct volumes; at most 3 simulations and 4 analyses each.
  std::vector<Ensemble> instances;
  {
    const int shapes[][2] = {{2, 1}, {2, 2}, {3, 1}};
    const double volumes[] = {2e9, 8e9, 4e9};
    for (int i = 0; i < 3; ++i) {
      GeneratorConfig cfg;
      cfg.n_sims = shapes[i][0];
      cfg.analyses_per_sim = shapes[i][1];
      cfg.sim_seq_time = 8.0;
      cfg.data_volume = volumes[i];
      cfg.sim_mem = 1e9;
      cfg.analysis_mem = 1e9;
      cfg.n_steps = 2;
      cfg.seed = 31 + static_cast<std::uint64_t>(i);
      instances.push_back(generate_ensemble(cfg));
    }
    Ensemble mixed;
    mixed.n_steps = 2;
    mixed.simulations = {sim_spec("s1", 10.0), sim_spec("s2", 8.0), sim_spec("s3", 12.0)};
    mixed.analyses = {analysis_spec("s1a1", 4.0, 1e9, "s1"),
                      analysis_spec("s1a2", 7.0, 6e9, "s1"),
                      analysis_spec("s2a1", 6.0, 8e9, "s2"),
                      analysis_spec("s3a1", 5.0, 3e9, "s3")};
    instances.push_back(std::move(mixed));
  }

  int strict_dominance = 0;
  for (std::size_t inst = 0; inst < instances.size(); ++inst) {
    const Ensemble& e = instances[inst];
    const ScenarioSpec bases[] = {{ScenarioKind::InTransit, 0.0},
                                  {ScenarioKind::Increasing, 50.0}};
    for (const auto& base : bases) {
      const Partition p = make_partition(e, base);
      REQUIRE(!p.not_co_scheduled.empty());
      const double t_canonical = co_alloc(p, e, plat).equalized_time;

      // The evaluator reproduces the solver on the canonical mapping.
      CHECK(rel_close(
          hosted_mapping_time(e, plat, p.co_scheduled, p.not_co_scheduled, {}),
          t_canonical, 1e-9));

      std::vector<std::string> nc_ids(p.not_co_scheduled[0].begin(),
                                      p.not_co_scheduled[0].end());
      std::vector<std::vector<std::string>> foreign(nc_ids.size());
      for (std::size_t i = 0; i < nc_ids.size(); ++i) {
        const auto* a = e.find_analysis(nc_ids[i]);
        for (const auto& s : e.simulations) {
          if (s.id != a->coupled_sim) foreign[i].push_back(s.id);
        }
      }

      // Mixed-radix enumeration: choice 0 keeps the analysis in the shared
      // analysis-only group, choice j hosts it in its j-th foreign unit.
      std::vector<std::size_t> choice(nc_ids.size(), 0);
      while (true) {
        std::size_t pos = 0;
        while (pos < choice.size()) {
          if (++choice[pos] <= foreign[pos].size()) break;
          choice[pos++] = 0;
        }
        if (pos == choice.size()) break;

        std::set<std::string> pool_members;
        std::map<std::string, std::string> hosted;
        for (std::size_t i = 0; i < nc_ids.size(); ++i) {
          if (choice[i] == 0) {
            pool_members.insert(nc_ids[i]);
          } else {
            hosted[nc_ids[i]] = foreign[i][choice[i] - 1];
          }
        }
        std::vector<std::set<std::string>> pool;
        if (!pool_members.empty()) pool.push_back(std::move(pool_members));

        CAPTURE(inst);
        CAPTURE(scenario_name(base));
        const double t = hosted_mapping_time(e, plat, p.co_scheduled, pool, hosted);
        CHECK(t >= t_canonical * (1.0 - 1e-9));
        if (t > t_canonical * (1.0 + 1e-9)) ++strict_dominance;
      }
    }
  }
  CHECK(strict_dominance > 0);
}

TEST_CASE("splitting a uniform-volume group costs one transfer share per extra group") {
  // With equal volumes, membership inside a fixed number of analysis-only
  // groups does not matter: each group's traffic term is C*V regardless of
  // who is in it. Fewer groups are never worse.
  GeneratorConfig cfg;
  cfg.n_sims = 2;
  cfg.analyses_per_sim = 2;
  cfg.sim_seq_time = 8.0;
  cfg.data_volume = 4e9;
  cfg.sim_mem = 1e9;
  cfg.analysis_mem = 1e9;
  cfg.n_steps = 2;
  cfg.seed = 77;
  const Ensemble e = generate_ensemble(cfg);
  const Platform plat = make_platform(16, 8, 256, 1);
  const Partition p = make_partition(e, {ScenarioKind::InTransit, 0.0});
  REQUIRE(p.not_co_scheduled.size() == 1);
  std::vector<std::string> ids(p.not_co_scheduled[0].begin(), p.not_co_scheduled[0].end());
  REQUIRE(ids.size() == 4);

  const double merged = hosted_mapping_time(e, plat, p.co_scheduled, p.not_co_scheduled, {});
  const std::vector<std::vector<std::set<std::string>>> splits = {
      {{ids[0], ids[1]}, {ids[2], ids[3]}},
      {{ids[0], ids[2]}, {ids[1], ids[3]}},
      {{ids[0], ids[3]}, {ids[1], ids[2]}},
  };
  const double first = hosted_mapping_time(e, plat, p.co_scheduled, splits[0], {});
  for (const auto& split : splits) {
    const double t = hosted_mapping_time(e, plat, p.co_scheduled, split, {});
    CHECK(rel_close(t, first, 1e-9));
    CHECK(t >= merged * (1.0 - 1e-9));
  }
  CHECK(first > merged * (1.0 + 1e-9));
}

TEST_CASE("degenerate inputs are rejected") {
  const Ensemble e = worked_ensemble();
  const Partition p = worked_partition();

  SUBCASE("more scheduling units than nodes") {
    const Platform tiny = make_platform(2, 4, 64, 1);
    CHECK_THROWS_AS(co_alloc(p, e, tiny), std::runtime_error);
  }
  SUBCASE("analysis-only stage consuming every node") {
    const Platform plat = make_platform(10, 4, 64, 1);
    CHECK_THROWS_AS(alloc_simulation_based(p, e, plat, 10.0), std::runtime_error);
  }
  SUBCASE("invalid ensemble") {
    Ensemble bad = e;
    bad.simulations[0].seq_time = -1.0;
    const Platform plat = make_platform(10, 4, 64, 1);
    CHECK_THROWS_AS(co_alloc(p, bad, plat), std::invalid_argument);
  }
  SUBCASE("invalid partition") {
    Partition bad = p;
    bad.co_scheduled.insert("nope");
    const Platform plat = make_platform(10, 4, 64, 1);
    CHECK_THROWS_AS(co_alloc(bad, e, plat), std::invalid_argument);
  }
}
