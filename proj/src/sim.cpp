#include "ensim/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace ensim {

std::string stage_name(Stage s) {
  switch (s) {
    case Stage::Compute:
      return "compute";
    case Stage::Write:
      return "write";
    case Stage::Read:
      return "read";
  }
  return "unknown";
}

std::vector<double> bandwidth_share(const std::vector<Flow>& flows, const Platform& platform) {
  const double B = platform.bandwidth_per_node;
  if (B <= 0) {
    throw std::invalid_argument("bandwidth_share(): bandwidth_per_node must be positive");
  }
  std::vector<double> rates(flows.size(), 0.0);
  std::vector<bool> frozen(flows.size(), false);

  std::map<int, std::vector<std::size_t>> node_flows;
  for (std::size_t i = 0; i < flows.size(); ++i) {
    for (int v : flows[i].src_nodes) node_flows[v].push_back(i);
    for (int v : flows[i].dst_nodes) node_flows[v].push_back(i);
  }

  // Progressive filling: all unfrozen flows grow at a common rate until some
  // node saturates; its flows freeze there, freeing the rest to keep growing.
  for (std::size_t round = 0; round < flows.size(); ++round) {
    double level = std::numeric_limits<double>::infinity();
    for (const auto& [v, fs] : node_flows) {
      double used = 0.0;
      int unfrozen = 0;
      for (std::size_t i : fs) {
        if (frozen[i]) {
          used += rates[i];
        } else {
          ++unfrozen;
        }
      }
      if (unfrozen == 0) continue;
      level = std::min(level, std::max(B - used, 0.0) / unfrozen);
    }
    if (!std::isfinite(level)) break;  // everything frozen

    bool any = false;
    for (const auto& [v, fs] : node_flows) {
      double used = 0.0;
      int unfrozen = 0;
      for (std::size_t i : fs) {
        if (frozen[i]) {
          used += rates[i];
        } else {
          ++unfrozen;
        }
      }
      if (unfrozen == 0) continue;
      const double node_level = std::max(B - used, 0.0) / unfrozen;
      if (node_level <= level * (1.0 + 1e-12)) {
        for (std::size_t i : fs) {
          if (!frozen[i]) {
            frozen[i] = true;
            rates[i] = level;
            any = true;
          }
        }
      }
    }
    if (!any) break;
  }
  return rates;
}

namespace {

constexpr double kByteEps = 1e-6;  // flows below this many bytes are complete

struct AppState {
  std::string id;
  bool is_sim = false;
  double seq_time = 0.0;
  double volume = 0.0;
  double duration = 0.0;  // one compute stage
  bool co_located = true; // analyses only
  std::string coupled;    // analyses: producing simulation
  std::vector<int> nodes;
  std::vector<int> src_nodes;  // analyses: producer's nodes

  int computes_done = 0;
  int writes_done = 0;   // simulations
  int reads_done = 0;    // analyses
  bool compute_running = false;
  double compute_end = 0.0;
  bool reading = false;
  double read_start = 0.0;
  int open_flows = 0;
};

struct FlowState {
  Flow flow;
  std::size_t app_index = 0;
};

}  // namespace

SimReport simulate(const Ensemble& ensemble, const Partition& partition,
                   const Allocation& allocation, const Platform& platform,
                   int pipeline_depth) {
  if (allocation.kind != AllocKind::Integer) {
    throw std::invalid_argument("simulate(): allocation must be integer");
  }
  if (pipeline_depth < 1) {
    throw std::invalid_argument("simulate(): pipeline_depth must be at least 1");
  }
  if (auto errors = validate(ensemble, platform); !errors.empty()) {
    throw std::invalid_argument("simulate(): invalid ensemble: " + errors.front());
  }
  if (auto errors = validate_partition(partition, ensemble); !errors.empty()) {
    throw std::invalid_argument("simulate(): invalid partition: " + errors.front());
  }

  // Lay scheduling units out on disjoint node ranges and check capacities.
  const auto units = cosched_groups(ensemble, partition);
  std::map<std::string, std::vector<int>> unit_nodes;  // per unit label
  std::map<std::string, std::string> unit_of;          // app -> unit label
  int base = 0;
  for (const auto& unit : units) {
    std::vector<std::string> members = unit.analyses;
    if (unit.simulation) members.insert(members.begin(), *unit.simulation);
    if (members.empty()) continue;
    const double nodes_d = allocation.at(members.front()).nodes;
    double core_sum = 0.0;
    for (const auto& id : members) {
      const AppAlloc& a = allocation.at(id);
      if (a.nodes != nodes_d) {
        throw std::invalid_argument("simulate(): apps of unit '" + unit.label +
                                    "' disagree on node count");
      }
      if (a.cores < 1 || a.cores != std::floor(a.cores)) {
        throw std::invalid_argument("simulate(): app '" + id +
                                    "' needs a positive integer core count");
      }
      core_sum += a.cores;
    }
    if (nodes_d < 1 || nodes_d != std::floor(nodes_d)) {
      throw std::invalid_argument("simulate(): unit '" + unit.label +
                                  "' needs a positive integer node count");
    }
    if (core_sum > platform.cores_per_node) {
      throw std::invalid_argument("simulate(): unit '" + unit.label + "' oversubscribes cores");
    }
    const int n = static_cast<int>(nodes_d);
    if (base + n > platform.n_nodes) {
      throw std::invalid_argument("simulate(): allocation oversubscribes nodes");
    }
    std::vector<int>& range = unit_nodes[unit.label];
    for (int i = 0; i < n; ++i) range.push_back(base + i);
    base += n;
    for (const auto& id : members) unit_of[id] = unit.label;
  }

  // Per-app runtime state, ordered by id for deterministic scans.
  std::vector<AppState> apps;
  std::map<std::string, std::size_t> app_index;
  for (const auto& s : ensemble.simulations) {
    AppState st;
    st.id = s.id;
    st.is_sim = true;
    st.seq_time = s.seq_time;
    st.nodes = unit_nodes.at(unit_of.at(s.id));
    const AppAlloc& a = allocation.at(s.id);
    st.duration = s.seq_time / (a.nodes * a.cores);
    apps.push_back(std::move(st));
  }
  for (const auto& an : ensemble.analyses) {
    AppState st;
    st.id = an.id;
    st.seq_time = an.seq_time;
    st.volume = an.data_volume;
    st.coupled = an.coupled_sim;
    st.co_located = partition.is_co_scheduled(an.id);
    st.nodes = unit_nodes.at(unit_of.at(an.id));
    st.src_nodes = unit_nodes.at(unit_of.at(an.coupled_sim));
    const AppAlloc& a = allocation.at(an.id);
    st.duration = an.seq_time / (a.nodes * a.cores);
    apps.push_back(std::move(st));
  }
  std::sort(apps.begin(), apps.end(),
            [](const AppState& a, const AppState& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < apps.size(); ++i) app_index[apps[i].id] = i;

  const int n_steps = ensemble.n_steps;
  SimReport report;
  std::vector<FlowState> flows;
  double now = 0.0;

  auto start_compute = [&](AppState& app, int iter) {
    app.compute_running = true;
    app.compute_end = now + app.duration;
    report.timeline.push_back({app.id, iter, Stage::Compute, now, app.compute_end});
  };

  auto finish_read = [&](AppState& app, double at) {
    report.timeline.push_back({app.id, app.reads_done, Stage::Read, app.read_start, at});
    app.reading = false;
    app.reads_done += 1;
  };

  // Kick off every simulation's first compute.
  for (auto& app : apps) {
    if (app.is_sim) start_compute(app, 0);
  }

  // Instant transitions (writes, read starts, co-located reads) cascade until
  // nothing changes; app order is deterministic (sorted by id).
  auto progress = [&]() {
    bool changed = true;
    while (changed) {
      changed = false;
      for (auto& app : apps) {
        if (app.is_sim) {
          const int k = app.writes_done;
          if (k >= n_steps || app.computes_done < k + 1) continue;
          // Buffer rule: Write k waits until Read k-d+1 freed the frame slot.
          bool gate_open = true;
          const int needed_read = k - pipeline_depth + 1;
          if (needed_read >= 0) {
            for (const auto* a : ensemble.coupled_analyses(app.id)) {
              if (apps[app_index.at(a->id)].reads_done < needed_read + 1) {
                gate_open = false;
                break;
              }
            }
          }
          if (!gate_open) continue;
          report.timeline.push_back({app.id, k, Stage::Write, now, now});
          app.writes_done += 1;
          if (app.writes_done < n_steps) start_compute(app, app.writes_done);
          changed = true;
        } else {
          if (app.compute_running || app.reading) continue;
          const int k = app.reads_done;
          if (k >= n_steps || app.computes_done != k) continue;
          // Read k consumes frame k-1; frame -1 is preloaded.
          if (k > 0 && apps[app_index.at(app.coupled)].writes_done < k) continue;
          if (app.co_located || app.volume <= 0) {
            report.timeline.push_back({app.id, k, Stage::Read, now, now});
            app.reads_done += 1;
            start_compute(app, k);
          } else {
            app.reading = true;
            app.read_start = now;
            const double per_node = app.volume / static_cast<double>(app.nodes.size());
            for (std::size_t i = 0; i < app.nodes.size(); ++i) {
              FlowState fs;
              fs.flow.src_nodes = {app.src_nodes[i % app.src_nodes.size()]};
              fs.flow.dst_nodes = {app.nodes[i]};
              fs.flow.bytes = per_node;
              fs.flow.analysis = app.id;
              fs.flow.iter = k;
              fs.app_index = app_index.at(app.id);
              flows.push_back(std::move(fs));
              app.open_flows += 1;
            }
          }
          changed = true;
        }
      }
    }
  };

  while (true) {
    progress();

    const double time_eps = 1e-12 * std::max(1.0, now);
    double t_next = std::numeric_limits<double>::infinity();
    for (const auto& app : apps) {
      if (app.compute_running) t_next = std::min(t_next, app.compute_end);
    }
    std::vector<double> rates;
    if (!flows.empty()) {
      std::vector<Flow> bare;
      bare.reserve(flows.size());
      for (const auto& fs : flows) bare.push_back(fs.flow);
      rates = bandwidth_share(bare, platform);
      double total = 0.0;
      for (double r : rates) total += r;
      report.bandwidth_trace.emplace_back(now, total);
      for (std::size_t i = 0; i < flows.size(); ++i) {
        // Drain times are floored at time_eps so the clock always advances;
        // otherwise a residue of a few bytes at a high rate yields a drain
        // time below one ulp of `now` and the loop makes no progress.
        if (rates[i] > 0) {
          t_next = std::min(t_next, now + std::max(flows[i].flow.bytes / rates[i], time_eps));
        }
      }
    }
    if (!std::isfinite(t_next)) break;  // no computes running, no flows: done

    const double dt = std::max(t_next - now, 0.0);
    now = t_next;

    for (std::size_t i = 0; i < flows.size(); ++i) {
      if (rates.empty()) continue;
      flows[i].flow.bytes -= rates[i] * dt;
      if (flows[i].flow.bytes < kByteEps ||
          flows[i].flow.bytes <= rates[i] * time_eps) {
        flows[i].flow.bytes = 0.0;
      }
    }
    for (auto& app : apps) {
      if (app.compute_running && app.compute_end <= now + time_eps) {
        app.compute_running = false;
        app.computes_done += 1;
      }
    }
    // Retire completed flows; a Read finishes when its last flow drains.
    std::vector<FlowState> remaining;
    for (auto& fs : flows) {
      if (fs.flow.bytes <= 0.0) {
        AppState& app = apps[fs.app_index];
        app.open_flows -= 1;
        if (app.open_flows == 0) {
          finish_read(app, now);
          start_compute(app, app.reads_done - 1);
        }
      } else {
        remaining.push_back(std::move(fs));
      }
    }
    const bool had_flows = !flows.empty();
    flows = std::move(remaining);
    // Close the trace segment when the network empties, so the recorded rate
    // steps integrate to the bytes actually transferred.
    if (had_flows && flows.empty()) report.bandwidth_trace.emplace_back(now, 0.0);
  }

  // Sanity: everyone must have completed all iterations.
  for (const auto& app : apps) {
    const int done = app.is_sim ? app.writes_done : app.computes_done;
    if (done < n_steps) {
      throw std::runtime_error("simulate(): deadlock; app '" + app.id + "' finished only " +
                               std::to_string(done) + "/" + std::to_string(n_steps) +
                               " iterations");
    }
  }

  std::stable_sort(report.timeline.begin(), report.timeline.end(),
                   [](const StageEvent& a, const StageEvent& b) {
                     if (a.start != b.start) return a.start < b.start;
                     if (a.app != b.app) return a.app < b.app;
                     if (a.iter != b.iter) return a.iter < b.iter;
                     return static_cast<int>(a.stage) < static_cast<int>(b.stage);
                   });
  for (const auto& ev : report.timeline) report.makespan = std::max(report.makespan, ev.end);
  for (const auto& app : apps) {
    double last = 0.0;
    for (const auto& ev : report.timeline) {
      if (ev.app == app.id) last = std::max(last, ev.end);
    }
    report.mean_period[app.id] = last / n_steps;
  }
  return report;
}

double simulated_vs_modeled(const SimReport& report, double modeled) {
  if (modeled == 0) {
    throw std::invalid_argument("simulated_vs_modeled(): modeled makespan is zero");
  }
  return report.makespan / modeled;
}

std::string trace_csv(const SimReport& report) {
  std::string out = "app,iter,stage,start,end\n";
  char buf[160];
  for (const auto& ev : report.timeline) {
    std::snprintf(buf, sizeof(buf), "%s,%d,%s,%.12g,%.12g\n", ev.app.c_str(), ev.iter,
                  stage_name(ev.stage).c_str(), ev.start, ev.end);
    out += buf;
  }
  std::snprintf(buf, sizeof(buf), "summary,-1,makespan,0,%.12g\n", report.makespan);
  out += buf;
  return out;
}

}  // namespace ensim
