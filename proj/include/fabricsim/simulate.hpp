#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fabricsim/routing.hpp"
#include "fabricsim/rng.hpp"
#include "fabricsim/topology.hpp"
#include "fabricsim/traffic.hpp"

namespace fabricsim {

// Rate 1.0 corresponds to one 1 Gbps link.
constexpr double kBytesPerSecondPerUnitRate = 1e9 / 8.0;
constexpr double kCapacityEpsilon = 1e-9;

struct FlowRoute {
  int flow_id = -1;
  int src_server = -1;
  int dst_server = -1;
  Path path;  // switch-level; server access links are implicit
};

struct Allocation {
  std::vector<double> rate;  // indexed like the routes vector
};

// ---------------------------------------------------------------------------
// Path assignment

namespace detail {

// Directed link ids: 2*li + dir for switch links, then 2 per server
// (uplink, downlink). Each carries capacity 1.0.
struct LinkSpace {
  const Topology& t;
  int n_switch_dirs;
  int total;

  explicit LinkSpace(const Topology& topo)
      : t(topo),
        n_switch_dirs(2 * topo.link_count()),
        total(2 * topo.link_count() + 2 * topo.server_count()) {}

  int dir(int u, int v) const {
    int li = t.link_index(u, v);
    return 2 * li + (u < v ? 0 : 1);
  }
  int server_up(int s) const { return n_switch_dirs + 2 * s; }
  int server_down(int s) const { return n_switch_dirs + 2 * s + 1; }

  // Full directed footprint of a route, including the access links.
  std::vector<int> footprint(const FlowRoute& r) const {
    std::vector<int> ids;
    ids.reserve(r.path.hops.size() + 1);
    ids.push_back(server_up(r.src_server));
    for (size_t i = 0; i + 1 < r.path.hops.size(); ++i)
      ids.push_back(dir(r.path.hops[i], r.path.hops[i + 1]));
    ids.push_back(server_down(r.dst_server));
    return ids;
  }
};

}  // namespace detail

/// Binds each flow to one path. Ecmp walks the shortest-path DAG choosing the
/// next hop with an ideal per-switch hash of (seed, switch, flow id);
/// KShortest/KDisjoint pick uniformly among the pair's K paths, hashed by
/// flow id. Per-rack-pair path sets are computed once and shared.
inline std::vector<FlowRoute> assign_paths(const Topology& t, const TrafficPattern& p,
                                           const Scheme& scheme, uint64_t seed) {
  std::vector<FlowRoute> routes;
  routes.reserve(p.flows.size());

  NextHopTable nht;
  if (scheme.type == RouteScheme::Ecmp) nht = compute_next_hops(t);
  std::map<std::pair<int, int>, PathSet> cache;

  for (size_t fid = 0; fid < p.flows.size(); ++fid) {
    const Flow& f = p.flows[fid];
    int src_sw = t.rack_of_server[f.src];
    int dst_sw = t.rack_of_server[f.dst];
    FlowRoute r;
    r.flow_id = static_cast<int>(fid);
    r.src_server = f.src;
    r.dst_server = f.dst;
    if (src_sw == dst_sw) {
      r.path.hops = {src_sw};
      routes.push_back(std::move(r));
      continue;
    }
    if (scheme.type == RouteScheme::Ecmp) {
      if (nht.dist[dst_sw][src_sw] < 0)
        throw std::invalid_argument("assign_paths: unreachable rack pair");
      std::vector<int> hops{src_sw};
      int u = src_sw;
      while (u != dst_sw) {
        const auto& options = nht.nh[dst_sw][u];
        int pick = static_cast<int>(hash_mix(seed, static_cast<uint64_t>(u), fid) %
                                    options.size());
        u = options[pick];
        hops.push_back(u);
      }
      r.path.hops = std::move(hops);
    } else {
      auto key = std::make_pair(src_sw, dst_sw);
      auto it = cache.find(key);
      if (it == cache.end()) {
        PathSet ps = scheme.type == RouteScheme::KShortest
                         ? k_shortest_paths(t, src_sw, dst_sw, scheme.k)
                         : k_disjoint_paths(t, src_sw, dst_sw, scheme.k);
        it = cache.emplace(key, std::move(ps)).first;
      }
      const PathSet& ps = it->second;
      if (ps.paths.empty()) throw std::invalid_argument("assign_paths: unreachable rack pair");
      int pick = static_cast<int>(hash_mix(seed, 0x9d5f, fid) % ps.paths.size());
      r.path = ps.paths[pick];
    }
    routes.push_back(std::move(r));
  }
  return routes;
}

// ---------------------------------------------------------------------------
// Max-min fair allocation: progressive filling over every directed link,
// including the server access links.

namespace detail {

// Water-filling restricted to the subset `active` (indices into routes);
// rates returned aligned with `routes`.
inline void waterfill(const LinkSpace& ls, const std::vector<std::vector<int>>& footprints,
                      const std::vector<int>& active, std::vector<double>& rate) {
  const int L = ls.total;
  std::vector<double> frozen_load(L, 0.0);
  std::vector<int> unfrozen(L, 0);
  std::vector<int> used;  // links crossed by at least one active flow
  for (int f : active)
    for (int l : footprints[f]) {
      if (unfrozen[l] == 0) used.push_back(l);
      unfrozen[l] += 1;
    }

  std::vector<char> done(footprints.size(), 0);
  std::vector<char> saturated(L, 0);
  size_t remaining = active.size();
  while (remaining > 0) {
    double level = std::numeric_limits<double>::infinity();
    for (int l : used) {
      if (unfrozen[l] == 0) continue;
      double cap = (1.0 - frozen_load[l]) / unfrozen[l];
      if (cap < level) level = cap;
    }
    if (!std::isfinite(level)) break;  // no constrained flow left (cannot happen)
    if (level < 0) level = 0;
    // Freeze every flow that crosses a link saturating at this level.
    for (int l : used)
      saturated[l] = unfrozen[l] > 0 && (1.0 - frozen_load[l]) / unfrozen[l] <= level + 1e-12;
    for (int f : active) {
      if (done[f]) continue;
      bool freeze = false;
      for (int l : footprints[f])
        if (saturated[l]) {
          freeze = true;
          break;
        }
      if (!freeze) continue;
      done[f] = 1;
      --remaining;
      rate[f] = level;
      for (int l : footprints[f]) {
        frozen_load[l] += level;
        unfrozen[l] -= 1;
      }
    }
  }
}

}  // namespace detail

/// The unique max-min fair allocation for the given fixed single-path routes.
inline Allocation maxmin_allocate(const Topology& t, const std::vector<FlowRoute>& routes) {
  detail::LinkSpace ls(t);
  std::vector<std::vector<int>> footprints(routes.size());
  std::vector<int> active(routes.size());
  for (size_t i = 0; i < routes.size(); ++i) {
    footprints[i] = ls.footprint(routes[i]);
    active[i] = static_cast<int>(i);
  }
  Allocation a;
  a.rate.assign(routes.size(), 0.0);
  detail::waterfill(ls, footprints, active, a.rate);
  return a;
}

/// Jain's fairness index (Sum x)^2 / (n * Sum x^2), in (0, 1].
inline double jain_index(const Allocation& a) {
  if (a.rate.empty()) throw std::invalid_argument("jain_index: no flows");
  double sum = 0, sq = 0;
  for (double x : a.rate) {
    sum += x;
    sq += x * x;
  }
  if (sq == 0) throw std::invalid_argument("jain_index: all-zero allocation");
  return sum * sum / (a.rate.size() * sq);
}

// ---------------------------------------------------------------------------
// Fluid flow-completion-time simulation

struct FctResult {
  std::vector<double> completion;  // seconds, indexed like the pattern
  double p50 = 0, p90 = 0, p99 = 0;
};

// Optional piecewise-constant rate trace for conservation checks.
struct FctTrace {
  struct Interval {
    double t0, t1;
    std::vector<std::pair<int, double>> rates;  // (flow, rate) for active flows
  };
  std::vector<Interval> intervals;
};

inline double percentile(std::vector<double> v, double q) {
  if (v.empty()) throw std::invalid_argument("percentile: empty");
  std::sort(v.begin(), v.end());
  size_t idx = static_cast<size_t>(std::ceil(q * v.size()));
  if (idx > 0) --idx;
  if (idx >= v.size()) idx = v.size() - 1;
  return v[idx];
}

/// Event-driven fluid simulation: the max-min allocation is recomputed at
/// every arrival and completion, and rates stay constant in between.
inline FctResult fct_simulate(const Topology& t, const std::vector<FlowRoute>& routes,
                              const TrafficPattern& p, FctTrace* trace = nullptr) {
  if (routes.size() != p.flows.size())
    throw std::invalid_argument("fct_simulate: routes do not match pattern");
  if (p.flows.empty()) throw std::invalid_argument("fct_simulate: empty pattern");
  for (const Flow& f : p.flows)
    if (f.unbounded())
      throw std::invalid_argument("fct_simulate: unbounded flow has no completion time");

  const size_t n = p.flows.size();
  detail::LinkSpace ls(t);
  std::vector<std::vector<int>> footprints(n);
  for (size_t i = 0; i < n; ++i) footprints[i] = ls.footprint(routes[i]);

  std::vector<double> remaining(n);
  for (size_t i = 0; i < n; ++i) remaining[i] = p.flows[i].size_bytes;

  // Arrival order by (start, flow id).
  std::vector<int> by_start(n);
  for (size_t i = 0; i < n; ++i) by_start[i] = static_cast<int>(i);
  std::sort(by_start.begin(), by_start.end(), [&](int a, int b) {
    return std::make_pair(p.flows[a].start, a) < std::make_pair(p.flows[b].start, b);
  });

  FctResult res;
  res.completion.assign(n, 0.0);
  std::vector<int> active;
  std::vector<double> rate(n, 0.0);
  size_t next_arrival = 0;
  double now = 0.0;
  if (!by_start.empty()) now = p.flows[by_start[0]].start;

  size_t finished = 0;
  while (finished < n) {
    while (next_arrival < n && p.flows[by_start[next_arrival]].start <= now + 1e-15)
      active.push_back(by_start[next_arrival++]);

    std::fill(rate.begin(), rate.end(), 0.0);
    detail::waterfill(ls, footprints, active, rate);

    double t_complete = std::numeric_limits<double>::infinity();
    for (int f : active) {
      if (rate[f] <= 0) continue;  // max-min over unit links always gives > 0
      double dt = remaining[f] / (rate[f] * kBytesPerSecondPerUnitRate);
      t_complete = std::min(t_complete, now + dt);
    }
    double t_arrive = next_arrival < n ? p.flows[by_start[next_arrival]].start
                                       : std::numeric_limits<double>::infinity();
    double t_next = std::min(t_complete, t_arrive);
    if (!std::isfinite(t_next))
      throw std::logic_error("fct_simulate: stalled (flow with zero rate)");

    if (trace && t_next > now) {
      FctTrace::Interval iv;
      iv.t0 = now;
      iv.t1 = t_next;
      for (int f : active) iv.rates.push_back({f, rate[f]});
      trace->intervals.push_back(std::move(iv));
    }

    double dt = t_next - now;
    std::vector<int> still_active;
    still_active.reserve(active.size());
    for (int f : active) {
      remaining[f] -= rate[f] * kBytesPerSecondPerUnitRate * dt;
      double tol = 1e-9 * (p.flows[f].size_bytes + 1.0);
      if (remaining[f] <= tol) {
        res.completion[f] = t_next - p.flows[f].start;  // elapsed FCT
        ++finished;
      } else {
        still_active.push_back(f);
      }
    }
    active.swap(still_active);
    now = t_next;
  }

  res.p50 = percentile(res.completion, 0.50);
  res.p90 = percentile(res.completion, 0.90);
  res.p99 = percentile(res.completion, 0.99);
  return res;
}

// ---------------------------------------------------------------------------

/// `flow_id rate` per line.
inline std::string dump_allocation(const Allocation& a) {
  std::ostringstream out;
  for (size_t i = 0; i < a.rate.size(); ++i) out << i << " " << fmt_double(a.rate[i]) << "\n";
  return out.str();
}

/// `flow_id completion_seconds` per line plus a percentile footer.
inline std::string dump_fct(const FctResult& r) {
  std::ostringstream out;
  for (size_t i = 0; i < r.completion.size(); ++i)
    out << i << " " << fmt_double(r.completion[i]) << "\n";
  out << "p50,p90,p99 " << fmt_double(r.p50) << " " << fmt_double(r.p90) << " "
      << fmt_double(r.p99) << "\n";
  return out.str();
}

inline double mean_rate(const Allocation& a) {
  if (a.rate.empty()) return 0.0;
  double s = 0;
  for (double r : a.rate) s += r;
  return s / a.rate.size();
}

inline double median_rate(const Allocation& a) {
  if (a.rate.empty()) return 0.0;
  return percentile(a.rate, 0.50);
}

}  // namespace fabricsim
