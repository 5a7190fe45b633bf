#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fabricsim/topology.hpp"

namespace fabricsim {

enum class RouteScheme { Ecmp, KShortest, KDisjoint };

struct Scheme {
  RouteScheme type = RouteScheme::Ecmp;
  int k = 1;  // path count for KShortest / KDisjoint

  static Scheme ecmp() { return {RouteScheme::Ecmp, 1}; }
  static Scheme kshortest(int k) { return {RouteScheme::KShortest, k}; }
  static Scheme kdisjoint(int k) { return {RouteScheme::KDisjoint, k}; }

  std::string name() const {
    switch (type) {
      case RouteScheme::Ecmp:
        return "ecmp";
      case RouteScheme::KShortest:
        return "kshortest" + std::to_string(k);
      case RouteScheme::KDisjoint:
        return "kdisjoint" + std::to_string(k);
    }
    return "?";
  }
};

// A switch-level route. Hops run from the source switch to the destination
// switch; consecutive hops are linked and no switch repeats.
struct Path {
  std::vector<int> hops;
  int length() const { return static_cast<int>(hops.size()) - 1; }
  bool operator==(const Path& o) const { return hops == o.hops; }
  bool operator<(const Path& o) const {
    if (length() != o.length()) return length() < o.length();
    return hops < o.hops;
  }
};

struct PathSet {
  int src = -1;
  int dst = -1;
  Scheme scheme;
  std::vector<Path> paths;
  // Exact number of shortest paths (shortest_paths only; may exceed
  // paths.size() when the enumeration cap truncates).
  uint64_t shortest_path_count = 0;
};

// Per-destination ECMP state: next hops on shortest paths, plus distances.
struct NextHopTable {
  // nh[dst][u]: next hops of u toward dst, ascending; empty when u == dst.
  std::vector<std::vector<std::vector<int>>> nh;
  // dist[dst][u]: hop distance, -1 if unreachable.
  std::vector<std::vector<int>> dist;
};

inline std::vector<int> bfs_distances(const Topology& t, int from) {
  std::vector<int> dist(t.switch_count, -1);
  std::queue<int> q;
  dist[from] = 0;
  q.push(from);
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (int v : t.adj[u])
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        q.push(v);
      }
  }
  return dist;
}

/// All-shortest-path DAG for every destination. Requires the linked switch
/// graph to be connected.
inline NextHopTable compute_next_hops(const Topology& t) {
  if (!t.linked_switches_connected())
    throw std::invalid_argument("compute_next_hops: topology is disconnected");
  NextHopTable table;
  table.dist.resize(t.switch_count);
  table.nh.resize(t.switch_count);
  for (int dst = 0; dst < t.switch_count; ++dst) {
    table.dist[dst] = bfs_distances(t, dst);
    auto& nh = table.nh[dst];
    nh.assign(t.switch_count, {});
    for (int u = 0; u < t.switch_count; ++u) {
      if (u == dst || table.dist[dst][u] < 0) continue;
      for (int v : t.adj[u])  // adj is sorted, so next hops come out ascending
        if (table.dist[dst][v] == table.dist[dst][u] - 1) nh[u].push_back(v);
    }
  }
  return table;
}

// ---------------------------------------------------------------------------
// Shortest-path enumeration

/// All shortest src->dst paths in lexicographic hop order, capped at `cap`
/// samples; the exact count is reported in shortest_path_count either way.
inline PathSet shortest_paths(const Topology& t, int src, int dst, int cap = 64) {
  if (src == dst) throw std::invalid_argument("shortest_paths: src == dst");
  std::vector<int> dist = bfs_distances(t, dst);
  if (dist[src] < 0) throw std::invalid_argument("shortest_paths: dst unreachable");

  PathSet ps;
  ps.src = src;
  ps.dst = dst;
  ps.scheme = Scheme::ecmp();

  // Exact count by DP over the shortest-path DAG, saturating at uint64 max.
  std::vector<int> order(t.switch_count);
  for (int i = 0; i < t.switch_count; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) { return dist[a] < dist[b]; });
  std::vector<uint64_t> count(t.switch_count, 0);
  count[dst] = 1;
  const uint64_t inf = std::numeric_limits<uint64_t>::max();
  for (int u : order) {
    if (u == dst || dist[u] < 0) continue;
    uint64_t c = 0;
    for (int v : t.adj[u])
      if (dist[v] == dist[u] - 1) {
        c = (c > inf - count[v]) ? inf : c + count[v];
      }
    count[u] = c;
  }
  ps.shortest_path_count = count[src];

  // Lexicographic DFS down the DAG, stopping at the cap.
  std::vector<int> cur{src};
  std::function<bool(int)> walk = [&](int u) -> bool {
    if (u == dst) {
      ps.paths.push_back({cur});
      return static_cast<int>(ps.paths.size()) < cap;
    }
    for (int v : t.adj[u]) {
      if (dist[v] != dist[u] - 1) continue;
      cur.push_back(v);
      bool go_on = walk(v);
      cur.pop_back();
      if (!go_on) return false;
    }
    return true;
  };
  walk(src);
  return ps;
}

// ---------------------------------------------------------------------------
// Yen-style k shortest simple paths (unit weights, lexicographic tie-break)

namespace detail {

// Lexicographically smallest shortest path from src to dst avoiding the given
// switches/links. Returns an empty hop list if unreachable.
inline std::vector<int> masked_shortest_path(const Topology& t, int src, int dst,
                                             const std::vector<char>& node_blocked,
                                             const std::set<std::pair<int, int>>& edge_blocked) {
  auto blocked = [&](int u, int v) {
    return edge_blocked.count(std::minmax(u, v)) > 0;
  };
  std::vector<int> dist(t.switch_count, -1);
  std::queue<int> q;
  if (node_blocked[dst]) return {};
  dist[dst] = 0;
  q.push(dst);
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (int v : t.adj[u]) {
      if (node_blocked[v] || blocked(u, v) || dist[v] >= 0) continue;
      dist[v] = dist[u] + 1;
      q.push(v);
    }
  }
  if (node_blocked[src] || dist[src] < 0) return {};
  std::vector<int> hops{src};
  int u = src;
  while (u != dst) {
    int next = -1;
    for (int v : t.adj[u]) {
      if (node_blocked[v] || blocked(u, v)) continue;
      if (dist[v] == dist[u] - 1) {
        next = v;
        break;  // adj sorted: first match is the lexicographic choice
      }
    }
    if (next < 0) return {};
    hops.push_back(next);
    u = next;
  }
  return hops;
}

}  // namespace detail

/// First K distinct loop-free paths in nondecreasing length; ties broken by
/// lexicographic hop sequence. Returns fewer when fewer simple paths exist.
inline PathSet k_shortest_paths(const Topology& t, int src, int dst, int K) {
  if (K < 1) throw std::invalid_argument("k_shortest_paths: K must be >= 1");
  if (src == dst) throw std::invalid_argument("k_shortest_paths: src == dst");

  PathSet ps;
  ps.src = src;
  ps.dst = dst;
  ps.scheme = Scheme::kshortest(K);

  std::vector<char> no_nodes(t.switch_count, 0);
  std::set<std::pair<int, int>> no_edges;
  std::vector<int> first = detail::masked_shortest_path(t, src, dst, no_nodes, no_edges);
  if (first.empty()) throw std::invalid_argument("k_shortest_paths: dst unreachable");
  ps.paths.push_back({first});

  std::set<Path> candidates;
  std::set<std::vector<int>> known;
  known.insert(first);

  while (static_cast<int>(ps.paths.size()) < K) {
    const Path& prev = ps.paths.back();
    for (int j = 0; j + 1 < static_cast<int>(prev.hops.size()); ++j) {
      int spur = prev.hops[j];
      std::vector<int> root(prev.hops.begin(), prev.hops.begin() + j + 1);

      std::set<std::pair<int, int>> edge_blocked;
      for (const Path& p : ps.paths)
        if (static_cast<int>(p.hops.size()) > j + 1 &&
            std::equal(root.begin(), root.end(), p.hops.begin()))
          edge_blocked.insert(std::minmax(p.hops[j], p.hops[j + 1]));

      std::vector<char> node_blocked(t.switch_count, 0);
      for (int i = 0; i < j; ++i) node_blocked[prev.hops[i]] = 1;

      std::vector<int> spur_path =
          detail::masked_shortest_path(t, spur, dst, node_blocked, edge_blocked);
      if (spur_path.empty()) continue;
      std::vector<int> full = root;
      full.insert(full.end(), spur_path.begin() + 1, spur_path.end());
      if (known.count(full)) continue;
      known.insert(full);
      candidates.insert({full});
    }
    if (candidates.empty()) break;
    ps.paths.push_back(*candidates.begin());
    candidates.erase(candidates.begin());
  }
  return ps;
}

// ---------------------------------------------------------------------------
// K edge-disjoint paths of minimum total length: successive shortest
// augmenting paths on unit capacities, Bellman-Ford over the residual graph
// (reverse arcs carry cost -1, as in Bhandari's construction).

inline PathSet k_disjoint_paths(const Topology& t, int src, int dst, int K) {
  if (K < 1) throw std::invalid_argument("k_disjoint_paths: K must be >= 1");
  if (src == dst) throw std::invalid_argument("k_disjoint_paths: src == dst");
  if (bfs_distances(t, src)[dst] < 0)
    throw std::invalid_argument("k_disjoint_paths: dst unreachable");

  const int n = t.switch_count;
  // flow[li][0]: 1 if unit flows a->b on link li (a < b); flow[li][1]: b->a.
  std::vector<std::array<int, 2>> flow(t.link_count(), {0, 0});
  auto flow_on = [&](int u, int v) -> int& {
    int li = t.link_index(u, v);
    return flow[li][u < v ? 0 : 1];
  };

  const int kInf = std::numeric_limits<int>::max() / 4;
  int value = 0;
  for (int round = 0; round < K; ++round) {
    // Bellman-Ford on the residual graph; deterministic arc order.
    std::vector<int> dist(n, kInf), parent(n, -1);
    dist[src] = 0;
    for (int iter = 0; iter < n; ++iter) {
      bool changed = false;
      for (int u = 0; u < n; ++u) {
        if (dist[u] >= kInf) continue;
        for (int v : t.adj[u]) {
          int cost;
          if (flow_on(u, v) == 0 && flow_on(v, u) == 0)
            cost = 1;  // forward residual
          else if (flow_on(v, u) == 1)
            cost = -1;  // cancel opposite flow
          else
            continue;  // arc saturated
          if (dist[u] + cost < dist[v]) {
            dist[v] = dist[u] + cost;
            parent[v] = u;
            changed = true;
          }
        }
      }
      if (!changed) break;
    }
    if (dist[dst] >= kInf) break;
    for (int v = dst; v != src; v = parent[v]) {
      int u = parent[v];
      if (flow_on(v, u) == 1)
        flow_on(v, u) = 0;
      else
        flow_on(u, v) = 1;
    }
    ++value;
  }

  // Antiparallel flow on one physical link cancels.
  for (auto& f : flow)
    if (f[0] == 1 && f[1] == 1) f = {0, 0};

  PathSet ps;
  ps.src = src;
  ps.dst = dst;
  ps.scheme = Scheme::kdisjoint(K);
  for (int p = 0; p < value; ++p) {
    std::vector<int> hops{src};
    int u = src;
    while (u != dst) {
      int next = -1;
      for (int v : t.adj[u])
        if (flow_on(u, v) == 1) {
          next = v;
          break;
        }
      if (next < 0) throw std::logic_error("k_disjoint_paths: broken flow decomposition");
      flow_on(u, next) = 0;
      hops.push_back(next);
      u = next;
    }
    ps.paths.push_back({hops});
  }
  std::sort(ps.paths.begin(), ps.paths.end());
  return ps;
}

// ---------------------------------------------------------------------------
// Segment-routing expressibility (split into two shortest segments)

struct Expressibility {
  int total = 0;
  int not_expressible = 0;
  double fraction_not_expressible = 0.0;
  // witness[i]: hop that splits path i into two shortest segments, or -1.
  std::vector<int> witness;
};

/// Tests each path for an intermediate hop u such that both the s->u and
/// u->t portions are shortest paths. A path that is itself shortest is
/// expressible through its first hop (or trivially through t).
inline Expressibility expressibility_report(const Topology& t, const PathSet& ps) {
  if (ps.paths.empty()) throw std::invalid_argument("expressibility_report: empty path set");
  std::vector<int> d_src = bfs_distances(t, ps.src);
  std::vector<int> d_dst = bfs_distances(t, ps.dst);

  Expressibility rep;
  rep.total = static_cast<int>(ps.paths.size());
  rep.witness.assign(rep.total, -1);
  for (int i = 0; i < rep.total; ++i) {
    const auto& hops = ps.paths[i].hops;
    const int len = static_cast<int>(hops.size()) - 1;
    for (int j = 1; j <= len; ++j) {
      // prefix s->hops[j] has length j; suffix has length len - j
      if (d_src[hops[j]] == j && d_dst[hops[j]] == len - j) {
        rep.witness[i] = hops[j];
        break;
      }
    }
    if (rep.witness[i] < 0) ++rep.not_expressible;
  }
  rep.fraction_not_expressible = static_cast<double>(rep.not_expressible) / rep.total;
  return rep;
}

// ---------------------------------------------------------------------------

/// One line per path: `src dst scheme len hop0>hop1>...>hopN`.
inline std::string dump_paths(const PathSet& ps) {
  std::ostringstream out;
  for (const Path& p : ps.paths) {
    out << ps.src << " " << ps.dst << " " << ps.scheme.name() << " " << p.length() << " ";
    for (size_t i = 0; i < p.hops.size(); ++i) {
      if (i) out << ">";
      out << p.hops[i];
    }
    out << "\n";
  }
  return out.str();
}

/// True when every path is simple and every consecutive hop pair is linked.
inline bool paths_link_valid(const Topology& t, const PathSet& ps) {
  for (const Path& p : ps.paths) {
    if (p.hops.empty() || p.hops.front() != ps.src || p.hops.back() != ps.dst) return false;
    std::set<int> seen(p.hops.begin(), p.hops.end());
    if (seen.size() != p.hops.size()) return false;
    for (size_t i = 0; i + 1 < p.hops.size(); ++i)
      if (!t.has_link(p.hops[i], p.hops[i + 1])) return false;
  }
  return true;
}

}  // namespace fabricsim
