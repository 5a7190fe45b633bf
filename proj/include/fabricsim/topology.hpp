#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

#include "fabricsim/rational.hpp"
#include "fabricsim/rng.hpp"

namespace fabricsim {

enum class TopologyKind { FatTree, LeafSpine, Rrg };

// Largest switch radix we accept when building topologies.
constexpr int kPortCeiling = 512;

// A switch-level fabric. Links are undirected, simple, and all run at the
// same unit rate (1.0 = one line-rate link). Servers attach to their rack
// switch through a dedicated port of the same rate. Server ids are global,
// assigned in switch-id order, so rack_of_server is derivable from
// servers_at and kept in sync by finalize().
struct Topology {
  TopologyKind kind = TopologyKind::Rrg;
  int switch_count = 0;
  std::vector<int> ports_per_switch;
  std::vector<int> servers_at;
  std::vector<std::pair<int, int>> links;  // canonical: a < b, sorted ascending
  std::vector<std::vector<int>> adj;       // sorted neighbor lists
  std::vector<int> rack_of_server;
  std::vector<int> first_server_at;

  int server_count() const { return static_cast<int>(rack_of_server.size()); }
  int link_count() const { return static_cast<int>(links.size()); }
  int degree(int sw) const { return static_cast<int>(adj[sw].size()); }

  int server_begin(int sw) const { return first_server_at[sw]; }
  int server_end(int sw) const { return first_server_at[sw] + servers_at[sw]; }

  // Index into links for the pair {u, v}, or -1.
  int link_index(int u, int v) const {
    auto it = link_ids_.find(link_key(u, v));
    return it == link_ids_.end() ? -1 : it->second;
  }

  bool has_link(int u, int v) const { return link_index(u, v) >= 0; }

  // Builds adjacency, server numbering and the link index. Call after
  // filling switch_count, ports_per_switch, servers_at and links.
  void finalize() {
    std::sort(links.begin(), links.end());
    adj.assign(switch_count, {});
    link_ids_.clear();
    link_ids_.reserve(links.size() * 2);
    for (size_t i = 0; i < links.size(); ++i) {
      auto [a, b] = links[i];
      if (a == b || a < 0 || b >= switch_count)
        throw std::runtime_error("Topology: bad link endpoints");
      if (a > b) std::swap(a, b);
      links[i] = {a, b};
      if (!link_ids_.emplace(link_key(a, b), static_cast<int>(i)).second)
        throw std::runtime_error("Topology: parallel link");
      adj[a].push_back(b);
      adj[b].push_back(a);
    }
    for (auto& nbrs : adj) std::sort(nbrs.begin(), nbrs.end());
    first_server_at.assign(switch_count, 0);
    rack_of_server.clear();
    int next = 0;
    for (int sw = 0; sw < switch_count; ++sw) {
      first_server_at[sw] = next;
      for (int i = 0; i < servers_at[sw]; ++i) rack_of_server.push_back(sw);
      next += servers_at[sw];
    }
  }

  // Checks the structural invariants; throws on the first violation.
  void check_valid() const {
    for (int sw = 0; sw < switch_count; ++sw) {
      if (servers_at[sw] < 0) throw std::runtime_error("Topology: negative server count");
      if (servers_at[sw] + degree(sw) > ports_per_switch[sw])
        throw std::runtime_error("Topology: port budget exceeded at switch " +
                                 std::to_string(sw));
    }
    if (!linked_switches_connected())
      throw std::runtime_error("Topology: switch graph is disconnected");
  }

  // Connectivity of the subgraph induced by switches with at least one
  // network link.
  bool linked_switches_connected() const {
    int start = -1, linked = 0;
    for (int sw = 0; sw < switch_count; ++sw)
      if (degree(sw) > 0) {
        if (start < 0) start = sw;
        ++linked;
      }
    if (linked <= 1) return true;
    std::vector<char> seen(switch_count, 0);
    std::queue<int> q;
    q.push(start);
    seen[start] = 1;
    int reached = 1;
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int v : adj[u])
        if (!seen[v]) {
          seen[v] = 1;
          ++reached;
          q.push(v);
        }
    }
    return reached == linked;
  }

  long long total_ports() const {
    long long s = 0;
    for (int p : ports_per_switch) s += p;
    return s;
  }

 private:
  static uint64_t link_key(int u, int v) {
    if (u > v) std::swap(u, v);
    return (static_cast<uint64_t>(u) << 32) | static_cast<uint32_t>(v);
  }
  std::unordered_map<uint64_t, int> link_ids_;
};

// ---------------------------------------------------------------------------
// Builders

/// Standard 3-tier fat tree with k ports per core/aggregation switch and
/// oversubscription applied at the ToR by enlarging its server side:
/// every ToR keeps its k/2 uplinks and hosts oversub*(k/2) servers.
inline Topology build_fat_tree(int k, int oversub) {
  if (k < 4 || k % 2 != 0) throw std::invalid_argument("build_fat_tree: k must be even, >= 4");
  if (oversub != 1 && oversub != 2 && oversub != 4)
    throw std::invalid_argument("build_fat_tree: oversub must be 1, 2 or 4");
  if (k > kPortCeiling) throw std::invalid_argument("build_fat_tree: k exceeds port ceiling");

  const int half = k / 2;
  const int n_core = half * half;
  const int n_agg = k * half;
  const int n_tor = k * half;
  Topology t;
  t.kind = TopologyKind::FatTree;
  t.switch_count = n_core + n_agg + n_tor;
  t.ports_per_switch.assign(t.switch_count, k);
  t.servers_at.assign(t.switch_count, 0);
  const int agg0 = n_core;
  const int tor0 = n_core + n_agg;
  for (int pod = 0; pod < k; ++pod) {
    for (int j = 0; j < half; ++j) {
      int agg = agg0 + pod * half + j;
      for (int i = 0; i < half; ++i) {
        t.links.push_back({tor0 + pod * half + i, agg});  // intra-pod mesh
        t.links.push_back({j * half + i, agg});           // core group j
      }
    }
  }
  for (int r = 0; r < n_tor; ++r) {
    t.servers_at[tor0 + r] = oversub * half;
    t.ports_per_switch[tor0 + r] = half + oversub * half;
  }
  t.finalize();
  t.check_valid();
  return t;
}

/// Two-tier leaf-spine: y spines, x+y leaves, full bipartite wiring,
/// x servers per leaf. Every switch has x+y ports.
inline Topology build_leaf_spine(int x, int y) {
  if (x < 1 || y < 1) throw std::invalid_argument("build_leaf_spine: x, y must be >= 1");
  if (x + y > kPortCeiling)
    throw std::invalid_argument("build_leaf_spine: x+y exceeds port ceiling");
  Topology t;
  t.kind = TopologyKind::LeafSpine;
  t.switch_count = y + (x + y);
  t.ports_per_switch.assign(t.switch_count, x + y);
  t.servers_at.assign(t.switch_count, 0);
  for (int leaf = 0; leaf < x + y; ++leaf) {
    t.servers_at[y + leaf] = x;
    for (int spine = 0; spine < y; ++spine) t.links.push_back({spine, y + leaf});
  }
  t.finalize();
  t.check_valid();
  return t;
}

// ---------------------------------------------------------------------------
// Random simple connected graphs for a prescribed degree sequence.
// Random stub matching, then seeded edge swaps to remove self-loops and
// parallel edges, then seeded cross-component swaps until connected.

namespace detail {

class EdgeSwapGraph {
 public:
  bool has(int u, int v) const { return set_.count(key(u, v)) > 0; }
  size_t count(int u, int v) const { return set_.count(key(u, v)); }
  void insert(int u, int v) { set_.insert(key(u, v)); }
  // Erases one instance only (multiset erase-by-key would drop them all).
  void erase(int u, int v) {
    auto it = set_.find(key(u, v));
    if (it != set_.end()) set_.erase(it);
  }

 private:
  static uint64_t key(int u, int v) {
    if (u > v) std::swap(u, v);
    return (static_cast<uint64_t>(u) << 32) | static_cast<uint32_t>(v);
  }
  std::unordered_multiset<uint64_t> set_;
};

inline std::vector<int> component_labels(int n, const std::vector<std::pair<int, int>>& edges,
                                         int* n_components) {
  std::vector<std::vector<int>> adj(n);
  for (auto [u, v] : edges) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  std::vector<int> comp(n, -1);
  int c = 0;
  for (int s = 0; s < n; ++s) {
    if (comp[s] >= 0) continue;
    comp[s] = c;
    std::queue<int> q;
    q.push(s);
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int v : adj[u])
        if (comp[v] < 0) {
          comp[v] = c;
          q.push(v);
        }
    }
    ++c;
  }
  *n_components = c;
  return comp;
}

// One attempt: pair stubs at random, then repair. Returns false if the
// repair loop stalls (caller reshuffles and retries).
inline bool try_stub_matching(const std::vector<int>& degree, Rng& rng,
                              std::vector<std::pair<int, int>>& out) {
  const int n = static_cast<int>(degree.size());
  std::vector<int> stubs;
  for (int v = 0; v < n; ++v) stubs.insert(stubs.end(), degree[v], v);
  rng.shuffle(stubs);

  std::vector<std::pair<int, int>> edges;
  edges.reserve(stubs.size() / 2);
  for (size_t i = 0; i + 1 < stubs.size(); i += 2) edges.push_back({stubs[i], stubs[i + 1]});

  EdgeSwapGraph g;
  for (auto [u, v] : edges) g.insert(u, v);

  auto is_bad = [&](size_t i) {
    auto [u, v] = edges[i];
    // Every member of a duplicated pair counts as swappable.
    return u == v || g.count(u, v) > 1;
  };

  const int max_rounds = 200 + static_cast<int>(edges.size()) * 20;
  for (int round = 0; round < max_rounds; ++round) {
    std::vector<size_t> bad;
    for (size_t i = 0; i < edges.size(); ++i)
      if (is_bad(i)) bad.push_back(i);
    if (bad.empty()) {
      out = edges;
      return true;
    }
    bool progressed = false;
    for (size_t i : bad) {
      if (!is_bad(i)) continue;  // may have been fixed by an earlier swap
      for (int attempt = 0; attempt < 50; ++attempt) {
        size_t j = rng.below(edges.size());
        if (j == i) continue;
        auto [u, v] = edges[i];
        auto [x, y] = edges[j];
        if (rng.below(2) == 0) std::swap(x, y);
        // propose (u,x), (v,y)
        if (u == x || v == y) continue;
        if (std::minmax(u, x) == std::minmax(v, y)) continue;  // identical pair twice
        g.erase(u, v);
        g.erase(edges[j].first, edges[j].second);
        if (!g.has(u, x) && !g.has(v, y)) {
          g.insert(u, x);
          g.insert(v, y);
          edges[i] = {u, x};
          edges[j] = {v, y};
          progressed = true;
          break;
        }
        g.insert(u, v);
        g.insert(edges[j].first, edges[j].second);
      }
    }
    if (!progressed) return false;
  }
  return false;
}

}  // namespace detail

/// Uniform-ish random simple connected graph realizing `degree`, seeded and
/// deterministic. Throws if the sequence is unrealizable.
inline std::vector<std::pair<int, int>> random_simple_connected_graph(
    const std::vector<int>& degree, uint64_t seed) {
  const int n = static_cast<int>(degree.size());
  long long total = 0;
  for (int v = 0; v < n; ++v) {
    if (degree[v] < 0 || degree[v] >= n)
      throw std::runtime_error("random graph: degree out of range");
    if (n > 1 && degree[v] == 0)
      throw std::runtime_error("random graph: isolated switch cannot be connected");
    total += degree[v];
  }
  if (total % 2 != 0) throw std::runtime_error("random graph: odd degree sum");
  if (n > 1 && total / 2 < n - 1)
    throw std::runtime_error("random graph: too few links to connect");
  if (n <= 1) return {};

  Rng rng(seed);
  std::vector<std::pair<int, int>> edges;
  bool ok = false;
  for (int restart = 0; restart < 60 && !ok; ++restart)
    ok = detail::try_stub_matching(degree, rng, edges);
  if (!ok) throw std::runtime_error("random graph: degree sequence repair failed");

  // Merge components with degree-preserving cross-component swaps.
  for (int guard = 0; guard < 10000; ++guard) {
    int ncomp = 0;
    auto comp = detail::component_labels(n, edges, &ncomp);
    if (ncomp == 1) break;
    std::vector<size_t> in_a, in_b;
    // Pick the component of vertex with smallest label vs the rest.
    for (size_t i = 0; i < edges.size(); ++i)
      (comp[edges[i].first] == 0 ? in_a : in_b).push_back(i);
    if (in_a.empty() || in_b.empty())
      throw std::runtime_error("random graph: component without edges");
    size_t i = in_a[rng.below(in_a.size())];
    size_t j = in_b[rng.below(in_b.size())];
    auto [u, v] = edges[i];
    auto [x, y] = edges[j];
    // Endpoints live in different components, so the rewired pairs are
    // always new simple edges.
    edges[i] = {u, x};
    edges[j] = {v, y};
  }

  for (auto& e : edges)
    if (e.first > e.second) std::swap(e.first, e.second);
  std::sort(edges.begin(), edges.end());
  return edges;
}

/// Random regular graph on n switches (no servers), for expansion studies.
inline Topology random_regular_graph(int n, int d, uint64_t seed) {
  Topology t;
  t.kind = TopologyKind::Rrg;
  t.switch_count = n;
  t.ports_per_switch.assign(n, d);
  t.servers_at.assign(n, 0);
  t.links = random_simple_connected_graph(std::vector<int>(n, d), seed);
  t.finalize();
  t.check_valid();
  return t;
}

// ---------------------------------------------------------------------------
// Rewiring

/// Equipment-preserving rewiring: pools the base topology's switch ports and
/// servers, spreads both evenly over all switches (counts differ by at most
/// one), and wires the leftover ports into a random simple connected graph.
/// The extra network port from uneven division goes to switches holding
/// fewer servers, which keeps per-switch port totals as even as possible.
inline Topology rewire_to_rrg(const Topology& base, uint64_t seed) {
  if (base.kind == TopologyKind::Rrg)
    throw std::invalid_argument("rewire_to_rrg: base must be a fat tree or leaf-spine");
  const int n = base.switch_count;
  const long long total_ports = base.total_ports();
  const long long total_servers = base.server_count();
  if (total_servers <= 0) throw std::invalid_argument("rewire_to_rrg: base hosts no servers");
  const long long stubs = total_ports - total_servers;

  Rng rng(seed);
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  rng.shuffle(order);

  std::vector<int> servers(n, static_cast<int>(total_servers / n));
  int extra_servers = static_cast<int>(total_servers % n);
  for (int i = 0; i < extra_servers; ++i) servers[order[i]] += 1;

  // Hand the +1 network ports to the switches with fewer servers first;
  // ties follow the shuffled order.
  std::vector<int> by_load = order;
  std::stable_sort(by_load.begin(), by_load.end(),
                   [&](int a, int b) { return servers[a] < servers[b]; });
  std::vector<int> deg(n, static_cast<int>(stubs / n));
  int extra_deg = static_cast<int>(stubs % n);
  for (int i = 0; i < extra_deg; ++i) deg[by_load[i]] += 1;

  Topology t;
  t.kind = TopologyKind::Rrg;
  t.switch_count = n;
  t.servers_at = servers;
  t.ports_per_switch.resize(n);
  for (int i = 0; i < n; ++i) t.ports_per_switch[i] = servers[i] + deg[i];
  t.links = random_simple_connected_graph(deg, rng.next());
  t.finalize();
  t.check_valid();
  return t;
}

// ---------------------------------------------------------------------------
// Topology specs

struct FatTreeSpec {
  int k = 4;
  int oversub = 1;
};
struct LeafSpineSpec {
  int x = 1;
  int y = 1;
};
using BaseSpec = std::variant<FatTreeSpec, LeafSpineSpec>;
struct RrgSpec {
  BaseSpec base;
  uint64_t seed = 1;
};
using TopologySpec = std::variant<FatTreeSpec, LeafSpineSpec, RrgSpec>;

inline Topology build_topology(const BaseSpec& spec) {
  if (std::holds_alternative<FatTreeSpec>(spec)) {
    auto s = std::get<FatTreeSpec>(spec);
    return build_fat_tree(s.k, s.oversub);
  }
  auto s = std::get<LeafSpineSpec>(spec);
  return build_leaf_spine(s.x, s.y);
}

inline Topology build_topology(const TopologySpec& spec) {
  if (std::holds_alternative<RrgSpec>(spec)) {
    const auto& r = std::get<RrgSpec>(spec);
    return rewire_to_rrg(build_topology(r.base), r.seed);
  }
  if (std::holds_alternative<FatTreeSpec>(spec))
    return build_topology(BaseSpec(std::get<FatTreeSpec>(spec)));
  return build_topology(BaseSpec(std::get<LeafSpineSpec>(spec)));
}

inline std::string spec_name(const TopologySpec& spec) {
  if (std::holds_alternative<FatTreeSpec>(spec)) {
    auto s = std::get<FatTreeSpec>(spec);
    return "fat_tree(k=" + std::to_string(s.k) + ",oversub=" + std::to_string(s.oversub) + ")";
  }
  if (std::holds_alternative<LeafSpineSpec>(spec)) {
    auto s = std::get<LeafSpineSpec>(spec);
    return "leaf_spine(x=" + std::to_string(s.x) + ",y=" + std::to_string(s.y) + ")";
  }
  const auto& r = std::get<RrgSpec>(spec);
  TopologySpec base = std::holds_alternative<FatTreeSpec>(r.base)
                          ? TopologySpec(std::get<FatTreeSpec>(r.base))
                          : TopologySpec(std::get<LeafSpineSpec>(r.base));
  return "rrg(" + spec_name(base) + ",seed=" + std::to_string(r.seed) + ")";
}

// ---------------------------------------------------------------------------
// NSR / UDF

struct NsrStats {
  Rational min{0, 1};  // min over server-hosting switches of degree/servers
  double mean = 0.0;
  int argmin_switch = -1;
};

/// Network-to-server port ratio. Minimum across racks, with the mean as a
/// secondary statistic.
inline NsrStats nsr(const Topology& t) {
  NsrStats st;
  bool first = true;
  double sum = 0.0;
  int count = 0;
  for (int sw = 0; sw < t.switch_count; ++sw) {
    if (t.servers_at[sw] == 0) continue;
    Rational r(t.degree(sw), t.servers_at[sw]);
    sum += r.value();
    ++count;
    if (first || r < st.min) {
      st.min = r;
      st.argmin_switch = sw;
      first = false;
    }
  }
  if (count == 0) throw std::invalid_argument("nsr: no switch hosts servers");
  st.mean = sum / count;
  return st;
}

/// Uplink-to-downlink factor with ideal (non-rounded) port arithmetic:
/// NSR of the equipment-equivalent random graph over NSR of the base.
/// Exactly 4 for fat trees and 2 for leaf-spines.
inline Rational udf(const TopologySpec& spec) {
  if (std::holds_alternative<RrgSpec>(spec)) return Rational::whole(1);
  Topology t = build_topology(spec);
  Rational nsr_base = nsr(t).min;
  long long ports = t.total_ports();
  long long servers = t.server_count();
  Rational nsr_rrg_ideal(ports - servers, servers);
  return nsr_rrg_ideal / nsr_base;
}

/// Empirical variant: builds the actual rewired graph and uses its rounded
/// per-rack minimum.
inline Rational udf_empirical(const BaseSpec& spec, uint64_t seed) {
  Topology t = build_topology(spec);
  Topology r = rewire_to_rrg(t, seed);
  return nsr(r).min / nsr(t).min;
}

// ---------------------------------------------------------------------------
// Text export/import. Fixed layout, canonical ordering, byte-stable.

inline std::string export_topology(const Topology& t) {
  std::ostringstream out;
  out << "switches=" << t.switch_count << "\n";
  for (int sw = 0; sw < t.switch_count; ++sw)
    out << sw << " ports=" << t.ports_per_switch[sw] << " servers=" << t.servers_at[sw] << "\n";
  for (auto [a, b] : t.links) out << a << " " << b << "\n";
  return out.str();
}

inline Topology import_topology(const std::string& text,
                                TopologyKind kind = TopologyKind::Rrg) {
  std::istringstream in(text);
  std::string line;
  // '#' comment lines (e.g. the experiment runner's config echo) are skipped.
  auto next_line = [&]() {
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      return true;
    }
    return false;
  };
  if (!next_line() || line.rfind("switches=", 0) != 0)
    throw std::runtime_error("import_topology: missing switches= header");
  Topology t;
  t.kind = kind;
  t.switch_count = std::stoi(line.substr(9));
  if (t.switch_count <= 0) throw std::runtime_error("import_topology: bad switch count");
  t.ports_per_switch.assign(t.switch_count, 0);
  t.servers_at.assign(t.switch_count, 0);
  for (int i = 0; i < t.switch_count; ++i) {
    if (!next_line()) throw std::runtime_error("import_topology: truncated file");
    int id = -1, ports = -1, servers = -1;
    if (sscanf(line.c_str(), "%d ports=%d servers=%d", &id, &ports, &servers) != 3 || id != i)
      throw std::runtime_error("import_topology: malformed switch line: " + line);
    t.ports_per_switch[i] = ports;
    t.servers_at[i] = servers;
  }
  while (next_line()) {
    int a = -1, b = -1;
    if (sscanf(line.c_str(), "%d %d", &a, &b) != 2)
      throw std::runtime_error("import_topology: malformed edge line: " + line);
    t.links.push_back({a, b});
  }
  t.finalize();
  t.check_valid();
  return t;
}

}  // namespace fabricsim
