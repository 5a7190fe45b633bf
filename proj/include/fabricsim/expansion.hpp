#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fabricsim/rng.hpp"
#include "fabricsim/topology.hpp"

namespace fabricsim {

struct Partition {
  std::vector<int> cluster_of;  // switch -> cluster in [0, k)
  int k = 1;
};

inline void check_partition(const Topology& t, const Partition& p) {
  if (static_cast<int>(p.cluster_of.size()) != t.switch_count || p.k < 1)
    throw std::invalid_argument("partition does not match topology");
  std::vector<int> sizes(p.k, 0);
  for (int c : p.cluster_of) {
    if (c < 0 || c >= p.k) throw std::invalid_argument("partition: cluster id out of range");
    sizes[c] += 1;
  }
  auto [mn, mx] = std::minmax_element(sizes.begin(), sizes.end());
  if (*mx - *mn > 1) throw std::invalid_argument("partition: clusters are not balanced");
}

inline long long count_cross_links(const Topology& t, const Partition& p) {
  long long cross = 0;
  for (auto [a, b] : t.links)
    if (p.cluster_of[a] != p.cluster_of[b]) ++cross;
  return cross;
}

/// Fraction of links whose endpoints land in different clusters.
inline double cross_cluster_fraction(const Topology& t, const Partition& p) {
  check_partition(t, p);
  if (t.links.empty()) return 0.0;
  return static_cast<double>(count_cross_links(t, p)) / t.link_count();
}

/// Balanced assignment by seeded shuffle: cluster sizes differ by at most 1.
inline Partition random_balanced_partition(const Topology& t, int k, uint64_t seed) {
  if (k < 1 || k > t.switch_count)
    throw std::invalid_argument("partition: k must be in [1, switch count]");
  Rng rng(seed);
  std::vector<int> order(t.switch_count);
  for (int i = 0; i < t.switch_count; ++i) order[i] = i;
  rng.shuffle(order);
  Partition p;
  p.k = k;
  p.cluster_of.assign(t.switch_count, 0);
  for (int i = 0; i < t.switch_count; ++i) p.cluster_of[order[i]] = i % k;
  return p;
}

namespace detail {

// Kernighan-Lin refinement of one cluster pair: staged swaps with locking,
// then the best positive prefix is applied. Gains count the global
// cross-cluster objective (edges to third clusters cancel under a swap).
// Returns the total cross-link reduction.
inline long long kl_refine_pair(const Topology& t, std::vector<int>& cluster, int ca, int cb) {
  long long total_gain = 0;
  for (int pass = 0; pass < 8; ++pass) {
    std::vector<int> a_members, b_members;
    for (int v = 0; v < t.switch_count; ++v) {
      if (cluster[v] == ca) a_members.push_back(v);
      if (cluster[v] == cb) b_members.push_back(v);
    }
    const int steps = static_cast<int>(std::min(a_members.size(), b_members.size()));
    if (steps == 0) return total_gain;

    // D[v] = external(v, other side) - internal(v, own side), counting only
    // edges inside the pair's induced subgraph.
    std::vector<long long> D(t.switch_count, 0);
    auto side = [&](int v) { return cluster[v] == ca ? 0 : cluster[v] == cb ? 1 : -1; };
    for (int v : a_members)
      for (int u : t.adj[v]) {
        if (side(u) == 1) D[v] += 1;
        if (side(u) == 0) D[v] -= 1;
      }
    for (int v : b_members)
      for (int u : t.adj[v]) {
        if (side(u) == 0) D[v] += 1;
        if (side(u) == 1) D[v] -= 1;
      }

    std::vector<char> locked(t.switch_count, 0);
    std::vector<std::pair<int, int>> swaps;
    std::vector<long long> gains;
    for (int step = 0; step < steps; ++step) {
      long long best = std::numeric_limits<long long>::min();
      int bu = -1, bv = -1;
      for (int u : a_members) {
        if (locked[u]) continue;
        for (int v : b_members) {
          if (locked[v]) continue;
          long long c_uv = t.has_link(u, v) ? 1 : 0;
          long long g = D[u] + D[v] - 2 * c_uv;
          if (g > best) {
            best = g;
            bu = u;
            bv = v;
          }
        }
      }
      if (bu < 0) break;
      locked[bu] = locked[bv] = 1;
      swaps.push_back({bu, bv});
      gains.push_back(best);
      // Standard D update for the tentative swap of (bu, bv).
      for (int w : t.adj[bu]) {
        if (locked[w]) continue;
        if (side(w) == 0) D[w] += 2;
        if (side(w) == 1) D[w] -= 2;
      }
      for (int w : t.adj[bv]) {
        if (locked[w]) continue;
        if (side(w) == 0) D[w] -= 2;
        if (side(w) == 1) D[w] += 2;
      }
    }

    long long cum = 0, best_cum = 0;
    int best_prefix = 0;
    for (size_t i = 0; i < gains.size(); ++i) {
      cum += gains[i];
      if (cum > best_cum) {
        best_cum = cum;
        best_prefix = static_cast<int>(i) + 1;
      }
    }
    if (best_prefix == 0) return total_gain;
    for (int i = 0; i < best_prefix; ++i) {
      auto [u, v] = swaps[i];
      std::swap(cluster[u], cluster[v]);
    }
    total_gain += best_cum;
  }
  return total_gain;
}

}  // namespace detail

/// Balanced k-way partition: seeded random start, then Kernighan-Lin swap
/// refinement over every cluster pair until a full sweep stops improving.
/// Swap-only moves keep the balance exact; the cross count never increases.
inline Partition partition_graph(const Topology& t, int k, uint64_t seed) {
  Partition p = random_balanced_partition(t, k, seed);
  if (k == 1) return p;
  for (int sweep = 0; sweep < 40; ++sweep) {
    long long improved = 0;
    for (int ca = 0; ca < k; ++ca)
      for (int cb = ca + 1; cb < k; ++cb)
        improved += detail::kl_refine_pair(t, p.cluster_of, ca, cb);
    if (improved == 0) break;
  }
  return p;
}

// ---------------------------------------------------------------------------
// Edge expansion

/// h(G) <= d*k*f / (2*(k-1)) for a d-regular graph in k equal clusters with
/// cross-link fraction f. The construction merges k/2 clusters, so k must be
/// even.
inline double theorem1_bound(int d, int k, double f) {
  if (d < 1) throw std::invalid_argument("theorem1_bound: d must be >= 1");
  if (k < 2 || k % 2 != 0)
    throw std::invalid_argument("theorem1_bound: k must be even and >= 2");
  if (f < 0.0 || f > 1.0) throw std::invalid_argument("theorem1_bound: f must be in [0,1]");
  return static_cast<double>(d) * k * f / (2.0 * (k - 1));
}

namespace detail {

inline long long cut_of_set(const Topology& t, const std::vector<char>& in_set) {
  long long cut = 0;
  for (auto [a, b] : t.links)
    if (in_set[a] != in_set[b]) ++cut;
  return cut;
}

}  // namespace detail

/// The Theorem-1 construction evaluated exactly: minimum of cut(S)/|S| over
/// all unions of k/2 clusters (taking the smaller side of each complement
/// pair). Returns the ratio and the witness set.
inline std::pair<double, std::vector<int>> min_merge_cut_expansion(const Topology& t,
                                                                  const Partition& p) {
  check_partition(t, p);
  if (p.k % 2 != 0 || p.k < 2)
    throw std::invalid_argument("min_merge_cut_expansion: k must be even");
  const int k = p.k;
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> witness;
  for (unsigned mask = 0; mask < (1u << k); ++mask) {
    if (__builtin_popcount(mask) != k / 2) continue;
    std::vector<char> in_set(t.switch_count, 0);
    int size = 0;
    for (int v = 0; v < t.switch_count; ++v)
      if ((mask >> p.cluster_of[v]) & 1) {
        in_set[v] = 1;
        ++size;
      }
    if (size > t.switch_count - size) continue;  // keep the smaller side
    if (size == 0) continue;
    double ratio = static_cast<double>(detail::cut_of_set(t, in_set)) / size;
    if (ratio < best) {
      best = ratio;
      witness.clear();
      for (int v = 0; v < t.switch_count; ++v)
        if (in_set[v]) witness.push_back(v);
    }
  }
  return {best, witness};
}

struct ExpansionReport {
  int n = 0;
  int d = 0;  // regular degree (max degree when the graph is irregular)
  int k = 2;  // partition used for the Theorem-1 column
  double f = 0.0;
  double h_upper = 0.0;
  double theorem1 = 0.0;
  std::vector<int> witness;
  bool exact = false;
};

enum class ExpansionMode { Auto, Exact, Sampled };

/// Edge expansion h(G) = min over sets up to half the graph of cut(S)/|S|.
/// Exact (Gray-code enumeration) for n <= 20; otherwise an upper bound from
/// (a) `budget` random subsets, (b) cluster-merge cuts of partitions with
/// k in {2,4,6,8}, and (c) greedy local descent from the best candidate.
/// The witness always certifies the reported value.
inline ExpansionReport estimate_edge_expansion(const Topology& t, long budget, uint64_t seed,
                                               ExpansionMode mode = ExpansionMode::Auto) {
  if (!t.linked_switches_connected() || t.link_count() == 0)
    throw std::invalid_argument("estimate_edge_expansion: need a connected switch graph");
  const int n = t.switch_count;
  if (n < 2) throw std::invalid_argument("estimate_edge_expansion: need at least 2 switches");

  ExpansionReport rep;
  rep.n = n;
  for (int v = 0; v < n; ++v) rep.d = std::max(rep.d, t.degree(v));

  double best = std::numeric_limits<double>::infinity();
  std::vector<char> best_set(n, 0);

  auto consider = [&](const std::vector<char>& in_set, int size, long long cut) {
    if (size < 1 || size > n / 2) return;
    double ratio = static_cast<double>(cut) / size;
    if (ratio < best) {
      best = ratio;
      best_set = in_set;
    }
  };

  bool exact = mode == ExpansionMode::Exact || (mode == ExpansionMode::Auto && n <= 20);
  if (exact && n > 24)
    throw std::invalid_argument("estimate_edge_expansion: exact mode needs n <= 24");

  if (exact) {
    // Gray-code walk: one vertex flips per step, the cut updates in O(deg).
    std::vector<char> in_set(n, 0);
    int size = 0;
    long long cut = 0;
    unsigned prev = 0;
    for (unsigned i = 1; i < (1u << n); ++i) {
      unsigned code = i ^ (i >> 1);
      unsigned flipped = code ^ prev;
      prev = code;
      int v = __builtin_ctz(flipped);
      if (in_set[v]) {
        in_set[v] = 0;
        --size;
      } else {
        in_set[v] = 1;
        ++size;
      }
      for (int u : t.adj[v]) cut += (in_set[u] == in_set[v]) ? -1 : 1;
      consider(in_set, size, cut);
    }
    rep.exact = true;
  } else {
    Rng rng(seed);
    // (a) random subsets of random sizes
    std::vector<int> ids(n);
    for (int i = 0; i < n; ++i) ids[i] = i;
    for (long trial = 0; trial < budget; ++trial) {
      int size = 1 + rng.below_int(n / 2);
      rng.shuffle(ids);
      std::vector<char> in_set(n, 0);
      for (int i = 0; i < size; ++i) in_set[ids[i]] = 1;
      consider(in_set, size, detail::cut_of_set(t, in_set));
    }
    // (b) cluster-merge cuts of refined partitions
    for (int k = 2; k <= 8 && k <= n; k += 2) {
      Partition p = partition_graph(t, k, hash_mix(seed, k));
      auto [ratio, wit] = min_merge_cut_expansion(t, p);
      std::vector<char> in_set(n, 0);
      for (int v : wit) in_set[v] = 1;
      consider(in_set, static_cast<int>(wit.size()), detail::cut_of_set(t, in_set));
    }
    // (c) greedy descent: flip any single vertex that lowers the ratio
    std::vector<char> cur = best_set;
    int size = 0;
    for (char c : cur) size += c;
    long long cut = detail::cut_of_set(t, cur);
    bool moved = true;
    while (moved) {
      moved = false;
      for (int v = 0; v < n && !moved; ++v) {
        int nsize = size + (cur[v] ? -1 : 1);
        if (nsize < 1 || nsize > n / 2) continue;
        long long delta = 0;
        for (int u : t.adj[v]) delta += (cur[u] == cur[v]) ? 1 : -1;
        long long ncut = cut + delta;
        if (static_cast<double>(ncut) / nsize < best - 1e-15) {
          cur[v] ^= 1;
          size = nsize;
          cut = ncut;
          consider(cur, size, cut);
          moved = true;
        }
      }
    }
  }

  rep.h_upper = best;
  for (int v = 0; v < n; ++v)
    if (best_set[v]) rep.witness.push_back(v);

  // Theorem-1 column: k=2 partition of the same graph.
  Partition p2 = partition_graph(t, 2, hash_mix(seed, 0x7e2));
  rep.k = 2;
  rep.f = cross_cluster_fraction(t, p2);
  rep.theorem1 = theorem1_bound(rep.d, 2, rep.f);
  return rep;
}

/// Single line: `n d k f h_upper theorem1_bound witness_size`.
inline std::string dump_expansion_report(const ExpansionReport& rep) {
  char buf[160];
  snprintf(buf, sizeof(buf), "%d %d %d %.10g %.10g %.10g %zu\n", rep.n, rep.d, rep.k, rep.f,
           rep.h_upper, rep.theorem1, rep.witness.size());
  return buf;
}

}  // namespace fabricsim
