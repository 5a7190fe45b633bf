#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fabricsim/routing.hpp"
#include "fabricsim/rng.hpp"
#include "fabricsim/topology.hpp"

namespace fabricsim {

struct Failure {
  enum class Kind { Link, Switch };
  Kind kind = Kind::Link;
  int a = -1;  // link endpoint or the failed switch
  int b = -1;  // second link endpoint (Link only)

  static Failure link(int a, int b) { return {Kind::Link, std::min(a, b), std::max(a, b)}; }
  static Failure swtch(int s) { return {Kind::Switch, s, -1}; }

  std::string id() const {
    if (kind == Kind::Link) return std::to_string(a) + "-" + std::to_string(b);
    return std::to_string(a);
  }
};

struct LossConfig {
  enum class Mode { Auto, Exhaustive, Sampled };
  Mode mode = Mode::Auto;
  long trials = 1'000'000;  // sampled mode
  uint64_t seed = 1;
  // Auto: exhaustive below this many ordered server pairs, sampled above.
  long exhaustive_pair_limit = 10'000;
};

// Shared routing state across many failure evaluations of one topology.
struct RouteCache {
  const Topology* t = nullptr;
  NextHopTable nht;
  bool nht_ready = false;
  std::map<std::pair<int, int>, PathSet> paths;  // per (src, dst) rack pair

  void bind(const Topology& topo) {
    if (t != &topo) {
      t = &topo;
      nht_ready = false;
      paths.clear();
    }
  }
  const NextHopTable& next_hops() {
    if (!nht_ready) {
      nht = compute_next_hops(*t);
      nht_ready = true;
    }
    return nht;
  }
  const PathSet& path_set(const Scheme& scheme, int src, int dst) {
    auto key = std::make_pair(src, dst);
    auto it = paths.find(key);
    if (it == paths.end()) {
      PathSet ps = scheme.type == RouteScheme::KShortest
                       ? k_shortest_paths(*t, src, dst, scheme.k)
                       : k_disjoint_paths(*t, src, dst, scheme.k);
      it = paths.emplace(key, std::move(ps)).first;
    }
    return it->second;
  }
};

namespace detail {

inline bool link_failed(const Failure& f, int u, int v) {
  return f.kind == Failure::Kind::Link && std::min(u, v) == f.a && std::max(u, v) == f.b;
}
inline bool switch_failed(const Failure& f, int s) {
  return f.kind == Failure::Kind::Switch && f.a == s;
}

// Eligible servers per rack: a failed switch takes its servers out of the
// random-pair universe.
inline std::vector<long long> eligible_servers(const Topology& t, const Failure& f) {
  std::vector<long long> w(t.switch_count);
  for (int sw = 0; sw < t.switch_count; ++sw)
    w[sw] = switch_failed(f, sw) ? 0 : t.servers_at[sw];
  return w;
}

// Surviving ECMP next hops of u toward dst under local convergence.
inline void surviving_next_hops(const NextHopTable& nht, const Failure& f, int dst, int u,
                                std::vector<int>& out) {
  out.clear();
  for (int v : nht.nh[dst][u]) {
    if (switch_failed(f, v)) continue;
    if (link_failed(f, u, v)) continue;
    out.push_back(v);
  }
}

// Exact ECMP drop probability from every rack toward dst: q[u] = P[packet at
// u eventually hits a hop with no surviving next hop]. The shortest-path DAG
// is processed in increasing distance order, so all successors are resolved.
inline std::vector<double> ecmp_drop_probability(const Topology& t, const NextHopTable& nht,
                                                 const Failure& f, int dst) {
  const auto& dist = nht.dist[dst];
  std::vector<int> order;
  for (int u = 0; u < t.switch_count; ++u)
    if (u != dst && dist[u] >= 0) order.push_back(u);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return dist[a] < dist[b]; });

  std::vector<double> q(t.switch_count, 0.0);
  std::vector<int> survivors;
  for (int u : order) {
    if (switch_failed(f, u)) continue;  // never reached
    surviving_next_hops(nht, f, dst, u, survivors);
    if (survivors.empty()) {
      q[u] = 1.0;
      continue;
    }
    double s = 0;
    for (int v : survivors) s += q[v];
    q[u] = s / survivors.size();
  }
  return q;
}

// Source-routed loss for one rack pair: the source avoids paths whose first
// link failed; the flow is lost if its chosen path hits the failure beyond
// the first link, or if every path's first link failed.
inline double source_routed_pair_loss(const PathSet& ps, const Failure& f) {
  int candidates = 0, lost = 0;
  for (const Path& p : ps.paths) {
    const auto& h = p.hops;
    bool first_failed = false;
    if (h.size() >= 2)
      first_failed = link_failed(f, h[0], h[1]) || switch_failed(f, h[1]);
    if (first_failed) continue;
    ++candidates;
    bool hit = false;
    for (size_t i = 1; i + 1 < h.size() && !hit; ++i)
      if (link_failed(f, h[i], h[i + 1])) hit = true;
    for (size_t i = 2; i < h.size() && !hit; ++i)
      if (switch_failed(f, h[i])) hit = true;
    if (hit) ++lost;
  }
  if (candidates == 0) return 1.0;
  return static_cast<double>(lost) / candidates;
}

}  // namespace detail

/// P[L|F]: probability that a flow between a uniform random ordered pair of
/// servers is dropped before routing reconverges, given the failure and
/// per-switch local convergence (ECMP) or source-side path avoidance
/// (k-shortest / k-disjoint).
inline double loss_given_failure(const Topology& t, const Scheme& scheme, const Failure& f,
                                 const LossConfig& cfg = {}, RouteCache* cache = nullptr) {
  if (f.kind == Failure::Kind::Link) {
    if (t.link_index(f.a, f.b) < 0) throw std::invalid_argument("loss: no such link");
  } else if (f.a < 0 || f.a >= t.switch_count) {
    throw std::invalid_argument("loss: no such switch");
  }

  RouteCache local;
  RouteCache& rc = cache ? *cache : local;
  rc.bind(t);

  auto weights = detail::eligible_servers(t, f);
  long long eligible = 0;
  for (long long w : weights) eligible += w;
  if (eligible < 2) throw std::invalid_argument("loss: fewer than two eligible servers");
  const double denom = static_cast<double>(eligible) * (eligible - 1);

  bool exhaustive = cfg.mode == LossConfig::Mode::Exhaustive ||
                    (cfg.mode == LossConfig::Mode::Auto &&
                     eligible * (eligible - 1) <= cfg.exhaustive_pair_limit);

  if (exhaustive) {
    double lost_pairs = 0.0;
    if (scheme.type == RouteScheme::Ecmp) {
      const NextHopTable& nht = rc.next_hops();
      for (int dst = 0; dst < t.switch_count; ++dst) {
        if (weights[dst] == 0) continue;
        auto q = detail::ecmp_drop_probability(t, nht, f, dst);
        for (int src = 0; src < t.switch_count; ++src) {
          if (src == dst || weights[src] == 0) continue;
          lost_pairs += static_cast<double>(weights[src]) * weights[dst] * q[src];
        }
      }
    } else {
      for (int src = 0; src < t.switch_count; ++src) {
        if (weights[src] == 0) continue;
        for (int dst = 0; dst < t.switch_count; ++dst) {
          if (src == dst || weights[dst] == 0) continue;
          double pl = detail::source_routed_pair_loss(rc.path_set(scheme, src, dst), f);
          lost_pairs += static_cast<double>(weights[src]) * weights[dst] * pl;
        }
      }
    }
    return lost_pairs / denom;
  }

  // Sampled mode: uniform ordered server pairs, hashed path choices.
  Rng rng(cfg.seed);
  const NextHopTable* nht = scheme.type == RouteScheme::Ecmp ? &rc.next_hops() : nullptr;
  std::vector<int> eligible_list;
  for (int sw = 0; sw < t.switch_count; ++sw)
    for (int i = 0; i < weights[sw]; ++i) eligible_list.push_back(t.server_begin(sw) + i);

  long losses = 0;
  std::vector<int> survivors;
  for (long trial = 0; trial < cfg.trials; ++trial) {
    int si = eligible_list[rng.below(eligible_list.size())];
    int di = eligible_list[rng.below(eligible_list.size())];
    if (si == di) {
      --trial;  // ordered pairs of distinct servers
      continue;
    }
    int src = t.rack_of_server[si], dst = t.rack_of_server[di];
    if (src == dst) continue;
    if (scheme.type == RouteScheme::Ecmp) {
      int u = src;
      while (u != dst) {
        detail::surviving_next_hops(*nht, f, dst, u, survivors);
        if (survivors.empty()) {
          ++losses;
          break;
        }
        u = survivors[hash_mix(cfg.seed, static_cast<uint64_t>(u), trial) % survivors.size()];
      }
    } else {
      const PathSet& ps = rc.path_set(scheme, src, dst);
      std::vector<int> cands;
      for (size_t i = 0; i < ps.paths.size(); ++i) {
        const auto& h = ps.paths[i].hops;
        bool first_failed = h.size() >= 2 && (detail::link_failed(f, h[0], h[1]) ||
                                              detail::switch_failed(f, h[1]));
        if (!first_failed) cands.push_back(static_cast<int>(i));
      }
      if (cands.empty()) {
        ++losses;
        continue;
      }
      const auto& h = ps.paths[cands[hash_mix(cfg.seed, 0x9d5f, trial) % cands.size()]].hops;
      bool hit = false;
      for (size_t i = 1; i + 1 < h.size() && !hit; ++i)
        if (detail::link_failed(f, h[i], h[i + 1])) hit = true;
      for (size_t i = 2; i < h.size() && !hit; ++i)
        if (detail::switch_failed(f, h[i])) hit = true;
      if (hit) ++losses;
    }
  }
  return static_cast<double>(losses) / cfg.trials;
}

// ---------------------------------------------------------------------------

struct LossReport {
  Failure::Kind kind = Failure::Kind::Link;
  double lambda = 0.0;
  double p_loss_given_failure = 0.0;  // averaged over elements
  double expected_loss = 0.0;         // P[L|F] * lambda * element count
  std::vector<std::pair<std::string, double>> per_element;
};

/// Averages P[L|F] over every element of the kind and applies
/// P[F] ~ lambda * element count.
inline LossReport expected_transient_loss(const Topology& t, const Scheme& scheme,
                                          Failure::Kind kind, double lambda,
                                          const LossConfig& cfg = {}) {
  if (lambda < 0.0 || lambda > 1.0)
    throw std::invalid_argument("expected_transient_loss: lambda must be in [0,1]");
  RouteCache cache;
  LossReport rep;
  rep.kind = kind;
  rep.lambda = lambda;

  std::vector<Failure> elements;
  if (kind == Failure::Kind::Link) {
    for (auto [a, b] : t.links) elements.push_back(Failure::link(a, b));
  } else {
    for (int sw = 0; sw < t.switch_count; ++sw) elements.push_back(Failure::swtch(sw));
  }

  double sum = 0.0;
  for (const Failure& f : elements) {
    double p = loss_given_failure(t, scheme, f, cfg, &cache);
    rep.per_element.push_back({f.id(), p});
    sum += p;
  }
  rep.p_loss_given_failure = elements.empty() ? 0.0 : sum / elements.size();
  rep.expected_loss = rep.p_loss_given_failure * lambda * elements.size();
  return rep;
}

/// `kind element_id p_loss` rows plus a `kind avg_p_loss expected_loss`
/// summary line.
inline std::string dump_loss_report(const LossReport& rep) {
  const char* kind = rep.kind == Failure::Kind::Link ? "link" : "switch";
  std::ostringstream out;
  char buf[64];
  for (const auto& [id, p] : rep.per_element) {
    snprintf(buf, sizeof(buf), "%.10g", p);
    out << kind << " " << id << " " << buf << "\n";
  }
  snprintf(buf, sizeof(buf), "%.10g", rep.p_loss_given_failure);
  out << kind << " " << buf;
  snprintf(buf, sizeof(buf), "%.10g", rep.expected_loss);
  out << " " << buf << "\n";
  return out.str();
}

}  // namespace fabricsim
