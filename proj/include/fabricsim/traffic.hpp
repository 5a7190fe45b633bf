#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fabricsim/rng.hpp"
#include "fabricsim/topology.hpp"

namespace fabricsim {

constexpr double kUnboundedSize = std::numeric_limits<double>::infinity();
constexpr double kBurstFlowBytes = 100'000.0;  // 100 KB burst flows
constexpr double kTraceStartWindow = 0.010;    // 10 ms jitter for trace replay

struct Flow {
  int src = -1;  // server index
  int dst = -1;
  double size_bytes = kUnboundedSize;
  double start = 0.0;  // seconds
  bool unbounded() const { return std::isinf(size_bytes); }
};

struct TrafficPattern {
  std::vector<Flow> flows;
};

// C-S workload: |C| clients packed into the fewest racks, |S| servers packed
// into the fewest remaining racks, one flow per (client, server) pair.
struct CsSpec {
  int c = 1;
  int s = 1;
  uint64_t seed = 1;
  double flow_size = kUnboundedSize;
  double start_window = 0.0;  // 0 = simultaneous starts
};

namespace detail {

// Racks picked at random but never using more racks than a largest-first
// packing needs. Returns (switch, servers taken) in fill order and removes
// the used racks from `pool`.
inline std::vector<std::pair<int, int>> pick_packed_racks(
    std::vector<int>& pool, const std::vector<int>& capacity, int want, Rng& rng,
    const char* what) {
  long long avail = 0;
  for (int r : pool) avail += capacity[r];
  if (avail < want)
    throw std::invalid_argument(std::string("cs_pattern: not enough ") + what +
                                " capacity in remaining racks");
  // Minimal rack count: largest capacities first.
  std::vector<int> caps;
  for (int r : pool) caps.push_back(capacity[r]);
  std::sort(caps.rbegin(), caps.rend());
  int m = 0;
  long long cum = 0;
  while (cum < want) cum += caps[m++];

  std::vector<std::pair<int, int>> chosen;
  int remaining = want;
  while (remaining > 0) {
    // A candidate keeps the packing feasible within the minimal rack count.
    int slots_left = m - static_cast<int>(chosen.size()) - 1;
    std::vector<int> cands;
    for (size_t i = 0; i < pool.size(); ++i) {
      int r = pool[i];
      long long rest = 0;
      std::vector<int> others;
      for (size_t j = 0; j < pool.size(); ++j)
        if (j != i) others.push_back(capacity[pool[j]]);
      std::sort(others.rbegin(), others.rend());
      for (int s = 0; s < std::min<int>(slots_left, others.size()); ++s) rest += others[s];
      if (capacity[r] + rest >= remaining) cands.push_back(static_cast<int>(i));
    }
    int pick = cands[rng.below_int(static_cast<int>(cands.size()))];
    int r = pool[pick];
    int take = std::min(capacity[r], remaining);
    chosen.push_back({r, take});
    remaining -= take;
    pool.erase(pool.begin() + pick);
  }
  return chosen;
}

inline std::vector<int> expand_servers(const Topology& t,
                                       const std::vector<std::pair<int, int>>& racks) {
  std::vector<int> servers;
  for (auto [sw, take] : racks)
    for (int i = 0; i < take; ++i) servers.push_back(t.server_begin(sw) + i);
  return servers;
}

}  // namespace detail

inline TrafficPattern cs_pattern(const Topology& t, const CsSpec& spec) {
  if (spec.c < 1 || spec.s < 1) throw std::invalid_argument("cs_pattern: need c >= 1, s >= 1");
  if (spec.c + spec.s > t.server_count())
    throw std::invalid_argument("cs_pattern: c + s exceeds server count");

  Rng rng(spec.seed);
  std::vector<int> pool;
  for (int sw = 0; sw < t.switch_count; ++sw)
    if (t.servers_at[sw] > 0) pool.push_back(sw);
  rng.shuffle(pool);

  auto c_racks = detail::pick_packed_racks(pool, t.servers_at, spec.c, rng, "client");
  auto s_racks = detail::pick_packed_racks(pool, t.servers_at, spec.s, rng, "server");
  std::vector<int> clients = detail::expand_servers(t, c_racks);
  std::vector<int> servers = detail::expand_servers(t, s_racks);

  TrafficPattern p;
  p.flows.reserve(static_cast<size_t>(spec.c) * spec.s);
  for (int ci : clients)
    for (int sj : servers) {
      double start = spec.start_window > 0 ? rng.unit() * spec.start_window : 0.0;
      p.flows.push_back({ci, sj, spec.flow_size, start});
    }
  return p;
}

enum class BurstPreset { Incast40x20, Outcast20x40 };

inline BurstPreset burst_preset_from_name(const std::string& name) {
  if (name == "incast_40_20") return BurstPreset::Incast40x20;
  if (name == "outcast_20_40") return BurstPreset::Outcast20x40;
  throw std::invalid_argument("unknown burst preset: " + name);
}

/// 40:20 incast / 20:40 outcast burst: 800 flows of 100 KB, all starting at
/// t = 0 for maximum burstiness.
inline TrafficPattern burst_preset(const Topology& t, BurstPreset preset, uint64_t seed) {
  CsSpec spec;
  spec.c = preset == BurstPreset::Incast40x20 ? 40 : 20;
  spec.s = preset == BurstPreset::Incast40x20 ? 20 : 40;
  spec.seed = seed;
  spec.flow_size = kBurstFlowBytes;
  spec.start_window = 0.0;
  return cs_pattern(t, spec);
}

// ---------------------------------------------------------------------------
// Rack-level traffic matrices

struct RackMatrix {
  std::vector<int> rack_ids;   // original ids, busiest first
  std::vector<double> volume;  // row-major [src][dst], bytes (already scaled)

  int size() const { return static_cast<int>(rack_ids.size()); }
  double at(int i, int j) const { return volume[static_cast<size_t>(i) * rack_ids.size() + j]; }
  double total() const {
    double s = 0;
    for (double v : volume) s += v;
    return s;
  }
};

/// Parses `src_rack,dst_rack,bytes` rows ('#' comments allowed), keeps the
/// top_n racks by outgoing volume and scales every entry by norm.
inline RackMatrix load_rack_matrix(std::istream& in, int top_n, double norm) {
  std::map<int, std::map<int, double>> vol;
  std::map<int, double> out_vol;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    bool blank = line.find_first_not_of(" \t\r") == std::string::npos;
    if (blank) continue;
    int src, dst;
    double bytes;
    char extra;
    if (sscanf(line.c_str(), "%d,%d,%lf %c", &src, &dst, &bytes, &extra) != 3)
      throw std::runtime_error("rack matrix: malformed row " + std::to_string(lineno) + ": " +
                               line);
    if (bytes < 0)
      throw std::runtime_error("rack matrix: negative volume at row " + std::to_string(lineno));
    out_vol[src];  // make sure every mentioned rack exists
    out_vol[dst];
    if (src == dst) continue;  // diagonal ignored
    vol[src][dst] += bytes;
    out_vol[src] += bytes;
  }
  if (top_n < 1 || top_n > static_cast<int>(out_vol.size()))
    throw std::invalid_argument("rack matrix: top_n exceeds racks present");

  std::vector<std::pair<double, int>> rank;
  for (auto& [rack, v] : out_vol) rank.push_back({-v, rack});
  std::sort(rank.begin(), rank.end());

  RackMatrix m;
  for (int i = 0; i < top_n; ++i) m.rack_ids.push_back(rank[i].second);
  m.volume.assign(static_cast<size_t>(top_n) * top_n, 0.0);
  for (int i = 0; i < top_n; ++i)
    for (int j = 0; j < top_n; ++j) {
      if (i == j) continue;
      auto it = vol.find(m.rack_ids[i]);
      if (it == vol.end()) continue;
      auto jt = it->second.find(m.rack_ids[j]);
      if (jt == it->second.end()) continue;
      m.volume[static_cast<size_t>(i) * top_n + j] = jt->second * norm;
    }
  return m;
}

inline RackMatrix load_rack_matrix(const std::string& path, int top_n, double norm) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("rack matrix: cannot open " + path);
  return load_rack_matrix(in, top_n, norm);
}

/// Splits rack-to-rack volume evenly across all server pairs: V bytes between
/// racks with a and b servers become a*b flows of V/(a*b), started uniformly
/// inside `start_window`.
inline TrafficPattern expand_to_servers(const RackMatrix& m, const Topology& t,
                                        const std::vector<int>& rack_to_switch, uint64_t seed,
                                        double start_window = kTraceStartWindow) {
  if (static_cast<int>(rack_to_switch.size()) != m.size())
    throw std::invalid_argument("expand_to_servers: assignment size mismatch");
  std::vector<char> used(t.switch_count, 0);
  for (int sw : rack_to_switch) {
    if (sw < 0 || sw >= t.switch_count || used[sw])
      throw std::invalid_argument("expand_to_servers: assignment must map to distinct switches");
    used[sw] = 1;
    if (t.servers_at[sw] == 0)
      throw std::invalid_argument("expand_to_servers: rack mapped to a switch with no servers");
  }

  Rng rng(seed);
  TrafficPattern p;
  for (int i = 0; i < m.size(); ++i)
    for (int j = 0; j < m.size(); ++j) {
      double v = m.at(i, j);
      if (v <= 0) continue;
      int sa = rack_to_switch[i], sb = rack_to_switch[j];
      int a = t.servers_at[sa], b = t.servers_at[sb];
      double each = v / (static_cast<double>(a) * b);
      for (int x = t.server_begin(sa); x < t.server_end(sa); ++x)
        for (int y = t.server_begin(sb); y < t.server_end(sb); ++y) {
          double start = start_window > 0 ? rng.unit() * start_window : 0.0;
          p.flows.push_back({x, y, each, start});
        }
    }
  return p;
}

/// Packs the busiest servers of the pattern into one randomly chosen rack of
/// `to` at a time and rewrites every flow endpoint accordingly. Busyness is
/// total bytes sent plus received; ties break by server index.
inline TrafficPattern remap_busiest_packed(const TrafficPattern& p, const Topology& from,
                                           const Topology& to, uint64_t seed) {
  std::map<int, double> traffic;
  for (const Flow& f : p.flows) {
    if (f.src < 0 || f.src >= from.server_count() || f.dst < 0 ||
        f.dst >= from.server_count())
      throw std::invalid_argument("remap_busiest_packed: flow endpoint outside source topology");
    traffic[f.src] += f.size_bytes;
    traffic[f.dst] += f.size_bytes;
  }
  std::vector<std::pair<double, int>> rank;
  for (auto& [server, v] : traffic) rank.push_back({-v, server});
  std::sort(rank.begin(), rank.end());

  if (static_cast<int>(rank.size()) > to.server_count())
    throw std::invalid_argument("remap_busiest_packed: target topology is too small");

  Rng rng(seed);
  std::vector<int> racks;
  for (int sw = 0; sw < to.switch_count; ++sw)
    if (to.servers_at[sw] > 0) racks.push_back(sw);
  rng.shuffle(racks);

  std::map<int, int> mapping;
  size_t next = 0;
  for (int sw : racks) {
    for (int slot = to.server_begin(sw); slot < to.server_end(sw) && next < rank.size(); ++slot)
      mapping[rank[next++].second] = slot;
    if (next == rank.size()) break;
  }

  TrafficPattern out;
  out.flows.reserve(p.flows.size());
  for (const Flow& f : p.flows)
    out.flows.push_back({mapping.at(f.src), mapping.at(f.dst), f.size_bytes, f.start});
  return out;
}

// ---------------------------------------------------------------------------

inline std::string fmt_double(double v) {
  if (std::isinf(v)) return "inf";
  char buf[40];
  snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

/// One line per flow: `src_server dst_server size_bytes|inf start_seconds`.
inline std::string dump_pattern(const TrafficPattern& p) {
  std::ostringstream out;
  for (const Flow& f : p.flows)
    out << f.src << " " << f.dst << " " << fmt_double(f.size_bytes) << " " << fmt_double(f.start)
        << "\n";
  return out.str();
}

}  // namespace fabricsim
