#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "fabricsim/expansion.hpp"
#include "fabricsim/resilience.hpp"
#include "fabricsim/routing.hpp"
#include "fabricsim/simulate.hpp"
#include "fabricsim/topology.hpp"
#include "fabricsim/traffic.hpp"

namespace fabricsim {

// ---------------------------------------------------------------------------
// Config file: `key = value` lines, one `[section]` per experiment,
// '#'/';' comments.

struct ConfigFile {
  std::map<std::string, std::string> globals;
  std::map<std::string, std::map<std::string, std::string>> sections;

  static std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
  }

  static ConfigFile parse(std::istream& in) {
    ConfigFile cf;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      auto cut = line.find_first_of("#;");
      if (cut != std::string::npos) line = line.substr(0, cut);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']')
          throw std::runtime_error("config: bad section header at line " +
                                   std::to_string(lineno));
        section = trim(line.substr(1, line.size() - 2));
        cf.sections[section];
        continue;
      }
      auto eq = line.find('=');
      if (eq == std::string::npos)
        throw std::runtime_error("config: expected key=value at line " + std::to_string(lineno));
      std::string key = trim(line.substr(0, eq));
      std::string value = trim(line.substr(eq + 1));
      if (key.empty()) throw std::runtime_error("config: empty key at line " + std::to_string(lineno));
      (section.empty() ? cf.globals : cf.sections[section])[key] = value;
    }
    return cf;
  }

  static ConfigFile parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    return parse(in);
  }
};

// ---------------------------------------------------------------------------
// Mini-expression parsers for topology and routing specs.

namespace detail {

// Splits "name(a=1,b=2)" into name and key=value args; nested parens kept.
inline std::pair<std::string, std::vector<std::string>> parse_call(const std::string& s) {
  auto open = s.find('(');
  if (open == std::string::npos) return {ConfigFile::trim(s), {}};
  if (s.back() != ')') throw std::invalid_argument("spec: missing ')' in " + s);
  std::string name = ConfigFile::trim(s.substr(0, open));
  std::string body = s.substr(open + 1, s.size() - open - 2);
  std::vector<std::string> args;
  int depth = 0;
  std::string cur;
  for (char c : body) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      args.push_back(ConfigFile::trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!ConfigFile::trim(cur).empty()) args.push_back(ConfigFile::trim(cur));
  return {name, args};
}

inline long long arg_int(const std::vector<std::string>& args, const std::string& key,
                         long long fallback, bool required) {
  for (const auto& a : args) {
    auto eq = a.find('=');
    if (eq == std::string::npos) continue;
    if (ConfigFile::trim(a.substr(0, eq)) == key)
      return std::stoll(ConfigFile::trim(a.substr(eq + 1)));
  }
  if (required) throw std::invalid_argument("spec: missing argument " + key);
  return fallback;
}

}  // namespace detail

inline TopologySpec parse_topology_spec(const std::string& text, uint64_t default_seed) {
  auto [name, args] = detail::parse_call(text);
  if (name == "fat_tree") {
    FatTreeSpec s;
    s.k = static_cast<int>(detail::arg_int(args, "k", 0, true));
    s.oversub = static_cast<int>(detail::arg_int(args, "oversub", 1, false));
    return s;
  }
  if (name == "leaf_spine") {
    LeafSpineSpec s;
    s.x = static_cast<int>(detail::arg_int(args, "x", 0, true));
    s.y = static_cast<int>(detail::arg_int(args, "y", 0, true));
    return s;
  }
  if (name == "rrg") {
    if (args.empty()) throw std::invalid_argument("spec: rrg needs a base topology");
    TopologySpec base = parse_topology_spec(args[0], default_seed);
    RrgSpec r;
    if (std::holds_alternative<FatTreeSpec>(base))
      r.base = std::get<FatTreeSpec>(base);
    else if (std::holds_alternative<LeafSpineSpec>(base))
      r.base = std::get<LeafSpineSpec>(base);
    else
      throw std::invalid_argument("spec: rrg of rrg is not a thing");
    r.seed = static_cast<uint64_t>(
        detail::arg_int(args, "seed", static_cast<long long>(default_seed), false));
    return r;
  }
  throw std::invalid_argument("spec: unknown topology " + name);
}

inline Scheme parse_scheme(const std::string& text) {
  auto [name, args] = detail::parse_call(text);
  auto k_of = [&]() {
    if (args.empty()) throw std::invalid_argument("scheme: missing K in " + text);
    return std::stoi(args[0]);
  };
  if (name == "ecmp") return Scheme::ecmp();
  if (name == "kshortest") return Scheme::kshortest(k_of());
  if (name == "kdisjoint") return Scheme::kdisjoint(k_of());
  throw std::invalid_argument("scheme: unknown scheme " + text);
}

// ---------------------------------------------------------------------------

struct ExperimentConfig {
  std::string experiment;
  TopologySpec topology = FatTreeSpec{4, 1};
  Scheme routing = Scheme::ecmp();
  uint64_t seed = 1;
  std::string out_dir = ".";
  int workers = 1;
  std::map<std::string, std::string> params;

  std::string param(const std::string& key, const std::string& fallback = "",
                    bool required = false) const {
    auto it = params.find(key);
    if (it != params.end()) return it->second;
    if (required) throw std::invalid_argument("experiment " + experiment + ": missing " + key);
    return fallback;
  }
  long long param_int(const std::string& key, long long fallback) const {
    auto it = params.find(key);
    return it == params.end() ? fallback : std::stoll(it->second);
  }
  double param_double(const std::string& key, double fallback) const {
    auto it = params.find(key);
    return it == params.end() ? fallback : std::stod(it->second);
  }
  std::vector<std::string> param_list(const std::string& key) const {
    std::vector<std::string> out;
    std::string raw = param(key, "", true);
    std::stringstream ss(raw);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = ConfigFile::trim(item);
      if (!item.empty()) out.push_back(item);
    }
    if (out.empty()) throw std::invalid_argument("experiment: empty list for " + key);
    return out;
  }
  std::vector<int> param_int_list(const std::string& key) const {
    std::vector<int> out;
    for (const auto& s : param_list(key)) out.push_back(std::stoi(s));
    return out;
  }
  std::vector<double> param_double_list(const std::string& key) const {
    std::vector<double> out;
    for (const auto& s : param_list(key)) out.push_back(std::stod(s));
    return out;
  }
};

inline ExperimentConfig load_experiment_config(const ConfigFile& cf,
                                               const std::string& experiment) {
  ExperimentConfig cfg;
  cfg.experiment = experiment;
  auto g = [&](const std::string& key, const std::string& fallback) {
    auto it = cf.globals.find(key);
    return it == cf.globals.end() ? fallback : it->second;
  };
  cfg.seed = std::stoull(g("seed", "1"));
  cfg.topology = parse_topology_spec(g("topology", "fat_tree(k=4,oversub=1)"), cfg.seed);
  cfg.routing = parse_scheme(g("routing", "ecmp"));
  cfg.out_dir = g("out", ".");
  auto sec = cf.sections.find(experiment);
  if (sec != cf.sections.end()) cfg.params = sec->second;
  return cfg;
}

// Canonical comment header: full config and seed, excluding execution-only
// knobs (worker count must not change output bytes).
inline std::string config_echo(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "# fabricsim " << cfg.experiment << "\n";
  out << "# topology=" << spec_name(cfg.topology) << "\n";
  out << "# routing=" << cfg.routing.name() << "\n";
  out << "# seed=" << cfg.seed << "\n";
  for (const auto& [k, v] : cfg.params) out << "# " << k << "=" << v << "\n";
  return out.str();
}

// ---------------------------------------------------------------------------

namespace detail {

inline void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  if (workers <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
  };
  std::vector<std::thread> pool;
  int count = std::min(workers, n);
  pool.reserve(count);
  for (int w = 0; w < count; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

inline BaseSpec require_base_spec(const TopologySpec& spec, const char* experiment) {
  if (std::holds_alternative<FatTreeSpec>(spec)) return std::get<FatTreeSpec>(spec);
  if (std::holds_alternative<LeafSpineSpec>(spec)) return std::get<LeafSpineSpec>(spec);
  throw std::invalid_argument(std::string(experiment) +
                              ": topology must be a fat tree or leaf-spine base");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// C-S heatmap

struct HeatmapTile {
  int c = 0;
  int s = 0;
  bool feasible = false;
  double ratio = 0, mean_rrg = 0, mean_base = 0, median_rrg = 0, median_base = 0;
  double jain_rrg = 0, jain_base = 0;
};

/// One heatmap tile: C-S pattern on each topology (packing follows each
/// topology's own racks), routes under the same scheme, max-min rates, and
/// the mean-rate ratio RRG/base.
inline HeatmapTile cs_heatmap_tile(const Topology& base, const Topology& rrg, int c, int s,
                                   const Scheme& scheme, uint64_t tile_seed) {
  HeatmapTile tile;
  tile.c = c;
  tile.s = s;
  CsSpec cs;
  cs.c = c;
  cs.s = s;
  cs.flow_size = kUnboundedSize;
  cs.start_window = 0.0;
  try {
    cs.seed = hash_mix(tile_seed, 0xA);
    TrafficPattern pb = cs_pattern(base, cs);
    cs.seed = hash_mix(tile_seed, 0xB);
    TrafficPattern pr = cs_pattern(rrg, cs);
    auto rb = assign_paths(base, pb, scheme, hash_mix(tile_seed, 0xC));
    auto rr = assign_paths(rrg, pr, scheme, hash_mix(tile_seed, 0xD));
    Allocation ab = maxmin_allocate(base, rb);
    Allocation ar = maxmin_allocate(rrg, rr);
    tile.mean_base = mean_rate(ab);
    tile.mean_rrg = mean_rate(ar);
    tile.median_base = median_rate(ab);
    tile.median_rrg = median_rate(ar);
    tile.jain_base = jain_index(ab);
    tile.jain_rrg = jain_index(ar);
    tile.ratio = tile.mean_rrg / tile.mean_base;
    tile.feasible = true;
  } catch (const std::invalid_argument&) {
    tile.feasible = false;  // infeasible tile: reported as NA
  }
  return tile;
}

/// Tile estimate averaged over `repeats` pattern placements (the tile seed
/// advances by a fixed stride per repeat). Infeasible only if every repeat
/// is infeasible.
inline HeatmapTile averaged_tile(const Topology& base, const Topology& rrg, int c, int s,
                                 const Scheme& scheme, uint64_t tile_seed, int repeats) {
  HeatmapTile sum;
  sum.c = c;
  sum.s = s;
  int n = 0;
  for (int rep = 0; rep < std::max(1, repeats); ++rep) {
    HeatmapTile t = cs_heatmap_tile(base, rrg, c, s, scheme, tile_seed + rep * 1000003ull);
    if (!t.feasible) continue;
    sum.ratio += t.ratio;
    sum.mean_rrg += t.mean_rrg;
    sum.mean_base += t.mean_base;
    sum.median_rrg += t.median_rrg;
    sum.median_base += t.median_base;
    sum.jain_rrg += t.jain_rrg;
    sum.jain_base += t.jain_base;
    ++n;
  }
  if (n == 0) return sum;  // infeasible
  sum.feasible = true;
  sum.ratio /= n;
  sum.mean_rrg /= n;
  sum.mean_base /= n;
  sum.median_rrg /= n;
  sum.median_base /= n;
  sum.jain_rrg /= n;
  sum.jain_base /= n;
  return sum;
}

inline std::vector<std::string> run_cs_heatmap(const ExperimentConfig& cfg) {
  BaseSpec base_spec = detail::require_base_spec(cfg.topology, "cs_heatmap");
  Topology base = build_topology(base_spec);
  Topology rrg = rewire_to_rrg(base, cfg.seed);
  std::vector<int> c_values = cfg.param_int_list("c_values");
  std::vector<int> s_values = cfg.param_int_list("s_values");
  int repeats = static_cast<int>(cfg.param_int("repeats", 1));

  struct Key {
    int c, s;
  };
  std::vector<Key> keys;
  for (int c : c_values)
    for (int s : s_values) keys.push_back({c, s});
  std::vector<HeatmapTile> tiles(keys.size());
  detail::parallel_for(static_cast<int>(keys.size()), cfg.workers, [&](int i) {
    uint64_t tile_seed = cfg.seed ^ hash_mix(keys[i].c, keys[i].s, base.server_count());
    tiles[i] = averaged_tile(base, rrg, keys[i].c, keys[i].s, cfg.routing, tile_seed, repeats);
  });

  std::vector<std::string> rows;
  rows.push_back("C,S,ratio,mean_rrg,mean_base,median_rrg,median_base");
  for (const HeatmapTile& t : tiles) {
    std::ostringstream r;
    r << t.c << "," << t.s << ",";
    if (t.feasible)
      r << fmt_double(t.ratio) << "," << fmt_double(t.mean_rrg) << "," << fmt_double(t.mean_base)
        << "," << fmt_double(t.median_rrg) << "," << fmt_double(t.median_base);
    else
      r << "NA,NA,NA,NA,NA";
    rows.push_back(r.str());
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Scale sweep: leaf-spines with x/y = 3 at growing sizes.

// cs_points entries: "C:S" where each side is either an absolute count or a
// rack multiple like "1r" / "4r" (r = servers per rack of the current size).
inline int parse_cs_point_side(const std::string& side, int servers_per_rack) {
  std::string s = ConfigFile::trim(side);
  if (!s.empty() && s.back() == 'r')
    return std::stoi(s.substr(0, s.size() - 1)) * servers_per_rack;
  return std::stoi(s);
}

inline std::vector<std::string> run_scale_sweep(const ExperimentConfig& cfg) {
  std::vector<int> sizes = cfg.param_int_list("sizes");
  std::vector<std::string> points = cfg.param_list("cs_points");
  int repeats = static_cast<int>(cfg.param_int("repeats", 1));

  std::vector<std::string> rows;
  rows.push_back("servers,C,S,ratio");
  for (int servers : sizes) {
    // servers = x * (x + y) with x = 3m, y = m  =>  12 m^2
    int m = static_cast<int>(std::lround(std::sqrt(servers / 12.0)));
    if (12 * m * m != servers)
      throw std::invalid_argument("scale_sweep: size " + std::to_string(servers) +
                                  " is not 12*m^2 (leaf-spine with x/y = 3)");
    Topology base = build_leaf_spine(3 * m, m);
    Topology rrg = rewire_to_rrg(base, cfg.seed);
    for (const std::string& pt : points) {
      auto colon = pt.find(':');
      if (colon == std::string::npos)
        throw std::invalid_argument("scale_sweep: cs_points entries look like C:S");
      int c = parse_cs_point_side(pt.substr(0, colon), 3 * m);
      int s = parse_cs_point_side(pt.substr(colon + 1), 3 * m);
      uint64_t tile_seed = cfg.seed ^ hash_mix(c, s, servers);
      HeatmapTile tile = averaged_tile(base, rrg, c, s, cfg.routing, tile_seed, repeats);
      std::ostringstream r;
      r << servers << "," << c << "," << s << ","
        << (tile.feasible ? fmt_double(tile.ratio) : "NA");
      rows.push_back(r.str());
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Burst FCT (incast / outcast presets) on base vs RRG.

struct BurstOutcome {
  FctResult base;
  FctResult rrg;
};

inline BurstOutcome run_burst_pair(const Topology& base, const Topology& rrg,
                                   BurstPreset preset, const Scheme& scheme, uint64_t seed) {
  BurstOutcome out;
  TrafficPattern pb = burst_preset(base, preset, hash_mix(seed, 0xA));
  TrafficPattern pr = burst_preset(rrg, preset, hash_mix(seed, 0xB));
  auto rb = assign_paths(base, pb, scheme, hash_mix(seed, 0xC));
  auto rr = assign_paths(rrg, pr, scheme, hash_mix(seed, 0xD));
  out.base = fct_simulate(base, rb, pb);
  out.rrg = fct_simulate(rrg, rr, pr);
  return out;
}

inline std::vector<std::string> run_burst(const ExperimentConfig& cfg) {
  BaseSpec base_spec = detail::require_base_spec(cfg.topology, "burst");
  Topology base = build_topology(base_spec);
  Topology rrg = rewire_to_rrg(base, cfg.seed);
  BurstPreset preset = burst_preset_from_name(cfg.param("preset", "", true));
  BurstOutcome out = run_burst_pair(base, rrg, preset, cfg.routing, cfg.seed);

  std::vector<std::string> rows;
  rows.push_back("# topology=" + spec_name(cfg.topology));
  std::istringstream base_dump(dump_fct(out.base));
  std::string line;
  while (std::getline(base_dump, line)) rows.push_back(line);
  rows.push_back("# topology=" + spec_name(RrgSpec{base_spec, cfg.seed}));
  std::istringstream rrg_dump(dump_fct(out.rrg));
  while (std::getline(rrg_dump, line)) rows.push_back(line);
  return rows;
}

// ---------------------------------------------------------------------------
// Trace sweep: rack matrix -> server flows on the base, busiest-packed onto
// the RRG, fluid FCT percentiles per norm factor.

inline std::vector<std::string> run_trace_sweep(const ExperimentConfig& cfg) {
  BaseSpec base_spec = detail::require_base_spec(cfg.topology, "trace_sweep");
  Topology base = build_topology(base_spec);
  Topology rrg = rewire_to_rrg(base, cfg.seed);
  std::string matrix_path = cfg.param("matrix", "", true);
  int top_n = static_cast<int>(cfg.param_int("top_n", 50));
  double window = cfg.param_double("window", kTraceStartWindow);
  std::vector<double> norms = cfg.param_double_list("norms");

  std::vector<int> hosts;  // base racks in switch-id order
  for (int sw = 0; sw < base.switch_count; ++sw)
    if (base.servers_at[sw] > 0) hosts.push_back(sw);
  if (static_cast<int>(hosts.size()) < top_n)
    throw std::invalid_argument("trace_sweep: base topology has fewer racks than top_n");
  hosts.resize(top_n);

  std::vector<std::string> rows;
  rows.push_back("norm_factor,base_p50,base_p90,base_p99,rrg_p50,rrg_p90,rrg_p99");
  for (double norm : norms) {
    RackMatrix m = load_rack_matrix(matrix_path, top_n, norm);
    uint64_t norm_bits = 0;
    std::memcpy(&norm_bits, &norm, sizeof(norm));
    uint64_t s = cfg.seed ^ hash_mix(norm_bits, 0x77);
    TrafficPattern pb = expand_to_servers(m, base, hosts, hash_mix(s, 0xA), window);
    TrafficPattern pr = remap_busiest_packed(pb, base, rrg, hash_mix(s, 0xB));
    auto rb = assign_paths(base, pb, cfg.routing, hash_mix(s, 0xC));
    auto rr = assign_paths(rrg, pr, cfg.routing, hash_mix(s, 0xD));
    FctResult fb = fct_simulate(base, rb, pb);
    FctResult fr = fct_simulate(rrg, rr, pr);
    std::ostringstream r;
    r << fmt_double(norm) << "," << fmt_double(fb.p50) << "," << fmt_double(fb.p90) << ","
      << fmt_double(fb.p99) << "," << fmt_double(fr.p50) << "," << fmt_double(fr.p90) << ","
      << fmt_double(fr.p99);
    rows.push_back(r.str());
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Failure loss, expressibility, partition curves

inline std::vector<std::string> run_failure_loss(const ExperimentConfig& cfg) {
  Topology t = build_topology(cfg.topology);
  std::string kind_str = cfg.param("kind", "link");
  Failure::Kind kind = kind_str == "switch" ? Failure::Kind::Switch : Failure::Kind::Link;
  double lambda = cfg.param_double("lambda", 0.001);
  LossConfig lc;
  lc.seed = cfg.seed;
  std::string mode = cfg.param("mode", "auto");
  if (mode == "exhaustive") lc.mode = LossConfig::Mode::Exhaustive;
  if (mode == "sampled") lc.mode = LossConfig::Mode::Sampled;
  lc.trials = cfg.param_int("trials", lc.trials);
  LossReport rep = expected_transient_loss(t, cfg.routing, kind, lambda, lc);

  std::vector<std::string> rows;
  std::istringstream dump(dump_loss_report(rep));
  std::string line;
  while (std::getline(dump, line)) rows.push_back(line);
  return rows;
}

struct ExpressibilitySummary {
  long total = 0;
  long not_expressible = 0;
  double fraction = 0.0;
};

/// Aggregated over all ordered switch pairs of t under the given multi-path
/// scheme (expressibility of single shortest paths is trivially 0).
inline ExpressibilitySummary expressibility_all_pairs(const Topology& t, const Scheme& scheme) {
  if (scheme.type == RouteScheme::Ecmp)
    throw std::invalid_argument("expressibility: use kshortest(K) or kdisjoint(K)");
  ExpressibilitySummary sum;
  for (int src = 0; src < t.switch_count; ++src)
    for (int dst = 0; dst < t.switch_count; ++dst) {
      if (src == dst) continue;
      PathSet ps = scheme.type == RouteScheme::KShortest
                       ? k_shortest_paths(t, src, dst, scheme.k)
                       : k_disjoint_paths(t, src, dst, scheme.k);
      Expressibility rep = expressibility_report(t, ps);
      sum.total += rep.total;
      sum.not_expressible += rep.not_expressible;
    }
  sum.fraction = sum.total ? static_cast<double>(sum.not_expressible) / sum.total : 0.0;
  return sum;
}

inline std::vector<std::string> run_expressibility(const ExperimentConfig& cfg) {
  Topology t = build_topology(cfg.topology);
  int K = static_cast<int>(cfg.param_int("k", 4));
  // routing=ecmp (the default) means: analyze kdisjoint(K) paths
  Scheme scheme = cfg.routing.type == RouteScheme::Ecmp ? Scheme::kdisjoint(K) : cfg.routing;
  ExpressibilitySummary sum = expressibility_all_pairs(t, scheme);
  std::vector<std::string> rows;
  rows.push_back("scheme,total_paths,not_expressible,fraction");
  std::ostringstream r;
  r << scheme.name() << "," << sum.total << "," << sum.not_expressible << ","
    << fmt_double(sum.fraction);
  rows.push_back(r.str());
  return rows;
}

inline std::vector<std::string> run_partition(const ExperimentConfig& cfg) {
  Topology t = build_topology(cfg.topology);
  std::vector<int> k_values = cfg.param_int_list("k_values");
  std::vector<std::string> rows;
  rows.push_back("k,cross_fraction_random,cross_fraction_refined");
  for (int k : k_values) {
    Partition random = random_balanced_partition(t, k, cfg.seed ^ hash_mix(k, 0xA));
    Partition refined = partition_graph(t, k, cfg.seed ^ hash_mix(k, 0xB));
    std::ostringstream r;
    r << k << "," << fmt_double(cross_cluster_fraction(t, random)) << ","
      << fmt_double(cross_cluster_fraction(t, refined));
    rows.push_back(r.str());
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Dispatcher

inline std::string experiment_output(const ExperimentConfig& cfg,
                                     const std::vector<std::string>& rows) {
  std::string out = config_echo(cfg);
  for (const std::string& r : rows) out += r + "\n";
  return out;
}

/// Runs the named experiment and writes `<out_dir>/<experiment>.csv`
/// (or `.txt` for the raw topology export). Returns the output path.
inline std::string run_experiment(const ExperimentConfig& cfg) {
  std::vector<std::string> rows;
  std::string filename = cfg.experiment + ".csv";
  if (cfg.experiment == "cs_heatmap") {
    rows = run_cs_heatmap(cfg);
  } else if (cfg.experiment == "scale_sweep") {
    rows = run_scale_sweep(cfg);
  } else if (cfg.experiment == "burst") {
    rows = run_burst(cfg);
  } else if (cfg.experiment == "trace_sweep") {
    rows = run_trace_sweep(cfg);
  } else if (cfg.experiment == "failure_loss") {
    rows = run_failure_loss(cfg);
  } else if (cfg.experiment == "expressibility") {
    rows = run_expressibility(cfg);
  } else if (cfg.experiment == "partition") {
    rows = run_partition(cfg);
  } else if (cfg.experiment == "export_topology") {
    filename = "topology.txt";
    std::istringstream dump(export_topology(build_topology(cfg.topology)));
    std::string line;
    while (std::getline(dump, line)) rows.push_back(line);
  } else {
    throw std::invalid_argument("unknown experiment: " + cfg.experiment);
  }

  std::filesystem::create_directories(cfg.out_dir);
  std::string path = (std::filesystem::path(cfg.out_dir) / filename).string();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << experiment_output(cfg, rows);
  return path;
}

}  // namespace fabricsim
