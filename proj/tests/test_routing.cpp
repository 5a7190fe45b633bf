#include <catch2/catch_amalgamated.hpp>

#include <numeric>
#include <set>

#include "fabricsim/routing.hpp"
#include "fabricsim/topology.hpp"
#include "support/oracles.hpp"

using namespace fabricsim;

namespace {

Topology ring(int n) {
  Topology t;
  t.kind = TopologyKind::Rrg;
  t.switch_count = n;
  t.ports_per_switch.assign(n, 4);
  t.servers_at.assign(n, 1);
  for (int i = 0; i < n; ++i) t.links.push_back({i, (i + 1) % n});
  t.finalize();
  return t;
}

Topology complete(int n) {
  Topology t;
  t.kind = TopologyKind::Rrg;
  t.switch_count = n;
  t.ports_per_switch.assign(n, n + 1);
  t.servers_at.assign(n, 1);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) t.links.push_back({i, j});
  t.finalize();
  return t;
}

}  // namespace

TEST_CASE("next hops in a leaf spine") {
  Topology t = build_leaf_spine(2, 2);  // spines 0,1; leaves 2..5
  NextHopTable nht = compute_next_hops(t);
  CHECK(nht.nh[3][2] == std::vector<int>{0, 1});  // leaf to leaf via both spines
  CHECK(nht.nh[3][3].empty());                    // local delivery
  CHECK(nht.dist[3][2] == 2);
  CHECK(nht.dist[3][0] == 1);
}

TEST_CASE("next hops on a 4-cycle") {
  Topology c4 = ring(4);
  NextHopTable nht = compute_next_hops(c4);
  CHECK(nht.nh[2][0] == std::vector<int>{1, 3});
  CHECK(nht.dist[2][0] == 2);
}

TEST_CASE("next hop sets strictly decrease distance and are nonempty") {
  Topology t = rewire_to_rrg(build_leaf_spine(6, 2), 5);
  NextHopTable nht = compute_next_hops(t);
  for (int dst = 0; dst < t.switch_count; ++dst)
    for (int u = 0; u < t.switch_count; ++u) {
      if (u == dst) {
        CHECK(nht.nh[dst][u].empty());
        continue;
      }
      REQUIRE(!nht.nh[dst][u].empty());
      for (int v : nht.nh[dst][u]) CHECK(nht.dist[dst][v] == nht.dist[dst][u] - 1);
    }
}

TEST_CASE("shortest path enumeration") {
  Topology ls = build_leaf_spine(24, 8);
  PathSet ps = shortest_paths(ls, 8, 9);  // two leaves
  CHECK(ps.paths.size() == 8);            // one per spine
  CHECK(ps.shortest_path_count == 8);
  for (const Path& p : ps.paths) CHECK(p.length() == 2);
  CHECK(paths_link_valid(ls, ps));

  PathSet two = shortest_paths(ring(4), 0, 2);
  CHECK(two.shortest_path_count == 2);
  CHECK(two.paths.size() == 2);

  // cap truncates the sample but not the exact count
  PathSet capped = shortest_paths(ls, 8, 9, 3);
  CHECK(capped.paths.size() == 3);
  CHECK(capped.shortest_path_count == 8);

  CHECK_THROWS(shortest_paths(ls, 8, 8));
}

TEST_CASE("k shortest paths on the 4-cycle") {
  Topology c4 = ring(4);
  PathSet ps = k_shortest_paths(c4, 0, 2, 2);
  REQUIRE(ps.paths.size() == 2);
  CHECK(ps.paths[0].hops == std::vector<int>{0, 1, 2});
  CHECK(ps.paths[1].hops == std::vector<int>{0, 3, 2});

  PathSet more = k_shortest_paths(c4, 0, 2, 5);
  CHECK(more.paths.size() == 2);  // only two simple paths exist
}

TEST_CASE("k shortest paths on K4 against exhaustive enumeration") {
  Topology k4 = complete(4);
  PathSet ps = k_shortest_paths(k4, 0, 3, 3);
  REQUIRE(ps.paths.size() == 3);
  CHECK(ps.paths[0].length() == 1);
  CHECK(ps.paths[1].length() == 2);
  CHECK(ps.paths[2].length() == 2);

  // Against the oracle: first K simple paths in (length, lex) order.
  auto all = oracles::enumerate_simple_paths(k4, 0, 3);
  std::vector<Path> sorted;
  for (auto& hops : all) sorted.push_back({hops});
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 3; ++i) CHECK(ps.paths[i].hops == sorted[i].hops);
}

TEST_CASE("k shortest matches BFS distance at K=1 on random graphs") {
  for (uint64_t seed : {3ull, 4ull, 5ull}) {
    Topology g = random_regular_graph(12, 3, seed);
    auto d = bfs_distances(g, 0);
    for (int dst = 1; dst < g.switch_count; ++dst) {
      PathSet ps = k_shortest_paths(g, 0, dst, 1);
      REQUIRE(ps.paths.size() == 1);
      CHECK(ps.paths[0].length() == d[dst]);
    }
  }
}

TEST_CASE("k shortest equals the first K simple paths in (length, lex) order") {
  for (uint64_t seed = 21; seed <= 26; ++seed) {
    Topology g = random_regular_graph(8, 3, seed);
    auto all = oracles::enumerate_simple_paths(g, 0, 5);
    std::vector<Path> sorted;
    for (auto& hops : all) sorted.push_back({hops});
    std::sort(sorted.begin(), sorted.end());
    for (int K : {1, 3, 5, static_cast<int>(sorted.size()) + 2}) {
      PathSet ps = k_shortest_paths(g, 0, 5, K);
      size_t expect = std::min<size_t>(K, sorted.size());
      REQUIRE(ps.paths.size() == expect);
      for (size_t i = 0; i < expect; ++i) CHECK(ps.paths[i].hops == sorted[i].hops);
    }
  }
}

TEST_CASE("shortest path count matches exhaustive enumeration") {
  for (uint64_t seed = 31; seed <= 34; ++seed) {
    Topology g = random_regular_graph(10, 4, seed);
    auto d = bfs_distances(g, 0);
    for (int dst = 1; dst < g.switch_count; ++dst) {
      auto all = oracles::enumerate_simple_paths(g, 0, dst);
      uint64_t count = 0;
      for (auto& hops : all)
        if (static_cast<int>(hops.size()) - 1 == d[dst]) ++count;
      PathSet ps = shortest_paths(g, 0, dst, 1000);
      CHECK(ps.shortest_path_count == count);
      CHECK(ps.paths.size() == count);
    }
  }
}

TEST_CASE("k disjoint paths on K4") {
  Topology k4 = complete(4);
  PathSet ps = k_disjoint_paths(k4, 0, 3, 3);
  REQUIRE(ps.paths.size() == 3);
  int total = 0;
  for (const Path& p : ps.paths) total += p.length();
  CHECK(total == 5);
  CHECK(total == oracles::min_total_disjoint_length(k4, 0, 3, 3));
  CHECK(paths_link_valid(k4, ps));
}

TEST_CASE("k disjoint paths on the 4-cycle") {
  Topology c4 = ring(4);
  PathSet ps = k_disjoint_paths(c4, 0, 2, 2);
  REQUIRE(ps.paths.size() == 2);
  CHECK(ps.paths[0].hops == std::vector<int>{0, 1, 2});
  CHECK(ps.paths[1].hops == std::vector<int>{0, 3, 2});

  PathSet overflow = k_disjoint_paths(c4, 0, 2, 3);
  CHECK(overflow.paths.size() == 2);  // max flow is 2
}

TEST_CASE("k disjoint cardinality equals max flow and stays edge-disjoint") {
  for (uint64_t seed = 1; seed <= 6; ++seed) {
    Topology g = random_regular_graph(14, 4, seed);
    for (int dst : {1, 5, 13}) {
      for (int K : {2, 4, 6}) {
        PathSet ps = k_disjoint_paths(g, 0, dst, K);
        int mf = oracles::edge_disjoint_max_flow(g, 0, dst);
        CHECK(static_cast<int>(ps.paths.size()) == std::min(K, mf));
        CHECK(paths_link_valid(g, ps));
        std::set<std::pair<int, int>> used;
        for (const Path& p : ps.paths)
          for (size_t i = 0; i + 1 < p.hops.size(); ++i) {
            auto e = std::minmax(p.hops[i], p.hops[i + 1]);
            CHECK(used.insert(e).second);  // no edge reused
          }
      }
    }
  }
}

TEST_CASE("k disjoint total length is minimal on small instances") {
  for (uint64_t seed = 11; seed <= 14; ++seed) {
    Topology g = random_regular_graph(8, 3, seed);
    for (int K : {2, 3}) {
      PathSet ps = k_disjoint_paths(g, 0, 7, K);
      if (static_cast<int>(ps.paths.size()) < K) continue;
      int total = 0;
      for (const Path& p : ps.paths) total += p.length();
      CHECK(total == oracles::min_total_disjoint_length(g, 0, 7, K));
    }
  }
}

TEST_CASE("expressibility basics") {
  Topology c5 = ring(5);
  // adjacent pair 0-1; the long way round is 0-4-3-2-1
  PathSet ps;
  ps.src = 0;
  ps.dst = 1;
  ps.scheme = Scheme::kdisjoint(2);
  ps.paths.push_back({{0, 1}});
  ps.paths.push_back({{0, 4, 3, 2, 1}});
  Expressibility rep = expressibility_report(c5, ps);
  CHECK(rep.total == 2);
  CHECK(rep.not_expressible == 0);
  CHECK(rep.witness[0] == 1);  // shortest path: destination splits it
  CHECK(rep.witness[1] == 3);  // middle hop: 0-4-3 and 3-2-1 both shortest
}

TEST_CASE("paths at full shortest length are always expressible") {
  Topology g = rewire_to_rrg(build_leaf_spine(6, 2), 17);
  for (int dst = 1; dst < g.switch_count; ++dst) {
    PathSet ps = shortest_paths(g, 0, dst);
    Expressibility rep = expressibility_report(g, ps);
    CHECK(rep.not_expressible == 0);
  }
}

TEST_CASE("expressibility witnesses verify against BFS distances") {
  Topology g = rewire_to_rrg(build_leaf_spine(6, 2), 23);
  for (int src = 0; src < g.switch_count; ++src)
    for (int dst = 0; dst < g.switch_count; ++dst) {
      if (src == dst) continue;
      PathSet ps = k_disjoint_paths(g, src, dst, 3);
      Expressibility rep = expressibility_report(g, ps);
      auto ds = bfs_distances(g, src);
      auto dd = bfs_distances(g, dst);
      for (size_t i = 0; i < ps.paths.size(); ++i) {
        if (rep.witness[i] < 0) continue;
        const auto& hops = ps.paths[i].hops;
        auto it = std::find(hops.begin(), hops.end(), rep.witness[i]);
        REQUIRE(it != hops.end());
        int j = static_cast<int>(it - hops.begin());
        CHECK(ds[rep.witness[i]] == j);
        CHECK(dd[rep.witness[i]] == ps.paths[i].length() - j);
      }
    }
}

TEST_CASE("path dump format") {
  Topology c4 = ring(4);
  PathSet ps = k_shortest_paths(c4, 0, 2, 2);
  CHECK(dump_paths(ps) == "0 2 kshortest2 2 0>1>2\n0 2 kshortest2 2 0>3>2\n");
}

TEST_CASE("schemes are deterministic across calls") {
  Topology g = rewire_to_rrg(build_leaf_spine(6, 2), 31);
  PathSet a = k_shortest_paths(g, 2, 9, 4);
  PathSet b = k_shortest_paths(g, 2, 9, 4);
  CHECK(a.paths == b.paths);
  PathSet c = k_disjoint_paths(g, 2, 9, 4);
  PathSet d = k_disjoint_paths(g, 2, 9, 4);
  CHECK(c.paths == d.paths);
}
