#include <doctest.h>

#include <random>
#include <set>

#include "netsmith/deadlock.hpp"
#include "netsmith/errors.hpp"
#include "netsmith/routing.hpp"
#include "oracles.hpp"

using namespace netsmith;

namespace {

// Clockwise-only routing around a unidirectional ring.
std::pair<Topology, RoutingTable> ring(int n) {
  std::vector<Channel> ch;
  for (int i = 0; i < n; ++i) ch.push_back({i, (i + 1) % n});
  Topology t(Layout(1, n), ch);
  RoutingTable rt(n);
  for (int s = 0; s < n; ++s)
    for (int d = 0; d < n; ++d) {
      if (s == d) continue;
      Path p{s};
      while (p.back() != d) p.push_back((p.back() + 1) % n);
      rt.set(s, d, p);
    }
  return {t, rt};
}

void check_layers(const VcAssignment& va, const Topology& t, const RoutingTable& rt) {
  std::set<FlowKey> seen;
  for (const auto& layer : va.layers) {
    std::vector<Path> paths;
    for (const FlowKey& f : layer) {
      CHECK(seen.insert(f).second);
      paths.push_back(rt.path(f.src, f.dst));
    }
    CHECK(oracle::dependencies_acyclic(paths));
  }
  CHECK(seen.size() == rt.flows().size());
  CHECK(verify_assignment(va, t, rt));
}

}  // namespace

TEST_CASE("CDG edges are consecutive channel pairs") {
  auto [t, rt] = ring(4);
  Cdg g = build_cdg(t, rt);
  CHECK(g.size() == 4);
  CHECK(g.edge_count() == 4);
  CHECK(g.has_edge({0, 1}, {1, 2}));
  CHECK_FALSE(g.has_edge({0, 1}, {2, 3}));
  auto cyc = find_cycle(g);
  REQUIRE(cyc);
  CHECK(cyc->size() == 4);
  CHECK_THROWS_AS(build_cdg(t, std::vector<Path>{{0, 2}}), InvalidArgument);
}

TEST_CASE("find_cycle agrees with Kahn on random path sets") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 40; ++trial) {
    auto t = oracle::random_topology(rng, Layout(3, 3), LinkClass::medium(), 0.5);
    if (!t) continue;
    auto rt = random_route(enumerate_shortest_paths(*t), rng());
    std::vector<Path> paths;
    for (const auto& f : rt.flows())
      if (rng() % 3 == 0) paths.push_back(rt.path(f.src, f.dst));
    auto cyc = find_cycle(build_cdg(*t, paths));
    CHECK(cyc.has_value() == !oracle::dependencies_acyclic(paths));
  }
}

TEST_CASE("layering splits a ring") {
  auto [t, rt] = ring(5);
  auto va = layer_paths(t, rt, 1);
  CHECK(va.layer_count() >= 2);
  check_layers(va, t, rt);
  CHECK_THROWS_AS(layer_paths(t, rt, 1, 1), LayerLimitError);
  try {
    layer_paths(t, rt, 1, 1);
  } catch (const LayerLimitError& e) {
    CHECK_FALSE(e.cycle().empty());
  }
}

TEST_CASE("layering property on random routed topologies") {
  std::mt19937_64 rng(43);
  int checked = 0;
  for (int trial = 0; trial < 30; ++trial) {
    auto t = oracle::random_topology(rng, Layout(3, 4), LinkClass::large(), 0.4);
    if (!t) continue;
    ++checked;
    auto rt = random_route(enumerate_shortest_paths(*t), rng());
    auto va = layer_paths(*t, rt, rng(), 12);
    check_layers(va, *t, rt);
    auto bal = balance_layers(va, *t, rt);
    CHECK(bal.layer_count() == va.layer_count());
    check_layers(bal, *t, rt);
    auto occ = weighted_occupancy(va, rt);
    int total = 0;
    for (int x : occ) total += x;
    int hops = 0;
    for (const auto& f : rt.flows()) hops += static_cast<int>(rt.path(f.src, f.dst).size()) - 1;
    CHECK(total == hops);
  }
  CHECK(checked > 10);
}

TEST_CASE("best layering is deterministic and never worse than its first attempt") {
  auto ft = build_reference_topology(ReferenceKind::folded_torus, Layout(4, 5));
  auto rt = mclb_route(enumerate_shortest_paths(ft), TrafficMatrix::uniform(20), MclbMode::greedy).table;
  auto a = best_layering(ft, rt, 7, 5);
  auto b = best_layering(ft, rt, 7, 5);
  CHECK(a.assignment == b.assignment);
  CHECK(a.layer_counts.size() == 5);
  CHECK(a.assignment.layer_count() == *std::min_element(a.layer_counts.begin(), a.layer_counts.end()));
  check_layers(a.assignment, ft, rt);
}

TEST_CASE("VC documents round-trip") {
  auto [t, rt] = ring(4);
  auto va = layer_paths(t, rt, 3);
  auto back = load_vc_table(save_vc_table(va));
  CHECK(back.layer_count() == va.layer_count());
  for (const auto& f : rt.flows()) CHECK(back.layer_of(f.src, f.dst) == va.layer_of(f.src, f.dst));
  CHECK(vc_summary_json(va, rt).find("\"layers\"") != std::string::npos);
  CHECK_THROWS_AS(va.layer_of(0, 0), InvalidArgument);
  VcAssignment bad{{{{0, 1}}, {{0, 1}}}};
  CHECK_FALSE(verify_assignment(bad, t, rt));
}
