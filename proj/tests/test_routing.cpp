#include <doctest.h>

#include <random>

#include "netsmith/errors.hpp"
#include "netsmith/metrics.hpp"
#include "netsmith/routing.hpp"
#include "oracles.hpp"

using namespace netsmith;

TEST_CASE("path enumeration is complete and ordered") {
  std::mt19937_64 rng(21);
  int checked = 0;
  for (int trial = 0; trial < 40; ++trial) {
    Layout l(2 + static_cast<int>(rng() % 2), 2 + static_cast<int>(rng() % 3));
    auto t = oracle::random_topology(rng, l, LinkClass::medium(), 0.6, trial % 3 != 0);
    if (!t) continue;
    ++checked;
    auto g = oracle::graph_of(*t);
    for (auto& row : g.out) std::sort(row.begin(), row.end());
    auto d = oracle::all_pairs(g);
    auto ps = enumerate_shortest_paths(*t, 1000);
    for (int s = 0; s < t->size(); ++s)
      for (int e = 0; e < t->size(); ++e) {
        if (s == e) continue;
        auto expect = oracle::shortest_paths(g, d, s, e);
        CHECK(ps.paths(s, e) == expect);
        CHECK_FALSE(ps.truncated(s, e));
      }
  }
  CHECK(checked > 15);
}

TEST_CASE("path cap truncates") {
  auto mesh = build_reference_topology(ReferenceKind::mesh, Layout(4, 5));
  auto ps = enumerate_shortest_paths(mesh, 3);
  CHECK(ps.paths(0, 19).size() == 3);
  CHECK(ps.truncated(0, 19));
  CHECK_FALSE(ps.truncated(0, 1));
  CHECK(ps.truncated_pairs() > 0);
  // 3 down and 4 across: C(7,3) = 35 shortest paths.
  CHECK(enumerate_shortest_paths(mesh, 64).paths(0, 19).size() == 35);
}

TEST_CASE("NDBT filter") {
  Layout l(2, 3);
  CHECK_FALSE(doubles_back({0, 1, 2}, l));
  CHECK(doubles_back({0, 1, 4, 3}, l));
  CHECK_FALSE(doubles_back({0, 3, 4, 5}, l));
  CHECK(doubles_back({2, 0, 1}, Layout(1, 3)));

  auto ft = build_reference_topology(ReferenceKind::folded_torus, Layout(4, 5));
  auto ps = enumerate_shortest_paths(ft);
  auto nd = ndbt_filter(ps, ft.layout());
  for (int s = 0; s < 20; ++s)
    for (int d = 0; d < 20; ++d) {
      if (s == d) continue;
      CHECK(!nd.paths(s, d).empty());
      if (nd.fallback(s, d)) {
        CHECK(nd.paths(s, d) == ps.paths(s, d));
      } else {
        for (const auto& p : nd.paths(s, d)) CHECK_FALSE(doubles_back(p, ft.layout()));
      }
    }
}

TEST_CASE("random routing is seeded") {
  auto ft = build_reference_topology(ReferenceKind::folded_torus, Layout(4, 5));
  auto ps = enumerate_shortest_paths(ft);
  auto a = random_route(ps, 5), b = random_route(ps, 5), c = random_route(ps, 6);
  CHECK(a == b);
  CHECK_FALSE(a == c);
  CHECK(a.complete());
  a.validate(ft);
  for (const auto& f : a.flows()) {
    const auto& opts = ps.paths(f.src, f.dst);
    CHECK(std::find(opts.begin(), opts.end(), a.path(f.src, f.dst)) != opts.end());
  }
}

TEST_CASE("exact MCLB matches brute force") {
  std::mt19937_64 rng(31);
  int checked = 0;
  for (int trial = 0; trial < 200 && checked < 12; ++trial) {
    Layout l(2, 2 + static_cast<int>(rng() % 2));
    auto t = oracle::random_topology(rng, l, LinkClass::medium(), 0.55, trial % 2 == 0);
    if (!t) continue;
    auto ps = enumerate_shortest_paths(*t);
    auto tm = trial % 3 ? TrafficMatrix::uniform(t->size()) : TrafficMatrix::shuffle(t->size());
    std::vector<std::vector<Path>> choices;
    std::vector<Rational> weights;
    double product = 1;
    for (const auto& f : tm.flows()) {
      choices.push_back(ps.paths(f.src, f.dst));
      weights.push_back(f.weight);
      product *= static_cast<double>(choices.back().size());
    }
    if (product > 1e4 || product < 2) continue;
    ++checked;
    auto r = mclb_route(ps, tm, MclbMode::exact);
    CHECK(r.proven_optimal);
    CHECK(max_channel_load(r.loads) == oracle::brute_force_mcl(choices, weights));
    CHECK(max_channel_load(channel_loads(r.table, tm)) == max_channel_load(r.loads));
    auto g = mclb_route(ps, tm, MclbMode::greedy);
    CHECK(max_channel_load(g.loads) >= max_channel_load(r.loads));
  }
  CHECK(checked >= 8);
}

TEST_CASE("channel loads conserve flit-hops") {
  auto ft = build_reference_topology(ReferenceKind::folded_torus, Layout(4, 5));
  auto tm = TrafficMatrix::uniform(20);
  auto r = mclb_route(enumerate_shortest_paths(ft), tm, MclbMode::greedy);
  CHECK(r.loads.total() == avg_hops(apsp(ft)));
  CHECK(r.table.complete());
  // Uniform all-to-all over 80 channels: no channel can carry below the mean.
  CHECK(r.loads.max() >= r.loads.total() / 80);
}

TEST_CASE("routing documents round-trip") {
  auto mesh = build_reference_topology(ReferenceKind::mesh, Layout(3, 3));
  auto tm = TrafficMatrix::uniform(9);
  auto r = mclb_route(enumerate_shortest_paths(mesh), tm, MclbMode::greedy);
  auto text = save_routing_table(r.table);
  CHECK(load_routing_table(text, 9) == r.table);
  CHECK(load_load_map_csv(save_load_map_csv(r.loads)) == r.loads);
  CHECK_THROWS_AS(load_routing_table("0 1 : 0>2\n", 9), InvalidArgument);
  RoutingTable rt(3);
  CHECK_THROWS_AS(rt.set(0, 1, {1, 0}), InvalidArgument);
  CHECK_THROWS_AS(rt.path(0, 1), InvalidArgument);
  rt.set(0, 2, {0, 2});
  CHECK_THROWS_AS(rt.validate(Topology(Layout(1, 3), {{0, 1}, {1, 2}})), InvalidArgument);
}
