#include <doctest.h>

#include <random>
#include <set>

#include "netsmith/errors.hpp"
#include "netsmith/model.hpp"
#include "netsmith/topology_io.hpp"
#include "oracles.hpp"

using namespace netsmith;

TEST_CASE("layout ids are row-major") {
  Layout l(4, 5);
  CHECK(l.size() == 20);
  CHECK(l.position(7) == Coord{2, 1});
  CHECK(l.id_at(Coord{4, 3}) == 19);
  for (RouterId r = 0; r < l.size(); ++r) CHECK(l.id_at(l.position(r)) == r);
  CHECK(Layout::parse("3x2") == Layout(3, 2));
  CHECK(l.to_string() == "4x5");
  CHECK_THROWS_AS(Layout::parse("4by5"), InvalidArgument);
  CHECK_THROWS_AS(Layout::parse("0x5"), InvalidArgument);
}

TEST_CASE("link classes nest") {
  auto s = LinkClass::small(), m = LinkClass::medium(), l = LinkClass::large();
  CHECK(s.offsets().size() == 3);
  CHECK(m.offsets().size() == 5);
  CHECK(l.offsets().size() == 7);
  for (const Offset& o : s.offsets()) CHECK(m.allows(o));
  for (const Offset& o : m.offsets()) CHECK(l.allows(o));
  CHECK(LinkClass::parse("medium") == m);
  auto c = LinkClass::parse("custom:1,0;0,2");
  CHECK(c.kind() == LinkClass::Kind::custom);
  CHECK(c.allows(Offset{0, 2}));
  CHECK_FALSE(c.allows(Offset{0, 1}));
  CHECK(LinkClass::parse(c.name()) == c);
  CHECK_THROWS_AS(LinkClass::custom({}), InvalidArgument);
  CHECK_THROWS_AS(LinkClass::custom({Offset{0, 0}}), InvalidArgument);
  CHECK_THROWS_AS(LinkClass::parse("huge"), InvalidArgument);
}

TEST_CASE("valid link set matches a coordinate scan") {
  for (const auto& cls : {LinkClass::small(), LinkClass::medium(), LinkClass::large()}) {
    Layout l(4, 5);
    std::vector<Channel> expect;
    for (int a = 0; a < 20; ++a)
      for (int b = 0; b < 20; ++b) {
        if (a == b) continue;
        int dx = std::abs(a % 5 - b % 5), dy = std::abs(a / 5 - b / 5);
        if (cls.allows(Offset{dx, dy})) expect.push_back({a, b});
      }
    CHECK(valid_link_set(l, cls) == expect);
  }
  CHECK(valid_link_set(Layout(4, 5), LinkClass::small()).size() == 110);
}

TEST_CASE("topology construction rejects bad channels") {
  Layout l(2, 2);
  CHECK_THROWS_AS(Topology(l, {{0, 0}}), InvalidArgument);
  CHECK_THROWS_AS(Topology(l, {{0, 1}, {0, 1}}), InvalidArgument);
  CHECK_THROWS_AS(Topology(l, {{0, 4}}), InvalidArgument);
  CHECK_THROWS_AS(Topology(Layout(1, 3), {{0, 2}}, LinkClass::small()), InvalidArgument);
  Topology t(l, {{1, 0}, {0, 1}, {0, 2}});
  CHECK(t.channel_count() == 3);
  CHECK(t.channels()[0] == Channel{0, 1});
  CHECK_FALSE(t.symmetric());
  CHECK(t.channel_index(0, 2) == 1);
  CHECK(t.channel_index(2, 0) == -1);
  CHECK(t.link_pairs() == Rational(3, 2));
}

TEST_CASE("reference topologies") {
  Layout l(4, 5);
  Topology mesh = build_reference_topology(ReferenceKind::mesh, l);
  CHECK(mesh.link_pairs() == 31);
  CHECK(mesh.symmetric());
  CHECK(infer_link_class(mesh) == LinkClass::small());

  Topology tx = build_reference_topology(ReferenceKind::torus_x, l);
  CHECK(tx.link_pairs() == 35);

  Topology ft = build_reference_topology(ReferenceKind::folded_torus, l);
  CHECK(ft.link_pairs() == 40);
  CHECK(infer_link_class(ft) == LinkClass::medium());
  for (RouterId r = 0; r < 20; ++r) {
    CHECK(ft.out_neighbors(r).size() == 4);
    CHECK(ft.in_neighbors(r).size() == 4);
  }
  for (const Channel& c : ft.channels()) {
    Offset o = offset_between(l, c.src, c.dst);
    CHECK(o.dx + o.dy <= 2);
    CHECK((o.dx == 0 || o.dy == 0));
  }
  CHECK(parse_reference_kind("folded_torus") == ReferenceKind::folded_torus);
  CHECK_THROWS_AS(parse_reference_kind("ring"), InvalidArgument);
  CHECK_THROWS_AS(build_reference_topology(ReferenceKind::torus_x, Layout(1, 5)), InvalidArgument);
}

TEST_CASE("traffic matrices normalize") {
  auto u = TrafficMatrix::uniform(20);
  CHECK(u.flows().size() == 380);
  CHECK(u.weight(3, 4) == Rational(1, 380));
  CHECK(u.weight(3, 3) == 0);
  CHECK(u.is_uniform());
  CHECK(u.active_sources() == 20);

  auto sh = TrafficMatrix::shuffle(20);
  Rational total(0);
  for (const auto& f : sh.flows()) {
    total += f.weight;
    const int expect = f.src < 10 ? 2 * f.src : (2 * f.src + 1) % 20;
    CHECK(f.dst == expect);
  }
  CHECK(total == 1);
  CHECK(sh.active_sources() == 18);
  CHECK(sh.label() == "shuffle");

  auto hs = TrafficMatrix::hotspot(6, {0}, Rational(1, 2));
  total = 0;
  for (const auto& f : hs.flows()) total += f.weight;
  CHECK(total == 1);
  CHECK(hs.weight(1, 0) > hs.weight(1, 2));

  auto p = make_traffic("permutation:1,2,0,3", 4);
  CHECK(p.flows().size() == 3);
  CHECK_THROWS_AS(make_traffic("permutation:1,1,0,3", 4), InvalidArgument);
  CHECK_THROWS_AS(TrafficMatrix(3, {{0, 1, Rational(-1)}}), InvalidArgument);
  CHECK_THROWS_AS(TrafficMatrix(3, {{0, 0, Rational(1)}}), InvalidArgument);
  CHECK_THROWS_AS(make_traffic("tornado", 4), InvalidArgument);
  CHECK(make_traffic("hotspot:0,1:1/4", 6).label() == "hotspot");
}

TEST_CASE("topology documents round-trip") {
  std::mt19937_64 rng(11);
  int built = 0;
  for (int trial = 0; trial < 60; ++trial) {
    Layout l(2 + static_cast<int>(rng() % 3), 2 + static_cast<int>(rng() % 3));
    auto t = oracle::random_topology(rng, l, LinkClass::medium(), 0.5, trial % 2 == 0);
    if (!t) continue;
    ++built;
    Topology back = load_topology(save_topology(*t));
    CHECK(back == *t);
    CHECK(save_topology(back) == save_topology(*t));
  }
  CHECK(built > 20);
  Topology ft = build_reference_topology(ReferenceKind::folded_torus, Layout(4, 5));
  CHECK(export_dot(ft).find("graph") != std::string::npos);
}

TEST_CASE("topology parse errors carry a location") {
  auto msg = [](const std::string& doc) {
    try {
      load_topology(doc);
    } catch (const ParseError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK(msg(R"({"layout":{"rows":2,"cols":2},"channels":[[0,1],[1,1]]})").find("channels[1]") != std::string::npos);
  CHECK(msg(R"({"layout":{"rows":2,"cols":2},"channels":[[0,9]]})").find("channels[0]") != std::string::npos);
  CHECK(msg(R"({"layout":{"rows":2},"channels":[]})") != "no error");
  CHECK(msg("{not json") != "no error");
}
