#include <doctest.h>

#include "netsmith/errors.hpp"
#include "netsmith/report.hpp"
#include "netsmith/routing.hpp"

using namespace netsmith;

TEST_CASE("reports round-trip through JSON") {
  auto ft = build_reference_topology(ReferenceKind::folded_torus, Layout(4, 5));
  auto tm = TrafficMatrix::uniform(20);
  auto rt = mclb_route(enumerate_shortest_paths(ft), tm, MclbMode::greedy).table;
  MetricsReport r = analyze(ft, tm, &rt, "ft");
  CHECK(r.links == 40);
  CHECK(r.diameter == 4);
  CHECK(r.avg_hops == Rational(44, 19));
  CHECK(r.bisection_bw == 10);
  CHECK(r.link_class == "medium");
  REQUIRE(r.mcl_bound);
  r.routing = "mclb";
  r.vc_layers = 3;
  r.zero_load_latency = Rational(246, 19);
  r.measured_saturation = 0.4375;
  r.max_accepted = 0.51;
  std::string text = report_json(r);
  MetricsReport back = load_report(text);
  CHECK(back == r);
  CHECK(report_json(back) == text);
  CHECK(text.find("\"avg_hops_exact\": \"44/19\"") != std::string::npos);
  CHECK(report_text(r).find("2.3158") != std::string::npos);
  CHECK_THROWS_AS(load_report("{"), ParseError);
  CHECK_THROWS_AS(load_report(R"({"layout":{"rows":4,"cols":5}})"), ParseError);
}

TEST_CASE("comparison guards") {
  auto tm = TrafficMatrix::uniform(20);
  auto ft = analyze(build_reference_topology(ReferenceKind::folded_torus, Layout(4, 5)), tm, nullptr, "ft");
  auto mesh = analyze(build_reference_topology(ReferenceKind::mesh, Layout(4, 5)), tm, nullptr, "mesh");
  CHECK_THROWS_AS(compare_reports(ft, mesh), InvalidArgument);
  Comparison c = compare_reports(ft, mesh, true);
  REQUIRE(c.notes.size() == 1);
  CHECK(c.notes[0].find("link classes differ") != std::string::npos);
  bool found = false;
  for (const DeltaRow& d : c.rows) {
    if (d.field != "avg_hops") continue;
    found = true;
    CHECK(d.delta == doctest::Approx(44.0 / 19 - 3));
    REQUIRE(d.percent);
    CHECK(*d.percent == doctest::Approx(100.0 * (44.0 / 19 - 3) / 3));
  }
  CHECK(found);
  auto other = analyze(build_reference_topology(ReferenceKind::mesh, Layout(4, 4)), TrafficMatrix::uniform(16));
  CHECK_THROWS_AS(compare_reports(mesh, other, true), InvalidArgument);
  auto same = compare_reports(mesh, mesh);
  for (const DeltaRow& d : same.rows) CHECK(d.delta == 0);
  CHECK(comparison_csv(same).rfind("field,a,b,delta,percent\n", 0) == 0);
  CHECK(comparison_text(same, "a", "b").find("avg_hops") != std::string::npos);
}

TEST_CASE("local-search cut above the exact limit") {
  auto r = analyze(build_reference_topology(ReferenceKind::mesh, Layout(5, 5)), TrafficMatrix::uniform(25));
  CHECK_FALSE(r.sparsest_cut_exact);
  CHECK_FALSE(r.bisection_bw);
  CHECK(load_report(report_json(r)) == r);
}
