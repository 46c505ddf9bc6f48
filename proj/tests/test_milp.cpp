#include <doctest.h>

#include <cmath>
#include <random>

#include <fmt/format.h>

#include "generators.hpp"
#include "netsmith/errors.hpp"
#include "netsmith/milp.hpp"
#include "oracles.hpp"

using namespace netsmith;

namespace {

using Assignment = std::map<std::string, double>;

// Values a correct model must accept for topology t.
Assignment assignment_for(const MilpModel& m, const Topology& t) {
  Assignment a;
  const int n = t.size();
  for (const Channel& c : m.candidates) {
    const bool on = t.has_channel(c.src, c.dst);
    a[fmt::format("M_{}_{}", c.src, c.dst)] = on;
    if (m.has_distances) a[fmt::format("O_{}_{}", c.src, c.dst)] = on ? 1.0 : static_cast<double>(m.big);
  }
  if (m.has_distances) {
    auto d = oracle::all_pairs(oracle::graph_of(t));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        const int dij = d[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        a[fmt::format("D_{}_{}", i, j)] = dij;
        bool picked = false;
        for (const Channel& c : m.candidates) {
          if (c.dst != j) continue;
          const int k = c.src;
          const double dik = k == i ? 0 : d[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
          const bool hit = !picked && t.has_channel(k, j) && dij == dik + 1;
          picked = picked || hit;
          a[fmt::format("sigma_{}_{}_{}", i, j, k)] = hit;
        }
      }
  }
  if (m.find("B") >= 0) {
    auto r = oracle::sparsest_cut(n, {t.channels().begin(), t.channels().end()});
    a["B"] = static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
  }
  return a;
}

bool row_holds(const MilpModel& m, const MilpRow& r, const Assignment& a) {
  double lhs = 0;
  for (const MilpTerm& t : r.terms) lhs += static_cast<double>(t.coef) * a.at(m.vars[static_cast<std::size_t>(t.var)].name);
  const double rhs = static_cast<double>(r.rhs);
  switch (r.sense) {
    case RowSense::le: return lhs <= rhs + 1e-9;
    case RowSense::ge: return lhs >= rhs - 1e-9;
    case RowSense::eq: return std::abs(lhs - rhs) <= 1e-9;
  }
  return false;
}

int violated_rows(const MilpModel& m, const Assignment& a) {
  int bad = 0;
  for (const MilpRow& r : m.rows) bad += !row_holds(m, r, a);
  return bad;
}

}  // namespace

TEST_CASE("model accepts the optimum of random tiny specs") {
  std::mt19937_64 rng(202);
  int checked = 0;
  for (int trial = 0; trial < 30 && checked < 10; ++trial) {
    SynthSpec spec = gen::tiny_spec(rng, 14);
    spec.objective = trial % 2 ? Objective::scop : Objective::latop;
    if (spec.objective == Objective::scop) spec.traffic.reset();
    if (!gen::brute_force(spec).feasible) continue;
    ++checked;
    auto sol = solve_exact(spec, 60);
    for (auto enc : {DiameterEncoding::per_pair, DiameterEncoding::row_sum}) {
      MilpModel m = build_model(spec, {enc});
      Assignment a = assignment_for(m, sol.topology);
      if (enc == DiameterEncoding::per_pair || !spec.diameter_cap) CHECK(violated_rows(m, a) == 0);
      if (spec.objective == Objective::latop) {
        double obj = 0;
        for (const MilpTerm& t : m.objective) obj += static_cast<double>(t.coef) * a.at(m.vars[static_cast<std::size_t>(t.var)].name);
        double total = 0;
        for (const MilpTerm& t : m.objective) total += static_cast<double>(t.coef);
        CHECK(obj / total == doctest::Approx(to_double(sol.objective_value)));
      } else {
        const int n = spec.layout.size();
        for (std::uint32_t mask = 1; mask + 1 < (1u << n); ++mask) {
          std::vector<bool> in_u(static_cast<std::size_t>(n));
          for (int b = 0; b < n; ++b) in_u[static_cast<std::size_t>(b)] = mask >> b & 1u;
          CHECK(row_holds(m, cut_row(m, in_u), a));
        }
      }
      if (enc == DiameterEncoding::per_pair) CHECK(import_solution(m, a) == sol.topology);
    }
  }
  CHECK(checked >= 6);
}

TEST_CASE("distance rows pin shortest paths") {
  SynthSpec spec;
  spec.layout = Layout(2, 3);
  auto sol = solve_exact(spec, 60);
  MilpModel m = build_model(spec);
  Assignment a = assignment_for(m, sol.topology);
  REQUIRE(violated_rows(m, a) == 0);
  for (const char* name : {"D_0_5", "D_3_1"}) {
    Assignment b = a;
    b[name] += 1;
    CHECK(violated_rows(m, b) > 0);
    CHECK_THROWS_AS(import_solution(m, b), SolverError);
  }
}

TEST_CASE("solution import rejects bad values") {
  SynthSpec spec;
  spec.layout = Layout(2, 2);
  MilpModel m = build_model(spec);
  Topology full(spec.layout, valid_link_set(spec.layout, spec.link_class));
  Assignment a = assignment_for(m, full);
  CHECK(import_solution(m, a) == full);
  Assignment frac = a;
  frac["M_0_1"] = 0.5;
  CHECK_THROWS_AS(import_solution(m, frac), SolverError);
  Assignment missing = a;
  missing.erase("M_0_1");
  CHECK_THROWS_AS(import_solution(m, missing), SolverError);
  spec.radix_out = spec.radix_in = 2;
  MilpModel tight = build_model(spec);
  CHECK_THROWS_AS(import_solution(tight, assignment_for(tight, full)), SolverError);
}

TEST_CASE("LP export") {
  SynthSpec spec;
  spec.layout = Layout(2, 2);
  spec.objective = Objective::scop;
  MilpModel m = build_model(spec);
  CHECK(m.maximize);
  CHECK_FALSE(m.has_distances);
  std::string plain = export_lp(m);
  for (const char* s : {"Maximize", "Subject To", "Bounds", "Binaries", "End"}) CHECK(plain.find(s) != std::string::npos);
  CHECK(plain.find(" cut_") == std::string::npos);

  std::string all = export_lp(m, {CutEmission::Mode::explicit_cuts, 1000});
  std::size_t cuts = 0;
  for (std::size_t pos = 0; (pos = all.find("\n cut_", pos)) != std::string::npos; ++pos) ++cuts;
  CHECK(cuts == 14);
  std::string some = export_lp(m, {CutEmission::Mode::explicit_cuts, 3});
  cuts = 0;
  for (std::size_t pos = 0; (pos = some.find("\n cut_", pos)) != std::string::npos; ++pos) ++cuts;
  CHECK(cuts == 3);
  CHECK_THROWS_AS(export_lp(m, {CutEmission::Mode::explicit_cuts, kExplicitCutLimit + 1}), CapacityError);

  spec.objective = Objective::latop;
  spec.diameter_cap = 2;
  MilpModel lat = build_model(spec, {DiameterEncoding::row_sum});
  CHECK(lat.has_row("diam_0"));
  CHECK(build_model(spec).has_row("diam_0_1"));
  std::string text = export_lp(lat);
  CHECK(text.find("Minimize") != std::string::npos);
  CHECK(text.find("Generals") != std::string::npos);
  for (std::size_t pos = 0, next; pos < text.size(); pos = next + 1) {
    next = text.find('\n', pos);
    if (next == std::string::npos) next = text.size();
    CHECK(next - pos <= 80);
  }
  spec.diameter_cap = 0;
  CHECK_THROWS_AS(build_model(spec), InfeasibleSpec);
}

TEST_CASE("solution file parsing") {
  auto s = parse_solution("# status optimal\n# gap 0.25\nM_0_1 1\nB 0.5\n\n");
  CHECK(s.values.at("M_0_1") == 1.0);
  CHECK(s.values.at("B") == 0.5);
  REQUIRE(s.gap);
  CHECK(*s.gap == 0.25);
  CHECK_THROWS_AS(parse_solution("M_0_1\n"), SolverError);
  CHECK_THROWS_AS(parse_solution("M_0_1 1 2\n"), SolverError);
}
