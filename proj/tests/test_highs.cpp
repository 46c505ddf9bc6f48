#include <doctest.h>

#include "netsmith/errors.hpp"
#include "netsmith/metrics.hpp"
#include "netsmith/synth.hpp"

using namespace netsmith;

namespace {

std::string highs_command() { return std::string("python3 ") + NETSMITH_HIGHS_SCRIPT + " {lp} {sol} {time}"; }

}  // namespace

TEST_CASE("HiGHS matches the exact solver on LatOp") {
  for (auto layout : {Layout(2, 2), Layout(2, 3)}) {
    SynthSpec s;
    s.layout = layout;
    s.radix_out = s.radix_in = 3;
    auto ext = solve_with_external(s, highs_command(), 120);
    auto ref = solve_exact(s, 120);
    CHECK(ext.objective_value == ref.objective_value);
    CHECK(check_constraints(ext.topology, s.constraints()).empty());
  }
}

TEST_CASE("HiGHS with row-generated cuts matches the exact solver on SCOp") {
  SynthSpec s;
  s.layout = Layout(2, 3);
  s.objective = Objective::scop;
  auto ext = solve_with_external(s, highs_command(), 120);
  auto ref = solve_exact(s, 120);
  CHECK(ext.objective_value == ref.objective_value);
  CHECK_FALSE(ext.progress.empty());
}

TEST_CASE("HiGHS honours a diameter cap") {
  SynthSpec s;
  s.layout = Layout(1, 5);
  s.link_class = LinkClass::medium();
  s.radix_out = s.radix_in = 2;
  s.diameter_cap = 3;
  auto ext = solve_with_external(s, highs_command(), 120);
  CHECK(diameter(apsp(ext.topology)) <= 3);
  CHECK(ext.objective_value == solve_exact(s, 120).objective_value);
}
