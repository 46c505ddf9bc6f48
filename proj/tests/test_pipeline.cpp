#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "netsmith/errors.hpp"
#include "netsmith/pipeline.hpp"

using namespace netsmith;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("netsmith_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = slurp(e.path());
  return out;
}

std::string small_config(const fs::path& out) {
  return R"({"name":"t","seed":3,"output":")" + out.string() + R"(",
  "sweep":{"points":3,"bisection_steps":1},
  "sim":{"warmup":100,"measure":600,"drain_cap":1500},
  "topologies":[{"name":"mesh","reference":"mesh","layout":"3x3"},
                {"name":"syn","synth":{"layout":"3x3","class":"small","radix":3,"restarts":2,"iterations":4000}}]})";
}

}  // namespace

TEST_CASE("pipeline bundle and resumability") {
  fs::path dir = scratch("bundle");
  ExperimentSpec spec = parse_experiment(small_config(dir / "out"));
  PipelineResult a = run_pipeline(spec);
  CHECK(a.stages_run == 10);
  CHECK(a.stages_skipped == 0);
  REQUIRE(a.reports.size() == 2);
  for (const char* f : {"comparison.csv", "comparison.txt", "pareto.csv", "mesh/topology.json", "mesh/metrics.json",
                        "mesh/routing.txt", "mesh/loads.csv", "mesh/vc.txt", "mesh/vc_summary.json", "mesh/sweep.csv",
                        "mesh/saturation.json", "mesh/report.json", "syn/synth.json"})
    CHECK(fs::exists(dir / "out" / f));
  auto first = snapshot(dir / "out");

  PipelineResult b = run_pipeline(spec);
  CHECK(b.stages_run == 0);
  CHECK(b.stages_skipped == 10);
  CHECK(snapshot(dir / "out") == first);

  fs::remove(dir / "out" / "mesh" / "routing.txt");
  PipelineResult c = run_pipeline(spec);
  CHECK(c.stages_run == 1);
  CHECK(snapshot(dir / "out") == first);

  // A fresh directory reproduces the same bytes.
  ExperimentSpec again = parse_experiment(small_config(dir / "out2"));
  run_pipeline(again);
  CHECK(snapshot(dir / "out2") == first);

  spec.sim.measure_cycles = 700;
  PipelineResult d = run_pipeline(spec);
  CHECK(d.stages_run == 2);
}

TEST_CASE("experiment parsing is strict") {
  CHECK_THROWS_AS(parse_experiment(R"({"topologies":[],"colour":1})"), ParseError);
  CHECK_THROWS_AS(parse_experiment(R"({"topologies":[{"name":"a","reference":"mesh","file":"x.json","layout":"2x2"}]})"),
                  ParseError);
  CHECK_THROWS_AS(parse_experiment("[1,2"), ParseError);
  auto spec = parse_experiment(R"({"topologies":[{"name":"a","file":"t.json"}]})", "/some/dir");
  CHECK(spec.topologies[0].file == "/some/dir/t.json");
}

TEST_CASE("pre-flight lists every problem") {
  ExperimentSpec spec = parse_experiment(R"({"path_cap":0,"topologies":[
      {"name":"bad name","reference":"mesh","layout":"2x2"},
      {"name":"a","file":"/nonexistent/topo.json"},
      {"name":"a","reference":"mesh","layout":"2x2"},
      {"name":"x","synth":{"layout":"2x2","solver":"magic"}}]})");
  try {
    preflight(spec);
    FAIL("pre-flight accepted a broken config");
  } catch (const InvalidArgument& e) {
    std::string msg = e.what();
    CHECK(msg.find("bad name") != std::string::npos);
    CHECK(msg.find("does not exist") != std::string::npos);
    CHECK(msg.find("duplicate") != std::string::npos);
    CHECK(msg.find("magic") != std::string::npos);
    CHECK(msg.find("path_cap") != std::string::npos);
  }
}

TEST_CASE("stage failures name the stage and keep earlier artifacts") {
  fs::path dir = scratch("stagefail");
  ExperimentSpec spec = parse_experiment(R"({"output":")" + (dir / "out").string() + R"(","simulate":false,
      "vc":{"max_layers":1,"attempts":2},
      "topologies":[{"name":"ft","reference":"folded_torus","layout":"4x5"}]})");
  try {
    run_pipeline(spec);
    FAIL("layering with one layer succeeded");
  } catch (const StageError& e) {
    CHECK(e.exit_code() == 3);
    CHECK(std::string(e.what()).find("vcalloc") != std::string::npos);
    CHECK_FALSE(e.completed().empty());
  }
  CHECK(fs::exists(dir / "out" / "ft" / "routing.txt"));
}

TEST_CASE("route modes") {
  CHECK(parse_route_mode("ndbt-mclb") == RouteMode::ndbt_mclb);
  CHECK(to_string(RouteMode::mclb_exact) == "mclb-exact");
  CHECK_THROWS_AS(parse_route_mode("xy"), InvalidArgument);
  auto t = build_reference_topology(ReferenceKind::mesh, Layout(2, 3));
  auto tm = TrafficMatrix::uniform(6);
  for (auto m : {RouteMode::mclb, RouteMode::mclb_exact, RouteMode::random, RouteMode::ndbt_random, RouteMode::ndbt_mclb}) {
    auto r = route_topology(t, tm, {m, 1, 64});
    CHECK(r.table.complete());
    r.table.validate(t);
  }
}

TEST_CASE("exit codes and hashing") {
  CHECK(error_exit_code(InvalidArgument("x")) == 2);
  CHECK(error_exit_code(ParseError("x")) == 2);
  CHECK(error_exit_code(CapacityError("x")) == 3);
  CHECK(error_exit_code(SolverError("x")) == 4);
  CHECK(error_exit_code(std::runtime_error("x")) == 1);
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
