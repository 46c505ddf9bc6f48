// Acceptance checks, one PASS/FAIL line per criterion.
// Usage: netsmith_acceptance [criterion numbers...]

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "generators.hpp"
#include "netsmith/deadlock.hpp"
#include "netsmith/errors.hpp"
#include "netsmith/metrics.hpp"
#include "netsmith/pipeline.hpp"
#include "netsmith/routing.hpp"
#include "netsmith/sim.hpp"
#include "netsmith/synth.hpp"
#include "oracles.hpp"

using namespace netsmith;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
  bool pass = false;
  std::string detail;
};

const Layout kLayout(4, 5);

SynthSpec spec_for(const LinkClass& cls, Objective obj) {
  SynthSpec s;
  s.layout = kLayout;
  s.link_class = cls;
  s.radix_out = s.radix_in = 4;
  s.objective = obj;
  return s;
}

HeuristicOptions heuristic(double budget_s) {
  HeuristicOptions o;
  o.budget_s = budget_s;
  o.seed = 1;
  o.restarts = 8;
  return o;
}

struct Routed {
  Topology topology;
  RoutingTable table;
  ThroughputBounds bounds;
};

Routed route(const Topology& t, bool mclb) {
  auto tm = TrafficMatrix::uniform(t.size());
  auto ps = enumerate_shortest_paths(t);
  RoutingTable rt = mclb ? mclb_route(ps, tm, MclbMode::greedy).table : random_route(ps, 1);
  return {t, rt, throughput_bounds(t, tm, &rt)};
}

struct SimOutcome {
  double saturation = 0;
  double tightest_bound = 0;
  int layers = 0;
  double seconds = 0;
};

// Shared topologies and simulation results, built on first use.
class Context {
 public:
  const SolveReport& synth(const std::string& key) {
    auto it = synth_.find(key);
    if (it != synth_.end()) return it->second;
    SynthSpec s = key == "small-latop"    ? spec_for(LinkClass::small(), Objective::latop)
                  : key == "small-scop"   ? spec_for(LinkClass::small(), Objective::scop)
                  : key == "medium-latop" ? spec_for(LinkClass::medium(), Objective::latop)
                  : key == "medium-scop"  ? spec_for(LinkClass::medium(), Objective::scop)
                  : key == "large-latop"  ? spec_for(LinkClass::large(), Objective::latop)
                                          : spec_for(LinkClass::small(), Objective::latop);
    if (key == "shuffle-latop") s.traffic = TrafficMatrix::shuffle(kLayout.size());
    const double budget = key.starts_with("small") || key.starts_with("shuffle") ? 600 : 1800;
    return synth_.emplace(key, solve_heuristic(s, heuristic(budget))).first->second;
  }

  Topology topology(const std::string& key) {
    if (key == "mesh") return build_reference_topology(ReferenceKind::mesh, kLayout);
    if (key == "torus_x") return build_reference_topology(ReferenceKind::torus_x, kLayout);
    if (key == "folded_torus") return build_reference_topology(ReferenceKind::folded_torus, kLayout);
    return synth(key).topology;
  }

  /// Saturation under uniform traffic with default simulator settings: 12
  /// rates up to the tightest MCLB-routed bound, 50k measured cycles.
  const SimOutcome& saturation(const std::string& key, bool mclb) {
    const std::string id = key + (mclb ? "/mclb" : "/random");
    auto it = sims_.find(id);
    if (it != sims_.end()) return it->second;
    const auto t0 = Clock::now();
    Topology t = topology(key);
    Routed reference = route(t, true);
    Routed r = mclb ? reference : route(t, false);
    auto tm = TrafficMatrix::uniform(t.size());
    auto va = best_layering(t, r.table, 1, 20);
    SimConfig cfg(t, r.table, balance_layers(va.assignment, t, r.table));
    cfg.seed = 1;
    const double top = std::min(1.0, to_double(reference.bounds.tightest()));
    Curve curve = sweep(cfg, tm, linear_rates(top, 12), 1);
    Saturation sat = saturation_point(cfg, tm, curve, 4);
    SimOutcome out{sat.rate, to_double(r.bounds.tightest()), va.assignment.layer_count(), seconds_since(t0)};
    fmt::print("    sim {:<16} sat {:.4f} bound {:.4f} layers {} ({:.0f} s)\n", id, out.saturation, out.tightest_bound, out.layers,
               out.seconds);
    std::fflush(stdout);
    return sims_.emplace(id, out).first->second;
  }

 private:
  std::map<std::string, SolveReport> synth_;
  std::map<std::string, SimOutcome> sims_;
};

std::string hops_text(const Rational& r) { return fmt::format("{:.4f} ({})", to_double(r), to_string(r)); }

Verdict c1_folded_torus(Context&) {
  const auto t0 = Clock::now();
  Topology ft = build_reference_topology(ReferenceKind::folded_torus, kLayout);
  auto dm = apsp(ft);
  const Rational links = ft.link_pairs(), hops = avg_hops(dm);
  const int diam = diameter(dm), bisec = bisection_bandwidth(ft);
  const double secs = seconds_since(t0);
  const bool ok = links == 40 && diam == 4 && hops == Rational(880, 380) && std::round(to_double(hops) * 100) == 232 &&
                  bisec == 10 && secs < 1.0;
  return {ok, fmt::format("links {}, diameter {}, avg hops {}, bisection {}, {:.3f} s", to_string(links), diam, hops_text(hops),
                          bisec, secs)};
}

Verdict c2_mesh(Context&) {
  const auto t0 = Clock::now();
  Topology mesh = build_reference_topology(ReferenceKind::mesh, kLayout);
  const Rational hops = avg_hops(apsp(mesh));
  const Rational bfs = oracle::avg_hops(oracle::all_pairs(oracle::graph_of(mesh)));
  const double secs = seconds_since(t0);
  return {hops == 3 && bfs == 3 && secs < 1.0, fmt::format("avg hops {}, BFS oracle {}, {:.3f} s", to_string(hops), to_string(bfs), secs)};
}

Verdict c3_exact_vs_enumeration(Context&) {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  int specs = 0, feasible = 0, mismatches = 0;
  std::string first_mismatch;
  while (feasible < 50) {
    SynthSpec spec = gen::tiny_spec(rng, 16);
    ++specs;
    bool any_feasible = false;
    for (Objective obj : {Objective::latop, Objective::scop}) {
      SynthSpec s = spec;
      s.objective = obj;
      if (obj == Objective::scop) s.traffic.reset();
      auto expect = gen::brute_force(s);
      std::string got;
      bool match = false;
      try {
        SolveReport r = solve_exact(s, 120);
        got = to_string(r.objective_value);
        match = expect.feasible && r.proven_optimal && r.objective_value == expect.best &&
                (obj == Objective::latop || r.avg_hops == expect.tie_hops);
      } catch (const InfeasibleSpec&) {
        got = "infeasible";
        match = !expect.feasible;
      }
      any_feasible = any_feasible || expect.feasible;
      if (!match) {
        ++mismatches;
        if (first_mismatch.empty())
          first_mismatch = fmt::format("; first mismatch {} {} {}: solver {} vs {}", s.layout.to_string(), s.link_class.name(),
                                       to_string(obj), got, expect.feasible ? to_string(expect.best) : "infeasible");
      }
    }
    feasible += any_feasible;
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && secs < 300,
          fmt::format("{} specs ({} feasible) x 2 objectives, {} mismatches, {:.1f} s{}", specs, feasible, mismatches, secs,
                      first_mismatch)};
}

Verdict c4_small_class(Context& ctx) {
  const auto& lat = ctx.synth("small-latop");
  const auto& sc = ctx.synth("small-scop");
  const int bisec = bisection_bandwidth(sc.topology);
  const Rational sc_hops = avg_hops(apsp(sc.topology));
  const bool ok = to_double(lat.objective_value) <= 2.41 && bisec >= 8 && to_double(sc_hops) <= 2.45;
  return {ok, fmt::format("LatOp avg hops {} (<= 2.41, {:.1f} s); SCOp bisection {} (>= 8), avg hops {} (<= 2.45, {:.1f} s)",
                          hops_text(lat.objective_value), lat.wall_time, bisec, hops_text(sc_hops), sc.wall_time)};
}

Verdict c5_medium_large(Context& ctx) {
  const auto& med = ctx.synth("medium-latop");
  const auto& lg = ctx.synth("large-latop");
  const int lg_diam = diameter(apsp(lg.topology));
  const bool ok = to_double(med.objective_value) < 2.32 && to_double(lg.objective_value) < 2.32 && lg_diam <= 4;
  return {ok, fmt::format("medium avg hops {} ({:.1f} s); large avg hops {}, diameter {} ({:.1f} s)", hops_text(med.objective_value),
                          med.wall_time, hops_text(lg.objective_value), lg_diam, lg.wall_time)};
}

Verdict c6_mclb(Context&) {
  std::mt19937_64 rng(606);
  static const std::vector<Layout> layouts{{2, 4}, {2, 3}, {1, 8}, {3, 2}, {1, 7}, {2, 2}};
  int checked = 0, mismatches = 0;
  double largest = 0;
  while (checked < 10) {
    Layout l = layouts[rng() % layouts.size()];
    auto t = oracle::random_topology(rng, l, rng() % 2 ? LinkClass::medium() : LinkClass::large(), 0.45);
    if (!t) continue;
    auto ps = enumerate_shortest_paths(*t);
    auto tm = TrafficMatrix::uniform(t->size());
    std::vector<std::vector<Path>> choices;
    std::vector<Rational> weights;
    double product = 1;
    for (const auto& f : tm.flows()) {
      choices.push_back(ps.paths(f.src, f.dst));
      weights.push_back(f.weight);
      product *= static_cast<double>(choices.back().size());
    }
    if (product > 1e4 || product < 16) continue;
    ++checked;
    largest = std::max(largest, product);
    auto r = mclb_route(ps, tm, MclbMode::exact);
    if (!r.proven_optimal || max_channel_load(r.loads) != oracle::brute_force_mcl(choices, weights)) ++mismatches;
  }
  return {mismatches == 0, fmt::format("{} topologies, up to {:.0f} selections, {} mismatches", checked, largest, mismatches)};
}

Verdict c7_deadlock(Context& ctx) {
  const std::vector<std::string> keys{"mesh", "torus_x", "folded_torus", "small-latop", "small-scop",
                                      "medium-latop", "medium-scop", "large-latop", "shuffle-latop"};
  std::vector<std::string> failures;
  std::string summary;
  for (const auto& key : keys) {
    Topology t = ctx.topology(key);
    Routed r = route(t, true);
    auto search = best_layering(t, r.table, 1, 20);
    const int best = search.assignment.layer_count();
    bool acyclic = true;
    for (const auto& layer : search.assignment.layers) {
      std::vector<Path> paths;
      for (const FlowKey& f : layer) paths.push_back(r.table.path(f.src, f.dst));
      acyclic = acyclic && oracle::dependencies_acyclic(paths);
    }
    SimConfig cfg(t, r.table, search.assignment);
    const double rate = std::min(1.0, to_double(r.bounds.tightest()));
    DrainResult d = drain_test(cfg, TrafficMatrix::uniform(t.size()), rate, 5000);
    const bool ok = best <= 4 && acyclic && d.drained && d.remaining == 0;
    if (!ok) failures.push_back(key);
    summary += fmt::format("{}{}:{}L/{}", summary.empty() ? "" : ", ", key, best, d.drained ? "drained" : "STUCK");
  }
  return {failures.empty(), summary + (failures.empty() ? "" : fmt::format("; failed: {}", fmt::join(failures, " ")))};
}

Verdict c8_bound_dominance(Context& ctx) {
  bool ok = true;
  std::string detail;
  for (const std::string key : {"mesh", "folded_torus", "medium-latop"}) {
    const auto& m = ctx.saturation(key, true);
    const auto& r = ctx.saturation(key, false);
    const bool dominated = m.saturation <= m.tightest_bound * 1.02 && r.saturation <= r.tightest_bound * 1.02;
    const bool ordered = m.saturation >= r.saturation;
    ok = ok && dominated && ordered;
    detail += fmt::format("{}{}: mclb {:.4f}/{:.4f} random {:.4f}/{:.4f}", detail.empty() ? "" : "; ", key, m.saturation,
                          m.tightest_bound, r.saturation, r.tightest_bound);
  }
  return {ok, detail + " (saturation/bound)"};
}

Verdict c9_ordering(Context& ctx) {
  const double scop = ctx.saturation("medium-scop", true).saturation;
  const double latop = ctx.saturation("medium-latop", true).saturation;
  const double ft = ctx.saturation("folded_torus", true).saturation;
  const double mesh = ctx.saturation("mesh", true).saturation;
  const bool ok = scop >= latop && latop >= ft && ft >= mesh;
  return {ok, fmt::format("SCOp {:.4f} >= LatOp {:.4f} >= folded torus {:.4f} >= mesh {:.4f} (medium-class syntheses)", scop, latop,
                          ft, mesh)};
}

Verdict c10_shuffle(Context& ctx) {
  auto shuffle = TrafficMatrix::shuffle(kLayout.size());
  const Rational specialized = weighted_avg_hops(apsp(ctx.synth("shuffle-latop").topology), shuffle);
  const Rational general = weighted_avg_hops(apsp(ctx.synth("small-latop").topology), shuffle);
  return {specialized < general,
          fmt::format("shuffle-weighted hops: shuffle-optimized {} vs uniform-optimized {}", hops_text(specialized), hops_text(general))};
}

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    out[fs::relative(e.path(), root).string()] = s.str();
  }
  return out;
}

Verdict c11_determinism(Context&) {
  const fs::path base = fs::temp_directory_path() / "netsmith_acceptance_determinism";
  fs::remove_all(base);
  auto config = [&](const std::string& out, int threads) {
    return parse_experiment(fmt::format(R"({{"name":"det","seed":11,"output":"{}","threads":{},
      "sweep":{{"points":6,"bisection_steps":2}},
      "sim":{{"warmup":1000,"measure":5000,"drain_cap":10000}},
      "topologies":[{{"name":"mesh","reference":"mesh","layout":"4x5"}},
                    {{"name":"ft","reference":"folded_torus","layout":"4x5"}},
                    {{"name":"lat","synth":{{"layout":"4x5","class":"small","restarts":2,"iterations":50000}}}}]}})",
                                        (base / out).string(), threads));
  };
  run_pipeline(config("a", 1));
  auto first = snapshot(base / "a");
  PipelineResult rerun = run_pipeline(config("a", 1));
  auto second = snapshot(base / "a");
  run_pipeline(config("b", 2));
  auto fresh = snapshot(base / "b");
  const bool ok = !first.empty() && first == second && first == fresh && rerun.stages_run == 0;
  return {ok, fmt::format("{} files; in-place rerun {} ({} stages skipped); fresh 2-thread run {}", first.size(),
                          first == second ? "identical" : "DIFFERS", rerun.stages_skipped, first == fresh ? "identical" : "DIFFERS")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Verdict(Context&)>>> criteria{
      {"folded torus reproduction", c1_folded_torus},
      {"mesh baseline against BFS", c2_mesh},
      {"exact synthesis equals enumeration", c3_exact_vs_enumeration},
      {"small-class synthesis targets", c4_small_class},
      {"medium/large synthesis beats folded torus", c5_medium_large},
      {"exact MCLB equals brute force", c6_mclb},
      {"deadlock freedom within 4 layers", c7_deadlock},
      {"simulated saturation under analytic bounds", c8_bound_dominance},
      {"saturation ordering", c9_ordering},
      {"shuffle specialization", c10_shuffle},
      {"pipeline determinism", c11_determinism},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  Context ctx;
  int failed = 0;
  const auto start = Clock::now();
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int number = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.contains(number)) continue;
    const auto t0 = Clock::now();
    Verdict v;
    try {
      v = criteria[i].second(ctx);
    } catch (const std::exception& e) {
      v = {false, fmt::format("error: {}", e.what())};
    }
    failed += !v.pass;
    fmt::print("[{}] {:>2}. {}: {} [{:.1f} s]\n", v.pass ? "PASS" : "FAIL", number, criteria[i].first, v.detail, seconds_since(t0));
    std::fflush(stdout);
  }
  fmt::print("{} failed, total {:.0f} s\n", failed, seconds_since(start));
  return failed == 0 ? 0 : 1;
}
