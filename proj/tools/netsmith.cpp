#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include "netsmith/deadlock.hpp"
#include "netsmith/errors.hpp"
#include "netsmith/metrics.hpp"
#include "netsmith/milp.hpp"
#include "netsmith/pipeline.hpp"
#include "netsmith/report.hpp"
#include "netsmith/routing.hpp"
#include "netsmith/sim.hpp"
#include "netsmith/synth.hpp"
#include "netsmith/topology_io.hpp"

using namespace netsmith;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument(fmt::format("cannot read {}", path));
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write {}", path));
  out << text;
}

struct TopologyArgs {
  std::string file;
  std::string reference;
  std::string layout = "4x5";

  void add(CLI::App* app) {
    app->add_option("-t,--topology", file, "Topology JSON file");
    app->add_option("--reference", reference, "Reference topology: mesh, torus_x, folded_torus");
    app->add_option("--layout", layout, "Grid layout RxC for --reference")->capture_default_str();
  }
  Topology load() const {
    if (!file.empty() && !reference.empty()) throw InvalidArgument("give either --topology or --reference, not both");
    if (!file.empty()) return load_topology(slurp(file));
    if (!reference.empty()) return build_reference_topology(parse_reference_kind(reference), Layout::parse(layout));
    throw InvalidArgument("a topology is required (--topology FILE or --reference KIND)");
  }
};

struct SpecArgs {
  std::string layout = "4x5";
  std::string link_class = "small";
  int radix = 4;
  int radix_out = 0;
  int radix_in = 0;
  bool symmetric = false;
  int diameter_cap = -1;
  std::string min_cut;
  std::string objective = "latop";
  std::string traffic;

  void add(CLI::App* app) {
    app->add_option("--layout", layout, "Grid layout RxC")->capture_default_str();
    app->add_option("--class", link_class, "Link class: small, medium, large or custom:dx,dy;...")->capture_default_str();
    app->add_option("--radix", radix, "Radix for both directions")->capture_default_str();
    app->add_option("--radix-out", radix_out, "Output radix (overrides --radix)");
    app->add_option("--radix-in", radix_in, "Input radix (overrides --radix)");
    app->add_flag("--symmetric", symmetric, "Force bidirectional links");
    app->add_option("--diameter-cap", diameter_cap, "Maximum hop distance");
    app->add_option("--min-cut", min_cut, "Minimum scaled sparsest cut, e.g. 1/25");
    app->add_option("--objective", objective, "latop or scop")->capture_default_str();
    app->add_option("--traffic", traffic, "LatOp weighting: uniform, shuffle, hotspot:D:W, permutation:...");
  }
  SynthSpec build() const {
    SynthSpec s;
    s.layout = Layout::parse(layout);
    s.link_class = LinkClass::parse(link_class);
    s.radix_out = radix_out > 0 ? radix_out : radix;
    s.radix_in = radix_in > 0 ? radix_in : radix;
    s.symmetric = symmetric;
    if (diameter_cap >= 0) s.diameter_cap = diameter_cap;
    if (!min_cut.empty()) s.min_cut_bandwidth = parse_rational(min_cut);
    s.objective = parse_objective(objective);
    if (!traffic.empty()) s.traffic = make_traffic(traffic, s.layout.size());
    s.validate();
    return s;
  }
};

struct SimArgs {
  std::string routing_file;
  std::string vc_file;
  std::string mode = "mclb";
  std::string traffic = "uniform";
  SimParams params;
  std::string data_fraction = "1/2";
  std::uint64_t seed = 1;
  double clock_ghz = 0;

  void add(CLI::App* app) {
    app->add_option("--routing", routing_file, "Routing table file (default: route with --mode)");
    app->add_option("--mode", mode, "Routing mode when no table is given")->capture_default_str();
    app->add_option("--vc", vc_file, "VC table file (default: best of 20 layerings)");
    app->add_option("--traffic", traffic, "Traffic pattern")->capture_default_str();
    app->add_option("--vcs-per-layer", params.vcs_per_layer)->capture_default_str();
    app->add_option("--buffer-depth", params.buffer_depth_flits, "Flits per VC buffer")->capture_default_str();
    app->add_option("--router-latency", params.router_latency_cycles, "Cycles per router")->capture_default_str();
    app->add_option("--link-latency", params.link_latency_cycles, "Cycles per link")->capture_default_str();
    app->add_option("--control-flits", params.control_packet_flits)->capture_default_str();
    app->add_option("--data-flits", params.data_packet_flits)->capture_default_str();
    app->add_option("--data-fraction", data_fraction, "Share of data packets")->capture_default_str();
    app->add_option("--warmup", params.warmup_cycles)->capture_default_str();
    app->add_option("--measure", params.measure_cycles)->capture_default_str();
    app->add_option("--drain-cap", params.drain_cap_cycles)->capture_default_str();
    app->add_option("--seed", seed)->capture_default_str();
    app->add_option("--clock-ghz", clock_ghz, "Report rates per ns and latencies in ns");
  }

  SimConfig build(const Topology& t, const TrafficMatrix& tm) {
    RoutingTable rt = routing_file.empty() ? route_topology(t, tm, {parse_route_mode(mode), seed, 64}).table
                                           : load_routing_table(slurp(routing_file), t.size());
    VcAssignment va = vc_file.empty() ? best_layering(t, rt, seed).assignment : load_vc_table(slurp(vc_file));
    params.data_packet_fraction = parse_rational(data_fraction);
    SimConfig cfg(t, rt, va);
    params.apply(cfg);
    cfg.seed = seed;
    cfg.validate();
    return cfg;
  }
  std::optional<double> clock() const { return clock_ghz > 0 ? std::optional<double>(clock_ghz) : std::nullopt; }
};

std::vector<double> parse_rates(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InvalidArgument(fmt::format("bad rate '{}'", item));
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Network-on-interposer topology synthesis, analysis, routing, VC allocation and simulation"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  // synth
  SpecArgs synth_spec;
  std::string solver = "heuristic", solver_cmd, synth_out, synth_report, synth_progress;
  double budget = 600;
  HeuristicOptions hopts;
  auto* synth = app.add_subcommand("synth", "Synthesize a topology");
  synth_spec.add(synth);
  synth->add_option("--solver", solver, "heuristic, exact or external")->capture_default_str();
  synth->add_option("--solver-cmd", solver_cmd, "External MILP command with {lp}, {sol}, {time}");
  synth->add_option("--budget", budget, "Time budget in seconds")->capture_default_str();
  synth->add_option("--seed", hopts.seed)->capture_default_str();
  synth->add_option("--restarts", hopts.restarts)->capture_default_str();
  synth->add_option("--iterations", hopts.iterations, "Annealing steps per restart (0 = default)");
  synth->add_option("--threads", hopts.threads, "Worker threads (0 = all cores)");
  synth->add_option("-o,--output", synth_out, "Topology JSON output");
  synth->add_option("--report", synth_report, "Solve report JSON");
  synth->add_option("--progress", synth_progress, "Progress CSV");

  // analyze
  TopologyArgs an_topo;
  std::string an_traffic = "uniform", an_routing, an_json, an_name;
  auto* analyze_cmd = app.add_subcommand("analyze", "Metrics and throughput bounds");
  an_topo.add(analyze_cmd);
  analyze_cmd->add_option("--traffic", an_traffic)->capture_default_str();
  analyze_cmd->add_option("--routing", an_routing, "Routing table for the MCL bound");
  analyze_cmd->add_option("--json", an_json, "Write the JSON report here ('-' for stdout)");
  analyze_cmd->add_option("--name", an_name);

  // route
  TopologyArgs rt_topo;
  std::string rt_mode = "mclb", rt_traffic = "uniform", rt_out, rt_loads;
  std::uint64_t rt_seed = 1;
  int rt_cap = kDefaultPathCap;
  auto* route = app.add_subcommand("route", "Choose one shortest path per flow");
  rt_topo.add(route);
  route->add_option("--mode", rt_mode, "mclb, mclb-exact, random, ndbt-random, ndbt-mclb")->capture_default_str();
  route->add_option("--traffic", rt_traffic)->capture_default_str();
  route->add_option("--seed", rt_seed)->capture_default_str();
  route->add_option("--path-cap", rt_cap)->capture_default_str();
  route->add_option("-o,--output", rt_out, "Routing table output");
  route->add_option("--loads", rt_loads, "Channel load CSV output");

  // vcalloc
  TopologyArgs vc_topo;
  std::string vc_routing, vc_out, vc_summary;
  std::uint64_t vc_seed = 1;
  int vc_attempts = 20, vc_max = kDefaultMaxLayers;
  bool vc_no_balance = false;
  auto* vcalloc = app.add_subcommand("vcalloc", "Deadlock-free VC layering");
  vc_topo.add(vcalloc);
  vcalloc->add_option("--routing", vc_routing, "Routing table file")->required();
  vcalloc->add_option("--seed", vc_seed)->capture_default_str();
  vcalloc->add_option("--attempts", vc_attempts)->capture_default_str();
  vcalloc->add_option("--max-layers", vc_max)->capture_default_str();
  vcalloc->add_flag("--no-balance", vc_no_balance, "Skip occupancy balancing");
  vcalloc->add_option("-o,--output", vc_out, "VC table output");
  vcalloc->add_option("--summary", vc_summary, "Summary JSON output");

  // simulate
  TopologyArgs sim_topo;
  SimArgs sim_args;
  double sim_rate = 0.1;
  std::string sim_json;
  auto* simulate_cmd = app.add_subcommand("simulate", "Simulate one injection rate");
  sim_topo.add(simulate_cmd);
  sim_args.add(simulate_cmd);
  simulate_cmd->add_option("--rate", sim_rate, "Offered flits/node/cycle")->capture_default_str();
  simulate_cmd->add_option("--json", sim_json, "RunStats JSON output");

  // sweep
  TopologyArgs sw_topo;
  SimArgs sw_args;
  std::string sw_rates, sw_out;
  double sw_max = 0;
  int sw_points = 12, sw_bisect = 4;
  unsigned sw_threads = 0;
  auto* sweep_cmd = app.add_subcommand("sweep", "Latency vs injection rate curve and saturation");
  sw_topo.add(sweep_cmd);
  sw_args.add(sweep_cmd);
  sweep_cmd->add_option("--rates", sw_rates, "Comma-separated rates");
  sweep_cmd->add_option("--max-rate", sw_max, "Sweep up to this rate (default: tightest bound)");
  sweep_cmd->add_option("--points", sw_points)->capture_default_str();
  sweep_cmd->add_option("--bisection", sw_bisect, "Saturation bisection steps")->capture_default_str();
  sweep_cmd->add_option("--threads", sw_threads, "Parallel runs (0 = all cores)");
  sweep_cmd->add_option("-o,--output", sw_out, "Curve CSV output");

  // pipeline
  std::string pl_config, pl_output;
  int pl_threads = -1;
  auto* pipeline = app.add_subcommand("pipeline", "Run a JSON experiment end to end");
  pipeline->add_option("config", pl_config, "Experiment JSON")->required();
  pipeline->add_option("--output", pl_output, "Override the output directory");
  pipeline->add_option("--threads", pl_threads, "Override worker threads");

  // compare
  std::string cmp_a, cmp_b, cmp_csv;
  bool cmp_force = false;
  auto* compare = app.add_subcommand("compare", "Field-wise deltas of two reports");
  compare->add_option("a", cmp_a, "Report JSON")->required();
  compare->add_option("b", cmp_b, "Report JSON")->required();
  compare->add_flag("--force", cmp_force, "Compare across link classes");
  compare->add_option("--csv", cmp_csv, "Delta CSV output");

  // export-lp
  SpecArgs lp_spec;
  std::string lp_cuts = "none", lp_encoding = "per-pair", lp_out;
  std::size_t lp_limit = 0;
  auto* export_lp_cmd = app.add_subcommand("export-lp", "Write the MILP in CPLEX LP format");
  lp_spec.add(export_lp_cmd);
  export_lp_cmd->add_option("--cuts", lp_cuts, "none, stub or explicit")->capture_default_str();
  export_lp_cmd->add_option("--cut-limit", lp_limit, "Cuts to emit in explicit mode (0 = all)");
  export_lp_cmd->add_option("--diameter-encoding", lp_encoding, "per-pair or row-sum")->capture_default_str();
  export_lp_cmd->add_option("-o,--output", lp_out);

  // export-dot
  TopologyArgs dot_topo;
  std::string dot_name = "noi", dot_out;
  auto* export_dot_cmd = app.add_subcommand("export-dot", "Graphviz rendering");
  dot_topo.add(export_dot_cmd);
  export_dot_cmd->add_option("--name", dot_name)->capture_default_str();
  export_dot_cmd->add_option("-o,--output", dot_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*synth) {
      SynthSpec spec = synth_spec.build();
      SolveReport r;
      if (solver == "exact") {
        r = solve_exact(spec, budget);
      } else if (solver == "external") {
        if (solver_cmd.empty()) throw InvalidArgument("--solver external needs --solver-cmd");
        r = solve_with_external(spec, solver_cmd, budget);
      } else if (solver == "heuristic") {
        hopts.budget_s = budget;
        r = solve_heuristic(spec, hopts);
      } else {
        throw InvalidArgument(fmt::format("unknown solver '{}'", solver));
      }
      emit(synth_out, save_topology(r.topology));
      std::string summary = fmt::format(
          "{{\n  \"objective\": \"{}\",\n  \"objective_value\": \"{}\",\n  \"avg_hops\": \"{}\",\n  \"proven_optimal\": {},\n"
          "  \"bounds_gap\": {},\n  \"evaluations\": {},\n  \"wall_time_s\": {:.3f}\n}}\n",
          to_string(spec.objective), to_string(r.objective_value), to_string(r.avg_hops), r.proven_optimal,
          r.bounds_gap ? "\"" + to_string(*r.bounds_gap) + "\"" : "null", r.evaluations, r.wall_time);
      if (!synth_report.empty()) emit(synth_report, summary);
      if (!synth_progress.empty()) emit(synth_progress, progress_csv(r.progress));
      std::cerr << fmt::format("{} = {} ({:.4f}), avg hops {:.4f}, {}, {:.1f} s\n", to_string(spec.objective),
                               to_string(r.objective_value), to_double(r.objective_value), to_double(r.avg_hops),
                               r.proven_optimal ? "proven optimal" : "not proven optimal", r.wall_time);
    } else if (*analyze_cmd) {
      Topology t = an_topo.load();
      TrafficMatrix tm = make_traffic(an_traffic, t.size());
      std::optional<RoutingTable> rt;
      if (!an_routing.empty()) rt = load_routing_table(slurp(an_routing), t.size());
      MetricsReport r = analyze(t, tm, rt ? &*rt : nullptr, an_name);
      if (!an_json.empty()) emit(an_json, report_json(r));
      if (an_json != "-") std::cout << report_text(r);
    } else if (*route) {
      Topology t = rt_topo.load();
      TrafficMatrix tm = make_traffic(rt_traffic, t.size());
      RouteResult r = route_topology(t, tm, {parse_route_mode(rt_mode), rt_seed, rt_cap});
      emit(rt_out, save_routing_table(r.table));
      if (!rt_loads.empty()) emit(rt_loads, save_load_map_csv(r.loads));
      std::cerr << fmt::format("max channel load {} ({:.4f}); {} truncated pairs; {} NDBT fallback pairs\n",
                               to_string(max_channel_load(r.loads)), to_double(max_channel_load(r.loads)),
                               r.truncated_pairs.size(), r.fallback_pairs.size());
    } else if (*vcalloc) {
      Topology t = vc_topo.load();
      RoutingTable rt = load_routing_table(slurp(vc_routing), t.size());
      LayeringSearch s = best_layering(t, rt, vc_seed, vc_attempts, vc_max);
      VcAssignment va = vc_no_balance ? s.assignment : balance_layers(s.assignment, t, rt);
      emit(vc_out, save_vc_table(va));
      if (!vc_summary.empty()) emit(vc_summary, vc_summary_json(va, rt));
      std::cerr << fmt::format("{} layers; per-attempt layer counts [{}]; occupancy [{}]\n", va.layer_count(),
                               fmt::join(s.layer_counts, ", "), fmt::join(weighted_occupancy(va, rt), ", "));
    } else if (*simulate_cmd) {
      Topology t = sim_topo.load();
      TrafficMatrix tm = make_traffic(sim_args.traffic, t.size());
      SimConfig cfg = sim_args.build(t, tm);
      RunStats s = simulate(cfg, tm, sim_rate);
      const double scale = sim_args.clock().value_or(1.0);
      const std::string unit = sim_args.clock() ? "ns" : "cycles";
      std::string json = fmt::format(
          "{{\n  \"offered_rate\": {:.6f},\n  \"generated_rate\": {:.6f},\n  \"accepted_rate\": {:.6f},\n"
          "  \"avg_packet_latency\": {:.4f},\n  \"p99_latency\": {:.4f},\n  \"latency_unit\": \"{}\",\n"
          "  \"packets_measured\": {},\n  \"stalled\": {},\n  \"zero_load_latency_cycles\": \"{}\"\n}}\n",
          s.offered_rate * scale, s.generated_rate * scale, s.accepted_rate * scale, to_double(s.avg_packet_latency_cycles) / scale,
          to_double(s.p99_latency) / scale, unit, s.packets_measured, s.stalled, to_string(zero_load_latency(cfg, tm)));
      emit(sim_json, json);
    } else if (*sweep_cmd) {
      Topology t = sw_topo.load();
      TrafficMatrix tm = make_traffic(sw_args.traffic, t.size());
      SimConfig cfg = sw_args.build(t, tm);
      std::vector<double> rates;
      if (!sw_rates.empty()) {
        rates = parse_rates(sw_rates);
      } else {
        double top = sw_max > 0 ? sw_max : std::min(1.0, to_double(throughput_bounds(t, tm, &cfg.routing).tightest()));
        rates = linear_rates(top, sw_points);
      }
      Curve curve = sweep(cfg, tm, rates, sw_threads);
      Curve out = curve;
      std::string note;
      if (sw_bisect >= 0) {
        try {
          Saturation sat = saturation_point(cfg, tm, curve, sw_bisect);
          out = sat.points;
          const double scale = sw_args.clock().value_or(1.0);
          note = fmt::format("saturation {:.5f}, max accepted {:.5f} {}, zero-load latency {:.3f} cycles\n", sat.rate * scale,
                             sat.max_accepted * scale, sw_args.clock() ? "flits/node/ns" : "flits/node/cycle",
                             to_double(sat.zero_load));
        } catch (const InvalidArgument& e) {
          note = fmt::format("{}\n", e.what());
        }
      }
      emit(sw_out, curve_csv(out, sw_args.clock()));
      std::cerr << note;
    } else if (*pipeline) {
      ExperimentSpec spec = load_experiment_file(pl_config);
      if (!pl_output.empty()) spec.output = pl_output;
      if (pl_threads >= 0) spec.threads = static_cast<unsigned>(pl_threads);
      PipelineResult r = run_pipeline(spec);
      std::cout << slurp(spec.output + "/comparison.txt");
      std::cerr << fmt::format("{} stages run, {} skipped; bundle in {}\n", r.stages_run, r.stages_skipped, spec.output);
    } else if (*compare) {
      MetricsReport a = load_report_file(cmp_a);
      MetricsReport b = load_report_file(cmp_b);
      Comparison c = compare_reports(a, b, cmp_force);
      std::cout << comparison_text(c, a.name.empty() ? "a" : a.name, b.name.empty() ? "b" : b.name);
      if (!cmp_csv.empty()) emit(cmp_csv, comparison_csv(c));
    } else if (*export_lp_cmd) {
      SynthSpec spec = lp_spec.build();
      BuildOptions bo;
      if (lp_encoding == "row-sum") {
        bo.diameter_encoding = DiameterEncoding::row_sum;
      } else if (lp_encoding != "per-pair") {
        throw InvalidArgument(fmt::format("unknown diameter encoding '{}'", lp_encoding));
      }
      CutEmission cuts;
      if (lp_cuts == "stub") {
        cuts.mode = CutEmission::Mode::row_generation_stub;
      } else if (lp_cuts == "explicit") {
        cuts.mode = CutEmission::Mode::explicit_cuts;
      } else if (lp_cuts != "none") {
        throw InvalidArgument(fmt::format("unknown cut mode '{}'", lp_cuts));
      }
      cuts.limit = lp_limit;
      if (cuts.mode == CutEmission::Mode::explicit_cuts && lp_limit == 0) {
        const int n = spec.layout.size();
        if (n >= 62) throw CapacityError(fmt::format("{} routers give too many cuts to export explicitly", n));
        cuts.limit = (std::size_t{1} << n) - 2;
      }
      emit(lp_out, export_lp(build_model(spec, bo), cuts));
    } else if (*export_dot_cmd) {
      emit(dot_out, export_dot(dot_topo.load(), dot_name));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return error_exit_code(e);
  }
  return 0;
}
