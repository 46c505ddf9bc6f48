#include "netsmith/pipeline.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <future>
#include <regex>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>

#include "netsmith/deadlock.hpp"
#include "netsmith/metrics.hpp"
#include "netsmith/routing.hpp"
#include "netsmith/seed.hpp"
#include "netsmith/topology_io.hpp"

namespace netsmith {

namespace fs = std::filesystem;
using Json = nlohmann::json;

int error_exit_code(const std::exception& e) {
  if (auto* s = dynamic_cast<const StageError*>(&e)) return s->exit_code();
  if (dynamic_cast<const InvalidArgument*>(&e)) return 2;
  if (dynamic_cast<const CapacityError*>(&e)) return 3;
  if (dynamic_cast<const SolverError*>(&e)) return 4;
  return 1;
}

RouteMode parse_route_mode(std::string_view text) {
  if (text == "mclb") return RouteMode::mclb;
  if (text == "mclb-exact") return RouteMode::mclb_exact;
  if (text == "random") return RouteMode::random;
  if (text == "ndbt" || text == "ndbt-random") return RouteMode::ndbt_random;
  if (text == "ndbt-mclb") return RouteMode::ndbt_mclb;
  throw InvalidArgument(fmt::format("unknown routing mode '{}' (expected mclb, mclb-exact, random, ndbt-random, ndbt-mclb)", text));
}

std::string to_string(RouteMode m) {
  switch (m) {
    case RouteMode::mclb: return "mclb";
    case RouteMode::mclb_exact: return "mclb-exact";
    case RouteMode::random: return "random";
    case RouteMode::ndbt_random: return "ndbt-random";
    case RouteMode::ndbt_mclb: return "ndbt-mclb";
  }
  return "mclb";
}

RouteResult route_topology(const Topology& t, const TrafficMatrix& traffic, const RouteOptions& options) {
  if (options.path_cap < 1) throw InvalidArgument("path cap must be at least 1");
  PathSet ps = enumerate_shortest_paths(t, options.path_cap);
  const bool ndbt = options.mode == RouteMode::ndbt_random || options.mode == RouteMode::ndbt_mclb;
  if (ndbt) ps = ndbt_filter(ps, t.layout());
  RouteResult out{RoutingTable(t.size()), {}, {}, {}};
  if (ndbt) out.fallback_pairs = ps.fallback_pairs();
  for (RouterId s = 0; s < t.size(); ++s)
    for (RouterId d = 0; d < t.size(); ++d)
      if (s != d && ps.truncated(s, d)) out.truncated_pairs.push_back({s, d});
  switch (options.mode) {
    case RouteMode::mclb:
    case RouteMode::ndbt_mclb:
    case RouteMode::mclb_exact: {
      MclbResult r = mclb_route(ps, traffic, options.mode == RouteMode::mclb_exact ? MclbMode::exact : MclbMode::greedy);
      out.table = std::move(r.table);
      out.loads = std::move(r.loads);
      break;
    }
    case RouteMode::random:
    case RouteMode::ndbt_random:
      out.table = random_route(ps, options.seed);
      out.loads = channel_loads(out.table, traffic);
      break;
  }
  return out;
}

void SimParams::apply(SimConfig& cfg) const {
  cfg.vcs_per_layer = vcs_per_layer;
  cfg.buffer_depth_flits = buffer_depth_flits;
  cfg.router_latency_cycles = router_latency_cycles;
  cfg.link_latency_cycles = link_latency_cycles;
  cfg.control_packet_flits = control_packet_flits;
  cfg.data_packet_flits = data_packet_flits;
  cfg.data_packet_fraction = data_packet_fraction;
  cfg.warmup_cycles = warmup_cycles;
  cfg.measure_cycles = measure_cycles;
  cfg.drain_cap_cycles = drain_cap_cycles;
}

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) throw Error("SHA-256 failed");
  std::string out;
  for (unsigned int i = 0; i < len; ++i) out += fmt::format("{:02x}", md[i]);
  return out;
}

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw InvalidArgument(fmt::format("cannot read {}", p.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write {}", p.string()));
  out << text;
}

void check_keys(const Json& j, std::initializer_list<std::string_view> allowed, std::string_view where) {
  if (!j.is_object()) throw ParseError(fmt::format("{} must be a JSON object", where));
  for (const auto& [k, v] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
      throw ParseError(fmt::format("{}: unknown key '{}'", where, k));
  }
}

Rational json_rational(const Json& j) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
  if (j.is_number()) return parse_rational(fmt::format("{}", j.get<double>()));
  throw ParseError("expected a number or rational string");
}

std::uint64_t name_stream(std::string_view name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

TopologySource parse_source(const Json& j, const fs::path& base, std::size_t index) {
  const std::string where = fmt::format("topologies[{}]", index);
  check_keys(j, {"name", "file", "reference", "layout", "synth", "routing"}, where);
  TopologySource s;
  if (!j.contains("name") || !j["name"].is_string()) throw ParseError(where + ": missing string 'name'");
  s.name = j["name"].get<std::string>();
  const int kinds = static_cast<int>(j.contains("file")) + static_cast<int>(j.contains("reference")) + static_cast<int>(j.contains("synth"));
  if (kinds != 1) throw ParseError(where + ": exactly one of 'file', 'reference' or 'synth' is required");
  if (j.contains("routing")) s.routing = parse_route_mode(j["routing"].get<std::string>());
  if (j.contains("file")) {
    s.kind = TopologySource::Kind::file;
    fs::path p = j["file"].get<std::string>();
    s.file = (p.is_absolute() ? p : base / p).lexically_normal().string();
  } else if (j.contains("reference")) {
    s.kind = TopologySource::Kind::reference;
    s.reference = parse_reference_kind(j["reference"].get<std::string>());
    s.layout = Layout::parse(j.value("layout", "4x5"));
  } else {
    s.kind = TopologySource::Kind::synth;
    const Json& y = j["synth"];
    check_keys(y, {"layout", "class", "radix", "radix_out", "radix_in", "symmetric", "diameter_cap", "min_cut", "objective",
                   "traffic", "solver", "solver_command", "budget_s", "restarts", "iterations", "threads", "seed"},
               where + ".synth");
    SynthSpec& sp = s.synth;
    sp.layout = Layout::parse(y.value("layout", "4x5"));
    sp.link_class = LinkClass::parse(y.value("class", "small"));
    const int radix = y.value("radix", 4);
    sp.radix_out = y.value("radix_out", radix);
    sp.radix_in = y.value("radix_in", radix);
    sp.symmetric = y.value("symmetric", false);
    if (y.contains("diameter_cap")) sp.diameter_cap = y["diameter_cap"].get<int>();
    if (y.contains("min_cut")) sp.min_cut_bandwidth = json_rational(y["min_cut"]);
    sp.objective = parse_objective(y.value("objective", "latop"));
    if (y.contains("traffic")) sp.traffic = make_traffic(y["traffic"].get<std::string>(), sp.layout.size());
    s.solver = y.value("solver", "heuristic");
    s.solver_command = y.value("solver_command", "");
    s.budget_s = y.value("budget_s", 600.0);
    s.heuristic.budget_s = s.budget_s;
    s.heuristic.restarts = y.value("restarts", 8);
    s.heuristic.iterations = y.value("iterations", std::uint64_t{0});
    s.heuristic.threads = y.value("threads", 0);
    s.heuristic.seed = y.value("seed", std::uint64_t{0});
  }
  return s;
}

Json synth_params(const TopologySource& s) {
  const SynthSpec& sp = s.synth;
  Json j;
  j["layout"] = sp.layout.to_string();
  Json offsets = Json::array();
  for (const Offset& o : sp.link_class.offsets()) offsets.push_back({o.dx, o.dy});
  j["class"] = offsets;
  j["radix_out"] = sp.radix_out;
  j["radix_in"] = sp.radix_in;
  j["symmetric"] = sp.symmetric;
  j["diameter_cap"] = sp.diameter_cap ? Json(*sp.diameter_cap) : Json(nullptr);
  j["min_cut"] = sp.min_cut_bandwidth ? Json(to_string(*sp.min_cut_bandwidth)) : Json(nullptr);
  j["objective"] = to_string(sp.objective);
  if (sp.traffic) {
    Json flows = Json::array();
    for (const Flow& f : sp.traffic->flows()) flows.push_back({f.src, f.dst, to_string(f.weight)});
    j["traffic"] = flows;
  }
  j["solver"] = s.solver;
  j["solver_command"] = s.solver_command;
  j["restarts"] = s.heuristic.restarts;
  j["iterations"] = s.heuristic.iterations;
  j["budget_s"] = s.budget_s;
  return j;
}

Json sim_params_json(const SimParams& p) {
  return Json{{"vcs_per_layer", p.vcs_per_layer},
              {"buffer_depth", p.buffer_depth_flits},
              {"router_latency", p.router_latency_cycles},
              {"link_latency", p.link_latency_cycles},
              {"control_flits", p.control_packet_flits},
              {"data_flits", p.data_packet_flits},
              {"data_fraction", to_string(p.data_packet_fraction)},
              {"warmup", p.warmup_cycles},
              {"measure", p.measure_cycles},
              {"drain_cap", p.drain_cap_cycles}};
}

/// Stage bookkeeping for one topology directory.
class StageRunner {
 public:
  StageRunner(fs::path root, std::string topo) : root_(std::move(root)), topo_(std::move(topo)) {}

  /// Runs `body` unless the stamp of `inputs` matches and every output exists.
  template <typename Body>
  bool stage(const std::string& name, const Json& inputs, const std::vector<std::string>& outputs, Body&& body) {
    current_ = name;
    const std::string stamp = sha256_hex(name + "\n" + inputs.dump());
    const fs::path stamp_file = dir() / ".stamps" / name;
    bool fresh = fs::exists(stamp_file) && read_file(stamp_file) == stamp + "\n";
    for (const std::string& o : outputs) fresh = fresh && fs::exists(dir() / o);
    if (fresh) {
      ++skipped;
    } else {
      fs::remove(stamp_file);
      body();
      write_file(stamp_file, stamp + "\n");
      ++ran;
    }
    for (const std::string& o : outputs) completed.push_back((fs::path(topo_) / o).string());
    return !fresh;
  }

  fs::path dir() const { return root_ / topo_; }
  std::string file(const std::string& name) const { return (dir() / name).string(); }
  std::string hash(const std::string& name) const { return sha256_hex(read_file(dir() / name)); }
  void write(const std::string& name, const std::string& text) const { write_file(dir() / name, text); }
  std::string read(const std::string& name) const { return read_file(dir() / name); }

  const std::string& current() const { return current_; }

  int ran = 0;
  int skipped = 0;
  std::vector<std::string> completed;

 private:
  fs::path root_;
  std::string topo_;
  std::string current_;
};

struct TopologyOutcome {
  MetricsReport report;
  int ran = 0;
  int skipped = 0;
};

Topology build_source(const TopologySource& s, std::uint64_t seed, Json& synth_out) {
  switch (s.kind) {
    case TopologySource::Kind::file: return load_topology(read_file(s.file));
    case TopologySource::Kind::reference: return build_reference_topology(s.reference, s.layout);
    case TopologySource::Kind::synth: break;
  }
  SolveReport r;
  if (s.solver == "exact") {
    r = solve_exact(s.synth, s.budget_s);
  } else if (s.solver == "external") {
    r = solve_with_external(s.synth, s.solver_command, s.budget_s);
  } else {
    HeuristicOptions h = s.heuristic;
    if (h.seed == 0) h.seed = seed;
    r = solve_heuristic(s.synth, h);
  }
  synth_out = Json{{"objective", to_string(s.synth.objective)},
                   {"objective_value", to_double(r.objective_value)},
                   {"objective_value_exact", to_string(r.objective_value)},
                   {"avg_hops_exact", to_string(r.avg_hops)},
                   {"proven_optimal", r.proven_optimal},
                   {"bounds_gap", r.bounds_gap ? Json(to_string(*r.bounds_gap)) : Json(nullptr)},
                   {"evaluations", r.evaluations}};
  return r.topology;
}

TopologyOutcome run_topology(const ExperimentSpec& spec, const TopologySource& src, const fs::path& root) {
  StageRunner st(root, src.name);
  const std::uint64_t tseed = derive_seed(spec.seed, name_stream(src.name));
  try {
    // topology
    Json tin{{"kind", static_cast<int>(src.kind)}};
    if (src.kind == TopologySource::Kind::file) tin["content"] = sha256_hex(read_file(src.file));
    if (src.kind == TopologySource::Kind::reference) {
      tin["reference"] = to_string(src.reference);
      tin["layout"] = src.layout.to_string();
    }
    std::vector<std::string> touts{"topology.json"};
    if (src.kind == TopologySource::Kind::synth) {
      tin["synth"] = synth_params(src);
      tin["seed"] = src.heuristic.seed == 0 ? tseed : src.heuristic.seed;
      touts.push_back("synth.json");
    }
    st.stage("topology", tin, touts, [&] {
      Json synth_out;
      Topology t = build_source(src, derive_seed(tseed, 1), synth_out);
      st.write("topology.json", save_topology(t));
      if (src.kind == TopologySource::Kind::synth) st.write("synth.json", synth_out.dump(2) + "\n");
    });
    const Topology topo = load_topology(st.read("topology.json"));
    const std::string topo_hash = st.hash("topology.json");
    const TrafficMatrix traffic = make_traffic(spec.traffic, topo.size());

    // analyze
    st.stage("analyze", Json{{"topology", topo_hash}, {"traffic", spec.traffic}}, {"metrics.json"}, [&] {
      st.write("metrics.json", report_json(analyze(topo, traffic, nullptr, src.name)));
    });

    // route
    const RouteMode mode = src.routing.value_or(spec.routing);
    const std::uint64_t route_seed = derive_seed(tseed, 2);
    st.stage("route",
             Json{{"topology", topo_hash}, {"traffic", spec.traffic}, {"mode", to_string(mode)}, {"seed", route_seed}, {"cap", spec.path_cap}},
             {"routing.txt", "loads.csv"}, [&] {
               RouteResult r = route_topology(topo, traffic, {mode, route_seed, spec.path_cap});
               st.write("routing.txt", save_routing_table(r.table));
               st.write("loads.csv", save_load_map_csv(r.loads));
             });
    const RoutingTable table = load_routing_table(st.read("routing.txt"), topo.size());
    const std::string route_hash = st.hash("routing.txt");

    // vcalloc
    const std::uint64_t vc_seed = derive_seed(tseed, 3);
    st.stage("vcalloc",
             Json{{"topology", topo_hash}, {"routing", route_hash}, {"seed", vc_seed}, {"attempts", spec.vc_attempts},
                  {"max_layers", spec.max_layers}, {"balance", spec.balance_layers}},
             {"vc.txt", "vc_summary.json"}, [&] {
               LayeringSearch search = best_layering(topo, table, vc_seed, spec.vc_attempts, spec.max_layers);
               VcAssignment va = spec.balance_layers ? balance_layers(search.assignment, topo, table) : search.assignment;
               if (!verify_assignment(va, topo, table)) throw Error("VC assignment failed verification");
               st.write("vc.txt", save_vc_table(va));
               Json summary = Json::parse(vc_summary_json(va, table));
               summary["layer_counts_per_attempt"] = search.layer_counts;
               st.write("vc_summary.json", summary.dump(2) + "\n");
             });
    const VcAssignment va = load_vc_table(st.read("vc.txt"));

    SimConfig cfg(topo, table, va);
    spec.sim.apply(cfg);
    cfg.seed = derive_seed(tseed, 4);
    MetricsReport report = analyze(topo, traffic, &table, src.name);
    report.routing = to_string(mode);
    report.vc_layers = va.layer_count();
    report.zero_load_latency = zero_load_latency(cfg, traffic);

    // sweep
    if (spec.simulate) {
      Json sin{{"topology", topo_hash}, {"routing", route_hash}, {"vc", st.hash("vc.txt")}, {"traffic", spec.traffic},
               {"sim", sim_params_json(spec.sim)}, {"seed", cfg.seed}, {"rates", spec.sweep.rates},
               {"points", spec.sweep.points}, {"max_fraction", spec.sweep.max_fraction}, {"bisection", spec.sweep.bisection_steps}};
      st.stage("sweep", sin, {"sweep.csv", "saturation.json"}, [&] {
        std::vector<double> rates = spec.sweep.rates;
        if (rates.empty()) {
          const double top = to_double(throughput_bounds(topo, traffic, &table).tightest()) * spec.sweep.max_fraction;
          rates = linear_rates(std::min(top, 1.0), spec.sweep.points);
        }
        Curve curve = sweep(cfg, traffic, rates, spec.threads);
        Saturation sat = saturation_point(cfg, traffic, curve, spec.sweep.bisection_steps);
        st.write("sweep.csv", curve_csv(sat.points));
        Json sj{{"saturation_rate", sat.rate},
                {"last_unsaturated_rate", sat.below},
                {"max_accepted", sat.max_accepted},
                {"zero_load_latency_exact", to_string(sat.zero_load)},
                {"threshold", "avg latency > 3x zero-load or stalled"}};
        st.write("saturation.json", sj.dump(2) + "\n");
      });
      Json sj = Json::parse(st.read("saturation.json"));
      report.measured_saturation = sj.at("saturation_rate").get<double>();
      report.max_accepted = sj.at("max_accepted").get<double>();
    }
    st.write("report.json", report_json(report));
    return {report, st.ran, st.skipped};
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    std::string done = st.completed.empty() ? "none" : fmt::format("{}", fmt::join(st.completed, ", "));
    throw StageError(fmt::format("topology '{}', stage '{}' failed: {} (completed artifacts: {})", src.name, st.current(), e.what(), done),
                     error_exit_code(e), st.completed);
  }
}

std::string fmt_opt(const std::optional<Rational>& r) { return r ? fmt::format("{:.6f}", to_double(*r)) : ""; }
std::string fmt_opt(const std::optional<double>& r) { return r ? fmt::format("{:.6f}", *r) : ""; }

void write_summary(const fs::path& root, const std::vector<MetricsReport>& reports) {
  std::string csv =
      "name,links,diameter,avg_hops,bisection_bw,sparsest_cut,cut_bound,occupancy_bound,mcl_bound,zero_load_latency,"
      "measured_saturation,max_accepted,vc_layers\n";
  std::string pareto = "name,avg_latency_proxy,measured_saturation\n";
  std::string text = fmt::format("{:<16} {:>6} {:>4} {:>8} {:>5} {:>9} {:>9} {:>9} {:>9} {:>9} {:>4}\n", "name", "links", "diam",
                                 "avg_hops", "bisec", "sparsest", "cut_bd", "occ_bd", "mcl_bd", "sat", "vcs");
  for (const MetricsReport& r : reports) {
    csv += fmt::format("{},{},{},{:.6f},{},{:.6f},{:.6f},{:.6f},{},{},{},{},{}\n", r.name, to_string(r.links), r.diameter,
                       to_double(r.avg_hops), r.bisection_bw ? std::to_string(*r.bisection_bw) : "", to_double(r.sparsest_cut),
                       to_double(r.cut_bound), to_double(r.occupancy_bound), fmt_opt(r.mcl_bound), fmt_opt(r.zero_load_latency),
                       fmt_opt(r.measured_saturation), fmt_opt(r.max_accepted), r.vc_layers ? std::to_string(*r.vc_layers) : "");
    pareto += fmt::format("{},{},{}\n", r.name, fmt_opt(r.zero_load_latency), fmt_opt(r.measured_saturation));
    text += fmt::format("{:<16} {:>6} {:>4} {:>8.4f} {:>5} {:>9.5f} {:>9.5f} {:>9.5f} {:>9} {:>9} {:>4}\n", r.name, to_string(r.links),
                        r.diameter, to_double(r.avg_hops), r.bisection_bw ? std::to_string(*r.bisection_bw) : "-",
                        to_double(r.sparsest_cut), to_double(r.cut_bound), to_double(r.occupancy_bound),
                        r.mcl_bound ? fmt::format("{:.5f}", to_double(*r.mcl_bound)) : "-",
                        r.measured_saturation ? fmt::format("{:.5f}", *r.measured_saturation) : "-",
                        r.vc_layers ? std::to_string(*r.vc_layers) : "-");
  }
  write_file(root / "comparison.csv", csv);
  write_file(root / "comparison.txt", text);
  write_file(root / "pareto.csv", pareto);
}

}  // namespace

ExperimentSpec parse_experiment(std::string_view json_text, const std::string& base_dir) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(fmt::format("experiment config is not valid JSON: {}", e.what()));
  }
  try {
    check_keys(j, {"name", "seed", "output", "traffic", "routing", "path_cap", "threads", "simulate", "vc", "sweep", "sim", "topologies"},
               "experiment");
    ExperimentSpec s;
    const fs::path base(base_dir);
    s.name = j.value("name", s.name);
    s.seed = j.value("seed", s.seed);
    fs::path out = j.value("output", s.output);
    s.output = (out.is_absolute() ? out : base / out).lexically_normal().string();
    s.traffic = j.value("traffic", s.traffic);
    if (j.contains("routing")) s.routing = parse_route_mode(j["routing"].get<std::string>());
    s.path_cap = j.value("path_cap", s.path_cap);
    s.threads = j.value("threads", s.threads);
    s.simulate = j.value("simulate", s.simulate);
    if (j.contains("vc")) {
      const Json& v = j["vc"];
      check_keys(v, {"attempts", "max_layers", "balance"}, "vc");
      s.vc_attempts = v.value("attempts", s.vc_attempts);
      s.max_layers = v.value("max_layers", s.max_layers);
      s.balance_layers = v.value("balance", s.balance_layers);
    }
    if (j.contains("sweep")) {
      const Json& w = j["sweep"];
      check_keys(w, {"rates", "points", "max_fraction", "bisection_steps"}, "sweep");
      if (w.contains("rates")) s.sweep.rates = w["rates"].get<std::vector<double>>();
      s.sweep.points = w.value("points", s.sweep.points);
      s.sweep.max_fraction = w.value("max_fraction", s.sweep.max_fraction);
      s.sweep.bisection_steps = w.value("bisection_steps", s.sweep.bisection_steps);
    }
    if (j.contains("sim")) {
      const Json& m = j["sim"];
      check_keys(m, {"vcs_per_layer", "buffer_depth", "router_latency", "link_latency", "control_flits", "data_flits", "data_fraction",
                     "warmup", "measure", "drain_cap"},
                 "sim");
      SimParams& p = s.sim;
      p.vcs_per_layer = m.value("vcs_per_layer", p.vcs_per_layer);
      p.buffer_depth_flits = m.value("buffer_depth", p.buffer_depth_flits);
      p.router_latency_cycles = m.value("router_latency", p.router_latency_cycles);
      p.link_latency_cycles = m.value("link_latency", p.link_latency_cycles);
      p.control_packet_flits = m.value("control_flits", p.control_packet_flits);
      p.data_packet_flits = m.value("data_flits", p.data_packet_flits);
      if (m.contains("data_fraction")) p.data_packet_fraction = json_rational(m["data_fraction"]);
      p.warmup_cycles = m.value("warmup", p.warmup_cycles);
      p.measure_cycles = m.value("measure", p.measure_cycles);
      p.drain_cap_cycles = m.value("drain_cap", p.drain_cap_cycles);
    }
    if (!j.contains("topologies") || !j["topologies"].is_array()) throw ParseError("experiment needs a 'topologies' array");
    for (std::size_t i = 0; i < j["topologies"].size(); ++i) s.topologies.push_back(parse_source(j["topologies"][i], base, i));
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(fmt::format("malformed experiment config: {}", e.what()));
  }
}

ExperimentSpec load_experiment_file(const std::string& path) {
  fs::path p(path);
  if (!fs::exists(p)) throw InvalidArgument(fmt::format("experiment config {} does not exist", path));
  return parse_experiment(read_file(p), p.parent_path().empty() ? "." : p.parent_path().string());
}

void preflight(const ExperimentSpec& spec) {
  std::vector<std::string> problems;
  if (spec.topologies.empty()) problems.push_back("no topologies listed");
  std::set<std::string> names;
  static const std::regex safe("[A-Za-z0-9._-]+");
  for (const TopologySource& s : spec.topologies) {
    if (!std::regex_match(s.name, safe) || s.name == "." || s.name == "..")
      problems.push_back(fmt::format("topology name '{}' must use only letters, digits, '.', '_' or '-'", s.name));
    if (!names.insert(s.name).second) problems.push_back(fmt::format("duplicate topology name '{}'", s.name));
    int n = 0;
    try {
      switch (s.kind) {
        case TopologySource::Kind::file:
          if (!fs::exists(s.file)) {
            problems.push_back(fmt::format("topology '{}': file {} does not exist", s.name, s.file));
            continue;
          }
          n = load_topology(read_file(s.file)).size();
          break;
        case TopologySource::Kind::reference: n = s.layout.size(); break;
        case TopologySource::Kind::synth:
          n = s.synth.layout.size();
          s.synth.validate();
          if (s.solver != "heuristic" && s.solver != "exact" && s.solver != "external")
            problems.push_back(fmt::format("topology '{}': unknown solver '{}'", s.name, s.solver));
          if (s.solver == "external" && s.solver_command.empty())
            problems.push_back(fmt::format("topology '{}': external solver needs solver_command", s.name));
          break;
      }
      make_traffic(spec.traffic, n);
    } catch (const std::exception& e) {
      problems.push_back(fmt::format("topology '{}': {}", s.name, e.what()));
    }
  }
  if (spec.path_cap < 1) problems.push_back("path_cap must be at least 1");
  if (spec.vc_attempts < 1) problems.push_back("vc.attempts must be at least 1");
  if (spec.max_layers < 1) problems.push_back("vc.max_layers must be at least 1");
  if (spec.sweep.rates.empty() && (spec.sweep.points < 1 || !(spec.sweep.max_fraction > 0)))
    problems.push_back("sweep needs rates or positive points and max_fraction");
  if (spec.sweep.bisection_steps < 0) problems.push_back("sweep.bisection_steps must be nonnegative");
  if (!problems.empty()) throw InvalidArgument(fmt::format("pre-flight failed:\n  {}", fmt::join(problems, "\n  ")));
}

PipelineResult run_pipeline(const ExperimentSpec& spec) {
  preflight(spec);
  const fs::path root(spec.output);
  fs::create_directories(root);
  PipelineResult result;
  std::vector<TopologyOutcome> outcomes(spec.topologies.size());
  const unsigned threads = spec.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : spec.threads;
  if (threads <= 1) {
    for (std::size_t i = 0; i < spec.topologies.size(); ++i) outcomes[i] = run_topology(spec, spec.topologies[i], root);
  } else {
    std::vector<std::future<TopologyOutcome>> futures;
    for (const TopologySource& s : spec.topologies)
      futures.push_back(std::async(std::launch::async, run_topology, std::cref(spec), std::cref(s), root));
    std::exception_ptr first;
    for (std::size_t i = 0; i < futures.size(); ++i) {
      try {
        outcomes[i] = futures[i].get();
      } catch (...) {
        if (!first) first = std::current_exception();
      }
    }
    if (first) std::rethrow_exception(first);
  }
  for (TopologyOutcome& o : outcomes) {
    result.reports.push_back(o.report);
    result.stages_run += o.ran;
    result.stages_skipped += o.skipped;
  }
  write_summary(root, result.reports);
  for (const auto& entry : fs::recursive_directory_iterator(root))
    if (entry.is_regular_file()) result.files.push_back(fs::relative(entry.path(), root).generic_string());
  std::sort(result.files.begin(), result.files.end());
  return result;
}

}  // namespace netsmith
