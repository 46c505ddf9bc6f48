#pragma once

#include <cstdint>
#include <exception>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "netsmith/errors.hpp"
#include "netsmith/model.hpp"
#include "netsmith/report.hpp"
#include "netsmith/routing_table.hpp"
#include "netsmith/sim.hpp"
#include "netsmith/synth.hpp"

namespace netsmith {

/// CLI exit code for an exception: 2 validation, 3 capacity, 4 external
/// solver, 1 anything else.
int error_exit_code(const std::exception& e);

enum class RouteMode { mclb, mclb_exact, random, ndbt_random, ndbt_mclb };
RouteMode parse_route_mode(std::string_view text);
std::string to_string(RouteMode m);

struct RouteOptions {
  RouteMode mode = RouteMode::mclb;
  std::uint64_t seed = 1;
  int path_cap = 64;
};

struct RouteResult {
  RoutingTable table;
  LoadMap loads;
  /// Pairs whose NDBT filter removed every path.
  std::vector<FlowKey> fallback_pairs;
  std::vector<FlowKey> truncated_pairs;
};

RouteResult route_topology(const Topology& t, const TrafficMatrix& traffic, const RouteOptions& options);

/// Simulator knobs shared by every topology of an experiment.
struct SimParams {
  int vcs_per_layer = 1;
  int buffer_depth_flits = 4;
  int router_latency_cycles = 2;
  int link_latency_cycles = 1;
  int control_packet_flits = 1;
  int data_packet_flits = 9;
  Rational data_packet_fraction{1, 2};
  int warmup_cycles = 5000;
  int measure_cycles = 50000;
  int drain_cap_cycles = 50000;

  void apply(SimConfig& cfg) const;
};

struct SweepGrid {
  /// Explicit rates; when empty, `points` rates up to max_fraction times the
  /// tightest analytic bound.
  std::vector<double> rates;
  int points = 12;
  double max_fraction = 1.0;
  int bisection_steps = 4;
};

struct TopologySource {
  enum class Kind { file, reference, synth };
  std::string name;
  Kind kind = Kind::reference;
  std::string file;
  ReferenceKind reference = ReferenceKind::mesh;
  Layout layout{4, 5};
  SynthSpec synth;
  /// heuristic, exact or external
  std::string solver = "heuristic";
  HeuristicOptions heuristic;
  std::string solver_command;
  double budget_s = 600;
  std::optional<RouteMode> routing;
};

struct ExperimentSpec {
  std::string name = "experiment";
  std::uint64_t seed = 1;
  std::string output = "bundle";
  std::string traffic = "uniform";
  RouteMode routing = RouteMode::mclb;
  int path_cap = 64;
  int vc_attempts = 20;
  int max_layers = kDefaultMaxLayers;
  bool balance_layers = true;
  bool simulate = true;
  SweepGrid sweep;
  SimParams sim;
  /// Worker threads across topologies and sweep rates; 0 uses the hardware
  /// concurrency.
  unsigned threads = 1;
  std::vector<TopologySource> topologies;
};

/// Parses the JSON config. Relative file paths resolve against `base_dir`.
ExperimentSpec parse_experiment(std::string_view json_text, const std::string& base_dir = ".");
ExperimentSpec load_experiment_file(const std::string& path);

/// Checks names, files and per-topology settings before any stage runs.
/// Throws InvalidArgument listing every problem found.
void preflight(const ExperimentSpec& spec);

/// A pipeline stage failed. The message names the topology and stage and
/// lists the artifacts already written.
class StageError : public Error {
 public:
  StageError(const std::string& what, int exit_code, std::vector<std::string> completed)
      : Error(what), exit_code_(exit_code), completed_(std::move(completed)) {}
  int exit_code() const { return exit_code_; }
  const std::vector<std::string>& completed() const { return completed_; }

 private:
  int exit_code_;
  std::vector<std::string> completed_;
};

struct PipelineResult {
  std::vector<MetricsReport> reports;
  /// Bundle files relative to the output directory, sorted.
  std::vector<std::string> files;
  int stages_run = 0;
  int stages_skipped = 0;
};

/// Stages per topology: topology, analyze, route, vcalloc, sweep. A stage
/// is skipped when its outputs exist and the SHA-256 stamp of its inputs is
/// unchanged. Writes comparison.csv, comparison.txt and pareto.csv at the
/// top of the bundle.
PipelineResult run_pipeline(const ExperimentSpec& spec);

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

}  // namespace netsmith
