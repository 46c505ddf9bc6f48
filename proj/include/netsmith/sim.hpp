#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "netsmith/deadlock.hpp"
#include "netsmith/model.hpp"
#include "netsmith/rational.hpp"
#include "netsmith/routing_table.hpp"

namespace netsmith {

/// Cycle-level simulation parameters. Latencies and window lengths are in
/// cycles, packet sizes in flits.
struct SimConfig {
  SimConfig(Topology t, RoutingTable rt, VcAssignment va)
      : topology(std::move(t)), routing(std::move(rt)), vcs(std::move(va)) {}

  Topology topology;
  RoutingTable routing;
  VcAssignment vcs;
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
  std::uint64_t seed = 1;

  /// Throws InvalidArgument for nonpositive sizes or latencies, a fraction
  /// outside [0,1], or an invalid routing table.
  void validate() const;
};

/// Rates are flits per active source per cycle. `offered_rate` is the
/// requested rate, `generated_rate` what the sources actually produced in
/// the measurement window.
struct RunStats {
  double offered_rate = 0;
  double generated_rate = 0;
  double accepted_rate = 0;
  Rational avg_packet_latency_cycles{0};
  Rational p99_latency{0};
  std::int64_t packets_measured = 0;
  bool stalled = false;
  /// Delivered packets faster than their analytic zero-load latency.
  std::int64_t latency_floor_violations = 0;

  bool operator==(const RunStats&) const = default;
};

using Curve = std::vector<RunStats>;

/// Demand-weighted zero-load packet latency:
/// mean over flows of (h+1)*router + h*link, plus mean packet flits - 1.
Rational zero_load_latency(const SimConfig& cfg, const TrafficMatrix& traffic);
/// Zero-load latency of one packet over h hops.
std::int64_t packet_zero_load_latency(const SimConfig& cfg, int hops, int flits);

/// Stepwise simulator over one topology, routing and VC assignment.
class Simulator {
 public:
  /// Throws InvalidArgument when a demanded flow lacks a path or a layer.
  Simulator(const SimConfig& cfg, const TrafficMatrix& traffic, double rate);
  ~Simulator();
  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

  void step();
  /// Sources stop generating packets; queued packets still enter.
  void stop_injection();
  std::int64_t cycle() const;
  /// Flits that entered router buffers.
  std::int64_t flits_injected() const;
  std::int64_t flits_delivered() const;
  /// Flits in buffers and on links, counted by a full scan.
  std::int64_t flits_in_network() const;
  /// Packets waiting at the sources or partially injected.
  std::int64_t packets_at_sources() const;
  /// Cycles since a flit last entered the network or crossed a switch.
  std::int64_t idle_cycles() const;

  /// Warmup, measurement window, then drain until every measured packet
  /// arrives or drain_cap_cycles pass.
  RunStats run();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

RunStats simulate(const SimConfig& cfg, const TrafficMatrix& traffic, double rate);

/// Independent runs, one per rate, each seeded from (cfg.seed, rate).
/// Rates must be strictly increasing and positive. threads = 0 uses the
/// hardware concurrency.
Curve sweep(const SimConfig& cfg, const TrafficMatrix& traffic, const std::vector<double>& rates,
            unsigned threads = 0);

/// Evenly spaced rates step, 2*step, ..., count*step.
std::vector<double> linear_rates(double max_rate, int count);

struct Saturation {
  /// Smallest offered rate found saturated.
  double rate = 0;
  /// Largest offered rate found unsaturated.
  double below = 0;
  double max_accepted = 0;
  Rational zero_load{0};
  /// Swept and bisection points, ascending by offered rate.
  Curve points;
};

/// A point is saturated when it stalled or its average latency exceeds
/// 3x the zero-load latency.
bool is_saturated(const RunStats& s, const Rational& zero_load);

/// First saturated swept rate without refinement. Throws InvalidArgument
/// ("extend sweep") when no point saturates.
Saturation saturation_point(const Curve& curve, const Rational& zero_load);
/// Bisects between the last unsaturated and first saturated swept rates.
Saturation saturation_point(const SimConfig& cfg, const TrafficMatrix& traffic, const Curve& curve,
                            int bisection_steps = 4);

struct DrainResult {
  bool drained = false;
  std::int64_t in_flight_at_stop = 0;
  std::int64_t queued_at_stop = 0;
  std::int64_t drain_cycles = 0;
  /// Flits still in the network when the drain gave up.
  std::int64_t remaining = 0;
  /// True when no flit moved for 1000 cycles while flits were in flight.
  bool deadlocked = false;
};

/// Loads the network at `rate` for `load_cycles`, stops injection and runs
/// until sources and network are empty or drain_cap_cycles pass.
DrainResult drain_test(const SimConfig& cfg, const TrafficMatrix& traffic, double rate, int load_cycles);

/// Header "offered_rate,accepted_rate,avg_latency_cycles,p99,packets".
/// With a clock in GHz, rates become flits/node/ns and latencies ns.
std::string curve_csv(const Curve& curve, std::optional<double> clock_ghz = std::nullopt);

}  // namespace netsmith
