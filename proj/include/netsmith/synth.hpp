#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "netsmith/metrics.hpp"
#include "netsmith/model.hpp"
#include "netsmith/rational.hpp"

namespace netsmith {

enum class Objective { latop, scop };

Objective parse_objective(std::string_view text);
std::string to_string(Objective o);

struct SynthSpec {
  Layout layout{1, 1};
  LinkClass link_class = LinkClass::small();
  int radix_out = 4;
  int radix_in = 4;
  bool symmetric = false;
  std::optional<int> diameter_cap;
  std::optional<Rational> min_cut_bandwidth;
  Objective objective = Objective::latop;
  /// LatOp weighting; uniform when absent.
  std::optional<TrafficMatrix> traffic;

  /// Throws InvalidArgument for radix < 1, negative caps or a traffic size mismatch.
  void validate() const;
  TopologyConstraints constraints() const;
};

/// One line of solver progress. For LatOp the incumbent is avg hops and the
/// bound a lower bound; for SCOp the incumbent is the scaled sparsest cut and
/// the bound an upper bound.
struct ProgressRecord {
  double time_s = 0;
  double incumbent = 0;
  std::optional<double> bound;
};

/// CSV with header "time_s,incumbent,bound" (empty bound when unknown).
std::string progress_csv(const std::vector<ProgressRecord>& records);

struct SolveReport {
  Topology topology{Layout(1, 1)};
  /// Avg hops (demand weighted when the spec carries traffic) for LatOp,
  /// scaled sparsest cut for SCOp.
  Rational objective_value;
  /// Avg hops of the returned topology, the SCOp tie-break.
  Rational avg_hops;
  std::optional<Rational> bounds_gap;
  bool proven_optimal = false;
  double wall_time = 0;
  std::uint64_t evaluations = 0;
  std::vector<ProgressRecord> progress;

  /// Equality ignoring wall-clock fields.
  bool same_result(const SolveReport& other) const;
};

/// Objective of a topology under the spec: (objective value, avg hops).
/// Throws DisconnectedError for disconnected topologies.
std::pair<Rational, Rational> evaluate_objective(const Topology& t, const SynthSpec& spec);

inline constexpr int kExactSolverLimit = 10;

/// Branch and bound over candidate links with exact objective evaluation.
/// Throws CapacityError above kExactSolverLimit routers and InfeasibleSpec
/// when the search proves no feasible topology exists.
SolveReport solve_exact(const SynthSpec& spec, double budget_s);

struct HeuristicOptions {
  double budget_s = 600;
  std::uint64_t seed = 1;
  int restarts = 8;
  /// Annealing steps per restart; 0 picks a default for the objective.
  std::uint64_t iterations = 0;
  /// Worker threads for restarts; 0 uses the hardware concurrency.
  int threads = 0;
};

/// Simulated annealing with a steepest-descent polish. Deterministic for a
/// given seed, restart count and iteration count; the time budget only caps
/// runaway runs. Throws InfeasibleSpec when no restart finds a feasible topology.
SolveReport solve_heuristic(const SynthSpec& spec, const HeuristicOptions& options = {});

/// Runs an external MILP solver. `command` may contain {lp}, {sol} and
/// {time}; when {lp} is absent the LP and solution paths are appended. SCOp
/// adds violated cut rows and re-solves until the exact sparsest cut of the
/// incumbent matches the solver's B.
SolveReport solve_with_external(const SynthSpec& spec, const std::string& command, double budget_s);

/// Mesh channels allowed by the class, dropped greedily to respect the radix.
Topology seed_topology(const SynthSpec& spec);

}  // namespace netsmith
