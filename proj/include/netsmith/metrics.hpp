#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "netsmith/model.hpp"
#include "netsmith/rational.hpp"
#include "netsmith/routing_table.hpp"

namespace netsmith {

/// All-pairs minimum hop counts. Unreachable pairs have no value.
class DistanceMatrix {
 public:
  explicit DistanceMatrix(int n);

  int size() const { return n_; }
  std::optional<int> distance(RouterId i, RouterId j) const;
  bool reachable(RouterId i, RouterId j) const { return raw(i, j) != kUnreachable; }
  /// Throws DisconnectedError when j is unreachable from i.
  int hops(RouterId i, RouterId j) const;

  void set(RouterId i, RouterId j, std::optional<int> d);

  bool operator==(const DistanceMatrix&) const = default;

 private:
  static constexpr int kUnreachable = -1;
  int raw(RouterId i, RouterId j) const {
    return d_[static_cast<std::size_t>(i) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(j)];
  }

  int n_;
  std::vector<int> d_;
};

/// Floyd-Warshall over unit-length channels.
DistanceMatrix apsp(const Topology& t);

/// Mean over ordered pairs s != d. Throws DisconnectedError.
Rational avg_hops(const DistanceMatrix& dm);
/// Demand-weighted mean hop count. Throws DisconnectedError when a demanded
/// pair is unreachable.
Rational weighted_avg_hops(const DistanceMatrix& dm, const TrafficMatrix& traffic);
/// Largest finite distance.
int diameter(const DistanceMatrix& dm);
bool is_connected(const DistanceMatrix& dm);

/// Bipartition with its crossing channel counts.
struct CutReport {
  std::vector<RouterId> u;
  std::vector<RouterId> v;
  int forward_channels = 0;  // u -> v
  int reverse_channels = 0;  // v -> u
  /// min(forward, reverse) / (|u| * |v|)
  Rational scaled_bandwidth;
};

CutReport make_cut_report(const Topology& t, const std::vector<bool>& in_u);

enum class CutMode { exact, local_search };

/// Largest router count for exhaustive bipartition enumeration.
inline constexpr int kExactCutLimit = 24;

/// Exact mode enumerates all 2^(N-1)-1 bipartitions (Gray code); it throws
/// CapacityError above kExactCutLimit. Local search returns an upper bound
/// with its witnessing partition.
CutReport sparsest_cut(const Topology& t, CutMode mode = CutMode::exact);

/// Minimum over balanced bipartitions (||U|-|V|| <= 1) of the per-direction
/// crossing count. Throws CapacityError above kExactCutLimit.
CutReport bisection_cut(const Topology& t);
int bisection_bandwidth(const Topology& t);

/// Saturation-rate ceilings in flits per active node per cycle.
struct ThroughputBounds {
  Rational cut_bound;
  Rational occupancy_bound;
  std::optional<Rational> mcl_bound;
  /// False when the cut bound came from local search (N > kExactCutLimit).
  bool cut_bound_exact = true;

  Rational tightest() const;
};

/// occupancy = C / (A * sum w*d), cut = min over directed cuts of
/// fwd / (A * demand(U->V)), mcl = 1 / (A * max channel load), where A is
/// the number of routers with outgoing demand and w the normalized demand.
/// For uniform traffic these reduce to C/(N*h), (N-1)*fwd/(|U||V|) and
/// 1/(N*MCL). Throws DisconnectedError.
ThroughputBounds throughput_bounds(const Topology& t, const TrafficMatrix& traffic,
                                   const RoutingTable* routing = nullptr);

/// Structural constraints a synthesized topology must satisfy.
struct TopologyConstraints {
  int radix_out = 4;
  int radix_in = 4;
  std::optional<LinkClass> link_class;
  std::optional<int> diameter_cap;
  bool symmetric = false;
  std::optional<Rational> min_cut_bandwidth;
};

/// Independent post-hoc validator. Returns human-readable violations; empty
/// means the topology is connected and satisfies every constraint.
std::vector<std::string> check_constraints(const Topology& t, const TopologyConstraints& c);

}  // namespace netsmith
