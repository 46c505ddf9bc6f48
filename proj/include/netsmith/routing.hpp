#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "netsmith/metrics.hpp"
#include "netsmith/model.hpp"
#include "netsmith/routing_table.hpp"

namespace netsmith {

inline constexpr int kDefaultPathCap = 64;

/// Shortest paths per ordered pair, at most `cap` each.
class PathSet {
 public:
  PathSet(int n, int cap);

  int size() const { return n_; }
  int cap() const { return cap_; }
  const std::vector<Path>& paths(RouterId src, RouterId dst) const { return cell(src, dst).paths; }
  /// More shortest paths existed than the cap allowed.
  bool truncated(RouterId src, RouterId dst) const { return cell(src, dst).truncated; }
  /// Filtering emptied the pair and the unfiltered set was restored.
  bool fallback(RouterId src, RouterId dst) const { return cell(src, dst).fallback; }

  void set(RouterId src, RouterId dst, std::vector<Path> paths, bool truncated = false, bool fallback = false);

  std::size_t total_paths() const;
  int truncated_pairs() const;
  std::vector<FlowKey> fallback_pairs() const;

 private:
  struct Cell {
    std::vector<Path> paths;
    bool truncated = false;
    bool fallback = false;
  };
  const Cell& cell(RouterId src, RouterId dst) const;
  Cell& cell(RouterId src, RouterId dst);

  int n_;
  int cap_;
  std::vector<Cell> cells_;
};

/// Depth-first enumeration over ascending neighbor ids, so each pair's list
/// is in lexicographic order. Throws DisconnectedError.
PathSet enumerate_shortest_paths(const Topology& t, int cap = kDefaultPathCap);

/// True when the path reverses direction along x (a +x move followed later
/// by a -x move, or the other way round).
bool doubles_back(const Path& p, const Layout& layout);

/// Drops double-back paths. Pairs left empty keep their unfiltered paths and
/// are flagged as fallbacks.
PathSet ndbt_filter(const PathSet& ps, const Layout& layout);

/// Uniform choice per flow from a seeded generator.
RoutingTable random_route(const PathSet& ps, std::uint64_t seed);

enum class MclbMode { exact, greedy };

struct MclbOptions {
  /// Exact mode refuses path sets larger than this.
  std::size_t max_total_paths = 100000;
  /// Search-node budget for exact mode; exhausted budgets return the best
  /// assignment found with proven_optimal = false.
  std::uint64_t node_limit = 50'000'000;
};

struct MclbResult {
  RoutingTable table;
  LoadMap loads;
  bool proven_optimal = false;
  std::uint64_t nodes = 0;
};

/// Single shortest path per flow minimizing the maximum channel load.
MclbResult mclb_route(const PathSet& ps, const TrafficMatrix& traffic, MclbMode mode,
                      const MclbOptions& options = {});

/// Demand-weighted load on every channel used by a route.
LoadMap channel_loads(const RoutingTable& rt, const TrafficMatrix& traffic);
Rational max_channel_load(const LoadMap& loads);

}  // namespace netsmith
