#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "netsmith/errors.hpp"
#include "netsmith/model.hpp"
#include "netsmith/routing_table.hpp"

namespace netsmith {

/// Channel dependency graph. Nodes are channel indices into channels().
class Cdg {
 public:
  explicit Cdg(std::vector<Channel> channels);

  const std::vector<Channel>& channels() const { return channels_; }
  int size() const { return static_cast<int>(channels_.size()); }
  /// Successor channel indices, ascending.
  const std::vector<int>& successors(int c) const { return succ_[static_cast<std::size_t>(c)]; }
  std::size_t edge_count() const;
  bool has_edge(Channel a, Channel b) const;

  void add_edge(int a, int b);
  int index_of(Channel c) const;

 private:
  std::vector<Channel> channels_;
  std::vector<std::vector<int>> succ_;
};

/// Dependencies between consecutive channels of each path. Throws
/// InvalidArgument when a path uses a channel the topology lacks.
Cdg build_cdg(const Topology& t, const std::vector<Path>& paths);
Cdg build_cdg(const Topology& t, const RoutingTable& rt);

/// Some dependency cycle as a channel list (first channel not repeated), or
/// nullopt. Depth-first from ascending channel indices.
std::optional<std::vector<Channel>> find_cycle(const Cdg& cdg);

/// Flows partitioned into virtual-channel layers.
struct VcAssignment {
  std::vector<std::vector<FlowKey>> layers;

  int layer_count() const { return static_cast<int>(layers.size()); }
  /// Throws InvalidArgument for an unassigned flow.
  int layer_of(RouterId src, RouterId dst) const;
  bool operator==(const VcAssignment&) const = default;
};

/// A layer still holds a dependency cycle when no further layer is allowed.
class LayerLimitError : public CapacityError {
 public:
  LayerLimitError(const std::string& what, std::vector<Channel> cycle)
      : CapacityError(what), cycle_(std::move(cycle)) {}
  const std::vector<Channel>& cycle() const { return cycle_; }

 private:
  std::vector<Channel> cycle_;
};

inline constexpr int kDefaultMaxLayers = 6;

/// Moves the paths through a randomly chosen dependency of each found cycle
/// to the next layer until every layer is acyclic.
VcAssignment layer_paths(const Topology& t, const RoutingTable& rt, std::uint64_t seed,
                         int max_layers = kDefaultMaxLayers);

/// Lowest layer count over `attempts` seeds derived from `seed` (first
/// attempt wins ties). Throws LayerLimitError only if every attempt fails.
struct LayeringSearch {
  VcAssignment assignment;
  std::uint64_t seed = 0;
  std::vector<int> layer_counts;  // per attempt, 0 when the attempt failed
};
LayeringSearch best_layering(const Topology& t, const RoutingTable& rt, std::uint64_t seed, int attempts = 20,
                             int max_layers = kDefaultMaxLayers);

/// Hop-count weighted occupancy per layer.
std::vector<int> weighted_occupancy(const VcAssignment& va, const RoutingTable& rt);

/// Moves paths to lighter layers while the target stays acyclic.
VcAssignment balance_layers(const VcAssignment& va, const Topology& t, const RoutingTable& rt);

/// True when layers partition the routed flows and each layer is acyclic.
bool verify_assignment(const VcAssignment& va, const Topology& t, const RoutingTable& rt);

/// Lines "s d : layer".
std::string save_vc_table(const VcAssignment& va);
VcAssignment load_vc_table(std::string_view text);
/// {"layers": L, "weighted_occupancy": [...]}
std::string vc_summary_json(const VcAssignment& va, const RoutingTable& rt);

}  // namespace netsmith
