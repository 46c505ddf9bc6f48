#pragma once

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "netsmith/model.hpp"
#include "netsmith/rational.hpp"

namespace netsmith {

/// Router sequence from source to destination, endpoints included.
using Path = std::vector<RouterId>;

struct FlowKey {
  RouterId src = 0;
  RouterId dst = 0;
  auto operator<=>(const FlowKey&) const = default;
};

/// One chosen path per ordered (source, destination) pair.
class RoutingTable {
 public:
  explicit RoutingTable(int n);

  int size() const { return n_; }
  /// Throws InvalidArgument when the path does not run from src to dst.
  void set(RouterId src, RouterId dst, Path path);
  bool has(RouterId src, RouterId dst) const;
  /// Throws InvalidArgument for an uncovered pair.
  const Path& path(RouterId src, RouterId dst) const;
  /// Covered pairs in ascending order.
  std::vector<FlowKey> flows() const;
  /// True when every ordered pair src != dst has a path.
  bool complete() const;
  /// Every path must be a walk over existing channels.
  void validate(const Topology& t) const;

  bool operator==(const RoutingTable&) const = default;

 private:
  std::size_t index(RouterId src, RouterId dst) const;

  int n_;
  std::vector<Path> paths_;
};

/// Lines "s d : n0>n1>...>nk", ascending (s, d).
std::string save_routing_table(const RoutingTable& rt);
RoutingTable load_routing_table(std::string_view text, int n);

/// Demand-weighted cumulative load per channel.
class LoadMap {
 public:
  void add(Channel c, const Rational& load) { loads_[c] += load; }
  void touch(Channel c) { loads_.try_emplace(c, Rational(0)); }
  const std::map<Channel, Rational>& loads() const { return loads_; }
  Rational at(Channel c) const;
  Rational max() const;
  Rational total() const;

  bool operator==(const LoadMap&) const = default;

 private:
  std::map<Channel, Rational> loads_;
};

/// CSV with header "src,dst,load_numerator,load_denominator".
std::string save_load_map_csv(const LoadMap& loads);
LoadMap load_load_map_csv(std::string_view text);

}  // namespace netsmith
