#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "netsmith/rational.hpp"

namespace netsmith {

using RouterId = int;

struct Coord {
  int x = 0;
  int y = 0;
  auto operator<=>(const Coord&) const = default;
};

/// Regular router grid. Ids are row-major: id = y * cols + x.
class Layout {
 public:
  Layout(int rows, int cols);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int size() const { return rows_ * cols_; }

  Coord position(RouterId id) const;
  RouterId id_at(Coord c) const;
  bool contains(RouterId id) const { return id >= 0 && id < size(); }

  /// "RxC", e.g. "4x5".
  std::string to_string() const;
  static Layout parse(std::string_view text);

  bool operator==(const Layout&) const = default;

 private:
  int rows_;
  int cols_;
};

Layout make_grid_layout(int rows, int cols);

/// Absolute coordinate span of a link, (|dx|, |dy|).
struct Offset {
  int dx = 0;
  int dy = 0;
  auto operator<=>(const Offset&) const = default;
};

Offset offset_between(const Layout& layout, RouterId a, RouterId b);

/// Set of allowed link spans. small = {(1,0),(0,1),(1,1)}, medium adds
/// (2,0),(0,2) and large adds (2,1),(1,2).
class LinkClass {
 public:
  enum class Kind { small, medium, large, custom };

  static LinkClass small();
  static LinkClass medium();
  static LinkClass large();
  /// Throws InvalidArgument on an empty set or a (0,0) offset.
  static LinkClass custom(std::set<Offset> offsets);
  /// "small", "medium", "large", or "custom:dx,dy;dx,dy;...".
  static LinkClass parse(std::string_view text);

  Kind kind() const { return kind_; }
  std::string name() const;
  const std::set<Offset>& offsets() const { return offsets_; }
  bool allows(Offset o) const { return offsets_.contains(o); }
  bool allows(const Layout& layout, RouterId a, RouterId b) const {
    return allows(offset_between(layout, a, b));
  }

  bool operator==(const LinkClass& other) const { return offsets_ == other.offsets_; }

 private:
  LinkClass(Kind kind, std::set<Offset> offsets) : kind_(kind), offsets_(std::move(offsets)) {}

  Kind kind_;
  std::set<Offset> offsets_;
};

/// Directed inter-router channel.
struct Channel {
  RouterId src = 0;
  RouterId dst = 0;
  auto operator<=>(const Channel&) const = default;
};

/// All ordered pairs whose offset lies in the class, sorted ascending.
std::vector<Channel> valid_link_set(const Layout& layout, const LinkClass& cls);

/// Directed channel set over a layout. Channels are kept sorted and unique;
/// construction rejects self-links, duplicates, out-of-range ids and, when a
/// link class is given, channels whose span the class does not allow.
class Topology {
 public:
  explicit Topology(Layout layout, std::vector<Channel> channels = {},
                    std::optional<LinkClass> link_class = std::nullopt);

  const Layout& layout() const { return layout_; }
  int size() const { return layout_.size(); }
  std::span<const Channel> channels() const { return channels_; }
  std::size_t channel_count() const { return channels_.size(); }
  /// Reported "link" count: channels / 2.
  Rational link_pairs() const { return Rational(static_cast<std::int64_t>(channels_.size()), 2); }
  bool symmetric() const { return symmetric_; }
  const std::optional<LinkClass>& link_class() const { return link_class_; }

  bool has_channel(RouterId src, RouterId dst) const;
  /// Index of the channel in channels(), or -1.
  int channel_index(RouterId src, RouterId dst) const;
  std::span<const RouterId> out_neighbors(RouterId r) const { return out_[static_cast<std::size_t>(r)]; }
  std::span<const RouterId> in_neighbors(RouterId r) const { return in_[static_cast<std::size_t>(r)]; }

  /// Bitmask adjacency (bit j of out_masks()[i] set iff i->j); only for size() <= 64.
  std::vector<std::uint64_t> out_masks() const;
  std::vector<std::uint64_t> in_masks() const;

  bool operator==(const Topology& other) const {
    return layout_ == other.layout_ && channels_ == other.channels_;
  }

 private:
  Layout layout_;
  std::vector<Channel> channels_;
  std::optional<LinkClass> link_class_;
  std::vector<std::vector<RouterId>> out_;
  std::vector<std::vector<RouterId>> in_;
  bool symmetric_ = true;
};

enum class ReferenceKind { mesh, torus_x, folded_torus };

ReferenceKind parse_reference_kind(std::string_view text);
std::string to_string(ReferenceKind kind);

/// Symmetric reference topologies. Torus kinds need rows >= 2 and cols >= 2;
/// the folded torus interleaves each ring (0,2,4,...,3,1) so no link spans
/// more than two grid units.
Topology build_reference_topology(ReferenceKind kind, const Layout& layout);

/// Smallest of small/medium/large that admits every channel, else nullopt.
std::optional<LinkClass> infer_link_class(const Topology& t);

/// Demand between ordered router pairs.
struct Flow {
  RouterId src = 0;
  RouterId dst = 0;
  Rational weight;
  bool operator==(const Flow&) const = default;
};

/// Normalized demand: nonnegative weights on src != dst pairs summing to 1.
class TrafficMatrix {
 public:
  /// Drops zero weights and self pairs, then normalizes. Throws
  /// InvalidArgument on negative weights, out-of-range ids or zero total.
  TrafficMatrix(int n, std::vector<Flow> flows);

  static TrafficMatrix uniform(int n);
  /// dest = 2*src for src < n/2, else (2*src + 1) mod n; fixed points dropped.
  static TrafficMatrix shuffle(int n);
  /// Each source sends `weight` of its traffic evenly to the hotspot
  /// destinations (other than itself) and the rest uniformly.
  static TrafficMatrix hotspot(int n, const std::vector<RouterId>& dests, const Rational& weight);
  /// `dest_of[src]` must be a bijection on 0..n-1; fixed points are dropped.
  static TrafficMatrix permutation(int n, const std::vector<RouterId>& dest_of);

  int size() const { return n_; }
  std::span<const Flow> flows() const { return flows_; }
  Rational weight(RouterId src, RouterId dst) const;
  /// Total demand leaving `src`.
  Rational row_sum(RouterId src) const;
  /// Number of routers with nonzero outgoing demand.
  int active_sources() const;
  bool is_uniform() const;
  /// Description used in reports, e.g. "uniform" or "shuffle".
  const std::string& label() const { return label_; }

  bool operator==(const TrafficMatrix& other) const { return n_ == other.n_ && flows_ == other.flows_; }

 private:
  int n_;
  std::vector<Flow> flows_;
  std::vector<Rational> dense_;
  std::string label_ = "custom";
};

/// Textual traffic selector: "uniform", "shuffle", "hotspot:D1,D2,...:W",
/// "permutation:d0,d1,...".
TrafficMatrix make_traffic(std::string_view kind, int n);

}  // namespace netsmith
