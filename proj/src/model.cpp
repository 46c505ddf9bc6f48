#include "netsmith/model.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <numeric>
#include <string>

#include "netsmith/errors.hpp"

namespace netsmith {

namespace {

int parse_positive(std::string_view text, std::string_view what) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw InvalidArgument("bad " + std::string(what) + ": '" + std::string(text) + "'");
  }
  return value;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

}  // namespace

// ---------------------------------------------------------------------------
// Layout

Layout::Layout(int rows, int cols) : rows_(rows), cols_(cols) {
  if (rows < 1 || cols < 1) {
    throw InvalidArgument("layout dimensions must be positive, got " + std::to_string(rows) + "x" +
                          std::to_string(cols));
  }
}

Coord Layout::position(RouterId id) const {
  if (!contains(id)) throw InvalidArgument("router id " + std::to_string(id) + " out of range");
  return Coord{id % cols_, id / cols_};
}

RouterId Layout::id_at(Coord c) const {
  if (c.x < 0 || c.x >= cols_ || c.y < 0 || c.y >= rows_) {
    throw InvalidArgument("coordinate (" + std::to_string(c.x) + "," + std::to_string(c.y) +
                          ") outside " + to_string());
  }
  return c.y * cols_ + c.x;
}

std::string Layout::to_string() const { return std::to_string(rows_) + "x" + std::to_string(cols_); }

Layout Layout::parse(std::string_view text) {
  auto parts = split(text, 'x');
  if (parts.size() != 2) throw InvalidArgument("layout must look like RxC, got '" + std::string(text) + "'");
  return Layout(parse_positive(parts[0], "row count"), parse_positive(parts[1], "column count"));
}

Layout make_grid_layout(int rows, int cols) { return Layout(rows, cols); }

Offset offset_between(const Layout& layout, RouterId a, RouterId b) {
  Coord pa = layout.position(a);
  Coord pb = layout.position(b);
  return Offset{std::abs(pa.x - pb.x), std::abs(pa.y - pb.y)};
}

// ---------------------------------------------------------------------------
// LinkClass

LinkClass LinkClass::small() { return LinkClass(Kind::small, {{1, 0}, {0, 1}, {1, 1}}); }

LinkClass LinkClass::medium() {
  return LinkClass(Kind::medium, {{1, 0}, {0, 1}, {1, 1}, {2, 0}, {0, 2}});
}

LinkClass LinkClass::large() {
  return LinkClass(Kind::large, {{1, 0}, {0, 1}, {1, 1}, {2, 0}, {0, 2}, {2, 1}, {1, 2}});
}

LinkClass LinkClass::custom(std::set<Offset> offsets) {
  if (offsets.empty()) throw InvalidArgument("custom link class needs at least one offset");
  for (const Offset& o : offsets) {
    if (o.dx < 0 || o.dy < 0) throw InvalidArgument("link offsets are absolute spans");
    if (o.dx == 0 && o.dy == 0) throw InvalidArgument("offset (0,0) would be a self-link");
  }
  return LinkClass(Kind::custom, std::move(offsets));
}

LinkClass LinkClass::parse(std::string_view text) {
  if (text == "small") return small();
  if (text == "medium") return medium();
  if (text == "large") return large();
  if (text.starts_with("custom:")) {
    std::set<Offset> offsets;
    for (std::string_view item : split(text.substr(7), ';')) {
      auto xy = split(item, ',');
      if (xy.size() != 2) throw InvalidArgument("bad offset '" + std::string(item) + "'");
      offsets.insert(Offset{parse_positive(xy[0], "offset"), parse_positive(xy[1], "offset")});
    }
    return custom(std::move(offsets));
  }
  throw InvalidArgument("unknown link class '" + std::string(text) + "'");
}

std::string LinkClass::name() const {
  switch (kind_) {
    case Kind::small:
      return "small";
    case Kind::medium:
      return "medium";
    case Kind::large:
      return "large";
    case Kind::custom:
      break;
  }
  std::string out = "custom:";
  bool first = true;
  for (const Offset& o : offsets_) {
    if (!first) out += ';';
    first = false;
    out += std::to_string(o.dx) + "," + std::to_string(o.dy);
  }
  return out;
}

std::vector<Channel> valid_link_set(const Layout& layout, const LinkClass& cls) {
  std::vector<Channel> out;
  for (RouterId a = 0; a < layout.size(); ++a) {
    for (RouterId b = 0; b < layout.size(); ++b) {
      if (a != b && cls.allows(layout, a, b)) out.push_back({a, b});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Topology

Topology::Topology(Layout layout, std::vector<Channel> channels, std::optional<LinkClass> link_class)
    : layout_(layout), channels_(std::move(channels)), link_class_(std::move(link_class)) {
  const int n = layout_.size();
  for (const Channel& c : channels_) {
    if (!layout_.contains(c.src) || !layout_.contains(c.dst)) {
      throw InvalidArgument("channel (" + std::to_string(c.src) + "," + std::to_string(c.dst) +
                            ") references a router outside " + layout_.to_string());
    }
    if (c.src == c.dst) throw InvalidArgument("self-link (" + std::to_string(c.src) + "," + std::to_string(c.dst) + ")");
    if (link_class_ && !link_class_->allows(layout_, c.src, c.dst)) {
      Offset o = offset_between(layout_, c.src, c.dst);
      throw InvalidArgument("channel (" + std::to_string(c.src) + "," + std::to_string(c.dst) + ") spans (" +
                            std::to_string(o.dx) + "," + std::to_string(o.dy) + "), outside link class " +
                            link_class_->name());
    }
  }
  std::sort(channels_.begin(), channels_.end());
  auto dup = std::adjacent_find(channels_.begin(), channels_.end());
  if (dup != channels_.end()) {
    throw InvalidArgument("duplicate channel (" + std::to_string(dup->src) + "," + std::to_string(dup->dst) + ")");
  }
  out_.assign(static_cast<std::size_t>(n), {});
  in_.assign(static_cast<std::size_t>(n), {});
  for (const Channel& c : channels_) {
    out_[static_cast<std::size_t>(c.src)].push_back(c.dst);
    in_[static_cast<std::size_t>(c.dst)].push_back(c.src);
  }
  for (auto& v : in_) std::sort(v.begin(), v.end());
  symmetric_ = std::all_of(channels_.begin(), channels_.end(),
                           [this](const Channel& c) { return has_channel(c.dst, c.src); });
}

bool Topology::has_channel(RouterId src, RouterId dst) const { return channel_index(src, dst) >= 0; }

int Topology::channel_index(RouterId src, RouterId dst) const {
  Channel key{src, dst};
  auto it = std::lower_bound(channels_.begin(), channels_.end(), key);
  if (it == channels_.end() || *it != key) return -1;
  return static_cast<int>(it - channels_.begin());
}

std::vector<std::uint64_t> Topology::out_masks() const {
  if (size() > 64) throw CapacityError("bitmask adjacency supports at most 64 routers");
  std::vector<std::uint64_t> masks(static_cast<std::size_t>(size()), 0);
  for (const Channel& c : channels_) masks[static_cast<std::size_t>(c.src)] |= std::uint64_t{1} << c.dst;
  return masks;
}

std::vector<std::uint64_t> Topology::in_masks() const {
  if (size() > 64) throw CapacityError("bitmask adjacency supports at most 64 routers");
  std::vector<std::uint64_t> masks(static_cast<std::size_t>(size()), 0);
  for (const Channel& c : channels_) masks[static_cast<std::size_t>(c.dst)] |= std::uint64_t{1} << c.src;
  return masks;
}

// ---------------------------------------------------------------------------
// Reference topologies

ReferenceKind parse_reference_kind(std::string_view text) {
  if (text == "mesh") return ReferenceKind::mesh;
  if (text == "torus_x") return ReferenceKind::torus_x;
  if (text == "folded_torus") return ReferenceKind::folded_torus;
  throw InvalidArgument("unknown reference topology '" + std::string(text) + "'");
}

std::string to_string(ReferenceKind kind) {
  switch (kind) {
    case ReferenceKind::mesh:
      return "mesh";
    case ReferenceKind::torus_x:
      return "torus_x";
    case ReferenceKind::folded_torus:
      return "folded_torus";
  }
  return "?";
}

namespace {

// Positions visited by a ring over k slots: plain 0..k-1 or folded 0,2,4,...,3,1.
std::vector<int> ring_order(int k, bool folded) {
  std::vector<int> order;
  if (!folded) {
    order.resize(static_cast<std::size_t>(k));
    std::iota(order.begin(), order.end(), 0);
    return order;
  }
  for (int i = 0; i < k; i += 2) order.push_back(i);
  for (int i = (k % 2 == 0) ? k - 1 : k - 2; i > 0; i -= 2) order.push_back(i);
  return order;
}

void add_link(std::set<Channel>& out, RouterId a, RouterId b) {
  if (a == b) return;
  out.insert({a, b});
  out.insert({b, a});
}

}  // namespace

Topology build_reference_topology(ReferenceKind kind, const Layout& layout) {
  const int rows = layout.rows();
  const int cols = layout.cols();
  if (kind != ReferenceKind::mesh && (rows < 2 || cols < 2)) {
    throw InvalidArgument(to_string(kind) + " needs at least a 2x2 layout, got " + layout.to_string());
  }
  std::set<Channel> links;
  auto id = [&](int x, int y) { return layout.id_at({x, y}); };

  const bool wrap_x = kind != ReferenceKind::mesh;
  const bool wrap_y = kind == ReferenceKind::folded_torus;
  const bool folded = kind == ReferenceKind::folded_torus;

  // Rows: rings (or lines) along x.
  auto xs = ring_order(cols, folded);
  for (int y = 0; y < rows; ++y) {
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) add_link(links, id(xs[i], y), id(xs[i + 1], y));
    if (wrap_x) add_link(links, id(xs.back(), y), id(xs.front(), y));
  }
  auto ys = ring_order(rows, folded);
  for (int x = 0; x < cols; ++x) {
    for (std::size_t i = 0; i + 1 < ys.size(); ++i) add_link(links, id(x, ys[i]), id(x, ys[i + 1]));
    if (wrap_y) add_link(links, id(x, ys.back()), id(x, ys.front()));
  }
  return Topology(layout, std::vector<Channel>(links.begin(), links.end()));
}

std::optional<LinkClass> infer_link_class(const Topology& t) {
  for (const LinkClass& cls : {LinkClass::small(), LinkClass::medium(), LinkClass::large()}) {
    bool ok = std::all_of(t.channels().begin(), t.channels().end(),
                          [&](const Channel& c) { return cls.allows(t.layout(), c.src, c.dst); });
    if (ok) return cls;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Traffic

TrafficMatrix::TrafficMatrix(int n, std::vector<Flow> flows) : n_(n) {
  if (n < 2) throw InvalidArgument("traffic needs at least two routers");
  dense_.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), Rational(0));
  Rational total(0);
  for (const Flow& f : flows) {
    if (f.src < 0 || f.src >= n || f.dst < 0 || f.dst >= n) {
      throw InvalidArgument("flow (" + std::to_string(f.src) + "," + std::to_string(f.dst) + ") out of range");
    }
    if (f.weight < 0) throw InvalidArgument("negative demand weight");
    if (f.src == f.dst || f.weight == 0) continue;
    dense_[static_cast<std::size_t>(f.src * n + f.dst)] += f.weight;
    total += f.weight;
  }
  if (total == 0) throw InvalidArgument("traffic matrix has no demand");
  for (RouterId s = 0; s < n; ++s) {
    for (RouterId d = 0; d < n; ++d) {
      Rational& w = dense_[static_cast<std::size_t>(s * n + d)];
      if (w == 0) continue;
      w /= total;
      flows_.push_back({s, d, w});
    }
  }
}

TrafficMatrix TrafficMatrix::uniform(int n) {
  std::vector<Flow> flows;
  for (RouterId s = 0; s < n; ++s)
    for (RouterId d = 0; d < n; ++d)
      if (s != d) flows.push_back({s, d, Rational(1)});
  TrafficMatrix t(n, std::move(flows));
  t.label_ = "uniform";
  return t;
}

TrafficMatrix TrafficMatrix::shuffle(int n) {
  std::vector<Flow> flows;
  for (RouterId s = 0; s < n; ++s) {
    RouterId d = (2 * s < n) ? 2 * s : (2 * s + 1) % n;
    if (d != s) flows.push_back({s, d, Rational(1)});
  }
  TrafficMatrix t(n, std::move(flows));
  t.label_ = "shuffle";
  return t;
}

TrafficMatrix TrafficMatrix::hotspot(int n, const std::vector<RouterId>& dests, const Rational& weight) {
  if (weight <= 0 || weight > 1) throw InvalidArgument("hotspot weight must lie in (0,1]");
  if (dests.empty()) throw InvalidArgument("hotspot needs at least one destination");
  std::set<RouterId> hot(dests.begin(), dests.end());
  for (RouterId d : hot)
    if (d < 0 || d >= n) throw InvalidArgument("hotspot destination " + std::to_string(d) + " out of range");
  std::vector<Flow> flows;
  for (RouterId s = 0; s < n; ++s) {
    std::vector<RouterId> targets;
    for (RouterId d : hot)
      if (d != s) targets.push_back(d);
    Rational hot_share = targets.empty() ? Rational(0) : weight;
    for (RouterId d = 0; d < n; ++d) {
      if (d == s) continue;
      Rational w = (Rational(1) - hot_share) / (n - 1);
      if (std::find(targets.begin(), targets.end(), d) != targets.end())
        w += hot_share / static_cast<std::int64_t>(targets.size());
      flows.push_back({s, d, w});
    }
  }
  TrafficMatrix t(n, std::move(flows));
  t.label_ = "hotspot";
  return t;
}

TrafficMatrix TrafficMatrix::permutation(int n, const std::vector<RouterId>& dest_of) {
  if (static_cast<int>(dest_of.size()) != n) {
    throw InvalidArgument("permutation has " + std::to_string(dest_of.size()) + " entries, expected " +
                          std::to_string(n));
  }
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  for (RouterId d : dest_of) {
    if (d < 0 || d >= n) throw InvalidArgument("permutation target " + std::to_string(d) + " out of range");
    if (seen[static_cast<std::size_t>(d)]) throw InvalidArgument("permutation maps two sources to " + std::to_string(d));
    seen[static_cast<std::size_t>(d)] = true;
  }
  std::vector<Flow> flows;
  for (RouterId s = 0; s < n; ++s)
    if (dest_of[static_cast<std::size_t>(s)] != s) flows.push_back({s, dest_of[static_cast<std::size_t>(s)], Rational(1)});
  if (flows.empty()) throw InvalidArgument("identity permutation carries no traffic");
  TrafficMatrix t(n, std::move(flows));
  t.label_ = "permutation";
  return t;
}

Rational TrafficMatrix::weight(RouterId src, RouterId dst) const {
  if (src < 0 || src >= n_ || dst < 0 || dst >= n_) return Rational(0);
  return dense_[static_cast<std::size_t>(src * n_ + dst)];
}

Rational TrafficMatrix::row_sum(RouterId src) const {
  Rational sum(0);
  for (RouterId d = 0; d < n_; ++d) sum += weight(src, d);
  return sum;
}

int TrafficMatrix::active_sources() const {
  int count = 0;
  for (RouterId s = 0; s < n_; ++s)
    if (row_sum(s) > 0) ++count;
  return count;
}

bool TrafficMatrix::is_uniform() const {
  if (static_cast<int>(flows_.size()) != n_ * (n_ - 1)) return false;
  Rational expected(1, static_cast<std::int64_t>(n_) * (n_ - 1));
  return std::all_of(flows_.begin(), flows_.end(), [&](const Flow& f) { return f.weight == expected; });
}

TrafficMatrix make_traffic(std::string_view kind, int n) {
  if (kind == "uniform") return TrafficMatrix::uniform(n);
  if (kind == "shuffle") return TrafficMatrix::shuffle(n);
  auto parts = split(kind, ':');
  if (parts[0] == "hotspot") {
    if (parts.size() != 3) throw InvalidArgument("hotspot traffic must look like hotspot:D1,D2:W");
    std::vector<RouterId> dests;
    for (std::string_view d : split(parts[1], ',')) dests.push_back(parse_positive(d, "hotspot destination"));
    return TrafficMatrix::hotspot(n, dests, parse_rational(parts[2]));
  }
  if (parts[0] == "permutation") {
    if (parts.size() != 2) throw InvalidArgument("permutation traffic must look like permutation:d0,d1,...");
    std::vector<RouterId> dest_of;
    for (std::string_view d : split(parts[1], ',')) dest_of.push_back(parse_positive(d, "permutation entry"));
    return TrafficMatrix::permutation(n, dest_of);
  }
  throw InvalidArgument("unknown traffic kind '" + std::string(kind) + "'");
}

}  // namespace netsmith
