#include "netsmith/routing_table.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "netsmith/errors.hpp"

namespace netsmith {

RoutingTable::RoutingTable(int n) : n_(n) {
  if (n < 1) throw InvalidArgument("routing table needs at least one router");
  paths_.resize(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
}

std::size_t RoutingTable::index(RouterId src, RouterId dst) const {
  if (src < 0 || src >= n_ || dst < 0 || dst >= n_) {
    throw InvalidArgument(fmt::format("flow ({},{}) out of range for {} routers", src, dst, n_));
  }
  return static_cast<std::size_t>(src) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(dst);
}

void RoutingTable::set(RouterId src, RouterId dst, Path path) {
  std::size_t i = index(src, dst);
  if (src == dst) throw InvalidArgument(fmt::format("no route for self pair ({},{})", src, dst));
  if (path.size() < 2 || path.front() != src || path.back() != dst) {
    throw InvalidArgument(fmt::format("path for ({},{}) does not run from source to destination", src, dst));
  }
  for (RouterId r : path)
    if (r < 0 || r >= n_) throw InvalidArgument(fmt::format("path for ({},{}) leaves the router range", src, dst));
  paths_[i] = std::move(path);
}

bool RoutingTable::has(RouterId src, RouterId dst) const { return !paths_[index(src, dst)].empty(); }

const Path& RoutingTable::path(RouterId src, RouterId dst) const {
  const Path& p = paths_[index(src, dst)];
  if (p.empty()) throw InvalidArgument(fmt::format("no route for flow ({},{})", src, dst));
  return p;
}

std::vector<FlowKey> RoutingTable::flows() const {
  std::vector<FlowKey> out;
  for (RouterId s = 0; s < n_; ++s)
    for (RouterId d = 0; d < n_; ++d)
      if (!paths_[index(s, d)].empty()) out.push_back({s, d});
  return out;
}

bool RoutingTable::complete() const {
  for (RouterId s = 0; s < n_; ++s)
    for (RouterId d = 0; d < n_; ++d)
      if (s != d && paths_[index(s, d)].empty()) return false;
  return true;
}

void RoutingTable::validate(const Topology& t) const {
  if (t.size() != n_) throw InvalidArgument("routing table and topology disagree on router count");
  for (const FlowKey& f : flows()) {
    const Path& p = path(f.src, f.dst);
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
      if (!t.has_channel(p[i], p[i + 1])) {
        throw InvalidArgument(
            fmt::format("path for ({},{}) uses missing channel ({},{})", f.src, f.dst, p[i], p[i + 1]));
      }
    }
  }
}

std::string save_routing_table(const RoutingTable& rt) {
  std::string out;
  for (const FlowKey& f : rt.flows()) {
    const Path& p = rt.path(f.src, f.dst);
    out += fmt::format("{} {} : {}\n", f.src, f.dst, fmt::join(p, ">"));
  }
  return out;
}

namespace {

int parse_id(std::string_view s, int line) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError(fmt::format("line {}: bad router id '{}'", line, s));
  }
  return v;
}

}  // namespace

RoutingTable load_routing_table(std::string_view text, int n) {
  RoutingTable rt(n);
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line.front() == '#') continue;
    auto colon = line.find(':');
    if (colon == std::string::npos) throw ParseError(fmt::format("line {}: expected 's d : path'", lineno));
    std::istringstream head(line.substr(0, colon));
    std::string a, b;
    if (!(head >> a >> b)) throw ParseError(fmt::format("line {}: expected source and destination", lineno));
    RouterId s = parse_id(a, lineno);
    RouterId d = parse_id(b, lineno);
    Path p;
    std::string_view rest = std::string_view(line).substr(colon + 1);
    std::size_t start = 0;
    while (true) {
      auto pos = rest.find('>', start);
      p.push_back(parse_id(rest.substr(start, pos == std::string_view::npos ? pos : pos - start), lineno));
      if (pos == std::string_view::npos) break;
      start = pos + 1;
    }
    try {
      if (rt.has(s, d)) throw ParseError(fmt::format("line {}: duplicate flow ({},{})", lineno, s, d));
      rt.set(s, d, std::move(p));
    } catch (const ParseError&) {
      throw;
    } catch (const InvalidArgument& e) {
      throw ParseError(fmt::format("line {}: {}", lineno, e.what()));
    }
  }
  return rt;
}

Rational LoadMap::at(Channel c) const {
  auto it = loads_.find(c);
  return it == loads_.end() ? Rational(0) : it->second;
}

Rational LoadMap::max() const {
  Rational best(0);
  for (const auto& [c, l] : loads_) best = std::max(best, l);
  return best;
}

Rational LoadMap::total() const {
  Rational sum(0);
  for (const auto& [c, l] : loads_) sum += l;
  return sum;
}

std::string save_load_map_csv(const LoadMap& loads) {
  std::string out = "src,dst,load_numerator,load_denominator\n";
  for (const auto& [c, l] : loads.loads()) {
    out += fmt::format("{},{},{},{}\n", c.src, c.dst, l.numerator(), l.denominator());
  }
  return out;
}

LoadMap load_load_map_csv(std::string_view text) {
  LoadMap loads;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1) {
      if (line != "src,dst,load_numerator,load_denominator") throw ParseError("line 1: unexpected load CSV header");
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::int64_t> fields;
    std::size_t start = 0;
    while (true) {
      auto pos = line.find(',', start);
      std::string_view f = std::string_view(line).substr(start, pos == std::string::npos ? pos : pos - start);
      std::int64_t v = 0;
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || ptr != f.data() + f.size()) throw ParseError(fmt::format("line {}: bad field", lineno));
      fields.push_back(v);
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
    if (fields.size() != 4 || fields[3] == 0) throw ParseError(fmt::format("line {}: expected 4 fields", lineno));
    loads.add({static_cast<RouterId>(fields[0]), static_cast<RouterId>(fields[1])}, Rational(fields[2], fields[3]));
  }
  return loads;
}

}  // namespace netsmith
