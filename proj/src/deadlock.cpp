#include "netsmith/deadlock.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <json.hpp>

#include "netsmith/seed.hpp"

namespace netsmith {

Cdg::Cdg(std::vector<Channel> channels) : channels_(std::move(channels)) {
  std::sort(channels_.begin(), channels_.end());
  succ_.resize(channels_.size());
}

std::size_t Cdg::edge_count() const {
  std::size_t total = 0;
  for (const auto& s : succ_) total += s.size();
  return total;
}

int Cdg::index_of(Channel c) const {
  auto it = std::lower_bound(channels_.begin(), channels_.end(), c);
  if (it == channels_.end() || *it != c) return -1;
  return static_cast<int>(it - channels_.begin());
}

bool Cdg::has_edge(Channel a, Channel b) const {
  int ia = index_of(a), ib = index_of(b);
  if (ia < 0 || ib < 0) return false;
  const auto& s = succ_[static_cast<std::size_t>(ia)];
  return std::binary_search(s.begin(), s.end(), ib);
}

void Cdg::add_edge(int a, int b) {
  auto& s = succ_[static_cast<std::size_t>(a)];
  auto it = std::lower_bound(s.begin(), s.end(), b);
  if (it == s.end() || *it != b) s.insert(it, b);
}

Cdg build_cdg(const Topology& t, const std::vector<Path>& paths) {
  Cdg cdg({t.channels().begin(), t.channels().end()});
  for (const Path& p : paths) {
    int prev = -1;
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
      int c = cdg.index_of({p[i], p[i + 1]});
      if (c < 0) throw InvalidArgument(fmt::format("path uses missing channel ({},{})", p[i], p[i + 1]));
      if (prev >= 0) cdg.add_edge(prev, c);
      prev = c;
    }
  }
  return cdg;
}

Cdg build_cdg(const Topology& t, const RoutingTable& rt) {
  std::vector<Path> paths;
  for (const FlowKey& f : rt.flows()) paths.push_back(rt.path(f.src, f.dst));
  return build_cdg(t, paths);
}

std::optional<std::vector<Channel>> find_cycle(const Cdg& cdg) {
  const int n = cdg.size();
  enum : char { white, grey, black };
  std::vector<char> color(static_cast<std::size_t>(n), white);
  std::vector<int> parent(static_cast<std::size_t>(n), -1);
  // Iterative DFS: (node, next successor position).
  std::vector<std::pair<int, std::size_t>> stack;
  for (int root = 0; root < n; ++root) {
    if (color[static_cast<std::size_t>(root)] != white) continue;
    stack.push_back({root, 0});
    color[static_cast<std::size_t>(root)] = grey;
    while (!stack.empty()) {
      auto& [u, pos] = stack.back();
      const auto& succ = cdg.successors(u);
      if (pos == succ.size()) {
        color[static_cast<std::size_t>(u)] = black;
        stack.pop_back();
        continue;
      }
      int v = succ[pos++];
      if (color[static_cast<std::size_t>(v)] == grey) {
        std::vector<Channel> cycle;
        for (int w = u; w != v; w = parent[static_cast<std::size_t>(w)]) cycle.push_back(cdg.channels()[static_cast<std::size_t>(w)]);
        cycle.push_back(cdg.channels()[static_cast<std::size_t>(v)]);
        std::reverse(cycle.begin(), cycle.end());
        return cycle;
      }
      if (color[static_cast<std::size_t>(v)] == white) {
        color[static_cast<std::size_t>(v)] = grey;
        parent[static_cast<std::size_t>(v)] = u;
        stack.push_back({v, 0});
      }
    }
  }
  return std::nullopt;
}

int VcAssignment::layer_of(RouterId src, RouterId dst) const {
  for (std::size_t l = 0; l < layers.size(); ++l)
    if (std::binary_search(layers[l].begin(), layers[l].end(), FlowKey{src, dst})) return static_cast<int>(l);
  throw InvalidArgument(fmt::format("flow ({},{}) has no virtual-channel layer", src, dst));
}

namespace {

std::vector<Path> paths_of(const std::vector<FlowKey>& flows, const RoutingTable& rt) {
  std::vector<Path> out;
  out.reserve(flows.size());
  for (const FlowKey& f : flows) out.push_back(rt.path(f.src, f.dst));
  return out;
}

bool uses_dependency(const Path& p, Channel a, Channel b) {
  for (std::size_t i = 0; i + 2 < p.size(); ++i)
    if (p[i] == a.src && p[i + 1] == a.dst && p[i + 2] == b.dst && p[i + 1] == b.src) return true;
  return false;
}

bool acyclic(const Topology& t, const std::vector<FlowKey>& flows, const RoutingTable& rt) {
  return !find_cycle(build_cdg(t, paths_of(flows, rt)));
}

}  // namespace

VcAssignment layer_paths(const Topology& t, const RoutingTable& rt, std::uint64_t seed, int max_layers) {
  if (max_layers < 1) throw InvalidArgument("max_layers must be at least 1");
  rt.validate(t);
  std::mt19937_64 rng(seed);
  VcAssignment va;
  std::vector<FlowKey> current = rt.flows();
  while (!current.empty()) {
    std::vector<FlowKey> evicted;
    while (auto cycle = find_cycle(build_cdg(t, paths_of(current, rt)))) {
      if (va.layer_count() + 1 >= max_layers) {
        std::vector<std::string> parts;
        for (const Channel& c : *cycle) parts.push_back(fmt::format("({},{})", c.src, c.dst));
        throw LayerLimitError(fmt::format("layer {} still has a dependency cycle with max_layers = {}: {}",
                                          va.layer_count(), max_layers, fmt::join(parts, " -> ")),
                              *cycle);
      }
      std::uniform_int_distribution<std::size_t> pick(0, cycle->size() - 1);
      std::size_t k = pick(rng);
      Channel a = (*cycle)[k];
      Channel b = (*cycle)[(k + 1) % cycle->size()];
      std::vector<FlowKey> kept;
      for (const FlowKey& f : current) {
        (uses_dependency(rt.path(f.src, f.dst), a, b) ? evicted : kept).push_back(f);
      }
      current = std::move(kept);
    }
    va.layers.push_back(std::move(current));
    std::sort(evicted.begin(), evicted.end());
    current = std::move(evicted);
  }
  if (va.layers.empty()) va.layers.emplace_back();
  return va;
}

LayeringSearch best_layering(const Topology& t, const RoutingTable& rt, std::uint64_t seed, int attempts,
                             int max_layers) {
  LayeringSearch best;
  std::optional<LayerLimitError> first_error;
  bool found = false;
  for (int a = 0; a < attempts; ++a) {
    std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(a));
    try {
      VcAssignment va = layer_paths(t, rt, s, max_layers);
      best.layer_counts.push_back(va.layer_count());
      if (!found || va.layer_count() < best.assignment.layer_count()) {
        best.assignment = std::move(va);
        best.seed = s;
        found = true;
      }
    } catch (const LayerLimitError& e) {
      best.layer_counts.push_back(0);
      if (!first_error) first_error.emplace(e);
    }
  }
  if (!found) {
    if (first_error) throw *first_error;
    throw InvalidArgument("best_layering needs at least one attempt");
  }
  return best;
}

std::vector<int> weighted_occupancy(const VcAssignment& va, const RoutingTable& rt) {
  std::vector<int> occ;
  for (const auto& layer : va.layers) {
    int sum = 0;
    for (const FlowKey& f : layer) sum += static_cast<int>(rt.path(f.src, f.dst).size()) - 1;
    occ.push_back(sum);
  }
  return occ;
}

VcAssignment balance_layers(const VcAssignment& va, const Topology& t, const RoutingTable& rt) {
  VcAssignment out = va;
  const std::size_t L = out.layers.size();
  if (L < 2) return out;
  std::vector<int> occ = weighted_occupancy(out, rt);
  auto hops = [&](const FlowKey& f) { return static_cast<int>(rt.path(f.src, f.dst).size()) - 1; };

  bool moved = true;
  while (moved) {
    moved = false;
    std::vector<std::size_t> by_load(L);
    for (std::size_t i = 0; i < L; ++i) by_load[i] = i;
    std::stable_sort(by_load.begin(), by_load.end(), [&](std::size_t a, std::size_t b) { return occ[a] > occ[b]; });
    for (std::size_t from : by_load) {
      std::vector<std::size_t> targets(by_load.rbegin(), by_load.rend());
      for (std::size_t i = 0; i < out.layers[from].size() && !moved; ++i) {
        const FlowKey f = out.layers[from][i];
        const int w = hops(f);
        for (std::size_t to : targets) {
          if (to == from || w >= occ[from] - occ[to]) continue;
          std::vector<FlowKey> trial = out.layers[to];
          trial.insert(std::lower_bound(trial.begin(), trial.end(), f), f);
          if (!acyclic(t, trial, rt)) continue;
          out.layers[to] = std::move(trial);
          out.layers[from].erase(out.layers[from].begin() + static_cast<std::ptrdiff_t>(i));
          occ[from] -= w;
          occ[to] += w;
          moved = true;
          break;
        }
      }
      if (moved) break;
    }
  }
  return out;
}

bool verify_assignment(const VcAssignment& va, const Topology& t, const RoutingTable& rt) {
  std::set<FlowKey> seen;
  for (const auto& layer : va.layers) {
    for (const FlowKey& f : layer) {
      if (!rt.has(f.src, f.dst) || !seen.insert(f).second) return false;
    }
    if (!acyclic(t, layer, rt)) return false;
  }
  return seen.size() == rt.flows().size();
}

std::string save_vc_table(const VcAssignment& va) {
  std::vector<std::pair<FlowKey, int>> rows;
  for (std::size_t l = 0; l < va.layers.size(); ++l)
    for (const FlowKey& f : va.layers[l]) rows.push_back({f, static_cast<int>(l)});
  std::sort(rows.begin(), rows.end());
  std::string out;
  for (const auto& [f, l] : rows) out += fmt::format("{} {} : {}\n", f.src, f.dst, l);
  return out;
}

VcAssignment load_vc_table(std::string_view text) {
  VcAssignment va;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  std::set<FlowKey> seen;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line.front() == '#') continue;
    std::istringstream fields(line);
    int s = 0, d = 0, l = 0;
    std::string colon;
    if (!(fields >> s >> d >> colon >> l) || colon != ":" || l < 0) {
      throw ParseError(fmt::format("line {}: expected 's d : layer'", lineno));
    }
    if (!seen.insert({s, d}).second) throw ParseError(fmt::format("line {}: duplicate flow ({},{})", lineno, s, d));
    if (static_cast<std::size_t>(l) >= va.layers.size()) va.layers.resize(static_cast<std::size_t>(l) + 1);
    va.layers[static_cast<std::size_t>(l)].push_back({s, d});
  }
  for (auto& layer : va.layers) std::sort(layer.begin(), layer.end());
  if (va.layers.empty()) va.layers.emplace_back();
  return va;
}

std::string vc_summary_json(const VcAssignment& va, const RoutingTable& rt) {
  nlohmann::ordered_json j;
  j["layers"] = va.layer_count();
  j["weighted_occupancy"] = weighted_occupancy(va, rt);
  return j.dump(2) + "\n";
}

}  // namespace netsmith
