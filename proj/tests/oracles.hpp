#pragma once

// Brute-force reference computations. Kept independent of the library's
// algorithms: plain BFS, full subset enumeration, exhaustive path products.

#include <algorithm>
#include <bit>
#include <cstdlib>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <vector>

#include "netsmith/model.hpp"
#include "netsmith/rational.hpp"
#include "netsmith/routing_table.hpp"

namespace oracle {

using netsmith::Channel;
using netsmith::Rational;

struct Graph {
  int n = 0;
  std::vector<std::vector<int>> out;
};

inline Graph graph_of(int n, const std::vector<Channel>& channels) {
  Graph g{n, std::vector<std::vector<int>>(static_cast<std::size_t>(n))};
  for (const Channel& c : channels) g.out[static_cast<std::size_t>(c.src)].push_back(c.dst);
  return g;
}

inline Graph graph_of(const netsmith::Topology& t) {
  return graph_of(t.size(), {t.channels().begin(), t.channels().end()});
}

/// -1 marks unreachable.
inline std::vector<int> bfs(const Graph& g, int s) {
  std::vector<int> d(static_cast<std::size_t>(g.n), -1);
  std::deque<int> q{s};
  d[static_cast<std::size_t>(s)] = 0;
  while (!q.empty()) {
    int u = q.front();
    q.pop_front();
    for (int v : g.out[static_cast<std::size_t>(u)]) {
      if (d[static_cast<std::size_t>(v)] < 0) {
        d[static_cast<std::size_t>(v)] = d[static_cast<std::size_t>(u)] + 1;
        q.push_back(v);
      }
    }
  }
  return d;
}

inline std::vector<std::vector<int>> all_pairs(const Graph& g) {
  std::vector<std::vector<int>> d;
  for (int s = 0; s < g.n; ++s) d.push_back(bfs(g, s));
  return d;
}

inline bool connected(const std::vector<std::vector<int>>& d) {
  for (const auto& row : d)
    for (int x : row)
      if (x < 0) return false;
  return true;
}

inline Rational avg_hops(const std::vector<std::vector<int>>& d) {
  std::int64_t sum = 0;
  const auto n = static_cast<std::int64_t>(d.size());
  for (const auto& row : d)
    for (int x : row) sum += x;
  return Rational(sum, n * (n - 1));
}

inline Rational weighted_hops(const std::vector<std::vector<int>>& d, const netsmith::TrafficMatrix& tm) {
  Rational sum(0);
  for (const auto& f : tm.flows()) sum += f.weight * d[static_cast<std::size_t>(f.src)][static_cast<std::size_t>(f.dst)];
  return sum;
}

inline int diameter(const std::vector<std::vector<int>>& d) {
  int m = 0;
  for (const auto& row : d)
    for (int x : row) m = std::max(m, x);
  return m;
}

/// min over all bipartitions and both directions of crossing / (|U||V|).
inline Rational sparsest_cut(int n, const std::vector<Channel>& channels) {
  std::optional<Rational> best;
  for (std::uint32_t mask = 1; mask + 1 < (1u << n); ++mask) {
    int fwd = 0;
    for (const Channel& c : channels)
      if ((mask >> c.src & 1u) && !(mask >> c.dst & 1u)) ++fwd;
    const int u = std::popcount(mask);
    Rational r(fwd, u * (n - u));
    if (!best || r < *best) best = r;
  }
  return *best;
}

/// min over balanced bipartitions of min(forward, reverse).
inline int bisection(int n, const std::vector<Channel>& channels) {
  int best = 1 << 30;
  for (std::uint32_t mask = 1; mask + 1 < (1u << n); ++mask) {
    const int u = std::popcount(mask);
    if (std::abs(u - (n - u)) > 1) continue;
    int fwd = 0, rev = 0;
    for (const Channel& c : channels) {
      const bool a = mask >> c.src & 1u, b = mask >> c.dst & 1u;
      if (a && !b) ++fwd;
      if (!a && b) ++rev;
    }
    best = std::min(best, std::min(fwd, rev));
  }
  return best;
}

/// Every shortest path s -> d by exhaustive DFS over distance layers.
inline std::vector<netsmith::Path> shortest_paths(const Graph& g, const std::vector<std::vector<int>>& dist, int s, int d) {
  std::vector<netsmith::Path> out;
  netsmith::Path cur{s};
  std::function<void(int)> go = [&](int u) {
    if (u == d) {
      out.push_back(cur);
      return;
    }
    for (int v : g.out[static_cast<std::size_t>(u)]) {
      if (dist[static_cast<std::size_t>(v)][static_cast<std::size_t>(d)] == dist[static_cast<std::size_t>(u)][static_cast<std::size_t>(d)] - 1) {
        cur.push_back(v);
        go(v);
        cur.pop_back();
      }
    }
  };
  go(s);
  return out;
}

/// Minimum max channel load over every product of per-flow path choices.
inline Rational brute_force_mcl(const std::vector<std::vector<netsmith::Path>>& choices, const std::vector<Rational>& weights) {
  std::optional<Rational> best;
  std::vector<std::size_t> idx(choices.size(), 0);
  while (true) {
    std::map<std::pair<int, int>, Rational> load;
    for (std::size_t f = 0; f < choices.size(); ++f) {
      const auto& p = choices[f][idx[f]];
      for (std::size_t k = 0; k + 1 < p.size(); ++k) load[{p[k], p[k + 1]}] += weights[f];
    }
    Rational m(0);
    for (const auto& [c, l] : load) m = std::max(m, l);
    if (!best || m < *best) best = m;
    std::size_t f = 0;
    while (f < choices.size() && ++idx[f] == choices[f].size()) idx[f++] = 0;
    if (f == choices.size()) break;
  }
  return *best;
}

/// Kahn's algorithm over the channel dependencies of `paths`.
inline bool dependencies_acyclic(const std::vector<netsmith::Path>& paths) {
  std::map<std::pair<int, int>, std::set<std::pair<int, int>>> succ;
  std::map<std::pair<int, int>, int> indeg;
  for (const auto& p : paths) {
    for (std::size_t k = 0; k + 1 < p.size(); ++k) indeg.try_emplace({p[k], p[k + 1]}, 0);
    for (std::size_t k = 0; k + 2 < p.size(); ++k) succ[{p[k], p[k + 1]}].insert({p[k + 1], p[k + 2]});
  }
  for (const auto& [a, bs] : succ)
    for (const auto& b : bs) ++indeg[b];
  std::deque<std::pair<int, int>> q;
  for (const auto& [c, d] : indeg)
    if (d == 0) q.push_back(c);
  std::size_t seen = 0;
  while (!q.empty()) {
    auto c = q.front();
    q.pop_front();
    ++seen;
    for (const auto& b : succ[c])
      if (--indeg[b] == 0) q.push_back(b);
  }
  return seen == indeg.size();
}

struct Feasibility {
  int radix_out = 4;
  int radix_in = 4;
  bool symmetric = false;
  std::optional<int> diameter_cap;
  std::optional<Rational> min_cut;
};

struct EnumResult {
  bool feasible = false;
  /// LatOp: min avg hops. SCOp: max sparsest cut.
  Rational best{0};
  /// SCOp: min avg hops among cut-optimal topologies.
  Rational tie_hops{0};
  std::uint64_t feasible_count = 0;
};

/// Every subset of `candidates`; `weights` selects demand-weighted hops when set.
inline EnumResult enumerate_topologies(int n, const std::vector<Channel>& candidates, const Feasibility& f, bool scop,
                                       const netsmith::TrafficMatrix* weights = nullptr) {
  EnumResult r;
  const std::size_t m = candidates.size();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
    std::vector<Channel> chosen;
    std::vector<int> outd(static_cast<std::size_t>(n)), ind(static_cast<std::size_t>(n));
    for (std::size_t k = 0; k < m; ++k) {
      if (mask >> k & 1u) {
        chosen.push_back(candidates[k]);
        ++outd[static_cast<std::size_t>(candidates[k].src)];
        ++ind[static_cast<std::size_t>(candidates[k].dst)];
      }
    }
    if (static_cast<int>(chosen.size()) < n) continue;
    bool ok = true;
    for (int i = 0; i < n && ok; ++i) ok = outd[static_cast<std::size_t>(i)] <= f.radix_out && ind[static_cast<std::size_t>(i)] <= f.radix_in;
    if (!ok) continue;
    if (f.symmetric) {
      std::set<Channel> s(chosen.begin(), chosen.end());
      for (const Channel& c : chosen) ok = ok && s.contains(Channel{c.dst, c.src});
      if (!ok) continue;
    }
    auto d = all_pairs(graph_of(n, chosen));
    if (!connected(d)) continue;
    if (f.diameter_cap && diameter(d) > *f.diameter_cap) continue;
    Rational cut(0);
    if (scop || f.min_cut) cut = sparsest_cut(n, chosen);
    if (f.min_cut && cut < *f.min_cut) continue;
    Rational hops = weights ? weighted_hops(d, *weights) : avg_hops(d);
    ++r.feasible_count;
    if (!r.feasible) {
      r.feasible = true;
      r.best = scop ? cut : hops;
      r.tie_hops = hops;
      continue;
    }
    if (scop) {
      if (cut > r.best || (cut == r.best && hops < r.tie_hops)) {
        r.best = cut;
        r.tie_hops = hops;
      }
    } else if (hops < r.best) {
      r.best = hops;
    }
  }
  return r;
}

/// Random strongly connected symmetric topology over `layout` using links
/// whose span lies in `cls`; each allowed pair kept with probability p.
inline std::optional<netsmith::Topology> random_topology(std::mt19937_64& rng, const netsmith::Layout& layout,
                                                         const netsmith::LinkClass& cls, double p, bool symmetric = true) {
  std::bernoulli_distribution keep(p);
  std::vector<Channel> chosen;
  for (const Channel& c : netsmith::valid_link_set(layout, cls)) {
    if (symmetric && c.src > c.dst) continue;
    if (!keep(rng)) continue;
    chosen.push_back(c);
    if (symmetric) chosen.push_back(Channel{c.dst, c.src});
  }
  if (!connected(all_pairs(graph_of(layout.size(), chosen)))) return std::nullopt;
  return netsmith::Topology(layout, chosen);
}

}  // namespace oracle
