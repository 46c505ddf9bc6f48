#include "netsmith/routing.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <tuple>

#include <fmt/format.h>

#include "netsmith/errors.hpp"

namespace netsmith {

// ---------------------------------------------------------------------------
// PathSet

PathSet::PathSet(int n, int cap) : n_(n), cap_(cap) {
  if (cap < 1) throw InvalidArgument("path cap must be at least 1");
  cells_.resize(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
}

const PathSet::Cell& PathSet::cell(RouterId src, RouterId dst) const {
  if (src < 0 || src >= n_ || dst < 0 || dst >= n_) throw InvalidArgument("flow out of range");
  return cells_[static_cast<std::size_t>(src) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(dst)];
}

PathSet::Cell& PathSet::cell(RouterId src, RouterId dst) {
  return const_cast<Cell&>(static_cast<const PathSet*>(this)->cell(src, dst));
}

void PathSet::set(RouterId src, RouterId dst, std::vector<Path> paths, bool truncated, bool fallback) {
  Cell& c = cell(src, dst);
  c.paths = std::move(paths);
  c.truncated = truncated;
  c.fallback = fallback;
}

std::size_t PathSet::total_paths() const {
  std::size_t total = 0;
  for (const Cell& c : cells_) total += c.paths.size();
  return total;
}

int PathSet::truncated_pairs() const {
  return static_cast<int>(std::count_if(cells_.begin(), cells_.end(), [](const Cell& c) { return c.truncated; }));
}

std::vector<FlowKey> PathSet::fallback_pairs() const {
  std::vector<FlowKey> out;
  for (RouterId s = 0; s < n_; ++s)
    for (RouterId d = 0; d < n_; ++d)
      if (cell(s, d).fallback) out.push_back({s, d});
  return out;
}

// ---------------------------------------------------------------------------
// Enumeration and filtering

namespace {

void collect_paths(const Topology& t, const DistanceMatrix& dm, RouterId dst, Path& prefix, std::vector<Path>& out,
                   std::size_t limit) {
  RouterId u = prefix.back();
  if (u == dst) {
    out.push_back(prefix);
    return;
  }
  const int remaining = dm.hops(u, dst);
  for (RouterId v : t.out_neighbors(u)) {
    if (out.size() >= limit) return;
    auto d = dm.distance(v, dst);
    if (!d || *d != remaining - 1) continue;
    prefix.push_back(v);
    collect_paths(t, dm, dst, prefix, out, limit);
    prefix.pop_back();
  }
}

}  // namespace

PathSet enumerate_shortest_paths(const Topology& t, int cap) {
  const int n = t.size();
  PathSet ps(n, cap);
  DistanceMatrix dm = apsp(t);
  if (!is_connected(dm)) throw DisconnectedError("shortest-path enumeration needs a strongly connected topology");
  const auto limit = static_cast<std::size_t>(cap) + 1;
  for (RouterId s = 0; s < n; ++s) {
    for (RouterId d = 0; d < n; ++d) {
      if (s == d) continue;
      std::vector<Path> paths;
      Path prefix{s};
      collect_paths(t, dm, d, prefix, paths, limit);
      bool truncated = paths.size() > static_cast<std::size_t>(cap);
      if (truncated) paths.resize(static_cast<std::size_t>(cap));
      ps.set(s, d, std::move(paths), truncated);
    }
  }
  return ps;
}

bool doubles_back(const Path& p, const Layout& layout) {
  int direction = 0;
  for (std::size_t i = 0; i + 1 < p.size(); ++i) {
    int dx = layout.position(p[i + 1]).x - layout.position(p[i]).x;
    if (dx == 0) continue;
    int sign = dx > 0 ? 1 : -1;
    if (direction != 0 && sign != direction) return true;
    direction = sign;
  }
  return false;
}

PathSet ndbt_filter(const PathSet& ps, const Layout& layout) {
  PathSet out(ps.size(), ps.cap());
  for (RouterId s = 0; s < ps.size(); ++s) {
    for (RouterId d = 0; d < ps.size(); ++d) {
      const auto& all = ps.paths(s, d);
      if (all.empty()) continue;
      std::vector<Path> kept;
      std::copy_if(all.begin(), all.end(), std::back_inserter(kept),
                   [&](const Path& p) { return !doubles_back(p, layout); });
      if (kept.empty()) {
        out.set(s, d, all, ps.truncated(s, d), true);
      } else {
        out.set(s, d, std::move(kept), ps.truncated(s, d), false);
      }
    }
  }
  return out;
}

RoutingTable random_route(const PathSet& ps, std::uint64_t seed) {
  RoutingTable rt(ps.size());
  std::mt19937_64 rng(seed);
  for (RouterId s = 0; s < ps.size(); ++s) {
    for (RouterId d = 0; d < ps.size(); ++d) {
      if (s == d) continue;
      const auto& paths = ps.paths(s, d);
      if (paths.empty()) throw InvalidArgument(fmt::format("no candidate path for flow ({},{})", s, d));
      std::uniform_int_distribution<std::size_t> pick(0, paths.size() - 1);
      rt.set(s, d, paths[pick(rng)]);
    }
  }
  return rt;
}

// ---------------------------------------------------------------------------
// Loads

LoadMap channel_loads(const RoutingTable& rt, const TrafficMatrix& traffic) {
  if (rt.size() != traffic.size()) throw InvalidArgument("routing table and traffic sizes differ");
  LoadMap loads;
  for (const FlowKey& f : rt.flows()) {
    const Path& p = rt.path(f.src, f.dst);
    for (std::size_t i = 0; i + 1 < p.size(); ++i) loads.touch({p[i], p[i + 1]});
  }
  for (const Flow& f : traffic.flows()) {
    const Path& p = rt.path(f.src, f.dst);
    for (std::size_t i = 0; i + 1 < p.size(); ++i) loads.add({p[i], p[i + 1]}, f.weight);
  }
  return loads;
}

Rational max_channel_load(const LoadMap& loads) { return loads.max(); }

// ---------------------------------------------------------------------------
// MCLB

namespace {

// Flattened instance in integer load units: load = units / denominator.
struct MclbInstance {
  int channel_count = 0;
  std::vector<Channel> channels;
  std::int64_t denominator = 1;
  struct FlowData {
    FlowKey key;
    std::int64_t weight = 0;
    std::vector<std::vector<int>> path_channels;  // per candidate
  };
  std::vector<FlowData> flows;
};

MclbInstance flatten(const PathSet& ps, const TrafficMatrix& traffic) {
  if (ps.size() != traffic.size()) throw InvalidArgument("path set and traffic sizes differ");
  MclbInstance inst;
  std::int64_t l = 1;
  for (const Flow& f : traffic.flows()) l = std::lcm(l, f.weight.denominator());
  inst.denominator = l;
  std::map<Channel, int> index;
  for (RouterId s = 0; s < ps.size(); ++s)
    for (RouterId d = 0; d < ps.size(); ++d)
      for (const Path& p : ps.paths(s, d))
        for (std::size_t i = 0; i + 1 < p.size(); ++i) index.try_emplace({p[i], p[i + 1]}, 0);
  for (auto& [c, i] : index) {
    i = static_cast<int>(inst.channels.size());
    inst.channels.push_back(c);
  }
  inst.channel_count = static_cast<int>(inst.channels.size());
  for (RouterId s = 0; s < ps.size(); ++s) {
    for (RouterId d = 0; d < ps.size(); ++d) {
      if (s == d) continue;
      const auto& paths = ps.paths(s, d);
      if (paths.empty()) throw InvalidArgument(fmt::format("no candidate path for flow ({},{})", s, d));
      MclbInstance::FlowData fd;
      fd.key = {s, d};
      Rational w = traffic.weight(s, d);
      fd.weight = w.numerator() * (l / w.denominator());
      for (const Path& p : paths) {
        std::vector<int> chans;
        for (std::size_t i = 0; i + 1 < p.size(); ++i) chans.push_back(index.at({p[i], p[i + 1]}));
        fd.path_channels.push_back(std::move(chans));
      }
      inst.flows.push_back(std::move(fd));
    }
  }
  return inst;
}

MclbResult assemble(const PathSet& ps, const TrafficMatrix& traffic, const MclbInstance& inst,
                    const std::vector<int>& choice) {
  RoutingTable rt(ps.size());
  for (std::size_t f = 0; f < inst.flows.size(); ++f) {
    const FlowKey& k = inst.flows[f].key;
    rt.set(k.src, k.dst, ps.paths(k.src, k.dst)[static_cast<std::size_t>(choice[f])]);
  }
  MclbResult r{rt, channel_loads(rt, traffic), false, 0};
  return r;
}

// Objective used by reassignment passes: (max, count at max, sum of squares).
struct LoadScore {
  std::int64_t max = 0;
  int at_max = 0;
  // __int128 avoids overflow of squared loads for large denominators.
  __int128 squares = 0;
  bool operator<(const LoadScore& o) const {
    return std::tie(max, at_max, squares) < std::tie(o.max, o.at_max, o.squares);
  }
};

LoadScore score_loads(const std::vector<std::int64_t>& load) {
  LoadScore s;
  for (std::int64_t l : load) {
    if (l > s.max) {
      s.max = l;
      s.at_max = 1;
    } else if (l == s.max) {
      ++s.at_max;
    }
    s.squares += static_cast<__int128>(l) * l;
  }
  return s;
}

std::vector<int> greedy_assignment(const MclbInstance& inst) {
  const std::size_t nf = inst.flows.size();
  std::vector<std::size_t> order(nf);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& fa = inst.flows[a];
    const auto& fb = inst.flows[b];
    if (fa.weight != fb.weight) return fa.weight > fb.weight;
    return fa.path_channels.size() < fb.path_channels.size();
  });
  std::vector<std::int64_t> load(static_cast<std::size_t>(inst.channel_count), 0);
  std::vector<int> choice(nf, 0);

  // Path key after adding weight w: (highest, second-highest load along the path).
  auto path_key = [&](const std::vector<int>& chans, std::int64_t w) {
    std::int64_t first = 0, second = 0;
    for (int c : chans) {
      std::int64_t l = load[static_cast<std::size_t>(c)] + w;
      if (l > first) {
        second = first;
        first = l;
      } else if (l > second) {
        second = l;
      }
    }
    return std::pair{first, second};
  };

  for (std::size_t f : order) {
    const auto& fd = inst.flows[f];
    int best = 0;
    auto best_key = path_key(fd.path_channels[0], fd.weight);
    for (std::size_t p = 1; p < fd.path_channels.size(); ++p) {
      auto key = path_key(fd.path_channels[p], fd.weight);
      if (key < best_key) {
        best_key = key;
        best = static_cast<int>(p);
      }
    }
    choice[f] = best;
    for (int c : fd.path_channels[static_cast<std::size_t>(best)]) load[static_cast<std::size_t>(c)] += fd.weight;
  }

  // Single-flow reassignment passes until no move strictly improves the score.
  bool changed = true;
  for (int pass = 0; changed && pass < 1000; ++pass) {
    changed = false;
    for (std::size_t f : order) {
      const auto& fd = inst.flows[f];
      if (fd.weight == 0 || fd.path_channels.size() < 2) continue;
      auto apply = [&](int p, std::int64_t sign) {
        for (int c : fd.path_channels[static_cast<std::size_t>(p)]) load[static_cast<std::size_t>(c)] += sign * fd.weight;
      };
      LoadScore current = score_loads(load);
      apply(choice[f], -1);
      int best = choice[f];
      LoadScore best_score = current;
      for (std::size_t p = 0; p < fd.path_channels.size(); ++p) {
        if (static_cast<int>(p) == choice[f]) continue;
        apply(static_cast<int>(p), +1);
        LoadScore s = score_loads(load);
        apply(static_cast<int>(p), -1);
        if (s < best_score) {
          best_score = s;
          best = static_cast<int>(p);
        }
      }
      apply(best, +1);
      if (best != choice[f]) {
        choice[f] = best;
        changed = true;
      }
    }
  }
  return choice;
}

std::int64_t max_load_of(const MclbInstance& inst, const std::vector<int>& choice) {
  std::vector<std::int64_t> load(static_cast<std::size_t>(inst.channel_count), 0);
  for (std::size_t f = 0; f < inst.flows.size(); ++f)
    for (int c : inst.flows[f].path_channels[static_cast<std::size_t>(choice[f])])
      load[static_cast<std::size_t>(c)] += inst.flows[f].weight;
  return load.empty() ? 0 : *std::max_element(load.begin(), load.end());
}

class ExactMclb {
 public:
  ExactMclb(const MclbInstance& inst, std::vector<int> incumbent, std::uint64_t node_limit)
      : inst_(inst), best_choice_(std::move(incumbent)), node_limit_(node_limit) {
    best_ = max_load_of(inst_, best_choice_);
    base_.assign(static_cast<std::size_t>(inst_.channel_count), 0);
    choice_ = best_choice_;
    std::int64_t total = 0;
    // Channels shared by every candidate of a flow carry its load regardless
    // of the choice; only the remaining channels are branched on.
    free_.resize(inst_.flows.size());
    for (std::size_t f = 0; f < inst_.flows.size(); ++f) {
      const auto& fd = inst_.flows[f];
      if (fd.weight == 0) continue;
      total += fd.weight * static_cast<std::int64_t>(fd.path_channels[0].size());
      std::vector<int> common = fd.path_channels[0];
      std::sort(common.begin(), common.end());
      for (const auto& pc : fd.path_channels) {
        std::vector<int> s = pc;
        std::sort(s.begin(), s.end());
        std::vector<int> keep;
        std::set_intersection(common.begin(), common.end(), s.begin(), s.end(), std::back_inserter(keep));
        common = std::move(keep);
      }
      for (int c : common) base_[static_cast<std::size_t>(c)] += fd.weight;
      for (const auto& pc : fd.path_channels) {
        std::vector<int> rest;
        for (int c : pc)
          if (!std::binary_search(common.begin(), common.end(), c)) rest.push_back(c);
        free_[f].push_back(std::move(rest));
      }
      if (fd.path_channels.size() > 1) branch_flows_.push_back(f);
    }
    std::stable_sort(branch_flows_.begin(), branch_flows_.end(), [&](std::size_t a, std::size_t b) {
      if (inst_.flows[a].weight != inst_.flows[b].weight) return inst_.flows[a].weight > inst_.flows[b].weight;
      return inst_.flows[a].path_channels.size() < inst_.flows[b].path_channels.size();
    });
    std::int64_t base_max = base_.empty() ? 0 : *std::max_element(base_.begin(), base_.end());
    std::int64_t avg = inst_.channel_count == 0 ? 0 : (total + inst_.channel_count - 1) / inst_.channel_count;
    lower_bound_ = std::max(base_max, avg);
  }

  void run() {
    if (best_ <= lower_bound_) {
      complete_ = true;
      return;
    }
    load_ = base_;
    std::int64_t start = load_.empty() ? 0 : *std::max_element(load_.begin(), load_.end());
    complete_ = search(0, start);
  }

  const std::vector<int>& best_choice() const { return best_choice_; }
  bool complete() const { return complete_; }
  std::uint64_t nodes() const { return nodes_; }

 private:
  bool search(std::size_t depth, std::int64_t cur_max) {
    if (++nodes_ > node_limit_) return false;
    if (depth == branch_flows_.size()) {
      best_ = cur_max;
      best_choice_ = choice_;
      return true;
    }
    const std::size_t f = branch_flows_[depth];
    const auto& fd = inst_.flows[f];
    // Try alternatives in order of resulting local maximum.
    std::vector<std::pair<std::int64_t, int>> alts;
    for (std::size_t p = 0; p < free_[f].size(); ++p) {
      std::int64_t m = cur_max;
      for (int c : free_[f][p]) m = std::max(m, load_[static_cast<std::size_t>(c)] + fd.weight);
      alts.emplace_back(m, static_cast<int>(p));
    }
    std::stable_sort(alts.begin(), alts.end());
    for (const auto& [m, p] : alts) {
      if (m >= best_) break;
      for (int c : free_[f][static_cast<std::size_t>(p)]) load_[static_cast<std::size_t>(c)] += fd.weight;
      choice_[f] = p;
      bool ok = search(depth + 1, m);
      for (int c : free_[f][static_cast<std::size_t>(p)]) load_[static_cast<std::size_t>(c)] -= fd.weight;
      if (!ok) return false;
      if (best_ <= lower_bound_) return true;
    }
    return true;
  }

  const MclbInstance& inst_;
  std::vector<int> best_choice_;
  std::vector<int> choice_;
  std::int64_t best_ = 0;
  std::int64_t lower_bound_ = 0;
  std::vector<std::int64_t> base_;
  std::vector<std::int64_t> load_;
  std::vector<std::vector<std::vector<int>>> free_;
  std::vector<std::size_t> branch_flows_;
  std::uint64_t node_limit_;
  std::uint64_t nodes_ = 0;
  bool complete_ = false;
};

}  // namespace

MclbResult mclb_route(const PathSet& ps, const TrafficMatrix& traffic, MclbMode mode, const MclbOptions& options) {
  if (mode == MclbMode::exact && ps.total_paths() > options.max_total_paths) {
    throw CapacityError(fmt::format("exact MCLB limited to {} candidate paths (got {}); use greedy mode",
                                    options.max_total_paths, ps.total_paths()));
  }
  MclbInstance inst = flatten(ps, traffic);
  std::vector<int> choice = greedy_assignment(inst);
  if (mode == MclbMode::greedy) return assemble(ps, traffic, inst, choice);

  ExactMclb solver(inst, choice, options.node_limit);
  solver.run();
  MclbResult r = assemble(ps, traffic, inst, solver.best_choice());
  r.proven_optimal = solver.complete();
  r.nodes = solver.nodes();
  return r;
}

}  // namespace netsmith
