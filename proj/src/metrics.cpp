#include "netsmith/metrics.hpp"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>

#include "bitgraph.hpp"
#include "netsmith/errors.hpp"
#include "netsmith/routing.hpp"

namespace netsmith {

// ---------------------------------------------------------------------------
// Distances

DistanceMatrix::DistanceMatrix(int n) : n_(n), d_(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), kUnreachable) {
  for (int i = 0; i < n; ++i) d_[static_cast<std::size_t>(i * n + i)] = 0;
}

std::optional<int> DistanceMatrix::distance(RouterId i, RouterId j) const {
  int d = raw(i, j);
  if (d == kUnreachable) return std::nullopt;
  return d;
}

int DistanceMatrix::hops(RouterId i, RouterId j) const {
  int d = raw(i, j);
  if (d == kUnreachable) throw DisconnectedError(fmt::format("router {} cannot reach router {}", i, j));
  return d;
}

void DistanceMatrix::set(RouterId i, RouterId j, std::optional<int> d) {
  d_[static_cast<std::size_t>(i) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(j)] = d ? *d : kUnreachable;
}

DistanceMatrix apsp(const Topology& t) {
  const int n = t.size();
  const auto un = static_cast<std::size_t>(n);
  constexpr int inf = 1 << 28;
  std::vector<int> d(un * un, inf);
  for (int i = 0; i < n; ++i) d[static_cast<std::size_t>(i) * un + static_cast<std::size_t>(i)] = 0;
  for (const Channel& c : t.channels()) d[static_cast<std::size_t>(c.src) * un + static_cast<std::size_t>(c.dst)] = 1;
  for (std::size_t k = 0; k < un; ++k) {
    for (std::size_t i = 0; i < un; ++i) {
      const int dik = d[i * un + k];
      if (dik == inf) continue;
      for (std::size_t j = 0; j < un; ++j) {
        const int via = dik + d[k * un + j];
        if (via < d[i * un + j]) d[i * un + j] = via;
      }
    }
  }
  DistanceMatrix dm(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      int v = d[static_cast<std::size_t>(i) * un + static_cast<std::size_t>(j)];
      dm.set(i, j, v == inf ? std::nullopt : std::optional<int>(v));
    }
  return dm;
}

Rational avg_hops(const DistanceMatrix& dm) {
  const int n = dm.size();
  if (n < 2) return Rational(0);
  std::int64_t total = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) total += dm.hops(i, j);
  return Rational(total, static_cast<std::int64_t>(n) * (n - 1));
}

Rational weighted_avg_hops(const DistanceMatrix& dm, const TrafficMatrix& traffic) {
  if (traffic.size() != dm.size()) throw InvalidArgument("traffic and distance matrix sizes differ");
  Rational total(0);
  for (const Flow& f : traffic.flows()) total += f.weight * dm.hops(f.src, f.dst);
  return total;
}

int diameter(const DistanceMatrix& dm) {
  int best = 0;
  for (int i = 0; i < dm.size(); ++i)
    for (int j = 0; j < dm.size(); ++j)
      if (auto d = dm.distance(i, j)) best = std::max(best, *d);
  return best;
}

bool is_connected(const DistanceMatrix& dm) {
  for (int i = 0; i < dm.size(); ++i)
    for (int j = 0; j < dm.size(); ++j)
      if (!dm.reachable(i, j)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Cuts

CutReport make_cut_report(const Topology& t, const std::vector<bool>& in_u) {
  const int n = t.size();
  if (static_cast<int>(in_u.size()) != n) throw InvalidArgument("partition size differs from router count");
  CutReport r;
  for (RouterId i = 0; i < n; ++i) (in_u[static_cast<std::size_t>(i)] ? r.u : r.v).push_back(i);
  if (r.u.empty() || r.v.empty()) throw InvalidArgument("both sides of a cut must be nonempty");
  for (const Channel& c : t.channels()) {
    bool su = in_u[static_cast<std::size_t>(c.src)];
    bool du = in_u[static_cast<std::size_t>(c.dst)];
    if (su && !du) ++r.forward_channels;
    if (!su && du) ++r.reverse_channels;
  }
  r.scaled_bandwidth = Rational(std::min(r.forward_channels, r.reverse_channels),
                                static_cast<std::int64_t>(r.u.size()) * static_cast<std::int64_t>(r.v.size()));
  return r;
}

namespace {

std::vector<bool> mask_to_sides(detail::Mask u, int n) {
  std::vector<bool> in_u(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) in_u[static_cast<std::size_t>(i)] = (u >> i) & 1U;
  return in_u;
}

void require_exact_capacity(const Topology& t, std::string_view what) {
  if (t.size() > kExactCutLimit) {
    throw CapacityError(fmt::format("exact {} enumerates 2^(N-1) bipartitions and is limited to N <= {} (got {}); "
                                    "use local_search",
                                    what, kExactCutLimit, t.size()));
  }
}

// Incremental cut evaluator over adjacency lists for local search at any N.
class CutState {
 public:
  CutState(const Topology& t, std::vector<bool> in_u) : t_(t), in_u_(std::move(in_u)) {
    for (bool b : in_u_) b ? ++usize_ : ++vsize_;
    for (const Channel& c : t.channels()) {
      bool su = in_u_[static_cast<std::size_t>(c.src)], du = in_u_[static_cast<std::size_t>(c.dst)];
      if (su && !du) ++fwd_;
      if (!su && du) ++rev_;
    }
  }

  Rational value() const {
    if (usize_ == 0 || vsize_ == 0) return Rational(1 << 30);
    return Rational(std::min(fwd_, rev_), static_cast<std::int64_t>(usize_) * vsize_);
  }

  void flip(RouterId r) {
    const auto ri = static_cast<std::size_t>(r);
    const bool was_u = in_u_[ri];
    for (RouterId x : t_.out_neighbors(r)) {
      bool xu = in_u_[static_cast<std::size_t>(x)];
      if (was_u && !xu) --fwd_;
      if (!was_u && xu) --rev_;
      if (!was_u && !xu) ++fwd_;
      if (was_u && xu) ++rev_;
    }
    for (RouterId x : t_.in_neighbors(r)) {
      bool xu = in_u_[static_cast<std::size_t>(x)];
      if (xu && !was_u) --fwd_;
      if (!xu && was_u) --rev_;
      if (xu && was_u) ++fwd_;
      if (!xu && !was_u) ++rev_;
    }
    in_u_[ri] = !was_u;
    if (was_u) {
      --usize_;
      ++vsize_;
    } else {
      ++usize_;
      --vsize_;
    }
  }

  const std::vector<bool>& sides() const { return in_u_; }

 private:
  const Topology& t_;
  std::vector<bool> in_u_;
  int fwd_ = 0, rev_ = 0, usize_ = 0, vsize_ = 0;
};

CutReport local_search_cut(const Topology& t) {
  const int n = t.size();
  if (n < 2) throw InvalidArgument("a cut needs at least two routers");
  DistanceMatrix dm = apsp(t);
  std::vector<bool> best_sides;
  Rational best_value(1 << 30);

  auto consider = [&](const std::vector<bool>& sides) {
    CutState st(t, sides);
    Rational v = st.value();
    if (v < best_value) {
      best_value = v;
      best_sides = sides;
    }
  };

  // Seeds: distance-ball sweeps from every router, in both edge directions.
  for (RouterId s = 0; s < n; ++s) {
    for (int dir = 0; dir < 2; ++dir) {
      std::vector<RouterId> order(static_cast<std::size_t>(n));
      std::iota(order.begin(), order.end(), 0);
      auto key = [&](RouterId r) {
        auto d = dir == 0 ? dm.distance(s, r) : dm.distance(r, s);
        return d ? *d : n + 1;
      };
      std::stable_sort(order.begin(), order.end(), [&](RouterId a, RouterId b) { return key(a) < key(b); });
      std::vector<bool> sides(static_cast<std::size_t>(n), false);
      CutState st(t, sides);
      for (int k = 0; k + 1 < n; ++k) {
        st.flip(order[static_cast<std::size_t>(k)]);
        if (st.value() < best_value) {
          best_value = st.value();
          best_sides = st.sides();
        }
      }
    }
  }
  // Single-router moves until no improvement.
  CutState st(t, best_sides);
  bool improved = true;
  while (improved) {
    improved = false;
    for (RouterId r = 0; r < n; ++r) {
      st.flip(r);
      if (st.value() < best_value) {
        best_value = st.value();
        best_sides = st.sides();
        improved = true;
      } else {
        st.flip(r);
      }
    }
  }
  consider(best_sides);
  return make_cut_report(t, best_sides);
}

}  // namespace

CutReport sparsest_cut(const Topology& t, CutMode mode) {
  if (t.size() < 2) throw InvalidArgument("a cut needs at least two routers");
  if (mode == CutMode::local_search) return local_search_cut(t);
  require_exact_capacity(t, "sparsest cut");
  auto out = t.out_masks();
  auto in = t.in_masks();
  auto scan = detail::scan_cuts(out, in, t.size(), false);
  return make_cut_report(t, mask_to_sides(scan.u, t.size()));
}

CutReport bisection_cut(const Topology& t) {
  if (t.size() < 2) throw InvalidArgument("a cut needs at least two routers");
  require_exact_capacity(t, "bisection bandwidth");
  auto out = t.out_masks();
  auto in = t.in_masks();
  auto scan = detail::scan_cuts(out, in, t.size(), true);
  return make_cut_report(t, mask_to_sides(scan.u, t.size()));
}

int bisection_bandwidth(const Topology& t) {
  CutReport r = bisection_cut(t);
  return std::min(r.forward_channels, r.reverse_channels);
}

// ---------------------------------------------------------------------------
// Throughput bounds

Rational ThroughputBounds::tightest() const {
  Rational best = std::min(cut_bound, occupancy_bound);
  if (mcl_bound) best = std::min(best, *mcl_bound);
  return best;
}

namespace {

// Scale normalized demand to integers: w = weights[i] / denominator.
struct IntegerDemand {
  std::vector<std::int64_t> weights;  // row-major n*n
  std::int64_t denominator = 1;
};

IntegerDemand integer_demand(const TrafficMatrix& traffic) {
  IntegerDemand out;
  const int n = traffic.size();
  std::int64_t l = 1;
  for (const Flow& f : traffic.flows()) l = std::lcm(l, f.weight.denominator());
  out.denominator = l;
  out.weights.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0);
  for (const Flow& f : traffic.flows())
    out.weights[static_cast<std::size_t>(f.src * n + f.dst)] = f.weight.numerator() * (l / f.weight.denominator());
  return out;
}

// min over directed cuts (U->V) with positive demand of fwd / demand, as
// channels * denominator / weight-units. Returns (num, den) of the minimum.
std::pair<std::int64_t, std::int64_t> cut_ratio_exact(const Topology& t, const IntegerDemand& dem) {
  const int n = t.size();
  auto out = t.out_masks();
  auto in = t.in_masks();
  const auto& w = dem.weights;
  auto W = [&](int i, int j) { return w[static_cast<std::size_t>(i * n + j)]; };
  std::int64_t best_num = -1, best_den = 1;
  auto consider = [&](std::int64_t channels, std::int64_t demand) {
    if (demand <= 0) return;
    if (best_num < 0 || detail::ratio_less(channels, demand, best_num, best_den)) {
      best_num = channels;
      best_den = demand;
    }
  };
  detail::Mask u = 0;
  int fwd = 0, rev = 0;
  std::int64_t d_uv = 0, d_vu = 0;
  const std::uint64_t steps = std::uint64_t{1} << (n - 1);
  for (std::uint64_t g = 1; g < steps; ++g) {
    const int v = std::countr_zero(g);
    const detail::Mask vb = detail::bit(v);
    const auto vi = static_cast<std::size_t>(v);
    const bool joining = !(u & vb);
    const detail::Mask u_other = u & ~vb;
    const detail::Mask v_other = detail::all_bits(n) & ~u & ~vb;
    std::int64_t to_v = 0, from_v = 0, to_u = 0, from_u = 0;
    for (detail::Mask m = v_other; m; m &= m - 1) {
      int x = std::countr_zero(m);
      to_v += W(v, x);
      from_v += W(x, v);
    }
    for (detail::Mask m = u_other; m; m &= m - 1) {
      int x = std::countr_zero(m);
      to_u += W(v, x);
      from_u += W(x, v);
    }
    if (joining) {
      fwd += detail::popcount(out[vi] & v_other) - detail::popcount(in[vi] & u_other);
      rev += detail::popcount(in[vi] & v_other) - detail::popcount(out[vi] & u_other);
      d_uv += to_v - from_u;
      d_vu += from_v - to_u;
      u |= vb;
    } else {
      fwd += detail::popcount(in[vi] & u_other) - detail::popcount(out[vi] & v_other);
      rev += detail::popcount(out[vi] & u_other) - detail::popcount(in[vi] & v_other);
      d_uv += from_u - to_v;
      d_vu += to_u - from_v;
      u = u_other;
    }
    consider(fwd, d_uv);
    consider(rev, d_vu);
  }
  return {best_num, best_den};
}

}  // namespace

ThroughputBounds throughput_bounds(const Topology& t, const TrafficMatrix& traffic, const RoutingTable* routing) {
  const int n = t.size();
  if (traffic.size() != n) throw InvalidArgument("traffic size differs from router count");
  DistanceMatrix dm = apsp(t);
  if (!is_connected(dm)) throw DisconnectedError("throughput bounds need a strongly connected topology");
  const std::int64_t active = traffic.active_sources();
  ThroughputBounds b;

  Rational flit_hops = weighted_avg_hops(dm, traffic);
  b.occupancy_bound = Rational(static_cast<std::int64_t>(t.channel_count())) / (flit_hops * active);

  if (traffic.is_uniform()) {
    CutReport cut = sparsest_cut(t, n <= kExactCutLimit ? CutMode::exact : CutMode::local_search);
    b.cut_bound_exact = n <= kExactCutLimit;
    b.cut_bound = cut.scaled_bandwidth * static_cast<std::int64_t>(n - 1);
  } else if (n <= kExactCutLimit) {
    IntegerDemand dem = integer_demand(traffic);
    auto [num, den] = cut_ratio_exact(t, dem);
    b.cut_bound = Rational(num, den) * dem.denominator / active;
  } else {
    // Candidate cuts only: singletons plus the local-search sparsest cut.
    b.cut_bound_exact = false;
    std::vector<std::vector<bool>> candidates;
    for (RouterId r = 0; r < n; ++r) {
      std::vector<bool> s(static_cast<std::size_t>(n), false);
      s[static_cast<std::size_t>(r)] = true;
      candidates.push_back(s);
    }
    CutReport ls = sparsest_cut(t, CutMode::local_search);
    std::vector<bool> s(static_cast<std::size_t>(n), false);
    for (RouterId r : ls.u) s[static_cast<std::size_t>(r)] = true;
    candidates.push_back(s);
    std::optional<Rational> best;
    for (const auto& side : candidates) {
      CutReport r = make_cut_report(t, side);
      Rational d_uv(0), d_vu(0);
      for (const Flow& f : traffic.flows()) {
        bool su = side[static_cast<std::size_t>(f.src)], du = side[static_cast<std::size_t>(f.dst)];
        if (su && !du) d_uv += f.weight;
        if (!su && du) d_vu += f.weight;
      }
      if (d_uv > 0) {
        Rational v = Rational(r.forward_channels) / (d_uv * active);
        if (!best || v < *best) best = v;
      }
      if (d_vu > 0) {
        Rational v = Rational(r.reverse_channels) / (d_vu * active);
        if (!best || v < *best) best = v;
      }
    }
    b.cut_bound = best.value_or(Rational(0));
  }

  if (routing != nullptr) {
    LoadMap loads = channel_loads(*routing, traffic);
    Rational mcl = max_channel_load(loads);
    if (mcl > 0) b.mcl_bound = Rational(1) / (mcl * active);
  }
  return b;
}

// ---------------------------------------------------------------------------
// Constraint validation

std::vector<std::string> check_constraints(const Topology& t, const TopologyConstraints& c) {
  std::vector<std::string> problems;
  const int n = t.size();
  for (RouterId r = 0; r < n; ++r) {
    auto out = static_cast<int>(t.out_neighbors(r).size());
    auto in = static_cast<int>(t.in_neighbors(r).size());
    if (out > c.radix_out) problems.push_back(fmt::format("router {} out-degree {} exceeds radix {}", r, out, c.radix_out));
    if (in > c.radix_in) problems.push_back(fmt::format("router {} in-degree {} exceeds radix {}", r, in, c.radix_in));
  }
  if (c.link_class) {
    for (const Channel& ch : t.channels())
      if (!c.link_class->allows(t.layout(), ch.src, ch.dst))
        problems.push_back(fmt::format("channel ({},{}) outside link class {}", ch.src, ch.dst, c.link_class->name()));
  }
  if (c.symmetric && !t.symmetric()) problems.push_back("topology is not symmetric");
  DistanceMatrix dm = apsp(t);
  if (!is_connected(dm)) {
    problems.push_back("topology is not strongly connected");
    return problems;
  }
  if (c.diameter_cap && diameter(dm) > *c.diameter_cap)
    problems.push_back(fmt::format("diameter {} exceeds cap {}", diameter(dm), *c.diameter_cap));
  if (c.min_cut_bandwidth && n >= 2 && n <= kExactCutLimit) {
    CutReport cut = sparsest_cut(t);
    if (cut.scaled_bandwidth < *c.min_cut_bandwidth)
      problems.push_back(fmt::format("sparsest cut {} below required {}", to_string(cut.scaled_bandwidth),
                                     to_string(*c.min_cut_bandwidth)));
  }
  return problems;
}

}  // namespace netsmith
