#pragma once

// Bitmask graph kernels shared by the metrics module and the solvers.
// Routers are bits of a 64-bit word, so these only apply for N <= 64.

#include <bit>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace netsmith::detail {

using Mask = std::uint64_t;

inline Mask bit(int i) { return Mask{1} << i; }
inline Mask all_bits(int n) { return n >= 64 ? ~Mask{0} : bit(n) - 1; }
inline int popcount(Mask m) { return std::popcount(m); }

struct HopStats {
  std::int64_t total = 0;           // sum of finite distances over ordered pairs
  std::int64_t weighted_total = 0;  // sum of weight * distance
  int unreachable = 0;              // ordered pairs with no path
  std::int64_t weighted_unreachable = 0;
  int max_distance = 0;
  std::int64_t excess = 0;          // sum over pairs of max(0, d - cap)
};

/// BFS from every router using frontier bitmasks. `weights` (row-major n*n)
/// may be empty for unit weights; `cap` <= 0 disables excess accounting.
inline HopStats hop_stats(std::span<const Mask> out, int n, std::span<const std::int64_t> weights = {},
                          int cap = 0) {
  HopStats st;
  const Mask everyone = all_bits(n);
  for (int s = 0; s < n; ++s) {
    Mask visited = bit(s);
    Mask frontier = bit(s);
    int depth = 0;
    while (frontier) {
      Mask next = 0;
      for (Mask f = frontier; f; f &= f - 1) next |= out[static_cast<std::size_t>(std::countr_zero(f))];
      next &= ~visited;
      if (!next) break;
      ++depth;
      visited |= next;
      const int count = popcount(next);
      st.total += static_cast<std::int64_t>(count) * depth;
      if (!weights.empty()) {
        for (Mask f = next; f; f &= f - 1)
          st.weighted_total += weights[static_cast<std::size_t>(s * n + std::countr_zero(f))] * depth;
      }
      if (cap > 0 && depth > cap) st.excess += static_cast<std::int64_t>(count) * (depth - cap);
      st.max_distance = depth;
      frontier = next;
    }
    Mask missing = everyone & ~visited;
    st.unreachable += popcount(missing);
    if (!weights.empty()) {
      for (Mask f = missing; f; f &= f - 1)
        st.weighted_unreachable += weights[static_cast<std::size_t>(s * n + std::countr_zero(f))];
    }
  }
  if (weights.empty()) st.weighted_total = st.total;
  return st;
}

/// Exact strong connectivity check via forward and backward reachability from 0.
inline bool strongly_connected(std::span<const Mask> out, std::span<const Mask> in, int n) {
  if (n <= 1) return true;
  auto reach = [&](std::span<const Mask> adj) {
    Mask visited = bit(0), frontier = bit(0);
    while (frontier) {
      Mask next = 0;
      for (Mask f = frontier; f; f &= f - 1) next |= adj[static_cast<std::size_t>(std::countr_zero(f))];
      next &= ~visited;
      visited |= next;
      frontier = next;
    }
    return visited;
  };
  const Mask everyone = all_bits(n);
  return reach(out) == everyone && reach(in) == everyone;
}

/// Channel counts across the cut U | V (V = complement of U).
struct CutCounts {
  int forward = 0;  // U -> V
  int reverse = 0;  // V -> U
};

inline CutCounts cut_counts(std::span<const Mask> out, int n, Mask u) {
  const Mask v = all_bits(n) & ~u;
  CutCounts c;
  for (int i = 0; i < n; ++i) {
    if (u & bit(i))
      c.forward += popcount(out[static_cast<std::size_t>(i)] & v);
    else
      c.reverse += popcount(out[static_cast<std::size_t>(i)] & u);
  }
  return c;
}

/// a/b < c/d for positive denominators.
inline bool ratio_less(std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t d) { return a * d < c * b; }

struct CutScan {
  Mask u = 0;
  int forward = 0;
  int reverse = 0;
  int u_size = 0;
  bool stopped_early = false;
  /// min(forward, reverse)
  int crossing() const { return forward < reverse ? forward : reverse; }
};

/// Enumerates every bipartition with router n-1 fixed in V using a Gray code
/// and returns the one minimizing min(fwd,rev)/(|U||V|) (or, when
/// `balanced_only`, min(fwd,rev) over balanced cuts). The first minimizer in
/// Gray order wins ties. With `stop_below` = (num, den) the scan returns as
/// soon as a cut scoring strictly below num/den is seen.
inline CutScan scan_cuts(std::span<const Mask> out, std::span<const Mask> in, int n, bool balanced_only,
                         std::optional<std::pair<std::int64_t, std::int64_t>> stop_below = std::nullopt) {
  CutScan best;
  bool have = false;
  std::int64_t best_num = 0, best_den = 1;
  if (n < 2) return best;
  const std::uint64_t steps = std::uint64_t{1} << (n - 1);
  const int lo = n / 2, hi = (n + 1) / 2;
  Mask u = 0;
  int fwd = 0, rev = 0, usize = 0;
  for (std::uint64_t g = 1; g < steps; ++g) {
    const int v = std::countr_zero(g);
    const Mask vb = bit(v);
    const std::size_t vi = static_cast<std::size_t>(v);
    if (!(u & vb)) {
      const Mask u_before = u;
      const Mask v_after = all_bits(n) & ~u & ~vb;
      fwd += popcount(out[vi] & v_after) - popcount(in[vi] & u_before);
      rev += popcount(in[vi] & v_after) - popcount(out[vi] & u_before);
      u |= vb;
      ++usize;
    } else {
      const Mask u_after = u & ~vb;
      const Mask v_before = all_bits(n) & ~u;
      fwd += popcount(in[vi] & u_after) - popcount(out[vi] & v_before);
      rev += popcount(out[vi] & u_after) - popcount(in[vi] & v_before);
      u = u_after;
      --usize;
    }
    std::int64_t num = fwd < rev ? fwd : rev;
    std::int64_t den = 1;
    if (balanced_only) {
      if (usize != lo && usize != hi) continue;
    } else {
      den = static_cast<std::int64_t>(usize) * (n - usize);
    }
    if (!have || ratio_less(num, den, best_num, best_den)) {
      have = true;
      best_num = num;
      best_den = den;
      best = CutScan{u, fwd, rev, usize, false};
      if (stop_below && ratio_less(num, den, stop_below->first, stop_below->second)) {
        best.stopped_early = true;
        return best;
      }
    }
  }
  return best;
}

}  // namespace netsmith::detail
