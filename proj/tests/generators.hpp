#pragma once

// Hand-rolled generators for small synthesis specs.

#include <random>
#include <set>
#include <vector>

#include "netsmith/synth.hpp"
#include "oracles.hpp"

namespace gen {

/// Random spec with N <= 6 and at most `max_candidates` candidate channels.
inline netsmith::SynthSpec tiny_spec(std::mt19937_64& rng, std::size_t max_candidates = 16) {
  using namespace netsmith;
  static const std::vector<Layout> layouts{{1, 4}, {1, 5}, {1, 6}, {2, 2}, {2, 3}, {3, 2}};
  static const std::vector<Offset> pool{{1, 0}, {0, 1}, {1, 1}, {2, 0}, {0, 2}, {2, 1}, {1, 2}};
  while (true) {
    SynthSpec s;
    s.layout = layouts[rng() % layouts.size()];
    switch (rng() % 3) {
      case 0: s.link_class = LinkClass::small(); break;
      case 1: s.link_class = LinkClass::medium(); break;
      default: {
        std::set<Offset> offs;
        for (const Offset& o : pool)
          if (rng() % 2) offs.insert(o);
        if (offs.empty()) continue;
        s.link_class = LinkClass::custom(offs);
      }
    }
    const auto cands = valid_link_set(s.layout, s.link_class);
    if (cands.empty() || cands.size() > max_candidates) continue;
    s.radix_out = 1 + static_cast<int>(rng() % 4);
    s.radix_in = rng() % 2 ? s.radix_out : 1 + static_cast<int>(rng() % 4);
    s.symmetric = rng() % 10 < 3;
    if (rng() % 10 < 3) s.diameter_cap = 1 + static_cast<int>(rng() % 4);
    if (rng() % 10 < 2) {
      static const std::vector<Rational> cuts{{1, 9}, {1, 6}, {1, 4}, {1, 5}};
      s.min_cut_bandwidth = cuts[rng() % cuts.size()];
    }
    if (rng() % 5 == 0) s.traffic = TrafficMatrix::shuffle(s.layout.size());
    return s;
  }
}

inline oracle::Feasibility feasibility(const netsmith::SynthSpec& s) {
  return {s.radix_out, s.radix_in, s.symmetric, s.diameter_cap, s.min_cut_bandwidth};
}

/// Exhaustive optimum for the spec's objective.
inline oracle::EnumResult brute_force(const netsmith::SynthSpec& s) {
  const bool scop = s.objective == netsmith::Objective::scop;
  return oracle::enumerate_topologies(s.layout.size(), netsmith::valid_link_set(s.layout, s.link_class), feasibility(s), scop,
                                      !scop && s.traffic ? &*s.traffic : nullptr);
}

}  // namespace gen
