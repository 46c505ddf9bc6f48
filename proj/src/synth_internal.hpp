#pragma once

// Shared helpers for the synthesis solvers.

#include <cstdint>
#include <vector>

#include "bitgraph.hpp"
#include "netsmith/synth.hpp"

namespace netsmith::detail {

/// Demand scaled to integers: weight(s,d) = w[s*n+d] / scale.
struct IntegerWeights {
  std::vector<std::int64_t> w;
  std::int64_t scale = 1;
};

/// Unit weight per ordered pair when the spec has no traffic.
IntegerWeights spec_weights(const SynthSpec& spec);

/// A decision unit: one channel, or a channel pair when symmetry is forced.
struct Unit {
  Channel a;
  bool paired = false;
};

std::vector<Unit> candidate_units(const SynthSpec& spec);

}  // namespace netsmith::detail
