#include <algorithm>
#include <numeric>

#include <fmt/format.h>

#include "netsmith/errors.hpp"
#include "netsmith/synth.hpp"
#include "synth_internal.hpp"

namespace netsmith {

Objective parse_objective(std::string_view text) {
  if (text == "latop") return Objective::latop;
  if (text == "scop") return Objective::scop;
  throw InvalidArgument(fmt::format("unknown objective '{}' (expected latop or scop)", text));
}

std::string to_string(Objective o) { return o == Objective::latop ? "latop" : "scop"; }

void SynthSpec::validate() const {
  if (radix_out < 1 || radix_in < 1) throw InvalidArgument("radix must be at least 1");
  if (diameter_cap && *diameter_cap < 0) throw InvalidArgument("diameter cap must be nonnegative");
  if (min_cut_bandwidth && *min_cut_bandwidth < 0) throw InvalidArgument("minimum cut bandwidth must be nonnegative");
  if (traffic && traffic->size() != layout.size()) throw InvalidArgument("traffic size does not match the layout");
}

TopologyConstraints SynthSpec::constraints() const {
  TopologyConstraints c;
  c.radix_out = radix_out;
  c.radix_in = radix_in;
  c.link_class = link_class;
  c.diameter_cap = diameter_cap;
  c.symmetric = symmetric;
  c.min_cut_bandwidth = min_cut_bandwidth;
  return c;
}

std::string progress_csv(const std::vector<ProgressRecord>& records) {
  std::string out = "time_s,incumbent,bound\n";
  for (const ProgressRecord& r : records) {
    out += fmt::format("{:.3f},{:.6f},{}\n", r.time_s, r.incumbent, r.bound ? fmt::format("{:.6f}", *r.bound) : "");
  }
  return out;
}

bool SolveReport::same_result(const SolveReport& o) const {
  if (progress.size() != o.progress.size()) return false;
  for (std::size_t i = 0; i < progress.size(); ++i) {
    if (progress[i].incumbent != o.progress[i].incumbent || progress[i].bound != o.progress[i].bound) return false;
  }
  return topology == o.topology && objective_value == o.objective_value && avg_hops == o.avg_hops &&
         bounds_gap == o.bounds_gap && proven_optimal == o.proven_optimal && evaluations == o.evaluations;
}

std::pair<Rational, Rational> evaluate_objective(const Topology& t, const SynthSpec& spec) {
  DistanceMatrix dm = apsp(t);
  Rational hops = avg_hops(dm);
  if (spec.objective == Objective::latop) {
    return {spec.traffic ? weighted_avg_hops(dm, *spec.traffic) : hops, hops};
  }
  CutMode mode = t.size() <= kExactCutLimit ? CutMode::exact : CutMode::local_search;
  return {sparsest_cut(t, mode).scaled_bandwidth, hops};
}

Topology seed_topology(const SynthSpec& spec) {
  const Layout& layout = spec.layout;
  const int n = layout.size();
  std::vector<int> out_deg(static_cast<std::size_t>(n), 0), in_deg(static_cast<std::size_t>(n), 0);
  std::vector<Channel> chosen;
  auto fits = [&](Channel c) {
    return out_deg[static_cast<std::size_t>(c.src)] < spec.radix_out && in_deg[static_cast<std::size_t>(c.dst)] < spec.radix_in;
  };
  auto take = [&](Channel c) {
    ++out_deg[static_cast<std::size_t>(c.src)];
    ++in_deg[static_cast<std::size_t>(c.dst)];
    chosen.push_back(c);
  };
  for (const Channel& c : valid_link_set(layout, spec.link_class)) {
    Offset o = offset_between(layout, c.src, c.dst);
    if (o.dx + o.dy != 1) continue;
    if (spec.symmetric) {
      if (c.src > c.dst) continue;
      Channel back{c.dst, c.src};
      if (fits(c) && fits(back)) {
        take(c);
        take(back);
      }
    } else if (fits(c)) {
      take(c);
    }
  }
  return Topology(layout, chosen, spec.link_class);
}

namespace detail {

IntegerWeights spec_weights(const SynthSpec& spec) {
  const int n = spec.layout.size();
  IntegerWeights iw;
  iw.w.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0);
  if (!spec.traffic) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j) iw.w[static_cast<std::size_t>(i * n + j)] = 1;
    iw.scale = static_cast<std::int64_t>(n) * (n - 1);
    return iw;
  }
  std::int64_t l = 1;
  for (const Flow& f : spec.traffic->flows()) l = std::lcm(l, f.weight.denominator());
  iw.scale = l;
  for (const Flow& f : spec.traffic->flows())
    iw.w[static_cast<std::size_t>(f.src * n + f.dst)] = f.weight.numerator() * (l / f.weight.denominator());
  return iw;
}

std::vector<Unit> candidate_units(const SynthSpec& spec) {
  std::vector<Unit> units;
  for (const Channel& c : valid_link_set(spec.layout, spec.link_class)) {
    if (spec.symmetric) {
      if (c.src < c.dst) units.push_back({c, true});
    } else {
      units.push_back({c, false});
    }
  }
  return units;
}

}  // namespace detail

}  // namespace netsmith
