#include <chrono>

#include <fmt/format.h>

#include "netsmith/errors.hpp"
#include "netsmith/synth.hpp"
#include "synth_internal.hpp"

namespace netsmith {

namespace {

using detail::Mask;
using detail::bit;

struct Score {
  // LatOp: weighted hop total (lower is better). SCOp: cut num/den (higher
  // is better) with hop total as tie-break.
  std::int64_t hops = 0;
  std::int64_t weighted = 0;
  std::int64_t cut_num = 0;
  std::int64_t cut_den = 1;
};

class BranchAndBound {
 public:
  BranchAndBound(const SynthSpec& spec, double budget_s)
      : spec_(spec),
        n_(spec.layout.size()),
        units_(detail::candidate_units(spec)),
        weights_(detail::spec_weights(spec)),
        budget_s_(budget_s) {
    out_.assign(static_cast<std::size_t>(n_), 0);
    in_.assign(static_cast<std::size_t>(n_), 0);
    out_deg_.assign(static_cast<std::size_t>(n_), 0);
    in_deg_.assign(static_cast<std::size_t>(n_), 0);
    state_.assign(units_.size(), 0);
    start_ = std::chrono::steady_clock::now();
  }

  SolveReport run() {
    // Root bound from the graph holding every candidate.
    std::vector<Mask> all_out(static_cast<std::size_t>(n_), 0), all_in(static_cast<std::size_t>(n_), 0);
    for (const auto& u : units_) {
      add_edges(all_out, all_in, u);
    }
    Score root = score(all_out, all_in);
    root_bound_ = scop() ? static_cast<double>(root.cut_num) / static_cast<double>(root.cut_den)
                         : static_cast<double>(root.weighted) / static_cast<double>(weights_.scale);
    complete_ = search(0);
    return report();
  }

 private:
  bool scop() const { return spec_.objective == Objective::scop; }

  void add_edges(std::vector<Mask>& out, std::vector<Mask>& in, const detail::Unit& u) const {
    out[static_cast<std::size_t>(u.a.src)] |= bit(u.a.dst);
    in[static_cast<std::size_t>(u.a.dst)] |= bit(u.a.src);
    if (u.paired) {
      out[static_cast<std::size_t>(u.a.dst)] |= bit(u.a.src);
      in[static_cast<std::size_t>(u.a.src)] |= bit(u.a.dst);
    }
  }

  bool addable(const detail::Unit& u) const {
    auto ok = [&](RouterId s, RouterId d) {
      return out_deg_[static_cast<std::size_t>(s)] < spec_.radix_out && in_deg_[static_cast<std::size_t>(d)] < spec_.radix_in;
    };
    return ok(u.a.src, u.a.dst) && (!u.paired || ok(u.a.dst, u.a.src));
  }

  void apply(const detail::Unit& u, int sign) {
    auto one = [&](RouterId s, RouterId d) {
      out_deg_[static_cast<std::size_t>(s)] += sign;
      in_deg_[static_cast<std::size_t>(d)] += sign;
      if (sign > 0) {
        out_[static_cast<std::size_t>(s)] |= bit(d);
        in_[static_cast<std::size_t>(d)] |= bit(s);
      } else {
        out_[static_cast<std::size_t>(s)] &= ~bit(d);
        in_[static_cast<std::size_t>(d)] &= ~bit(s);
      }
    };
    one(u.a.src, u.a.dst);
    if (u.paired) one(u.a.dst, u.a.src);
  }

  Score score(const std::vector<Mask>& out, const std::vector<Mask>& in) const {
    Score s;
    auto st = detail::hop_stats(out, n_, weights_.w);
    s.hops = st.total;
    s.weighted = st.weighted_total;
    if (scop() || spec_.min_cut_bandwidth) {
      auto cut = detail::scan_cuts(out, in, n_, false);
      s.cut_num = cut.crossing();
      s.cut_den = static_cast<std::int64_t>(cut.u_size) * (n_ - cut.u_size);
    }
    return s;
  }

  bool feasible(const std::vector<Mask>& out) const {
    auto st = detail::hop_stats(out, n_);
    if (st.unreachable > 0) return false;
    if (spec_.diameter_cap && st.max_distance > *spec_.diameter_cap) return false;
    return true;
  }

  bool meets_min_cut(const Score& s) const {
    if (!spec_.min_cut_bandwidth) return true;
    return Rational(s.cut_num, s.cut_den) >= *spec_.min_cut_bandwidth;
  }

  /// True when a completion of the current node might beat the incumbent,
  /// given the optimistic score.
  bool promising(const Score& optimistic) const {
    if (!have_best_) return true;
    if (scop()) {
      std::int64_t lhs = optimistic.cut_num * best_.cut_den, rhs = best_.cut_num * optimistic.cut_den;
      if (lhs != rhs) return lhs > rhs;
      return optimistic.hops < best_.hops;
    }
    return optimistic.weighted < best_.weighted;
  }

  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

  bool out_of_time() {
    if ((nodes_ & 255) == 0 && elapsed() > budget_s_) timed_out_ = true;
    return timed_out_;
  }

  bool search(std::size_t depth) {
    ++nodes_;
    if (out_of_time()) return false;
    // Optimistic completion: everything still addable is added.
    std::vector<Mask> opt_out = out_, opt_in = in_;
    for (std::size_t i = depth; i < units_.size(); ++i)
      if (addable(units_[i])) add_edges(opt_out, opt_in, units_[i]);
    if (!feasible(opt_out)) return true;
    Score optimistic = score(opt_out, opt_in);
    if (!meets_min_cut(optimistic) || !promising(optimistic)) return true;

    if (depth == units_.size()) {
      for (std::size_t i = 0; i < units_.size(); ++i)
        if (!state_[i] && addable(units_[i])) return true;  // dominated by a superset
      ++leaves_;
      best_ = optimistic;
      have_best_ = true;
      best_state_ = state_;
      ProgressRecord rec;
      rec.time_s = elapsed();
      rec.incumbent = incumbent_value();
      rec.bound = root_bound_;
      progress_.push_back(rec);
      return true;
    }
    const detail::Unit& u = units_[depth];
    if (addable(u)) {
      apply(u, +1);
      state_[depth] = 1;
      bool ok = search(depth + 1);
      apply(u, -1);
      state_[depth] = 0;
      if (!ok) return false;
    }
    return search(depth + 1);
  }

  double incumbent_value() const {
    return scop() ? static_cast<double>(best_.cut_num) / static_cast<double>(best_.cut_den)
                  : static_cast<double>(best_.weighted) / static_cast<double>(weights_.scale);
  }

  SolveReport report() {
    if (!have_best_) {
      if (complete_) throw InfeasibleSpec("no topology satisfies the spec");
      throw CapacityError(fmt::format("budget of {} s exhausted before a feasible topology was found", budget_s_));
    }
    std::vector<Channel> chosen;
    for (std::size_t i = 0; i < units_.size(); ++i) {
      if (!best_state_[i]) continue;
      chosen.push_back(units_[i].a);
      if (units_[i].paired) chosen.push_back({units_[i].a.dst, units_[i].a.src});
    }
    SolveReport r;
    r.topology = Topology(spec_.layout, chosen, spec_.link_class);
    r.objective_value = scop() ? Rational(best_.cut_num, best_.cut_den) : Rational(best_.weighted, weights_.scale);
    r.avg_hops = Rational(best_.hops, static_cast<std::int64_t>(n_) * (n_ - 1));
    r.proven_optimal = complete_;
    r.evaluations = nodes_;
    if (complete_) {
      r.bounds_gap = Rational(0);
      ProgressRecord last{elapsed(), incumbent_value(), incumbent_value()};
      progress_.push_back(last);
    } else {
      double inc = incumbent_value();
      double gap = scop() ? (root_bound_ - inc) / root_bound_ : (inc - root_bound_) / inc;
      gap = std::clamp(gap, 0.0, 1.0);
      r.bounds_gap = Rational(static_cast<std::int64_t>(gap * 1e6), 1000000);
    }
    r.progress = progress_;
    r.wall_time = elapsed();
    return r;
  }

  const SynthSpec& spec_;
  int n_;
  std::vector<detail::Unit> units_;
  detail::IntegerWeights weights_;
  double budget_s_;
  std::chrono::steady_clock::time_point start_;

  std::vector<Mask> out_, in_;
  std::vector<int> out_deg_, in_deg_;
  std::vector<char> state_;

  bool have_best_ = false;
  Score best_;
  std::vector<char> best_state_;
  double root_bound_ = 0;
  std::vector<ProgressRecord> progress_;
  std::uint64_t nodes_ = 0;
  std::uint64_t leaves_ = 0;
  bool complete_ = false;
  bool timed_out_ = false;
};

}  // namespace

SolveReport solve_exact(const SynthSpec& spec, double budget_s) {
  spec.validate();
  const int n = spec.layout.size();
  if (n > kExactSolverLimit) {
    throw CapacityError(fmt::format("exact synthesis is limited to {} routers (got {}); use the heuristic or LP export",
                                    kExactSolverLimit, n));
  }
  if (n < 2) throw InvalidArgument("synthesis needs at least two routers");
  if (spec.diameter_cap && *spec.diameter_cap < 1) throw InfeasibleSpec("diameter cap below 1 admits no topology");
  BranchAndBound bb(spec, budget_s);
  return bb.run();
}

}  // namespace netsmith
