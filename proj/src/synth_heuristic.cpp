#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <random>
#include <thread>
#include <unordered_set>

#include <fmt/format.h>

#include "netsmith/errors.hpp"
#include "netsmith/seed.hpp"
#include "netsmith/synth.hpp"
#include "synth_internal.hpp"

namespace netsmith {

namespace {

using detail::Mask;
using detail::bit;
using Clock = std::chrono::steady_clock;

/// Shared read-only view of the search space.
struct Problem {
  SynthSpec spec;
  int n = 0;
  std::vector<detail::Unit> units;
  std::vector<int> unit_of;  // n*n, -1 when (s,d) is not a candidate
  std::vector<std::vector<RouterId>> out_cands;
  std::vector<std::vector<RouterId>> in_cands;
  detail::IntegerWeights weights;
  bool weighted = false;
  bool scop = false;
  double cut_scale = 0;  // energy per unit of scaled cut
  double lex_scale = 0;  // energy per unit of weighted hops when weighted
  Clock::time_point deadline;

  explicit Problem(const SynthSpec& s) : spec(s) {
    n = s.layout.size();
    units = detail::candidate_units(s);
    unit_of.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), -1);
    out_cands.resize(static_cast<std::size_t>(n));
    in_cands.resize(static_cast<std::size_t>(n));
    for (std::size_t u = 0; u < units.size(); ++u) {
      const Channel& c = units[u].a;
      unit_of[static_cast<std::size_t>(c.src * n + c.dst)] = static_cast<int>(u);
      out_cands[static_cast<std::size_t>(c.src)].push_back(c.dst);
      in_cands[static_cast<std::size_t>(c.dst)].push_back(c.src);
      if (units[u].paired) {
        unit_of[static_cast<std::size_t>(c.dst * n + c.src)] = static_cast<int>(u);
        out_cands[static_cast<std::size_t>(c.dst)].push_back(c.src);
        in_cands[static_cast<std::size_t>(c.src)].push_back(c.dst);
      }
    }
    for (auto& v : out_cands) std::sort(v.begin(), v.end());
    for (auto& v : in_cands) std::sort(v.begin(), v.end());
    weights = detail::spec_weights(s);
    weighted = s.traffic.has_value();
    scop = s.objective == Objective::scop;
    cut_scale = static_cast<double>(n) * n / 4.0 * n;
    lex_scale = static_cast<double>(n) * n * n;
  }
};

struct Eval {
  bool feasible = false;
  double energy = 0;
  std::int64_t weighted = 0;
  std::int64_t hops = 0;
  std::int64_t cut_num = 0;
  std::int64_t cut_den = 1;
  int ties = 0;
};

/// Incumbent order: LatOp (weighted, hops) ascending; SCOp cut descending
/// then hops ascending. Channel sets break remaining ties.
int compare_keys(const Problem& p, const Eval& a, const Eval& b) {
  if (p.scop) {
    std::int64_t l = a.cut_num * b.cut_den, r = b.cut_num * a.cut_den;
    if (l != r) return l > r ? -1 : 1;
  } else if (a.weighted != b.weighted) {
    return a.weighted < b.weighted ? -1 : 1;
  }
  if (a.hops != b.hops) return a.hops < b.hops ? -1 : 1;
  return 0;
}

struct Move {
  int remove[2] = {-1, -1};
  int add[2] = {-1, -1};
};

struct RestartResult {
  bool found = false;
  Eval best;
  std::vector<char> state;
  std::uint64_t evaluations = 0;
  double finished_at = 0;
};

class Annealer {
 public:
  Annealer(const Problem& p, std::uint64_t seed) : p_(p), rng_(seed) {
    const auto n = static_cast<std::size_t>(p_.n);
    out_.assign(n, 0);
    in_.assign(n, 0);
    out_deg_.assign(n, 0);
    in_deg_.assign(n, 0);
    included_.assign(p_.units.size(), 0);
    pos_.assign(p_.units.size(), -1);
  }

  RestartResult run(const Topology& seed, std::uint64_t iterations, Clock::time_point start) {
    load_channels(seed);
    if (p_.scop) {
      seed_cache();
      remember_cut(detail::scan_cuts(out_, in_, p_.n, false).u);
    }
    cur_ = evaluate();
    consider();
    const double t0 = 4.0, t_end = 0.05;
    const double decay = std::pow(t_end / t0, 1.0 / static_cast<double>(std::max<std::uint64_t>(iterations, 1)));
    const std::uint64_t stall_limit = std::max<std::uint64_t>(iterations / 20, 500);
    double temp = t0;
    std::uint64_t stall = 0;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::uint64_t k = 0; k < iterations; ++k) {
      if ((k & 4095) == 0 && Clock::now() > p_.deadline) break;
      temp *= decay;
      if (++stall > stall_limit) {
        // Restart from the best state at a raised temperature.
        if (result_.found) {
          load_state(result_.state);
          cur_ = result_.best;
        }
        temp = std::min(t0, temp * 4.0);
        stall = 0;
      }
      Move m;
      if (!propose(m)) continue;
      apply(m, true);
      double r = unit(rng_);
      double e_max = r <= 0.0 ? std::numeric_limits<double>::infinity() : cur_.energy - temp * std::log(r);
      Eval ev = evaluate();
      if (ev.energy <= e_max) {
        cur_ = ev;
        if (consider()) stall = 0;
      } else {
        apply(m, false);
      }
    }
    polish();
    result_.evaluations = evaluations_;
    result_.finished_at = std::chrono::duration<double>(Clock::now() - start).count();
    return result_;
  }

 private:
  // -- state ---------------------------------------------------------------

  void toggle(int u, bool on) {
    const detail::Unit& unit = p_.units[static_cast<std::size_t>(u)];
    auto one = [&](RouterId s, RouterId d) {
      const int sign = on ? 1 : -1;
      out_deg_[static_cast<std::size_t>(s)] += sign;
      in_deg_[static_cast<std::size_t>(d)] += sign;
      if (on) {
        out_[static_cast<std::size_t>(s)] |= bit(d);
        in_[static_cast<std::size_t>(d)] |= bit(s);
      } else {
        out_[static_cast<std::size_t>(s)] &= ~bit(d);
        in_[static_cast<std::size_t>(d)] &= ~bit(s);
      }
    };
    one(unit.a.src, unit.a.dst);
    if (unit.paired) one(unit.a.dst, unit.a.src);
    included_[static_cast<std::size_t>(u)] = on ? 1 : 0;
    if (on) {
      pos_[static_cast<std::size_t>(u)] = static_cast<int>(list_.size());
      list_.push_back(u);
    } else {
      int at = pos_[static_cast<std::size_t>(u)];
      int last = list_.back();
      list_[static_cast<std::size_t>(at)] = last;
      pos_[static_cast<std::size_t>(last)] = at;
      list_.pop_back();
      pos_[static_cast<std::size_t>(u)] = -1;
    }
  }

  bool fits(int u) const {
    const detail::Unit& unit = p_.units[static_cast<std::size_t>(u)];
    auto ok = [&](RouterId s, RouterId d) {
      return out_deg_[static_cast<std::size_t>(s)] < p_.spec.radix_out &&
             in_deg_[static_cast<std::size_t>(d)] < p_.spec.radix_in;
    };
    return ok(unit.a.src, unit.a.dst) && (!unit.paired || ok(unit.a.dst, unit.a.src));
  }

  void clear() {
    while (!list_.empty()) toggle(list_.back(), false);
  }

  void load_channels(const Topology& t) {
    clear();
    for (const Channel& c : t.channels()) {
      int u = p_.unit_of[static_cast<std::size_t>(c.src * p_.n + c.dst)];
      if (u >= 0 && !included_[static_cast<std::size_t>(u)] && fits(u)) toggle(u, true);
    }
  }

  void load_state(const std::vector<char>& state) {
    clear();
    for (std::size_t u = 0; u < state.size(); ++u)
      if (state[u]) toggle(static_cast<int>(u), true);
  }

  // -- moves ---------------------------------------------------------------

  int pick(std::size_t n) { return static_cast<int>(std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_)); }

  int unit_at(RouterId s, RouterId d) const {
    if (s == d) return -1;
    return p_.unit_of[static_cast<std::size_t>(s * p_.n + d)];
  }

  /// Checks that the move's additions fit once its removals are applied.
  bool admissible(const Move& m) {
    for (int a : m.add)
      if (a >= 0 && included_[static_cast<std::size_t>(a)]) return false;
    if (m.add[0] >= 0 && m.add[0] == m.add[1]) return false;
    for (int r : m.remove)
      if (r >= 0) toggle(r, false);
    bool ok = true;
    int added = -1;
    if (m.add[0] >= 0) {
      ok = fits(m.add[0]);
      if (ok) {
        toggle(m.add[0], true);
        added = m.add[0];
      }
    }
    if (ok && m.add[1] >= 0) ok = fits(m.add[1]);
    if (added >= 0) toggle(added, false);
    for (int r : m.remove)
      if (r >= 0) toggle(r, true);
    return ok;
  }

  bool propose(Move& m) {
    const double r = std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
    if (r < 0.15) {
      int u = pick(p_.units.size());
      m.add[0] = u;
    } else if (r < 0.25) {
      if (list_.empty()) return false;
      m.remove[0] = list_[static_cast<std::size_t>(pick(list_.size()))];
    } else if (r < 0.65) {
      if (list_.empty()) return false;
      int u = list_[static_cast<std::size_t>(pick(list_.size()))];
      Channel c = p_.units[static_cast<std::size_t>(u)].a;
      if (pick(2) == 0) {
        const auto& cands = p_.out_cands[static_cast<std::size_t>(c.src)];
        m.add[0] = unit_at(c.src, cands[static_cast<std::size_t>(pick(cands.size()))]);
      } else {
        const auto& cands = p_.in_cands[static_cast<std::size_t>(c.dst)];
        m.add[0] = unit_at(cands[static_cast<std::size_t>(pick(cands.size()))], c.dst);
      }
      if (m.add[0] < 0 || m.add[0] == u) return false;
      m.remove[0] = u;
    } else {
      if (list_.size() < 2) return false;
      int u1 = list_[static_cast<std::size_t>(pick(list_.size()))];
      int u2 = list_[static_cast<std::size_t>(pick(list_.size()))];
      if (u1 == u2) return false;
      Channel a = p_.units[static_cast<std::size_t>(u1)].a;
      Channel b = p_.units[static_cast<std::size_t>(u2)].a;
      if (p_.units[static_cast<std::size_t>(u2)].paired && pick(2) == 1) std::swap(b.src, b.dst);
      m.add[0] = unit_at(a.src, b.dst);
      m.add[1] = unit_at(b.src, a.dst);
      if (m.add[0] < 0 || m.add[1] < 0) return false;
      m.remove[0] = u1;
      m.remove[1] = u2;
    }
    return admissible(m);
  }

  void apply(const Move& m, bool forward) {
    if (forward) {
      for (int r : m.remove)
        if (r >= 0) toggle(r, false);
      for (int a : m.add)
        if (a >= 0) toggle(a, true);
    } else {
      for (int a : m.add)
        if (a >= 0) toggle(a, false);
      for (int r : m.remove)
        if (r >= 0) toggle(r, true);
    }
  }

  // -- evaluation ----------------------------------------------------------

  /// Hop part of the energy plus penalties; fills hop fields.
  double hop_energy(Eval& ev) {
    const int cap = p_.spec.diameter_cap.value_or(0);
    auto st = detail::hop_stats(out_, p_.n, p_.weighted ? std::span<const std::int64_t>(p_.weights.w) : std::span<const std::int64_t>{}, cap);
    ev.hops = st.total;
    ev.weighted = st.weighted_total;
    const double n = p_.n;
    double penalty = (static_cast<double>(st.unreachable) + static_cast<double>(st.excess)) * n;
    ev.feasible = st.unreachable == 0 && st.excess == 0;
    if (p_.weighted) {
      return (static_cast<double>(st.weighted_total) + static_cast<double>(st.weighted_unreachable) * n) * p_.lex_scale +
             static_cast<double>(st.total) + penalty;
    }
    return static_cast<double>(st.total) + penalty;
  }

  double cut_value(std::int64_t num, std::int64_t den) const { return static_cast<double>(num) / static_cast<double>(den); }

  void remember_cut(Mask u) {
    if (!cache_set_.insert(u).second) return;
    if (cache_.size() < kCacheSize) {
      cache_.push_back(u);
      return;
    }
    cache_set_.erase(cache_[cache_next_]);
    cache_[cache_next_] = u;
    cache_next_ = (cache_next_ + 1) % cache_.size();
  }

  /// Singletons plus the straight row and column splits of the grid.
  void seed_cache() {
    const Layout& l = p_.spec.layout;
    for (int r = 0; r < p_.n; ++r) remember_cut(bit(r));
    for (int x = 1; x < l.cols(); ++x) {
      Mask u = 0;
      for (int r = 0; r < p_.n; ++r)
        if (l.position(r).x < x) u |= bit(r);
      remember_cut(u);
    }
    for (int y = 1; y < l.rows(); ++y) {
      Mask u = 0;
      for (int r = 0; r < p_.n; ++r)
        if (l.position(r).y < y) u |= bit(r);
      remember_cut(u);
    }
  }

  /// Smallest ratio over remembered cuts, an upper bound on the sparsest cut,
  /// and how many remembered cuts attain it.
  void approximate_cut(Eval& ev) const {
    std::int64_t bn = 0, bd = 0;
    int ties = 0;
    for (Mask u : cache_) {
      auto c = detail::cut_counts(out_, p_.n, u);
      std::int64_t us = detail::popcount(u);
      std::int64_t num = std::min(c.forward, c.reverse), den = us * (p_.n - us);
      if (bd == 0 || detail::ratio_less(num, den, bn, bd)) {
        bn = num;
        bd = den;
        ties = 1;
      } else if (num * bd == bn * den) {
        ++ties;
      }
    }
    ev.cut_num = bn;
    ev.cut_den = bd;
    ev.ties = ties;
  }

  bool min_cut_ok(const Eval& ev) const {
    if (!p_.spec.min_cut_bandwidth) return true;
    return Rational(ev.cut_num, ev.cut_den) >= *p_.spec.min_cut_bandwidth;
  }

  Eval evaluate() {
    ++evaluations_;
    Eval ev;
    double e = hop_energy(ev);
    if (p_.scop) {
      approximate_cut(ev);
      e += -cut_value(ev.cut_num, ev.cut_den) * p_.cut_scale + kTieWeight * ev.ties;
    } else if (p_.spec.min_cut_bandwidth) {
      const Rational& need = *p_.spec.min_cut_bandwidth;
      auto scan = detail::scan_cuts(out_, in_, p_.n, false, std::pair{need.numerator(), need.denominator()});
      ev.cut_num = scan.crossing();
      ev.cut_den = static_cast<std::int64_t>(scan.u_size) * (p_.n - scan.u_size);
    }
    if (!min_cut_ok(ev)) {
      ev.feasible = false;
      e += p_.cut_scale;
    }
    ev.energy = e;
    return ev;
  }

  /// Records the current state when it is a new restart best. SCOp values
  /// are confirmed by an exact scan first; a refuted estimate adds the
  /// witness cut to the cache and re-scores the current state.
  bool consider() {
    if (!cur_.feasible) return false;
    if (result_.found) {
      int c = compare_keys(p_, cur_, result_.best);
      if (c > 0 || (c == 0 && !(included_ < result_.state))) return false;
    }
    if (p_.scop) {
      auto scan = detail::scan_cuts(out_, in_, p_.n, false);
      remember_cut(scan.u);
      const std::int64_t num = scan.crossing();
      const std::int64_t den = static_cast<std::int64_t>(scan.u_size) * (p_.n - scan.u_size);
      if (detail::ratio_less(num, den, cur_.cut_num, cur_.cut_den)) {
        cur_ = evaluate();
        return consider();
      }
    }
    result_.found = true;
    result_.best = cur_;
    result_.state = included_;
    return true;
  }

  /// Steepest descent from the best state over every add, swap and exchange.
  void polish() {
    if (result_.found) {
      load_state(result_.state);
      cur_ = result_.best;
    }
    for (int sweep = 0; sweep < 1000 && Clock::now() <= p_.deadline; ++sweep) {
      std::vector<Move> moves = neighborhood();
      std::optional<Move> best_move;
      Eval best_eval = cur_;
      for (const Move& m : moves) {
        if (!admissible(m)) continue;
        apply(m, true);
        Eval ev = evaluate();
        if (ev.energy < best_eval.energy - 1e-9) {
          best_eval = ev;
          best_move = m;
        }
        apply(m, false);
      }
      if (!best_move) break;
      apply(*best_move, true);
      cur_ = best_eval;
      consider();
    }
  }

  std::vector<Move> neighborhood() const {
    std::vector<Move> moves;
    for (std::size_t u = 0; u < p_.units.size(); ++u) {
      if (included_[u]) continue;
      Move m;
      m.add[0] = static_cast<int>(u);
      moves.push_back(m);
    }
    std::vector<int> sorted = list_;
    std::sort(sorted.begin(), sorted.end());
    for (int u : sorted) {
      Channel c = p_.units[static_cast<std::size_t>(u)].a;
      for (RouterId x : p_.out_cands[static_cast<std::size_t>(c.src)]) {
        int v = unit_at(c.src, x);
        if (v >= 0 && v != u) moves.push_back(Move{{u, -1}, {v, -1}});
      }
      for (RouterId x : p_.in_cands[static_cast<std::size_t>(c.dst)]) {
        int v = unit_at(x, c.dst);
        if (v >= 0 && v != u) moves.push_back(Move{{u, -1}, {v, -1}});
      }
    }
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      for (std::size_t j = i + 1; j < sorted.size(); ++j) {
        const detail::Unit& ua = p_.units[static_cast<std::size_t>(sorted[i])];
        const detail::Unit& ub = p_.units[static_cast<std::size_t>(sorted[j])];
        for (int flip = 0; flip < (ub.paired ? 2 : 1); ++flip) {
          Channel a = ua.a, b = ub.a;
          if (flip) std::swap(b.src, b.dst);
          int v1 = unit_at(a.src, b.dst), v2 = unit_at(b.src, a.dst);
          if (v1 >= 0 && v2 >= 0) moves.push_back(Move{{sorted[i], sorted[j]}, {v1, v2}});
        }
      }
    }
    return moves;
  }

  const Problem& p_;
  std::mt19937_64 rng_;
  std::vector<Mask> out_, in_;
  std::vector<int> out_deg_, in_deg_;
  std::vector<char> included_;
  std::vector<int> pos_;
  std::vector<int> list_;
  static constexpr std::size_t kCacheSize = 1024;
  static constexpr double kTieWeight = 1.0;
  std::vector<Mask> cache_;
  std::unordered_set<Mask> cache_set_;
  std::size_t cache_next_ = 0;
  Eval cur_;
  RestartResult result_;
  std::uint64_t evaluations_ = 0;
};

Topology state_topology(const Problem& p, const std::vector<char>& state) {
  std::vector<Channel> chosen;
  for (std::size_t u = 0; u < state.size(); ++u) {
    if (!state[u]) continue;
    chosen.push_back(p.units[u].a);
    if (p.units[u].paired) chosen.push_back({p.units[u].a.dst, p.units[u].a.src});
  }
  return Topology(p.spec.layout, chosen, p.spec.link_class);
}

bool channels_less(const Topology& a, const Topology& b) {
  return std::lexicographical_compare(a.channels().begin(), a.channels().end(), b.channels().begin(), b.channels().end());
}

}  // namespace

SolveReport solve_heuristic(const SynthSpec& spec, const HeuristicOptions& options) {
  spec.validate();
  const int n = spec.layout.size();
  if (n < 2) throw InvalidArgument("synthesis needs at least two routers");
  if (n > 64) throw CapacityError("heuristic synthesis supports at most 64 routers");
  if (options.restarts < 1) throw InvalidArgument("restarts must be at least 1");
  if (spec.diameter_cap && *spec.diameter_cap < 1) throw InfeasibleSpec("diameter cap below 1 admits no topology");

  const auto start = Clock::now();
  Problem problem(spec);
  problem.deadline = start + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(options.budget_s));
  if (problem.units.empty()) throw InfeasibleSpec("link class admits no link on this layout");
  std::uint64_t iterations = options.iterations;
  if (iterations == 0) iterations = problem.scop ? 60000 : 400000;
  const Topology seed = seed_topology(spec);

  const int restarts = options.restarts;
  int threads = options.threads > 0 ? options.threads : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, restarts);
  std::vector<RestartResult> results(static_cast<std::size_t>(restarts));
  auto work = [&](int r) {
    Annealer a(problem, derive_seed(options.seed, static_cast<std::uint64_t>(r)));
    results[static_cast<std::size_t>(r)] = a.run(seed, iterations, start);
  };
  if (threads == 1) {
    for (int r = 0; r < restarts; ++r) work(r);
  } else {
    for (int base = 0; base < restarts; base += threads) {
      std::vector<std::future<void>> batch;
      for (int r = base; r < std::min(restarts, base + threads); ++r) batch.push_back(std::async(std::launch::async, work, r));
      for (auto& f : batch) f.get();
    }
  }

  // Merge in restart order by (objective, tie-break key).
  SolveReport report;
  const RestartResult* best = nullptr;
  for (const RestartResult& r : results) {
    report.evaluations += r.evaluations;
    if (!r.found) continue;
    bool take = best == nullptr;
    if (!take) {
      int c = compare_keys(problem, r.best, best->best);
      take = c < 0 || (c == 0 && channels_less(state_topology(problem, r.state), state_topology(problem, best->state)));
    }
    if (take) {
      best = &r;
      ProgressRecord rec;
      rec.time_s = r.finished_at;
      rec.incumbent = problem.scop ? static_cast<double>(r.best.cut_num) / static_cast<double>(r.best.cut_den)
                                   : static_cast<double>(r.best.weighted) / static_cast<double>(problem.weights.scale);
      report.progress.push_back(rec);
    }
  }
  if (best == nullptr) throw InfeasibleSpec("no feasible topology found; the radix may be too small for connectivity");
  report.topology = state_topology(problem, best->state);
  report.objective_value = problem.scop ? Rational(best->best.cut_num, best->best.cut_den)
                                        : Rational(best->best.weighted, problem.weights.scale);
  report.avg_hops = Rational(best->best.hops, static_cast<std::int64_t>(n) * (n - 1));
  report.wall_time = std::chrono::duration<double>(Clock::now() - start).count();
  return report;
}

}  // namespace netsmith
