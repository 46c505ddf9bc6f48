#include "netsmith/milp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <fmt/format.h>

#include "netsmith/errors.hpp"
#include "synth_internal.hpp"

namespace netsmith {

int MilpModel::add_var(MilpVar v) {
  if (index_.contains(v.name)) throw InvalidArgument(fmt::format("duplicate variable {}", v.name));
  int i = static_cast<int>(vars.size());
  index_.emplace(v.name, i);
  vars.push_back(std::move(v));
  return i;
}

int MilpModel::find(std::string_view name) const {
  auto it = index_.find(name);
  return it == index_.end() ? -1 : it->second;
}

int MilpModel::var(std::string_view name) const {
  int i = find(name);
  if (i < 0) throw InvalidArgument(fmt::format("unknown variable {}", name));
  return i;
}

void MilpModel::add_row(MilpRow r) {
  if (row_index_.contains(r.name)) throw InvalidArgument(fmt::format("duplicate row {}", r.name));
  for (const MilpTerm& t : r.terms)
    if (t.var < 0 || t.var >= static_cast<int>(vars.size())) throw InvalidArgument(fmt::format("row {} references an undeclared variable", r.name));
  row_index_.emplace(r.name, static_cast<int>(rows.size()));
  rows.push_back(std::move(r));
}

bool MilpModel::has_row(std::string_view name) const { return row_index_.find(name) != row_index_.end(); }

namespace {

std::string m_name(RouterId i, RouterId j) { return fmt::format("M_{}_{}", i, j); }
std::string o_name(RouterId i, RouterId j) { return fmt::format("O_{}_{}", i, j); }
std::string d_name(RouterId i, RouterId j) { return fmt::format("D_{}_{}", i, j); }

std::string mask_tag(const std::vector<bool>& in_u) {
  // Hex digits of the membership bitmap, router 0 in the lowest bit.
  std::string out;
  for (std::size_t base = 0; base < in_u.size(); base += 4) {
    int nibble = 0;
    for (std::size_t b = 0; b < 4 && base + b < in_u.size(); ++b)
      if (in_u[base + b]) nibble |= 1 << b;
    out.push_back("0123456789abcdef"[nibble]);
  }
  std::reverse(out.begin(), out.end());
  return out;
}

std::int64_t ceil_rational(const Rational& r) {
  std::int64_t q = r.numerator() / r.denominator();
  if (q * r.denominator() < r.numerator()) ++q;
  return q;
}

}  // namespace

MilpModel build_model(const SynthSpec& spec, const BuildOptions& options) {
  spec.validate();
  const int n = spec.layout.size();
  if (spec.diameter_cap && *spec.diameter_cap < 1 && n >= 2) {
    throw InfeasibleSpec(fmt::format("diameter cap {} admits no topology with {} routers", *spec.diameter_cap, n));
  }
  MilpModel m;
  m.spec = spec;
  m.candidates = valid_link_set(spec.layout, spec.link_class);
  if (m.candidates.empty()) throw InfeasibleSpec("link class admits no link on this layout");
  std::vector<int> in_count(static_cast<std::size_t>(n), 0);
  for (const Channel& c : m.candidates) ++in_count[static_cast<std::size_t>(c.dst)];
  for (int r = 0; r < n; ++r)
    if (in_count[static_cast<std::size_t>(r)] == 0) throw InfeasibleSpec(fmt::format("router {} has no candidate link", r));

  // M only over the valid link set, radix rows.
  for (const Channel& c : m.candidates) m.add_var({m_name(c.src, c.dst), VarType::binary, 0, 1});
  for (int i = 0; i < n; ++i) {
    MilpRow out{fmt::format("radix_out_{}", i), {}, RowSense::le, spec.radix_out};
    MilpRow in{fmt::format("radix_in_{}", i), {}, RowSense::le, spec.radix_in};
    for (const Channel& c : m.candidates) {
      if (c.src == i) out.terms.push_back({m.var(m_name(c.src, c.dst)), 1});
      if (c.dst == i) in.terms.push_back({m.var(m_name(c.src, c.dst)), 1});
    }
    m.add_row(std::move(out));
    m.add_row(std::move(in));
  }
  if (spec.symmetric) {
    for (const Channel& c : m.candidates) {
      if (c.src > c.dst) continue;
      m.add_row({fmt::format("sym_{}_{}", c.src, c.dst),
                 {{m.var(m_name(c.src, c.dst)), 1}, {m.var(m_name(c.dst, c.src)), -1}},
                 RowSense::eq,
                 0});
    }
  }

  const bool latop = spec.objective == Objective::latop;
  m.has_distances = latop || spec.diameter_cap.has_value();
  m.big = n + 1;
  if (m.has_distances) {
    // O = 1 when linked, big otherwise.
    for (const Channel& c : m.candidates) {
      int o = m.add_var({o_name(c.src, c.dst), VarType::integer, 1, m.big});
      m.add_row({fmt::format("onehop_{}_{}", c.src, c.dst),
                 {{o, 1}, {m.var(m_name(c.src, c.dst)), m.big - 1}},
                 RowSense::eq,
                 m.big});
    }
    std::int64_t d_upper = std::max(1, n - 1);
    if (spec.diameter_cap && options.diameter_encoding == DiameterEncoding::per_pair)
      d_upper = std::min<std::int64_t>(d_upper, *spec.diameter_cap);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j) m.add_var({d_name(i, j), VarType::integer, 1, std::max<std::int64_t>(1, n - 1)});

    // D(i,j) = min over k of D(i,k) + O(k,j), with D(i,i) = 0.
    const std::int64_t select_big = 2 * static_cast<std::int64_t>(n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        const int dij = m.var(d_name(i, j));
        MilpRow pick{fmt::format("select_{}_{}", i, j), {}, RowSense::eq, 1};
        for (const Channel& c : m.candidates) {
          if (c.dst != j) continue;
          const int k = c.src;
          const int okj = m.var(o_name(k, j));
          std::vector<MilpTerm> base{{dij, 1}, {okj, -1}};
          if (k != i) base.push_back({m.var(d_name(i, k)), -1});
          m.add_row({fmt::format("path_{}_{}_{}", i, j, k), base, RowSense::le, 0});
          int sigma = m.add_var({fmt::format("sigma_{}_{}_{}", i, j, k), VarType::binary, 0, 1});
          std::vector<MilpTerm> tight = base;
          tight.push_back({sigma, -select_big});
          m.add_row({fmt::format("tight_{}_{}_{}", i, j, k), tight, RowSense::ge, -select_big});
          pick.terms.push_back({sigma, 1});
        }
        m.add_row(std::move(pick));
      }
    }
    if (spec.diameter_cap) {
      if (options.diameter_encoding == DiameterEncoding::per_pair) {
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            if (i != j) m.add_row({fmt::format("diam_{}_{}", i, j), {{m.var(d_name(i, j)), 1}}, RowSense::le, d_upper});
      } else {
        for (int i = 0; i < n; ++i) {
          MilpRow r{fmt::format("diam_{}", i), {}, RowSense::le, *spec.diameter_cap};
          for (int j = 0; j < n; ++j)
            if (i != j) r.terms.push_back({m.var(d_name(i, j)), 1});
          m.add_row(std::move(r));
        }
      }
    }
  }

  if (latop) {
    m.maximize = false;
    detail::IntegerWeights w = detail::spec_weights(spec);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        std::int64_t wij = i == j ? 0 : w.w[static_cast<std::size_t>(i * n + j)];
        if (wij != 0) m.objective.push_back({m.var(d_name(i, j)), wij});
      }
  } else {
    m.maximize = true;
    int b = m.add_var({"B", VarType::continuous, 0, spec.radix_out});
    m.objective.push_back({b, 1});
  }
  return m;
}

MilpRow cut_row(const MilpModel& m, const std::vector<bool>& in_u) {
  const int n = m.spec.layout.size();
  std::int64_t us = std::count(in_u.begin(), in_u.end(), true);
  MilpRow r{fmt::format("cut_{}", mask_tag(in_u)), {}, RowSense::le, 0};
  r.terms.push_back({m.var("B"), us * (n - us)});
  for (const Channel& c : m.candidates)
    if (in_u[static_cast<std::size_t>(c.src)] && !in_u[static_cast<std::size_t>(c.dst)])
      r.terms.push_back({m.var(m_name(c.src, c.dst)), -1});
  return r;
}

MilpRow min_cut_row(const MilpModel& m, const std::vector<bool>& in_u) {
  if (!m.spec.min_cut_bandwidth) throw InvalidArgument("spec has no minimum cut bandwidth");
  const int n = m.spec.layout.size();
  std::int64_t us = std::count(in_u.begin(), in_u.end(), true);
  MilpRow r{fmt::format("mincut_{}", mask_tag(in_u)), {}, RowSense::ge,
            ceil_rational(*m.spec.min_cut_bandwidth * Rational(us * (n - us)))};
  for (const Channel& c : m.candidates)
    if (in_u[static_cast<std::size_t>(c.src)] && !in_u[static_cast<std::size_t>(c.dst)])
      r.terms.push_back({m.var(m_name(c.src, c.dst)), 1});
  return r;
}

namespace {

class LineWriter {
 public:
  explicit LineWriter(std::string& out) : out_(out) {}
  void start(std::string_view head) {
    flush();
    line_ = head;
  }
  void token(std::string_view tok) {
    if (line_.size() + 1 + tok.size() > 78 && !line_.empty()) {
      out_ += line_;
      out_ += '\n';
      line_ = "  ";
    } else {
      line_ += ' ';
    }
    line_ += tok;
  }
  void flush() {
    if (!line_.empty()) {
      out_ += line_;
      out_ += '\n';
      line_.clear();
    }
  }

 private:
  std::string& out_;
  std::string line_;
};

void write_terms(LineWriter& w, const MilpModel& m, const std::vector<MilpTerm>& terms) {
  bool first = true;
  for (const MilpTerm& t : terms) {
    if (t.coef == 0) continue;
    const std::string& name = m.vars[static_cast<std::size_t>(t.var)].name;
    std::int64_t mag = t.coef < 0 ? -t.coef : t.coef;
    std::string tok;
    if (first)
      tok = t.coef < 0 ? "-" : "";
    else
      tok = t.coef < 0 ? "- " : "+ ";
    if (mag != 1) tok += fmt::format("{} ", mag);
    tok += name;
    w.token(tok);
    first = false;
  }
  if (first) w.token(fmt::format("0 {}", m.vars.front().name));
}

const char* sense_text(RowSense s) {
  switch (s) {
    case RowSense::le: return "<=";
    case RowSense::ge: return ">=";
    case RowSense::eq: return "=";
  }
  return "=";
}

void write_row(LineWriter& w, const MilpModel& m, const MilpRow& r) {
  w.start(fmt::format(" {}:", r.name));
  write_terms(w, m, r.terms);
  w.token(fmt::format("{} {}", sense_text(r.sense), r.rhs));
}

}  // namespace

std::string export_lp(const MilpModel& m, const CutEmission& cuts) {
  const int n = m.spec.layout.size();
  std::vector<MilpRow> extra;
  if (cuts.mode == CutEmission::Mode::explicit_cuts) {
    if (cuts.limit > kExplicitCutLimit) {
      throw CapacityError(fmt::format("explicit cut export is limited to {} cuts (asked for {}); use row generation",
                                      kExplicitCutLimit, cuts.limit));
    }
    if (n > 62) throw CapacityError("explicit cut export needs at most 62 routers");
    const bool scop = m.find("B") >= 0;
    const bool min_cut = m.spec.min_cut_bandwidth.has_value();
    std::size_t emitted = 0;
    for (int size = 1; size < n && emitted < cuts.limit; ++size) {
      // Gosper's hack over masks with `size` bits, ascending.
      std::uint64_t mask = (std::uint64_t{1} << size) - 1;
      const std::uint64_t end = std::uint64_t{1} << n;
      while (mask < end && emitted < cuts.limit) {
        std::vector<bool> in_u(static_cast<std::size_t>(n));
        for (int b = 0; b < n; ++b) in_u[static_cast<std::size_t>(b)] = (mask >> b) & 1;
        if (scop && !m.has_row(cut_row(m, in_u).name)) extra.push_back(cut_row(m, in_u));
        if (min_cut) extra.push_back(min_cut_row(m, in_u));
        ++emitted;
        std::uint64_t c = mask & (~mask + 1);
        std::uint64_t r = mask + c;
        mask = (((r ^ mask) >> 2) / c) | r;
      }
    }
  }

  std::string out;
  LineWriter w(out);
  out += fmt::format("\\ {} topology model, {} routers, {} candidate links\n", to_string(m.spec.objective), n,
                     m.candidates.size());
  out += m.maximize ? "Maximize\n" : "Minimize\n";
  w.start(" obj:");
  write_terms(w, m, m.objective);
  w.flush();
  out += "Subject To\n";
  for (const MilpRow& r : m.rows) write_row(w, m, r);
  for (const MilpRow& r : extra) write_row(w, m, r);
  w.flush();
  out += "Bounds\n";
  for (const MilpVar& v : m.vars) {
    if (v.type == VarType::binary) continue;
    out += fmt::format(" {} <= {} <= {}\n", v.lower, v.name, v.upper);
  }
  auto section = [&](const char* title, VarType type) {
    bool any = false;
    for (const MilpVar& v : m.vars) {
      if (v.type != type) continue;
      if (!any) {
        out += title;
        out += '\n';
        w.start("");
        any = true;
      }
      w.token(v.name);
    }
    w.flush();
  };
  section("Binaries", VarType::binary);
  section("Generals", VarType::integer);
  out += "End\n";
  return out;
}

SolutionFile parse_solution(std::string_view text) {
  SolutionFile sol;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream fields(line);
    std::string name;
    if (!(fields >> name)) continue;
    if (name.front() == '#') {
      std::string key;
      double value = 0;
      std::istringstream rest(line.substr(line.find('#') + 1));
      if (rest >> key && key == "gap" && rest >> value) sol.gap = value;
      continue;
    }
    double value = 0;
    std::string trailing;
    if (!(fields >> value) || (fields >> trailing)) {
      throw SolverError(fmt::format("solution line {}: expected 'name value'", lineno));
    }
    sol.values[name] = value;
  }
  return sol;
}

namespace {
constexpr double kTolerance = 1e-6;
}

Topology selected_topology(const MilpModel& m, const std::map<std::string, double>& assignment) {
  std::vector<Channel> chosen;
  for (const Channel& c : m.candidates) {
    std::string name = m_name(c.src, c.dst);
    auto it = assignment.find(name);
    if (it == assignment.end()) throw SolverError(fmt::format("solution has no value for {}", name));
    double v = it->second;
    double r = std::round(v);
    if (std::abs(v - r) > kTolerance || (r != 0.0 && r != 1.0)) {
      throw SolverError(fmt::format("integrality violation: {} = {}", name, v));
    }
    if (r == 1.0) chosen.push_back(c);
  }
  return Topology(m.spec.layout, chosen, m.spec.link_class);
}

Topology import_solution(const MilpModel& m, const std::map<std::string, double>& assignment) {
  Topology t = selected_topology(m, assignment);
  std::vector<std::string> violations = check_constraints(t, m.spec.constraints());
  if (!violations.empty()) {
    throw SolverError(fmt::format("solution violates the spec: {}", violations.front()));
  }
  if (m.has_distances) {
    DistanceMatrix dm = apsp(t);
    const int n = t.size();
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        auto it = assignment.find(d_name(i, j));
        if (it == assignment.end()) continue;
        double v = it->second;
        double r = std::round(v);
        if (std::abs(v - r) > kTolerance) throw SolverError(fmt::format("integrality violation: {} = {}", it->first, v));
        if (static_cast<int>(r) != dm.hops(i, j)) {
          throw SolverError(fmt::format("solver distance disagrees with Floyd-Warshall: {} = {} but shortest path is {}",
                                        it->first, static_cast<int>(r), dm.hops(i, j)));
        }
      }
    }
  }
  return t;
}

}  // namespace netsmith
