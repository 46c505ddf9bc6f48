#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "netsmith/synth.hpp"

namespace netsmith {

enum class VarType { binary, integer, continuous };

struct MilpVar {
  std::string name;
  VarType type = VarType::binary;
  std::int64_t lower = 0;
  std::int64_t upper = 1;
};

struct MilpTerm {
  int var = 0;
  std::int64_t coef = 0;
};

enum class RowSense { le, ge, eq };

struct MilpRow {
  std::string name;
  std::vector<MilpTerm> terms;
  RowSense sense = RowSense::le;
  std::int64_t rhs = 0;
};

/// How the diameter cap is encoded: D(i,j) <= cap per pair, or the literal
/// row sum over j of D(i,j) <= cap.
enum class DiameterEncoding { per_pair, row_sum };

struct BuildOptions {
  DiameterEncoding diameter_encoding = DiameterEncoding::per_pair;
};

/// Solver-agnostic topology model: M_i_j link selectors, O_i_j one-hop
/// lengths, D_i_j distances with sigma_i_j_k min selectors, and B for SCOp.
class MilpModel {
 public:
  SynthSpec spec;
  bool maximize = false;
  std::vector<MilpTerm> objective;
  std::vector<MilpVar> vars;
  std::vector<MilpRow> rows;
  /// Candidate channels, one M variable each.
  std::vector<Channel> candidates;
  /// One-hop length of an absent link inside the model.
  std::int64_t big = 0;
  bool has_distances = false;

  int add_var(MilpVar v);
  /// -1 when absent.
  int find(std::string_view name) const;
  /// Throws InvalidArgument when absent.
  int var(std::string_view name) const;
  void add_row(MilpRow r);
  bool has_row(std::string_view name) const;

 private:
  std::map<std::string, int, std::less<>> index_;
  std::map<std::string, int, std::less<>> row_index_;
};

/// Throws InfeasibleSpec when the candidate set is empty, some router has no
/// candidate link, or a diameter cap below 1 is requested.
MilpModel build_model(const SynthSpec& spec, const BuildOptions& options = {});

/// Cut row "B * |U||V| - sum M(U->V) <= 0" for the ordered cut U -> V.
MilpRow cut_row(const MilpModel& m, const std::vector<bool>& in_u);
/// Row "sum M(U->V) >= ceil(min_cut * |U||V|)".
MilpRow min_cut_row(const MilpModel& m, const std::vector<bool>& in_u);

struct CutEmission {
  enum class Mode { none, row_generation_stub, explicit_cuts };
  Mode mode = Mode::none;
  std::size_t limit = 0;
};

/// Largest number of cuts explicit export accepts.
inline constexpr std::size_t kExplicitCutLimit = std::size_t{1} << 21;

/// CPLEX LP text. Explicit mode appends the first `limit` ordered cuts
/// (by |U|, then lexicographically) and throws CapacityError past
/// kExplicitCutLimit.
std::string export_lp(const MilpModel& m, const CutEmission& cuts = {});

/// Parsed solution file: "name value" lines, '#' comments, and an optional
/// "# gap X" line.
struct SolutionFile {
  std::map<std::string, double> values;
  std::optional<double> gap;
};
SolutionFile parse_solution(std::string_view text);

/// Channels whose M value is 1. Throws SolverError on missing or fractional
/// M values (tolerance 1e-6).
Topology selected_topology(const MilpModel& m, const std::map<std::string, double>& assignment);

/// Topology selected by the M values. Throws SolverError on missing or
/// fractional M values (tolerance 1e-6), constraint violations, or D values
/// that disagree with shortest paths.
Topology import_solution(const MilpModel& m, const std::map<std::string, double>& assignment);

}  // namespace netsmith
