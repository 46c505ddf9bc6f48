#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "netsmith/errors.hpp"
#include "netsmith/milp.hpp"
#include "netsmith/synth.hpp"

namespace netsmith {

namespace {

namespace fs = std::filesystem;

std::string replace_all(std::string text, std::string_view key, std::string_view value) {
  std::size_t pos = 0;
  while ((pos = text.find(key, pos)) != std::string::npos) {
    text.replace(pos, key.size(), value);
    pos += value.size();
  }
  return text;
}

std::string quote(const fs::path& p) { return "'" + replace_all(p.string(), "'", "'\\''") + "'"; }

class ScratchDir {
 public:
  ScratchDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() / fmt::format("netsmith-{}-{}", ::getpid(), counter++);
    fs::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

SolutionFile run_solver(const std::string& command, const std::string& lp_text, const fs::path& dir, int round,
                        double time_limit) {
  fs::path lp = dir / fmt::format("model{}.lp", round);
  fs::path sol = dir / fmt::format("model{}.sol", round);
  {
    std::ofstream out(lp);
    out << lp_text;
  }
  std::string cmd = command;
  if (cmd.find("{lp}") == std::string::npos) cmd += " {lp} {sol}";
  cmd = replace_all(cmd, "{lp}", quote(lp));
  cmd = replace_all(cmd, "{sol}", quote(sol));
  cmd = replace_all(cmd, "{time}", fmt::format("{:.0f}", std::max(1.0, std::ceil(time_limit))));
  int status = std::system(cmd.c_str());
  if (status == -1) throw SolverError(fmt::format("could not launch solver: {}", cmd));
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    throw SolverError(fmt::format("solver command exited with status {}: {}", code, cmd));
  }
  std::ifstream in(sol);
  if (!in) throw SolverError(fmt::format("solver wrote no solution file {} (command: {})", sol.string(), cmd));
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_solution(buf.str());
}

}  // namespace

SolveReport solve_with_external(const SynthSpec& spec, const std::string& command, double budget_s) {
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };
  MilpModel model = build_model(spec);
  const int n = spec.layout.size();
  ScratchDir dir;
  SolveReport report;
  std::optional<Topology> incumbent;
  std::optional<double> gap;
  for (int round = 0;; ++round) {
    double remaining = budget_s - elapsed();
    if (remaining <= 0) {
      throw SolverError(fmt::format("external solver budget of {} s exhausted after {} rounds", budget_s, round));
    }
    SolutionFile sol = run_solver(command, export_lp(model), dir.path(), round, remaining);
    gap = sol.gap;
    ++report.evaluations;
    if (spec.objective == Objective::latop) {
      incumbent = import_solution(model, sol.values);
      report.progress.push_back({elapsed(), to_double(evaluate_objective(*incumbent, spec).first), std::nullopt});
      break;
    }
    auto it = sol.values.find("B");
    if (it == sol.values.end()) throw SolverError("solution has no value for B");
    // Row generation: add the candidate's sparsest cut while it undercuts B.
    Topology t = selected_topology(model, sol.values);
    CutReport cut = sparsest_cut(t, n <= kExactCutLimit ? CutMode::exact : CutMode::local_search);
    report.progress.push_back({elapsed(), to_double(cut.scaled_bandwidth), it->second});
    if (to_double(cut.scaled_bandwidth) >= it->second - 1e-6) {
      incumbent = import_solution(model, sol.values);
      break;
    }
    std::vector<bool> in_u(static_cast<std::size_t>(n), false);
    for (RouterId r : cut.u) in_u[static_cast<std::size_t>(r)] = true;
    std::vector<bool> in_v(in_u.size());
    for (std::size_t i = 0; i < in_u.size(); ++i) in_v[i] = !in_u[i];
    bool added = false;
    for (const auto& side : {in_u, in_v}) {
      MilpRow row = cut_row(model, side);
      if (!model.has_row(row.name)) {
        model.add_row(std::move(row));
        added = true;
      }
    }
    if (!added) throw SolverError("solver returned a solution violating an existing cut row");
  }
  report.topology = *incumbent;
  auto [value, hops] = evaluate_objective(report.topology, spec);
  report.objective_value = value;
  report.avg_hops = hops;
  if (gap.has_value()) {
    const double g = std::clamp(gap.value(), 0.0, 1.0);
    report.bounds_gap = Rational(static_cast<std::int64_t>(std::llround(g * 1e6)), 1000000);
    report.proven_optimal = g <= 1e-9;
  }
  report.wall_time = elapsed();
  return report;
}

}  // namespace netsmith
