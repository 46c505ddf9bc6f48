#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "netsmith/metrics.hpp"
#include "netsmith/model.hpp"
#include "netsmith/rational.hpp"
#include "netsmith/routing_table.hpp"

namespace netsmith {

/// Structural metrics, analytic bounds and optional simulation results for
/// one topology.
struct MetricsReport {
  std::string name;
  int rows = 0;
  int cols = 0;
  std::optional<std::string> link_class;
  std::string traffic = "uniform";
  std::size_t channels = 0;
  Rational links{0};
  int diameter = 0;
  Rational avg_hops{0};
  Rational weighted_avg_hops{0};
  /// Absent above kExactCutLimit routers.
  std::optional<int> bisection_bw;
  Rational sparsest_cut{0};
  bool sparsest_cut_exact = true;
  Rational cut_bound{0};
  Rational occupancy_bound{0};
  std::optional<Rational> mcl_bound;

  std::optional<std::string> routing;
  std::optional<int> vc_layers;
  std::optional<Rational> zero_load_latency;
  std::optional<double> measured_saturation;
  std::optional<double> max_accepted;

  bool operator==(const MetricsReport&) const = default;
};

/// Throws DisconnectedError for a disconnected topology.
MetricsReport analyze(const Topology& t, const TrafficMatrix& traffic, const RoutingTable* routing = nullptr,
                      std::string name = "");

/// Stable JSON: exact values as "p/q" strings under *_exact keys next to
/// 6-decimal floats.
std::string report_json(const MetricsReport& r);
MetricsReport load_report(std::string_view json_text);
MetricsReport load_report_file(const std::string& path);
/// Aligned two-column text.
std::string report_text(const MetricsReport& r);

struct DeltaRow {
  std::string field;
  double a = 0;
  double b = 0;
  /// a - b
  double delta = 0;
  /// 100 * (a - b) / b; absent when b is zero.
  std::optional<double> percent;
};

struct Comparison {
  std::vector<DeltaRow> rows;
  std::vector<std::string> notes;
};

/// Field-wise deltas over the numeric fields both reports carry. Throws
/// InvalidArgument on a layout mismatch, and on a link class mismatch
/// unless `force` is set, in which case the mismatch becomes a note.
Comparison compare_reports(const MetricsReport& a, const MetricsReport& b, bool force = false);
std::string comparison_text(const Comparison& c, std::string_view name_a, std::string_view name_b);
std::string comparison_csv(const Comparison& c);

}  // namespace netsmith
