#include "netsmith/report.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "netsmith/errors.hpp"

namespace netsmith {

namespace {

using Json = nlohmann::ordered_json;

double rounded(double v) { return std::round(v * 1e6) / 1e6; }

void put_rational(Json& j, const std::string& key, const Rational& r) {
  j[key] = rounded(to_double(r));
  j[key + "_exact"] = to_string(r);
}

Rational get_rational(const Json& j, const std::string& key) {
  auto it = j.find(key + "_exact");
  if (it == j.end() || !it->is_string()) throw ParseError(fmt::format("report is missing '{}_exact'", key));
  return parse_rational(it->get<std::string>());
}

}  // namespace

MetricsReport analyze(const Topology& t, const TrafficMatrix& traffic, const RoutingTable* routing, std::string name) {
  DistanceMatrix dm = apsp(t);
  MetricsReport r;
  r.name = std::move(name);
  r.rows = t.layout().rows();
  r.cols = t.layout().cols();
  if (t.link_class()) {
    r.link_class = t.link_class()->name();
  } else if (auto inferred = infer_link_class(t)) {
    r.link_class = inferred->name();
  }
  r.traffic = traffic.label();
  r.channels = t.channel_count();
  r.links = t.link_pairs();
  r.avg_hops = avg_hops(dm);
  r.weighted_avg_hops = weighted_avg_hops(dm, traffic);
  r.diameter = diameter(dm);
  const bool exact = t.size() <= kExactCutLimit;
  if (exact) r.bisection_bw = bisection_bandwidth(t);
  CutReport cut = sparsest_cut(t, exact ? CutMode::exact : CutMode::local_search);
  r.sparsest_cut = cut.scaled_bandwidth;
  r.sparsest_cut_exact = exact;
  ThroughputBounds b = throughput_bounds(t, traffic, routing);
  r.cut_bound = b.cut_bound;
  r.occupancy_bound = b.occupancy_bound;
  r.mcl_bound = b.mcl_bound;
  return r;
}

std::string report_json(const MetricsReport& r) {
  Json j;
  j["name"] = r.name;
  j["layout"] = {{"rows", r.rows}, {"cols", r.cols}};
  j["link_class"] = r.link_class ? Json(*r.link_class) : Json(nullptr);
  j["traffic"] = r.traffic;
  j["channels"] = r.channels;
  put_rational(j, "links", r.links);
  j["diameter"] = r.diameter;
  put_rational(j, "avg_hops", r.avg_hops);
  put_rational(j, "weighted_avg_hops", r.weighted_avg_hops);
  j["bisection_bw"] = r.bisection_bw ? Json(*r.bisection_bw) : Json(nullptr);
  put_rational(j, "sparsest_cut", r.sparsest_cut);
  j["sparsest_cut_is_exact"] = r.sparsest_cut_exact;
  Json bounds;
  put_rational(bounds, "cut", r.cut_bound);
  put_rational(bounds, "occupancy", r.occupancy_bound);
  if (r.mcl_bound) put_rational(bounds, "mcl", *r.mcl_bound);
  j["bounds"] = bounds;
  if (r.routing) j["routing"] = *r.routing;
  if (r.vc_layers) j["vc_layers"] = *r.vc_layers;
  if (r.zero_load_latency) put_rational(j, "zero_load_latency", *r.zero_load_latency);
  if (r.measured_saturation) j["measured_saturation"] = rounded(*r.measured_saturation);
  if (r.max_accepted) j["max_accepted"] = rounded(*r.max_accepted);
  return j.dump(2) + "\n";
}

MetricsReport load_report(std::string_view json_text) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(fmt::format("report is not valid JSON: {}", e.what()));
  }
  try {
    MetricsReport r;
    r.name = j.value("name", "");
    r.rows = j.at("layout").at("rows").get<int>();
    r.cols = j.at("layout").at("cols").get<int>();
    if (j.contains("link_class") && j["link_class"].is_string()) r.link_class = j["link_class"].get<std::string>();
    r.traffic = j.value("traffic", "uniform");
    r.channels = j.at("channels").get<std::size_t>();
    r.links = get_rational(j, "links");
    r.diameter = j.at("diameter").get<int>();
    r.avg_hops = get_rational(j, "avg_hops");
    r.weighted_avg_hops = get_rational(j, "weighted_avg_hops");
    if (j.contains("bisection_bw") && j["bisection_bw"].is_number()) r.bisection_bw = j["bisection_bw"].get<int>();
    r.sparsest_cut = get_rational(j, "sparsest_cut");
    r.sparsest_cut_exact = j.value("sparsest_cut_is_exact", true);
    const Json& b = j.at("bounds");
    r.cut_bound = get_rational(b, "cut");
    r.occupancy_bound = get_rational(b, "occupancy");
    if (b.contains("mcl_exact")) r.mcl_bound = get_rational(b, "mcl");
    if (j.contains("routing")) r.routing = j["routing"].get<std::string>();
    if (j.contains("vc_layers")) r.vc_layers = j["vc_layers"].get<int>();
    if (j.contains("zero_load_latency_exact")) r.zero_load_latency = get_rational(j, "zero_load_latency");
    if (j.contains("measured_saturation")) r.measured_saturation = j["measured_saturation"].get<double>();
    if (j.contains("max_accepted")) r.max_accepted = j["max_accepted"].get<double>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(fmt::format("malformed report: {}", e.what()));
  }
}

MetricsReport load_report_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument(fmt::format("cannot open report {}", path));
  std::stringstream buf;
  buf << in.rdbuf();
  return load_report(buf.str());
}

std::string report_text(const MetricsReport& r) {
  std::vector<std::pair<std::string, std::string>> rows;
  auto add = [&](std::string k, std::string v) { rows.emplace_back(std::move(k), std::move(v)); };
  auto rat = [](const Rational& v) { return fmt::format("{:.4f} ({})", to_double(v), to_string(v)); };
  if (!r.name.empty()) add("name", r.name);
  add("layout", fmt::format("{}x{}", r.rows, r.cols));
  add("link_class", r.link_class.value_or("-"));
  add("links", fmt::format("{} ({} channels)", to_string(r.links), r.channels));
  add("diameter", std::to_string(r.diameter));
  add("avg_hops", rat(r.avg_hops));
  if (r.traffic != "uniform") add("weighted_avg_hops", rat(r.weighted_avg_hops) + " [" + r.traffic + "]");
  add("bisection_bw", r.bisection_bw ? std::to_string(*r.bisection_bw) : "-");
  add("sparsest_cut", rat(r.sparsest_cut) + (r.sparsest_cut_exact ? "" : " upper bound"));
  add("cut_bound", rat(r.cut_bound));
  add("occupancy_bound", rat(r.occupancy_bound));
  add("mcl_bound", r.mcl_bound ? rat(*r.mcl_bound) : "-");
  if (r.routing) add("routing", *r.routing);
  if (r.vc_layers) add("vc_layers", std::to_string(*r.vc_layers));
  if (r.zero_load_latency) add("zero_load_latency", rat(*r.zero_load_latency));
  if (r.measured_saturation) add("measured_saturation", fmt::format("{:.4f}", *r.measured_saturation));
  if (r.max_accepted) add("max_accepted", fmt::format("{:.4f}", *r.max_accepted));
  std::size_t w = 0;
  for (const auto& [k, v] : rows) w = std::max(w, k.size());
  std::string out;
  for (const auto& [k, v] : rows) out += fmt::format("{:<{}}  {}\n", k, w, v);
  return out;
}

Comparison compare_reports(const MetricsReport& a, const MetricsReport& b, bool force) {
  if (a.rows != b.rows || a.cols != b.cols) {
    throw InvalidArgument(fmt::format("layouts differ ({}x{} vs {}x{}); comparison refused", a.rows, a.cols, b.rows, b.cols));
  }
  Comparison c;
  if (a.link_class != b.link_class) {
    std::string msg = fmt::format("link classes differ ({} vs {})", a.link_class.value_or("none"), b.link_class.value_or("none"));
    if (!force) throw InvalidArgument(msg + "; pass --force to compare anyway");
    c.notes.push_back(msg + "; compared with --force");
  }
  if (a.traffic != b.traffic) c.notes.push_back(fmt::format("traffic differs ({} vs {})", a.traffic, b.traffic));
  auto row = [&](std::string field, double x, double y) {
    DeltaRow d{std::move(field), x, y, x - y, std::nullopt};
    if (y != 0) d.percent = 100.0 * (x - y) / y;
    c.rows.push_back(std::move(d));
  };
  row("links", to_double(a.links), to_double(b.links));
  row("diameter", a.diameter, b.diameter);
  row("avg_hops", to_double(a.avg_hops), to_double(b.avg_hops));
  if (a.bisection_bw && b.bisection_bw) row("bisection_bw", *a.bisection_bw, *b.bisection_bw);
  row("sparsest_cut", to_double(a.sparsest_cut), to_double(b.sparsest_cut));
  row("cut_bound", to_double(a.cut_bound), to_double(b.cut_bound));
  row("occupancy_bound", to_double(a.occupancy_bound), to_double(b.occupancy_bound));
  if (a.mcl_bound && b.mcl_bound) row("mcl_bound", to_double(*a.mcl_bound), to_double(*b.mcl_bound));
  if (a.measured_saturation && b.measured_saturation) row("measured_saturation", *a.measured_saturation, *b.measured_saturation);
  return c;
}

std::string comparison_text(const Comparison& c, std::string_view name_a, std::string_view name_b) {
  std::string out = fmt::format("{:<20} {:>12} {:>12} {:>12} {:>9}\n", "field", name_a, name_b, "delta", "pct");
  for (const DeltaRow& d : c.rows) {
    out += fmt::format("{:<20} {:>12.4f} {:>12.4f} {:>12.4f} {:>9}\n", d.field, d.a, d.b, d.delta,
                       d.percent ? fmt::format("{:.2f}%", *d.percent) : "-");
  }
  for (const std::string& n : c.notes) out += "note: " + n + "\n";
  return out;
}

std::string comparison_csv(const Comparison& c) {
  std::string out = "field,a,b,delta,percent\n";
  for (const DeltaRow& d : c.rows) {
    out += fmt::format("{},{:.6f},{:.6f},{:.6f},{}\n", d.field, d.a, d.b, d.delta, d.percent ? fmt::format("{:.4f}", *d.percent) : "");
  }
  return out;
}

}  // namespace netsmith
