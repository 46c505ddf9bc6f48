#include "netsmith/topology_io.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "netsmith/errors.hpp"

namespace netsmith {

using nlohmann::json;

std::string save_topology(const Topology& t) {
  std::string out = "{\n";
  out += fmt::format("  \"layout\": {{\"rows\": {}, \"cols\": {}}},\n", t.layout().rows(), t.layout().cols());
  if (t.link_class()) out += fmt::format("  \"link_class\": \"{}\",\n", t.link_class()->name());
  out += fmt::format("  \"symmetric\": {},\n", t.symmetric() ? "true" : "false");
  out += "  \"channels\": [";
  bool first = true;
  for (const Channel& c : t.channels()) {
    out += first ? "\n" : ",\n";
    first = false;
    out += fmt::format("    [{}, {}]", c.src, c.dst);
  }
  out += first ? "]\n" : "\n  ]\n";
  out += "}\n";
  return out;
}

namespace {

int get_int(const json& j, const std::string& where) {
  if (!j.is_number_integer()) throw ParseError(where + ": expected an integer");
  return j.get<int>();
}

}  // namespace

Topology load_topology(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("malformed topology document at byte {}: {}", e.byte, e.what()));
  }
  if (!doc.is_object()) throw ParseError("topology document must be a JSON object");
  if (!doc.contains("layout") || !doc["layout"].is_object()) throw ParseError("layout: missing object");
  const json& lay = doc["layout"];
  if (!lay.contains("rows") || !lay.contains("cols")) throw ParseError("layout: needs rows and cols");
  int rows = get_int(lay["rows"], "layout.rows");
  int cols = get_int(lay["cols"], "layout.cols");
  if (rows < 1 || cols < 1) throw ParseError("layout: dimensions must be positive");
  Layout layout(rows, cols);

  std::optional<LinkClass> cls;
  if (doc.contains("link_class")) {
    if (!doc["link_class"].is_string()) throw ParseError("link_class: expected a string");
    try {
      cls = LinkClass::parse(doc["link_class"].get<std::string>());
    } catch (const InvalidArgument& e) {
      throw ParseError(std::string("link_class: ") + e.what());
    }
  }

  if (!doc.contains("channels") || !doc["channels"].is_array()) throw ParseError("channels: missing array");
  std::vector<Channel> channels;
  std::set<Channel> seen;
  const json& arr = doc["channels"];
  for (std::size_t i = 0; i < arr.size(); ++i) {
    std::string where = fmt::format("channels[{}]", i);
    const json& c = arr[i];
    if (!c.is_array() || c.size() != 2) throw ParseError(where + ": expected [src, dst]");
    Channel ch{get_int(c[0], where + "[0]"), get_int(c[1], where + "[1]")};
    if (!layout.contains(ch.src) || !layout.contains(ch.dst)) {
      throw ParseError(fmt::format("{}: router id out of range ({},{}) for layout {}", where, ch.src, ch.dst,
                                   layout.to_string()));
    }
    if (ch.src == ch.dst) throw ParseError(fmt::format("{}: self-link ({},{})", where, ch.src, ch.dst));
    if (!seen.insert(ch).second) throw ParseError(fmt::format("{}: duplicate channel ({},{})", where, ch.src, ch.dst));
    if (cls && !cls->allows(layout, ch.src, ch.dst)) {
      throw ParseError(fmt::format("{}: channel ({},{}) outside link class {}", where, ch.src, ch.dst, cls->name()));
    }
    channels.push_back(ch);
  }
  Topology t(layout, std::move(channels), cls);
  if (doc.contains("symmetric")) {
    if (!doc["symmetric"].is_boolean()) throw ParseError("symmetric: expected a boolean");
    if (doc["symmetric"].get<bool>() != t.symmetric()) {
      throw ParseError(fmt::format("symmetric: flag says {} but the channel set is {}",
                                   doc["symmetric"].get<bool>(), t.symmetric() ? "symmetric" : "asymmetric"));
    }
  }
  return t;
}

Topology load_topology_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open topology file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return load_topology(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void save_topology_file(const Topology& t, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path);
  out << save_topology(t);
}

std::string export_dot(const Topology& t, std::string_view name) {
  std::string out = fmt::format("digraph {} {{\n  node [shape=circle];\n", name);
  for (RouterId r = 0; r < t.size(); ++r) {
    Coord p = t.layout().position(r);
    out += fmt::format("  n{} [label=\"{}\", pos=\"{},{}!\"];\n", r, r, p.x, t.layout().rows() - 1 - p.y);
  }
  for (const Channel& c : t.channels()) {
    if (t.has_channel(c.dst, c.src)) {
      if (c.src < c.dst) out += fmt::format("  n{} -> n{} [dir=none];\n", c.src, c.dst);
    } else {
      out += fmt::format("  n{} -> n{} [style=dashed];\n", c.src, c.dst);
    }
  }
  out += "}\n";
  return out;
}

}  // namespace netsmith
