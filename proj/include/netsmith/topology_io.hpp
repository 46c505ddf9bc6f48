#pragma once

#include <string>
#include <string_view>

#include "netsmith/model.hpp"

namespace netsmith {

/// Canonical JSON document:
/// {"layout":{"rows":R,"cols":C},"symmetric":bool,"channels":[[s,d],...]}
/// with channels sorted ascending. An optional "link_class" member is
/// written when the topology carries one.
std::string save_topology(const Topology& t);

/// Parses and validates a topology document. Errors name the offending
/// location, e.g. "channels[3]: self-link (3,3)".
Topology load_topology(std::string_view text);

Topology load_topology_file(const std::string& path);
void save_topology_file(const Topology& t, const std::string& path);

/// Graphviz rendering at grid positions. Bidirectional pairs are solid
/// undirected edges, unpaired channels dashed arrows.
std::string export_dot(const Topology& t, std::string_view name = "noi");

}  // namespace netsmith
