#pragma once

#include <string>
#include <string_view>

#include "stackres/graph.hpp"

namespace stackres {

inline constexpr int kSubgraphFormatVersion = 1;

/// Canonical JSON record of one file's subgraph. Byte-deterministic: nodes
/// in local order, edges grouped by source local id in adjacency order,
/// symbols in first-use order.
std::string serialize_file(const StackGraph& graph, FileId file);

/// Loads a record produced by serialize_file into `graph` as a new, sealed
/// file. Re-validates every node and edge invariant; throws Deserialize on
/// malformed input.
FileId load_file(StackGraph& graph, std::string_view record);

}  // namespace stackres
