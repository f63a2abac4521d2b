#include "stackres/graph_io.hpp"

#include <json.hpp>
#include <unordered_map>

#include "stackres/error.hpp"

namespace stackres {

using nlohmann::json;

namespace {

NodeKind kind_from_string(const std::string& s) {
  if (s == "root") return NodeKind::Root;
  if (s == "scope") return NodeKind::Scope;
  if (s == "push") return NodeKind::PushSymbol;
  if (s == "pop") return NodeKind::PopSymbol;
  throw Error(ErrorCode::Deserialize, "unknown node kind '" + s + "'");
}

void populate(StackGraph& graph, FileId file, const json& doc, const std::vector<std::string>& symbols);

}  // namespace

std::string serialize_file(const StackGraph& graph, FileId file) {
  const auto& info = graph.file(file);
  json symbols = json::array();
  std::unordered_map<std::uint32_t, std::size_t> symbol_index;

  json nodes = json::array();
  for (const auto& n : graph.nodes(file)) {
    json entry = {{"kind", std::string(to_string(n.kind))}};
    if (n.has_symbol()) {
      auto [it, fresh] = symbol_index.emplace(n.symbol.id, symbol_index.size());
      if (fresh) symbols.push_back(std::string(graph.symbol_text(n.symbol)));
      entry["symbol"] = it->second;
    }
    if (n.flags.is_reference) entry["ref"] = true;
    if (n.flags.is_definition) entry["def"] = true;
    if (n.flags.is_endpoint_scope) entry["endpoint"] = true;
    if (n.span) {
      const auto& s = *n.span;
      entry["span"] = {s.start_byte, s.end_byte, s.start_line, s.start_column, s.end_line, s.end_column};
    }
    nodes.push_back(std::move(entry));
  }

  json edges = json::array();
  for (const auto& n : graph.nodes(file)) {
    for (const auto& sink : graph.outgoing(n.id)) edges.push_back({n.id.local, sink.local});
  }

  json record = {
      {"format_version", kSubgraphFormatVersion},
      {"blob", info.blob.hex()},
      {"display_name", info.display_name},
      {"symbols", std::move(symbols)},
      {"nodes", std::move(nodes)},
      {"edges", std::move(edges)},
  };
  return record.dump();
}

FileId load_file(StackGraph& graph, std::string_view record) {
  json doc;
  try {
    doc = json::parse(record);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Deserialize, e.what());
  }
  try {
    if (doc.at("format_version").get<int>() != kSubgraphFormatVersion) {
      throw Error(ErrorCode::Deserialize, "unsupported subgraph format version");
    }
    const auto symbols = doc.at("symbols").get<std::vector<std::string>>();
    const FileId file = graph.add_file(doc.at("display_name").get<std::string>(),
                                       BlobId::from_hex(doc.at("blob").get<std::string>()));
    try {
      populate(graph, file, doc, symbols);
    } catch (...) {
      graph.remove_file(file);
      throw;
    }
    return file;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Deserialize, e.what());
  } catch (const std::out_of_range& e) {
    throw Error(ErrorCode::Deserialize, e.what());
  }
}

namespace {

void populate(StackGraph& graph, FileId file, const json& doc, const std::vector<std::string>& symbols) {
  for (const auto& entry : doc.at("nodes")) {
    NodeSpec spec{kind_from_string(entry.at("kind").get<std::string>()), {}};
    if (entry.contains("symbol")) spec.symbol = symbols.at(entry["symbol"].get<std::size_t>());
    NodeFlags flags;
    flags.is_reference = entry.value("ref", false);
    flags.is_definition = entry.value("def", false);
    flags.is_endpoint_scope = entry.value("endpoint", false);
    std::optional<Span> span;
    if (entry.contains("span")) {
      const auto v = entry["span"].get<std::vector<std::uint32_t>>();
      if (v.size() != 6) throw Error(ErrorCode::Deserialize, "span needs 6 fields");
      span = Span{v[0], v[1], v[2], v[3], v[4], v[5]};
    }
    graph.add_node(file, spec, flags, span);
  }
  const auto count = graph.nodes(file).size();
  for (const auto& e : doc.at("edges")) {
    const auto source = e.at(0).get<std::uint32_t>();
    const auto sink = e.at(1).get<std::uint32_t>();
    if (source >= count || sink >= count) throw Error(ErrorCode::Deserialize, "edge endpoint out of range");
    graph.add_edge(NodeId{file, source}, NodeId{file, sink});
  }
  graph.seal(file);
}

}  // namespace

}  // namespace stackres
