#include "stackres/partial_io.hpp"

#include <json.hpp>
#include <unordered_map>

#include "stackres/error.hpp"

namespace stackres {

using nlohmann::json;

std::string serialize_partials(const StackGraph& graph, FileId file, const FilePartials& partials) {
  json symbols = json::array();
  std::unordered_map<std::uint32_t, std::size_t> symbol_index;
  auto encode = [&](const std::vector<Symbol>& stack) {
    json out = json::array();
    for (auto s : stack) {
      auto [it, fresh] = symbol_index.emplace(s.id, symbol_index.size());
      if (fresh) symbols.push_back(std::string(graph.symbol_text(s)));
      out.push_back(it->second);
    }
    return out;
  };

  json paths = json::array();
  for (const auto& p : partials.paths) {
    if (p.start.file != file || p.end.file != file) {
      throw Error(ErrorCode::CrossFileEdge, "partial path leaves its file");
    }
    json steps = json::array();
    for (const auto& s : p.steps) steps.push_back({s.source.local, s.sink.local});
    paths.push_back({
        {"start", p.start.local},
        {"end", p.end.local},
        {"pre", encode(p.pre.prefix)},
        {"pre_var", p.pre.tail.has_value()},
        {"post", encode(p.post.prefix)},
        {"post_var", p.post.tail.has_value()},
        {"height", p.height},
        {"steps", std::move(steps)},
    });
  }

  json record = {
      {"format_version", kPartialsFormatVersion},
      {"blob", graph.file(file).blob.hex()},
      {"symbols", std::move(symbols)},
      {"partials", std::move(paths)},
      {"fuel_exhausted", partials.fuel_exhausted},
      {"capped", partials.capped},
  };
  return record.dump();
}

FilePartials load_partials(StackGraph& graph, FileId file, std::string_view record) {
  try {
    const auto doc = json::parse(record);
    if (doc.at("format_version").get<int>() != kPartialsFormatVersion) {
      throw Error(ErrorCode::Deserialize, "unsupported partial-path format version");
    }
    if (BlobId::from_hex(doc.at("blob").get<std::string>()) != graph.file(file).blob) {
      throw Error(ErrorCode::Deserialize, "partial-path record belongs to another blob");
    }
    std::vector<Symbol> symbols;
    for (const auto& text : doc.at("symbols")) symbols.push_back(graph.intern(text.get<std::string>()));
    const auto node_count = graph.nodes(file).size();
    auto node = [&](const json& v) {
      const auto local = v.get<std::uint32_t>();
      if (local >= node_count) throw Error(ErrorCode::Deserialize, "partial path node out of range");
      return NodeId{file, local};
    };
    auto decode = [&](const json& v, bool var) {
      PartialSymbolStack s;
      for (const auto& i : v) s.prefix.push_back(symbols.at(i.get<std::size_t>()));
      if (var) s.tail = StackVariable{0};
      return s;
    };

    FilePartials out;
    out.fuel_exhausted = doc.at("fuel_exhausted").get<bool>();
    out.capped = doc.at("capped").get<bool>();
    for (const auto& entry : doc.at("partials")) {
      PartialPath p;
      p.start = node(entry.at("start"));
      p.end = node(entry.at("end"));
      p.pre = decode(entry.at("pre"), entry.at("pre_var").get<bool>());
      p.post = decode(entry.at("post"), entry.at("post_var").get<bool>());
      p.height = entry.at("height").get<std::int32_t>();
      for (const auto& s : entry.at("steps")) p.steps.push_back({node(s.at(0)), node(s.at(1)), StepKind::Concrete});
      out.paths.push_back(std::move(p));
    }
    return out;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Deserialize, e.what());
  } catch (const std::out_of_range& e) {
    throw Error(ErrorCode::Deserialize, e.what());
  }
}

}  // namespace stackres
