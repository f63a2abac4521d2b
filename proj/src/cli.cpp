#include "stackres/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include "stackres/error.hpp"
#include "stackres/partial.hpp"
#include "stackres/path.hpp"
#include "stackres/render.hpp"
#include "stackres/store.hpp"

namespace stackres::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Position {
  std::string path;
  std::uint32_t line = 0;  // 1-based
  std::uint32_t column = 0;
};

Position parse_position(const std::string& target) {
  const auto second = target.rfind(':');
  const auto first = second == std::string::npos || second == 0 ? std::string::npos : target.rfind(':', second - 1);
  if (first == std::string::npos) throw Error(ErrorCode::NoReferenceAtPosition, "target '" + target + "' is not PATH:LINE:COL");
  Position p;
  p.path = target.substr(0, first);
  try {
    p.line = static_cast<std::uint32_t>(std::stoul(target.substr(first + 1, second - first - 1)));
    p.column = static_cast<std::uint32_t>(std::stoul(target.substr(second + 1)));
  } catch (const std::exception&) {
    throw Error(ErrorCode::NoReferenceAtPosition, "target '" + target + "' is not PATH:LINE:COL");
  }
  if (p.path.empty() || p.line == 0 || p.column == 0) throw Error(ErrorCode::NoReferenceAtPosition, "target '" + target + "' is not PATH:LINE:COL");
  return p;
}

std::vector<SourceFile> collect_sources(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::StoreIo, dir.string() + " is not a directory");
  std::vector<fs::path> paths;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".py") paths.push_back(entry.path());
  }
  std::sort(paths.begin(), paths.end());
  std::vector<SourceFile> files;
  for (const auto& p : paths) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    files.push_back({fs::relative(p, dir).generic_string(), buf.str()});
  }
  return files;
}

/// The reference whose span starts the token at `pos`.
NodeId find_reference(const LoadedSnapshot& snap, const Position& pos) {
  const auto file = snap.file_for(pos.path);
  if (!file) throw Error(ErrorCode::NoReferenceAtPosition, pos.path + " is not part of the snapshot");
  for (const auto& n : snap.graph->nodes(*file)) {
    if (!n.is_reference() || !n.span) continue;
    const auto& s = *n.span;
    if (s.start_line + 1 == pos.line && s.start_column < pos.column && pos.column <= s.end_column) return n.id;
  }
  throw Error(ErrorCode::NoReferenceAtPosition, "no reference at " + pos.path + ":" + std::to_string(pos.line) +
                                                    ":" + std::to_string(pos.column));
}

json definition_json(const LoadedSnapshot& snap, NodeId def) {
  const auto& n = snap.graph->node(def);
  return {
      {"path", std::string(snap.path_of(def.file))},
      {"line", n.span->start_line + 1},
      {"column", n.span->start_column + 1},
      {"symbol", std::string(snap.graph->symbol_text(n.symbol))},
  };
}

std::string default_store() {
  if (const char* env = std::getenv("STACKRES_STORE"); env && *env) return env;
  return ".stackres";
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Incremental name resolution with stack graphs"};
  app.require_subcommand(1);

  std::string store_dir = default_store();
  std::string snapshot = "default";
  app.add_option("--store", store_dir, "Store directory (default: $STACKRES_STORE or .stackres)");

  auto* index = app.add_subcommand("index", "Index every .py file under a directory as a snapshot");
  std::string source_dir;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  index->add_option("dir", source_dir, "Source directory")->required();
  index->add_option("--snapshot", snapshot, "Snapshot id");
  index->add_option("-j,--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  auto* query = app.add_subcommand("query", "Print the definitions a reference resolves to");
  std::string target;
  std::string mode = "partial";
  query->add_option("target", target, "PATH:LINE:COL (1-based)")->required();
  query->add_option("--snapshot", snapshot, "Snapshot id");
  query->add_option("--mode", mode, "Resolution strategy")->check(CLI::IsMember({"partial", "direct"}));

  auto* trace_cmd = app.add_subcommand("trace", "Print every state of each complete path from a reference");
  trace_cmd->add_option("target", target, "PATH:LINE:COL (1-based)")->required();
  trace_cmd->add_option("--snapshot", snapshot, "Snapshot id");

  auto* stats = app.add_subcommand("stats", "Summarize the store");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "stackres: " << e.what() << "\n";
    return kUsage;
  }

  try {
    Store store(store_dir);

    if (*index) {
      const auto report = index_snapshot(store, snapshot, collect_sources(source_dir), jobs);
      for (const auto& w : report.warnings) err << "warning: " << w << "\n";
      for (const auto& e : report.errors) err << e.path << ":" << e.message << "\n";
      out << report.to_json() << "\n";
      return report.errors.empty() ? kOk : kFrontendErrors;
    }

    if (*stats) {
      const auto s = store.stats();
      out << json{{"records", s.records}, {"total_nodes", s.total_nodes}, {"total_partials", s.total_partials},
                  {"bytes", s.bytes}}
                 .dump()
          << "\n";
      return kOk;
    }

    const auto pos = parse_position(target);
    const bool partial = *query && mode == "partial";
    const auto snap = load_snapshot(store, snapshot, partial);
    for (const auto& w : snap.warnings) err << "warning: " << w << "\n";
    const auto reference = find_reference(snap, pos);

    if (*query) {
      // (edge count, definition) per complete path. Results keep resolve's
      // shortest-first order; ties are broken by position, not discovery,
      // so both modes print the same list.
      std::vector<std::pair<std::size_t, NodeId>> found;
      bool limited = false;
      if (partial) {
        const auto result = resolve_partial(*snap.partials, reference);
        for (const auto& p : result.bindings) found.emplace_back(p.edge_count(), p.end);
        limited = result.limit_exceeded();
      } else {
        const auto result = resolve(*snap.graph, reference);
        for (const auto& p : result.paths) found.emplace_back(p.edge_count(), p.end());
        limited = result.limit_exceeded();
      }
      std::map<NodeId, std::size_t> shortest;
      for (const auto& [edges, def] : found) {
        auto [it, fresh] = shortest.emplace(def, edges);
        if (!fresh) it->second = std::min(it->second, edges);
      }
      using Key = std::tuple<std::size_t, std::string, std::uint32_t, std::uint32_t>;
      std::vector<std::pair<Key, NodeId>> keyed;
      for (const auto& [def, edges] : shortest) {
        const auto& span = *snap.graph->node(def).span;
        keyed.push_back({{edges, std::string(snap.path_of(def.file)), span.start_line, span.start_column}, def});
      }
      std::sort(keyed.begin(), keyed.end());
      json list = json::array();
      for (const auto& [key, d] : keyed) list.push_back(definition_json(snap, d));
      out << json{{"definitions", std::move(list)}, {"limit_exceeded", limited}}.dump() << "\n";
      return kOk;
    }

    const auto result = trace(*snap.graph, reference);
    if (result.paths.empty()) out << "no complete paths\n";
    for (std::size_t i = 0; i < result.paths.size(); ++i) {
      if (i) out << "\n";
      out << "path " << i + 1 << "\n";
      const auto& states = result.paths[i];
      for (std::size_t row = 0; row < states.size(); ++row) {
        out << "  " << row + 1 << "\t" << describe_node(*snap.graph, states[row].node) << "\t"
            << render_stack(*snap.graph, states[row].stack) << "\n";
      }
    }
    if (result.fuel_exhausted || result.depth_capped) out << "(search limit exceeded; results may be incomplete)\n";
    return kOk;
  } catch (const Error& e) {
    err << "stackres: " << e.what() << "\n";
    if (e.code() == ErrorCode::NoReferenceAtPosition) return kNoReference;
    return kStoreError;
  } catch (const std::exception& e) {
    err << "stackres: " << e.what() << "\n";
    return kStoreError;
  }
}

}  // namespace stackres::cli
