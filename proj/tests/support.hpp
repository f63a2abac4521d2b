// Shared fixtures for the test binaries: the two-file sample program, a
// random stack graph generator and a brute-force path enumerator that serves
// as an independent oracle for the search engines.
#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <memory>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "stackres/blob.hpp"
#include "stackres/graph.hpp"
#include "stackres/minilang.hpp"
#include "stackres/path.hpp"

namespace testing {

using namespace stackres;

inline std::filesystem::path data_dir() { return STACKRES_TEST_DATA; }

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline FileId add_source(StackGraph& g, const std::string& name, const std::string& text) {
  const auto module = minilang::parse(text, name);
  const auto file = g.add_file(name, blob_id(text));
  minilang::build_graph(module, g, file);
  g.seal(file);
  return file;
}

/// The sample program: a.py defines class A with field x; b.py star-imports
/// it, subclasses A as B and reads x through B and through B().
struct Sample {
  StackGraph graph;
  FileId a;
  FileId b;

  Sample() {
    a = add_source(graph, "a.py", read_text(data_dir() / "sample" / "a.py"));
    b = add_source(graph, "b.py", read_text(data_dir() / "sample" / "b.py"));
  }

  /// Reference or definition whose identifier starts at 1-based (line, column).
  [[nodiscard]] NodeId at(FileId file, std::uint32_t line, std::uint32_t column) const {
    for (const auto& n : graph.nodes(file)) {
      if ((n.is_reference() || n.is_definition()) && n.span && n.span->start_line + 1 == line &&
          n.span->start_column + 1 == column && n.span->end_line == n.span->start_line) {
        return n.id;
      }
    }
    throw std::runtime_error("no anchored node at " + std::to_string(line) + ":" + std::to_string(column));
  }

  // Named after the subscripts used in the graph fixtures.
  [[nodiscard]] NodeId a1() const { return module_def(a); }
  [[nodiscard]] NodeId A2() const { return at(a, 1, 7); }
  [[nodiscard]] NodeId x3() const { return at(a, 2, 5); }
  [[nodiscard]] NodeId a5() const { return at(b, 1, 6); }
  [[nodiscard]] NodeId B6() const { return at(b, 3, 7); }
  [[nodiscard]] NodeId A7() const { return at(b, 3, 9); }
  [[nodiscard]] NodeId B8() const { return at(b, 6, 7); }
  [[nodiscard]] NodeId x9() const { return at(b, 6, 9); }
  [[nodiscard]] NodeId B10() const { return at(b, 7, 7); }
  [[nodiscard]] NodeId x11() const { return at(b, 7, 11); }

  [[nodiscard]] NodeId module_def(FileId file) const {
    for (const auto& n : graph.nodes(file)) {
      if (n.is_definition() && n.span && n.span->start_byte == 0 && n.span->end_line > n.span->start_line) return n.id;
    }
    throw std::runtime_error("no module definition");
  }
};

/// A hand-written expected file graph: named nodes with labels such as
/// "pop a def" or "scope", and directed edges between names.
struct Fixture {
  std::vector<std::string> names;
  std::vector<std::string> labels;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
};

inline Fixture load_fixture(const std::filesystem::path& path) {
  Fixture f;
  std::map<std::string, std::size_t> index;
  std::istringstream in(read_text(path));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream words(line);
    std::string name;
    std::string second;
    words >> name >> second;
    if (second == "->") {
      std::string sink;
      words >> sink;
      f.edges.emplace_back(index.at(name), index.at(sink));
      continue;
    }
    std::string label = second;
    for (std::string w; words >> w;) label += " " + w;
    index[name] = f.names.size();
    f.names.push_back(name);
    f.labels.push_back(label);
  }
  return f;
}

inline std::string node_label(const StackGraph& g, const Node& n) {
  std::string out(to_string(n.kind));
  if (n.has_symbol()) out += " " + std::string(g.symbol_text(n.symbol));
  if (n.is_reference()) out += " ref";
  if (n.is_definition()) out += " def";
  return out;
}

/// Finds a label- and edge-preserving bijection between the fixture and the
/// file's subgraph by backtracking. Returns fixture name -> node.
inline std::optional<std::map<std::string, NodeId>> match_fixture(const StackGraph& g, FileId file,
                                                                  const Fixture& f) {
  const auto nodes = g.nodes(file);
  if (nodes.size() != f.names.size() || g.edge_count(file) != f.edges.size()) return std::nullopt;
  const auto n = nodes.size();
  std::set<std::pair<std::size_t, std::size_t>> actual;
  for (const auto& node : nodes) {
    for (auto sink : g.outgoing(node.id)) actual.emplace(node.id.local, sink.local);
  }
  std::vector<std::vector<std::size_t>> out(n);
  for (const auto& [a, b] : f.edges) out[a].push_back(b);

  std::vector<std::size_t> image(n, n);
  std::vector<bool> used(n, false);
  auto consistent = [&](std::size_t k) {
    for (std::size_t j = 0; j <= k; ++j) {
      for (auto t : out[j]) {
        if (t <= k && !actual.contains({image[j], image[t]})) return false;
      }
    }
    return true;
  };
  std::function<bool(std::size_t)> assign = [&](std::size_t k) {
    if (k == n) return true;
    for (std::size_t c = 0; c < n; ++c) {
      if (used[c] || node_label(g, nodes[c]) != f.labels[k]) continue;
      image[k] = c;
      used[c] = true;
      if (consistent(k) && assign(k + 1)) return true;
      used[c] = false;
    }
    return false;
  };
  if (!assign(0)) return std::nullopt;
  std::map<std::string, NodeId> out_map;
  for (std::size_t k = 0; k < n; ++k) out_map[f.names[k]] = NodeId{file, static_cast<std::uint32_t>(image[k])};
  return out_map;
}

inline std::vector<NodeId> references(const StackGraph& g) {
  std::vector<NodeId> out;
  for (auto f : g.files()) {
    for (const auto& n : g.nodes(f)) {
      if (n.is_reference()) out.push_back(n.id);
    }
  }
  return out;
}

struct RandomGraphOptions {
  int max_files = 3;
  int max_nodes = 12;
  int symbols = 3;
  int max_out_degree = 3;
};

/// Arbitrary well-formed stack graph. Node 0 of every file is a root; other
/// nodes are scopes, pushes, pops or (rarely) extra roots.
inline std::unique_ptr<StackGraph> random_graph(std::mt19937_64& rng, const RandomGraphOptions& opt = {}) {
  auto g = std::make_unique<StackGraph>();
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  const std::vector<std::string> names = {"a", "b", "c", "d", "e"};
  const int files = pick(1, opt.max_files);
  for (int f = 0; f < files; ++f) {
    const auto file = g->add_file("f" + std::to_string(f), blob_id("random file " + std::to_string(f) + " " +
                                                                   std::to_string(rng())));
    const int count = pick(1, opt.max_nodes);
    std::vector<NodeId> nodes;
    for (int i = 0; i < count; ++i) {
      const auto local = static_cast<std::uint32_t>(i);
      const Span span{local, local + 1, 0, local, 0, local + 1};
      const auto symbol = names[static_cast<std::size_t>(pick(0, opt.symbols - 1))];
      if (i == 0) {
        nodes.push_back(g->add_node(file, NodeSpec::root()));
        continue;
      }
      switch (pick(0, 9)) {
        case 0:
          nodes.push_back(g->add_node(file, NodeSpec::root()));
          break;
        case 1:
        case 2:
          nodes.push_back(g->add_node(file, NodeSpec::scope()));
          break;
        case 3:
        case 4:
        case 5:
          if (pick(0, 1)) {
            nodes.push_back(g->add_node(file, NodeSpec::push(symbol), NodeFlags{.is_reference = true}, span));
          } else {
            nodes.push_back(g->add_node(file, NodeSpec::push(symbol)));
          }
          break;
        default:
          if (pick(0, 1)) {
            nodes.push_back(g->add_node(file, NodeSpec::pop(symbol), NodeFlags{.is_definition = true}, span));
          } else {
            nodes.push_back(g->add_node(file, NodeSpec::pop(symbol)));
          }
          break;
      }
    }
    for (const auto& from : nodes) {
      const int degree = pick(0, opt.max_out_degree);
      for (int e = 0; e < degree; ++e) g->add_edge(from, nodes[static_cast<std::size_t>(pick(0, count - 1))]);
    }
    g->seal(file);
  }
  return g;
}

/// Depth-first enumeration of every path from a reference under the path
/// rules, written directly against the rule table rather than the engine.
class BruteForce {
 public:
  struct Outcome {
    std::set<std::vector<NodeId>> complete_paths;  // node sequences
    std::set<NodeId> definitions;
    bool depth_capped = false;
    bool budget_exhausted = false;
  };

  BruteForce(const StackGraph& g, std::size_t max_depth, std::size_t budget)
      : g_(g), max_depth_(max_depth), budget_(budget), roots_(g.roots()) {}

  Outcome run(NodeId reference) {
    out_ = {};
    spent_ = 0;
    const auto& ref = g_.node(reference);
    nodes_ = {reference};
    seen_ = {{reference, {ref.symbol}}};
    walk(reference, {ref.symbol});
    return out_;
  }

 private:
  using Stack = std::vector<Symbol>;  // top first

  void walk(NodeId at, const Stack& stack) {
    if (out_.budget_exhausted) return;
    std::vector<NodeId> sinks(g_.outgoing(at).begin(), g_.outgoing(at).end());
    if (g_.node(at).is_root()) {
      for (auto r : roots_) {
        if (r != at) sinks.push_back(r);
      }
    }
    for (auto sink : sinks) {
      const auto& n = g_.node(sink);
      Stack next = stack;
      if (n.kind == NodeKind::PushSymbol) {
        if (next.size() + 1 > max_depth_) {
          out_.depth_capped = true;
          continue;
        }
        next.insert(next.begin(), n.symbol);
      } else if (n.kind == NodeKind::PopSymbol) {
        if (next.empty() || next.front() != n.symbol) continue;
        next.erase(next.begin());
      }
      std::pair<NodeId, Stack> state{sink, next};
      if (std::find(seen_.begin(), seen_.end(), state) != seen_.end()) continue;
      if (++spent_ > budget_) {
        out_.budget_exhausted = true;
        return;
      }
      seen_.push_back(state);
      nodes_.push_back(sink);
      if (next.empty() && n.is_definition()) {
        out_.complete_paths.insert(nodes_);
        out_.definitions.insert(sink);
      }
      walk(sink, next);
      nodes_.pop_back();
      seen_.pop_back();
    }
  }

  const StackGraph& g_;
  std::size_t max_depth_;
  std::size_t budget_;
  std::vector<NodeId> roots_;
  Outcome out_;
  std::size_t spent_ = 0;
  std::vector<NodeId> nodes_;
  std::vector<std::pair<NodeId, Stack>> seen_;
};

inline std::vector<NodeId> node_sequence(const Path& p) {
  std::vector<NodeId> out;
  for (const auto& s : p.states()) out.push_back(s.node);
  return out;
}

}  // namespace testing
