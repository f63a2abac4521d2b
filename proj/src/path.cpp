#include "stackres/path.hpp"

#include <algorithm>
#include <deque>
#include <unordered_map>

#include "stackres/error.hpp"

namespace stackres {

SymbolStack SymbolStack::from_top_first(std::span<const Symbol> top_first) {
  SymbolStack s;
  s.bottom_first_.assign(top_first.rbegin(), top_first.rend());
  return s;
}

SymbolStack SymbolStack::push(Symbol s) const {
  SymbolStack out = *this;
  out.bottom_first_.push_back(s);
  return out;
}

SymbolStack SymbolStack::pop() const {
  SymbolStack out = *this;
  out.bottom_first_.pop_back();
  return out;
}

std::optional<Symbol> SymbolStack::head() const {
  if (bottom_first_.empty()) return std::nullopt;
  return bottom_first_.back();
}

std::vector<Symbol> SymbolStack::top_first() const { return {bottom_first_.rbegin(), bottom_first_.rend()}; }

bool Path::visited(const PathState& state) const {
  return std::find(states_.begin(), states_.end(), state) != states_.end();
}

bool Path::is_complete(const StackGraph& graph) const {
  return graph.node(start()).is_reference() && graph.node(end()).is_definition() && stack().empty();
}

Path lift(const StackGraph& graph, NodeId node) {
  const auto& n = graph.node(node);
  Path p;
  switch (n.kind) {
    case NodeKind::PopSymbol:
      throw Error(ErrorCode::CannotLiftPop, "pop nodes cannot be lifted into paths");
    case NodeKind::PushSymbol:
      p.states_.push_back({node, SymbolStack{}.push(n.symbol)});
      break;
    case NodeKind::Root:
    case NodeKind::Scope:
      p.states_.push_back({node, SymbolStack{}});
      break;
  }
  return p;
}

namespace {

// Applies the sink's effect to `stack`. Throws StackMismatch on a failed pop guard.
SymbolStack apply_sink(const Node& sink, const SymbolStack& stack) {
  switch (sink.kind) {
    case NodeKind::Root:
    case NodeKind::Scope:
      return stack;
    case NodeKind::PushSymbol:
      return stack.push(sink.symbol);
    case NodeKind::PopSymbol:
      if (stack.head() != sink.symbol) {
        throw Error(ErrorCode::StackMismatch, "pop guard does not match the stack head");
      }
      return stack.pop();
  }
  return stack;
}

}  // namespace

Path append(const StackGraph& graph, const Path& path, const Edge& edge) {
  if (edge.source != path.end()) throw Error(ErrorCode::NotAdjacent, "edge does not start at the path's end");
  const auto out = graph.outgoing(edge.source);
  if (std::find(out.begin(), out.end(), edge.sink) == out.end()) {
    throw Error(ErrorCode::NotAdjacent, "edge is not in the graph");
  }
  PathState next{edge.sink, apply_sink(graph.node(edge.sink), path.stack())};
  if (path.visited(next)) throw Error(ErrorCode::CycleDetected, "state already visited on this path");
  Path p = path;
  p.steps_.push_back({edge.source, edge.sink, StepKind::Concrete});
  p.states_.push_back(std::move(next));
  return p;
}

Path append_virtual(const StackGraph& graph, const Path& path, NodeId sink) {
  if (!graph.node(path.end()).is_root() || !graph.node(sink).is_root() || sink == path.end()) {
    throw Error(ErrorCode::NotRoot, "virtual edges join two distinct root nodes");
  }
  PathState next{sink, path.stack()};
  if (path.visited(next)) throw Error(ErrorCode::CycleDetected, "state already visited on this path");
  Path p = path;
  p.steps_.push_back({path.end(), sink, StepKind::Virtual});
  p.states_.push_back(std::move(next));
  return p;
}

// Search-internal representation: hash-consed stacks and parent-linked
// entries, so a pending path costs O(1) to extend and states compare as
// integer pairs.
class PathBuilder {
 public:
  PathBuilder() { cells_.push_back({Symbol{}, 0, 0}); }

  std::uint32_t push(std::uint32_t tail, Symbol s) {
    const std::uint64_t key = (static_cast<std::uint64_t>(tail) << 32) | s.id;
    auto [it, fresh] = index_.emplace(key, static_cast<std::uint32_t>(cells_.size()));
    if (fresh) cells_.push_back({s, tail, cells_[tail].depth + 1});
    return it->second;
  }

  [[nodiscard]] const auto& cell(std::uint32_t id) const { return cells_[id]; }

  SymbolStack materialize(std::uint32_t id) const {
    std::vector<Symbol> top_first;
    for (; id != 0; id = cells_[id].tail) top_first.push_back(cells_[id].head);
    return SymbolStack::from_top_first(top_first);
  }

  struct Entry {
    std::uint32_t parent;
    NodeId node;
    std::uint32_t stack;
    StepKind kind;
  };

  static constexpr std::uint32_t kNoParent = UINT32_MAX;

  std::vector<Entry> entries;

  [[nodiscard]] bool on_path(std::uint32_t entry, NodeId node, std::uint32_t stack) const {
    for (auto i = entry; i != kNoParent; i = entries[i].parent) {
      if (entries[i].node == node && entries[i].stack == stack) return true;
    }
    return false;
  }

  Path build(std::uint32_t entry) const {
    Path p;
    std::vector<std::uint32_t> chain;
    for (auto i = entry; i != kNoParent; i = entries[i].parent) chain.push_back(i);
    std::reverse(chain.begin(), chain.end());
    for (std::size_t k = 0; k < chain.size(); ++k) {
      const auto& e = entries[chain[k]];
      if (k > 0) p.steps_.push_back({entries[chain[k - 1]].node, e.node, e.kind});
      p.states_.push_back({e.node, materialize(e.stack)});
    }
    return p;
  }

 private:
  struct Cell {
    Symbol head;
    std::uint32_t tail;
    std::uint32_t depth;
  };

  std::vector<Cell> cells_;
  std::unordered_map<std::uint64_t, std::uint32_t> index_;
};

ResolveResult resolve(const StackGraph& graph, NodeId reference, const SearchLimits& limits) {
  const auto& ref = graph.node(reference);
  if (!ref.is_reference()) throw Error(ErrorCode::NotReference, "resolve needs a reference node");

  ResolveResult result;
  PathBuilder b;
  const auto roots = graph.roots();
  b.entries.push_back({PathBuilder::kNoParent, reference, b.push(0, ref.symbol), StepKind::Concrete});

  std::deque<std::uint32_t> pending{0};
  std::size_t fuel = limits.fuel;

  // Returns false once fuel runs out.
  auto extend = [&](std::uint32_t from, NodeId sink_id, StepKind kind) {
    const auto& sink = graph.node(sink_id);
    std::uint32_t stack = b.entries[from].stack;
    switch (sink.kind) {
      case NodeKind::Root:
      case NodeKind::Scope:
        break;
      case NodeKind::PushSymbol:
        if (b.cell(stack).depth + 1 > limits.max_stack_depth) {
          result.depth_capped = true;
          return true;
        }
        stack = b.push(stack, sink.symbol);
        break;
      case NodeKind::PopSymbol:
        if (stack == 0 || b.cell(stack).head != sink.symbol) return true;
        stack = b.cell(stack).tail;
        break;
    }
    if (b.on_path(from, sink_id, stack)) return true;
    if (fuel == 0) {
      result.fuel_exhausted = true;
      return false;
    }
    --fuel;
    const auto id = static_cast<std::uint32_t>(b.entries.size());
    b.entries.push_back({from, sink_id, stack, kind});
    pending.push_back(id);
    if (stack == 0 && sink.is_definition()) result.paths.push_back(b.build(id));
    return true;
  };

  while (!pending.empty()) {
    const auto current = pending.front();
    pending.pop_front();
    const NodeId at = b.entries[current].node;
    bool more = true;
    for (const auto& sink : graph.outgoing(at)) {
      if (!(more = extend(current, sink, StepKind::Concrete))) break;
    }
    if (more && graph.node(at).is_root()) {
      for (const auto& r : roots) {
        if (r == at) continue;
        if (!(more = extend(current, r, StepKind::Virtual))) break;
      }
    }
    if (!more) break;
  }
  return result;
}

TraceResult trace(const StackGraph& graph, NodeId reference, const SearchLimits& limits) {
  auto resolved = resolve(graph, reference, limits);
  TraceResult out;
  out.fuel_exhausted = resolved.fuel_exhausted;
  out.depth_capped = resolved.depth_capped;
  for (const auto& p : resolved.paths) out.paths.emplace_back(p.states().begin(), p.states().end());
  return out;
}

}  // namespace stackres
