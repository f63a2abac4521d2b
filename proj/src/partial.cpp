#include "stackres/partial.hpp"

#include <algorithm>
#include <deque>
#include <optional>
#include <tuple>
#include <unordered_map>

#include "stackres/error.hpp"

namespace stackres {

const PartialSymbolStack* Bindings::find(StackVariable v) const {
  auto it = map_.find(v.index);
  return it == map_.end() ? nullptr : &it->second;
}

PartialSymbolStack Bindings::apply(const PartialSymbolStack& s) const {
  if (!s.tail) return s;
  const auto* bound = find(*s.tail);
  if (!bound) return s;
  PartialSymbolStack out;
  out.prefix = s.prefix;
  out.prefix.insert(out.prefix.end(), bound->prefix.begin(), bound->prefix.end());
  out.tail = bound->tail;
  return out;
}

PartialState PartialPath::state() const {
  return {end, pre.prefix, pre.tail.has_value(), post.prefix, post.tail.has_value()};
}

namespace {

std::int32_t excess(const PartialSymbolStack& pre, const PartialSymbolStack& post) {
  return static_cast<std::int32_t>(post.prefix.size()) - static_cast<std::int32_t>(pre.prefix.size());
}

std::uint32_t max_variable(const PartialPath& p) {
  std::uint32_t m = 0;
  if (p.pre.tail) m = std::max(m, p.pre.tail->index);
  if (p.post.tail) m = std::max(m, p.post.tail->index);
  return m;
}

PartialSymbolStack rename(PartialSymbolStack s, std::uint32_t offset) {
  if (s.tail) s.tail->index += offset;
  return s;
}

}  // namespace

PartialPath lift_partial(const StackGraph& graph, NodeId node) {
  const auto& n = graph.node(node);
  const StackVariable v{0};
  PartialPath p;
  p.start = p.end = node;
  p.pre.tail = v;
  p.post.tail = v;
  switch (n.kind) {
    case NodeKind::Root:
    case NodeKind::Scope:
      break;
    case NodeKind::PushSymbol:
      p.post.prefix.push_back(n.symbol);
      break;
    case NodeKind::PopSymbol:
      p.pre.prefix.push_back(n.symbol);
      break;
  }
  p.height = excess(p.pre, p.post);
  p.states.push_back(p.state());
  return p;
}

PartialPath specialize_empty(const PartialPath& path) {
  if (!path.pre.prefix.empty() || !path.pre.tail) {
    throw Error(ErrorCode::NoMatch, "only a bare-variable precondition can be specialized to <>");
  }
  Bindings b;
  b.bind(*path.pre.tail, {});
  PartialPath out = path;
  out.pre = b.apply(path.pre);
  out.post = b.apply(path.post);
  out.height = excess(out.pre, out.post);
  out.states = {out.state()};
  return out;
}

PartialPath append_partial(const StackGraph& graph, const PartialPath& path, const Edge& edge) {
  if (edge.source != path.end) throw Error(ErrorCode::NotAdjacent, "edge does not start at the partial path's end");
  const auto out = graph.outgoing(edge.source);
  if (std::find(out.begin(), out.end(), edge.sink) == out.end()) {
    throw Error(ErrorCode::NotAdjacent, "edge is not in the graph");
  }
  const auto& sink = graph.node(edge.sink);
  PartialPath p = path;
  switch (sink.kind) {
    case NodeKind::Root:
    case NodeKind::Scope:
      break;
    case NodeKind::PushSymbol:
      p.post.prefix.insert(p.post.prefix.begin(), sink.symbol);
      break;
    case NodeKind::PopSymbol:
      if (!p.post.prefix.empty()) {
        if (p.post.prefix.front() != sink.symbol) {
          throw Error(ErrorCode::StackMismatch, "pop guard does not match the postcondition head");
        }
        p.post.prefix.erase(p.post.prefix.begin());
      } else if (p.post.tail) {
        // v := x . v'  -- the precondition now demands the popped symbol.
        const StackVariable fresh{max_variable(p) + 1};
        p.pre.prefix.push_back(sink.symbol);
        p.pre.tail = fresh;
        p.post.tail = fresh;
      } else {
        throw Error(ErrorCode::StackExhausted, "pop on an empty concrete postcondition");
      }
      break;
  }
  p.end = edge.sink;
  const auto next = p.state();
  if (std::find(path.states.begin(), path.states.end(), next) != path.states.end()) {
    throw Error(ErrorCode::CycleDetected, "partial state already visited on this path");
  }
  p.steps.push_back({edge.source, edge.sink, StepKind::Concrete});
  p.height = std::max(p.height, excess(p.pre, p.post));
  p.states.push_back(next);
  return p;
}

std::optional<Bindings> unify(const PartialSymbolStack& post, const PartialSymbolStack& pre,
                              std::uint32_t next_fresh) {
  const auto n = std::min(post.prefix.size(), pre.prefix.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (post.prefix[i] != pre.prefix[i]) return std::nullopt;
  }
  Bindings b;
  if (post.prefix.size() < pre.prefix.size()) {
    if (!post.tail) return std::nullopt;
    b.bind(*post.tail, {{pre.prefix.begin() + static_cast<std::ptrdiff_t>(n), pre.prefix.end()}, pre.tail});
  } else if (pre.prefix.size() < post.prefix.size()) {
    if (!pre.tail) return std::nullopt;
    b.bind(*pre.tail, {{post.prefix.begin() + static_cast<std::ptrdiff_t>(n), post.prefix.end()}, post.tail});
  } else if (post.tail && pre.tail) {
    const PartialSymbolStack shared{{}, StackVariable{next_fresh}};
    b.bind(*post.tail, shared);
    b.bind(*pre.tail, shared);
  } else if (post.tail) {
    b.bind(*post.tail, {});
  } else if (pre.tail) {
    b.bind(*pre.tail, {});
  }
  return b;
}

PartialPath canonicalize(PartialPath path) {
  if (path.pre.tail) path.pre.tail = StackVariable{0};
  if (path.post.tail) path.post.tail = StackVariable{0};
  return path;
}

PartialPath concat(const StackGraph& graph, const PartialPath& lhs, const PartialPath& rhs) {
  bool virtual_join = false;
  if (lhs.end == rhs.start) {
    const auto kind = graph.node(lhs.end).kind;
    if (kind != NodeKind::Root && kind != NodeKind::Scope) {
      throw Error(ErrorCode::InvalidJunction, "partial paths can only be joined at root or scope nodes");
    }
  } else if (graph.node(lhs.end).is_root() && graph.node(rhs.start).is_root()) {
    virtual_join = true;
  } else {
    throw Error(ErrorCode::NotAdjacent, "lhs does not end where rhs starts");
  }

  const std::uint32_t offset = max_variable(lhs) + 1;
  const auto rhs_pre = rename(rhs.pre, offset);
  const auto rhs_post = rename(rhs.post, offset);
  const std::uint32_t fresh = offset + max_variable(rhs) + 1;
  const auto bindings = unify(lhs.post, rhs_pre, fresh);
  if (!bindings) throw Error(ErrorCode::NoMatch, "postcondition does not unify with precondition");

  PartialPath out;
  out.start = lhs.start;
  out.end = rhs.end;
  out.pre = bindings->apply(lhs.pre);
  out.post = bindings->apply(rhs_post);
  out.steps = lhs.steps;
  if (virtual_join) out.steps.push_back({lhs.end, rhs.start, StepKind::Virtual});
  out.steps.insert(out.steps.end(), rhs.steps.begin(), rhs.steps.end());
  out.height = std::max(lhs.height, excess(lhs.pre, lhs.post) + rhs.height);
  out = canonicalize(std::move(out));
  out.states = {out.state()};
  return out;
}

// ---------------------------------------------------------------------------
// Per-file computation

namespace {

// Hash-consed stacks: `Cons` grows at the head (postconditions), `Snoc` at
// the end (preconditions). Id 0 is the empty stack in both.
class StackArena {
 public:
  StackArena() { cells_.push_back({Symbol{}, 0, 0}); }

  std::uint32_t extend(std::uint32_t base, Symbol s) {
    const std::uint64_t key = (static_cast<std::uint64_t>(base) << 32) | s.id;
    auto [it, fresh] = index_.emplace(key, static_cast<std::uint32_t>(cells_.size()));
    if (fresh) cells_.push_back({s, base, cells_[base].length + 1});
    return it->second;
  }
  [[nodiscard]] Symbol symbol(std::uint32_t id) const { return cells_[id].symbol; }
  [[nodiscard]] std::uint32_t base(std::uint32_t id) const { return cells_[id].base; }
  [[nodiscard]] std::uint32_t length(std::uint32_t id) const { return cells_[id].length; }

  /// Symbols from the most recently added back to the first.
  [[nodiscard]] std::vector<Symbol> newest_first(std::uint32_t id) const {
    std::vector<Symbol> out;
    for (; id != 0; id = cells_[id].base) out.push_back(cells_[id].symbol);
    return out;
  }

 private:
  struct Cell {
    Symbol symbol;
    std::uint32_t base;
    std::uint32_t length;
  };
  std::vector<Cell> cells_;
  std::unordered_map<std::uint64_t, std::uint32_t> index_;
};

struct SearchEntry {
  std::uint32_t parent;
  NodeId node;
  std::uint32_t pre;   // snoc id
  std::uint32_t post;  // cons id
  std::int32_t height;
  std::uint32_t length;
};

constexpr std::uint32_t kNoParent = UINT32_MAX;

using DedupKey = std::tuple<std::uint32_t, std::uint32_t, std::vector<std::string>, bool,
                            std::vector<std::string>, bool>;

std::vector<std::string> texts(const StackGraph& g, const std::vector<Symbol>& syms) {
  std::vector<std::string> out;
  out.reserve(syms.size());
  for (auto s : syms) out.emplace_back(g.symbol_text(s));
  return out;
}

void insert_pareto(std::vector<PartialPath>& variants, PartialPath candidate) {
  const auto len = candidate.steps.size();
  for (const auto& v : variants) {
    if (v.height <= candidate.height && v.steps.size() <= len) return;
  }
  std::erase_if(variants, [&](const PartialPath& v) { return candidate.height <= v.height && len <= v.steps.size(); });
  variants.push_back(std::move(candidate));
  std::sort(variants.begin(), variants.end(), [](const PartialPath& a, const PartialPath& b) {
    return std::pair(a.height, a.steps.size()) < std::pair(b.height, b.steps.size());
  });
}

}  // namespace

FilePartials compute_file_partials(const StackGraph& graph, FileId file, const SearchLimits& limits) {
  FilePartials result;
  std::map<DedupKey, std::vector<PartialPath>> found;
  std::size_t fuel = limits.fuel;
  StackArena pre_arena;
  StackArena post_arena;

  for (const auto& start : graph.nodes(file)) {
    if (!start.is_reference() && !start.is_root()) continue;
    if (result.fuel_exhausted) break;

    // References start from the concrete empty stack; roots from a variable.
    const bool has_var = !start.is_reference();
    std::vector<SearchEntry> entries;
    const std::uint32_t seed_post = start.kind == NodeKind::PushSymbol ? post_arena.extend(0, start.symbol) : 0;
    entries.push_back({kNoParent, start.id, 0, seed_post,
                       static_cast<std::int32_t>(post_arena.length(seed_post)), 0});
    std::deque<std::uint32_t> queue{0};

    auto on_path = [&](std::uint32_t from, NodeId node, std::uint32_t pre, std::uint32_t post) {
      for (auto i = from; i != kNoParent; i = entries[i].parent) {
        const auto& e = entries[i];
        if (e.node == node && e.pre == pre && e.post == post) return true;
      }
      return false;
    };

    auto record = [&](std::uint32_t id) {
      const auto& e = entries[id];
      PartialPath p;
      p.start = start.id;
      p.end = e.node;
      auto pre = pre_arena.newest_first(e.pre);
      std::reverse(pre.begin(), pre.end());
      p.pre.prefix = std::move(pre);
      p.post.prefix = post_arena.newest_first(e.post);
      if (has_var) p.pre.tail = p.post.tail = StackVariable{0};
      p.height = e.height;
      std::vector<std::uint32_t> chain;
      for (auto i = id; i != kNoParent; i = entries[i].parent) chain.push_back(i);
      std::reverse(chain.begin(), chain.end());
      for (std::size_t k = 1; k < chain.size(); ++k) {
        p.steps.push_back({entries[chain[k - 1]].node, entries[chain[k]].node, StepKind::Concrete});
      }
      DedupKey key{p.start.local, p.end.local, texts(graph, p.pre.prefix), has_var, texts(graph, p.post.prefix),
                   has_var};
      insert_pareto(found[key], std::move(p));
    };

    while (!queue.empty() && !result.fuel_exhausted) {
      const auto current = queue.front();
      queue.pop_front();
      const auto& cur = entries[current];
      const Node& at = graph.node(cur.node);
      const auto out = graph.outgoing(cur.node);
      if (cur.length > 0 && (at.is_definition() || at.is_root() || out.empty())) record(current);
      if (cur.length > 0 && at.is_root()) continue;

      for (const auto& sink_id : out) {
        const auto& sink = graph.node(sink_id);
        const auto& e = entries[current];
        std::uint32_t pre = e.pre;
        std::uint32_t post = e.post;
        if (sink.kind == NodeKind::PushSymbol) {
          if (post_arena.length(post) + 1 > limits.max_stack_depth) {
            result.capped = true;
            continue;
          }
          post = post_arena.extend(post, sink.symbol);
        } else if (sink.kind == NodeKind::PopSymbol) {
          if (post != 0) {
            if (post_arena.symbol(post) != sink.symbol) continue;
            post = post_arena.base(post);
          } else if (has_var) {
            if (pre_arena.length(pre) + 1 > limits.max_precondition) {
              result.capped = true;
              continue;
            }
            pre = pre_arena.extend(pre, sink.symbol);
          } else {
            continue;
          }
        }
        if (on_path(current, sink_id, pre, post)) continue;
        if (fuel == 0) {
          result.fuel_exhausted = true;
          break;
        }
        --fuel;
        const auto height = std::max(e.height, static_cast<std::int32_t>(post_arena.length(post)) -
                                                   static_cast<std::int32_t>(pre_arena.length(pre)));
        entries.push_back({current, sink_id, pre, post, height, e.length + 1});
        queue.push_back(static_cast<std::uint32_t>(entries.size() - 1));
      }
    }
  }

  for (auto& [key, variants] : found) {
    for (auto& v : variants) result.paths.push_back(std::move(v));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Query-time stitching

void PartialIndex::add(FileId file, FilePartials partials) {
  (void)graph_->file(file);
  capped_ = capped_ || partials.capped || partials.fuel_exhausted;
  for (auto& p : partials.paths) {
    if (p.start.file != file || p.end.file != file) {
      throw Error(ErrorCode::CrossFileEdge, "stored partial path leaves its file");
    }
    by_start_[p.start].push_back(std::move(p));
    ++count_;
  }
}

std::span<const PartialPath> PartialIndex::starting_at(NodeId node) const {
  auto it = by_start_.find(node);
  if (it == by_start_.end()) return {};
  return it->second;
}

PartialResolveResult resolve_partial(const PartialIndex& index, NodeId reference, const SearchLimits& limits) {
  const auto& graph = index.graph();
  if (!graph.node(reference).is_reference()) throw Error(ErrorCode::NotReference, "resolve needs a reference node");

  PartialResolveResult result;
  result.precondition_capped = index.any_capped();

  struct Chain {
    std::uint32_t parent;
    const PartialPath* piece;
    std::vector<Symbol> post;
    std::int32_t height;
    std::size_t edges;
  };
  std::vector<Chain> chains;
  std::deque<std::uint32_t> queue;
  std::vector<std::uint32_t> complete;
  std::size_t fuel = limits.fuel;
  const auto depth_cap = static_cast<std::int32_t>(limits.max_stack_depth);

  auto on_chain = [&](std::uint32_t from, NodeId node, const std::vector<Symbol>& post) {
    for (auto i = from; i != kNoParent; i = chains[i].parent) {
      if (chains[i].piece->end == node && chains[i].post == post) return true;
    }
    return false;
  };

  // Returns false once fuel runs out.
  auto add = [&](std::uint32_t parent, const PartialPath& piece) {
    std::vector<Symbol> post;
    std::int32_t height = piece.height;
    std::size_t edges = piece.steps.size();
    if (parent == kNoParent) {
      if (!piece.pre.concrete() || !piece.pre.prefix.empty()) return true;
      post = piece.post.prefix;
    } else {
      const auto& from = chains[parent];
      const auto& pre = piece.pre.prefix;
      if (piece.post.tail && piece.post.tail != piece.pre.tail) {
        const auto b = unify({from.post, std::nullopt}, piece.pre, max_variable(piece) + 1);
        if (!b) return true;
        const auto next = b->apply(piece.post);
        if (!next.concrete()) return true;
        post = next.prefix;
      } else {
        // Against a concrete stack, unification is a prefix match.
        if (pre.size() > from.post.size() || !std::equal(pre.begin(), pre.end(), from.post.begin())) return true;
        if (!piece.pre.tail && pre.size() != from.post.size()) return true;
        post = piece.post.prefix;
        if (piece.post.tail) post.insert(post.end(), from.post.begin() + static_cast<std::ptrdiff_t>(pre.size()), from.post.end());
      }
      height = std::max(from.height, static_cast<std::int32_t>(from.post.size()) + piece.height);
      edges += from.edges + (from.piece->end == piece.start ? 0 : 1);
      if (on_chain(parent, piece.end, post)) return true;
    }
    if (height > depth_cap) {
      result.depth_capped = true;
      return true;
    }
    if (fuel == 0) {
      result.fuel_exhausted = true;
      return false;
    }
    --fuel;
    const auto id = static_cast<std::uint32_t>(chains.size());
    chains.push_back({parent, &piece, std::move(post), height, edges});
    if (chains[id].post.empty() && graph.node(piece.end).is_definition()) complete.push_back(id);
    if (graph.node(piece.end).is_root()) queue.push_back(id);
    return true;
  };

  bool more = true;
  for (const auto& seed : index.starting_at(reference)) {
    if (!(more = add(kNoParent, seed))) break;
  }
  // Pieces leaving any root, in root order, filtered by the head of their
  // precondition. A piece with an empty precondition prefix fits any stack.
  std::vector<const PartialPath*> from_roots;
  for (const auto& root : index.roots()) {
    for (const auto& piece : index.starting_at(root)) from_roots.push_back(&piece);
  }
  std::unordered_map<std::uint32_t, std::vector<const PartialPath*>> by_head;
  std::optional<std::vector<const PartialPath*>> headless;
  auto candidates = [&](const std::vector<Symbol>& post) -> const std::vector<const PartialPath*>& {
    if (post.empty()) {
      if (!headless) {
        headless.emplace();
        for (const auto* p : from_roots) {
          if (p->pre.prefix.empty()) headless->push_back(p);
        }
      }
      return *headless;
    }
    const auto [it, fresh] = by_head.try_emplace(post.front().id);
    if (fresh) {
      for (const auto* p : from_roots) {
        if (p->pre.prefix.empty() || p->pre.prefix.front() == post.front()) it->second.push_back(p);
      }
    }
    return it->second;
  };

  while (more && !queue.empty()) {
    const auto current = queue.front();
    queue.pop_front();
    for (const auto* piece : candidates(chains[current].post)) {
      if (!(more = add(current, *piece))) break;
    }
  }

  std::stable_sort(complete.begin(), complete.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return chains[a].edges < chains[b].edges; });
  for (const auto id : complete) {
    std::vector<const PartialPath*> pieces;
    for (auto i = id; i != kNoParent; i = chains[i].parent) pieces.push_back(chains[i].piece);
    std::reverse(pieces.begin(), pieces.end());
    PartialPath folded = *pieces.front();
    for (std::size_t k = 1; k < pieces.size(); ++k) folded = concat(graph, folded, *pieces[k]);
    result.bindings.push_back(std::move(folded));
  }
  return result;
}

}  // namespace stackres
