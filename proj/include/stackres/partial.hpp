// Partial paths: path fragments summarized by a precondition and a
// postcondition over symbol stacks that may end in one stack variable.
//
// A partial path from i to i' with precondition `pre` and postcondition
// `post` says: for any concrete stack S matching `pre` (binding its variable
// to the remainder R), following the recorded steps from i, with i's own
// effect applied, ends at i' with `post` instantiated by the same R.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "stackres/graph.hpp"
#include "stackres/path.hpp"

namespace stackres {

struct StackVariable {
  std::uint32_t index = 0;
  friend auto operator<=>(const StackVariable&, const StackVariable&) = default;
};

struct PartialSymbolStack {
  std::vector<Symbol> prefix;  // head first
  std::optional<StackVariable> tail;

  [[nodiscard]] bool concrete() const noexcept { return !tail.has_value(); }
  static PartialSymbolStack from(const SymbolStack& s) { return {s.top_first(), std::nullopt}; }
  friend bool operator==(const PartialSymbolStack&, const PartialSymbolStack&) = default;
};

/// Variable assignments produced by unification.
class Bindings {
 public:
  void bind(StackVariable v, PartialSymbolStack value) { map_[v.index] = std::move(value); }
  [[nodiscard]] const PartialSymbolStack* find(StackVariable v) const;
  [[nodiscard]] PartialSymbolStack apply(const PartialSymbolStack& s) const;
  [[nodiscard]] std::size_t size() const noexcept { return map_.size(); }

 private:
  std::map<std::uint32_t, PartialSymbolStack> map_;
};

/// (node, pre, post) with variables compared by presence only; a partial
/// path never holds two distinct variables, so identity is irrelevant.
struct PartialState {
  NodeId node;
  std::vector<Symbol> pre;
  bool pre_var = false;
  std::vector<Symbol> post;
  bool post_var = false;
  friend bool operator==(const PartialState&, const PartialState&) = default;
};

struct PartialPath {
  NodeId start;
  NodeId end;
  PartialSymbolStack pre;
  PartialSymbolStack post;
  std::vector<Step> steps;
  /// max over visited states of |post prefix| - |pre prefix|; a concrete
  /// start stack S reaches depth at most |S| + height along the path.
  std::int32_t height = 0;
  /// Visited states for cycle detection. Empty for paths loaded from a store.
  std::vector<PartialState> states;

  [[nodiscard]] PartialState state() const;
  [[nodiscard]] std::size_t edge_count() const noexcept { return steps.size(); }
};

PartialPath lift_partial(const StackGraph& graph, NodeId node);

/// Binds the variable of a freshly lifted path to the empty stack, giving
/// the concrete query seed (pre = <>).
PartialPath specialize_empty(const PartialPath& path);

/// Throws NotAdjacent, StackMismatch, StackExhausted, or CycleDetected.
PartialPath append_partial(const StackGraph& graph, const PartialPath& path, const Edge& edge);

/// Most general unifier of lhs's postcondition with rhs's precondition.
/// Variables must already be apart; `next_fresh` supplies a new variable
/// when both sides end in one. nullopt means no match.
std::optional<Bindings> unify(const PartialSymbolStack& post, const PartialSymbolStack& pre,
                              std::uint32_t next_fresh);

/// Joins lhs and rhs at lhs.end == rhs.start (which must be a root or scope),
/// or across a virtual edge when both are distinct roots. Throws NotAdjacent,
/// InvalidJunction, or NoMatch.
PartialPath concat(const StackGraph& graph, const PartialPath& lhs, const PartialPath& rhs);

/// Renames the (single) variable to index 0.
PartialPath canonicalize(PartialPath path);

struct FilePartials {
  std::vector<PartialPath> paths;
  bool fuel_exhausted = false;
  bool capped = false;
};

/// Every partial path of `file` that starts at a reference (with concrete
/// empty precondition) or a root, ends at a definition, root or dead end,
/// and never passes through a root. Deduplicated on (start, end, pre, post)
/// keeping Pareto-minimal (height, length) witnesses; sorted by that key.
FilePartials compute_file_partials(const StackGraph& graph, FileId file, const SearchLimits& limits = {});

/// Stored partial paths for a set of loaded files, indexed by start node.
class PartialIndex {
 public:
  explicit PartialIndex(const StackGraph& graph) : graph_(&graph), roots_(graph.roots()) {}

  void add(FileId file, FilePartials partials);

  [[nodiscard]] const StackGraph& graph() const noexcept { return *graph_; }
  [[nodiscard]] std::span<const PartialPath> starting_at(NodeId node) const;
  [[nodiscard]] const std::vector<NodeId>& roots() const noexcept { return roots_; }
  [[nodiscard]] bool any_capped() const noexcept { return capped_; }
  [[nodiscard]] std::size_t size() const noexcept { return count_; }

 private:
  const StackGraph* graph_;
  std::vector<NodeId> roots_;
  std::unordered_map<NodeId, std::vector<PartialPath>> by_start_;
  std::size_t count_ = 0;
  bool capped_ = false;
};

struct PartialResolveResult {
  /// Complete bindings (pre = post = <>), ordered by (edge count, discovery).
  std::vector<PartialPath> bindings;
  bool fuel_exhausted = false;
  bool depth_capped = false;
  bool precondition_capped = false;

  [[nodiscard]] bool limit_exceeded() const noexcept {
    return fuel_exhausted || depth_capped || precondition_capped;
  }
};

/// Stitches stored partial paths from `reference`, joining at roots across
/// virtual edges.
PartialResolveResult resolve_partial(const PartialIndex& index, NodeId reference, const SearchLimits& limits = {});

}  // namespace stackres
