// Path construction (lift / append / virtual root steps) and the
// breadth-first jump-to-definition search built on it.
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "stackres/graph.hpp"

namespace stackres {

/// Immutable stack of pending symbols. The head is the next symbol a pop
/// node must match.
class SymbolStack {
 public:
  SymbolStack() = default;
  static SymbolStack from_top_first(std::span<const Symbol> top_first);

  [[nodiscard]] SymbolStack push(Symbol s) const;
  /// Requires a non-empty stack.
  [[nodiscard]] SymbolStack pop() const;
  [[nodiscard]] std::optional<Symbol> head() const;
  [[nodiscard]] bool empty() const noexcept { return bottom_first_.empty(); }
  [[nodiscard]] std::size_t size() const noexcept { return bottom_first_.size(); }
  /// i = 0 is the head.
  [[nodiscard]] Symbol at(std::size_t i) const { return bottom_first_[bottom_first_.size() - 1 - i]; }
  [[nodiscard]] std::vector<Symbol> top_first() const;

  friend bool operator==(const SymbolStack&, const SymbolStack&) = default;

 private:
  std::vector<Symbol> bottom_first_;
};

enum class StepKind : std::uint8_t { Concrete, Virtual };

struct Step {
  NodeId source;
  NodeId sink;
  StepKind kind = StepKind::Concrete;
  friend bool operator==(const Step&, const Step&) = default;
};

struct PathState {
  NodeId node;
  SymbolStack stack;
  friend bool operator==(const PathState&, const PathState&) = default;
};

class Path {
 public:
  [[nodiscard]] NodeId start() const noexcept { return states_.front().node; }
  [[nodiscard]] NodeId end() const noexcept { return states_.back().node; }
  [[nodiscard]] const SymbolStack& stack() const noexcept { return states_.back().stack; }
  [[nodiscard]] std::span<const Step> steps() const noexcept { return steps_; }
  /// Every (node, stack) state along the path, start first. Doubles as the
  /// visited set used for cycle detection.
  [[nodiscard]] std::span<const PathState> states() const noexcept { return states_; }
  [[nodiscard]] std::size_t edge_count() const noexcept { return steps_.size(); }
  [[nodiscard]] bool visited(const PathState& state) const;
  [[nodiscard]] bool is_complete(const StackGraph& graph) const;

 private:
  friend Path lift(const StackGraph&, NodeId);
  friend Path append(const StackGraph&, const Path&, const Edge&);
  friend Path append_virtual(const StackGraph&, const Path&, NodeId);
  friend class PathBuilder;

  Path() = default;

  std::vector<Step> steps_;
  std::vector<PathState> states_;
};

struct SearchLimits {
  std::size_t max_stack_depth = 128;
  std::size_t fuel = 1'000'000;
  std::size_t max_precondition = 16;
};

/// Empty path at `node`. Throws CannotLiftPop for pop nodes.
Path lift(const StackGraph& graph, NodeId node);

/// Throws NotAdjacent, StackMismatch, or CycleDetected.
Path append(const StackGraph& graph, const Path& path, const Edge& edge);

/// Follows the virtual edge between two distinct roots. Throws NotRoot or
/// CycleDetected.
Path append_virtual(const StackGraph& graph, const Path& path, NodeId sink);

struct ResolveResult {
  std::vector<Path> paths;
  bool fuel_exhausted = false;
  bool depth_capped = false;

  [[nodiscard]] bool limit_exceeded() const noexcept { return fuel_exhausted || depth_capped; }
};

/// Every complete path from `reference`, ordered by (edge count, discovery).
/// Hitting the fuel budget stops the search early; hitting the depth cap
/// prunes the offending extensions. Either sets the matching flag.
ResolveResult resolve(const StackGraph& graph, NodeId reference, const SearchLimits& limits = {});

struct TraceResult {
  std::vector<std::vector<PathState>> paths;
  bool fuel_exhausted = false;
  bool depth_capped = false;
};

TraceResult trace(const StackGraph& graph, NodeId reference, const SearchLimits& limits = {});

}  // namespace stackres
