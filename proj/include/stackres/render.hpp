// Human-readable forms of stacks and nodes, as used by the CLI and tests.
#pragma once

#include <string>

#include "stackres/graph.hpp"
#include "stackres/partial.hpp"
#include "stackres/path.hpp"

namespace stackres {

/// "⟨B () . x⟩", head first; "⟨⟩" when empty.
std::string render_stack(const StackGraph& graph, const SymbolStack& stack);

/// "⟨A .⟩·v", "v" for a bare variable, "⟨x⟩" when concrete.
std::string render_partial_stack(const StackGraph& graph, const PartialSymbolStack& stack);

/// "push x @ b.py:7:11 [ref]", "root of a.py", "scope #9 of b.py". Positions are 1-based.
std::string describe_node(const StackGraph& graph, NodeId id);

}  // namespace stackres
