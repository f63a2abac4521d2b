#include "stackres/render.hpp"

namespace stackres {

namespace {

std::string join(const StackGraph& graph, const std::vector<Symbol>& symbols) {
  std::string out = "⟨";
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    if (i) out += ' ';
    out += graph.symbol_text(symbols[i]);
  }
  return out + "⟩";
}

}  // namespace

std::string render_stack(const StackGraph& graph, const SymbolStack& stack) {
  return join(graph, stack.top_first());
}

std::string render_partial_stack(const StackGraph& graph, const PartialSymbolStack& stack) {
  if (!stack.tail) return join(graph, stack.prefix);
  if (stack.prefix.empty()) return "v";
  return join(graph, stack.prefix) + "·v";
}

std::string describe_node(const StackGraph& graph, NodeId id) {
  const auto& n = graph.node(id);
  const auto& file = graph.file(id.file).display_name;
  switch (n.kind) {
    case NodeKind::Root:
      return "root of " + file;
    case NodeKind::Scope:
      return "scope #" + std::to_string(id.local) + " of " + file;
    case NodeKind::PushSymbol:
    case NodeKind::PopSymbol:
      break;
  }
  std::string out = n.kind == NodeKind::PushSymbol ? "push " : "pop ";
  out += graph.symbol_text(n.symbol);
  if (n.span) {
    out += " @ " + file + ":" + std::to_string(n.span->start_line + 1) + ":" + std::to_string(n.span->start_column + 1);
  } else {
    out += " #" + std::to_string(id.local) + " of " + file;
  }
  if (n.is_reference()) out += " [ref]";
  if (n.is_definition()) out += " [def]";
  return out;
}

}  // namespace stackres
