// Stack graph data model: files, interned symbols, nodes and same-file edges.
#pragma once

#include <compare>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "stackres/blob.hpp"

namespace stackres {

/// Interned symbol handle. Handles are only meaningful within the
/// SymbolTable (and therefore the StackGraph) that produced them.
struct Symbol {
  std::uint32_t id = 0;
  friend auto operator<=>(const Symbol&, const Symbol&) = default;
};

/// Graph-wide intern table. Safe for concurrent interning.
class SymbolTable {
 public:
  SymbolTable() = default;
  SymbolTable(const SymbolTable& other);
  SymbolTable& operator=(const SymbolTable& other);

  Symbol intern(std::string_view text);
  [[nodiscard]] std::optional<Symbol> find(std::string_view text) const;
  [[nodiscard]] std::string_view text(Symbol s) const;
  [[nodiscard]] std::size_t size() const;

 private:
  mutable std::shared_mutex mutex_;
  // deque keeps element addresses stable so the map can key on views into it.
  std::deque<std::string> texts_;
  std::unordered_map<std::string_view, std::uint32_t> index_;
};

struct FileId {
  std::uint32_t index = 0;
  friend auto operator<=>(const FileId&, const FileId&) = default;
};

struct NodeId {
  FileId file;
  std::uint32_t local = 0;
  friend auto operator<=>(const NodeId&, const NodeId&) = default;
};

/// Byte offsets plus 0-based line/column of the first and one-past-last byte.
struct Span {
  std::uint32_t start_byte = 0;
  std::uint32_t end_byte = 0;
  std::uint32_t start_line = 0;
  std::uint32_t start_column = 0;
  std::uint32_t end_line = 0;
  std::uint32_t end_column = 0;
  friend bool operator==(const Span&, const Span&) = default;
};

enum class NodeKind : std::uint8_t { Root, Scope, PushSymbol, PopSymbol };

std::string_view to_string(NodeKind kind);

struct NodeFlags {
  bool is_reference = false;
  bool is_definition = false;
  bool is_endpoint_scope = false;
};

struct Node {
  NodeId id;
  NodeKind kind = NodeKind::Scope;
  Symbol symbol;  // meaningful for PushSymbol / PopSymbol only
  NodeFlags flags;
  std::optional<Span> span;

  [[nodiscard]] bool is_root() const noexcept { return kind == NodeKind::Root; }
  [[nodiscard]] bool is_reference() const noexcept { return flags.is_reference; }
  [[nodiscard]] bool is_definition() const noexcept { return flags.is_definition; }
  [[nodiscard]] bool has_symbol() const noexcept {
    return kind == NodeKind::PushSymbol || kind == NodeKind::PopSymbol;
  }
};

struct Edge {
  NodeId source;
  NodeId sink;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Kind plus symbol text, used when adding nodes so that callers need not
/// intern first.
struct NodeSpec {
  NodeKind kind = NodeKind::Scope;
  std::string symbol;

  static NodeSpec root() { return {NodeKind::Root, {}}; }
  static NodeSpec scope() { return {NodeKind::Scope, {}}; }
  static NodeSpec push(std::string s) { return {NodeKind::PushSymbol, std::move(s)}; }
  static NodeSpec pop(std::string s) { return {NodeKind::PopSymbol, std::move(s)}; }
};

struct FileInfo {
  FileId id;
  BlobId blob;
  std::string display_name;
  bool sealed = false;
};

class StackGraph {
 public:
  /// Throws DuplicateBlob when `blob` is already loaded.
  FileId add_file(std::string display_name, const BlobId& blob);

  /// Throws InconsistentFlags when the flags do not fit the kind, or a
  /// reference/definition carries no span.
  NodeId add_node(FileId file, const NodeSpec& spec, NodeFlags flags = {},
                  std::optional<Span> span = std::nullopt);

  /// Idempotent. Throws CrossFileEdge for edges between files.
  void add_edge(NodeId source, NodeId sink);

  /// Marks a file's subgraph as complete; later mutation throws FileSealed.
  void seal(FileId file);

  /// Drops every node and edge of `file`. Other files are untouched; the
  /// FileId is retired (never reused) and its blob may be loaded again.
  void remove_file(FileId file);

  [[nodiscard]] std::span<const NodeId> outgoing(NodeId source) const;
  [[nodiscard]] const Node& node(NodeId id) const;
  [[nodiscard]] bool contains(NodeId id) const noexcept;
  [[nodiscard]] std::span<const Node> nodes(FileId file) const;
  [[nodiscard]] const FileInfo& file(FileId file) const;
  [[nodiscard]] std::vector<FileId> files() const;
  [[nodiscard]] std::optional<FileId> find_file(const BlobId& blob) const;
  [[nodiscard]] std::size_t edge_count(FileId file) const;

  /// Root nodes of every live file, in (file, local) order. Virtual edges
  /// connect any two distinct members of this list.
  [[nodiscard]] std::vector<NodeId> roots() const;

  Symbol intern(std::string_view text) { return symbols_.intern(text); }
  [[nodiscard]] std::optional<Symbol> find_symbol(std::string_view text) const {
    return symbols_.find(text);
  }
  [[nodiscard]] std::string_view symbol_text(Symbol s) const { return symbols_.text(s); }
  [[nodiscard]] const SymbolTable& symbols() const noexcept { return symbols_; }

 private:
  struct FileData {
    FileInfo info;
    bool live = true;
    std::vector<Node> nodes;
    std::vector<std::vector<NodeId>> adjacency;
    std::unordered_set<std::uint64_t> edge_keys;
    std::size_t edge_count = 0;
  };

  FileData& mutable_file(FileId file);
  [[nodiscard]] const FileData& file_data(FileId file) const;

  std::vector<FileData> files_;
  std::unordered_map<BlobId, FileId> by_blob_;
  SymbolTable symbols_;
};

}  // namespace stackres

template <>
struct std::hash<stackres::NodeId> {
  std::size_t operator()(const stackres::NodeId& n) const noexcept {
    return (static_cast<std::size_t>(n.file.index) << 32) ^ n.local;
  }
};

template <>
struct std::hash<stackres::Symbol> {
  std::size_t operator()(const stackres::Symbol& s) const noexcept { return s.id; }
};
