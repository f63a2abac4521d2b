#include "stackres/graph.hpp"

#include <algorithm>
#include <mutex>

#include "stackres/error.hpp"

namespace stackres {

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::Root: return "root";
    case NodeKind::Scope: return "scope";
    case NodeKind::PushSymbol: return "push";
    case NodeKind::PopSymbol: return "pop";
  }
  return "?";
}

SymbolTable::SymbolTable(const SymbolTable& other) {
  std::shared_lock lock(other.mutex_);
  for (const auto& text : other.texts_) {
    texts_.push_back(text);
    index_.emplace(texts_.back(), static_cast<std::uint32_t>(texts_.size() - 1));
  }
}

SymbolTable& SymbolTable::operator=(const SymbolTable& other) {
  if (this == &other) return *this;
  SymbolTable copy(other);
  std::unique_lock lock(mutex_);
  texts_ = std::move(copy.texts_);
  index_.clear();
  for (std::uint32_t i = 0; i < texts_.size(); ++i) index_.emplace(texts_[i], i);
  return *this;
}

Symbol SymbolTable::intern(std::string_view text) {
  {
    std::shared_lock lock(mutex_);
    if (auto it = index_.find(text); it != index_.end()) return Symbol{it->second};
  }
  std::unique_lock lock(mutex_);
  if (auto it = index_.find(text); it != index_.end()) return Symbol{it->second};
  texts_.emplace_back(text);
  const auto id = static_cast<std::uint32_t>(texts_.size() - 1);
  index_.emplace(texts_.back(), id);
  return Symbol{id};
}

std::optional<Symbol> SymbolTable::find(std::string_view text) const {
  std::shared_lock lock(mutex_);
  if (auto it = index_.find(text); it != index_.end()) return Symbol{it->second};
  return std::nullopt;
}

std::string_view SymbolTable::text(Symbol s) const {
  std::shared_lock lock(mutex_);
  if (s.id >= texts_.size()) throw Error(ErrorCode::UnknownNode, "unknown symbol handle");
  return texts_[s.id];
}

std::size_t SymbolTable::size() const {
  std::shared_lock lock(mutex_);
  return texts_.size();
}

FileId StackGraph::add_file(std::string display_name, const BlobId& blob) {
  if (by_blob_.contains(blob)) {
    throw Error(ErrorCode::DuplicateBlob, "blob " + blob.hex() + " already loaded");
  }
  const FileId id{static_cast<std::uint32_t>(files_.size())};
  FileData data;
  data.info = FileInfo{id, blob, std::move(display_name), false};
  files_.push_back(std::move(data));
  by_blob_.emplace(blob, id);
  return id;
}

StackGraph::FileData& StackGraph::mutable_file(FileId file) {
  if (file.index >= files_.size() || !files_[file.index].live) {
    throw Error(ErrorCode::UnknownFile, "file " + std::to_string(file.index));
  }
  auto& data = files_[file.index];
  if (data.info.sealed) throw Error(ErrorCode::FileSealed, data.info.display_name);
  return data;
}

const StackGraph::FileData& StackGraph::file_data(FileId file) const {
  if (file.index >= files_.size() || !files_[file.index].live) {
    throw Error(ErrorCode::UnknownFile, "file " + std::to_string(file.index));
  }
  return files_[file.index];
}

NodeId StackGraph::add_node(FileId file, const NodeSpec& spec, NodeFlags flags, std::optional<Span> span) {
  auto& data = mutable_file(file);
  if (flags.is_reference && spec.kind != NodeKind::PushSymbol) {
    throw Error(ErrorCode::InconsistentFlags, "only push nodes can be references");
  }
  if (flags.is_definition && spec.kind != NodeKind::PopSymbol) {
    throw Error(ErrorCode::InconsistentFlags, "only pop nodes can be definitions");
  }
  if (flags.is_endpoint_scope && spec.kind != NodeKind::Scope) {
    throw Error(ErrorCode::InconsistentFlags, "only scope nodes can be endpoint scopes");
  }
  if ((flags.is_reference || flags.is_definition) && !span) {
    throw Error(ErrorCode::InconsistentFlags, "references and definitions need a span");
  }
  const bool symbolic = spec.kind == NodeKind::PushSymbol || spec.kind == NodeKind::PopSymbol;
  if (symbolic && spec.symbol.empty()) {
    throw Error(ErrorCode::InconsistentFlags, "push/pop nodes need a symbol");
  }

  Node node;
  node.id = NodeId{file, static_cast<std::uint32_t>(data.nodes.size())};
  node.kind = spec.kind;
  node.symbol = symbolic ? symbols_.intern(spec.symbol) : Symbol{};
  node.flags = flags;
  node.span = span;
  data.nodes.push_back(node);
  data.adjacency.emplace_back();
  return node.id;
}

void StackGraph::add_edge(NodeId source, NodeId sink) {
  if (source.file != sink.file) {
    throw Error(ErrorCode::CrossFileEdge, "edges cannot connect nodes of different files");
  }
  auto& data = mutable_file(source.file);
  if (source.local >= data.nodes.size() || sink.local >= data.nodes.size()) {
    throw Error(ErrorCode::UnknownNode, "edge endpoint does not exist");
  }
  const std::uint64_t key = (static_cast<std::uint64_t>(source.local) << 32) | sink.local;
  if (!data.edge_keys.insert(key).second) return;
  data.adjacency[source.local].push_back(sink);
  ++data.edge_count;
}

void StackGraph::seal(FileId file) { mutable_file(file).info.sealed = true; }

void StackGraph::remove_file(FileId file) {
  const auto& data = file_data(file);
  by_blob_.erase(data.info.blob);
  auto& slot = files_[file.index];
  slot.live = false;
  slot.nodes.clear();
  slot.adjacency.clear();
  slot.edge_keys.clear();
  slot.edge_count = 0;
}

std::span<const NodeId> StackGraph::outgoing(NodeId source) const {
  const auto& data = file_data(source.file);
  if (source.local >= data.nodes.size()) throw Error(ErrorCode::UnknownNode, "no such node");
  return data.adjacency[source.local];
}

const Node& StackGraph::node(NodeId id) const {
  const auto& data = file_data(id.file);
  if (id.local >= data.nodes.size()) throw Error(ErrorCode::UnknownNode, "no such node");
  return data.nodes[id.local];
}

bool StackGraph::contains(NodeId id) const noexcept {
  return id.file.index < files_.size() && files_[id.file.index].live &&
         id.local < files_[id.file.index].nodes.size();
}

std::span<const Node> StackGraph::nodes(FileId file) const { return file_data(file).nodes; }

const FileInfo& StackGraph::file(FileId file) const { return file_data(file).info; }

std::vector<FileId> StackGraph::files() const {
  std::vector<FileId> out;
  for (const auto& f : files_) {
    if (f.live) out.push_back(f.info.id);
  }
  return out;
}

std::optional<FileId> StackGraph::find_file(const BlobId& blob) const {
  if (auto it = by_blob_.find(blob); it != by_blob_.end()) return it->second;
  return std::nullopt;
}

std::size_t StackGraph::edge_count(FileId file) const { return file_data(file).edge_count; }

std::vector<NodeId> StackGraph::roots() const {
  std::vector<NodeId> out;
  for (const auto& f : files_) {
    if (!f.live) continue;
    for (const auto& n : f.nodes) {
      if (n.is_root()) out.push_back(n.id);
    }
  }
  return out;
}

}  // namespace stackres
