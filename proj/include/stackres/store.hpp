// Content-addressed record store and snapshot indexing.
//
// Layout under the store root:
//   records/<h0h1>/<h2h3>/<blob hex>/<context key>.json   one FileRecord each
//   manifests/<snapshot id>.json
//   tmp/                                                  staging for atomic renames
//
// The context key hashes (toolchain_version, display_name): the frontend
// derives module names from file names, so one blob can yield different
// subgraphs under different names.
#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "stackres/blob.hpp"
#include "stackres/graph.hpp"
#include "stackres/partial.hpp"

namespace stackres {

inline constexpr std::string_view kToolchainVersion = "stackres-minilang/1";
inline constexpr int kRecordFormatVersion = 1;

struct FileRecord {
  BlobId blob;
  std::string display_name;
  std::string subgraph;  // serialize_file output
  std::string partials;  // serialize_partials output
  std::string toolchain_version;

  friend bool operator==(const FileRecord&, const FileRecord&) = default;
};

struct SnapshotManifest {
  std::string snapshot_id;
  std::vector<std::pair<std::string, BlobId>> entries;  // sorted by path, paths unique
};

struct StoreStats {
  std::size_t records = 0;
  std::size_t total_nodes = 0;
  std::size_t total_partials = 0;
  std::uintmax_t bytes = 0;
};

class Store {
 public:
  /// Creates the directory layout if missing. Throws StoreIo.
  explicit Store(std::filesystem::path root, std::string toolchain_version = std::string(kToolchainVersion));

  [[nodiscard]] const std::filesystem::path& root() const noexcept { return root_; }
  [[nodiscard]] const std::string& toolchain_version() const noexcept { return toolchain_; }

  /// Record for (blob, display_name) under this store's toolchain version.
  /// Throws StoreCorrupt when the stored bytes fail their checksum.
  [[nodiscard]] std::optional<FileRecord> lookup(const BlobId& blob, std::string_view display_name) const;

  /// Validates and durably writes `record`. Idempotent for identical
  /// records; throws ConflictingRecord if different bytes are already stored.
  void put(const FileRecord& record);

  void put_manifest(const SnapshotManifest& manifest);
  [[nodiscard]] std::optional<SnapshotManifest> manifest(std::string_view snapshot_id) const;

  /// Walks every record (any toolchain), verifying checksums.
  [[nodiscard]] StoreStats stats() const;

  /// Canonical on-disk bytes for a record.
  static std::string encode(const FileRecord& record);
  static FileRecord decode(std::string_view bytes);

  [[nodiscard]] std::filesystem::path record_path(const BlobId& blob, std::string_view display_name) const;

 private:
  void write_atomic(const std::filesystem::path& target, std::string_view bytes);

  std::filesystem::path root_;
  std::string toolchain_;
};

struct SourceFile {
  std::string path;
  std::string content;
};

struct IndexError {
  std::string path;
  std::string message;
};

struct IndexReport {
  std::string snapshot_id;
  std::size_t hits = 0;
  std::size_t misses = 0;
  std::vector<IndexError> errors;
  std::size_t nodes = 0;
  std::size_t partials = 0;
  std::uint64_t millis = 0;
  std::vector<std::string> warnings;

  /// Single-line JSON: snapshot_id, hits, misses, errors, nodes, partials, millis.
  [[nodiscard]] std::string to_json() const;
};

/// Builds the record for one file version from scratch. Throws SyntaxError.
FileRecord build_record(const SourceFile& file, const std::string& toolchain_version,
                        const SearchLimits& limits = {});

/// Indexes a snapshot: store hits are reused, misses are parsed, built,
/// summarized into partial paths and stored. Frontend errors are reported
/// per file without stopping the others. Writes the manifest.
IndexReport index_snapshot(Store& store, std::string snapshot_id, std::vector<SourceFile> files,
                           unsigned jobs = 1, const SearchLimits& limits = {});

/// A snapshot's records loaded into one graph for querying.
struct LoadedSnapshot {
  std::unique_ptr<StackGraph> graph;
  std::unique_ptr<PartialIndex> partials;  // null unless requested
  std::vector<std::pair<std::string, FileId>> files;
  std::vector<std::string> warnings;

  [[nodiscard]] std::optional<FileId> file_for(std::string_view path) const;
  [[nodiscard]] std::string_view path_of(FileId file) const;
};

/// Loads every manifest entry with a record. Later entries whose blob or
/// module name collides with an earlier one are skipped with a warning.
LoadedSnapshot load_snapshot(const Store& store, std::string_view snapshot_id, bool with_partials);

}  // namespace stackres
