#include "stackres/store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <json.hpp>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "stackres/error.hpp"
#include "stackres/graph_io.hpp"
#include "stackres/minilang.hpp"
#include "stackres/partial_io.hpp"

namespace stackres {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::StoreIo, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool valid_id(std::string_view id) {
  return !id.empty() && id != "." && id != ".." && std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || c == '-';
  });
}

}  // namespace

Store::Store(fs::path root, std::string toolchain_version)
    : root_(std::move(root)), toolchain_(std::move(toolchain_version)) {
  std::error_code ec;
  for (const char* sub : {"records", "manifests", "tmp"}) {
    fs::create_directories(root_ / sub, ec);
    if (ec) throw Error(ErrorCode::StoreIo, "cannot create " + (root_ / sub).string() + ": " + ec.message());
  }
}

std::string Store::encode(const FileRecord& record) {
  json body = {
      {"format_version", kRecordFormatVersion},
      {"toolchain_version", record.toolchain_version},
      {"blob", record.blob.hex()},
      {"display_name", record.display_name},
      {"subgraph", record.subgraph},
      {"partials", record.partials},
  };
  body["checksum"] = blob_id(body.dump()).hex();
  return body.dump() + "\n";
}

FileRecord Store::decode(std::string_view bytes) {
  json doc;
  try {
    doc = json::parse(bytes);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::StoreCorrupt, std::string("unparseable record: ") + e.what());
  }
  try {
    const auto checksum = doc.at("checksum").get<std::string>();
    doc.erase("checksum");
    if (blob_id(doc.dump()).hex() != checksum) throw Error(ErrorCode::StoreCorrupt, "record checksum mismatch");
    if (doc.at("format_version").get<int>() != kRecordFormatVersion) {
      throw Error(ErrorCode::StoreCorrupt, "unsupported record format version");
    }
    FileRecord r;
    r.toolchain_version = doc.at("toolchain_version").get<std::string>();
    r.blob = BlobId::from_hex(doc.at("blob").get<std::string>());
    r.display_name = doc.at("display_name").get<std::string>();
    r.subgraph = doc.at("subgraph").get<std::string>();
    r.partials = doc.at("partials").get<std::string>();
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::StoreCorrupt, std::string("malformed record: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::StoreCorrupt) throw;
    throw Error(ErrorCode::StoreCorrupt, e.what());
  }
}

fs::path Store::record_path(const BlobId& blob, std::string_view display_name) const {
  const auto hex = blob.hex();
  const auto context = blob_id(toolchain_ + "\n" + std::string(display_name)).hex().substr(0, 32);
  return root_ / "records" / hex.substr(0, 2) / hex.substr(2, 2) / hex / (context + ".json");
}

std::optional<FileRecord> Store::lookup(const BlobId& blob, std::string_view display_name) const {
  const auto path = record_path(blob, display_name);
  std::error_code ec;
  if (!fs::exists(path, ec)) return std::nullopt;
  auto record = decode(read_file(path));
  if (record.blob != blob || record.display_name != display_name || record.toolchain_version != toolchain_) {
    throw Error(ErrorCode::StoreCorrupt, "record at " + path.string() + " does not match its key");
  }
  return record;
}

void Store::write_atomic(const fs::path& target, std::string_view bytes) {
  static std::atomic<std::uint64_t> counter{0};
  thread_local std::mt19937_64 rng{std::random_device{}()};
  std::ostringstream name;
  name << ::getpid() << '-' << counter.fetch_add(1) << '-' << std::hex << rng() << ".tmp";
  const auto tmp = root_ / "tmp" / name.str();

  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_EXCL, 0644);
  if (fd < 0) throw Error(ErrorCode::StoreIo, "cannot create " + tmp.string());
  std::size_t written = 0;
  while (written < bytes.size()) {
    const auto n = ::write(fd, bytes.data() + written, bytes.size() - written);
    if (n <= 0) {
      ::close(fd);
      fs::remove(tmp);
      throw Error(ErrorCode::StoreIo, "short write to " + tmp.string());
    }
    written += static_cast<std::size_t>(n);
  }
  ::fsync(fd);
  ::close(fd);

  std::error_code ec;
  fs::create_directories(target.parent_path(), ec);
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error(ErrorCode::StoreIo, "cannot rename into " + target.string() + ": " + ec.message());
  }
}

void Store::put(const FileRecord& record) {
  if (record.toolchain_version != toolchain_) {
    throw Error(ErrorCode::StoreIo, "record toolchain '" + record.toolchain_version + "' does not match store '" +
                                        toolchain_ + "'");
  }
  {
    StackGraph scratch;
    const auto file = load_file(scratch, record.subgraph);
    const auto& info = scratch.file(file);
    if (info.blob != record.blob || info.display_name != record.display_name) {
      throw Error(ErrorCode::Deserialize, "subgraph does not belong to this record");
    }
    (void)load_partials(scratch, file, record.partials);
  }

  const auto bytes = encode(record);
  const auto path = record_path(record.blob, record.display_name);
  std::error_code ec;
  if (fs::exists(path, ec)) {
    if (read_file(path) == bytes) return;
    throw Error(ErrorCode::ConflictingRecord, "different record already stored for blob " + record.blob.hex() +
                                                  " (" + record.display_name + ")");
  }
  write_atomic(path, bytes);
}

void Store::put_manifest(const SnapshotManifest& manifest) {
  if (!valid_id(manifest.snapshot_id)) {
    throw Error(ErrorCode::StoreIo, "snapshot ids may only use letters, digits, '.', '_' and '-'");
  }
  json entries = json::array();
  std::set<std::string> seen;
  for (const auto& [path, blob] : manifest.entries) {
    if (!seen.insert(path).second) throw Error(ErrorCode::StoreIo, "duplicate manifest path " + path);
    entries.push_back({path, blob.hex()});
  }
  const json doc = {{"snapshot_id", manifest.snapshot_id}, {"entries", std::move(entries)}};
  write_atomic(root_ / "manifests" / (manifest.snapshot_id + ".json"), doc.dump() + "\n");
}

std::optional<SnapshotManifest> Store::manifest(std::string_view snapshot_id) const {
  if (!valid_id(snapshot_id)) return std::nullopt;
  const auto path = root_ / "manifests" / (std::string(snapshot_id) + ".json");
  std::error_code ec;
  if (!fs::exists(path, ec)) return std::nullopt;
  try {
    const auto doc = json::parse(read_file(path));
    SnapshotManifest m;
    m.snapshot_id = doc.at("snapshot_id").get<std::string>();
    for (const auto& e : doc.at("entries")) {
      m.entries.emplace_back(e.at(0).get<std::string>(), BlobId::from_hex(e.at(1).get<std::string>()));
    }
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::StoreCorrupt, std::string("malformed manifest: ") + e.what());
  }
}

StoreStats Store::stats() const {
  StoreStats s;
  std::vector<fs::path> paths;
  for (const auto& entry : fs::recursive_directory_iterator(root_ / "records")) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") paths.push_back(entry.path());
  }
  std::sort(paths.begin(), paths.end());
  for (const auto& path : paths) {
    const auto bytes = read_file(path);
    const auto record = decode(bytes);
    try {
      s.total_nodes += json::parse(record.subgraph).at("nodes").size();
      s.total_partials += json::parse(record.partials).at("partials").size();
    } catch (const json::exception& e) {
      throw Error(ErrorCode::StoreCorrupt, e.what());
    }
    ++s.records;
    s.bytes += bytes.size();
  }
  return s;
}

// ---------------------------------------------------------------------------

std::string IndexReport::to_json() const {
  json errs = json::array();
  for (const auto& e : errors) errs.push_back({{"path", e.path}, {"message", e.message}});
  const json doc = {
      {"snapshot_id", snapshot_id}, {"hits", hits},         {"misses", misses}, {"errors", std::move(errs)},
      {"nodes", nodes},             {"partials", partials}, {"millis", millis},
  };
  return doc.dump();
}

FileRecord build_record(const SourceFile& file, const std::string& toolchain_version, const SearchLimits& limits) {
  const auto module = minilang::parse(file.content, file.path);
  StackGraph graph;
  const auto id = graph.add_file(file.path, blob_id(file.content));
  minilang::build_graph(module, graph, id);
  graph.seal(id);
  const auto partials = compute_file_partials(graph, id, limits);

  FileRecord r;
  r.blob = graph.file(id).blob;
  r.display_name = file.path;
  r.subgraph = serialize_file(graph, id);
  r.partials = serialize_partials(graph, id, partials);
  r.toolchain_version = toolchain_version;
  return r;
}

IndexReport index_snapshot(Store& store, std::string snapshot_id, std::vector<SourceFile> files, unsigned jobs,
                           const SearchLimits& limits) {
  const auto started = std::chrono::steady_clock::now();
  std::sort(files.begin(), files.end(), [](const SourceFile& a, const SourceFile& b) { return a.path < b.path; });
  for (std::size_t i = 1; i < files.size(); ++i) {
    if (files[i].path == files[i - 1].path) throw Error(ErrorCode::StoreIo, "duplicate path " + files[i].path);
  }

  struct Outcome {
    BlobId blob;
    bool hit = false;
    std::size_t nodes = 0;
    std::size_t partials = 0;
    std::optional<std::string> error;
  };
  std::vector<Outcome> outcomes(files.size());

  std::atomic<std::size_t> next{0};
  std::mutex store_error_mutex;
  std::exception_ptr store_error;
  auto work = [&] {
    for (std::size_t i = next.fetch_add(1); i < files.size(); i = next.fetch_add(1)) {
      auto& out = outcomes[i];
      try {
        out.blob = blob_id(files[i].content);
        if (store.lookup(out.blob, files[i].path)) {
          out.hit = true;
          continue;
        }
        FileRecord record;
        try {
          record = build_record(files[i], store.toolchain_version(), limits);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::SyntaxError) throw;
          out.error = e.what();
          continue;
        }
        out.nodes = json::parse(record.subgraph).at("nodes").size();
        out.partials = json::parse(record.partials).at("partials").size();
        store.put(record);
      } catch (...) {
        std::lock_guard lock(store_error_mutex);
        if (!store_error) store_error = std::current_exception();
      }
    }
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(files.size())));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (store_error) std::rethrow_exception(store_error);

  IndexReport report;
  report.snapshot_id = snapshot_id;
  SnapshotManifest manifest;
  manifest.snapshot_id = std::move(snapshot_id);
  std::map<std::string, std::string> module_owner;
  for (std::size_t i = 0; i < files.size(); ++i) {
    const auto& o = outcomes[i];
    manifest.entries.emplace_back(files[i].path, o.blob);
    if (o.error) {
      report.errors.push_back({files[i].path, *o.error});
      continue;
    }
    o.hit ? ++report.hits : ++report.misses;
    report.nodes += o.nodes;
    report.partials += o.partials;
    const auto module = minilang::module_name(files[i].path);
    auto [it, fresh] = module_owner.emplace(module, files[i].path);
    if (!fresh) {
      report.warnings.push_back("module '" + module + "' of " + files[i].path + " is shadowed by " + it->second);
    }
  }
  store.put_manifest(manifest);
  report.millis = static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started).count());
  return report;
}

std::optional<FileId> LoadedSnapshot::file_for(std::string_view path) const {
  for (const auto& [p, id] : files) {
    if (p == path) return id;
  }
  return std::nullopt;
}

std::string_view LoadedSnapshot::path_of(FileId file) const {
  for (const auto& [p, id] : files) {
    if (id == file) return p;
  }
  return {};
}

LoadedSnapshot load_snapshot(const Store& store, std::string_view snapshot_id, bool with_partials) {
  const auto manifest = store.manifest(snapshot_id);
  if (!manifest) throw Error(ErrorCode::StoreIo, "unknown snapshot '" + std::string(snapshot_id) + "'");

  LoadedSnapshot out;
  out.graph = std::make_unique<StackGraph>();
  std::vector<std::pair<FileId, FileRecord>> loaded;
  std::map<std::string, std::string> module_owner;
  for (const auto& [path, blob] : manifest->entries) {
    auto record = store.lookup(blob, path);
    if (!record) {
      out.warnings.push_back(path + " has no record (frontend error at index time)");
      continue;
    }
    const auto module = minilang::module_name(path);
    if (auto it = module_owner.find(module); it != module_owner.end()) {
      out.warnings.push_back("skipping " + path + ": module '" + module + "' already provided by " + it->second);
      continue;
    }
    if (auto other = out.graph->find_file(blob)) {
      out.warnings.push_back("skipping " + path + ": same content as " + std::string(out.path_of(*other)));
      continue;
    }
    module_owner.emplace(module, path);
    const auto file = load_file(*out.graph, record->subgraph);
    out.files.emplace_back(path, file);
    loaded.emplace_back(file, std::move(*record));
  }
  if (with_partials) {
    out.partials = std::make_unique<PartialIndex>(*out.graph);
    for (auto& [file, record] : loaded) out.partials->add(file, load_partials(*out.graph, file, record.partials));
  }
  return out;
}

}  // namespace stackres
