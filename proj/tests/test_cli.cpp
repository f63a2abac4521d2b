#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <json.hpp>
#include <sstream>

#include "stackres/cli.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Workspace {
  fs::path root;
  fs::path src;
  fs::path store;

  Workspace() {
    static int n = 0;
    root = fs::temp_directory_path() / ("stackres-cli-" + std::to_string(::getpid()) + "-" + std::to_string(n++));
    fs::remove_all(root);
    src = root / "src";
    store = root / "store";
    fs::create_directories(src);
    for (const char* name : {"a.py", "b.py"}) fs::copy_file(testing::data_dir() / "sample" / name, src / name);
  }
  ~Workspace() { fs::remove_all(root); }

  struct Result {
    int code;
    std::string out;
    std::string err;
  };

  Result run(std::vector<std::string> args) const {
    args.insert(args.begin(), {"stackres", "--store", store.string()});
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out;
    std::ostringstream err;
    const int code = stackres::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
  }

  json run_json(std::vector<std::string> args, int expected_code = 0) const {
    const auto r = run(std::move(args));
    INFO(r.err);
    CHECK(r.code == expected_code);
    return json::parse(r.out);
  }
};

}  // namespace

TEST_CASE("index reports misses then hits") {
  Workspace w;
  auto first = w.run_json({"index", w.src.string(), "--snapshot", "c1"});
  CHECK(first["misses"] == 2);
  CHECK(first["hits"] == 0);
  CHECK(first["snapshot_id"] == "c1");
  auto second = w.run_json({"index", w.src.string(), "--snapshot", "c1"});
  CHECK(second["misses"] == 0);
  CHECK(second["hits"] == 2);

  std::ofstream(w.src / "b.py", std::ios::app) << "print(B.x)\n";
  auto third = w.run_json({"index", w.src.string(), "--snapshot", "c2"});
  CHECK(third["misses"] == 1);
  CHECK(third["hits"] == 1);
}

TEST_CASE("indexing an empty directory succeeds") {
  Workspace w;
  const auto empty = w.root / "empty";
  fs::create_directories(empty);
  auto report = w.run_json({"index", empty.string()});
  CHECK(report["hits"] == 0);
  CHECK(report["misses"] == 0);
}

TEST_CASE("frontend errors give exit code 1 with the report") {
  Workspace w;
  std::ofstream(w.src / "bad.py") << "class :\n";
  const auto r = w.run({"index", w.src.string()});
  CHECK(r.code == stackres::cli::kFrontendErrors);
  const auto report = json::parse(r.out);
  CHECK(report["misses"] == 2);
  CHECK(report["errors"].size() == 1);
  CHECK(r.err.find("bad.py") != std::string::npos);
}

TEST_CASE("queries resolve the sample references in both modes") {
  Workspace w;
  w.run_json({"index", w.src.string()});
  const std::vector<std::tuple<std::string, std::string, int, int, std::string>> cases = {
      {"b.py:7:11", "a.py", 2, 5, "x"}, {"b.py:6:9", "a.py", 2, 5, "x"}, {"b.py:3:9", "a.py", 1, 7, "A"},
      {"b.py:6:7", "b.py", 3, 7, "B"},  {"b.py:7:7", "b.py", 3, 7, "B"}, {"b.py:1:6", "a.py", 1, 1, "a"},
  };
  for (const auto& [target, path, line, column, symbol] : cases) {
    INFO(target);
    const auto partial = w.run({"query", target});
    const auto direct = w.run({"query", target, "--mode", "direct"});
    CHECK(partial.code == 0);
    CHECK(partial.out == direct.out);
    const auto doc = json::parse(partial.out);
    CHECK(doc["limit_exceeded"] == false);
    REQUIRE(doc["definitions"].size() == 1);
    const auto& d = doc["definitions"][0];
    CHECK(d["path"] == path);
    CHECK(d["line"] == line);
    CHECK(d["column"] == column);
    CHECK(d["symbol"] == symbol);
  }
}

TEST_CASE("bad targets give exit code 3") {
  Workspace w;
  w.run_json({"index", w.src.string()});
  CHECK(w.run({"query", "b.py:2:1"}).code == stackres::cli::kNoReference);
  CHECK(w.run({"query", "missing.py:1:1"}).code == stackres::cli::kNoReference);
  CHECK(w.run({"query", "a.py:1:7"}).code == stackres::cli::kNoReference);  // a definition, not a reference
  CHECK(w.run({"trace", "b.py:2:1"}).code == stackres::cli::kNoReference);
  CHECK(w.run({"query", "nonsense"}).code == stackres::cli::kNoReference);
  CHECK(w.run({"query", "b.py:0:1"}).code == stackres::cli::kNoReference);
  CHECK(w.run({"query"}).code == stackres::cli::kUsage);
}

TEST_CASE("unresolvable references are an empty success") {
  Workspace w;
  std::ofstream(w.src / "b.py", std::ios::app) << "y\n";
  w.run_json({"index", w.src.string()});
  const auto doc = w.run_json({"query", "b.py:8:1"});
  CHECK(doc["definitions"].empty());
  const auto t = w.run({"trace", "b.py:8:1"});
  CHECK(t.code == 0);
  CHECK(t.out == "no complete paths\n");
}

TEST_CASE("trace prints one numbered row per state") {
  Workspace w;
  w.run_json({"index", w.src.string()});
  const auto r = w.run({"trace", "b.py:7:11"});
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  CHECK(line == "path 1");
  std::vector<std::string> rows;
  while (std::getline(in, line) && !line.empty()) rows.push_back(line);
  // The shortest path has 25 edges.
  REQUIRE(rows.size() == 26);
  CHECK(rows.front().find("⟨x⟩") != std::string::npos);
  CHECK(rows[4].find("⟨B () . x⟩") != std::string::npos);
  CHECK(rows[17].find("root of b.py\t⟨a . A . x⟩") != std::string::npos);
  CHECK(rows.back().find("pop x @ a.py:2:5 [def]\t⟨⟩") != std::string::npos);
  CHECK(rows.back().starts_with("  26\t"));
}

TEST_CASE("stats summarize the store and are unaffected by queries") {
  Workspace w;
  auto cold = w.run_json({"stats"});
  CHECK(cold["records"] == 0);
  CHECK(cold["total_nodes"] == 0);
  CHECK(cold["bytes"] == 0);

  w.run_json({"index", w.src.string()});
  const auto before = w.run({"stats"});
  const auto doc = json::parse(before.out);
  CHECK(doc["records"] == 2);
  CHECK(doc["total_nodes"] == 38);
  w.run({"query", "b.py:7:11"});
  w.run({"trace", "b.py:7:11"});
  CHECK(w.run({"stats"}).out == before.out);
}

TEST_CASE("the store location defaults to the environment") {
  Workspace w;
  ::setenv("STACKRES_STORE", w.store.string().c_str(), 1);
  std::vector<const char*> argv = {"stackres", "stats"};
  std::ostringstream out;
  std::ostringstream err;
  w.run_json({"index", w.src.string()});
  CHECK(stackres::cli::run(2, argv.data(), out, err) == 0);
  CHECK(json::parse(out.str())["records"] == 2);
  ::unsetenv("STACKRES_STORE");
}

TEST_CASE("a corrupt store gives exit code 2") {
  Workspace w;
  w.run_json({"index", w.src.string()});
  for (const auto& e : fs::recursive_directory_iterator(w.store / "records")) {
    if (e.is_regular_file()) std::ofstream(e.path(), std::ios::trunc) << "{";
  }
  CHECK(w.run({"stats"}).code == stackres::cli::kStoreError);
  CHECK(w.run({"query", "b.py:7:11"}).code == stackres::cli::kStoreError);
}
