#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gccd/cli.hpp"

using namespace gccd;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run gccd_run(std::vector<std::string> args) {
  args.insert(args.begin(), "gccd");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& p, const std::string& body) { std::ofstream(p, std::ios::binary) << body; }

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("gccd_cli_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

const char* kTwoState = "state B\nstate R\nedge B R up gap=0.5 penalty=1\nedge R B down gap=0.5 penalty=0\n";

}  // namespace

TEST_CASE("synth writes deterministic files") {
  TempDir dir;
  REQUIRE(gccd_run({"synth", "--beats", "3", "--seed", "7", "--noise", "0.05", "--out", dir / "a"}).code == 0);
  REQUIRE(gccd_run({"synth", "--beats", "3", "--seed", "7", "--noise", "0.05", "--out", dir / "b"}).code == 0);
  CHECK(slurp(dir / "a.txt") == slurp(dir / "b.txt"));
  CHECK(slurp(dir / "a.peaks") == slurp(dir / "b.peaks"));
  CHECK(count_lines(slurp(dir / "a.peaks")) == 3);

  const Run zero = gccd_run({"synth", "--beats", "0", "--out", dir / "c"});
  CHECK(zero.code == kExitParse);
  CHECK_FALSE(fs::exists(dir / "c.txt"));

  REQUIRE(gccd_run({"synth", "--out", dir / "d"}).code == 0);
  CHECK(fs::exists(dir / "d.txt"));
  CHECK(fs::exists(dir / "d.peaks"));
}

TEST_CASE("segment") {
  TempDir dir;
  spit(dir / "g.graph", kTwoState);
  spit(dir / "sig.txt", "0\n0\n0\n2\n2\n2\n0\n0\n");

  const Run r = gccd_run({"segment", dir / "sig.txt", "--graph", dir / "g.graph", "--out", dir / "seg.json",
                          "--fitted", dir / "fit.tsv"});
  REQUIRE(r.code == 0);
  const auto doc = nlohmann::json::parse(slurp(dir / "seg.json"));
  REQUIRE(doc["segments"].size() == 3);
  CHECK(doc["segments"][1]["state"] == "R");
  CHECK(doc["segments"][1]["start"] == 4);
  CHECK(doc["segments"][1]["end"] == 6);
  CHECK(doc["changes"].size() == 2);
  CHECK(doc["total_cost"].get<double>() == doctest::Approx(1.0));
  CHECK(count_lines(slurp(dir / "fit.tsv")) == 9);

  const Run text = gccd_run({"segment", dir / "sig.txt", "--graph", dir / "g.graph", "--format", "text"});
  CHECK(text.code == 0);
  CHECK(text.out.find("4\t6\tR\t2") != std::string::npos);

  // Same inputs, byte-identical output.
  REQUIRE(gccd_run({"segment", dir / "sig.txt", "--graph", dir / "g.graph", "--out", dir / "seg2.json"}).code == 0);
  CHECK(slurp(dir / "seg.json") == slurp(dir / "seg2.json"));

  const Run tpl = gccd_run({"segment", dir / "sig.txt", "--template", "R"});
  CHECK(tpl.code == 0);
}

TEST_CASE("segment exit codes") {
  TempDir dir;
  spit(dir / "sig.txt", "0\n1\n");
  spit(dir / "bad.graph", "state B\nstate R\nedge B X up gap=1 penalty=1\n");
  spit(dir / "oneway.graph", "state B\nstate R\nedge B R up gap=5 penalty=1\nstart R\nend B\n");
  spit(dir / "g.graph", kTwoState);

  CHECK(gccd_run({"segment", dir / "sig.txt", "--graph", dir / "missing.graph"}).code == kExitIo);
  CHECK(gccd_run({"segment", dir / "missing.txt", "--graph", dir / "g.graph"}).code == kExitIo);

  const Run bad = gccd_run({"segment", dir / "sig.txt", "--graph", dir / "bad.graph"});
  CHECK(bad.code == kExitParse);
  CHECK(bad.err.find("line 3") != std::string::npos);

  CHECK(gccd_run({"segment", dir / "sig.txt", "--graph", dir / "oneway.graph"}).code == kExitInfeasible);
  CHECK(gccd_run({"segment", dir / "sig.txt"}).code == kExitParse);
  CHECK(gccd_run({"segment", dir / "sig.txt", "--graph", dir / "g.graph", "--template", "R"}).code == kExitParse);
  CHECK(gccd_run({"segment", dir / "sig.txt", "--graph", dir / "g.graph", "--gap", "-1"}).code == kExitParse);
  CHECK(gccd_run({"segment", dir / "sig.txt", "--graph", dir / "g.graph", "--format", "xml"}).code == kExitParse);
  CHECK(gccd_run({"frobnicate"}).code == kExitParse);
  CHECK(gccd_run({"--help"}).code == kExitOk);

  spit(dir / "junk.txt", "1\nx\n");
  const Run junk = gccd_run({"segment", dir / "junk.txt", "--graph", dir / "g.graph"});
  CHECK(junk.code == kExitParse);
  CHECK(junk.err.find("line 2") != std::string::npos);
}

TEST_CASE("detect on noiseless synthetic beats") {
  TempDir dir;
  REQUIRE(gccd_run({"synth", "--beats", "3", "--out", dir / "syn", "--graph-out", dir / "syn.graph"}).code == 0);
  fs::create_directories(dir.path / "det");
  REQUIRE(gccd_run({"detect", dir / "syn.txt", "--graph", dir / "syn.graph", "--out", dir / "det/syn.peaks"}).code == 0);
  CHECK(slurp(dir / "det/syn.peaks") == slurp(dir / "syn.peaks"));
  CHECK(count_lines(slurp(dir / "det/syn.peaks")) == 3);
  CHECK(fs::exists(dir / "det/syn.peaks.segments.json"));

  // Record ids come from file stems, so detections and references must pair up by name.
  const Run ev = gccd_run({"eval", "--detected", dir / "det/syn.peaks", "--reference", dir / "syn.peaks"});
  CHECK(ev.code == 0);
  CHECK(ev.out.find(" 100 ") != std::string::npos);
}

TEST_CASE("detect edge cases") {
  TempDir dir;
  spit(dir / "flat.txt", "0\n0.01\n0\n0.02\n0\n");
  spit(dir / "wide.graph", "state B\nstate R\nedge B R up gap=10 penalty=1\nedge R B down gap=10 penalty=0\n");
  spit(dir / "noR.graph", "state B\nstate Q\nedge B Q down gap=1 penalty=1\nedge Q B up gap=1 penalty=0\n");
  REQUIRE(gccd_run({"detect", dir / "flat.txt", "--graph", dir / "wide.graph", "--out", dir / "flat.peaks"}).code == 0);
  CHECK(slurp(dir / "flat.peaks").empty());
  CHECK(gccd_run({"detect", dir / "flat.txt", "--graph", dir / "noR.graph", "--out", dir / "x.peaks"}).code ==
        kExitParse);
}

TEST_CASE("batch detect with a manifest") {
  TempDir dir;
  fs::create_directories(dir.path / "graphs");
  spit(dir / "graphs/two.graph", kTwoState);
  spit(dir / "manifest.txt", "# record graph\nr1 graphs/two.graph\nr2 graphs/two.graph\n");
  spit(dir / "r1.txt", "0\n0\n2\n2\n0\n0\n");
  spit(dir / "r2.txt", "0\n0\n0\n0\n3\n0\n");
  spit(dir / "r3.txt", "0\n");
  REQUIRE(gccd_run({"detect", dir / "r1.txt", dir / "r2.txt", "--manifest", dir / "manifest.txt", "--out",
                    dir / "out"})
              .code == 0);
  CHECK(slurp(dir / "out/r1.peaks") == "3\n");
  CHECK(slurp(dir / "out/r2.peaks") == "5\n");
  CHECK(fs::exists(dir / "out/r2.peaks.segments.json"));
  CHECK(gccd_run({"detect", dir / "r3.txt", "--manifest", dir / "manifest.txt", "--out", dir / "out"}).code ==
        kExitParse);
}

TEST_CASE("eval reproduces table rows from counts") {
  TempDir dir;
  fs::create_directories(dir.path / "det");
  fs::create_directories(dir.path / "ref");
  auto write = [](std::size_t first, std::size_t count, std::size_t step) {
    std::string s;
    for (std::size_t k = 0; k < count; ++k) s += std::to_string(first + k * step) + "\n";
    return s;
  };
  // 106: 2027 beats, 5 missed. 108: 1765 beats, all found, plus 2 extra detections.
  spit(dir / "ref/106.atr", write(100, 2027, 300));
  spit(dir / "det/106.peaks", write(100, 2022, 300));
  spit(dir / "ref/108.atr", write(100, 1765, 300));
  spit(dir / "det/108.peaks", write(100, 1765, 300) + std::to_string(100 + 1765 * 300) + "\n" +
                                  std::to_string(100 + 1766 * 300) + "\n");

  const Run r = gccd_run({"eval", "--detected", dir / "det/106.peaks", dir / "det/108.peaks", "--reference",
                          dir / "ref/106.atr", dir / "ref/108.atr", "--json-out", dir / "report.json"});
  REQUIRE(r.code == 0);
  std::istringstream lines(r.out);
  std::string line, row106, row108;
  while (std::getline(lines, line)) {
    if (line.rfind("106", 0) == 0) row106 = line;
    if (line.rfind("108", 0) == 0) row108 = line;
  }
  CHECK(row106.find("99.75") != std::string::npos);
  CHECK(row106.find(" 100 ") != std::string::npos);
  CHECK(row106.find("0.24") != std::string::npos);
  CHECK(row108.find(" 100 ") != std::string::npos);
  CHECK(row108.find("99.88") != std::string::npos);
  CHECK(row108.find("0.11") != std::string::npos);

  const auto doc = nlohmann::json::parse(slurp(dir / "report.json"));
  CHECK(doc["records"][0]["fn"] == 5);
  CHECK(doc["records"][1]["fp"] == 2);
  CHECK(doc["total"]["tp"] == 2022 + 1765);

  const Run js = gccd_run({"eval", "--detected", dir / "det/106.peaks", "--reference", dir / "ref/106.atr",
                           "--format", "json"});
  CHECK(nlohmann::json::parse(js.out)["total"]["fn"] == 5);
}

TEST_CASE("eval edge cases") {
  TempDir dir;
  spit(dir / "a.peaks", "10\n400\n800\n");
  spit(dir / "a.atr", "10\n400\n800\n");
  spit(dir / "empty.peaks", "");
  spit(dir / "b.atr", "5\n");
  spit(dir / "bad.peaks", "9\n3\n");

  Run r = gccd_run({"eval", "--detected", dir / "a.peaks", "--reference", dir / "a.atr", "--format", "json"});
  REQUIRE(r.code == 0);
  auto doc = nlohmann::json::parse(r.out);
  CHECK(doc["total"]["sen"] == 100.0);
  CHECK(doc["total"]["ppr"] == 100.0);
  CHECK(doc["total"]["der"] == 0.0);

  spit(dir / "empty.atr", "10\n400\n800\n");
  r = gccd_run({"eval", "--detected", dir / "empty.peaks", "--reference", dir / "empty.atr", "--format", "json"});
  REQUIRE(r.code == 0);
  doc = nlohmann::json::parse(r.out);
  CHECK(doc["total"]["sen"] == 0.0);
  CHECK(doc["total"]["der"] == 100.0);
  CHECK(doc["total"]["ppr"].is_null());

  CHECK(gccd_run({"eval", "--detected", dir / "a.peaks", dir / "a.peaks", "--reference", dir / "a.atr"}).code ==
        kExitParse);
  CHECK(gccd_run({"eval", "--detected", dir / "a.peaks", "--reference", dir / "b.atr"}).code == kExitParse);
  CHECK(gccd_run({"eval", "--detected", dir / "bad.peaks", "--reference", dir / "bad.peaks"}).code == kExitParse);
  CHECK(gccd_run({"eval", "--detected", dir / "nope.peaks", "--reference", dir / "nope.atr"}).code == kExitIo);
}

TEST_CASE("graph subcommands") {
  TempDir dir;
  spit(dir / "g.graph", kTwoState);
  Run r = gccd_run({"graph", "validate", dir / "g.graph"});
  CHECK(r.code == 0);
  CHECK(r.out.find("2 states, 2 edges") != std::string::npos);

  spit(dir / "warn.graph", "state B\nstate R\nstate X\nedge B R up gap=1 penalty=1\nedge R B down gap=1 penalty=0\nstart B\n");
  r = gccd_run({"graph", "validate", dir / "warn.graph"});
  CHECK(r.code == 0);
  CHECK(r.out.find("unreachable") != std::string::npos);

  spit(dir / "bad.graph", "state B\nedge B C up gap=1 penalty=1\n");
  r = gccd_run({"graph", "validate", dir / "bad.graph"});
  CHECK(r.code == kExitParse);
  CHECK(r.err.find("line 2") != std::string::npos);

  r = gccd_run({"graph", "template", "--waves", "PQRST", "--out", dir / "full.graph"});
  CHECK(r.code == 0);
  CHECK(gccd_run({"graph", "validate", dir / "full.graph"}).out.find("8 states, 8 edges") != std::string::npos);
  CHECK(gccd_run({"graph", "template", "--waves", "QS"}).code == kExitParse);
}

TEST_CASE("hidden oracle subcommand") {
  TempDir dir;
  spit(dir / "g.graph", "state B\nstate R\nedge B R up gap=1 penalty=1\nedge R B down gap=1 penalty=1\n");
  spit(dir / "sig.txt", "0\n0\n0\n10\n10\n10\n");
  const Run r = gccd_run({"oracle", dir / "sig.txt", "--graph", dir / "g.graph"});
  REQUIRE(r.code == 0);
  CHECK(nlohmann::json::parse(r.out)["cost"].get<double>() == doctest::Approx(1.0));
}
