// End-to-end tests of the requant binary. REQUANT_CLI_BIN is injected by the
// build with the path of the freshly built executable.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "requant/model_io.hpp"
#include "requant/tensor.hpp"
#include "support/oracles.hpp"

using namespace requant;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

RunResult run_cli(const std::string& args) {
  static int counter = 0;
  const fs::path err_file = fs::temp_directory_path() /
                            ("requant-cli-err-" + std::to_string(::getpid()) + "-" +
                             std::to_string(counter++) + ".txt");
  const std::string cmd =
      std::string(REQUANT_CLI_BIN) + " " + args + " 2>" + err_file.string();
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[4096];
  size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, got);
  const int status = ::pclose(pipe);
  RunResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.out = std::move(out);
  std::ifstream err(err_file);
  result.err.assign(std::istreambuf_iterator<char>(err), std::istreambuf_iterator<char>());
  std::error_code ec;
  fs::remove(err_file, ec);
  return result;
}

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("requant-cli-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

fs::path write_fixture_model(const fs::path& dir) {
  std::vector<WeightTensor> tensors;
  tensors.push_back(oracles::make_tensor("conv1", oracles::gaussian_values(1, 512, 0.05)));
  tensors.push_back(
      oracles::make_tensor("layer1.0.conv1", oracles::gaussian_values(2, 2304, 0.02)));
  tensors.push_back(oracles::make_tensor("fc", oracles::gaussian_values(3, 640, 0.04)));
  save_model(dir, tensors);
  return dir / "manifest.json";
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) lines.push_back(line);
  return lines;
}

}  // namespace

TEST_CASE("quantize happy path emits a three-row report") {
  TempDir dir;
  const fs::path manifest = write_fixture_model(dir.path / "model");
  const fs::path out = dir.path / "out";
  auto r = run_cli("quantize --manifest " + manifest.string() + " --bits 8 --strategy requant" +
                   " --out " + out.string() + " --emit codes,fake,report");
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(out / "report.json"));
  CHECK(fs::exists(out / "report.csv"));
  CHECK(fs::exists(out / "codes" / "manifest.json"));
  CHECK(fs::exists(out / "fake" / "manifest.json"));

  const json report = json::parse(slurp(out / "report.json"));
  REQUIRE(report.at("layers").size() == 3);
  for (const auto& row : report.at("layers"))
    CHECK(row.at("strategy").get<std::string>() == "reshape-clip");
  CHECK(report.at("config").at("strategy").get<std::string>() == "reshape-clip");
}

TEST_CASE("emitting only the report skips codes and fake outputs") {
  TempDir dir;
  const fs::path manifest = write_fixture_model(dir.path / "model");
  const fs::path out = dir.path / "out";
  auto r = run_cli("quantize --manifest " + manifest.string() + " --out " + out.string() +
                   " --emit report");
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(out / "report.json"));
  CHECK(fs::exists(out / "report.csv"));
  CHECK(!fs::exists(out / "codes"));
  CHECK(!fs::exists(out / "fake"));
}

TEST_CASE("bit-width outside [2,16] is a usage error") {
  TempDir dir;
  const fs::path manifest = write_fixture_model(dir.path / "model");
  auto r = run_cli("quantize --manifest " + manifest.string() + " --bits 1 --out " +
                   (dir.path / "out").string());
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("[2 - 16]") != std::string::npos);
}

TEST_CASE("unknown flags and unreadable manifests exit 2 with an error line") {
  TempDir dir;
  auto r = run_cli("quantize --bogus 1");
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("\"error\"") != std::string::npos);

  auto r2 = run_cli("quantize --manifest " + (dir.path / "missing.json").string() + " --out " +
                    (dir.path / "out").string());
  CHECK(r2.exit_code == 2);
  const auto err_lines = lines_of(r2.err);
  REQUIRE(!err_lines.empty());
  const json parsed = json::parse(err_lines.back());
  CHECK(parsed.at("error").get<std::string>() == "manifest");
}

TEST_CASE("a missing tensor payload is a processing failure, exit 1") {
  TempDir dir;
  const fs::path manifest = write_fixture_model(dir.path / "model");
  fs::remove(dir.path / "model" / "conv1.bin");
  auto r = run_cli("quantize --manifest " + manifest.string() + " --out " +
                   (dir.path / "out").string());
  CHECK(r.exit_code == 1);
  const auto err_lines = lines_of(r.err);
  REQUIRE(!err_lines.empty());
  const json parsed = json::parse(err_lines.back());
  CHECK(parsed.at("error").get<std::string>() == "missing-file");
  CHECK(parsed.at("subject").get<std::string>() == "conv1");
}

TEST_CASE("compare-searches emits the five-column table") {
  TempDir dir;
  const fs::path manifest = write_fixture_model(dir.path / "model");
  auto r = run_cli("compare-searches --manifest " + manifest.string() +
                   " --layer layer1.0.conv1 --bits 8");
  CHECK(r.exit_code == 0);
  const auto rows = lines_of(r.out);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == "layer,method,alpha,loss,time_ms");
  CHECK(rows[1].rfind("layer1.0.conv1,golden,", 0) == 0);
  CHECK(rows[2].rfind("layer1.0.conv1,bisection,", 0) == 0);
  CHECK(rows[3].rfind("layer1.0.conv1,nelder-mead,", 0) == 0);

  auto missing = run_cli("compare-searches --manifest " + manifest.string() +
                         " --layer nope --bits 8");
  CHECK(missing.exit_code == 1);
}

TEST_CASE("two identical runs produce byte-identical codes") {
  TempDir dir;
  const fs::path manifest = write_fixture_model(dir.path / "model");
  const std::string flags = " --bits 4 --strategy clip --epsilon 1e-4 --alpha-min 1e-3";
  auto r1 = run_cli("quantize --manifest " + manifest.string() + flags + " --out " +
                    (dir.path / "out1").string());
  auto r2 = run_cli("quantize --manifest " + manifest.string() + flags + " --out " +
                    (dir.path / "out2").string());
  REQUIRE(r1.exit_code == 0);
  REQUIRE(r2.exit_code == 0);
  for (const char* name : {"conv1", "layer1.0.conv1", "fc"}) {
    const std::string f = std::string(name) + ".codes.bin";
    CHECK(slurp(dir.path / "out1" / "codes" / f) == slurp(dir.path / "out2" / "codes" / f));
  }
  // reports agree except for wall time
  const json a = json::parse(slurp(dir.path / "out1" / "report.json"));
  const json b = json::parse(slurp(dir.path / "out2" / "report.json"));
  for (size_t i = 0; i < 3; ++i) {
    CHECK(a.at("layers").at(i).at("alpha") == b.at("layers").at(i).at("alpha"));
    CHECK(a.at("layers").at(i).at("loss") == b.at("layers").at(i).at("loss"));
    CHECK(a.at("layers").at(i).at("evals") == b.at("layers").at(i).at("evals"));
  }
}

TEST_CASE("report subcommand re-renders the stored document") {
  TempDir dir;
  const fs::path manifest = write_fixture_model(dir.path / "model");
  const fs::path out = dir.path / "out";
  REQUIRE(run_cli("quantize --manifest " + manifest.string() + " --out " + out.string())
              .exit_code == 0);

  auto csv = run_cli("report --in " + (out / "report.json").string() + " --format csv");
  CHECK(csv.exit_code == 0);
  CHECK(csv.out == slurp(out / "report.csv"));

  auto js = run_cli("report --in " + (out / "report.json").string() + " --format json");
  CHECK(js.exit_code == 0);
  CHECK(js.out == slurp(out / "report.json"));

  auto bad = run_cli("report --in " + (out / "nope.json").string() + " --format csv");
  CHECK(bad.exit_code == 2);
}

TEST_CASE("strategy flags map onto the canonical names") {
  TempDir dir;
  const fs::path manifest = write_fixture_model(dir.path / "model");
  const std::pair<const char*, const char*> mapping[] = {
      {"full", "uniform-full"},
      {"clip", "uniform-clip"},
      {"reshape", "reshape-full"},
      {"requant", "reshape-clip"},
  };
  int index = 0;
  for (const auto& [flag, canonical] : mapping) {
    const fs::path out = dir.path / ("out-" + std::to_string(index++));
    auto r = run_cli("quantize --manifest " + manifest.string() + " --strategy " + flag +
                     " --out " + out.string());
    REQUIRE(r.exit_code == 0);
    const json report = json::parse(slurp(out / "report.json"));
    CHECK(report.at("config").at("strategy").get<std::string>() == canonical);
  }
}
