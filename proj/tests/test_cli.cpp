#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "extremo/cli.hpp"
#include "extremo/error.hpp"

namespace fs = std::filesystem;
using namespace extremo;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("extremo-cli-" + std::to_string(std::hash<std::string>{}(Catch::getResultCapture().getCurrentTestName())));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("theory command reports the MMA example") {
  const Result r = run({"theory", "--model", "mma", "--phi", "0.5", "--lags", "1", "--format", "json"});
  REQUIRE(r.code == cli::kExitOk);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["command"] == "theory");
  CHECK(j["config_hash"].get<std::string>().size() == 16);
  CHECK(j["config"]["R"] == "40");
  CHECK(std::abs(j["result"][0]["rho_true"].get<double>() - 2.0 / 3.0) < 1e-10);
  CHECK(std::abs(j["result"][0]["theta"].get<double>() - 4.0 / 3.0) < 1e-10);
}

TEST_CASE("configuration errors exit with code 2 and name the field") {
  const Result missing = run({"theory", "--model", "mma"});
  CHECK(missing.code == cli::kExitConfig);
  CHECK(nlohmann::json::parse(missing.err)["field"] == "phi");

  const Result format = run({"theory", "--model", "iid", "--format", "xml"});
  CHECK(format.code == cli::kExitConfig);
  CHECK(nlohmann::json::parse(format.err)["field"] == "format");

  const Result unknown = run({"theory", "--bogus", "1"});
  CHECK(unknown.code == cli::kExitConfig);
  CHECK(run({"nonsense"}).code == cli::kExitConfig);
  CHECK(run({"theory", "--model", "mma", "--phi", "1.5"}).code == cli::kExitConfig);
  CHECK(run({"estimate", "--input", "/nonexistent/field.bin", "--m", "5"}).code == cli::kExitConfig);
  CHECK_THROWS_AS(cli::parse_config_text("bogus = 1\n"), ConfigError);
  CHECK_THROWS_AS(cli::parse_config_text("model iid\n"), ConfigError);
  CHECK(cli::parse_config_text("# comment\n--model = iid # trailing\n\n").at("model") == "iid");
}

TEST_CASE("runtime failures exit with code 3") {
  const Result r = run({"clt", "--model", "br", "--theta", "2", "--br-stopping", "quantile",
                        "--max-points", "10", "--n", "30", "--m", "5", "--r", "1", "--lags", "1",
                        "--reps", "4"});
  CHECK(r.code == cli::kExitRuntime);
  const auto j = nlohmann::json::parse(r.err);
  CHECK(j["error"] == "runtime");
  CHECK(j["replicate"] == 0);
}

TEST_CASE("clt command on independent sites") {
  const Result r = run({"clt", "--model", "iid", "--n", "400", "--d", "1", "--lags", "1",
                        "--reps", "20", "--seed", "4"});
  REQUIRE(r.code == cli::kExitOk);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["result"]["plan"]["clt_window"] == true);
  CHECK(j["result"]["plan"]["m"] == 11);
  CHECK(j["result"]["replicates"]["requested"] == 20);
}

TEST_CASE("every command is byte-for-byte reproducible") {
  TempDir dir;
  const std::vector<std::vector<std::string>> commands = {
      {"simulate", "--model", "mma", "--phi", "0.5", "--n", "30", "--d", "2", "--seed", "3"},
      {"simulate", "--model", "br", "--n", "12", "--d", "2", "--seed", "3", "--format", "csv"},
      {"theory", "--model", "br", "--theta", "1", "--alpha", "1.5", "--d", "2", "--gamma", "2"},
      {"estimate", "--model", "mma", "--phi", "0.5", "--n", "200", "--m", "10", "--seed", "1"},
      {"clt", "--model", "iid", "--n", "400", "--lags", "1..2", "--reps", "12", "--seed", "9",
       "--jobs", "2"},
      {"bias", "--model", "mma", "--phi", "0.5", "--lags", "1", "--format", "json"},
  };
  int k = 0;
  for (const auto& base : commands) {
    std::string first;
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path out = dir.path / ("out" + std::to_string(k) + "_" + std::to_string(rep));
      std::vector<std::string> args = base;
      args.insert(args.end(), {"--out", out.string()});
      const Result r = run(args);
      REQUIRE(r.code == cli::kExitOk);
      CHECK(r.out.empty());
      CHECK(fs::exists(out.string() + ".log"));
      const std::string bytes = slurp(out);
      CHECK_FALSE(bytes.empty());
      if (rep == 0) first = bytes;
      else CHECK(bytes == first);
    }
    ++k;
  }
  for (const auto& entry : fs::directory_iterator(dir.path))
    CHECK(entry.path().filename().string().find("tmp") == std::string::npos);
}

TEST_CASE("config files are overridden by flags and hash the resolved values") {
  TempDir dir;
  const fs::path config = dir.path / "run.cfg";
  std::ofstream(config) << "model = mma\nphi = 0.3\nlags = 1\n";
  const Result from_file = run({"theory", "--config", config.string()});
  REQUIRE(from_file.code == cli::kExitOk);
  const Result flags = run({"theory", "--model", "mma", "--phi", "0.3", "--lags", "1"});
  CHECK(from_file.out == flags.out);
  const Result overridden = run({"theory", "--config", config.string(), "--phi", "0.7"});
  REQUIRE(overridden.code == cli::kExitOk);
  CHECK(overridden.out.find("# phi=0.69999999999999996") != std::string::npos);
  CHECK(overridden.out != from_file.out);

  // Output location and worker count do not change the hash.
  const Result jobs = run({"theory", "--config", config.string(), "--jobs", "3"});
  CHECK(jobs.out == from_file.out);
}

TEST_CASE("estimate reads fields written by simulate") {
  TempDir dir;
  const fs::path field = dir.path / "field.bin";
  REQUIRE(run({"simulate", "--model", "mma", "--phi", "0.5", "--n", "300", "--seed", "2", "--out",
               field.string()})
              .code == cli::kExitOk);
  const Result from_file = run({"estimate", "--input", field.string(), "--m", "10", "--lags", "1..3",
                                "--format", "json"});
  REQUIRE(from_file.code == cli::kExitOk);
  const Result inline_sim = run({"estimate", "--model", "mma", "--phi", "0.5", "--n", "300", "--seed",
                                 "2", "--m", "10", "--lags", "1..3", "--format", "json"});
  REQUIRE(inline_sim.code == cli::kExitOk);
  CHECK(nlohmann::json::parse(from_file.out)["result"] == nlohmann::json::parse(inline_sim.out)["result"]);
}

#ifdef EXTREMO_CLI
TEST_CASE("the executable matches the in-process entry point") {
  TempDir dir;
  const fs::path out = dir.path / "theory.csv";
  const std::string command = std::string(EXTREMO_CLI) +
                              " theory --model mma --phi 0.5 --lags 1..2 --out " + out.string();
  REQUIRE(std::system(command.c_str()) == 0);
  const Result r = run({"theory", "--model", "mma", "--phi", "0.5", "--lags", "1..2"});
  CHECK(slurp(out) == r.out);
  const std::string failing = std::string(EXTREMO_CLI) + " theory --model mma 2>/dev/null";
  const int status = std::system(failing.c_str());
  CHECK(WEXITSTATUS(status) == cli::kExitConfig);
}
#endif
