#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include <json.hpp>

#include "catch_amalgamated.hpp"
#include "jwdiscord/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int status;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "jwdiscord");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int status = jwd::cli::main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
  return {status, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  for (std::string line; std::getline(is, line);) out.push_back(line);
  return out;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("jwdiscord_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

bool single_json_error_line(const std::string& err) {
  const auto ls = lines(err);
  if (ls.size() != 1) return false;
  const json j = json::parse(ls[0]);
  return j.contains("error") && j.contains("message");
}

}  // namespace

TEST_CASE("spectrum CSV") {
  const Result r = run({"spectrum", "--n", "3"});
  REQUIRE(r.status == 0);
  const auto ls = lines(r.out);
  REQUIRE(ls.size() == 5);
  CHECK(std::regex_match(ls[0], std::regex(R"(# jwdiscord \S+ config_hash=[0-9a-f]{16} seed=\d+)")));
  CHECK(ls[1] == "n,k,energy");
  CHECK(ls[2] == "1,0.785398163397,0.707106781187");
  CHECK(ls[3].rfind("2,1.57079632679,", 0) == 0);
}

TEST_CASE("discord-matrix writes CSV and metadata sidecar") {
  const fs::path dir = scratch_dir("matrix");
  const fs::path out = dir / "q.csv";
  const Result r = run({"discord-matrix", "--n", "11", "--j0", "6", "--out", out.string()});
  REQUIRE(r.status == 0);
  const auto ls = lines(slurp(out));
  REQUIRE(ls.size() == 2 + 121);
  CHECK(ls[1] == "n,m,Q");
  CHECK(ls[2] == "1,1,0");
  const json meta = json::parse(slurp(dir / "q.csv.meta.json"));
  CHECK(meta["config"]["j0"] == 6);
  CHECK(meta["config"]["n"] == 11);
  CHECK(meta["results"]["rule"] == "middle-node-odd");
  CHECK(meta["results"]["z_max"].get<double>() < 1e-10);
  CHECK(ls[0].find(meta["config_hash"].get<std::string>()) != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "q.csv.tmp"));
}

TEST_CASE("sweep-b CSV reports the crossing") {
  const fs::path dir = scratch_dir("sweepb");
  const Result r = run({"sweep-b", "--n", "11", "--j0", "6", "--b-max", "1.5", "--points", "7", "--out",
                        (dir / "s.csv").string()});
  REQUIRE(r.status == 0);
  const auto ls = lines(slurp(dir / "s.csv"));
  REQUIRE(ls.size() == 9);
  CHECK(ls[1] == "b,cl_max,cl_min,z_max,z_min");
  CHECK(ls[2].rfind("0,", 0) == 0);
  CHECK(ls[8].rfind("1.5,", 0) == 0);
  const json meta = json::parse(slurp(dir / "s.csv.meta.json"));
  REQUIRE(meta["results"]["b_cl"].is_number());
  CHECK(meta["results"]["b_cl"].get<double>() > 0.0);
  CHECK(meta["results"]["b_cl"].get<double>() < 1.5);
  CHECK(r.err.find("b_cl") != std::string::npos);
}

TEST_CASE("sweep-noise CSV and JSON") {
  const Result csv = run({"sweep-noise", "--n", "11", "--j0", "6", "--eps", "0,0.2", "--n-real", "2", "--order", "1,2"});
  REQUIRE(csv.status == 0);
  const auto ls = lines(csv.out);
  REQUIRE(ls.size() == 6);
  CHECK(ls[1] == "epsilon,order,cl_max,cl_min,z_max,z_min,n_realizations");
  CHECK(std::regex_match(ls[2], std::regex(R"(0,1,[^,]+,[^,]+,0,0,2)")));
  CHECK(ls[5].rfind("0.2,2,", 0) == 0);

  const Result js = run({"sweep-noise", "--n", "11", "--j0", "6", "--eps", "0,0.2", "--n-real", "2", "--order", "1,2",
                         "--format", "json"});
  REQUIRE(js.status == 0);
  const json j = json::parse(js.out);
  CHECK(j["rows"].size() == 4);
  CHECK(j["columns"][0] == "epsilon");
  CHECK(j["rows"][3]["order"] == 2);
  CHECK(j["rows"][3]["n_realizations"] == 2);
}

TEST_CASE("outputs are byte-identical across runs and thread counts") {
  const std::vector<std::string> base{"sweep-noise", "--n", "11", "--j0", "6", "--eps", "0.3", "--n-real", "4",
                                      "--order", "2", "--seed", "17"};
  auto with_threads = [&](const char* t) {
    auto args = base;
    args.push_back("--threads");
    args.push_back(t);
    return run(args);
  };
  const Result a = with_threads("1"), b = with_threads("1"), c = with_threads("3");
  REQUIRE(a.status == 0);
  CHECK(a.out == b.out);
  CHECK(a.out == c.out);
  auto other_seed = base;
  other_seed.back() = "18";
  CHECK(run(other_seed).out != a.out);
}

TEST_CASE("config file values sit between defaults and flags") {
  const fs::path dir = scratch_dir("config");
  {
    std::ofstream cfg(dir / "run.cfg");
    cfg << "# chain\nn = 11\nj0 = 4\nb = 0.2\n";
  }
  const Result from_file = run({"discord-matrix", "--config", (dir / "run.cfg").string(), "--out",
                                (dir / "a.csv").string()});
  REQUIRE(from_file.status == 0);
  json meta = json::parse(slurp(dir / "a.csv.meta.json"));
  CHECK(meta["config"]["n"] == 11);
  CHECK(meta["config"]["j0"] == 4);
  CHECK(meta["config"]["b"] == 0.2);
  CHECK(meta["config"]["b_j0"] == 10.0);

  const Result overridden = run({"discord-matrix", "--config", (dir / "run.cfg").string(), "--j0", "6", "--out",
                                 (dir / "b.csv").string()});
  REQUIRE(overridden.status == 0);
  meta = json::parse(slurp(dir / "b.csv.meta.json"));
  CHECK(meta["config"]["j0"] == 6);
  CHECK(meta["config"]["b"] == 0.2);
}

TEST_CASE("output directory from the environment") {
  const fs::path dir = scratch_dir("envdir");
  ::setenv("JWD_OUT_DIR", dir.c_str(), 1);
  const Result r = run({"spectrum", "--n", "4"});
  ::unsetenv("JWD_OUT_DIR");
  REQUIRE(r.status == 0);
  CHECK(r.out.empty());
  CHECK(fs::exists(dir / "spectrum.csv"));
  CHECK(fs::exists(dir / "spectrum.csv.meta.json"));
}

TEST_CASE("verify runs the oracle suites") {
  const Result r = run({"verify", "--n", "5"});
  REQUIRE(r.status == 0);
  const auto ls = lines(r.out);
  CHECK(ls[1] == "check,value,tolerance,status");
  for (std::size_t i = 2; i < ls.size(); ++i) CHECK(ls[i].substr(ls[i].rfind(',') + 1) == "pass");
}

TEST_CASE("usage errors give one JSON line and exit 2") {
  for (const auto& args : std::vector<std::vector<std::string>>{
           {"bogus"},
           {},
           {"spectrum", "--n", "1"},
           {"discord-matrix", "--n", "17", "--j0", "1"},
           {"sweep-b", "--n", "17", "--j0", "4"},
           {"sweep-noise", "--order", "3"},
           {"verify", "--n", "13"},
           {"spectrum", "--format", "xml"},
           {"discord-matrix", "--state", "noise"},
           {"spectrum", "--config", "/nonexistent/run.cfg"},
       }) {
    const Result r = run(args);
    INFO(r.err);
    CHECK(r.status == 2);
    CHECK(single_json_error_line(r.err));
  }
}

TEST_CASE("unknown config keys are rejected") {
  const fs::path dir = scratch_dir("badkey");
  {
    std::ofstream cfg(dir / "run.cfg");
    cfg << "n_real = 3\n";
  }
  const Result r = run({"spectrum", "--config", (dir / "run.cfg").string()});
  CHECK(r.status == 2);
  CHECK(single_json_error_line(r.err));
}

TEST_CASE("runtime failures leave no partial output") {
  const fs::path dir = scratch_dir("blocked");
  { std::ofstream blocker(dir / "file"); }
  const fs::path out = dir / "file" / "spectrum.csv";
  const Result r = run({"spectrum", "--n", "4", "--out", out.string()});
  CHECK(r.status == 1);
  CHECK(single_json_error_line(r.err));
  CHECK_FALSE(fs::exists(out));
}

TEST_CASE("help and version") {
  const Result help = run({"--help"});
  CHECK(help.status == 0);
  CHECK(help.out.find("sweep-noise") != std::string::npos);
  const Result version = run({"--version"});
  CHECK(version.status == 0);
  CHECK(version.out == std::string(jwd::cli::kVersion) + "\n");
}

TEST_CASE("installed binary exit codes") {
  const fs::path dir = scratch_dir("binary");
  const std::string bin = JWD_CLI_PATH;
  const std::string ok = bin + " spectrum --n 3 > " + (dir / "o.csv").string() + " 2> " + (dir / "e.txt").string();
  CHECK(WEXITSTATUS(std::system(ok.c_str())) == 0);
  CHECK(lines(slurp(dir / "o.csv")).size() == 5);
  const std::string bad = bin + " nonsense > /dev/null 2> " + (dir / "e.txt").string();
  CHECK(WEXITSTATUS(std::system(bad.c_str())) == 2);
  CHECK(single_json_error_line(slurp(dir / "e.txt")));
}
