#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "jflow/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace jflow;
namespace fs = std::filesystem;

namespace {

fs::path tempDir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("jflow_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

cli::RunConfig baseConfig(const std::string& sub, const fs::path& out) {
  cli::RunConfig c;
  c.subcommand = sub;
  c.output_dir = out.string();
  return c;
}

}  // namespace

TEST_CASE("config round-trips through JSON") {
  cli::RunConfig c;
  c.subcommand = "vortex-solve";
  c.parameters = {{"r1", "7"}, {"r2", "3"}, {"s", "11/5"}, {"lambda2", "0.4"}};
  c.output_dir = "/tmp/somewhere";
  c.grid = 512;
  c.tol = 1e-8;
  const cli::RunConfig back = cli::RunConfig::fromJson(c.toJson());
  CHECK(back.subcommand == c.subcommand);
  CHECK(back.parameters == c.parameters);
  CHECK(back.output_dir == c.output_dir);
  CHECK(back.grid == c.grid);
  CHECK(back.tol == c.tol);
}

TEST_CASE("unknown keys are rejected") {
  Json j;
  j["subcommand"] = "projective";
  j["parameters"] = {{"n", "2"}};
  j["bogus"] = 1;
  CHECK_THROWS_AS(cli::RunConfig::fromJson(j), std::invalid_argument);

  cli::RunConfig c;
  c.subcommand = "projective";
  c.parameters = {{"n", "2"}, {"mystery", "1"}};
  CHECK_THROWS_AS(cli::validate(c), std::invalid_argument);

  c.parameters = {{"n", "2"}};
  CHECK_NOTHROW(cli::validate(c));
  c.subcommand = "no-such-command";
  CHECK_THROWS_AS(cli::validate(c), std::invalid_argument);
}

TEST_CASE("eps list parser handles fractional exponents") {
  CHECK(cli::parseEps("1e-1") == doctest::Approx(0.1));
  CHECK(cli::parseEps("1e-1.5") == doctest::Approx(std::pow(10.0, -1.5)));
  CHECK(cli::parseEps("2.5e-2") == doctest::Approx(0.025));
  CHECK(cli::parseEps("0.004") == doctest::Approx(0.004));
  const auto parts = cli::splitList("1e-1,1e-1.5,1e-2");
  CHECK(parts.size() == 3);
}

TEST_CASE("malformed rational exits with a config error naming the field") {
  const fs::path out = tempDir("badrat");
  cli::RunConfig c = baseConfig("vortex-check", out);
  c.parameters = {{"r1", "7"}, {"r2", "3"}, {"s", "7/0"}};
  CHECK(cli::run(c) == cli::kConfigError);
}

TEST_CASE("projective subcommand") {
  const fs::path out = tempDir("proj");
  cli::RunConfig c = baseConfig("projective", out);
  c.parameters = {{"n", "2"}};
  CHECK(cli::run(c) == cli::kOk);
  const Json rep = readJsonFile(out / "projective.json");
  CHECK(rep.at("j_residual_zero").get<bool>());
  CHECK(rep.at("factor").get<std::string>() == "3/2");
  CHECK(rep.at("invariant").get<std::string>() == "3");
  CHECK(rep.at("gram_min_eig").get<double>() > 1e-6);
}

TEST_CASE("vortex window subcommand reports the empty interval") {
  const fs::path out = tempDir("window");
  cli::RunConfig c = baseConfig("vortex-window", out);
  c.parameters = {{"r1", "3"}, {"r2", "2"}};
  CHECK(cli::run(c) == cli::kOk);
  const Json rep = readJsonFile(out / "window.json");
  CHECK(rep.at("empty").get<bool>());

  c.parameters = {{"r1", "7"}, {"r2", "1"}};
  CHECK(cli::run(c) == cli::kConfigError);  // r2 >= 2 hypothesis violated
}

TEST_CASE("vortex check subcommand") {
  const fs::path out = tempDir("check");
  cli::RunConfig c = baseConfig("vortex-check", out);
  c.parameters = {{"r1", "7"}, {"r2", "3"}, {"s", "11/5"}};
  CHECK(cli::run(c) == cli::kOk);
  const Json rep = readJsonFile(out / "check.json");
  CHECK(rep.at("c").get<std::string>() == "229/1040");
  CHECK(rep.at("inside_window").get<std::string>() == "YES");
  CHECK(rep.at("alpha").at("greater_than_1").get<bool>());
  CHECK(rep.at("kappa_condition").at("holds").get<bool>());
  CHECK(rep.at("sub_line_bundle").at("margin").get<std::string>() == "32/5");
}

TEST_CASE("stability subcommand on the vortex document") {
  const fs::path out = tempDir("stab");
  const fs::path input = out / "doc.json";
  {
    Json doc;
    doc["lattice"]["basis"] = Json::array({"A", "B"});
    doc["lattice"]["gram"] =
        Json::array({Json::array({"0", "1"}), Json::array({"1", "0"})});
    doc["classes"]["omega"] = Json::array({"11/5", "1"});
    doc["classes"]["L"] = Json::array({"1", "1"});
    doc["sheaves"]["E"] = {{"rank", "2"}, {"ch1", Json::array({"15", "14"})}, {"ch2", "104"}};
    doc["sheaves"]["S1"] = {{"rank", "1"}, {"ch1", Json::array({"8", "6"})}, {"ch2", "48"}};
    doc["curves"] = Json::array({Json::array({"1", "0"}), Json::array({"0", "1"})});
    writeJsonFile(input, doc);
  }
  cli::RunConfig c = baseConfig("stability", out);
  c.parameters = {{"input", input.string()}};
  CHECK(cli::run(c) == cli::kOk);
  const Json rep = readJsonFile(out / "stability_report.json");
  REQUIRE(rep.contains("stability"));
  const Json& row = rep.at("stability").at(0);
  CHECK(row.at("sub").get<std::string>() == "S1");
  CHECK(row.at("classification").get<std::string>() == "STRICT");
  CHECK(row.at("margin").get<std::string>() == "32/5");
  CHECK(row.at("see_saw").get<bool>());
  CHECK(rep.at("sheaves").at("E").at("j_constant").get<std::string>() == "229/1040");
  CHECK(rep.at("eta").at("status").get<std::string>() == "VERIFIED");
}

TEST_CASE("solve and dhym round trip") {
  const fs::path out = tempDir("solve");
  cli::RunConfig c = baseConfig("vortex-solve", out);
  c.parameters = {{"r1", "7"}, {"r2", "3"}, {"s", "11/5"}, {"lambda2", "0.4"}};
  // The scaling fit needs the J-residual floor below 1e-6, which takes a
  // moderately fine grid.
  c.grid = 512;
  CHECK(cli::run(c) == cli::kOk);
  CHECK(fs::exists(out / "solution.csv"));
  CHECK(fs::exists(out / "trace.json"));
  const Json rep = readJsonFile(out / "report.json");
  CHECK(rep.at("status").get<std::string>() == "CONVERGED");
  CHECK(rep.at("verify").at("griffith_positive").get<bool>());

  cli::RunConfig d = baseConfig("dhym", out);
  d.parameters = {{"from", out.string()},
                  {"eps", "1e-1,1e-1.5,1e-2,1e-2.5,1e-3"},
                  {"newton", "0"}};
  CHECK(cli::run(d) == cli::kOk);
  CHECK(fs::exists(out / "dhym_scaling.csv"));
}

TEST_CASE("unreachable tolerance reports CONTINUATION_STUCK") {
  const fs::path out = tempDir("stuck");
  cli::RunConfig c = baseConfig("vortex-solve", out);
  c.parameters = {{"r1", "7"}, {"r2", "3"}, {"s", "11/5"}, {"lambda2", "0.4"}};
  c.grid = 128;
  c.tol = 1e-30;
  CHECK(cli::run(c) == cli::kContinuationStuck);
}

TEST_CASE("sweep output is byte-identical across repeated runs") {
  const fs::path out1 = tempDir("sweep1");
  const fs::path out2 = tempDir("sweep2");
  for (const fs::path& out : {out1, out2}) {
    cli::RunConfig c = baseConfig("sweep", out);
    c.parameters = {{"r1_list", "7"},
                    {"r2_list", "3"},
                    {"s_list", "11/5,5/2"},
                    {"threads", "2"}};
    c.grid = 96;
    c.tol = 1e-8;
    REQUIRE(cli::run(c) == cli::kOk);
  }
  CHECK(slurp(out1 / "sweep.csv") == slurp(out2 / "sweep.csv"));
  const std::string csv = slurp(out1 / "sweep.csv");
  // s = 11/5 lies inside the window and solves; s = 5/2 exceeds the upper
  // bound, is recorded NO, and is rejected by the alpha > 1 precondition.
  CHECK(csv.find("11/5,YES,SOLVED") != std::string::npos);
  CHECK(csv.find("5/2,NO") != std::string::npos);
}

TEST_CASE("JFLOW_OUT overrides the output directory") {
  const fs::path out = tempDir("envdir");
  setenv("JFLOW_OUT", out.string().c_str(), 1);
  // The env override is applied by the binary frontend; here we emulate it.
  cli::RunConfig c = baseConfig("projective", fs::temp_directory_path() / "ignored");
  c.parameters = {{"n", "1"}};
  if (const char* env = std::getenv("JFLOW_OUT")) c.output_dir = env;
  CHECK(cli::run(c) == cli::kOk);
  CHECK(fs::exists(out / "projective.json"));
  unsetenv("JFLOW_OUT");
}
