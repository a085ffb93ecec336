#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "slipstep/scenario.hpp"

using namespace slipstep;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "slipstep_cli_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + "'" SLIPSTEP_CLI "' " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path write_scenario(const fs::path& dir, const std::string& file, const nlohmann::json& j) {
  const auto p = dir / file;
  std::ofstream(p) << j.dump(2);
  return p;
}

nlohmann::json short_walk(const std::string& name = "flat-walk", double duration = 1.0) {
  auto j = scenario::to_json(scenario::builtin(name));
  j["duration_s"] = duration;
  return j;
}

long line_count(const fs::path& p) {
  std::ifstream f(p);
  long n = 0;
  for (std::string line; std::getline(f, line);) ++n;
  return n;
}

}  // namespace

TEST(Cli, RunWritesTracesIntoOutDir) {
  const auto dir = scratch("run");
  const auto scen = write_scenario(dir, "walk.json", short_walk());
  const auto out = dir / "out";
  EXPECT_EQ(cli("run -q -s '" + scen.string() + "' -o '" + out.string() + "'"), 0);
  EXPECT_TRUE(fs::exists(out / "flat-walk.ndjson"));
  EXPECT_TRUE(fs::exists(out / "flat-walk.csv"));
  EXPECT_TRUE(fs::exists(out / "flat-walk.summary.json"));
  EXPECT_EQ(line_count(out / "flat-walk.ndjson"), 101);
  EXPECT_EQ(line_count(out / "flat-walk.csv"), 101);
}

TEST(Cli, OutDirFromEnvironment) {
  const auto dir = scratch("env");
  const auto scen = write_scenario(dir, "walk.json", short_walk());
  EXPECT_EQ(cli("run -q -s '" + scen.string() + "'", "SLIPSTEP_OUT='" + (dir / "envout").string() + "'"), 0);
  EXPECT_TRUE(fs::exists(dir / "envout" / "flat-walk.ndjson"));
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch("codes");
  EXPECT_EQ(cli("run -q -s '" + (dir / "missing.json").string() + "' -o '" + dir.string() + "'"), 3);
  EXPECT_EQ(cli("run --frobnicate"), 1);
  EXPECT_EQ(cli(""), 1);
  EXPECT_EQ(cli("list-scenarios"), 0);
  EXPECT_EQ(cli("--version"), 0);

  auto wrong = short_walk();
  wrong["schema_version"] = 7;
  const auto bad = write_scenario(dir, "v7.json", wrong);
  EXPECT_EQ(cli("run -q -s '" + bad.string() + "' -o '" + dir.string() + "'"), 1);

  std::ofstream(dir / "garbage.json") << "{ nope";
  EXPECT_EQ(cli("run -q -s '" + (dir / "garbage.json").string() + "' -o '" + dir.string() + "'"), 1);

  auto fall = short_walk("flat-walk", 5.0);
  fall["name"] = "collapse";
  fall["controller"]["target_speed_mps"] = 0.0;
  fall["params"]["spring_k"] = 400.0;
  const auto falls = write_scenario(dir, "fall.json", fall);
  EXPECT_EQ(cli("run -q -s '" + falls.string() + "' -o '" + (dir / "o").string() + "'"), 2);

  // A regular file where the output directory should be.
  std::ofstream(dir / "blocker") << "x";
  const auto ok = write_scenario(dir, "walk.json", short_walk());
  EXPECT_EQ(cli("run -q -s '" + ok.string() + "' -o '" + (dir / "blocker" / "sub").string() + "'"), 4);
}

TEST(Cli, ValidateAgreesWithRun) {
  const auto dir = scratch("validate");
  auto neg = short_walk();
  neg["dt_s"] = -0.01;
  auto unknown = short_walk();
  unknown["colour"] = "blue";
  auto push = short_walk();
  push["schedule"] = nlohmann::json::array({{{"t", 0.5}, {"kind", "PUSH"}, {"force", {5000, 0, 0}}, {"duration", 0.2}}});
  const std::vector<std::pair<std::string, nlohmann::json>> cases = {
      {"good.json", short_walk()}, {"neg.json", neg}, {"unknown.json", unknown}, {"push.json", push}};
  for (const auto& [file, j] : cases) {
    const auto p = write_scenario(dir, file, j);
    const int v = cli("validate '" + p.string() + "'");
    const int r = cli("run -q -s '" + p.string() + "' -o '" + (dir / "out").string() + "'");
    EXPECT_EQ(v == 0, r == 0) << file << " validate=" << v << " run=" << r;
    EXPECT_EQ(v, file == "good.json" ? 0 : 1) << file;
  }
  for (const auto& n : scenario::builtin_names()) EXPECT_EQ(cli("validate " + n), 0) << n;
}

TEST(Cli, ExportColumns) {
  const auto dir = scratch("export");
  const auto scen = write_scenario(dir, "walk.json", short_walk("flat-walk", 2.0));
  ASSERT_EQ(cli("run -q -s '" + scen.string() + "' -o '" + dir.string() + "'"), 0);
  const auto trace = (dir / "flat-walk.ndjson").string();
  EXPECT_EQ(cli("export -t '" + trace + "' -o '" + dir.string() + "'"), 0);
  const auto csv = dir / "flat-walk.export.csv";
  ASSERT_TRUE(fs::exists(csv));
  EXPECT_EQ(line_count(csv), 201);
  std::ifstream f(csv);
  std::string header;
  std::getline(f, header);
  EXPECT_EQ(header, "time_s,speed_mps,step_events,ankle_force_N");
  EXPECT_EQ(cli("export -t '" + trace + "' -c time_s,warp --stdout"), 1);
  EXPECT_EQ(cli("export -t '" + (dir / "nope.ndjson").string() + "' --stdout"), 3);
}
