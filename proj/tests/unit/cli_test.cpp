#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gdl/cli.hpp"
#include "gdl/io.hpp"

namespace fs = std::filesystem;

namespace {

struct Invocation {
  int code = 0;
  std::string out, err;
};

Invocation invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "gdl");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  Invocation r;
  r.code = gdl::cli::dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("gdl_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST(Cli, UnknownSuiteIsValidationError) {
  const Invocation r = invoke({"verify", "nonsense"});
  EXPECT_EQ(r.code, 2);
  const auto j = gdl::io::json::parse(r.err);
  EXPECT_EQ(j["error"], "validation");
}

TEST(Cli, NegativeAlphaConfigIsValidationError) {
  const fs::path dir = scratch("alpha");
  auto cfg = gdl::io::json::parse(gdl::io::read_file(fs::path(GDL_CONFIG_DIR) / "forward_plane_graph.json"));
  cfg["alpha"] = -0.5;
  std::ofstream(dir / "bad.json") << cfg.dump();
  const Invocation r = invoke({"-o", (dir / "out").string(), "experiment", "--config", (dir / "bad.json").string()});
  EXPECT_EQ(r.code, 2);
  const auto j = gdl::io::json::parse(r.err);
  EXPECT_EQ(j["field"], "alpha");
  fs::remove_all(dir);
}

TEST(Cli, MalformedJsonAndMissingFile) {
  const fs::path dir = scratch("malformed");
  std::ofstream(dir / "broken.json") << "{\"experiment\": ";
  EXPECT_EQ(invoke({"experiment", "--config", (dir / "broken.json").string()}).code, 2);
  EXPECT_EQ(invoke({"experiment", "--config", (dir / "missing.json").string()}).code, 4);
  EXPECT_EQ(invoke({"frobnicate"}).code, 2);
  fs::remove_all(dir);
}

TEST(Cli, GenThenQuery) {
  const fs::path dir = scratch("gen");
  Invocation r = invoke({"-o", dir.string(), "--seed", "3", "gen", "--kind", "plane", "--count", "600", "--half-width", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  ASSERT_TRUE(fs::exists(dir / "cloud.csv"));
  const auto meta = gdl::io::json::parse(gdl::io::read_file(dir / "cloud.csv.json"));
  EXPECT_EQ(meta["seed"], 3);
  std::ofstream(dir / "pts.csv") << "x,y\n0.1,0.5\n-0.2,0.3\n";
  r = invoke({"-o", dir.string(), "potential", "--cloud", (dir / "cloud.csv").string(), "--points",
           (dir / "pts.csv").string(), "--alpha", "1"});
  EXPECT_EQ(r.code, 0) << r.err;
  r = invoke({"-o", dir.string(), "alpha", "--cloud", (dir / "cloud.csv").string(), "--center", "0,0", "--radius", "1"});
  EXPECT_EQ(r.code, 0) << r.err;
  r = invoke({"alpha", "--cloud", (dir / "cloud.csv").string(), "--center", "0,zero"});
  EXPECT_EQ(r.code, 2);
  fs::remove_all(dir);
}

TEST(Cli, VerifyQuickPotentials) {
  const Invocation r = invoke({"verify", "potentials", "--quick"});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
}

TEST(Cli, Version) {
  const Invocation r = invoke({"--version"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find(gdl::cli::kVersion), std::string::npos);
}
