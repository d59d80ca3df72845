#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "renyi/cli.hpp"

using namespace renyi;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

CliRun run(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  CliRun r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string temp_path(const std::string& name) { return ::testing::TempDir() + name; }

}  // namespace

TEST(Cli, EntropyOfSchmidtPreset) {
  const auto r = run({"entropy", "--preset", "schmidt(0.9,0.1)", "--alpha", "2"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find("0.286304"), std::string::npos) << r.out;
}

TEST(Cli, EntropyJsonCarriesNumbers) {
  const auto r = run({"entropy", "--preset", "schmidt(0.9,0.1)", "--alpha", "2", "--format", "json"});
  ASSERT_EQ(r.code, kExitOk);
  const auto j = Json::parse(r.out);
  EXPECT_NEAR(j[0]["entropy"].get<double>(), 0.2863041851566409, 1e-12);
}

TEST(Cli, RreeOnBellPairCollapses) {
  const auto r = run({"rree", "--preset", "phi(2)", "--alpha", "2", "--format", "json"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto j = Json::parse(r.out);
  EXPECT_NEAR(j[0]["analytic_lower"].get<double>(), 1.0, 1e-9);
  EXPECT_NEAR(j[0]["analytic_upper"].get<double>(), 1.0, 1e-9);
  EXPECT_NEAR(j[0]["upper_estimate"].get<double>(), 1.0, 1e-4);
}

TEST(Cli, ConverseCsvHeaderIsStable) {
  const auto r = run({"converse", "concentrate", "--preset", "schmidt(0.8,0.2)", "--rate", "0.9", "--n", "100",
                      "--alpha", "1.1", "--format", "csv"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), kConverseCsvHeader);
  EXPECT_NE(r.out.find("concentrate,1.1,100,0.9,-0.00705797066403"), std::string::npos) << r.out;
}

TEST(Cli, MergeWorkedCase) {
  const auto r = run({"converse", "merge_ent", "--preset", "merge_demo", "--alpha", "2", "--rate", "0.5", "--format",
                      "json"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NEAR(Json::parse(r.out)[0]["exponent_per_copy"].get<double>(), -0.125, 1e-12);
}

TEST(Cli, SimulateCsvHeaderIsStable) {
  const auto r = run({"simulate", "schumacher", "--spectrum", "0.9,0.1", "--rate", "0.5", "--n", "10", "--format", "csv"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), kProtocolCsvHeader);
  EXPECT_NE(r.out.find("0.826497043"), std::string::npos) << r.out;
}

TEST(Cli, ConfrontCsvAndExitCode) {
  const auto r = run({"confront", "schumacher", "--spectrum", "0.9,0.1", "--rate", "0.3", "--n", "10:50:10",
                      "--format", "csv"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), kConfrontCsvHeader);
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 6);
}

TEST(Cli, ConfrontMergeIsBoundOnly) {
  const auto r = run({"confront", "merge_ent", "--preset", "merge_demo", "--rate", "0.5", "--n", "4"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("bound-only"), std::string::npos);
}

TEST(Cli, CheckSubsetPassesAndFailingSelfTestExitsTwo) {
  EXPECT_EQ(run({"check", "dpi", "vdh", "--trials", "20"}).code, kExitOk);
  const auto r = run({"check", "selftest_inverted", "--trials", "5"});
  EXPECT_EQ(r.code, kExitOk);  // the self-test passes by failing
  EXPECT_NE(r.out.find("failed as expected"), std::string::npos);
}

TEST(Cli, UsageErrorsExitOne) {
  const auto missing = run({"entropy", "--alpha", "2"});
  EXPECT_EQ(missing.code, kExitUsage);
  EXPECT_NE(missing.err.find("fix:"), std::string::npos);
  EXPECT_EQ(run({"entropy", "--preset", "bell", "--bogus"}).code, kExitUsage);
  EXPECT_EQ(run({"converse", "teleport", "--preset", "bell"}).code, kExitUsage);
  EXPECT_EQ(run({"entropy", "--preset", "bell", "--alpha", "1:0:0.1"}).code, kExitUsage);
  EXPECT_EQ(run({}).code, kExitUsage);
}

TEST(Cli, NumericalValidationExitsThree) {
  const std::string path = temp_path("bad_state.json");
  std::ofstream(path) << R"({"dims":[{"label":"A","dim":2}],"matrix":[[[0.6,0],[0,0]],[[0,0],[0.5,0]]]})";
  const auto r = run({"entropy", "--state", path, "--alpha", "2"});
  EXPECT_EQ(r.code, kExitNumerical);
  EXPECT_NE(r.err.find("NotUnitTrace"), std::string::npos) << r.err;
  const auto alpha = run({"converse", "schumacher", "--preset", "diag(0.9,0.1)", "--rate", "0.3", "--alpha", "1.5"});
  EXPECT_EQ(alpha.code, kExitNumerical);
  EXPECT_NE(alpha.err.find("AlphaOutOfRange"), std::string::npos) << alpha.err;
}

TEST(Cli, StateFileWithComplexPairs) {
  const std::string path = temp_path("plus_state.json");
  std::ofstream(path) << R"({"dims":[{"label":"A","dim":2},{"label":"B","dim":2}],)"
                      << R"("vector":[[0.7071067811865476,0],[0,0],[0,0],[0,0.7071067811865476]]})";
  const auto r = run({"entropy", "--state", path, "--alpha", "2", "--format", "json"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NEAR(Json::parse(r.out)[0]["entropy"].get<double>(), 1.0, 1e-12);
}

TEST(Cli, StateJsonRoundTrip) {
  const auto rho = random_density(SubsystemDims({{"A", 2}, {"B", 3}}), 5);
  const auto back = state_from_json(Json::parse(state_to_json(rho).dump()), "mem");
  EXPECT_TRUE(back.rho.matrix().isApprox(rho.matrix(), 1e-15));
  EXPECT_EQ(back.rho.dims(), rho.dims());
  EXPECT_THROW(complex_from_json(Json::parse(R"("1+2i")")), Error);
}

TEST(Cli, OutFileMatchesStdout) {
  const std::string path = temp_path("sweep.csv");
  std::vector<std::string> args{"converse", "schumacher", "--preset", "diag(0.9,0.1)", "--rate", "0.3",
                                "--n", "10:30:10", "--alpha", "0.6:0.9:0.1", "--format", "csv"};
  const auto direct = run(args);
  ASSERT_EQ(direct.code, kExitOk) << direct.err;
  args.insert(args.end(), {"--out", path});
  EXPECT_EQ(run(args).code, kExitOk);
  std::ifstream f(path);
  std::stringstream ss;
  ss << f.rdbuf();
  EXPECT_EQ(ss.str(), direct.out);
  EXPECT_EQ(std::count(direct.out.begin(), direct.out.end(), '\n'), 1 + 3 * 4);
}

TEST(Cli, SweepIsByteIdenticalAcrossJobs) {
  const std::vector<std::string> base{"converse", "concentrate", "--preset", "schmidt(0.7,0.2,0.1)", "--rate",
                                      "0.5:1.2:0.1", "--n", "10:60:10", "--alpha", "1.1:2:0.1", "--format", "csv"};
  auto one = base;
  one.insert(one.end(), {"--jobs", "1"});
  auto four = base;
  four.insert(four.end(), {"--jobs", "4"});
  const auto a = run(one);
  const auto b = run(four);
  ASSERT_EQ(a.code, kExitOk) << a.err;
  EXPECT_EQ(a.out, b.out);
}

TEST(Cli, SeedFromEnvironment) {
  ::setenv("RENYI_CONVERSE_SEED", "123", 1);
  const auto env = run({"entropy", "--seed", "123", "--dims", "A:2,B:2", "--alpha", "2", "--format", "json"});
  const auto a = run({"check", "dpi", "--trials", "10", "--format", "json"});
  ::unsetenv("RENYI_CONVERSE_SEED");
  const auto b = run({"check", "dpi", "--trials", "10", "--seed", "123", "--format", "json"});
  ASSERT_EQ(env.code, kExitOk) << env.err;
  EXPECT_EQ(a.out, b.out);
}
