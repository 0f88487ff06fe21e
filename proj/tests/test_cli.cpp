#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace {

struct Outcome {
  int code = -1;
  std::string out;
};

Outcome run(const std::string &args) {
  const std::string cmd = std::string(L2INV_CLI) + " " + args + " 2>/dev/null";
  Outcome r;
  FILE *p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string config(const std::string &name) { return std::string(L2INV_CONFIGS) + "/" + name; }

std::vector<std::string> data_lines(const std::string &out) {
  std::vector<std::string> lines;
  std::istringstream in(out);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#') lines.push_back(line);
  return lines;
}

std::vector<std::string> split(const std::string &line) {
  std::vector<std::string> cells;
  std::istringstream in(line);
  std::string cell;
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  return cells;
}

} // namespace

TEST(Cli, FkDetOfLinearPolynomial) {
  const Outcome r = run("fk-det --config " + config("t_minus_2.json"));
  ASSERT_EQ(r.code, 0);
  const auto lines = data_lines(r.out);
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(split(lines[0])[0], "log_det");
  EXPECT_NEAR(std::stod(split(lines[1])[0]), std::log(2.0), 1e-9);
}

TEST(Cli, DensityCurveHasDefaultGrid) {
  const Outcome r = run("density --config " + config("circle.json"));
  ASSERT_EQ(r.code, 0);
  const auto lines = data_lines(r.out);
  ASSERT_EQ(lines.size(), 65u);
  EXPECT_EQ(lines[0], "lambda,F,Fhat,error");
  double prev = -1.0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const double f = std::stod(split(lines[i])[1]);
    EXPECT_GE(f, prev);
    prev = f;
  }
}

TEST(Cli, CircleAnalyticTorsionVanishes) {
  const Outcome r = run("torsion-analytic --config " + config("circle_model.json"));
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("# log_torsion=0"), std::string::npos);
}

TEST(Cli, WritesCsvAndMetadata) {
  const std::string out = ::testing::TempDir() + "l2inv_cli_volumes.csv";
  const Outcome r = run("cusp-volumes --config " + config("n3k1.json") + " --out " + out);
  ASSERT_EQ(r.code, 0);
  std::ifstream csv(out), meta(out + ".meta.json");
  ASSERT_TRUE(csv.good());
  EXPECT_TRUE(meta.good());
  std::stringstream body;
  body << csv.rdbuf();
  EXPECT_NE(body.str().find("R,vol_boundary,vol_thick,warp_factor"), std::string::npos);
}

TEST(Cli, MalformedConfigExitsWithUsageCode) {
  const std::string bad = ::testing::TempDir() + "l2inv_cli_bad.json";
  std::ofstream(bad) << "{\"finite_complex\": ";
  EXPECT_EQ(run("fk-det --config " + bad).code, 2);
}

TEST(Cli, UnknownSubcommandExitsWithUsageCode) { EXPECT_EQ(run("bogus").code, 2); }

TEST(Cli, VerifyIsDeterministic) {
  const Outcome a = run("verify --only 1,2,3,12");
  const Outcome b = run("verify --only 1,2,3,12");
  EXPECT_EQ(a.code, 0);
  EXPECT_FALSE(a.out.empty());
  EXPECT_EQ(a.out, b.out);
}
