#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <regex>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string out;  // stdout and stderr
};

Outcome qbo_cli(const std::string& args) {
  const std::string cmd = std::string(QBO_CLI_PATH) + " " + args + " 2>&1";
  Outcome o;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return o;
  std::array<char, 4096> buf;
  while (std::size_t n = std::fread(buf.data(), 1, buf.size(), p)) o.out.append(buf.data(), n);
  const int status = pclose(p);
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("qbo_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string out(const std::string& sub = "") const { return (dir_ / sub).string(); }
  fs::path dir_;
};

}  // namespace

TEST_F(Cli, BenchSmoke) {
  const auto r = qbo_cli("bench --functions dropwave --algorithms qbo --trials 5 --seed 42 --out " + out("a"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(lines(slurp(dir_ / "a/raw.csv")), 6u);
  EXPECT_EQ(lines(slurp(dir_ / "a/summary.csv")), 2u);
  EXPECT_TRUE(fs::exists(dir_ / "a/summary.json"));
}

TEST_F(Cli, BenchIsIdempotent) {
  const std::string args = "bench --functions dropwave,schaffer_n2 --algorithms sa,qbo --trials 3 --budget 2000 --seed 9";
  ASSERT_EQ(qbo_cli(args + " --out " + out("a")).code, 0);
  ASSERT_EQ(qbo_cli(args + " --workers 2 --out " + out("b")).code, 0);
  for (const char* f : {"raw.csv", "summary.csv", "summary.json"})
    EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
}

TEST_F(Cli, UnknownFunctionIsAConfigError) {
  const auto r = qbo_cli("bench --functions dropwave,rosenbrock --out " + out("a"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("rosenbrock"), std::string::npos) << r.out;
  EXPECT_FALSE(fs::exists(dir_ / "a/raw.csv"));
}

TEST_F(Cli, UnknownFlagIsAConfigError) { EXPECT_EQ(qbo_cli("bench --trails 3").code, 2); }

TEST_F(Cli, ConfigFileWithOverrides) {
  std::ofstream(dir_ / "c.toml") << "[bench]\nfunctions = [\"dropwave\"]\nalgorithms = [\"gd\"]\ntrials = 3\n"
                                    "budget = 100\n";
  auto r = qbo_cli("bench --config " + out("c.toml") + " --out " + out("a"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(lines(slurp(dir_ / "a/raw.csv")), 4u);
  r = qbo_cli("bench --config " + out("c.toml") + " --trials 2 --out " + out("b"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(lines(slurp(dir_ / "b/raw.csv")), 3u);
}

TEST_F(Cli, ConfigFileRejectsUnknownKeys) {
  std::ofstream(dir_ / "c.toml") << "[bench]\ntrials = 3\nlearning_rate = 0.1\n";
  const auto r = qbo_cli("bench --config " + out("c.toml") + " --out " + out("a"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("learning_rate"), std::string::npos) << r.out;
}

TEST_F(Cli, IoErrorsExitThree) {
  std::ofstream(dir_ / "file") << "x";
  EXPECT_EQ(qbo_cli("surface --function dropwave --grid 3 --out " + out("file")).code, 3);
  EXPECT_EQ(qbo_cli("bench --config " + out("missing.toml")).code, 3);
}

TEST_F(Cli, VerifySelectedCheck) {
  const auto r = qbo_cli("verify --check error-moments --qp 16");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("PASS error-moments[qp=16]"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("1/(12 qp^2)=3.255208e-04"), std::string::npos) << r.out;
}

TEST_F(Cli, VerifyWithNoChecks) { EXPECT_EQ(qbo_cli("verify --check none").code, 2); }

TEST_F(Cli, SurfaceGrid) {
  const auto r = qbo_cli("surface --function schaffer_n2 --grid 201 --out " + out());
  ASSERT_EQ(r.code, 0) << r.out;
  const std::string s = slurp(dir_ / "surface_schaffer_n2.txt");
  EXPECT_EQ(lines(s), 40401u);
  EXPECT_TRUE(std::regex_search(s.substr(0, s.find('\n')), std::regex("^-100 -100 [0-9.e+-]+$")));
}

TEST_F(Cli, FpCrossingMass) {
  const auto r = qbo_cli("fp --potential doublewell --q 0.5 --T 10 --barrier 0 --out " + out());
  ASSERT_EQ(r.code, 0) << r.out;
  std::smatch m;
  ASSERT_TRUE(std::regex_search(r.out, m, std::regex("crossing_mass=([0-9.e+-]+)"))) << r.out;
  EXPECT_GT(std::stod(m[1]), 0.0);
  EXPECT_TRUE(fs::exists(dir_ / "density_t10.txt"));
  EXPECT_EQ(lines(slurp(dir_ / "velocity_t10.txt")), 512u);
}

TEST_F(Cli, SdeTerminalVariance) {
  const auto r = qbo_cli("sde --potential quadratic --cq 1 --qp 1 --T 5 --paths 4000 --out " + out());
  ASSERT_EQ(r.code, 0) << r.out;
  std::smatch m;
  ASSERT_TRUE(std::regex_search(r.out, m, std::regex("variance=([0-9.e+-]+)"))) << r.out;
  EXPECT_NEAR(std::stod(m[1]), 0.5, 0.05);
  EXPECT_TRUE(fs::exists(dir_ / "moments.txt"));
  EXPECT_TRUE(fs::exists(dir_ / "histogram_t5.txt"));
  // Idempotent outputs.
  const std::string first = slurp(dir_ / "moments.txt");
  ASSERT_EQ(qbo_cli("sde --potential quadratic --cq 1 --qp 1 --T 5 --paths 4000 --out " + out()).code, 0);
  EXPECT_EQ(slurp(dir_ / "moments.txt"), first);
}

TEST_F(Cli, SdeBadPotential) { EXPECT_EQ(qbo_cli("sde --potential quartic --out " + out()).code, 2); }

// Every option line of every help screen shows a default or is a flag.
TEST_F(Cli, HelpDocumentsEveryFlagAndDefault) {
  const auto top = qbo_cli("--help");
  ASSERT_EQ(top.code, 0);
  EXPECT_NE(top.out.find("--config"), std::string::npos);
  const std::map<std::string, std::vector<std::string>> expected{
      {"bench", {"--functions", "--dimension", "--algorithms", "--trials", "--seed", "--budget", "--tolerance",
                 "--workers", "--out", "--wall-time", "--sa-alpha", "--sqa-replicas", "--qbo-cq", "--qbo-eta",
                 "--qbo-period", "--gd-step"}},
      {"verify", {"--check", "--qp", "--paths", "--seed"}},
      {"sde", {"--potential", "--cq", "--qp", "--dt", "--T", "--paths", "--seed", "--x0", "--bins", "--out"}},
      {"fp", {"--potential", "--q", "--a", "--b", "--n", "--T", "--dt", "--init", "--barrier", "--out"}},
      {"surface", {"--function", "--dimension", "--grid", "--out"}}};
  const std::set<std::string> flags{"--wall-time", "--qbo-gradient-free", "--help"};
  for (const auto& [sub, opts] : expected) {
    const auto h = qbo_cli(sub + " --help");
    ASSERT_EQ(h.code, 0) << sub;
    for (const auto& o : opts) EXPECT_NE(h.out.find(o + " "), std::string::npos) << sub << " " << o;
    std::istringstream in(h.out);
    for (std::string line; std::getline(in, line);) {
      std::smatch m;
      if (!std::regex_search(line, m, std::regex("^\\s+(?:-h,)?(--[a-z0-9-]+)"))) continue;
      if (flags.count(m[1]) || m[1] == "--config") continue;
      EXPECT_NE(line.find('['), std::string::npos) << sub << ": no default shown in '" << line << "'";
    }
  }
}
