#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "twem/cli.hpp"

using namespace twem;
using namespace twem::cli;

namespace {
constexpr double kPi = std::numbers::pi;

struct Outcome {
  int code;
  std::string table;
  std::string log;
  std::string err;
};

Outcome run_cmd(Command cmd, const RunConfig &cfg, const VerifyHooks &hooks = {}) {
  std::ostringstream t, l, e;
  const int rc = run(cmd, cfg, t, l, e, hooks);
  return {rc, t.str(), l.str(), e.str()};
}

RunConfig with(std::initializer_list<std::pair<const char *, const char *>> kv) {
  RunConfig cfg;
  for (const auto &[k, v] : kv) apply_setting(cfg, k, v);
  return cfg;
}

std::vector<double> split_peaks(const std::string &s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ';')) out.push_back(std::stod(item));
  return out;
}

std::string cli_path() {
  const char *p = std::getenv("TWEM_CLI");
  return p ? p : "";
}

std::string slurp(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int shell(const std::string &cmd) {
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}
} // namespace

TEST(Csv, RoundTripFullPrecision) {
  Table t;
  t.config = {{"P", "1"}};
  t.names = {"a", "b"};
  t.columns = {{0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23}, {std::nextafter(1.0, 2.0), kPi, 0.0, -1e-17}};
  t.peaks = {1.25, 2.5};
  t.theta_pw = std::acos(0.04);
  std::ostringstream os;
  write_csv(os, t);
  const CsvData d = read_csv(os.str());
  ASSERT_EQ(d.names, t.names);
  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(d.columns[c][i], t.columns[c][i]);
  EXPECT_EQ(std::stod(d.header.at("theta_pw")), *t.theta_pw);
  EXPECT_EQ(split_peaks(d.header.at("peaks")), t.peaks);
}

TEST(Scan, DefaultsTwistedExact) {
  const auto o = run_cmd(Command::Scan, RunConfig{});
  ASSERT_EQ(o.code, kOk) << o.err;
  const CsvData d = read_csv(o.table);
  ASSERT_EQ(d.names, (std::vector<std::string>{"theta_p", "density_raw", "density_normalized"}));
  EXPECT_GE(d.columns[0].size(), 1990u);
  EXPECT_EQ(*std::max_element(d.columns[2].begin(), d.columns[2].end()), 1.0);
  const double c = std::stod(d.header.at("theta_pw"));
  EXPECT_NEAR(c, std::acos(0.04), 1e-15);
  const auto peaks = split_peaks(d.header.at("peaks"));
  ASSERT_EQ(peaks.size(), 2u);
  EXPECT_LT(std::fabs(peaks[0] - (c - kPi / 6)), 0.02);
  EXPECT_LT(std::fabs(peaks[1] - (c + kPi / 6)), 0.02);
  EXPECT_NE(o.log.find("theta_pw"), std::string::npos);
}

TEST(Scan, DefaultsPlaneWave) {
  const auto o = run_cmd(Command::Scan, with({{"channel", "planewave"}}));
  ASSERT_EQ(o.code, kOk) << o.err;
  const CsvData d = read_csv(o.table);
  const auto peaks = split_peaks(d.header.at("peaks"));
  ASSERT_EQ(peaks.size(), 1u);
  const double step = d.columns[0][1] - d.columns[0][0];
  EXPECT_LE(std::fabs(peaks[0] - std::acos(0.04)), step);
  EXPECT_NEAR(peaks[0], 1.5308, 1e-3);
}

TEST(Scan, TwoPointSmoke) {
  const auto o = run_cmd(Command::Scan, with({{"grid", "1.4:1.6:2"}, {"channel", "twisted-quad"}}));
  ASSERT_EQ(o.code, kOk) << o.err;
  EXPECT_EQ(read_csv(o.table).columns[0].size(), 2u);
}

TEST(Scan, JsonShape) {
  const auto o = run_cmd(Command::Scan, with({{"grid", "1.4:1.6:11"}, {"format", "json"}, {"channel", "planewave"}}));
  ASSERT_EQ(o.code, kOk) << o.err;
  const auto j = nlohmann::json::parse(o.table);
  EXPECT_TRUE(j.contains("config"));
  EXPECT_EQ(j["columns"]["theta_p"].size(), 11u);
  EXPECT_TRUE(j["peaks"].is_array());
  EXPECT_NEAR(j["theta_pw"].get<double>(), std::acos(0.04), 1e-15);
}

TEST(Compare, Defaults) {
  const auto o = run_cmd(Command::Compare, with({{"grid", "0.4:2.6:800"}}));
  ASSERT_EQ(o.code, kOk) << o.err;
  const CsvData d = read_csv(o.table);
  ASSERT_EQ(d.names, (std::vector<std::string>{"theta_p", "pw", "tw_quad", "tw_exact"}));
  const double c = std::acos(0.04);
  auto local_maxima = [&](const std::vector<double> &v) {
    std::vector<double> out;
    for (std::size_t i = 1; i + 1 < v.size(); ++i)
      if (v[i] > 0.5 && v[i] > v[i - 1] && v[i] > v[i + 1]) out.push_back(d.columns[0][i]);
    return out;
  };
  const auto pw = local_maxima(d.columns[1]);
  ASSERT_EQ(pw.size(), 1u);
  EXPECT_LT(std::fabs(pw[0] - c), 0.01);
  for (int col : {2, 3}) {
    const auto tw = local_maxima(d.columns[col]);
    ASSERT_EQ(tw.size(), 2u) << col;
    EXPECT_LT(std::fabs(tw[0] - (c - kPi / 6)), 0.02);
    EXPECT_LT(std::fabs(tw[1] - (c + kPi / 6)), 0.02);
  }
}

TEST(Compare, SmallOpeningAngleReportsLimit) {
  const double c = std::acos(0.04);
  RunConfig cfg = with({{"theta-a", "1e-3"}});
  cfg.grid = GridSpec{c - 0.02, c + 0.02, 201};
  const auto o = run_cmd(Command::Compare, cfg);
  ASSERT_EQ(o.code, kOk) << o.err;
  const CsvData d = read_csv(o.table);
  ASSERT_TRUE(d.header.count("limit_deviation"));
  EXPECT_LT(std::stod(d.header.at("limit_deviation")), 0.01);
}

TEST(Ring, HeaderAndPoints) {
  RunConfig cfg;
  const double ka = std::sin(kPi / 6);
  const auto o = run_cmd(Command::Ring, cfg);
  ASSERT_EQ(o.code, kOk) << o.err;
  const CsvData d = read_csv(o.table);
  const double cx = std::stod(d.header.at("center_x"));
  EXPECT_DOUBLE_EQ(cx, -0.5 * ka);
  EXPECT_EQ(std::stod(d.header.at("center_y")), 0.0);
  EXPECT_DOUBLE_EQ(std::stod(d.header.at("radius")), ka);
  ASSERT_EQ(d.columns[0].size(), 360u);
  for (std::size_t i = 0; i < 360; ++i) {
    const double x = d.columns[0][i] - cx, y = d.columns[1][i];
    EXPECT_LT(std::fabs(x * x + y * y - ka * ka), 1e-12);
  }
}

TEST(Ring, CenteredWhenKappaBZero) {
  const auto o = run_cmd(Command::Ring, with({{"kappa-b", "0"}, {"n-samples", "8"}}));
  ASSERT_EQ(o.code, kOk) << o.err;
  const CsvData d = read_csv(o.table);
  EXPECT_EQ(std::stod(d.header.at("center_x")), 0.0);
  EXPECT_EQ(d.columns[0].size(), 8u);
}

TEST(Determinism, EverySubcommand) {
  for (Command c : {Command::Scan, Command::Compare, Command::Ring, Command::Verify}) {
    RunConfig cfg;
    if (c == Command::Compare) cfg.grid = GridSpec{0.5, 2.5, 300};
    const auto a = run_cmd(c, cfg);
    const auto b = run_cmd(c, cfg);
    EXPECT_EQ(a.code, b.code);
    EXPECT_EQ(a.table, b.table);
    EXPECT_EQ(a.log, b.log);
  }
}

TEST(Verify, FastPassesWithEnoughChecks) {
  const auto o = run_cmd(Command::Verify, RunConfig{});
  EXPECT_EQ(o.code, kOk) << o.table;
  std::size_t checks = 0;
  std::istringstream ss(o.table);
  for (std::string line; std::getline(ss, line);) checks += line.rfind("PASS", 0) == 0 || line.rfind("FAIL", 0) == 0;
  EXPECT_GE(checks, 6u);
}

TEST(Verify, FullIncludesLargePartialSum) {
  const auto o = run_cmd(Command::Verify, with({{"level", "full"}}));
  EXPECT_EQ(o.code, kOk) << o.table;
  EXPECT_NE(o.table.find("partial-sum scaling N=10000"), std::string::npos);
}

TEST(Verify, NegatedAreaIsCaught) {
  VerifyHooks hooks;
  hooks.closed_form = [](int ma, int mb, const TriangleGeom &tri) {
    if (!tri.valid()) return 0.0;
    const auto &s = *tri.shape;
    return std::cos(ma * s.delta_x - mb * s.delta_b) / (2.0 * kPi * -s.area);
  };
  const auto o = run_cmd(Command::Verify, RunConfig{}, hooks);
  EXPECT_EQ(o.code, kVerifyFailed);
  EXPECT_NE(o.table.find("FAIL"), std::string::npos);
}

TEST(ExitCodes, ConfigAndNumerical) {
  EXPECT_THROW(with({{"P", "abc"}}), ConfigError);
  EXPECT_THROW(with({{"bogus", "1"}}), ConfigError);
  EXPECT_THROW(with({{"grid", "1:2"}}), ConfigError);
  EXPECT_EQ(run_cmd(Command::Scan, with({{"grid", "2:1:10"}})).code, kConfigError);
  EXPECT_EQ(run_cmd(Command::Scan, with({{"grid", "0:1:1"}})).code, kConfigError);
  EXPECT_EQ(run_cmd(Command::Scan, with({{"theta-a", "0"}, {"channel", "twisted-exact"}})).code, kConfigError);
  EXPECT_EQ(run_cmd(Command::Ring, with({{"theta-a", "0"}})).code, kConfigError);
  // no emission maximum exists: |cos theta_pw| > 1
  EXPECT_EQ(run_cmd(Command::Scan, with({{"detuning", "1"}})).code, kNumericalFailure);
  // every point outside the triangle window
  EXPECT_EQ(run_cmd(Command::Scan, with({{"grid", "0.1:0.3:20"}})).code, kNumericalFailure);
}

TEST(ConfigText, CommentsAndErrors) {
  RunConfig cfg;
  apply_config_text(cfg, "# comment\n\nomega = 0.2\n  channel=planewave\n");
  EXPECT_EQ(cfg.omega, 0.2);
  EXPECT_EQ(cfg.channel, Channel::PlaneWave);
  EXPECT_THROW(apply_config_text(cfg, "omega 0.2\n"), ConfigError);
  EXPECT_THROW(apply_config_file(cfg, "/nonexistent/twem.cfg"), ConfigError);
}

class Binary : public ::testing::Test {
protected:
  void SetUp() override {
    exe = cli_path();
    if (exe.empty()) GTEST_SKIP() << "TWEM_CLI not set";
    dir = ::testing::TempDir();
  }
  std::string exe;
  std::string dir;
};

TEST_F(Binary, FlagOverridesConfigOverridesDefault) {
  const std::string cfg = dir + "twem_prec.cfg";
  std::ofstream(cfg) << "theta-a = 0.3\nchannel = planewave\nomega = 0.1\n";
  const std::string out = dir + "twem_prec.csv";
  ASSERT_EQ(shell(exe + " scan --config " + cfg + " --theta-a 0.4 --grid 1.4:1.6:5 --out " + out + " > /dev/null"), 0);
  const CsvData d = read_csv(slurp(out));
  EXPECT_EQ(std::stod(d.header.at("theta-a")), 0.4);
  EXPECT_EQ(d.header.at("channel"), "planewave");
  EXPECT_EQ(std::stod(d.header.at("sigma-e")), 5e-4);
}

TEST_F(Binary, EnvironmentConfig) {
  const std::string cfg = dir + "twem_env.cfg";
  std::ofstream(cfg) << "channel = planewave\n";
  const std::string out = dir + "twem_env.csv";
  ASSERT_EQ(shell("TWISTED_EMISSION_CONFIG=" + cfg + " " + exe + " scan --grid 1.4:1.6:5 --out " + out +
                  " > /dev/null"),
            0);
  EXPECT_EQ(read_csv(slurp(out)).header.at("channel"), "planewave");
  const std::string other = dir + "twem_env2.cfg";
  std::ofstream(other) << "channel = twisted-quad\n";
  ASSERT_EQ(shell("TWISTED_EMISSION_CONFIG=" + cfg + " " + exe + " scan --config " + other +
                  " --grid 1.4:1.6:5 --out " + out + " > /dev/null"),
            0);
  EXPECT_EQ(read_csv(slurp(out)).header.at("channel"), "twisted-quad");
}

TEST_F(Binary, ExitCodes) {
  EXPECT_EQ(shell(exe + " scan --P nope 2> /dev/null"), 2);
  EXPECT_EQ(shell(exe + " scan --no-such-flag 2> /dev/null"), 2);
  EXPECT_EQ(shell(exe + " scan --config /nonexistent.cfg 2> /dev/null"), 2);
  EXPECT_EQ(shell(exe + " scan --detuning 1 > /dev/null 2>&1"), 3);
  EXPECT_EQ(shell(exe + " verify > /dev/null"), 0);
}

TEST_F(Binary, ByteIdenticalFiles) {
  for (std::string sub : {"scan", "compare --grid 0.5:2.5:200", "ring", "scan --format json"}) {
    const std::string a = dir + "twem_det_a", b = dir + "twem_det_b";
    ASSERT_EQ(shell(exe + " " + sub + " --out " + a + " > /dev/null"), 0);
    ASSERT_EQ(shell(exe + " " + sub + " --out " + b + " > /dev/null"), 0);
    EXPECT_EQ(slurp(a), slurp(b)) << sub;
    EXPECT_FALSE(slurp(a).empty());
  }
}
