// Drives the ftrack executable end to end.
#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include "ftrack/commands.hpp"
#include "ftrack/csv.hpp"

namespace ftrack {
namespace {

namespace fs = std::filesystem;

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("ftrack_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  // Exit status of `ftrack <args>`; stdout and stderr go to files in dir_.
  int Run(const std::string& args) {
    const std::string cmd = std::string(FTRACK_CLI_PATH) + " " + args + " >" +
                            (dir_ / "stdout.txt").string() + " 2>" +
                            (dir_ / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string Read(const fs::path& p) const {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  void Write(const fs::path& p, const std::string& text) const {
    std::ofstream(p, std::ios::binary) << text;
  }

  std::string P(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

TEST_F(Cli, GenPathStraight) {
  ASSERT_EQ(Run("gen-path --kind straight --length 100 --output " + P("s.csv")), 0);
  const CsvTable t = ParseCsv(Read(dir_ / "s.csv"), ErrorCode::kMalformedCsv);
  EXPECT_EQ(t.header, (std::vector<std::string>{"x", "y"}));
  ASSERT_EQ(t.rows.size(), 101u);
  EXPECT_EQ(ParseDouble(t.rows.front()[0]), 0.0);
  EXPECT_EQ(ParseDouble(t.rows.back()[0]), 100.0);
  EXPECT_EQ(ParseDouble(t.rows.back()[1]), 0.0);
}

TEST_F(Cli, GenPathCircle) {
  ASSERT_EQ(Run("gen-path --kind circle --radius 10 --output " + P("c.csv")), 0);
  const CsvTable t = ParseCsv(Read(dir_ / "c.csv"), ErrorCode::kMalformedCsv);
  ASSERT_FALSE(t.rows.empty());
  for (const auto& r : t.rows) {
    const double x = ParseDouble(r[0]), y = ParseDouble(r[1]);
    EXPECT_NEAR(std::hypot(x, y - 10.0), 10.0, 1e-9);
  }
}

TEST_F(Cli, GenPathSineAmplitude) {
  ASSERT_EQ(Run("gen-path --kind sine --output " + P("sine.csv")), 0);
  const CsvTable t = ParseCsv(Read(dir_ / "sine.csv"), ErrorCode::kMalformedCsv);
  ASSERT_EQ(t.rows.size(), 201u);
  std::vector<Waypoint> w;
  double max_y = 0.0;
  for (const auto& r : t.rows) {
    w.push_back({ParseDouble(r[0]), ParseDouble(r[1])});
    max_y = std::max(max_y, std::abs(w.back().y));
  }
  // Crests fall between 1 m samples; the interpolated path reaches them.
  EXPECT_LE(max_y, 3.0);
  EXPECT_GT(max_y, 3.0 * std::cos(std::numbers::pi / 50.0) - 1e-12);
  const ReferencePath path(w);
  double spline_max = 0.0;
  for (double s = 0.0; s <= path.total_length(); s += 0.01) {
    spline_max = std::max(spline_max, std::abs(path.Sample(s).y));
  }
  EXPECT_NEAR(spline_max, 3.0, 1e-3);
}

TEST_F(Cli, GenPathRejectsBadParams) {
  EXPECT_EQ(Run("gen-path --kind circle --radius -1 --output " + P("c.csv")), 1);
  EXPECT_EQ(Run("gen-path --kind spiral --output " + P("c.csv")), 1);
}

TEST_F(Cli, TransformStraightRow) {
  ASSERT_EQ(Run("gen-path --kind straight --output " + P("path.csv")), 0);
  Write(dir_ / "in.csv", "x,y,theta,v,a,kappa\n3,2,0,5,0,0\n");
  ASSERT_EQ(Run("transform --path " + P("path.csv") + " --input " + P("in.csv") +
                " --output " + P("out.csv")),
            0);
  const CsvTable t = ParseCsv(Read(dir_ / "out.csv"), ErrorCode::kMalformedCsv);
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0].back(), "ok");
  EXPECT_NEAR(ParseDouble(t.rows[0][0]), 3.0, 1e-9);  // s
  EXPECT_NEAR(ParseDouble(t.rows[0][1]), 5.0, 1e-12);  // s_dot
  EXPECT_NEAR(ParseDouble(t.rows[0][3]), 2.0, 1e-12);  // l
}

TEST_F(Cli, TransformHeaderOnly) {
  ASSERT_EQ(Run("gen-path --kind straight --output " + P("path.csv")), 0);
  Write(dir_ / "in.csv", "x,y,theta,v,a,kappa\n");
  ASSERT_EQ(Run("transform --path " + P("path.csv") + " --input " + P("in.csv") +
                " --output " + P("out.csv")),
            0);
  EXPECT_EQ(Read(dir_ / "out.csv"), std::string(kTransformHeader) + "\n");
}

TEST_F(Cli, TransformMarksSingularRows) {
  ASSERT_EQ(Run("gen-path --kind circle --output " + P("path.csv")), 0);
  // Second row sits on the centre of curvature; third is perpendicular.
  Write(dir_ / "in.csv",
        "x,y,theta,v,a,kappa\n10,10,1.5707963267948966,3,0,0.1\n0,10,0,3,0,0\n"
        "10,10,0,3,0,0\n");
  EXPECT_EQ(Run("transform --path " + P("path.csv") + " --input " + P("in.csv") +
                " --output " + P("out.csv")),
            1);
  const CsvTable t = ParseCsv(Read(dir_ / "out.csv"), ErrorCode::kMalformedCsv);
  ASSERT_EQ(t.rows.size(), 3u);
  EXPECT_EQ(t.rows[0].back(), "ok");
  EXPECT_NE(t.rows[1].back(), "ok");
  EXPECT_TRUE(t.rows[1][0].empty());
  EXPECT_NE(t.rows[2].back(), "ok");
  EXPECT_NE(Read(dir_ / "stderr.txt").find("2 row"), std::string::npos);
}

TEST_F(Cli, TransformErrors) {
  ASSERT_EQ(Run("gen-path --kind straight --output " + P("path.csv")), 0);
  Write(dir_ / "bad.csv", "x,y,theta\n1,2,3\n");
  EXPECT_EQ(Run("transform --path " + P("path.csv") + " --input " + P("bad.csv") +
                " --output " + P("out.csv")),
            1);
  EXPECT_NE(Read(dir_ / "stderr.txt").find("MalformedCsv"), std::string::npos);
  Write(dir_ / "in.csv", "x,y,theta,v,a,kappa\n");
  EXPECT_EQ(Run("transform --path " + P("missing.csv") + " --input " + P("in.csv") +
                " --output " + P("out.csv")),
            2);
  EXPECT_EQ(Run("transform --path " + P("path.csv") + " --input " + P("in.csv") +
                " --output " + P("no/such/dir/out.csv")),
            2);
}

TEST_F(Cli, TrainZeroEpisodesWritesHeaderAndInitialAgent) {
  Write(dir_ / "cfg.json", R"({"train": {"episodes": 0, "seed": 4}})");
  ASSERT_EQ(Run("train --config " + P("cfg.json") + " --out " + P("run")), 0);
  EXPECT_EQ(Read(dir_ / "run" / "metrics.csv"), std::string(kMetricsHeader) + "\n");
  AgentConfig ac;
  ac.seed = 4;
  const Agent fresh(kFrenetObsDim, 1, ac);
  const Agent saved = DeserializeAgentText(Read(dir_ / "run" / "checkpoint_final.json"));
  EXPECT_EQ(saved.actor(), fresh.actor());
  EXPECT_EQ(saved.critic(), fresh.critic());
  EXPECT_TRUE(fs::exists(dir_ / "run" / "checkpoint_best.json"));
}

TEST_F(Cli, TrainIsDeterministicAndEvalRoundTrips) {
  Write(dir_ / "cfg.json",
        R"({"train": {"episodes": 4, "seed": 2, "eval_every": 2, "eval_episodes": 2},
            "agent": {"warmup_steps": 100, "batch_size": 32}})");
  ASSERT_EQ(Run("train --quiet --config " + P("cfg.json") + " --out " + P("a")), 0);
  ASSERT_EQ(Run("train --quiet --config " + P("cfg.json") + " --out " + P("b")), 0);
  const std::string metrics = Read(dir_ / "a" / "metrics.csv");
  EXPECT_EQ(metrics, Read(dir_ / "b" / "metrics.csv"));
  const auto rows = ParseMetricsCsv(metrics);
  ASSERT_EQ(rows.size(), 4u);
  for (std::size_t i = 0; i < rows.size(); ++i) EXPECT_EQ(rows[i].episode, i);

  ASSERT_EQ(Run("eval --checkpoint " + P("a/checkpoint_final.json") + " --config " +
                P("cfg.json") + " --episodes 3 --out " + P("ev")),
            0);
  const CsvTable traj = ParseCsv(Read(dir_ / "ev" / "trajectory.csv"), ErrorCode::kMalformedCsv);
  EXPECT_EQ(traj.header, (std::vector<std::string>{"t", "x", "y", "theta", "v", "s", "l",
                                                   "l_dot", "reward"}));
  const auto summary = nlohmann::json::parse(Read(dir_ / "ev" / "summary.json"));
  const double completion = summary.at("completion_rate").get<double>();
  EXPECT_GE(completion, 0.0);
  EXPECT_LE(completion, 1.0);
  for (const char* key : {"mean_abs_lateral", "rms_lateral", "max_abs_lateral", "mean_return"}) {
    EXPECT_TRUE(summary.contains(key)) << key;
  }
}

TEST_F(Cli, EvalPurePursuitOnStraightPath) {
  ASSERT_EQ(Run("gen-path --kind straight --output " + P("path.csv")), 0);
  Write(dir_ / "cfg.json",
        R"({"path_file": "path.csv",
            "task": {"init_lateral_range": 0.0, "init_heading_range": 0.0}})");
  ASSERT_EQ(Run("eval --controller pure-pursuit --config " + P("cfg.json") +
                " --episodes 2 --out " + P("ev")),
            0);
  const auto summary = nlohmann::json::parse(Read(dir_ / "ev" / "summary.json"));
  EXPECT_LT(summary.at("rms_lateral").get<double>(), 0.01);
  EXPECT_EQ(summary.at("completion_rate").get<double>(), 1.0);
}

TEST_F(Cli, EvalRejectsMismatchedCheckpoint) {
  Write(dir_ / "cfg.json", R"({"train": {"episodes": 0}})");
  ASSERT_EQ(Run("train --quiet --config " + P("cfg.json") + " --out " + P("run")), 0);
  Write(dir_ / "cart.json", R"({"task": {"obs_mode": "cartesian"}})");
  EXPECT_EQ(Run("eval --checkpoint " + P("run/checkpoint_final.json") + " --config " +
                P("cart.json") + " --out " + P("ev")),
            1);
  EXPECT_NE(Read(dir_ / "stderr.txt").find("CheckpointMismatch"), std::string::npos);
}

TEST_F(Cli, ConfigAndIoErrors) {
  Write(dir_ / "bad.json", R"({"task": {"w_l": -1}})");
  EXPECT_EQ(Run("train --config " + P("bad.json") + " --out " + P("run")), 1);
  Write(dir_ / "unknown.json", R"({"trian": {}})");
  EXPECT_EQ(Run("train --config " + P("unknown.json") + " --out " + P("run")), 1);
  EXPECT_EQ(Run("train --config " + P("absent.json") + " --out " + P("run")), 2);
  Write(dir_ / "nopath.json", R"({"path_file": "absent.csv"})");
  EXPECT_EQ(Run("train --config " + P("nopath.json") + " --out " + P("run")), 2);
  EXPECT_EQ(Run("eval --checkpoint " + P("absent.json") + " --config " + P("unknown.json") +
                " --out " + P("ev")),
            1);
  Write(dir_ / "ok.json", "{}");
  EXPECT_EQ(Run("eval --checkpoint " + P("absent.json") + " --config " + P("ok.json") +
                " --out " + P("ev")),
            2);
  EXPECT_EQ(Run("bogus"), 1);
}

}  // namespace
}  // namespace ftrack
