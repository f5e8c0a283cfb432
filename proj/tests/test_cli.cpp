#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <string>
#include <utility>

#include <gtest/gtest.h>

#include "support/builders.hpp"

namespace {

using tnt::testing::read_text;
using tnt::testing::TempDir;

struct CliRun {
  int status = -1;
  std::string output;
};

CliRun cli(const std::string& args) {
  const std::string cmd = std::string(TNT_CLI_PATH) + " " + args + " 2>&1";
  CliRun r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  while (const std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe)) r.output.append(buf.data(), n);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string value_of(const std::string& report, const std::string& key) {
  const auto pos = report.find(key + "=");
  if (pos == std::string::npos) return {};
  const auto start = pos + key.size() + 1;
  return report.substr(start, report.find('\n', start) - start);
}

const std::string kSmallNet =
    "-s net.T=16 -s net.d_ap=8 -s net.channels=4 -s net.fc_hidden=32 -s train.steps=60 "
    "-s train.batch_size=8 -s seed=3";
const std::string kScene = "-s scene.n_frames=40 -s scene.n_targets=3 -s scene.feature_noise_sigma=0 -s seed=3";

class CliPipeline : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir = new TempDir();
    ASSERT_EQ(cli("synth " + kScene + " -o " + (*dir / "ds").string()).status, 0);
  }
  static void TearDownTestSuite() {
    delete dir;
    dir = nullptr;
  }
  static std::string path(const std::string& name) { return (*dir / name).string(); }
  static TempDir* dir;
};
TempDir* CliPipeline::dir = nullptr;

TEST_F(CliPipeline, SynthWritesDatasetAndEchoesConfig) {
  const CliRun r = cli("synth " + kScene + " -o " + path("ds2"));
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_NE(r.output.find("# resolved config (seed 3)"), std::string::npos);
  EXPECT_NE(r.output.find("scene.n_frames = 40"), std::string::npos);
  for (const char* f : {"det.txt", "gt.txt", "features.csv", "matches.txt", "meta.txt"}) {
    EXPECT_EQ(read_text(path("ds") + "/" + f), read_text(path("ds2") + "/" + f)) << f;
  }
}

TEST_F(CliPipeline, TrainTrackEvalIsPerfectOnNoiselessScene) {
  const CliRun train = cli("train " + kSmallNet + " -d " + path("ds") + " -o " + path("w.bin"));
  ASSERT_EQ(train.status, 0) << train.output;
  const std::string loss = read_text(path("w.bin.loss.csv"));
  EXPECT_EQ(loss.rfind("step,loss,lr\n", 0), 0u);

  const CliRun track = cli("track " + kSmallNet + " -d " + path("ds") + " -w " + path("w.bin") + " -o " +
                        path("res.txt"));
  ASSERT_EQ(track.status, 0) << track.output;

  const CliRun eval = cli("eval -g " + path("ds") + "/gt.txt -r " + path("res.txt") + " -o " +
                       path("report.txt") + " --csv " + path("report.csv"));
  ASSERT_EQ(eval.status, 0) << eval.output;
  const std::string report = read_text(path("report.txt"));
  EXPECT_EQ(value_of(report, "mota"), "1");
  EXPECT_EQ(value_of(report, "idf1"), "1");
  EXPECT_EQ(read_text(path("report.csv")).rfind("mota,idf1,", 0), 0u);
}

TEST_F(CliPipeline, RerunsAreByteIdentical) {
  const std::string w = kSmallNet + " -s track.scorer=bhattacharyya";
  for (const char* tag : {"a", "b"}) {
    const std::string t(tag);
    ASSERT_EQ(cli("train " + kSmallNet + " -d " + path("ds") + " -o " + path("w" + t)).status, 0);
    ASSERT_EQ(cli("track " + kSmallNet + " -d " + path("ds") + " -w " + path("w" + t) + " -o " + path("r" + t)).status, 0);
    ASSERT_EQ(cli("track " + w + " -d " + path("ds") + " -o " + path("rb" + t)).status, 0);
    ASSERT_EQ(cli("eval -g " + path("ds") + "/gt.txt -r " + path("r" + t) + " -o " + path("e" + t)).status, 0);
    ASSERT_EQ(cli("assoc-eval -d " + path("ds") + " -o " + path("x" + t)).status, 0);
    ASSERT_EQ(cli("plot -r " + path("r" + t) + " -d " + path("ds") + " -o " + path("p" + t)).status, 0);
  }
  for (const char* f : {"w", "w.loss.csv", "r", "rb", "e", "x", "p"}) {
    std::string name(f);
    const auto dot = name.find('.');
    const std::string a = dot == std::string::npos ? name + "a" : name.substr(0, dot) + "a" + name.substr(dot);
    const std::string b = dot == std::string::npos ? name + "b" : name.substr(0, dot) + "b" + name.substr(dot);
    EXPECT_EQ(read_text(path(a)), read_text(path(b))) << f;
  }
}

TEST_F(CliPipeline, AssocEvalWritesBothRows) {
  ASSERT_EQ(cli("assoc-eval -d " + path("ds") + " -o " + path("assoc.csv")).status, 0);
  const std::string csv = read_text(path("assoc.csv"));
  EXPECT_EQ(csv.rfind("use_eg,fdr,fnr,tp,fp,fn\nfalse,", 0), 0u) << csv;
  EXPECT_NE(csv.find("\ntrue,"), std::string::npos);
}

TEST(Cli, UnknownConfigKeyIsNamed) {
  TempDir dir;
  const CliRun r = cli("synth -s scene.bogus=1 -o " + (dir / "ds").string());
  EXPECT_EQ(r.status, 3);
  EXPECT_NE(r.output.find("scene.bogus"), std::string::npos) << r.output;
}

TEST(Cli, ConfigFileIsRead) {
  TempDir dir;
  tnt::testing::write_text(dir / "run.cfg", "scene.n_frames = 12\nscene.n_targets = 2\n");
  const CliRun r = cli("synth -c " + (dir / "run.cfg").string() + " -o " + (dir / "ds").string());
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_NE(read_text(dir / "ds/meta.txt").find("frames=12"), std::string::npos);
}

TEST(Cli, MissingInputIsIoError) {
  TempDir dir;
  const CliRun r = cli("track -s track.scorer=bhattacharyya -d " + (dir / "none").string() + " -o " +
                    (dir / "r.txt").string());
  EXPECT_EQ(r.status, 4) << r.output;
}

TEST(Cli, UsageErrorWithoutSubcommandArgs) {
  EXPECT_EQ(cli("eval").status, 2);
}

TEST(Cli, PredictBoxPureTranslation) {
  // F = [e]x with e = (1, 0, 0): horizontal epipolar lines.
  const CliRun r = cli("predict-box --box 100,50,20,40 --F 0,0,0,0,0,-1,0,1,0");
  ASSERT_EQ(r.status, 0) << r.output;
  for (const auto& [key, want] : {std::pair{"cx=", 100.0}, {"cy=", 50.0}, {" w=", 20.0}, {" h=", 40.0}}) {
    const auto pos = r.output.find(key);
    ASSERT_NE(pos, std::string::npos) << r.output;
    EXPECT_NEAR(std::stod(r.output.substr(pos + std::string(key).size())), want, 1e-6) << key;
  }
}

}  // namespace
