#include <gtest/gtest.h>

#include "test_util.hpp"

using testutil::run_command;
using testutil::TempDir;

namespace {

const std::string kCli = AUCAP_CLI_PATH;

testutil::CommandResult cli(const std::string& args) { return run_command("'" + kCli + "' " + args); }

}  // namespace

TEST(Cli, HelpListsEveryFlag) {
  const std::vector<std::pair<std::string, std::vector<std::string>>> commands{
      {"extract-features", {"--config", "--csv", "--format", "--split", "--media", "--variant", "--cache", "--out"}},
      {"build-sve", {"--config", "--csv", "--format", "--lexicon", "--out"}},
      {"train-w2v", {"--config", "--csv", "--epochs", "--seed", "--out"}},
      {"train-mlp", {"--config", "--variant", "--epochs", "--batch", "--lr", "--hidden", "--dropout", "--seed", "--out"}},
      {"train-captioner", {"--config", "--variant", "--use-sve", "--epochs", "--batch", "--max-len", "--seed", "--out"}},
      {"predict", {"--config", "--csv", "--variant", "--use-sve", "--max-len", "--out"}},
      {"evaluate", {"--config", "--candidates", "--references", "--out"}},
      {"gradcheck", {"--config", "--seed"}},
  };
  const auto top = cli("--help");
  EXPECT_EQ(top.exit_code, 0);
  for (const auto& [name, flags] : commands) {
    EXPECT_NE(top.output.find(name), std::string::npos) << name;
    const auto r = cli(name + " --help");
    EXPECT_EQ(r.exit_code, 0) << name;
    for (const auto& f : flags) EXPECT_NE(r.output.find(f), std::string::npos) << name << " " << f;
  }
}

TEST(Cli, UnknownFlagsAndBadValuesAreRejected) {
  EXPECT_NE(cli("gradcheck --bogus 1").exit_code, 0);
  EXPECT_NE(cli("train-captioner --variant mfcc").exit_code, 0);
  EXPECT_NE(cli("train-captioner --use-sve maybe").exit_code, 0);
  EXPECT_NE(cli("no-such-command").exit_code, 0);
}

TEST(Cli, PredictBeforeTrainingNamesTheCheckpoint) {
  TempDir dir("cli");
  testutil::write_text(dir / "g.csv", "clip_id,caption\na,dog barks\n");
  const auto r = cli("predict --csv '" + (dir / "g.csv").string() + "' --format generic --out '" +
                     dir.path().string() + "'");
  EXPECT_EQ(r.exit_code, 3);
  EXPECT_NE(r.output.find("checkpoint not found"), std::string::npos) << r.output;
}

TEST(Cli, EvaluatePerfectCandidates) {
  TempDir dir("cli");
  testutil::write_text(dir / "c.tsv", "a\tA dog barks loudly\nb\train falls on the roof\n");
  const auto r = cli("evaluate --candidates '" + (dir / "c.tsv").string() + "' --references '" +
                     (dir / "c.tsv").string() + "' --out '" + dir.path().string() + "'");
  EXPECT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NE(r.output.find("B-1: 1.000000"), std::string::npos) << r.output;
  EXPECT_NE(testutil::read_text(dir / "scores.txt").find("B-1: 1.000000"), std::string::npos);
}

TEST(Cli, EvaluateMissingInput) {
  TempDir dir("cli");
  const auto r = cli("evaluate --candidates '" + (dir / "none.tsv").string() + "' --references '" +
                     (dir / "none.tsv").string() + "'");
  EXPECT_EQ(r.exit_code, 3);
}

TEST(Cli, ConfigFileWithFlagPrecedence) {
  TempDir dir("cli");
  testutil::write_text(dir / "c.tsv", "a\tdog barks\nb\train falls\n");
  testutil::write_text(dir / "run.ini", "candidates = " + (dir / "c.tsv").string() +
                                            "\nreferences = " + (dir / "missing.tsv").string() + "\n");
  const auto from_file = cli("evaluate --config '" + (dir / "run.ini").string() + "'");
  EXPECT_EQ(from_file.exit_code, 3);  // the file's references path does not exist
  const auto overridden = cli("evaluate --config '" + (dir / "run.ini").string() + "' --references '" +
                              (dir / "c.tsv").string() + "'");
  EXPECT_EQ(overridden.exit_code, 0) << overridden.output;
  EXPECT_NE(overridden.output.find("references = " + (dir / "c.tsv").string()), std::string::npos)
      << overridden.output;

  testutil::write_text(dir / "bad.ini", "no_such_key = 1\n");
  EXPECT_EQ(cli("evaluate --config '" + (dir / "bad.ini").string() + "'").exit_code, 2);
}

TEST(Cli, GradcheckPasses) {
  const auto r = cli("gradcheck --seed 3");
  EXPECT_EQ(r.exit_code, 0) << r.output;
  for (const char* layer : {"dense", "gru_cell", "bigru", "embedding", "batch_norm", "mlp", "captioner"}) {
    EXPECT_NE(r.output.find(layer), std::string::npos) << layer;
  }
}
