#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "sar/checkpoint.h"
#include "sar/config.h"
#include "sar/error.h"
#include "sar/manifest.h"

namespace sar {
namespace {

Errc code_of(const std::string& text, std::string* message = nullptr) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    if (message) *message = e.what();
    return e.code();
  }
  ADD_FAILURE() << "no error for: " << text;
  return Errc::kIo;
}

TEST(Config, EmptyFileGivesDefaults) {
  const ConfigDocument d = parse_config("");
  EXPECT_EQ(d, default_config());
  EXPECT_EQ(d.real("rewards.K"), 1.0);
  EXPECT_EQ(d.integer("rewards.v_thresh"), 1);
  EXPECT_EQ(d.real("rewards.beta0"), 0.1);
  EXPECT_EQ(d.real("rewards.gamma"), 0.99);
  EXPECT_EQ(d.integer("eval.cap"), 18000);
  EXPECT_TRUE(d.warnings.empty());
}

TEST(Config, EveryDocumentedKeyHasADefault) {
  const ConfigDocument d = default_config();
  for (const KeyInfo& k : documented_keys()) EXPECT_EQ(d.values.count(k.key), 1u) << k.key;
  EXPECT_EQ(d.values.size(), documented_keys().size());
}

TEST(Config, OutOfRangeK) {
  std::string msg;
  EXPECT_EQ(code_of("rewards.K = 2.0\n", &msg), Errc::kOutOfRange);
  EXPECT_NE(msg.find("line 1"), std::string::npos);
  EXPECT_EQ(code_of("rewards.K = 0\n"), Errc::kOutOfRange);
  EXPECT_EQ(parse_config("rewards.K = 1.0\n").real("rewards.K"), 1.0);
}

TEST(Config, LinePreciseErrors) {
  std::string msg;
  EXPECT_EQ(code_of("# header\n\nsac.batch_size = 12\nrun.bogus = 1\n", &msg), Errc::kUnknownKey);
  EXPECT_NE(msg.find("line 4"), std::string::npos) << msg;
  EXPECT_EQ(code_of("sac.batch_size = twelve\n", &msg), Errc::kTypeMismatch);
  EXPECT_NE(msg.find("line 1"), std::string::npos) << msg;
  EXPECT_EQ(code_of("\nrun.randomize_targets = maybe\n", &msg), Errc::kTypeMismatch);
  EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;
  EXPECT_EQ(code_of("run.structure = hybrid\n"), Errc::kTypeMismatch);
  EXPECT_EQ(code_of("just words\n"), Errc::kTypeMismatch);
}

TEST(Config, NearMissFuzzNeverCrashes) {
  const std::vector<std::string> lines = {"rewards.K = 0.5", "sac.hidden = 32", "eval.case = II", "run.seed = 4",
                                          "run.randomize_targets = true", "rewards.gamma = 0.9"};
  Rng rng(3);
  const std::string junk = "=#.-+ xe09\t\"'";
  for (int i = 0; i < 3000; ++i) {
    std::string text;
    for (int l = 0; l < 3; ++l) {
      std::string line = lines[uniform_index(rng, static_cast<int>(lines.size()))];
      const int edits = uniform_index(rng, 3);
      for (int e = 0; e < edits && !line.empty(); ++e) {
        const int pos = uniform_index(rng, static_cast<int>(line.size()));
        switch (uniform_index(rng, 3)) {
          case 0: line.erase(pos, 1); break;
          case 1: line.insert(line.begin() + pos, junk[uniform_index(rng, static_cast<int>(junk.size()))]); break;
          default: line[pos] = junk[uniform_index(rng, static_cast<int>(junk.size()))];
        }
      }
      text += line + "\n";
    }
    try {
      parse_config(text);
    } catch (const Error& e) {
      EXPECT_NE(std::string(e.what()).find("line "), std::string::npos) << text;
    }
  }
}

TEST(Config, DuplicateKeysWarnAndLastWins) {
  const ConfigDocument d = parse_config("sac.hidden = 16\nsac.hidden = 32\n");
  EXPECT_EQ(d.integer("sac.hidden"), 32);
  ASSERT_EQ(d.warnings.size(), 1u);
  EXPECT_EQ(d.warnings[0].line, 2);
}

TEST(Config, CanonicalRoundTrip) {
  const ConfigDocument d =
      parse_config("rewards.K = 0.3\n# c\nrun.structure = baseline\neval.case = III\nsac.tau = 1e-3\nrun.seed = 9\n");
  const std::string text = serialize_config(d);
  const ConfigDocument e = parse_config(text);
  EXPECT_EQ(e, d);
  EXPECT_EQ(serialize_config(e), text);
}

TEST(Config, RunConfigMapping) {
  ConfigDocument d = default_config();
  d.set("rewards.gamma", "0.95");
  d.set("run.structure", "baseline");
  d.set("run.coop_agents", "3");
  const RunConfig rc = run_config_from(d, load_map("CCC.T\n"));
  EXPECT_EQ(rc.sac.gamma, 0.95);
  EXPECT_EQ(rc.rewards.gamma, 0.95);
  EXPECT_EQ(rc.rewards.structure, RewardStructure::kBaseline);
  EXPECT_EQ(rc.n_coop, 3);
  EXPECT_EQ(rc.config_text, serialize_config(d));
  EXPECT_THROW(d.set("sac.batch_size", "0"), Error);
}

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("sar_cfg_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::filesystem::path dir_;
};

TEST_F(TempDir, ManifestTracksMapChecksums) {
  const std::string path = (dir_ / "m.txt").string();
  write_file(path, "C..T\n");
  const RunManifest m = make_manifest("a = 1\n", 7, {path});
  ASSERT_EQ(m.map_checksums.size(), 1u);
  EXPECT_EQ(m.map_checksums[0].second.size(), 64u);
  EXPECT_EQ(m.code_version, code_version());
  EXPECT_EQ(parse_manifest(manifest_json(m)), m);
  EXPECT_TRUE(stale_maps(m).empty());
  write_file(path, "C.T.\n");
  EXPECT_EQ(stale_maps(m), std::vector<std::string>{path});
  EXPECT_THROW(parse_manifest("{not json"), Error);
}

TEST_F(TempDir, CheckpointFileRoundTripAndTamper) {
  Rng rng(5);
  Checkpoint c;
  c.config_text = serialize_config(default_config());
  c.manifest_json = manifest_json(RunManifest{c.config_text, 3, code_version(), {}, {}});
  c.n_coop = 1;
  c.obs_size = 4;
  c.state_size = 3;
  TeamModel t;
  t.actors.emplace_back(4, kNumHeads, 5, OptimizerConfig{}, rng);
  t.critic = CentralCritic(3, 1, kNumHeads, 5, OptimizerConfig{}, rng);
  c.coop = t;
  const std::string path = (dir_ / "c.ckpt").string();
  write_file(path, save_checkpoint(c));
  const Checkpoint d = load_checkpoint(read_file(path));
  EXPECT_EQ(d.config_text, c.config_text);
  EXPECT_EQ(parse_manifest(d.manifest_json).seed, 3u);
  EXPECT_EQ(save_checkpoint(d), save_checkpoint(c));

  std::string bytes = read_file(path);
  bytes.resize(bytes.size() - 5);
  try {
    load_checkpoint(bytes);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kCorruptCheckpoint);
  }
  EXPECT_THROW(read_file((dir_ / "missing").string()), Error);
}

}  // namespace
}  // namespace sar
