// Copyright 2026 The clpenh Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "clpenh/csv.hpp"
#include "clpenh/errors.hpp"
#include "clpenh/transforms/model_io.hpp"
#include "test_support.hpp"

namespace clpenh::cli {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Result r;
  r.code = run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

std::size_t data_rows(const fs::path& csv) { return read_csv(csv).size() - 1; }

// One small corpus shared by the tests that only read it.
class CliCorpus : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new fs::path(testing::scratch_dir("cli_corpus"));
    const auto r = invoke({"synth", "--out-dir", dir_->string(), "--words", "sasa,kaka", "--seeds", "2",
                           "--seed", "3"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
  }
  static void TearDownTestSuite() {
    delete dir_;
    dir_ = nullptr;
  }
  static const fs::path& dir() { return *dir_; }

 private:
  static fs::path* dir_;
};

fs::path* CliCorpus::dir_ = nullptr;

// ---------------------------------------------------------------- synth

TEST_F(CliCorpus, SynthEnumeratesApplicableErrors) {
  // sasa takes GS, PA and PSNAE; kaka takes GS and PA; two seeds each.
  EXPECT_EQ(data_rows(dir() / "manifest.csv"), 10u);
  EXPECT_EQ(data_rows(dir() / "healthy_manifest.csv"), 4u);
  EXPECT_EQ(data_rows(dir() / "templates.csv"), 4u);
  EXPECT_TRUE(fs::exists(dir() / "distorted" / "sasa_PSNAE_s4.wav"));
  EXPECT_FALSE(fs::exists(dir() / "distorted" / "kaka_PSNAE_s3.wav"));
  EXPECT_TRUE(fs::exists(dir() / "healthy" / "kaka_s3.csv"));
  EXPECT_TRUE(fs::exists(dir() / "bank" / "bank.csv"));
  const auto cfg = load_config(dir() / "synth.config.json");
  EXPECT_EQ(cfg.seed, 3u);
  EXPECT_EQ(cfg.synth.seeds, 2);
  EXPECT_EQ(cfg.synth.words, (std::vector<std::string>{"sasa", "kaka"}));
}

TEST(CliSynth, RepeatedRunsAreByteIdentical) {
  const auto a = testing::scratch_dir("cli_synth_a");
  const auto b = testing::scratch_dir("cli_synth_b");
  for (const auto& d : {a, b}) {
    ASSERT_EQ(invoke({"synth", "--out-dir", d.string(), "--words", "tata", "--seed", "9"}).code, kExitOk);
  }
  std::size_t compared = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file() || e.path().filename() == "synth.config.json") continue;
    const auto rel = fs::relative(e.path(), a);
    ASSERT_TRUE(fs::exists(b / rel)) << rel;
    EXPECT_EQ(slurp(e.path()), slurp(b / rel)) << rel;
    ++compared;
  }
  EXPECT_GT(compared, 6u);
}

TEST(CliSynth, BadWordsAndFlagsAreUsageErrors) {
  const auto d = testing::scratch_dir("cli_synth_bad");
  EXPECT_EQ(invoke({"synth", "--out-dir", d.string(), "--words", "papa"}).code, kExitUsage);
  EXPECT_EQ(invoke({"synth", "--out-dir", d.string(), "--errors", "lisp"}).code, kExitUsage);
  EXPECT_EQ(invoke({"synth", "--out-dir", d.string(), "--nasal-depth", "2"}).code, kExitUsage);
  EXPECT_EQ(invoke({"synth"}).code, kExitUsage);
  EXPECT_EQ(invoke({"synth", "--out-dir", d.string(), "--bogus"}).code, kExitUsage);
  EXPECT_EQ(invoke({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(invoke({"--help"}).code, kExitOk);
}

// ---------------------------------------------------------------- training

TEST_F(CliCorpus, TrainGmmWritesLoadableModelAndMonotoneLog) {
  const auto out = testing::scratch_dir("cli_gmm") / "model.gmm";
  const auto r = invoke({"train-gmm", "--manifest", (dir() / "manifest.csv").string(), "--templates",
                         (dir() / "templates.csv").string(), "--out", out.string(), "--components", "2",
                         "--iterations", "30"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto model = transforms::load_gmm(out);
  EXPECT_LE(model.mixture.components(), 2);
  EXPECT_TRUE(fs::exists(fs::path(out.string() + ".config.json")));

  std::istringstream log(r.out);
  std::string line;
  bool in_table = false;
  std::vector<double> ll;
  while (std::getline(log, line)) {
    if (line == "iteration,log_likelihood") {
      in_table = true;
      continue;
    }
    if (!in_table) continue;
    if (line.rfind("pruned,", 0) == 0) break;
    ll.push_back(std::stod(line.substr(line.find(',') + 1)));
  }
  ASSERT_GE(ll.size(), 2u);
  for (std::size_t i = 1; i < ll.size(); ++i) EXPECT_GE(ll[i], ll[i - 1] - 1e-9);
}

TEST_F(CliCorpus, TrainNmfRankLimits) {
  const auto d = testing::scratch_dir("cli_nmf");
  const auto ok = invoke({"train-nmf", "--manifest", (dir() / "manifest.csv").string(), "--templates",
                          (dir() / "templates.csv").string(), "--out", (d / "m.nmf").string(), "--rank", "16",
                          "--iterations", "10"});
  ASSERT_EQ(ok.code, kExitOk) << ok.err;
  EXPECT_EQ(transforms::load_nmf(d / "m.nmf").rank(), 16);
  const auto big = invoke({"train-nmf", "--manifest", (dir() / "manifest.csv").string(), "--templates",
                           (dir() / "templates.csv").string(), "--out", (d / "big.nmf").string(), "--rank",
                           "1000000"});
  EXPECT_EQ(big.code, kExitPartial);
  EXPECT_NE(big.err.find("rank"), std::string::npos) << big.err;
  EXPECT_FALSE(fs::exists(d / "big.nmf"));
}

// ---------------------------------------------------------------- enhance

TEST_F(CliCorpus, ConversionMethodWithoutModelIsUsageError) {
  const auto d = testing::scratch_dir("cli_enh_nomodel");
  EXPECT_EQ(invoke({"enhance", "--manifest", (dir() / "manifest.csv").string(), "--out-dir", d.string(),
                    "--method", "gmm"})
                .code,
            kExitUsage);
  EXPECT_EQ(invoke({"enhance", "--manifest", (dir() / "manifest.csv").string(), "--out-dir", d.string(),
                    "--method", "nmf", "--nmf", (d / "missing.nmf").string()})
                .code,
            kExitUsage);
  EXPECT_EQ(invoke({"enhance", "--manifest", (dir() / "manifest.csv").string(), "--out-dir", d.string(),
                    "--scope", "everything"})
                .code,
            kExitUsage);
}

TEST(CliEnhance, EmptyManifestGivesHeaderOnly) {
  const auto d = testing::scratch_dir("cli_enh_empty");
  write_text(d / "manifest.csv", "wav_path,annotation_path,reference_template_id\n");
  const auto r = invoke({"enhance", "--manifest", (d / "manifest.csv").string(), "--out-dir", (d / "out").string()});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(slurp(d / "out" / "metrics_both.csv"), "word,scope,p_stoi,p_estoi,mcd,status\n");
}

TEST_F(CliCorpus, EnhanceScoresEveryRowAndRecordsConfig) {
  const auto d = testing::scratch_dir("cli_enh_rule");
  const auto r = invoke({"enhance", "--config", (dir() / "synth.config.json").string(), "--manifest",
                         (dir() / "manifest.csv").string(), "--out-dir", d.string(), "--scope", "vowel_only"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto rows = read_csv(d / "metrics_vowel_only.csv");
  ASSERT_EQ(rows.size(), 11u);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i][1], "vowel_only");
    EXPECT_EQ(rows[i][5], "ok");
    EXPECT_FALSE(rows[i][2].empty());
  }
  const auto cfg = load_config(d / "enhance.config.json");
  EXPECT_EQ(cfg.scope, pipeline::Scope::kVowelOnly);
  EXPECT_EQ(fs::path(cfg.models.bank), dir() / "bank" / "bank.csv");
}

TEST_F(CliCorpus, EnhanceIsDeterministic) {
  std::vector<std::string> csvs;
  for (const char* name : {"cli_det_a", "cli_det_b"}) {
    const auto d = testing::scratch_dir(name);
    const auto r = invoke({"enhance", "--config", (dir() / "synth.config.json").string(), "--manifest",
                           (dir() / "manifest.csv").string(), "--out-dir", d.string(), "--jobs", "2"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    csvs.push_back(slurp(d / "metrics_both.csv"));
  }
  EXPECT_EQ(csvs[0], csvs[1]);
}

TEST_F(CliCorpus, EnhancePartialFailureExitsOne) {
  const auto d = testing::scratch_dir("cli_enh_partial");
  std::string manifest = slurp(dir() / "manifest.csv");
  manifest += "missing.wav,missing.csv,sasa_s3\n";
  write_text(dir() / "manifest_partial.csv", manifest);
  const auto r = invoke({"enhance", "--config", (dir() / "synth.config.json").string(), "--manifest",
                         (dir() / "manifest_partial.csv").string(), "--out-dir", d.string()});
  EXPECT_EQ(r.code, kExitPartial);
  const auto rows = read_csv(d / "metrics_both.csv");
  EXPECT_EQ(rows.back()[5], "failed");
}

// ---------------------------------------------------------------- eval

TEST_F(CliCorpus, HealthyWordsScoreNearOne) {
  const auto d = testing::scratch_dir("cli_eval_healthy");
  const auto r = invoke({"eval", "--manifest", (dir() / "healthy_manifest.csv").string(), "--templates",
                         (dir() / "templates.csv").string(), "--out", (d / "m.csv").string(), "--summary",
                         (d / "s.csv").string(), "--plot", (d / "p.svg").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto rows = read_csv(d / "m.csv");
  ASSERT_EQ(rows.size(), 5u);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i][1], "original");
    EXPECT_GE(std::stod(rows[i][2]), 0.99);
  }
  EXPECT_TRUE(fs::exists(fs::path((d / "m.csv").string() + ".config.json")));
  EXPECT_NE(slurp(d / "p.svg").find("<svg"), std::string::npos);
}

TEST_F(CliCorpus, SummaryHoldsGroupMeans) {
  const auto d = testing::scratch_dir("cli_eval_summary");
  const auto r = invoke({"eval", "--manifest", (dir() / "manifest.csv").string(), "--templates",
                         (dir() / "templates.csv").string(), "--out", (d / "m.csv").string(), "--summary",
                         (d / "s.csv").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto rows = read_csv(d / "m.csv");
  const auto summary = read_csv(d / "s.csv");
  ASSERT_EQ(summary.front(), (CsvRow{"word", "error", "scope", "rows", "scored", "p_stoi", "p_estoi", "mcd"}));
  ASSERT_EQ(summary.size(), 6u);  // sasa x3 errors, kaka x2 errors
  // Row stems look like <word>_<error>_s<seed>; average them independently.
  for (std::size_t g = 1; g < summary.size(); ++g) {
    const std::string prefix = summary[g][0] + "_" + summary[g][1] + "_s";
    double sum = 0.0;
    int n = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      if (rows[i][0].rfind(prefix, 0) == 0) {
        sum += std::stod(rows[i][2]);
        ++n;
      }
    }
    ASSERT_EQ(n, 2) << prefix;
    EXPECT_EQ(summary[g][3], "2");
    EXPECT_NEAR(std::stod(summary[g][5]), sum / n, 1e-6) << prefix;
  }
}

TEST_F(CliCorpus, MissingTemplateMarksRowFailed) {
  const auto d = testing::scratch_dir("cli_eval_missing");
  write_text(d / "manifest.csv", "wav_path,annotation_path,reference_template_id\n" +
                                     (dir() / "healthy" / "sasa_s3.wav").string() + "," +
                                     (dir() / "healthy" / "sasa_s3.csv").string() + ",nobody\n");
  const auto r = invoke({"eval", "--manifest", (d / "manifest.csv").string(), "--templates",
                         (dir() / "templates.csv").string(), "--out", (d / "m.csv").string()});
  EXPECT_EQ(r.code, kExitPartial);
  const auto rows = read_csv(d / "m.csv");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1][5], "failed");
  EXPECT_NE(r.err.find("nobody"), std::string::npos);
}

// ---------------------------------------------------------------- config

TEST(CliConfig, DefaultsRoundTripThroughJson) {
  const RunConfig defaults;
  const auto j = to_json(defaults);
  EXPECT_EQ(to_json(config_from_json(j)), j);
  EXPECT_EQ(to_json(config_from_json(nlohmann::json::object())), j);
}

TEST(CliConfig, UnknownAndMistypedKeysAreRejected) {
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"sed": 3})")), ConfigError);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"gmm": {"component": 3}})")), ConfigError);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"seed": "three"})")), ConfigError);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"scope": "sideways"})")), ConfigError);
  const auto d = testing::scratch_dir("cli_config_bad");
  write_text(d / "c.json", R"({"seed": 1, "colour": "blue"})");
  EXPECT_EQ(invoke({"synth", "--out-dir", (d / "o").string(), "--config", (d / "c.json").string()}).code,
            kExitUsage);
  write_text(d / "broken.json", "{ not json");
  EXPECT_EQ(invoke({"synth", "--out-dir", (d / "o").string(), "--config", (d / "broken.json").string()}).code,
            kExitUsage);
}

TEST(CliConfig, FlagsOverrideFileValues) {
  const auto d = testing::scratch_dir("cli_config_override");
  write_text(d / "c.json", R"({"seed": 5, "synth": {"words": ["kaka"], "seeds": 1, "nasal_depth": 0.3}})");
  const auto r = invoke({"synth", "--out-dir", (d / "o").string(), "--config", (d / "c.json").string(), "--seed",
                         "7", "--nasal-depth", "0.6"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto cfg = load_config(d / "o" / "synth.config.json");
  EXPECT_EQ(cfg.seed, 7u);
  EXPECT_DOUBLE_EQ(cfg.synth.nasal_depth, 0.6);
  EXPECT_EQ(cfg.synth.words, (std::vector<std::string>{"kaka"}));
  EXPECT_TRUE(fs::exists(d / "o" / "healthy" / "kaka_s7.wav"));
}

}  // namespace
}  // namespace clpenh::cli
