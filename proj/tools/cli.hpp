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


#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "clpenh/pipeline.hpp"
#include "clpenh/transforms/gmm.hpp"

namespace clpenh::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitPartial = 1;  // some rows failed, or a command failed at run time
inline constexpr int kExitUsage = 2;    // bad flags or configuration

struct SynthSettings {
  std::vector<std::string> words{"sasa", "kaka", "tata", "TaTa"};
  std::vector<std::string> errors{"GS", "PA", "PSNAE", "velar"};
  double nasal_depth = 0.8;
  int seeds = 1;  // consecutive seeds starting at RunConfig::seed
  double f0 = 220.0;
};

struct ModelPaths {
  std::string gmm;
  std::string nmf;
  std::string bank;  // template bank index CSV
};

// Every field has a default; a JSON file may set any subset of them.
struct RunConfig {
  std::uint64_t seed = 0;
  int jobs = 1;
  int sample_rate = kEnhancementRate;  // processing rate, fixed
  int metrics_rate = kMetricsRate;     // scoring rate, fixed
  pipeline::Scope scope = pipeline::Scope::kBoth;
  pipeline::Method method = pipeline::Method::kRule;
  pipeline::TemporalGate gate = pipeline::TemporalGate::kVowelsOnly;
  pipeline::EnhanceConfig enhance;
  transforms::GmmTrainOptions gmm;
  int gmm_order = dsp::kDefaultCepstralOrder;
  int nmf_rank = 64;
  ModelPaths models;
  std::string templates;  // template index CSV
  SynthSettings synth;

  // Throws ConfigError.
  void validate() const;
};

nlohmann::json to_json(const RunConfig& cfg);
// Unknown keys and wrongly typed values throw ConfigError. Missing keys keep
// their defaults.
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);
// Pretty-printed, keys sorted, trailing newline.
void write_config(const RunConfig& cfg, const std::filesystem::path& path);

// Runs one command line (args excludes the program name) and returns the
// exit code. Nothing is thrown.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace clpenh::cli
