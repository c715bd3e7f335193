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

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "clpenh/annotation.hpp"
#include "clpenh/audio_io.hpp"
#include "clpenh/metrics.hpp"
#include "clpenh/transforms/gmm.hpp"
#include "clpenh/transforms/insertion.hpp"
#include "clpenh/transforms/nmf.hpp"
#include "clpenh/transforms/segment_transforms.hpp"

namespace clpenh::pipeline {

enum class Transform { kPassthrough, kSpectralCompress, kTemporalEnhance, kInsert, kGmmConvert, kNmfConvert };

enum class Scope { kObstruentOnly, kVowelOnly, kBoth };

enum class Method { kRule, kGmm, kNmf };

// Which segments the GCI-anchored enhancement may touch under the rule
// method: nasalized vowels only, or additionally every nasal consonant.
enum class TemporalGate { kVowelsOnly, kVoicedSonorants };

std::string_view to_string(Transform t);
std::string_view to_string(Scope s);   // obstruent_only / vowel_only / both
std::string_view to_string(Method m);  // rule / gmm / nmf
// Also accepts the short forms obstruent / vowel.
Scope parse_scope(std::string_view token);
Method parse_method(std::string_view token);
TemporalGate parse_gate(std::string_view token);  // vowels / sonorants

struct EnhancementPlan {
  std::vector<Transform> choices;  // one per annotation segment
  Scope scope = Scope::kBoth;
};

// Rule table for `rule`; `gmm`/`nmf` convert every errored segment. Scope is
// applied last: vowel-side segments (vowels, and nasals under the sonorant
// gate) are left alone under ObstruentOnly, obstruents under VowelOnly.
EnhancementPlan default_plan(const WordAnnotation& ann, Scope scope, Method method,
                             TemporalGate gate = TemporalGate::kVowelsOnly);

// Trained models and exemplars a plan may need. Null means unavailable.
struct Resources {
  const transforms::GmmJointModel* gmm = nullptr;
  const transforms::NmfDictionaries* nmf = nullptr;
  const transforms::TemplateBank* bank = nullptr;
};

struct EnhanceConfig {
  transforms::SpectralCompressionConfig compression;
  transforms::TemporalEnhanceConfig temporal;
  double fade_ms = 5.0;
  int nmf_iterations = 100;
};

// Throws ConfigError naming the first segment whose transform lacks a model,
// bank or template.
void check_prerequisites(const WordAnnotation& ann, const EnhancementPlan& plan,
                         const Resources& res);

// Slices the word at segment boundaries (any unannotated head or tail is
// carried along untouched), transforms each slice per the plan and re-joins
// the slices with cross-fades of cfg.fade_ms.
Waveform enhance_word(const Waveform& wav, const WordAnnotation& ann, const EnhancementPlan& plan,
                      const Resources& res = {}, const EnhanceConfig& cfg = {});

// Start of every annotation segment in the output of enhance_word.
std::vector<std::size_t> output_boundaries(const WordAnnotation& ann, std::size_t wav_len,
                                           std::size_t fade);

// Manifest rows `wav_path,annotation_path,reference_template_id`.
struct ManifestRow {
  std::filesystem::path wav;
  std::filesystem::path annotation;
  std::string template_id;
};

// Relative paths resolve against the manifest's directory. Throws IoError if
// unreadable, ParseError on malformed rows.
std::vector<ManifestRow> load_manifest(const std::filesystem::path& path);

struct BatchOptions {
  Scope scope = Scope::kBoth;
  Method method = Method::kRule;
  TemporalGate gate = TemporalGate::kVowelsOnly;
  EnhanceConfig config;
  Resources resources;
  const metrics::TemplateStore* templates = nullptr;  // metrics skipped when null
  std::filesystem::path out_dir;
  int jobs = 1;
};

struct BatchRow {
  std::string word;  // stem of the input wav
  std::filesystem::path output;
  bool ok = false;
  std::string error;
  std::optional<metrics::MetricsReport> metrics;
};

struct BatchReport {
  std::vector<BatchRow> rows;  // manifest order
  bool any_failed() const;
};

BatchReport batch_enhance(const std::filesystem::path& manifest, const BatchOptions& options);
BatchReport batch_enhance(const std::vector<ManifestRow>& rows, const BatchOptions& options);

// Scores the manifest's wavs as they are against their templates.
BatchReport batch_score(const std::vector<ManifestRow>& rows, const metrics::TemplateStore& templates,
                        int jobs = 1);

// `word,scope,p_stoi,p_estoi,mcd,status` with six-decimal fixed values; the
// metric fields are empty when a row failed or was not scored.
std::string format_metrics_csv(const BatchReport& report, std::string_view scope_label);

}  // namespace clpenh::pipeline
