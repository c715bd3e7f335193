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


#include <fstream>

#include "cli.hpp"
#include "clpenh/errors.hpp"

namespace clpenh::cli {
namespace {

using nlohmann::json;

std::string gate_token(pipeline::TemporalGate g) {
  return g == pipeline::TemporalGate::kVowelsOnly ? "vowels" : "sonorants";
}

// Every key of `given` must exist in `known`, recursively through objects.
void reject_unknown(const json& given, const json& known, const std::string& where) {
  if (!given.is_object()) return;
  for (const auto& [key, value] : given.items()) {
    const std::string path = where.empty() ? key : where + "." + key;
    if (!known.contains(key)) throw ConfigError("unknown configuration key '" + path + "'");
    if (known.at(key).is_object()) {
      if (!value.is_object()) throw ConfigError("configuration key '" + path + "' must be an object");
      reject_unknown(value, known.at(key), path);
    }
  }
}

}  // namespace

void RunConfig::validate() const {
  if (jobs < 1) throw ConfigError("jobs must be at least 1");
  if (sample_rate != kEnhancementRate) {
    throw ConfigError("sample_rate must be " + std::to_string(kEnhancementRate));
  }
  if (metrics_rate != kMetricsRate) throw ConfigError("metrics_rate must be " + std::to_string(kMetricsRate));
  if (!(enhance.fade_ms >= 0.0)) throw ConfigError("fade_ms must be non-negative");
  if (enhance.nmf_iterations < 1) throw ConfigError("nmf.iterations must be at least 1");
  enhance.compression.validate(sample_rate);
  enhance.temporal.validate();
  if (gmm.components < 1 || gmm.max_iterations < 0 || gmm.kmeans_iterations < 0) {
    throw ConfigError("gmm.components must be positive and iteration counts non-negative");
  }
  if (!(gmm.tolerance >= 0.0) || !(gmm.regularization >= 0.0) || !(gmm.prune_weight >= 0.0)) {
    throw ConfigError("gmm tolerance, regularization and prune_weight must be non-negative");
  }
  if (gmm_order < 2) throw ConfigError("gmm.order must be at least 2");
  if (nmf_rank < 1) throw ConfigError("nmf.rank must be at least 1");
  if (!(synth.nasal_depth >= 0.0 && synth.nasal_depth <= 1.0)) {
    throw ConfigError("synth.nasal_depth must lie in [0, 1]");
  }
  if (synth.seeds < 1) throw ConfigError("synth.seeds must be at least 1");
  if (!(synth.f0 > 0.0)) throw ConfigError("synth.f0 must be positive");
}

nlohmann::json to_json(const RunConfig& c) {
  const auto& e = c.enhance;
  return json{
      {"seed", c.seed},
      {"jobs", c.jobs},
      {"sample_rate", c.sample_rate},
      {"metrics_rate", c.metrics_rate},
      {"scope", std::string(pipeline::to_string(c.scope))},
      {"method", std::string(pipeline::to_string(c.method))},
      {"gate", gate_token(c.gate)},
      {"fade_ms", e.fade_ms},
      {"compression",
       {{"cutoff_hz", e.compression.cutoff_hz},
        {"low_band_gain", e.compression.low_band_gain},
        {"preserve_total_energy", e.compression.preserve_total_energy}}},
      {"temporal",
       {{"gci_window_ms", e.temporal.gci_window_ms},
        {"base_weight", e.temporal.base_weight},
        {"lpc_order", e.temporal.lpc_order}}},
      {"gmm",
       {{"components", c.gmm.components},
        {"max_iterations", c.gmm.max_iterations},
        {"tolerance", c.gmm.tolerance},
        {"regularization", c.gmm.regularization},
        {"prune_weight", c.gmm.prune_weight},
        {"kmeans_iterations", c.gmm.kmeans_iterations},
        {"order", c.gmm_order}}},
      {"nmf", {{"rank", c.nmf_rank}, {"iterations", e.nmf_iterations}}},
      {"models", {{"gmm", c.models.gmm}, {"nmf", c.models.nmf}, {"bank", c.models.bank}}},
      {"templates", c.templates},
      {"synth",
       {{"words", c.synth.words},
        {"errors", c.synth.errors},
        {"nasal_depth", c.synth.nasal_depth},
        {"seeds", c.synth.seeds},
        {"f0", c.synth.f0}}},
  };
}

RunConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
  const RunConfig defaults;
  json merged = to_json(defaults);
  reject_unknown(j, merged, "");
  merged.merge_patch(j);

  RunConfig c;
  try {
    c.seed = merged.at("seed").get<std::uint64_t>();
    c.jobs = merged.at("jobs").get<int>();
    c.sample_rate = merged.at("sample_rate").get<int>();
    c.metrics_rate = merged.at("metrics_rate").get<int>();
    c.scope = pipeline::parse_scope(merged.at("scope").get<std::string>());
    c.method = pipeline::parse_method(merged.at("method").get<std::string>());
    c.gate = pipeline::parse_gate(merged.at("gate").get<std::string>());
    auto& e = c.enhance;
    e.fade_ms = merged.at("fade_ms").get<double>();
    const auto& comp = merged.at("compression");
    e.compression.cutoff_hz = comp.at("cutoff_hz").get<double>();
    e.compression.low_band_gain = comp.at("low_band_gain").get<double>();
    e.compression.preserve_total_energy = comp.at("preserve_total_energy").get<bool>();
    const auto& temp = merged.at("temporal");
    e.temporal.gci_window_ms = temp.at("gci_window_ms").get<double>();
    e.temporal.base_weight = temp.at("base_weight").get<double>();
    e.temporal.lpc_order = temp.at("lpc_order").get<int>();
    const auto& g = merged.at("gmm");
    c.gmm.components = g.at("components").get<int>();
    c.gmm.max_iterations = g.at("max_iterations").get<int>();
    c.gmm.tolerance = g.at("tolerance").get<double>();
    c.gmm.regularization = g.at("regularization").get<double>();
    c.gmm.prune_weight = g.at("prune_weight").get<double>();
    c.gmm.kmeans_iterations = g.at("kmeans_iterations").get<int>();
    c.gmm_order = g.at("order").get<int>();
    const auto& n = merged.at("nmf");
    c.nmf_rank = n.at("rank").get<int>();
    e.nmf_iterations = n.at("iterations").get<int>();
    const auto& m = merged.at("models");
    c.models.gmm = m.at("gmm").get<std::string>();
    c.models.nmf = m.at("nmf").get<std::string>();
    c.models.bank = m.at("bank").get<std::string>();
    c.templates = merged.at("templates").get<std::string>();
    const auto& s = merged.at("synth");
    c.synth.words = s.at("words").get<std::vector<std::string>>();
    c.synth.errors = s.at("errors").get<std::vector<std::string>>();
    c.synth.nasal_depth = s.at("nasal_depth").get<double>();
    c.synth.seeds = s.at("seeds").get<int>();
    c.synth.f0 = s.at("f0").get<double>();
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("bad configuration value: ") + ex.what());
  } catch (const ParseError& ex) {
    throw ConfigError(ex.what());
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read configuration file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& ex) {
    throw ConfigError(path.string() + ": " + ex.what());
  }
  return config_from_json(j);
}

void write_config(const RunConfig& cfg, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << to_json(cfg).dump(2) << '\n';
  if (!out) throw IoError("cannot write " + path.string());
}

}  // namespace clpenh::cli
