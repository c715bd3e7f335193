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


#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "cli.hpp"
#include "clpenh/annotation.hpp"
#include "clpenh/csv.hpp"
#include "clpenh/dsp/stft.hpp"
#include "clpenh/errors.hpp"
#include "clpenh/metrics.hpp"
#include "clpenh/stimuli.hpp"
#include "clpenh/transforms/model_io.hpp"

namespace clpenh::cli {
namespace {

namespace fs = std::filesystem;

// Flags shared by every command. Unset optionals leave the config value alone.
struct CommonFlags {
  std::string config;
  std::optional<int> jobs;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App& cmd, CommonFlags& f, bool with_seed) {
  cmd.add_option("--config", f.config, "JSON run configuration");
  cmd.add_option("--jobs", f.jobs, "worker threads");
  if (with_seed) cmd.add_option("--seed", f.seed, "random seed");
}

RunConfig base_config(const CommonFlags& f) {
  RunConfig c = f.config.empty() ? RunConfig{} : load_config(f.config);
  if (f.jobs) c.jobs = *f.jobs;
  if (f.seed) c.seed = *f.seed;
  return c;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("cannot write " + path.string());
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

fs::path sidecar_for(const fs::path& file) { return fs::path(file.string() + ".config.json"); }

Waveform at_enhancement_rate(Waveform w) {
  return w.sample_rate == kEnhancementRate ? w : resample(w, kEnhancementRate);
}

// ---------------------------------------------------------------- synth

struct SynthFlags {
  CommonFlags common;
  std::string out_dir;
  std::vector<std::string> words;
  std::vector<std::string> errors;
  std::optional<int> seeds;
  std::optional<double> nasal_depth;
};

int cmd_synth(const SynthFlags& f, std::ostream& out) {
  RunConfig cfg = base_config(f.common);
  if (!f.words.empty()) cfg.synth.words = f.words;
  if (!f.errors.empty()) cfg.synth.errors = f.errors;
  if (f.seeds) cfg.synth.seeds = *f.seeds;
  if (f.nasal_depth) cfg.synth.nasal_depth = *f.nasal_depth;
  cfg.validate();

  std::vector<pipeline::ErrorType> errors;
  try {
    for (const auto& w : cfg.synth.words) stimuli::parse_word(w);
    for (const auto& e : cfg.synth.errors) errors.push_back(pipeline::parse_error_type(e));
  } catch (const ParseError& e) {
    throw ConfigError(e.what());
  }
  if (cfg.synth.words.empty()) throw ConfigError("synth needs at least one word");

  const fs::path root = f.out_dir;
  make_dir(root / "distorted");
  make_dir(root / "healthy");

  std::vector<CsvRow> manifest{{"wav_path", "annotation_path", "reference_template_id"}};
  std::vector<CsvRow> healthy_manifest = manifest;
  std::vector<CsvRow> templates{{"template_id", "wav_path", "word_label"}};
  std::vector<stimuli::Stimulus> bank_words;

  for (const auto& word : cfg.synth.words) {
    for (int k = 0; k < cfg.synth.seeds; ++k) {
      stimuli::StimulusSpec spec;
      spec.word = word;
      spec.seed = cfg.seed + static_cast<std::uint64_t>(k);
      spec.f0 = cfg.synth.f0;
      spec.nasal_depth = cfg.synth.nasal_depth;
      const std::string tid = word + "_s" + std::to_string(spec.seed);

      const auto healthy = stimuli::synth_healthy_word(spec);
      const std::string hstem = "healthy/" + tid;
      write_wav(healthy.wave, root / (hstem + ".wav"));
      pipeline::save_annotation(healthy.annotation, healthy.wave.sample_rate, root / (hstem + ".csv"));
      healthy_manifest.push_back({hstem + ".wav", hstem + ".csv", tid});
      templates.push_back({tid, hstem + ".wav", word});

      for (const auto error : errors) {
        if (!stimuli::error_applies_to_word(word, error)) continue;
        spec.error = error;
        const auto ws = stimuli::synth_word(spec);
        const std::string stem =
            "distorted/" + word + "_" + std::string(pipeline::to_string(error)) + "_s" + std::to_string(spec.seed);
        write_wav(ws.distorted.wave, root / (stem + ".wav"));
        pipeline::save_annotation(ws.distorted.annotation, ws.distorted.wave.sample_rate, root / (stem + ".csv"));
        manifest.push_back({stem + ".wav", stem + ".csv", tid});
      }
    }
    // Bank exemplars come from a seed no corpus word uses.
    stimuli::StimulusSpec bank_spec;
    bank_spec.word = word;
    bank_spec.seed = cfg.seed + static_cast<std::uint64_t>(cfg.synth.seeds);
    bank_spec.f0 = cfg.synth.f0;
    bank_words.push_back(stimuli::synth_healthy_word(bank_spec));
  }

  write_csv(root / "manifest.csv", manifest);
  write_csv(root / "healthy_manifest.csv", healthy_manifest);
  write_csv(root / "templates.csv", templates);
  const auto bank = stimuli::template_bank_from(bank_words);
  bank.save(root / "bank");
  cfg.templates = (root / "templates.csv").string();
  cfg.models.bank = (root / "bank" / "bank.csv").string();
  write_config(cfg, root / "synth.config.json");
  out << "wrote " << manifest.size() - 1 << " distorted and " << healthy_manifest.size() - 1
      << " healthy words to " << root.string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- train

struct TrainFlags {
  CommonFlags common;
  std::string manifest;
  std::string templates;
  std::string out_model;
  std::optional<int> components;
  std::optional<int> rank;
  std::optional<int> iterations;
};

struct TrainingPairs {
  std::vector<Waveform> source;
  std::vector<Waveform> target;
};

// Each manifest wav paired with the healthy wav of its template.
TrainingPairs load_pairs(const fs::path& manifest, const fs::path& templates) {
  const auto rows = pipeline::load_manifest(manifest);
  const auto store = metrics::TemplateStore::load(templates);
  TrainingPairs p;
  for (const auto& row : rows) {
    p.source.push_back(at_enhancement_rate(read_wav(row.wav)));
    p.target.push_back(store.at(row.template_id).wave);
  }
  if (p.source.empty()) throw InsufficientDataError("training manifest " + manifest.string() + " has no rows");
  return p;
}

void require_paths(const TrainFlags& f, const RunConfig& cfg) {
  if (f.manifest.empty()) throw ConfigError("--manifest is required");
  if (cfg.templates.empty()) throw ConfigError("--templates is required");
  if (f.out_model.empty()) throw ConfigError("--out is required");
}

int cmd_train_gmm(const TrainFlags& f, std::ostream& out) {
  RunConfig cfg = base_config(f.common);
  if (!f.templates.empty()) cfg.templates = f.templates;
  if (f.components) cfg.gmm.components = *f.components;
  if (f.iterations) cfg.gmm.max_iterations = *f.iterations;
  cfg.gmm.seed = cfg.seed;
  cfg.validate();
  require_paths(f, cfg);

  const auto pairs = load_pairs(f.manifest, cfg.templates);
  const dsp::Framing framing{transforms::FeatureDescriptor{}.frame_len, transforms::FeatureDescriptor{}.hop};
  std::vector<dsp::CepstraTrack> src, tgt;
  for (const auto& w : pairs.source) src.push_back(dsp::mel_cepstra(w, cfg.gmm_order, framing));
  for (const auto& w : pairs.target) tgt.push_back(dsp::mel_cepstra(w, cfg.gmm_order, framing));
  const auto trained = transforms::train_joint_gmm(src, tgt, cfg.gmm);

  out << "aligned_frames," << trained.aligned_frames << "\n";
  out << "iteration,log_likelihood\n";
  for (std::size_t i = 0; i < trained.log_likelihood.size(); ++i) {
    out << i << "," << format_double(trained.log_likelihood[i]) << "\n";
  }
  out << "pruned," << trained.pruned << "\n";
  for (const auto& w : trained.warnings) out << "warning," << w << "\n";
  transforms::save_model(trained.model, f.out_model);
  write_config(cfg, sidecar_for(f.out_model));
  return kExitOk;
}

int cmd_train_nmf(const TrainFlags& f, std::ostream& out) {
  RunConfig cfg = base_config(f.common);
  if (!f.templates.empty()) cfg.templates = f.templates;
  if (f.rank) cfg.nmf_rank = *f.rank;
  if (f.iterations) cfg.enhance.nmf_iterations = *f.iterations;
  cfg.validate();
  require_paths(f, cfg);

  const auto pairs = load_pairs(f.manifest, cfg.templates);
  std::vector<dsp::Spectrogram> src, tgt;
  for (const auto& w : pairs.source) src.push_back(dsp::stft_padded(w));
  for (const auto& w : pairs.target) tgt.push_back(dsp::stft_padded(w));
  transforms::NmfTrainOptions opts;
  opts.rank = cfg.nmf_rank;
  opts.seed = cfg.seed;
  const auto trained = transforms::train_nmf(src, tgt, opts);

  // How well the source dictionary explains the training input.
  Eigen::Index frames = 0;
  for (const auto& s : src) frames += s.num_frames();
  Eigen::MatrixXd v(src.front().num_bins(), frames);
  Eigen::Index col = 0;
  for (const auto& s : src) {
    v.middleCols(col, s.num_frames()) = (s.magnitude().transpose().array() + transforms::kNmfFloor).matrix();
    col += s.num_frames();
  }
  const auto solved = transforms::nmf_activations(v, trained.dicts.w_src, cfg.enhance.nmf_iterations);

  out << "aligned_frames," << trained.aligned_frames << "\n";
  out << "iteration,kl\n";
  for (std::size_t i = 0; i < solved.kl.size(); ++i) out << i << "," << format_double(solved.kl[i]) << "\n";
  transforms::save_model(trained.dicts, f.out_model);
  write_config(cfg, sidecar_for(f.out_model));
  return kExitOk;
}

// ---------------------------------------------------------------- enhance

struct EnhanceFlags {
  CommonFlags common;
  std::string manifest;
  std::string out_dir;
  std::string metrics;
  std::optional<std::string> scope, method, gate, gmm, nmf, bank, templates;
};

int cmd_enhance(const EnhanceFlags& f, std::ostream& out, std::ostream& err) {
  RunConfig cfg = base_config(f.common);
  try {
    if (f.scope) cfg.scope = pipeline::parse_scope(*f.scope);
    if (f.method) cfg.method = pipeline::parse_method(*f.method);
    if (f.gate) cfg.gate = pipeline::parse_gate(*f.gate);
  } catch (const ParseError& e) {
    throw ConfigError(e.what());
  }
  if (f.gmm) cfg.models.gmm = *f.gmm;
  if (f.nmf) cfg.models.nmf = *f.nmf;
  if (f.bank) cfg.models.bank = *f.bank;
  if (f.templates) cfg.templates = *f.templates;
  cfg.validate();
  if (f.manifest.empty() || f.out_dir.empty()) throw ConfigError("--manifest and --out-dir are required");
  if (cfg.method == pipeline::Method::kGmm && cfg.models.gmm.empty()) {
    throw ConfigError("method gmm needs a GMM model (--gmm)");
  }
  if (cfg.method == pipeline::Method::kNmf && cfg.models.nmf.empty()) {
    throw ConfigError("method nmf needs NMF dictionaries (--nmf)");
  }

  // Models are part of the configuration: failing to load one is a config error.
  std::optional<transforms::GmmJointModel> gmm;
  std::optional<transforms::NmfDictionaries> nmf;
  std::optional<transforms::TemplateBank> bank;
  std::optional<metrics::TemplateStore> templates;
  try {
    if (cfg.method == pipeline::Method::kGmm) gmm = transforms::load_gmm(cfg.models.gmm);
    if (cfg.method == pipeline::Method::kNmf) nmf = transforms::load_nmf(cfg.models.nmf);
    if (!cfg.models.bank.empty()) bank = transforms::TemplateBank::load(cfg.models.bank);
    if (!cfg.templates.empty()) templates = metrics::TemplateStore::load(cfg.templates);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  const auto rows = pipeline::load_manifest(f.manifest);

  const fs::path out_dir = f.out_dir;
  make_dir(out_dir);
  pipeline::BatchOptions opts;
  opts.scope = cfg.scope;
  opts.method = cfg.method;
  opts.gate = cfg.gate;
  opts.config = cfg.enhance;
  opts.resources.gmm = gmm ? &*gmm : nullptr;
  opts.resources.nmf = nmf ? &*nmf : nullptr;
  opts.resources.bank = bank ? &*bank : nullptr;
  opts.templates = templates ? &*templates : nullptr;
  opts.out_dir = out_dir;
  opts.jobs = cfg.jobs;
  const auto report = pipeline::batch_enhance(rows, opts);

  const std::string label(pipeline::to_string(cfg.scope));
  const fs::path csv = f.metrics.empty() ? out_dir / ("metrics_" + label + ".csv") : fs::path(f.metrics);
  write_text(csv, pipeline::format_metrics_csv(report, label));
  write_config(cfg, out_dir / "enhance.config.json");
  std::size_t failed = 0;
  for (const auto& r : report.rows) {
    if (!r.ok) {
      ++failed;
      err << r.word << ": " << r.error << "\n";
    }
  }
  out << "enhanced " << report.rows.size() - failed << " of " << report.rows.size() << " words; metrics in "
      << csv.string() << "\n";
  return report.any_failed() ? kExitPartial : kExitOk;
}

// ---------------------------------------------------------------- eval

struct EvalFlags {
  CommonFlags common;
  std::string manifest;
  std::string out_csv;
  std::string summary;
  std::string plot;
  std::string label = "original";
  std::optional<std::string> templates;
};

struct GroupMeans {
  std::string word;
  std::string error;
  std::size_t rows = 0;
  std::size_t scored = 0;
  double p_stoi = 0.0, p_estoi = 0.0, mcd = 0.0;
};

// Consonant error of the word, else "nasalized" if any vowel is, else "none".
std::string word_error(const pipeline::WordAnnotation& ann) {
  bool nasalized = false;
  for (const auto& s : ann.segments) {
    if (s.error == pipeline::ErrorType::kNasalized) {
      nasalized = true;
    } else if (s.error != pipeline::ErrorType::kNone) {
      return std::string(pipeline::to_string(s.error));
    }
  }
  return nasalized ? "nasalized" : "none";
}

std::vector<GroupMeans> group_means(const std::vector<pipeline::ManifestRow>& rows,
                                    const pipeline::BatchReport& report) {
  std::vector<GroupMeans> groups;
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::string word = report.rows[i].word, error = "unknown";
    try {
      const auto wav = read_wav(rows[i].wav);
      const auto ann = pipeline::load_annotation(rows[i].annotation, wav);
      word = ann.word;
      error = word_error(ann);
    } catch (const Error&) {
    }
    const auto key = std::make_pair(word, error);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, groups.size()).first;
      groups.push_back({word, error});
    }
    auto& g = groups[it->second];
    ++g.rows;
    if (report.rows[i].ok && report.rows[i].metrics) {
      ++g.scored;
      g.p_stoi += report.rows[i].metrics->p_stoi;
      g.p_estoi += report.rows[i].metrics->p_estoi;
      g.mcd += report.rows[i].metrics->mcd;
    }
  }
  for (auto& g : groups) {
    if (g.scored > 0) {
      g.p_stoi /= static_cast<double>(g.scored);
      g.p_estoi /= static_cast<double>(g.scored);
      g.mcd /= static_cast<double>(g.scored);
    }
  }
  return groups;
}

std::string format_summary(const std::vector<GroupMeans>& groups, const std::string& label) {
  std::vector<CsvRow> rows{{"word", "error", "scope", "rows", "scored", "p_stoi", "p_estoi", "mcd"}};
  for (const auto& g : groups) {
    CsvRow r{g.word, g.error, label, std::to_string(g.rows), std::to_string(g.scored), "", "", ""};
    if (g.scored > 0) {
      r[5] = format_fixed(g.p_stoi, 6);
      r[6] = format_fixed(g.p_estoi, 6);
      r[7] = format_fixed(g.mcd, 6);
    }
    rows.push_back(std::move(r));
  }
  return to_csv(rows);
}

// Grouped bar chart of mean p_stoi and p_estoi per (word, error) group.
std::string format_plot(const std::vector<GroupMeans>& groups, const std::string& label) {
  const int bar = 18, gap = 14, left = 50, top = 30, height = 200;
  const int width = left + static_cast<int>(groups.size()) * (2 * bar + gap) + gap + 120;
  std::ostringstream s;
  s << std::fixed << std::setprecision(2);
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << top + height + 60
    << "\" font-family=\"sans-serif\" font-size=\"10\">\n";
  s << "<text x=\"" << left << "\" y=\"18\" font-size=\"12\">mean scores, " << label << "</text>\n";
  for (int tick = 0; tick <= 4; ++tick) {
    const double y = top + height - tick * height / 4.0;
    s << "<line x1=\"" << left << "\" y1=\"" << y << "\" x2=\"" << width - 120 << "\" y2=\"" << y
      << "\" stroke=\"#ddd\"/>\n";
    s << "<text x=\"" << left - 6 << "\" y=\"" << y + 3 << "\" text-anchor=\"end\">" << tick / 4.0 << "</text>\n";
  }
  const char* colours[2] = {"#3b6ea8", "#d08a2e"};
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const auto& g = groups[i];
    const double x0 = left + gap + static_cast<double>(i) * (2 * bar + gap);
    const double values[2] = {g.p_stoi, g.p_estoi};
    for (int m = 0; m < 2; ++m) {
      const double v = g.scored > 0 ? std::clamp(values[m], 0.0, 1.0) : 0.0;
      s << "<rect x=\"" << x0 + m * bar << "\" y=\"" << top + height - v * height << "\" width=\"" << bar
        << "\" height=\"" << v * height << "\" fill=\"" << colours[m] << "\"/>\n";
    }
    s << "<text x=\"" << x0 + bar << "\" y=\"" << top + height + 14 << "\" text-anchor=\"middle\">" << g.word
      << "</text>\n";
    s << "<text x=\"" << x0 + bar << "\" y=\"" << top + height + 26 << "\" text-anchor=\"middle\">" << g.error
      << "</text>\n";
  }
  const int lx = width - 110;
  const char* names[2] = {"p_stoi", "p_estoi"};
  for (int m = 0; m < 2; ++m) {
    s << "<rect x=\"" << lx << "\" y=\"" << top + m * 16 << "\" width=\"10\" height=\"10\" fill=\"" << colours[m]
      << "\"/>\n";
    s << "<text x=\"" << lx + 14 << "\" y=\"" << top + m * 16 + 9 << "\">" << names[m] << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

int cmd_eval(const EvalFlags& f, std::ostream& out, std::ostream& err) {
  RunConfig cfg = base_config(f.common);
  if (f.templates) cfg.templates = *f.templates;
  cfg.validate();
  if (f.manifest.empty() || f.out_csv.empty()) throw ConfigError("--manifest and --out are required");
  if (cfg.templates.empty()) throw ConfigError("--templates is required");
  metrics::TemplateStore store;
  try {
    store = metrics::TemplateStore::load(cfg.templates);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  const auto rows = pipeline::load_manifest(f.manifest);
  const auto report = pipeline::batch_score(rows, store, cfg.jobs);

  write_text(f.out_csv, pipeline::format_metrics_csv(report, f.label));
  write_config(cfg, sidecar_for(f.out_csv));
  if (!f.summary.empty() || !f.plot.empty()) {
    const auto groups = group_means(rows, report);
    if (!f.summary.empty()) write_text(f.summary, format_summary(groups, f.label));
    if (!f.plot.empty()) write_text(f.plot, format_plot(groups, f.label));
  }
  std::size_t failed = 0;
  for (const auto& r : report.rows) {
    if (!r.ok) {
      ++failed;
      err << r.word << ": " << r.error << "\n";
    }
  }
  out << "scored " << report.rows.size() - failed << " of " << report.rows.size() << " words\n";
  return report.any_failed() ? kExitPartial : kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Word-level enhancement and scoring of cleft lip and palate speech", "clpenh"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "clpenh 1.0.0");

  SynthFlags synth;
  auto* c_synth = app.add_subcommand("synth", "generate a seeded synthetic corpus");
  add_common(*c_synth, synth.common, true);
  c_synth->add_option("--out-dir", synth.out_dir, "output directory")->required();
  c_synth->add_option("--words", synth.words, "comma-separated words, e.g. sasa,kaka")->delimiter(',');
  c_synth->add_option("--errors", synth.errors, "comma-separated error types")->delimiter(',');
  c_synth->add_option("--seeds", synth.seeds, "number of consecutive seeds");
  c_synth->add_option("--nasal-depth", synth.nasal_depth, "vowel nasalization depth 0..1");

  TrainFlags gmm;
  auto* c_gmm = app.add_subcommand("train-gmm", "train a joint-density GMM conversion model");
  add_common(*c_gmm, gmm.common, true);
  c_gmm->add_option("--manifest", gmm.manifest, "distorted words with template ids")->required();
  c_gmm->add_option("--templates", gmm.templates, "template index CSV");
  c_gmm->add_option("--out", gmm.out_model, "model file")->required();
  c_gmm->add_option("--components", gmm.components, "mixture components");
  c_gmm->add_option("--iterations", gmm.iterations, "maximum EM iterations");

  TrainFlags nmf;
  auto* c_nmf = app.add_subcommand("train-nmf", "train coupled NMF dictionaries");
  add_common(*c_nmf, nmf.common, true);
  c_nmf->add_option("--manifest", nmf.manifest, "distorted words with template ids")->required();
  c_nmf->add_option("--templates", nmf.templates, "template index CSV");
  c_nmf->add_option("--out", nmf.out_model, "model file")->required();
  c_nmf->add_option("--rank", nmf.rank, "dictionary size");
  c_nmf->add_option("--iterations", nmf.iterations, "activation updates");

  EnhanceFlags enh;
  auto* c_enh = app.add_subcommand("enhance", "enhance every word of a manifest");
  add_common(*c_enh, enh.common, false);
  c_enh->add_option("--manifest", enh.manifest, "wav_path,annotation_path,reference_template_id")->required();
  c_enh->add_option("--out-dir", enh.out_dir, "output directory")->required();
  c_enh->add_option("--metrics", enh.metrics, "metrics CSV (default <out-dir>/metrics_<scope>.csv)");
  c_enh->add_option("--scope", enh.scope, "obstruent_only, vowel_only or both");
  c_enh->add_option("--method", enh.method, "rule, gmm or nmf");
  c_enh->add_option("--gate", enh.gate, "vowels or sonorants");
  c_enh->add_option("--gmm", enh.gmm, "GMM model file");
  c_enh->add_option("--nmf", enh.nmf, "NMF model file");
  c_enh->add_option("--bank", enh.bank, "template bank index CSV");
  c_enh->add_option("--templates", enh.templates, "template index CSV for scoring");

  EvalFlags ev;
  auto* c_eval = app.add_subcommand("eval", "score the words of a manifest as they are");
  add_common(*c_eval, ev.common, false);
  c_eval->add_option("--manifest", ev.manifest, "wav_path,annotation_path,reference_template_id")->required();
  c_eval->add_option("--templates", ev.templates, "template index CSV");
  c_eval->add_option("--out", ev.out_csv, "metrics CSV")->required();
  c_eval->add_option("--summary", ev.summary, "per (word, error) means CSV");
  c_eval->add_option("--plot", ev.plot, "SVG bar chart of the means");
  c_eval->add_option("--label", ev.label, "scope column value");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << "clpenh 1.0.0\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (c_synth->parsed()) return cmd_synth(synth, out);
    if (c_gmm->parsed()) return cmd_train_gmm(gmm, out);
    if (c_nmf->parsed()) return cmd_train_nmf(nmf, out);
    if (c_enh->parsed()) return cmd_enhance(enh, out, err);
    if (c_eval->parsed()) return cmd_eval(ev, out, err);
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitPartial;
  }
  return kExitUsage;
}

}  // namespace clpenh::cli
