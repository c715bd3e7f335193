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


#include "clpenh/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <thread>

#include "clpenh/csv.hpp"
#include "clpenh/dsp/crossfade.hpp"
#include "clpenh/errors.hpp"
#include "clpenh/events.hpp"

namespace clpenh::pipeline {

namespace {

// A contiguous slice of the input and the annotation segment it carries
// (-1 for unannotated head/tail material).
struct Piece {
  std::size_t start = 0;
  std::size_t end = 0;
  int segment = -1;
};

std::vector<Piece> make_pieces(const WordAnnotation& ann, std::size_t wav_len, std::size_t fade) {
  std::vector<Piece> pieces;
  for (std::size_t i = 0; i < ann.segments.size(); ++i) {
    const auto& s = ann.segments[i];
    pieces.push_back({s.start, s.end, static_cast<int>(i)});
  }
  // Unannotated edges become passthrough pieces, or are folded into the
  // neighbouring segment when too short to survive a cross-fade.
  const std::size_t head = pieces.front().start;
  if (head > 0) {
    if (head >= 2 * fade) {
      pieces.insert(pieces.begin(), Piece{0, head, -1});
    } else {
      pieces.front().start = 0;
    }
  }
  const std::size_t tail_start = pieces.back().end;
  if (tail_start < wav_len) {
    if (wav_len - tail_start >= 2 * fade) {
      pieces.push_back(Piece{tail_start, wav_len, -1});
    } else {
      pieces.back().end = wav_len;
    }
  }
  return pieces;
}

bool is_vowel_side(PhonemeClass c, TemporalGate gate) {
  return c == PhonemeClass::kVowel || (gate == TemporalGate::kVoicedSonorants && c == PhonemeClass::kNasal);
}

std::string segment_name(const WordAnnotation& ann, std::size_t i) {
  const auto& s = ann.segments[i];
  return "segment " + std::to_string(i) + " (/" + s.label + "/ of '" + ann.word + "')";
}

// Vowel adjacent to segment i, preferring the following one.
std::optional<std::size_t> context_vowel(const WordAnnotation& ann, std::size_t i) {
  if (i + 1 < ann.segments.size() && ann.segments[i + 1].cls == PhonemeClass::kVowel) return i + 1;
  if (i > 0 && ann.segments[i - 1].cls == PhonemeClass::kVowel) return i - 1;
  return std::nullopt;
}

transforms::TemplateKey insertion_key(const WordAnnotation& ann, std::size_t i) {
  const auto v = context_vowel(ann, i);
  return {ann.segments[i].label, v ? ann.segments[*v].label : std::string()};
}

Waveform slice(const Waveform& w, std::size_t start, std::size_t end) {
  return Waveform(std::vector<double>(w.samples.begin() + static_cast<std::ptrdiff_t>(start),
                                      w.samples.begin() + static_cast<std::ptrdiff_t>(end)),
                  w.sample_rate);
}

events::GciSequence voiced_gcis(const Waveform& wav) {
  events::GciSequence out;
  if (wav.duration_sec() < 0.1) return out;
  const auto all = events::detect_gci(wav);
  const auto voiced = events::voicing(wav);
  out.mean_period = all.mean_period;
  for (std::size_t g : all.instants) {
    if (voiced.voiced_at(g)) out.instants.push_back(g);
  }
  return out;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

std::string_view to_string(Transform t) {
  switch (t) {
    case Transform::kPassthrough: return "passthrough";
    case Transform::kSpectralCompress: return "spectral_compress";
    case Transform::kTemporalEnhance: return "temporal_enhance";
    case Transform::kInsert: return "insert";
    case Transform::kGmmConvert: return "gmm_convert";
    case Transform::kNmfConvert: return "nmf_convert";
  }
  return "passthrough";
}

std::string_view to_string(Scope s) {
  switch (s) {
    case Scope::kObstruentOnly: return "obstruent_only";
    case Scope::kVowelOnly: return "vowel_only";
    case Scope::kBoth: return "both";
  }
  return "both";
}

std::string_view to_string(Method m) {
  switch (m) {
    case Method::kRule: return "rule";
    case Method::kGmm: return "gmm";
    case Method::kNmf: return "nmf";
  }
  return "rule";
}

Scope parse_scope(std::string_view token) {
  const std::string t = lower(token);
  if (t == "obstruent_only" || t == "obstruent") return Scope::kObstruentOnly;
  if (t == "vowel_only" || t == "vowel") return Scope::kVowelOnly;
  if (t == "both") return Scope::kBoth;
  throw ParseError("unknown scope '" + std::string(token) + "' (obstruent, vowel or both)");
}

Method parse_method(std::string_view token) {
  const std::string t = lower(token);
  if (t == "rule") return Method::kRule;
  if (t == "gmm") return Method::kGmm;
  if (t == "nmf") return Method::kNmf;
  throw ParseError("unknown method '" + std::string(token) + "' (rule, gmm or nmf)");
}

TemporalGate parse_gate(std::string_view token) {
  const std::string t = lower(token);
  if (t == "vowels") return TemporalGate::kVowelsOnly;
  if (t == "sonorants") return TemporalGate::kVoicedSonorants;
  throw ParseError("unknown temporal gate '" + std::string(token) + "' (vowels or sonorants)");
}

EnhancementPlan default_plan(const WordAnnotation& ann, Scope scope, Method method, TemporalGate gate) {
  EnhancementPlan plan;
  plan.scope = scope;
  for (const auto& s : ann.segments) {
    Transform t = Transform::kPassthrough;
    if (method == Method::kRule) {
      if (s.cls == PhonemeClass::kFricative && s.error == ErrorType::kPSNAE) {
        t = Transform::kSpectralCompress;
      } else if (is_obstruent(s.cls) &&
                 (s.error == ErrorType::kGS || s.error == ErrorType::kPA || s.error == ErrorType::kVelar)) {
        t = Transform::kInsert;
      } else if (s.cls == PhonemeClass::kVowel && s.error == ErrorType::kNasalized) {
        t = Transform::kTemporalEnhance;
      } else if (s.cls == PhonemeClass::kNasal && gate == TemporalGate::kVoicedSonorants) {
        t = Transform::kTemporalEnhance;
      }
    } else if (s.error != ErrorType::kNone) {
      t = method == Method::kGmm ? Transform::kGmmConvert : Transform::kNmfConvert;
    }
    const bool vowel_side = is_vowel_side(s.cls, gate);
    if (scope == Scope::kObstruentOnly && vowel_side) t = Transform::kPassthrough;
    if (scope == Scope::kVowelOnly && is_obstruent(s.cls)) t = Transform::kPassthrough;
    plan.choices.push_back(t);
  }
  return plan;
}

void check_prerequisites(const WordAnnotation& ann, const EnhancementPlan& plan, const Resources& res) {
  if (plan.choices.size() != ann.segments.size()) {
    throw ConfigError("plan has " + std::to_string(plan.choices.size()) + " choices for " +
                      std::to_string(ann.segments.size()) + " segments");
  }
  for (std::size_t i = 0; i < plan.choices.size(); ++i) {
    switch (plan.choices[i]) {
      case Transform::kGmmConvert:
        if (res.gmm == nullptr) throw ConfigError(segment_name(ann, i) + ": GMM conversion needs a model");
        break;
      case Transform::kNmfConvert:
        if (res.nmf == nullptr) {
          throw ConfigError(segment_name(ann, i) + ": NMF conversion needs dictionaries");
        }
        break;
      case Transform::kInsert: {
        if (res.bank == nullptr) throw ConfigError(segment_name(ann, i) + ": insertion needs a template bank");
        const auto key = insertion_key(ann, i);
        if (!res.bank->contains(key)) {
          throw ConfigError(segment_name(ann, i) + ": template bank has no /" + key.label +
                            "/ exemplar for vowel context '" + key.context + "'");
        }
        break;
      }
      default:
        break;
    }
  }
}

Waveform enhance_word(const Waveform& wav, const WordAnnotation& ann, const EnhancementPlan& plan,
                      const Resources& res, const EnhanceConfig& cfg) {
  ann.validate(wav.size());
  check_prerequisites(ann, plan, res);
  const std::size_t fade = dsp::fade_samples(wav.sample_rate, cfg.fade_ms);
  const auto pieces = make_pieces(ann, wav.size(), fade);

  const bool needs_gci = std::find(plan.choices.begin(), plan.choices.end(),
                                   Transform::kTemporalEnhance) != plan.choices.end();
  const events::GciSequence gcis = needs_gci ? voiced_gcis(wav) : events::GciSequence{};

  std::vector<Waveform> out;
  out.reserve(pieces.size());
  for (const auto& p : pieces) {
    Waveform seg = slice(wav, p.start, p.end);
    if (p.segment < 0) {
      out.push_back(std::move(seg));
      continue;
    }
    const auto i = static_cast<std::size_t>(p.segment);
    switch (plan.choices[i]) {
      case Transform::kPassthrough:
        break;
      case Transform::kSpectralCompress:
        seg = transforms::spectral_compress(seg, cfg.compression);
        break;
      case Transform::kTemporalEnhance: {
        events::GciSequence local;
        local.mean_period = gcis.mean_period;
        for (std::size_t g : gcis.instants) {
          if (g >= p.start && g < p.end) local.instants.push_back(g - p.start);
        }
        seg = transforms::temporal_enhance(seg, local, cfg.temporal).output;
        break;
      }
      case Transform::kInsert: {
        const auto v = context_vowel(ann, i);
        const double neighbor =
            v ? rms(slice(wav, ann.segments[*v].start, ann.segments[*v].end).samples) : rms(seg.samples);
        seg = transforms::insert_template({seg.size(), insertion_key(ann, i)}, *res.bank, neighbor);
        break;
      }
      case Transform::kGmmConvert:
        seg = transforms::gmm_convert(seg, *res.gmm);
        break;
      case Transform::kNmfConvert:
        seg = transforms::nmf_convert(seg, *res.nmf, cfg.nmf_iterations);
        break;
    }
    out.push_back(std::move(seg));
  }
  return dsp::cross_fade_concat(out, cfg.fade_ms);
}

std::vector<std::size_t> output_boundaries(const WordAnnotation& ann, std::size_t wav_len,
                                           std::size_t fade) {
  const auto pieces = make_pieces(ann, wav_len, fade);
  std::vector<std::size_t> lengths;
  for (const auto& p : pieces) lengths.push_back(p.end - p.start);
  const auto offsets = dsp::concat_offsets(lengths, fade);
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < pieces.size(); ++k) {
    if (pieces[k].segment >= 0) out.push_back(offsets[k]);
  }
  return out;
}

std::vector<ManifestRow> load_manifest(const std::filesystem::path& path) {
  const auto rows = read_csv(path);
  const auto base = path.parent_path();
  std::vector<ManifestRow> out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (r == 0 && !row.empty() && row[0] == "wav_path") continue;
    if (row.size() < 2 || row.size() > 3) {
      throw ParseError(path.string() + ": row " + std::to_string(r + 1) +
                       " needs wav_path,annotation_path[,reference_template_id]");
    }
    ManifestRow m;
    m.wav = row[0];
    m.annotation = row[1];
    if (m.wav.is_relative()) m.wav = base / m.wav;
    if (!m.annotation.empty() && m.annotation.is_relative()) m.annotation = base / m.annotation;
    if (row.size() == 3) m.template_id = row[2];
    out.push_back(std::move(m));
  }
  return out;
}

bool BatchReport::any_failed() const {
  return std::any_of(rows.begin(), rows.end(), [](const BatchRow& r) { return !r.ok; });
}

namespace {

template <typename Fn>
void parallel_rows(std::size_t n, int jobs, Fn&& fn) {
  const auto workers = static_cast<std::size_t>(std::clamp(jobs, 1, 256));
  if (workers == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, n); ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

Waveform read_for_enhancement(const std::filesystem::path& path) {
  Waveform w = read_wav(path);
  return w.sample_rate == kEnhancementRate ? w : resample(w, kEnhancementRate);
}

}  // namespace

BatchReport batch_enhance(const std::filesystem::path& manifest, const BatchOptions& options) {
  return batch_enhance(load_manifest(manifest), options);
}

BatchReport batch_enhance(const std::vector<ManifestRow>& rows, const BatchOptions& options) {
  BatchReport report;
  report.rows.resize(rows.size());
  if (!rows.empty()) std::filesystem::create_directories(options.out_dir);
  parallel_rows(rows.size(), options.jobs, [&](std::size_t i) {
    BatchRow& out = report.rows[i];
    const ManifestRow& row = rows[i];
    out.word = row.wav.stem().string();
    try {
      const Waveform wav = read_for_enhancement(row.wav);
      const WordAnnotation ann = load_annotation(row.annotation, wav);
      const EnhancementPlan plan = default_plan(ann, options.scope, options.method, options.gate);
      const Waveform enhanced = enhance_word(wav, ann, plan, options.resources, options.config);
      out.output = options.out_dir / (out.word + ".wav");
      write_wav(enhanced, out.output);
      if (options.templates != nullptr && !row.template_id.empty()) {
        out.metrics = metrics::score(enhanced, options.templates->at(row.template_id));
      }
      out.ok = true;
    } catch (const std::exception& e) {
      out.ok = false;
      out.error = e.what();
    }
  });
  return report;
}

BatchReport batch_score(const std::vector<ManifestRow>& rows, const metrics::TemplateStore& templates,
                        int jobs) {
  BatchReport report;
  report.rows.resize(rows.size());
  parallel_rows(rows.size(), jobs, [&](std::size_t i) {
    BatchRow& out = report.rows[i];
    out.word = rows[i].wav.stem().string();
    try {
      const auto& tmpl = templates.at(rows[i].template_id);
      out.metrics = metrics::score(read_for_enhancement(rows[i].wav), tmpl);
      out.ok = true;
    } catch (const std::exception& e) {
      out.ok = false;
      out.error = e.what();
    }
  });
  return report;
}

std::string format_metrics_csv(const BatchReport& report, std::string_view scope_label) {
  std::vector<CsvRow> rows;
  rows.push_back({"word", "scope", "p_stoi", "p_estoi", "mcd", "status"});
  for (const auto& r : report.rows) {
    CsvRow row{r.word, std::string(scope_label), "", "", "", r.ok ? "ok" : "failed"};
    if (r.ok && r.metrics) {
      row[2] = format_fixed(r.metrics->p_stoi, 6);
      row[3] = format_fixed(r.metrics->p_estoi, 6);
      row[4] = format_fixed(r.metrics->mcd, 6);
    }
    rows.push_back(std::move(row));
  }
  return to_csv(rows);
}

}  // namespace clpenh::pipeline
