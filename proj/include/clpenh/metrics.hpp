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
#include <map>
#include <string>

#include "clpenh/audio_io.hpp"
#include "clpenh/dsp/dtw.hpp"
#include "clpenh/dsp/features.hpp"

namespace clpenh::metrics {

inline constexpr int kStoiSegmentFrames = 30;
inline constexpr double kStoiClipDb = -15.0;

// Short-time objective intelligibility on equal-length 10 kHz signals.
// Band envelopes are the square roots of the third-octave energies; each
// 30-frame test vector is scaled to the reference norm and clipped at
// -15 dB signal-to-distortion before correlating. Throws TooShortError when
// fewer than 30 frames exist, DimensionMismatchError on length or rate
// mismatch.
double stoi(const Waveform& test, const Waveform& ref);

// Extended variant: each 15 x 30 envelope block is normalized across frames
// per band, then across bands per frame; the score is the mean inner
// product of matching normalized columns. No clipping.
double estoi(const Waveform& test, const Waveform& ref);

// Healthy word exemplar with the features every metric needs precomputed.
struct ReferenceTemplate {
  std::string id;
  std::string word_label;
  Waveform wave;        // kEnhancementRate
  Waveform wave_10k;    // kMetricsRate
  dsp::CepstraTrack align_features;  // 10 kHz, 25 ms / 10 ms, c_0..c_12
  dsp::CepstraTrack mcd_features;    // 16 kHz, 25 ms / 10 ms, c_0..c_12
  dsp::ThirdOctaveEnergies bands;    // of wave_10k
};

// Throws DegenerateSignalError on a silent exemplar.
ReferenceTemplate make_template(std::string id, std::string word_label, const Waveform& wave);

// Index CSV `template_id,wav_path,word_label`; relative paths resolve
// against the index directory.
class TemplateStore {
 public:
  void add(ReferenceTemplate t);
  bool contains(const std::string& id) const { return templates_.count(id) != 0; }
  // Throws TemplateNotFoundError.
  const ReferenceTemplate& at(const std::string& id) const;
  std::size_t size() const { return templates_.size(); }

  static TemplateStore load(const std::filesystem::path& index_csv);

 private:
  std::map<std::string, ReferenceTemplate> templates_;
};

// Warps `test` onto the template's 10 kHz timeline. Frames are matched by
// DTW on c_1..c_12 and re-assembled by frame-synchronous overlap-add, so the
// output has exactly the template's length. Throws AlignmentError on a silent
// input.
Waveform p_align(const Waveform& test, const ReferenceTemplate& tmpl);

double p_stoi(const Waveform& test, const ReferenceTemplate& tmpl);
double p_estoi(const Waveform& test, const ReferenceTemplate& tmpl);

// Mel cepstral distortion in dB over DTW-aligned frame pairs, c_0 excluded.
double mcd(const Waveform& test, const ReferenceTemplate& tmpl);
// Same formula over an explicit path between two cepstral tracks.
double mcd_along_path(const dsp::CepstraTrack& a, const dsp::CepstraTrack& b,
                      const dsp::DtwPath& path);

struct MetricsReport {
  double p_stoi = 0.0;
  double p_estoi = 0.0;
  double mcd = 0.0;
};

MetricsReport score(const Waveform& test, const ReferenceTemplate& tmpl);

}  // namespace clpenh::metrics
