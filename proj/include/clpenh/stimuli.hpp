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

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "clpenh/annotation.hpp"
#include "clpenh/audio_io.hpp"
#include "clpenh/transforms/insertion.hpp"

namespace clpenh::stimuli {

using pipeline::ErrorType;

struct Formants {
  double f1, f2, f3;
};
inline constexpr Formants kFormantBandwidths{80.0, 100.0, 120.0};

// /a/ 800/1200/2800, /i/ 300/2300/3000, /u/ 350/900/2700 Hz. Throws
// ParseError for any other label.
Formants vowel_formants(char vowel);

struct VowelOptions {
  double f0 = 220.0;
  double nasal_depth = 0.0;  // 0..1
  double rms = 0.1;
  // Starting F3 of a transition into the vowel target (0: none), and how long
  // the transition lasts.
  double f3_onset_hz = 0.0;
  double transition_ms = 60.0;
};

// Impulse train through cascaded formant resonators. Nasalization mixes in
// a 250 Hz pole / 500 Hz zero branch, cuts the F1 region by 6 dB * depth and
// adds nasal turbulence noise in proportion to depth. Needs >= 50 ms.
Waveform synth_vowel(char vowel, double duration_ms, const VowelOptions& options, std::uint64_t seed);
Waveform synth_vowel(char vowel, double duration_ms, double f0, double nasal_depth, std::uint64_t seed);

// /s/: 3.5-8 kHz noise; PSNAE adds < 1 kHz nasal noise of equal energy to a
// -6 dB healthy band; GS leaves one glottal pulse in silence; PA moves the
// noise to 2-4 kHz. Needs >= 50 ms.
Waveform synth_fricative_s(double duration_ms, ErrorType error, std::uint64_t seed);

struct StopTiming {
  double closure_ms = 60.0;
  double burst_ms = 20.0;
  double palatal_tail_ms = 40.0;  // added after the burst under PA
};

// Closure silence followed by a band-limited burst: /k/ 0.8-1.8 kHz (raised
// 300 Hz before /i/), /t/ 2.5-4 kHz, /T/ 2-3.5 kHz. GS replaces the burst by
// a glottal pulse, Velar uses the /k/ band, PA uses 2-3 kHz plus a palatal
// frication tail. Throws ConfigError for combinations that do not exist.
Waveform synth_stop(char stop, ErrorType error, char vowel_context, const StopTiming& timing,
                    std::uint64_t seed);

// Duration of the glottal pulse used by GS substitutions.
inline constexpr double kGlottalPulseMs = 10.0;

struct StimulusSpec {
  std::string word = "sasa";  // repeated consonant-vowel pairs
  ErrorType error = ErrorType::kNone;
  double nasal_depth = 0.0;
  std::uint64_t seed = 0;
  double f0 = 220.0;
  double fricative_ms = 180.0;
  double vowel_ms = 220.0;
  StopTiming stop;
  double fade_ms = 5.0;
  double noise_floor_rms = 1e-3;
};

// Consonant/vowel pairs of a word such as "sasa" or "TiTi". Consonants come
// from {s, k, t, T} and vowels from {a, i, u}. Throws ParseError.
std::vector<std::pair<char, char>> parse_word(std::string_view word);

// Whether a consonant error makes sense for every consonant of the word.
bool error_applies_to_word(std::string_view word, ErrorType error);

struct Stimulus {
  Waveform wave;
  pipeline::WordAnnotation annotation;
};

struct WordStimulus {
  Stimulus distorted;
  Stimulus healthy;  // same seed, no errors, no nasalization
};

// Phonemes joined with cross-fades; annotation boundaries sit at the centre
// of each overlap. Vowels are labelled Nasalized whenever nasal_depth > 0.
WordStimulus synth_word(const StimulusSpec& spec);

// Only the healthy rendering of spec.word with spec.seed.
Stimulus synth_healthy_word(const StimulusSpec& spec);

// Consonant exemplars cut from healthy words at their annotated boundaries,
// keyed by (consonant, following vowel), with that vowel's RMS as context
// level. The first occurrence of a key wins.
transforms::TemplateBank template_bank_from(std::span<const Stimulus> healthy);

}  // namespace clpenh::stimuli
