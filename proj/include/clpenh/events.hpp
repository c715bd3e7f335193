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
#include <vector>

#include "clpenh/audio_io.hpp"
#include "clpenh/dsp/features.hpp"

namespace clpenh::events {

// Glottal closure instants as sample indices, strictly increasing.
struct GciSequence {
  std::vector<std::size_t> instants;
  double mean_period = 0.0;  // samples

  bool empty() const { return instants.empty(); }
  std::size_t size() const { return instants.size(); }
};

struct VoicingTrack {
  std::vector<bool> voiced;  // one flag per 25 ms / 10 ms frame
  dsp::Framing framing;
  int sample_rate = kEnhancementRate;

  double voiced_fraction() const;
  // Whether the frame whose hop interval contains `sample` is voiced.
  bool voiced_at(std::size_t sample) const;
};

// Mean pitch period (samples) from the autocorrelation peak between 50 and
// 400 Hz, clamped to [2.5 ms, 20 ms]. Returns the 20 ms bound for silence.
double estimate_mean_period(const Waveform& w);

// Differenced input through two zero-frequency resonators (four cumulative
// sums), then two passes of moving-average trend removal with a window of one
// mean pitch period. Signed so that a positive excitation impulse becomes a
// negative-to-positive zero crossing. Requires at least 100 ms of input
// (TooShortError).
Waveform zero_frequency_filter(const Waveform& w);
Waveform zero_frequency_filter(const Waveform& w, double mean_period);

// Negative-to-positive zero crossings of the zero-frequency filtered signal.
// Crossings closer than a quarter period are merged, keeping the steeper.
GciSequence detect_gci(const Waveform& w);

// Frame is voiced iff energy > 1% of the loudest frame, zero-crossing rate
// < 0.25 per sample, and normalized autocorrelation peak in the 50-400 Hz lag
// range > 0.3.
VoicingTrack voicing(const Waveform& w);

}  // namespace clpenh::events
