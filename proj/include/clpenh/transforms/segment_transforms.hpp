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

#include "clpenh/audio_io.hpp"
#include "clpenh/events.hpp"

namespace clpenh::transforms {

// Attenuates STFT magnitudes below `cutoff_hz`; optionally rescales the rest
// of each frame so its total spectral energy is unchanged.
struct SpectralCompressionConfig {
  double cutoff_hz = 2000.0;
  double low_band_gain = 0.1;
  bool preserve_total_energy = true;

  void validate(int sample_rate) const;
};

// Phase is kept; output length equals input length. Needs at least one
// 512-sample frame of input (TooShortError).
Waveform spectral_compress(const Waveform& seg, const SpectralCompressionConfig& cfg = {});

struct TemporalEnhanceConfig {
  double gci_window_ms = 2.0;
  double base_weight = 0.3;
  int lpc_order = 12;

  void validate() const;
};

struct TemporalEnhanceResult {
  Waveform output;
  bool skipped = false;  // no GCIs: input returned unchanged
};

// base_weight everywhere, raised to 1 by a raised-cosine bump of width
// gci_window_ms centred on each instant.
std::vector<double> gci_weight_function(std::size_t length, const events::GciSequence& gcis,
                                        const TemporalEnhanceConfig& cfg, int sample_rate);

// LP residual weighting around glottal closures. Analysis uses 25 ms frames
// with a 5 ms hop; reflection coefficients are interpolated per sample so
// the time-varying synthesis filter stays stable. Output RMS matches input.
TemporalEnhanceResult temporal_enhance(const Waveform& seg, const events::GciSequence& gcis,
                                       const TemporalEnhanceConfig& cfg = {});

}  // namespace clpenh::transforms
