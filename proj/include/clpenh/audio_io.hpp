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
#include <span>
#include <vector>

namespace clpenh {

// Mono signal with its sample rate. Samples are nominally in [-1, 1].
struct Waveform {
  std::vector<double> samples;
  int sample_rate = 16000;

  Waveform() = default;
  Waveform(std::vector<double> s, int rate) : samples(std::move(s)), sample_rate(rate) {}

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  double duration_sec() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
  std::span<const double> view() const { return samples; }
};

inline constexpr int kEnhancementRate = 16000;
inline constexpr int kMetricsRate = 10000;

// Rates resample() will produce.
bool is_canonical_rate(int rate);

// RIFF/WAVE reader: PCM16 or IEEE float32, any channel count (averaged to
// mono). Throws FormatError / UnsupportedCodecError / IoError.
Waveform read_wav(const std::filesystem::path& path);

// Writes 16-bit PCM mono. Out-of-range samples saturate.
void write_wav(const Waveform& w, const std::filesystem::path& path);

// In-memory variants, used by the file functions and by tests.
Waveform decode_wav(std::span<const unsigned char> bytes);
std::vector<unsigned char> encode_wav_pcm16(const Waveform& w);

// Band-limited rational resampler (Kaiser-windowed sinc, beta 8, 32 taps per
// polyphase branch). Output length is round(len * target / source).
Waveform resample(const Waveform& w, int target_rate);

double rms(std::span<const double> x);

// Scales w so its RMS equals target_rms. Throws DegenerateSignalError on an
// all-zero input.
Waveform normalize_rms(const Waveform& w, double target_rms);

}  // namespace clpenh
