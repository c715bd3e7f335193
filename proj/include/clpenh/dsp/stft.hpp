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

#include <Eigen/Core>

#include <cstddef>
#include <vector>

#include "clpenh/audio_io.hpp"

namespace clpenh::dsp {

enum class WindowKind { kHann };

// Complex STFT frames, one row per frame. `pad` is the number of zero samples
// that were prepended before framing (0 for plain stft()).
struct Spectrogram {
  Eigen::MatrixXcd frames;  // num_frames x (frame_len / 2 + 1)
  int frame_len = 512;
  int hop = 128;
  int sample_rate = kEnhancementRate;
  WindowKind window = WindowKind::kHann;
  int pad = 0;

  Eigen::Index num_frames() const { return frames.rows(); }
  Eigen::Index num_bins() const { return frames.cols(); }
  double bin_hz(Eigen::Index k) const {
    return static_cast<double>(k) * sample_rate / frame_len;
  }
  Eigen::MatrixXd magnitude() const { return frames.cwiseAbs(); }
};

inline constexpr int kDefaultFrameLen = 512;
inline constexpr int kDefaultHop = 128;

// Periodic Hann window of length n.
std::vector<double> hann_window(int n);

// Frame t covers samples [t*hop, t*hop + frame_len). Requires a power-of-two
// frame length, a hop that divides it at least twice, and len >= frame_len
// (TooShortError otherwise).
Spectrogram stft(const Waveform& w, int frame_len = kDefaultFrameLen, int hop = kDefaultHop);

// Zero-pads both ends so every input sample sees full window overlap; the
// matching istft() then reconstructs the whole signal, edges included.
Spectrogram stft_padded(const Waveform& w, int frame_len = kDefaultFrameLen,
                        int hop = kDefaultHop);

// Weighted overlap-add with per-sample window-energy normalization.
Waveform istft(const Spectrogram& s, std::size_t original_len);

void validate_framing(int frame_len, int hop);

}  // namespace clpenh::dsp
