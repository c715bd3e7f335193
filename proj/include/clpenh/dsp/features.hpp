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

#include <array>

#include "clpenh/audio_io.hpp"

namespace clpenh::dsp {

inline constexpr int kNumMelFilters = 26;
inline constexpr int kDefaultCepstralOrder = 13;
inline constexpr double kLogFloor = 1e-10;

// Frame geometry of a feature track, in samples.
struct Framing {
  int frame_len = 400;
  int hop = 160;
};

// 25 ms / 10 ms at the given rate.
Framing speech_framing(int sample_rate);

// Mel filterbank + orthonormal DCT-II shared by cepstral analysis and the
// envelope reconstruction used by spectral conversion. Filters are
// triangular on the mel scale from 0 Hz to Nyquist, normalized to unit area
// so that a flat power spectrum produces equal filter energies.
class MelAnalyzer {
 public:
  MelAnalyzer(int sample_rate, int fft_size, int num_filters = kNumMelFilters);

  int sample_rate() const { return sample_rate_; }
  int fft_size() const { return fft_size_; }
  int num_filters() const { return static_cast<int>(filters_.rows()); }

  // Natural-log filter energies of one power-spectrum row, floored at kLogFloor.
  Eigen::VectorXd log_energies(const Eigen::Ref<const Eigen::VectorXd>& power) const;
  // First `order` DCT-II coefficients of log_energies().
  Eigen::VectorXd cepstra(const Eigen::Ref<const Eigen::VectorXd>& power, int order) const;
  // Smoothed log filter energies from truncated cepstra (inverse DCT).
  Eigen::VectorXd log_energies_from_cepstra(const Eigen::Ref<const Eigen::VectorXd>& c) const;
  // Piecewise-linear map from per-filter values to per-bin values, anchored
  // at the filter centres and held flat beyond the outermost centres.
  Eigen::VectorXd filters_to_bins(const Eigen::Ref<const Eigen::VectorXd>& per_filter) const;

  const Eigen::MatrixXd& filters() const { return filters_; }

 private:
  int sample_rate_;
  int fft_size_;
  Eigen::MatrixXd filters_;  // num_filters x num_bins
  Eigen::MatrixXd dct_;      // orthonormal DCT-II, num_filters x num_filters
  Eigen::VectorXd centre_bins_;
};

double hz_to_mel(double hz);
double mel_to_hz(double mel);

struct CepstraTrack {
  Eigen::MatrixXd frames;  // num_frames x order, columns c_0 .. c_{order-1}
  int order = kDefaultCepstralOrder;
  Framing framing;
  int sample_rate = kEnhancementRate;

  Eigen::Index num_frames() const { return frames.rows(); }
  // Columns c_1 .. c_{order-1}.
  Eigen::MatrixXd without_c0() const { return frames.rightCols(order - 1); }
};

// Hann-windowed frames, zero-padded to the next power of two. A signal
// shorter than one frame yields a single zero-padded frame.
CepstraTrack mel_cepstra(const Waveform& w, int order = kDefaultCepstralOrder);
CepstraTrack mel_cepstra(const Waveform& w, int order, Framing framing);

inline constexpr int kNumThirdOctaveBands = 15;
inline constexpr double kLowestBandCentreHz = 150.0;

struct ThirdOctaveEnergies {
  Eigen::MatrixXd frames;  // num_frames x 15, power per band
  std::array<double, kNumThirdOctaveBands> centres_hz{};

  Eigen::Index num_frames() const { return frames.rows(); }
};

// 256-sample Hann frames, hop 128, 512-point FFT at 10 kHz; bands centred at
// 150 * 2^(j/3) Hz with edges snapped to the nearest FFT bin.
ThirdOctaveEnergies third_octave_energies(const Waveform& w);

// Inclusive-exclusive FFT bin range [first, last) of band j at 10 kHz / 512.
std::pair<int, int> third_octave_bin_range(int band);

}  // namespace clpenh::dsp
