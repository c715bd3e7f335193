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

#include <cstdint>
#include <span>

#include "clpenh/audio_io.hpp"
#include "clpenh/dsp/stft.hpp"

namespace clpenh::transforms {

// Paired exemplar dictionaries: column r of w_src and column r of w_tgt are
// magnitude spectra of the same aligned frame pair. Source columns have unit
// L1 norm; each target column carries the same scale factor.
struct NmfDictionaries {
  Eigen::MatrixXd w_src;  // num_bins x R
  Eigen::MatrixXd w_tgt;  // num_bins x R
  int frame_len = dsp::kDefaultFrameLen;
  int hop = dsp::kDefaultHop;
  int sample_rate = kEnhancementRate;

  int rank() const { return static_cast<int>(w_src.cols()); }
  Eigen::Index num_bins() const { return w_src.rows(); }
  // Throws ModelFormatError on shape or sign violations.
  void validate() const;
};

struct NmfTrainOptions {
  int rank = 64;
  std::uint64_t seed = 0;
};

struct NmfTraining {
  NmfDictionaries dicts;
  std::size_t aligned_frames = 0;
};

// Frame pairs are aligned by DTW on mel cepstra (c_1..c_12) of the power
// spectra. The aligned pairs are split into R equal strata in corpus order
// and one pair is drawn from each. Throws InsufficientDataError if fewer
// than R pairs exist.
NmfTraining train_nmf(std::span<const dsp::Spectrogram> source,
                      std::span<const dsp::Spectrogram> target, const NmfTrainOptions& options);

inline constexpr double kNmfFloor = 1e-12;

// Generalized KL divergence D(V || L) = sum V log(V/L) - V + L.
double kl_divergence(const Eigen::MatrixXd& v, const Eigen::MatrixXd& approx);

struct NmfSolveResult {
  Eigen::MatrixXd h;        // R x num_frames
  std::vector<double> kl;   // divergence before the first and after every update
};

// Multiplicative KL updates of H with W fixed, H initialized to mean(V) / R.
NmfSolveResult nmf_activations(const Eigen::MatrixXd& v, const Eigen::MatrixXd& w, int iterations);

// V = |STFT| + floor, frames as columns; output magnitude W_tgt H with the
// input phase.
Waveform nmf_convert(const Waveform& seg, const NmfDictionaries& dicts, int iterations = 100);

}  // namespace clpenh::transforms
