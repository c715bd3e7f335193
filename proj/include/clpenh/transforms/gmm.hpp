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
#include <string>
#include <vector>

#include "clpenh/audio_io.hpp"
#include "clpenh/dsp/features.hpp"

namespace clpenh::transforms {

// How conversion features are computed. c_0 is never part of the mapped
// vector; it carries frame energy and is left untouched on conversion.
struct FeatureDescriptor {
  int order = dsp::kDefaultCepstralOrder;  // D; mapped dimension is D - 1
  int frame_len = 512;
  int hop = 128;
  int sample_rate = kEnhancementRate;

  int mapped_dim() const { return order - 1; }
  dsp::Framing framing() const { return {frame_len, hop}; }
  bool operator==(const FeatureDescriptor&) const = default;
};

// Full-covariance mixture over arbitrary vectors.
struct GaussianMixture {
  Eigen::VectorXd weights;
  std::vector<Eigen::VectorXd> means;
  std::vector<Eigen::MatrixXd> covariances;

  int components() const { return static_cast<int>(weights.size()); }
  int dim() const { return means.empty() ? 0 : static_cast<int>(means.front().size()); }
  // Weights in (0,1] summing to 1 within 1e-9; covariances symmetric with
  // minimum eigenvalue >= 1e-8. Throws ModelFormatError.
  void validate() const;
  // Mean per-row log-likelihood of `data` (rows are samples).
  double mean_log_likelihood(const Eigen::MatrixXd& data) const;
};

// Joint density over stacked [x; y] vectors, x the source features and y the
// target features, each of dimension features.mapped_dim().
struct GmmJointModel {
  GaussianMixture mixture;
  FeatureDescriptor features;

  int half_dim() const { return mixture.dim() / 2; }
  void validate() const;
};

struct GmmTrainOptions {
  int components = 8;
  int max_iterations = 200;
  double tolerance = 1e-6;       // stop when per-frame log-likelihood gain falls below
  double regularization = 1e-6;  // added to every covariance diagonal each iteration
  double prune_weight = 1e-6;
  int kmeans_iterations = 10;
  std::uint64_t seed = 0;
};

struct GmmFitResult {
  GaussianMixture mixture;
  std::vector<double> log_likelihood;  // per-frame mean, one entry per EM iteration
  int pruned = 0;
  std::vector<std::string> warnings;
};

// EM with k-means++ initialization. Needs at least 10 * Q * dim rows
// (InsufficientDataError).
GmmFitResult fit_gmm(const Eigen::MatrixXd& data, const GmmTrainOptions& options);

struct JointGmmTraining {
  GmmJointModel model;
  std::vector<double> log_likelihood;
  int pruned = 0;
  std::vector<std::string> warnings;
  std::size_t aligned_frames = 0;
};

// Pairs are aligned with DTW on c_1..c_{D-1}; aligned frames are stacked
// into joint vectors.
JointGmmTraining train_joint_gmm(std::span<const dsp::CepstraTrack> source,
                                 std::span<const dsp::CepstraTrack> target,
                                 const GmmTrainOptions& options);

// Source-side posteriors P(q | x).
Eigen::VectorXd gmm_posteriors(const GmmJointModel& model, const Eigen::VectorXd& x);
// Minimum mean-square-error mapping E[y | x].
Eigen::VectorXd gmm_map_frame(const GmmJointModel& model, const Eigen::VectorXd& x);

// Envelope-ratio filtering: each STFT frame is multiplied by the ratio of the
// converted to the original cepstral envelope (clamped to +/-40 dB), keeping
// phase and c_0.
Waveform gmm_convert(const Waveform& seg, const GmmJointModel& model);

}  // namespace clpenh::transforms
