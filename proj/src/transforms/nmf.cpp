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


#include "clpenh/transforms/nmf.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "clpenh/dsp/dtw.hpp"
#include "clpenh/dsp/features.hpp"
#include "clpenh/errors.hpp"

namespace clpenh::transforms {

namespace {

constexpr int kAlignOrder = 13;

Eigen::MatrixXd alignment_features(const dsp::Spectrogram& s, const dsp::MelAnalyzer& mel) {
  Eigen::MatrixXd out(s.num_frames(), kAlignOrder - 1);
  for (Eigen::Index t = 0; t < s.num_frames(); ++t) {
    const Eigen::VectorXd power = s.frames.row(t).cwiseAbs2().transpose();
    out.row(t) = mel.cepstra(power, kAlignOrder).tail(kAlignOrder - 1).transpose();
  }
  return out;
}

}  // namespace

void NmfDictionaries::validate() const {
  if (w_src.rows() != w_tgt.rows() || w_src.cols() != w_tgt.cols()) {
    throw ModelFormatError("NMF dictionaries differ in shape");
  }
  if (w_src.cols() == 0) throw ModelFormatError("NMF dictionaries are empty");
  if (w_src.rows() != frame_len / 2 + 1) {
    throw ModelFormatError("NMF dictionary has " + std::to_string(w_src.rows()) +
                           " bins, frame length implies " + std::to_string(frame_len / 2 + 1));
  }
  if (!w_src.allFinite() || !w_tgt.allFinite()) throw ModelFormatError("non-finite NMF entry");
  if (w_src.minCoeff() < 0.0 || w_tgt.minCoeff() < 0.0) {
    throw ModelFormatError("negative NMF dictionary entry");
  }
}

NmfTraining train_nmf(std::span<const dsp::Spectrogram> source,
                      std::span<const dsp::Spectrogram> target, const NmfTrainOptions& options) {
  if (source.size() != target.size()) {
    throw DimensionMismatchError("train_nmf: source and target corpus sizes differ");
  }
  if (options.rank < 1) throw ConfigError("NMF rank must be positive");
  if (source.empty()) throw InsufficientDataError("train_nmf: empty corpus");
  const auto& ref = source.front();
  for (std::size_t p = 0; p < source.size(); ++p) {
    for (const auto* s : {&source[p], &target[p]}) {
      if (s->frame_len != ref.frame_len || s->hop != ref.hop || s->sample_rate != ref.sample_rate) {
        throw DimensionMismatchError("train_nmf: spectrogram framing differs within the corpus");
      }
    }
  }

  const dsp::MelAnalyzer mel(ref.sample_rate, ref.frame_len);
  struct Pair {
    std::size_t utt;
    int src, tgt;
  };
  std::vector<Pair> pairs;
  for (std::size_t p = 0; p < source.size(); ++p) {
    if (source[p].num_frames() == 0 || target[p].num_frames() == 0) continue;
    const auto path = dsp::dtw_align(alignment_features(source[p], mel),
                                     alignment_features(target[p], mel));
    for (const auto& [i, j] : path.pairs) pairs.push_back({p, i, j});
  }
  const auto rank = static_cast<std::size_t>(options.rank);
  if (pairs.size() < rank) {
    throw InsufficientDataError("NMF rank " + std::to_string(rank) + " exceeds the " +
                                std::to_string(pairs.size()) + " aligned frames available");
  }

  std::mt19937_64 rng(options.seed);
  NmfTraining out;
  out.aligned_frames = pairs.size();
  auto& d = out.dicts;
  d.frame_len = ref.frame_len;
  d.hop = ref.hop;
  d.sample_rate = ref.sample_rate;
  d.w_src.resize(ref.num_bins(), options.rank);
  d.w_tgt.resize(ref.num_bins(), options.rank);
  for (std::size_t r = 0; r < rank; ++r) {
    const std::size_t lo = r * pairs.size() / rank;
    const std::size_t hi = (r + 1) * pairs.size() / rank;
    const std::size_t pick = lo + static_cast<std::size_t>(rng() % (hi - lo));
    const Pair& pr = pairs[pick];
    Eigen::VectorXd s = source[pr.utt].frames.row(pr.src).cwiseAbs().transpose();
    Eigen::VectorXd t = target[pr.utt].frames.row(pr.tgt).cwiseAbs().transpose();
    const double l1 = s.sum();
    if (l1 > 0.0) {
      s /= l1;
      t /= l1;
    } else {
      // Silent exemplar: a flat source atom that maps to nothing.
      s.setConstant(1.0 / static_cast<double>(s.size()));
      t.setZero();
    }
    d.w_src.col(static_cast<Eigen::Index>(r)) = s;
    d.w_tgt.col(static_cast<Eigen::Index>(r)) = t;
  }
  return out;
}

double kl_divergence(const Eigen::MatrixXd& v, const Eigen::MatrixXd& approx) {
  double total = 0.0;
  for (Eigen::Index c = 0; c < v.cols(); ++c) {
    for (Eigen::Index r = 0; r < v.rows(); ++r) {
      const double a = v(r, c);
      const double b = approx(r, c);
      total += (a > 0.0 ? a * std::log(a / b) : 0.0) - a + b;
    }
  }
  return total;
}

NmfSolveResult nmf_activations(const Eigen::MatrixXd& v, const Eigen::MatrixXd& w, int iterations) {
  if (iterations < 1) throw ConfigError("NMF needs at least one iteration");
  if (v.rows() != w.rows()) {
    throw DimensionMismatchError("NMF dictionary has " + std::to_string(w.rows()) +
                                 " rows, spectrogram has " + std::to_string(v.rows()));
  }
  NmfSolveResult res;
  const Eigen::Index rank = w.cols();
  const double init = v.size() > 0 ? v.mean() / static_cast<double>(rank) : 0.0;
  res.h = Eigen::MatrixXd::Constant(rank, v.cols(), init);
  if (v.cols() == 0) return res;

  const Eigen::VectorXd col_sums = w.colwise().sum().transpose();
  Eigen::MatrixXd approx = w * res.h;
  res.kl.push_back(kl_divergence(v, approx));
  for (int it = 0; it < iterations; ++it) {
    const Eigen::MatrixXd ratio = v.cwiseQuotient(approx);
    const Eigen::MatrixXd num = w.transpose() * ratio;
    for (Eigen::Index c = 0; c < res.h.cols(); ++c) {
      for (Eigen::Index r = 0; r < rank; ++r) {
        if (col_sums[r] > 0.0) res.h(r, c) *= num(r, c) / col_sums[r];
      }
    }
    approx = w * res.h;
    res.kl.push_back(kl_divergence(v, approx));
  }
  return res;
}

Waveform nmf_convert(const Waveform& seg, const NmfDictionaries& dicts, int iterations) {
  if (iterations < 1) throw ConfigError("NMF needs at least one iteration");
  if (seg.sample_rate != dicts.sample_rate) {
    throw DimensionMismatchError("nmf_convert: dictionaries built at " +
                                 std::to_string(dicts.sample_rate) + " Hz, segment is " +
                                 std::to_string(seg.sample_rate) + " Hz");
  }
  if (seg.empty()) return seg;
  auto spec = dsp::stft_padded(seg, dicts.frame_len, dicts.hop);
  if (spec.num_bins() != dicts.num_bins()) {
    throw DimensionMismatchError("nmf_convert: dictionary bin count does not match framing");
  }
  const Eigen::MatrixXd v = (spec.magnitude().transpose().array() + kNmfFloor).matrix();
  const auto solved = nmf_activations(v, dicts.w_src, iterations);
  const Eigen::MatrixXd out_mag = dicts.w_tgt * solved.h;
  for (Eigen::Index t = 0; t < spec.num_frames(); ++t) {
    for (Eigen::Index k = 0; k < spec.num_bins(); ++k) {
      const std::complex<double> x = spec.frames(t, k);
      const double mag = std::abs(x);
      const std::complex<double> phase = mag > 0.0 ? x / mag : std::complex<double>(1.0, 0.0);
      spec.frames(t, k) = phase * out_mag(k, t);
    }
  }
  return dsp::istft(spec, seg.size());
}

}  // namespace clpenh::transforms
