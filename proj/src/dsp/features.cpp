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


#include "clpenh/dsp/features.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "clpenh/dsp/fft.hpp"
#include "clpenh/dsp/stft.hpp"

namespace clpenh::dsp {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

Framing speech_framing(int sample_rate) {
  return {static_cast<int>(std::lround(0.025 * sample_rate)),
          static_cast<int>(std::lround(0.010 * sample_rate))};
}

MelAnalyzer::MelAnalyzer(int sample_rate, int fft_size, int num_filters)
    : sample_rate_(sample_rate), fft_size_(fft_size) {
  if (num_filters < 2) throw std::invalid_argument("MelAnalyzer: need at least two filters");
  const int bins = fft_size / 2 + 1;
  const double nyquist = sample_rate / 2.0;
  const double mel_max = hz_to_mel(nyquist);
  std::vector<double> edges(static_cast<std::size_t>(num_filters) + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(mel_max * static_cast<double>(i) / (num_filters + 1));
  }
  const double bin_hz = static_cast<double>(sample_rate) / fft_size;
  filters_ = Eigen::MatrixXd::Zero(num_filters, bins);
  centre_bins_.resize(num_filters);
  for (int m = 0; m < num_filters; ++m) {
    const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
    centre_bins_[m] = mid / bin_hz;
    for (int k = 0; k < bins; ++k) {
      const double f = k * bin_hz;
      const double w = std::min((f - lo) / (mid - lo), (hi - f) / (hi - mid));
      if (w > 0.0) filters_(m, k) = w;
    }
    const double area = filters_.row(m).sum();
    if (area > 0.0) {
      filters_.row(m) /= area;
    } else {
      const int k = std::clamp(static_cast<int>(std::lround(centre_bins_[m])), 0, bins - 1);
      filters_(m, k) = 1.0;
    }
  }
  dct_.resize(num_filters, num_filters);
  for (int k = 0; k < num_filters; ++k) {
    const double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / num_filters);
    for (int n = 0; n < num_filters; ++n) {
      dct_(k, n) = scale * std::cos(M_PI * k * (2.0 * n + 1.0) / (2.0 * num_filters));
    }
  }
}

Eigen::VectorXd MelAnalyzer::log_energies(const Eigen::Ref<const Eigen::VectorXd>& power) const {
  Eigen::VectorXd e = filters_ * power;
  for (Eigen::Index i = 0; i < e.size(); ++i) e[i] = std::log(std::max(e[i], kLogFloor));
  return e;
}

Eigen::VectorXd MelAnalyzer::cepstra(const Eigen::Ref<const Eigen::VectorXd>& power,
                                     int order) const {
  if (order < 1 || order > num_filters()) throw std::invalid_argument("cepstral order out of range");
  return dct_.topRows(order) * log_energies(power);
}

Eigen::VectorXd MelAnalyzer::log_energies_from_cepstra(
    const Eigen::Ref<const Eigen::VectorXd>& c) const {
  if (c.size() > num_filters()) throw std::invalid_argument("too many cepstral coefficients");
  return dct_.topRows(c.size()).transpose() * c;
}

Eigen::VectorXd MelAnalyzer::filters_to_bins(
    const Eigen::Ref<const Eigen::VectorXd>& per_filter) const {
  const int bins = fft_size_ / 2 + 1;
  const int m = num_filters();
  Eigen::VectorXd out(bins);
  for (int k = 0; k < bins; ++k) {
    if (k <= centre_bins_[0]) {
      out[k] = per_filter[0];
    } else if (k >= centre_bins_[m - 1]) {
      out[k] = per_filter[m - 1];
    } else {
      int j = 0;
      while (centre_bins_[j + 1] < k) ++j;
      const double t = (k - centre_bins_[j]) / (centre_bins_[j + 1] - centre_bins_[j]);
      out[k] = (1.0 - t) * per_filter[j] + t * per_filter[j + 1];
    }
  }
  return out;
}

CepstraTrack mel_cepstra(const Waveform& w, int order) {
  return mel_cepstra(w, order, speech_framing(w.sample_rate));
}

CepstraTrack mel_cepstra(const Waveform& w, int order, Framing framing) {
  if (order < 2 || order > kNumMelFilters) {
    throw std::invalid_argument("mel_cepstra: order must be in [2, 26]");
  }
  if (framing.frame_len <= 0 || framing.hop <= 0) throw std::invalid_argument("bad framing");
  const int fft_size = next_power_of_two(framing.frame_len);
  const MelAnalyzer mel(w.sample_rate, fft_size);
  const RealFft fft(fft_size);
  const auto window = hann_window(framing.frame_len);

  const std::size_t n = w.size();
  const Eigen::Index frames =
      n < static_cast<std::size_t>(framing.frame_len)
          ? 1
          : 1 + static_cast<Eigen::Index>((n - framing.frame_len) / framing.hop);

  CepstraTrack track;
  track.order = order;
  track.framing = framing;
  track.sample_rate = w.sample_rate;
  track.frames.resize(frames, order);
  std::vector<double> buf(static_cast<std::size_t>(framing.frame_len));
  Eigen::VectorXd power(fft_size / 2 + 1);
  for (Eigen::Index t = 0; t < frames; ++t) {
    const std::size_t start = static_cast<std::size_t>(t) * framing.hop;
    for (int i = 0; i < framing.frame_len; ++i) {
      const std::size_t idx = start + i;
      buf[i] = idx < n ? w.samples[idx] * window[i] : 0.0;
    }
    const auto spec = fft.forward(buf);
    for (std::size_t k = 0; k < spec.size(); ++k) power[static_cast<Eigen::Index>(k)] = std::norm(spec[k]);
    track.frames.row(t) = mel.cepstra(power, order).transpose();
  }
  return track;
}

namespace {

constexpr int kStoiRate = 10000;
constexpr int kStoiFrame = 256;
constexpr int kStoiHop = 128;
constexpr int kStoiFft = 512;

int nearest_bin(double hz) {
  const double bin_hz = static_cast<double>(kStoiRate) / kStoiFft;
  return static_cast<int>(std::lround(hz / bin_hz));
}

}  // namespace

std::pair<int, int> third_octave_bin_range(int band) {
  const double lo = kLowestBandCentreHz * std::pow(2.0, (2.0 * band - 1.0) / 6.0);
  const double hi = kLowestBandCentreHz * std::pow(2.0, (2.0 * band + 1.0) / 6.0);
  return {nearest_bin(lo), nearest_bin(hi)};
}

ThirdOctaveEnergies third_octave_energies(const Waveform& w) {
  if (w.sample_rate != kStoiRate) {
    throw std::invalid_argument("third_octave_energies: expects 10 kHz input, got " +
                                std::to_string(w.sample_rate));
  }
  ThirdOctaveEnergies out;
  for (int j = 0; j < kNumThirdOctaveBands; ++j) {
    out.centres_hz[j] = kLowestBandCentreHz * std::pow(2.0, j / 3.0);
  }
  const std::size_t n = w.size();
  const Eigen::Index frames =
      n < kStoiFrame ? 0 : 1 + static_cast<Eigen::Index>((n - kStoiFrame) / kStoiHop);
  out.frames = Eigen::MatrixXd::Zero(frames, kNumThirdOctaveBands);
  const RealFft fft(kStoiFft);
  const auto window = hann_window(kStoiFrame);
  std::vector<double> buf(kStoiFrame);
  for (Eigen::Index t = 0; t < frames; ++t) {
    const std::size_t start = static_cast<std::size_t>(t) * kStoiHop;
    for (int i = 0; i < kStoiFrame; ++i) buf[i] = w.samples[start + i] * window[i];
    const auto spec = fft.forward(buf);
    for (int j = 0; j < kNumThirdOctaveBands; ++j) {
      const auto [first, last] = third_octave_bin_range(j);
      double e = 0.0;
      for (int k = first; k < last; ++k) e += std::norm(spec[k]);
      out.frames(t, j) = e;
    }
  }
  return out;
}

}  // namespace clpenh::dsp
