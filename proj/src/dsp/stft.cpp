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


#include "clpenh/dsp/stft.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "clpenh/dsp/fft.hpp"
#include "clpenh/errors.hpp"

namespace clpenh::dsp {

std::vector<double> hann_window(int n) {
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) w[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / n);
  return w;
}

void validate_framing(int frame_len, int hop) {
  if (!is_power_of_two(frame_len)) {
    throw std::invalid_argument("frame length must be a power of two, got " +
                                std::to_string(frame_len));
  }
  if (hop <= 0 || frame_len % hop != 0 || frame_len / hop < 2) {
    throw std::invalid_argument("hop " + std::to_string(hop) +
                                " does not satisfy overlap-add for frame length " +
                                std::to_string(frame_len));
  }
}

namespace {

Spectrogram analyze(const std::vector<double>& x, int frame_len, int hop, int rate, int pad) {
  const Eigen::Index frames = 1 + static_cast<Eigen::Index>((x.size() - frame_len) / hop);
  const auto window = hann_window(frame_len);
  const RealFft fft(frame_len);
  Spectrogram s;
  s.frame_len = frame_len;
  s.hop = hop;
  s.sample_rate = rate;
  s.pad = pad;
  s.frames.resize(frames, frame_len / 2 + 1);
  std::vector<double> buf(static_cast<std::size_t>(frame_len));
  for (Eigen::Index t = 0; t < frames; ++t) {
    const std::size_t start = static_cast<std::size_t>(t) * hop;
    for (int i = 0; i < frame_len; ++i) buf[i] = x[start + i] * window[i];
    const auto spec = fft.forward(buf);
    for (std::size_t k = 0; k < spec.size(); ++k) s.frames(t, static_cast<Eigen::Index>(k)) = spec[k];
  }
  return s;
}

}  // namespace

Spectrogram stft(const Waveform& w, int frame_len, int hop) {
  validate_framing(frame_len, hop);
  if (w.size() < static_cast<std::size_t>(frame_len)) {
    throw TooShortError("stft: signal of " + std::to_string(w.size()) +
                        " samples is shorter than one frame (" + std::to_string(frame_len) + ")");
  }
  return analyze(w.samples, frame_len, hop, w.sample_rate, 0);
}

Spectrogram stft_padded(const Waveform& w, int frame_len, int hop) {
  validate_framing(frame_len, hop);
  if (w.empty()) throw TooShortError("stft_padded: empty signal");
  const int pad = frame_len - hop;
  std::size_t total = w.size() + 2 * static_cast<std::size_t>(pad);
  if (total < static_cast<std::size_t>(frame_len)) total = frame_len;
  const std::size_t rem = (total - frame_len) % hop;
  if (rem != 0) total += hop - rem;
  std::vector<double> x(total, 0.0);
  std::copy(w.samples.begin(), w.samples.end(), x.begin() + pad);
  return analyze(x, frame_len, hop, w.sample_rate, pad);
}

Waveform istft(const Spectrogram& s, std::size_t original_len) {
  validate_framing(s.frame_len, s.hop);
  if (s.num_bins() != s.frame_len / 2 + 1) {
    throw DimensionMismatchError("istft: bin count does not match frame length");
  }
  if (s.pad < 0) throw DimensionMismatchError("istft: negative padding");
  const std::size_t covered =
      s.num_frames() == 0 ? 0
                          : static_cast<std::size_t>((s.num_frames() - 1) * s.hop + s.frame_len);
  if (original_len + static_cast<std::size_t>(s.pad) > covered && original_len > 0) {
    throw DimensionMismatchError("istft: requested length exceeds spectrogram coverage");
  }

  const auto window = hann_window(s.frame_len);
  const RealFft fft(s.frame_len);
  std::vector<double> acc(covered, 0.0);
  std::vector<double> norm(covered, 0.0);
  std::vector<std::complex<double>> row(static_cast<std::size_t>(s.num_bins()));
  for (Eigen::Index t = 0; t < s.num_frames(); ++t) {
    for (Eigen::Index k = 0; k < s.num_bins(); ++k) row[k] = s.frames(t, k);
    const auto frame = fft.inverse(row);
    const std::size_t start = static_cast<std::size_t>(t) * s.hop;
    for (int i = 0; i < s.frame_len; ++i) {
      acc[start + i] += frame[i] * window[i];
      norm[start + i] += window[i] * window[i];
    }
  }
  std::vector<double> out(original_len, 0.0);
  for (std::size_t n = 0; n < original_len; ++n) {
    const std::size_t idx = n + static_cast<std::size_t>(s.pad);
    if (norm[idx] > 1e-10) out[n] = acc[idx] / norm[idx];
  }
  return Waveform(std::move(out), s.sample_rate);
}

}  // namespace clpenh::dsp
