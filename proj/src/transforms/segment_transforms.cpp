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


#include "clpenh/transforms/segment_transforms.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "clpenh/dsp/lpc.hpp"
#include "clpenh/dsp/stft.hpp"
#include "clpenh/errors.hpp"

namespace clpenh::transforms {

void SpectralCompressionConfig::validate(int sample_rate) const {
  if (!(cutoff_hz > 0.0 && cutoff_hz < sample_rate / 2.0)) {
    throw ConfigError("spectral compression cutoff must lie in (0, Nyquist)");
  }
  if (!(low_band_gain >= 0.0 && low_band_gain <= 1.0)) {
    throw ConfigError("spectral compression gain must lie in [0, 1]");
  }
}

Waveform spectral_compress(const Waveform& seg, const SpectralCompressionConfig& cfg) {
  cfg.validate(seg.sample_rate);
  if (seg.size() < static_cast<std::size_t>(dsp::kDefaultFrameLen)) {
    throw TooShortError("spectral_compress: segment shorter than one analysis frame");
  }
  auto spec = dsp::stft_padded(seg);
  const Eigen::Index bins = spec.num_bins();
  Eigen::Index split = 0;
  while (split < bins && spec.bin_hz(split) < cfg.cutoff_hz) ++split;

  for (Eigen::Index t = 0; t < spec.num_frames(); ++t) {
    auto row = spec.frames.row(t);
    const double low = row.head(split).cwiseAbs2().sum();
    const double high = row.tail(bins - split).cwiseAbs2().sum();
    row.head(split) *= cfg.low_band_gain;
    if (cfg.preserve_total_energy && high > 0.0) {
      const double target_high = low + high - cfg.low_band_gain * cfg.low_band_gain * low;
      row.tail(bins - split) *= std::sqrt(target_high / high);
    }
  }
  return dsp::istft(spec, seg.size());
}

void TemporalEnhanceConfig::validate() const {
  if (!(gci_window_ms > 0.0)) throw ConfigError("GCI window must be positive");
  if (!(base_weight >= 0.0 && base_weight <= 1.0)) throw ConfigError("base weight must lie in [0, 1]");
  if (lpc_order < 1) throw ConfigError("LPC order must be positive");
}

std::vector<double> gci_weight_function(std::size_t length, const events::GciSequence& gcis,
                                        const TemporalEnhanceConfig& cfg, int sample_rate) {
  std::vector<double> bump(length, 0.0);
  const double half = 0.5 * cfg.gci_window_ms * 1e-3 * sample_rate;
  for (std::size_t g : gcis.instants) {
    const auto lo = static_cast<long long>(std::ceil(static_cast<double>(g) - half));
    const auto hi = static_cast<long long>(std::floor(static_cast<double>(g) + half));
    for (long long n = std::max(0LL, lo); n <= hi && n < static_cast<long long>(length); ++n) {
      const double d = (static_cast<double>(n) - static_cast<double>(g)) / half;
      const double b = 0.5 * (1.0 + std::cos(M_PI * d));
      bump[static_cast<std::size_t>(n)] = std::max(bump[static_cast<std::size_t>(n)], b);
    }
  }
  std::vector<double> w(length);
  for (std::size_t n = 0; n < length; ++n) w[n] = cfg.base_weight + (1.0 - cfg.base_weight) * bump[n];
  return w;
}

namespace {

// Reflection coefficients per analysis frame; a degenerate frame gets all
// zeros, i.e. an identity filter.
std::vector<std::vector<double>> frame_reflections(const std::vector<double>& x, int frame_len,
                                                   int hop, int order,
                                                   std::vector<double>& centres) {
  const std::size_t n = x.size();
  const int len = static_cast<int>(std::min<std::size_t>(frame_len, n));
  const std::size_t frames = n <= static_cast<std::size_t>(len) ? 1 : 1 + (n - len) / hop;
  std::vector<double> window(static_cast<std::size_t>(len));
  for (int i = 0; i < len; ++i) {
    window[i] = len > 1 ? 0.54 - 0.46 * std::cos(2.0 * M_PI * i / (len - 1)) : 1.0;
  }
  std::vector<std::vector<double>> out;
  std::vector<double> buf(static_cast<std::size_t>(len));
  for (std::size_t t = 0; t < frames; ++t) {
    const std::size_t start = t * hop;
    for (int i = 0; i < len; ++i) buf[i] = x[start + i] * window[i];
    centres.push_back(static_cast<double>(start) + 0.5 * (len - 1));
    std::vector<double> k(static_cast<std::size_t>(order), 0.0);
    const int usable = std::min(order, len - 1);
    if (usable >= 1) {
      const auto r = dsp::autocorrelation(buf, usable);
      if (r[0] > 1e-20) {
        const auto lev = dsp::levinson_durbin(r, usable);
        std::copy(lev.reflection.begin(), lev.reflection.end(), k.begin());
        for (double& v : k) v = std::clamp(v, -0.9999, 0.9999);
      }
    }
    out.push_back(std::move(k));
  }
  return out;
}

}  // namespace

TemporalEnhanceResult temporal_enhance(const Waveform& seg, const events::GciSequence& gcis,
                                       const TemporalEnhanceConfig& cfg) {
  cfg.validate();
  if (gcis.empty() || seg.empty()) return {seg, true};

  const int frame_len = static_cast<int>(std::lround(0.025 * seg.sample_rate));
  const int hop = static_cast<int>(std::lround(0.005 * seg.sample_rate));
  const auto& x = seg.samples;
  const std::size_t n = x.size();
  const int p = cfg.lpc_order;

  std::vector<double> centres;
  const auto refl = frame_reflections(x, frame_len, hop, p, centres);
  const auto weight = gci_weight_function(n, gcis, cfg, seg.sample_rate);

  std::vector<double> k(static_cast<std::size_t>(p));
  std::vector<double> y(n, 0.0);
  std::size_t frame = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double pos = static_cast<double>(i);
    while (frame + 1 < centres.size() && centres[frame + 1] <= pos) ++frame;
    if (pos <= centres.front() || frame + 1 >= centres.size()) {
      k = refl[pos <= centres.front() ? 0 : centres.size() - 1];
    } else {
      const double t = (pos - centres[frame]) / (centres[frame + 1] - centres[frame]);
      for (int j = 0; j < p; ++j) k[j] = (1.0 - t) * refl[frame][j] + t * refl[frame + 1][j];
    }
    const auto a = dsp::reflection_to_direct(k);
    double e = x[i];
    for (int j = 1; j <= p && static_cast<std::size_t>(j) <= i; ++j) e += a[j - 1] * x[i - j];
    double acc = weight[i] * e;
    for (int j = 1; j <= p && static_cast<std::size_t>(j) <= i; ++j) acc -= a[j - 1] * y[i - j];
    y[i] = acc;
  }

  const double in_rms = rms(x);
  const double out_rms = rms(y);
  if (out_rms > 0.0 && std::isfinite(out_rms)) {
    const double c = in_rms / out_rms;
    for (double& v : y) v *= c;
  } else {
    return {seg, true};
  }
  return {Waveform(std::move(y), seg.sample_rate), false};
}

}  // namespace clpenh::transforms
