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


#include "clpenh/events.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>

#include "clpenh/dsp/lpc.hpp"
#include "clpenh/errors.hpp"

namespace clpenh::events {

namespace {

constexpr double kMinF0 = 50.0;
constexpr double kMaxF0 = 400.0;
constexpr int kWhiteningOrder = 12;

// Autocorrelation pitch lag of x in [min_lag, max_lag]. The biased estimate
// tapers multiples of the period, and the first local maximum within 10% of
// the global one avoids octave-down picks.
std::optional<double> peak_lag(std::span<const double> x, int min_lag, int max_lag) {
  const std::size_t n = x.size();
  const int top = std::min(max_lag, static_cast<int>(n) - 2);
  if (top <= min_lag) return std::nullopt;
  // Two extra lags below the range let a peak sit on min_lag itself.
  const int lo = std::max(1, min_lag - 2);
  std::vector<double> r(static_cast<std::size_t>(top) + 2, 0.0);
  double best = 0.0;
  for (int lag = lo; lag <= top + 1; ++lag) {
    double acc = 0.0;
    for (std::size_t i = static_cast<std::size_t>(lag); i < n; ++i) acc += x[i] * x[i - lag];
    r[lag] = acc / static_cast<double>(n);
    if (lag <= top) best = std::max(best, r[lag]);
  }
  if (best <= 0.0) return std::nullopt;
  // A fractional period splits an impulse-train peak over two integer lags,
  // so peaks are picked on a three-lag sum and refined by a parabola.
  std::vector<double> s(r.size(), 0.0);
  double best_s = 0.0;
  for (int lag = lo + 1; lag <= top; ++lag) {
    s[lag] = r[lag - 1] + r[lag] + r[lag + 1];
    best_s = std::max(best_s, s[lag]);
  }
  for (int lag = std::max(min_lag, lo + 2); lag < top; ++lag) {
    if (s[lag] >= s[lag - 1] && s[lag] >= s[lag + 1] && s[lag] >= 0.9 * best_s) {
      const double denom = s[lag - 1] - 2.0 * s[lag] + s[lag + 1];
      const double offset = denom < 0.0 ? 0.5 * (s[lag - 1] - s[lag + 1]) / denom : 0.0;
      return lag + std::clamp(offset, -0.5, 0.5);
    }
  }
  return std::nullopt;
}

// Centred moving average with a window that shrinks at the edges.
std::vector<long double> moving_average(const std::vector<long double>& y, std::size_t half) {
  const std::size_t n = y.size();
  std::vector<long double> prefix(n + 1, 0.0L);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + y[i];
  std::vector<long double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(n, i + half + 1);
    out[i] = (prefix[hi] - prefix[lo]) / static_cast<long double>(hi - lo);
  }
  return out;
}

double normalized_peak(std::span<const double> x, int min_lag, int max_lag) {
  double best = 0.0;
  const int n = static_cast<int>(x.size());
  for (int lag = min_lag; lag <= max_lag && lag < n; ++lag) {
    double xy = 0.0, xx = 0.0, yy = 0.0;
    for (int i = 0; i + lag < n; ++i) {
      xy += x[i] * x[i + lag];
      xx += x[i] * x[i];
      yy += x[i + lag] * x[i + lag];
    }
    if (xx > 0.0 && yy > 0.0) best = std::max(best, xy / std::sqrt(xx * yy));
  }
  return best;
}

void require_length(const Waveform& w) {
  if (w.size() < static_cast<std::size_t>(0.1 * w.sample_rate)) {
    throw TooShortError("zero_frequency_filter: need at least 100 ms, got " +
                        std::to_string(w.size()) + " samples");
  }
}

}  // namespace

double VoicingTrack::voiced_fraction() const {
  if (voiced.empty()) return 0.0;
  return static_cast<double>(std::count(voiced.begin(), voiced.end(), true)) /
         static_cast<double>(voiced.size());
}

bool VoicingTrack::voiced_at(std::size_t sample) const {
  if (voiced.empty()) return false;
  const auto centre = static_cast<std::size_t>(framing.frame_len / 2);
  std::size_t t = sample > centre ? (sample - centre + framing.hop / 2) / framing.hop : 0;
  t = std::min(t, voiced.size() - 1);
  return voiced[t];
}

double estimate_mean_period(const Waveform& w) {
  const double min_period = 0.0025 * w.sample_rate;
  const double max_period = 0.020 * w.sample_rate;
  const int min_lag = static_cast<int>(std::floor(w.sample_rate / kMaxF0));
  const int max_lag = static_cast<int>(std::ceil(w.sample_rate / kMinF0));
  const std::size_t n = w.size();
  if (n <= static_cast<std::size_t>(min_lag) + 2) return max_period;

  double mean = 0.0;
  for (double s : w.samples) mean += s;
  mean /= static_cast<double>(n);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = w.samples[i] - mean;
  double r0 = 0.0;
  for (double v : x) r0 += v * v;
  if (r0 <= 0.0) return max_period;
  // Whiten first: formant ringing otherwise produces autocorrelation peaks
  // at multiples of the F1 period that can outrank the pitch peak.
  if (n > 4 * kWhiteningOrder) {
    const auto a = dsp::lpc(x, kWhiteningOrder).coeffs;
    x = dsp::inverse_filter(x, a);
  }

  // Median over frames of two longest periods each, so a moving pitch
  // yields its typical period rather than a smeared whole-signal peak.
  const auto frame = static_cast<std::size_t>(2 * max_lag);
  std::vector<double> lags;
  if (n >= 2 * frame) {
    std::vector<double> energies;
    for (std::size_t s = 0; s + frame <= n; s += frame / 4) {
      double e = 0.0;
      for (std::size_t i = s; i < s + frame; ++i) e += x[i] * x[i];
      energies.push_back(e);
    }
    const double loudest = *std::max_element(energies.begin(), energies.end());
    for (std::size_t f = 0; f < energies.size(); ++f) {
      if (energies[f] < 0.01 * loudest) continue;
      const auto lag = peak_lag(std::span<const double>(x).subspan(f * (frame / 4), frame), min_lag, max_lag);
      if (lag) lags.push_back(*lag);
    }
  }
  if (lags.empty()) {
    const auto lag = peak_lag(x, min_lag, max_lag);
    if (!lag) return max_period;
    lags.push_back(*lag);
  }
  std::nth_element(lags.begin(), lags.begin() + lags.size() / 2, lags.end());
  return std::clamp(lags[lags.size() / 2], min_period, max_period);
}

Waveform zero_frequency_filter(const Waveform& w) {
  require_length(w);
  return zero_frequency_filter(w, estimate_mean_period(w));
}

Waveform zero_frequency_filter(const Waveform& w, double mean_period) {
  require_length(w);
  const std::size_t n = w.size();
  std::vector<long double> y(n, 0.0L);
  // Backward difference taken with inverted sign: three net integrations of
  // a positive impulse cross zero downwards at the impulse, and the
  // inversion turns that into the negative-to-positive crossing we detect.
  for (std::size_t i = 1; i < n; ++i) {
    y[i] = static_cast<long double>(w.samples[i - 1]) - static_cast<long double>(w.samples[i]);
  }
  long double mean = 0.0L;
  for (long double v : y) mean += v;
  mean /= static_cast<long double>(n);
  for (long double& v : y) v -= mean;

  // Two zero-frequency resonators == four cumulative sums.
  for (int pass = 0; pass < 4; ++pass) {
    long double acc = 0.0L;
    for (auto& v : y) {
      acc += v;
      v = acc;
    }
  }

  const auto half = static_cast<std::size_t>(std::max(1.0, std::round(0.75 * mean_period)));
  for (int pass = 0; pass < 2; ++pass) {
    const auto trend = moving_average(y, half);
    for (std::size_t i = 0; i < n; ++i) y[i] -= trend[i];
  }

  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<double>(y[i]);
  return Waveform(std::move(out), w.sample_rate);
}

GciSequence detect_gci(const Waveform& w) {
  GciSequence out;
  out.mean_period = estimate_mean_period(w);
  if (w.size() < static_cast<std::size_t>(0.1 * w.sample_rate) || rms(w.samples) == 0.0) {
    return out;
  }
  const Waveform z = zero_frequency_filter(w, out.mean_period);
  const auto& y = z.samples;

  const double min_gap = 0.25 * out.mean_period;
  double kept_slope = 0.0;
  for (std::size_t i = 1; i < y.size(); ++i) {
    if (!(y[i - 1] < 0.0 && y[i] >= 0.0)) continue;
    const std::size_t at = (-y[i - 1] < y[i]) ? i - 1 : i;
    const double slope = y[i] - y[i - 1];
    if (!out.instants.empty() && static_cast<double>(at - out.instants.back()) < min_gap) {
      if (slope > kept_slope) {
        out.instants.back() = at;
        kept_slope = slope;
      }
      continue;
    }
    out.instants.push_back(at);
    kept_slope = slope;
  }
  return out;
}

VoicingTrack voicing(const Waveform& w) {
  VoicingTrack track;
  track.framing = dsp::speech_framing(w.sample_rate);
  track.sample_rate = w.sample_rate;
  const auto [len, hop] = track.framing;
  if (w.size() < static_cast<std::size_t>(len)) return track;
  const std::size_t frames = 1 + (w.size() - len) / hop;

  std::vector<double> energy(frames, 0.0);
  for (std::size_t t = 0; t < frames; ++t) {
    const std::size_t start = t * hop;
    for (int i = 0; i < len; ++i) energy[t] += w.samples[start + i] * w.samples[start + i];
  }
  const double max_energy = *std::max_element(energy.begin(), energy.end());
  const int min_lag = static_cast<int>(std::floor(w.sample_rate / kMaxF0));
  const int max_lag = static_cast<int>(std::ceil(w.sample_rate / kMinF0));

  track.voiced.assign(frames, false);
  if (max_energy <= 0.0) return track;
  for (std::size_t t = 0; t < frames; ++t) {
    if (energy[t] <= 0.01 * max_energy) continue;
    std::span<const double> frame(w.samples.data() + t * hop, static_cast<std::size_t>(len));
    int crossings = 0;
    for (int i = 1; i < len; ++i) {
      if ((frame[i - 1] < 0.0) != (frame[i] < 0.0)) ++crossings;
    }
    if (static_cast<double>(crossings) / len >= 0.25) continue;
    if (normalized_peak(frame, min_lag, std::min(max_lag, len / 2)) <= 0.3) continue;
    track.voiced[t] = true;
  }
  return track;
}

}  // namespace clpenh::events
