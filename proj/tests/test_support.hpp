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


// Signal generators and oracles shared by the test binaries.

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "clpenh/audio_io.hpp"
#include "clpenh/dsp/fft.hpp"

namespace clpenh::testing {

inline constexpr double kPi = std::numbers::pi;

inline Waveform sine(double hz, double seconds, int rate, double amp = 0.5, double phase = 0.0) {
  const auto n = static_cast<std::size_t>(std::llround(seconds * rate));
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = amp * std::sin(2.0 * kPi * hz * i / rate + phase);
  return Waveform(std::move(x), rate);
}

inline Waveform white_noise(std::size_t n, int rate, std::uint64_t seed, double sd = 0.1) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist(0.0, sd);
  std::vector<double> x(n);
  for (auto& v : x) v = dist(gen);
  return Waveform(std::move(x), rate);
}

// Two-pole resonator applied in place, unit gain at DC not enforced.
inline void resonate(std::vector<double>& x, double hz, double bw, int rate) {
  const double r = std::exp(-kPi * bw / rate);
  const double a1 = 2.0 * r * std::cos(2.0 * kPi * hz / rate);
  const double a2 = -r * r;
  double y1 = 0.0, y2 = 0.0;
  for (auto& v : x) {
    const double y = v + a1 * y1 + a2 * y2;
    y2 = y1;
    y1 = y;
    v = y;
  }
}

struct PulseVowel {
  Waveform wave;
  std::vector<std::size_t> impulses;
};

// Impulse train at f0 through three formant resonances, scaled to peak 0.5.
inline PulseVowel pulse_vowel(double f0, double seconds, int rate = 16000, std::size_t first = 40) {
  const auto n = static_cast<std::size_t>(std::llround(seconds * rate));
  std::vector<double> x(n, 0.0);
  PulseVowel v;
  for (double t = static_cast<double>(first); t < static_cast<double>(n); t += rate / f0) {
    const auto i = static_cast<std::size_t>(std::llround(t));
    if (i >= n) break;
    x[i] = 1.0;
    v.impulses.push_back(i);
  }
  resonate(x, 700.0, 80.0, rate);
  resonate(x, 1200.0, 100.0, rate);
  resonate(x, 2600.0, 120.0, rate);
  double peak = 0.0;
  for (double s : x) peak = std::max(peak, std::abs(s));
  for (auto& s : x) s *= 0.5 / peak;
  v.wave = Waveform(std::move(x), rate);
  return v;
}

inline double energy(const std::vector<double>& x) {
  double e = 0.0;
  for (double v : x) e += v * v;
  return e;
}

// Band energy between lo and hi Hz from one FFT over the whole signal.
inline double band_energy(const Waveform& w, double lo, double hi) {
  const dsp::RealFft fft(static_cast<int>(w.size()));
  const auto spec = fft.forward(w.samples);
  double e = 0.0;
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const double hz = static_cast<double>(k) * w.sample_rate / static_cast<double>(w.size());
    if (hz >= lo && hz <= hi) e += std::norm(spec[k]);
  }
  return e;
}

// White noise restricted to [lo, hi] Hz by zeroing FFT bins, scaled to `rms_target`.
inline Waveform band_noise(std::size_t n, int rate, double lo, double hi, std::uint64_t seed,
                           double rms_target = 0.1) {
  const auto w = white_noise(n, rate, seed, 1.0);
  const dsp::RealFft fft(static_cast<int>(n));
  auto spec = fft.forward(w.samples);
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const double hz = static_cast<double>(k) * rate / static_cast<double>(n);
    if (hz < lo || hz > hi) spec[k] = 0.0;
  }
  auto x = fft.inverse(spec);
  const double r = std::sqrt(energy(x) / static_cast<double>(n));
  for (auto& v : x) v *= rms_target / r;
  return Waveform(std::move(x), rate);
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("clpenh_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace clpenh::testing
