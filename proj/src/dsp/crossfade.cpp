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


#include "clpenh/dsp/crossfade.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "clpenh/errors.hpp"

namespace clpenh::dsp {

std::size_t fade_samples(int sample_rate, double fade_ms) {
  if (fade_ms < 0.0) throw std::invalid_argument("fade must be non-negative");
  return static_cast<std::size_t>(std::lround(fade_ms * 1e-3 * sample_rate));
}

std::vector<std::size_t> concat_offsets(std::span<const std::size_t> lengths, std::size_t fade) {
  std::vector<std::size_t> out;
  out.reserve(lengths.size());
  std::size_t pos = 0;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    out.push_back(pos);
    pos += lengths[i] - fade;
  }
  return out;
}

Waveform cross_fade_concat(std::span<const Waveform> segments, double fade_ms) {
  if (segments.empty()) return Waveform({}, kEnhancementRate);
  const int rate = segments.front().sample_rate;
  for (const auto& s : segments) {
    if (s.sample_rate != rate) throw std::invalid_argument("cross_fade_concat: sample rates differ");
  }
  if (segments.size() == 1) return segments.front();
  const std::size_t fade = fade_samples(rate, fade_ms);
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (segments[i].size() < 2 * fade) {
      throw TooShortError("cross_fade_concat: segment " + std::to_string(i) + " has " +
                          std::to_string(segments[i].size()) + " samples, fade needs " +
                          std::to_string(2 * fade));
    }
  }
  std::vector<double> ramp_in(fade);
  for (std::size_t i = 0; i < fade; ++i) {
    ramp_in[i] = 0.5 - 0.5 * std::cos(M_PI * (static_cast<double>(i) + 0.5) / static_cast<double>(fade));
  }

  std::size_t total = 0;
  for (const auto& s : segments) total += s.size();
  total -= (segments.size() - 1) * fade;
  std::vector<double> out(total, 0.0);

  std::size_t pos = 0;
  for (std::size_t s = 0; s < segments.size(); ++s) {
    const auto& x = segments[s].samples;
    const bool fade_in = s > 0;
    const bool fade_out = s + 1 < segments.size();
    for (std::size_t i = 0; i < x.size(); ++i) {
      double g = 1.0;
      if (fade_in && i < fade) g *= ramp_in[i];
      if (fade_out && i >= x.size() - fade) g *= 1.0 - ramp_in[i - (x.size() - fade)];
      out[pos + i] += g * x[i];
    }
    pos += x.size() - fade;
  }
  return Waveform(std::move(out), rate);
}

}  // namespace clpenh::dsp
