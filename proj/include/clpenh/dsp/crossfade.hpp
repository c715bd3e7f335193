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

#include <cstddef>
#include <span>
#include <vector>

#include "clpenh/audio_io.hpp"

namespace clpenh::dsp {

std::size_t fade_samples(int sample_rate, double fade_ms);

// Joins segments, overlapping each adjacent pair by `fade_ms` with
// complementary raised-cosine ramps (fade-in + fade-out == 1 at every
// sample). Output length is sum(lengths) - (n - 1) * fade_samples.
// Throws TooShortError if a segment is shorter than two fades.
Waveform cross_fade_concat(std::span<const Waveform> segments, double fade_ms);

// Start offset of every segment inside the concatenated output.
std::vector<std::size_t> concat_offsets(std::span<const std::size_t> lengths, std::size_t fade);

}  // namespace clpenh::dsp
