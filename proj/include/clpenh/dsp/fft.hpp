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

#include <complex>
#include <span>
#include <vector>

namespace clpenh::dsp {

// Real-input DFT of arbitrary size backed by FFTW. Plans are cached per size
// behind a mutex; execution is thread-safe.
class RealFft {
 public:
  explicit RealFft(int n);

  int size() const { return n_; }
  int num_bins() const { return n_ / 2 + 1; }

  // Input shorter than size() is zero-padded.
  std::vector<std::complex<double>> forward(std::span<const double> x) const;
  // Unnormalized c2r followed by division by size(), so inverse(forward(x)) == x.
  std::vector<double> inverse(std::span<const std::complex<double>> spectrum) const;

 private:
  int n_;
};

bool is_power_of_two(int n);
int next_power_of_two(int n);

}  // namespace clpenh::dsp
