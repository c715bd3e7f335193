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

#include <span>
#include <vector>

namespace clpenh::dsp {

// Prediction polynomial A(z) = 1 + a_1 z^-1 + ... + a_p z^-p; `coeffs` holds
// a_1..a_p. The residual is the inverse-filtered frame with zero initial
// state, so synthesis_filter(residual, coeffs) reproduces the frame.
struct LpcResult {
  std::vector<double> coeffs;
  std::vector<double> reflection;
  std::vector<double> residual;
  double prediction_error = 0.0;  // final Levinson error energy
};

std::vector<double> autocorrelation(std::span<const double> x, int max_lag);

struct LevinsonResult {
  std::vector<double> coeffs;
  std::vector<double> reflection;
  double error = 0.0;
};

// Throws DegenerateSignalError when r[0] <= 0.
LevinsonResult levinson_durbin(std::span<const double> r, int order);

// Step-up recursion from reflection coefficients to a_1..a_p.
std::vector<double> reflection_to_direct(std::span<const double> k);

std::vector<double> inverse_filter(std::span<const double> x, std::span<const double> a);
std::vector<double> synthesis_filter(std::span<const double> e, std::span<const double> a);

// Autocorrelation method (rectangular window) + Levinson-Durbin.
LpcResult lpc(std::span<const double> frame, int order);

}  // namespace clpenh::dsp
