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


#include "clpenh/dsp/lpc.hpp"

#include <algorithm>
#include <stdexcept>

#include "clpenh/errors.hpp"

namespace clpenh::dsp {

std::vector<double> autocorrelation(std::span<const double> x, int max_lag) {
  std::vector<double> r(static_cast<std::size_t>(max_lag) + 1, 0.0);
  const std::size_t n = x.size();
  for (int lag = 0; lag <= max_lag; ++lag) {
    long double acc = 0.0L;
    for (std::size_t i = static_cast<std::size_t>(lag); i < n; ++i) {
      acc += static_cast<long double>(x[i]) * x[i - lag];
    }
    r[lag] = static_cast<double>(acc);
  }
  return r;
}

LevinsonResult levinson_durbin(std::span<const double> r, int order) {
  if (static_cast<int>(r.size()) < order + 1) throw std::invalid_argument("levinson: short autocorrelation");
  if (!(r[0] > 0.0)) throw DegenerateSignalError("levinson: zero-energy frame");
  LevinsonResult out;
  out.coeffs.assign(static_cast<std::size_t>(order), 0.0);
  out.reflection.assign(static_cast<std::size_t>(order), 0.0);
  std::vector<double> prev(static_cast<std::size_t>(order), 0.0);
  double err = r[0];
  for (int i = 0; i < order; ++i) {
    double acc = r[i + 1];
    for (int j = 0; j < i; ++j) acc += out.coeffs[j] * r[i - j];
    // Perfectly predictable: remaining coefficients stay zero.
    if (err <= r[0] * 1e-14) break;
    const double k = -acc / err;
    out.reflection[i] = k;
    prev.assign(out.coeffs.begin(), out.coeffs.end());
    for (int j = 0; j < i; ++j) out.coeffs[j] = prev[j] + k * prev[i - 1 - j];
    out.coeffs[i] = k;
    err *= (1.0 - k * k);
  }
  out.error = err;
  return out;
}

std::vector<double> reflection_to_direct(std::span<const double> k) {
  const std::size_t p = k.size();
  std::vector<double> a(p, 0.0), prev(p, 0.0);
  for (std::size_t i = 0; i < p; ++i) {
    prev = a;
    for (std::size_t j = 0; j < i; ++j) a[j] = prev[j] + k[i] * prev[i - 1 - j];
    a[i] = k[i];
  }
  return a;
}

std::vector<double> inverse_filter(std::span<const double> x, std::span<const double> a) {
  std::vector<double> e(x.size());
  for (std::size_t n = 0; n < x.size(); ++n) {
    double acc = x[n];
    for (std::size_t k = 1; k <= a.size() && k <= n; ++k) acc += a[k - 1] * x[n - k];
    e[n] = acc;
  }
  return e;
}

std::vector<double> synthesis_filter(std::span<const double> e, std::span<const double> a) {
  std::vector<double> y(e.size());
  for (std::size_t n = 0; n < e.size(); ++n) {
    double acc = e[n];
    for (std::size_t k = 1; k <= a.size() && k <= n; ++k) acc -= a[k - 1] * y[n - k];
    y[n] = acc;
  }
  return y;
}

LpcResult lpc(std::span<const double> frame, int order) {
  if (order < 1 || static_cast<std::size_t>(order) >= frame.size()) {
    throw std::invalid_argument("lpc: order must be in [1, frame length)");
  }
  const auto r = autocorrelation(frame, order);
  auto lev = levinson_durbin(r, order);
  LpcResult out;
  out.residual = inverse_filter(frame, lev.coeffs);
  out.coeffs = std::move(lev.coeffs);
  out.reflection = std::move(lev.reflection);
  out.prediction_error = lev.error;
  return out;
}

}  // namespace clpenh::dsp
