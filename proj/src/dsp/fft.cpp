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


#include "clpenh/dsp/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace clpenh::dsp {

namespace {

struct Plans {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

// FFTW planning is not thread-safe; execution with the new-array API is.
std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

const Plans& plans_for(int n) {
  static std::map<int, Plans> cache;
  std::lock_guard<std::mutex> lock(plan_mutex());
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  double* in = fftw_alloc_real(static_cast<std::size_t>(n));
  fftw_complex* out = fftw_alloc_complex(static_cast<std::size_t>(n / 2 + 1));
  Plans p;
  p.forward = fftw_plan_dft_r2c_1d(n, in, out, FFTW_ESTIMATE);
  p.inverse = fftw_plan_dft_c2r_1d(n, out, in, FFTW_ESTIMATE);
  fftw_free(in);
  fftw_free(out);
  return cache.emplace(n, p).first->second;
}

struct RealBuf {
  explicit RealBuf(int n) : p(fftw_alloc_real(static_cast<std::size_t>(n))) {}
  ~RealBuf() { fftw_free(p); }
  RealBuf(const RealBuf&) = delete;
  RealBuf& operator=(const RealBuf&) = delete;
  double* p;
};

struct ComplexBuf {
  explicit ComplexBuf(int n) : p(fftw_alloc_complex(static_cast<std::size_t>(n))) {}
  ~ComplexBuf() { fftw_free(p); }
  ComplexBuf(const ComplexBuf&) = delete;
  ComplexBuf& operator=(const ComplexBuf&) = delete;
  fftw_complex* p;
};

}  // namespace

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

int next_power_of_two(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

RealFft::RealFft(int n) : n_(n) {
  if (n <= 0) throw std::invalid_argument("RealFft: size must be positive");
}

std::vector<std::complex<double>> RealFft::forward(std::span<const double> x) const {
  if (static_cast<int>(x.size()) > n_) throw std::invalid_argument("RealFft: input longer than size");
  const Plans& plans = plans_for(n_);
  RealBuf in(n_);
  ComplexBuf out(num_bins());
  std::memset(in.p, 0, sizeof(double) * static_cast<std::size_t>(n_));
  std::memcpy(in.p, x.data(), sizeof(double) * x.size());
  fftw_execute_dft_r2c(plans.forward, in.p, out.p);
  std::vector<std::complex<double>> result(static_cast<std::size_t>(num_bins()));
  for (int k = 0; k < num_bins(); ++k) result[k] = {out.p[k][0], out.p[k][1]};
  return result;
}

std::vector<double> RealFft::inverse(std::span<const std::complex<double>> spectrum) const {
  if (static_cast<int>(spectrum.size()) != num_bins()) {
    throw std::invalid_argument("RealFft: spectrum size mismatch");
  }
  const Plans& plans = plans_for(n_);
  ComplexBuf in(num_bins());
  RealBuf out(n_);
  for (int k = 0; k < num_bins(); ++k) {
    in.p[k][0] = spectrum[k].real();
    in.p[k][1] = spectrum[k].imag();
  }
  fftw_execute_dft_c2r(plans.inverse, in.p, out.p);
  std::vector<double> result(static_cast<std::size_t>(n_));
  for (int i = 0; i < n_; ++i) result[i] = out.p[i] / n_;
  return result;
}

}  // namespace clpenh::dsp
