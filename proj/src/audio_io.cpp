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


#include "clpenh/audio_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numeric>

#include "clpenh/errors.hpp"

namespace clpenh {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFF));
}

void put_u16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xFF));
  out.push_back(static_cast<unsigned char>((v >> 8) & 0xFF));
}

void put_tag(std::vector<unsigned char>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

struct FmtInfo {
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits = 0;
};

}  // namespace

bool is_canonical_rate(int rate) {
  return rate == 8000 || rate == 10000 || rate == 16000 || rate == 48000;
}

Waveform decode_wav(std::span<const unsigned char> bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw FormatError("not a RIFF/WAVE stream");
  }
  FmtInfo fmt;
  bool have_fmt = false;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::uint32_t size = read_u32(chunk + 4);
    const std::size_t body = pos + 8;
    if (size > bytes.size() - body) {
      // Tolerate a truncated data chunk (common with streaming writers).
      if (std::memcmp(chunk, "data", 4) != 0) throw FormatError("chunk overruns file");
    }
    const std::size_t avail = std::min<std::size_t>(size, bytes.size() - body);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (avail < 16) throw FormatError("fmt chunk too small");
      fmt.format = read_u16(chunk + 8);
      fmt.channels = read_u16(chunk + 10);
      fmt.sample_rate = read_u32(chunk + 12);
      fmt.bits = read_u16(chunk + 22);
      if (fmt.format == kFormatExtensible) {
        if (avail < 26) throw FormatError("extensible fmt chunk too small");
        fmt.format = read_u16(chunk + 8 + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = chunk + 8;
      data_size = avail;
    }
    pos = body + avail + (avail & 1U);
  }
  if (!have_fmt) throw FormatError("missing fmt chunk");
  if (data == nullptr) throw FormatError("missing data chunk");
  if (fmt.channels == 0 || fmt.sample_rate == 0) throw FormatError("invalid fmt fields");

  const bool pcm16 = fmt.format == kFormatPcm && fmt.bits == 16;
  const bool f32 = fmt.format == kFormatFloat && fmt.bits == 32;
  if (!pcm16 && !f32) {
    throw UnsupportedCodecError("unsupported encoding: format " + std::to_string(fmt.format) +
                                ", " + std::to_string(fmt.bits) + " bits");
  }
  const std::size_t bytes_per_sample = fmt.bits / 8;
  const std::size_t frame_bytes = bytes_per_sample * fmt.channels;
  const std::size_t frames = data_size / frame_bytes;

  std::vector<double> out(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    double acc = 0.0;
    for (std::size_t c = 0; c < fmt.channels; ++c) {
      const unsigned char* p = data + i * frame_bytes + c * bytes_per_sample;
      if (pcm16) {
        acc += static_cast<std::int16_t>(read_u16(p)) / 32768.0;
      } else {
        const std::uint32_t bits = read_u32(p);
        float v;
        std::memcpy(&v, &bits, sizeof v);
        acc += v;
      }
    }
    out[i] = acc / fmt.channels;
  }
  return Waveform(std::move(out), static_cast<int>(fmt.sample_rate));
}

std::vector<unsigned char> encode_wav_pcm16(const Waveform& w) {
  for (double s : w.samples) {
    if (!std::isfinite(s)) throw FormatError("cannot encode non-finite sample");
  }
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(w.size() * 2);
  std::vector<unsigned char> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, kFormatPcm);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(w.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(w.sample_rate) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  put_tag(out, "data");
  put_u32(out, data_bytes);
  for (double s : w.samples) {
    const double q = std::clamp(std::round(s * 32768.0), -32768.0, 32767.0);
    put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
  }
  return out;
}

Waveform read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  try {
    return decode_wav(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  } catch (const UnsupportedCodecError& e) {
    throw UnsupportedCodecError(path.string() + ": " + e.what());
  }
}

void write_wav(const Waveform& w, const std::filesystem::path& path) {
  const auto bytes = encode_wav_pcm16(w);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

namespace {

constexpr int kHalfTaps = 16;  // 32 taps per branch
constexpr double kKaiserBeta = 8.0;

double kaiser(double x) {
  // x in [-1, 1]
  const double t = 1.0 - x * x;
  if (t <= 0.0) return std::cyl_bessel_i(0.0, 0.0) / std::cyl_bessel_i(0.0, kKaiserBeta);
  return std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(t)) / std::cyl_bessel_i(0.0, kKaiserBeta);
}

double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  return std::sin(M_PI * x) / (M_PI * x);
}

}  // namespace

Waveform resample(const Waveform& w, int target_rate) {
  if (target_rate <= 0) throw std::invalid_argument("resample: target rate must be positive");
  if (!is_canonical_rate(target_rate)) {
    throw std::invalid_argument("resample: " + std::to_string(target_rate) +
                                " Hz is not a canonical rate");
  }
  if (target_rate == w.sample_rate) return w;

  const long g = std::gcd(static_cast<long>(target_rate), static_cast<long>(w.sample_rate));
  const long up = target_rate / g;
  const long down = w.sample_rate / g;
  const double ratio = std::min(1.0, static_cast<double>(target_rate) / w.sample_rate);

  // One kernel per fractional phase p/up, normalized to unit DC gain.
  std::vector<std::vector<double>> bank(static_cast<std::size_t>(up),
                                        std::vector<double>(2 * kHalfTaps));
  for (long p = 0; p < up; ++p) {
    const double frac = static_cast<double>(p) / up;
    double sum = 0.0;
    for (int k = 0; k < 2 * kHalfTaps; ++k) {
      // Input offset relative to floor(t): k - (kHalfTaps - 1).
      const double tau = frac - (k - (kHalfTaps - 1));
      const double h = ratio * sinc(ratio * tau) * kaiser(tau / kHalfTaps);
      bank[p][k] = h;
      sum += h;
    }
    for (double& h : bank[p]) h /= sum;
  }

  const std::size_t n_in = w.size();
  const auto n_out = static_cast<std::size_t>(
      std::llround(static_cast<double>(n_in) * target_rate / w.sample_rate));
  std::vector<double> out(n_out, 0.0);
  for (std::size_t n = 0; n < n_out; ++n) {
    const long long num = static_cast<long long>(n) * down;
    const long long base = num / up;
    const auto& h = bank[static_cast<std::size_t>(num % up)];
    double acc = 0.0;
    for (int k = 0; k < 2 * kHalfTaps; ++k) {
      const long long idx = base + k - (kHalfTaps - 1);
      if (idx < 0 || idx >= static_cast<long long>(n_in)) continue;
      acc += h[k] * w.samples[static_cast<std::size_t>(idx)];
    }
    out[n] = acc;
  }
  return Waveform(std::move(out), target_rate);
}

double rms(std::span<const double> x) {
  if (x.empty()) return 0.0;
  long double acc = 0.0L;
  for (double v : x) acc += static_cast<long double>(v) * v;
  return static_cast<double>(std::sqrt(acc / x.size()));
}

Waveform normalize_rms(const Waveform& w, double target_rms) {
  const double r = rms(w.samples);
  if (r == 0.0) throw DegenerateSignalError("normalize_rms: all-zero signal");
  const double c = target_rms / r;
  Waveform out = w;
  for (double& s : out.samples) s *= c;
  return out;
}

}  // namespace clpenh
