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


#include "clpenh/stimuli.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "clpenh/dsp/crossfade.hpp"
#include "clpenh/dsp/fft.hpp"
#include "clpenh/errors.hpp"

namespace clpenh::stimuli {

namespace {

constexpr int kRate = kEnhancementRate;
constexpr double kPi = std::numbers::pi;

// splitmix64: cheap, portable seed derivation and sample generation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  double uniform() { return static_cast<double>(next() >> 11) * (1.0 / 9007199254740992.0); }
  double gaussian() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

 private:
  std::uint64_t state_;
};

std::uint64_t derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  Rng r(seed ^ (a * 0xD1B54A32D192ED03ull) ^ (b * 0x8CB92BA72F3D8DD7ull));
  r.next();
  return r.next();
}

std::size_t samples_for(double ms) { return static_cast<std::size_t>(std::lround(ms * 1e-3 * kRate)); }

// Gaussian noise restricted to [lo, hi) Hz by zeroing FFT bins, unit RMS.
std::vector<double> band_noise(std::size_t n, double lo, double hi, std::uint64_t seed) {
  if (n == 0) return {};
  Rng rng(seed);
  std::vector<double> x(n);
  for (auto& v : x) v = rng.gaussian();
  const dsp::RealFft fft(static_cast<int>(n));
  auto spec = fft.forward(x);
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const double hz = static_cast<double>(k) * kRate / static_cast<double>(n);
    if (hz < lo || hz >= hi) spec[k] = 0.0;
  }
  auto y = fft.inverse(spec);
  const double r = rms(y);
  if (r > 0.0) {
    for (auto& v : y) v /= r;
  }
  return y;
}

// Two-pole resonator with unity gain at DC.
class Resonator {
 public:
  Resonator(double freq, double bw) { set(freq, bw); }
  void set(double freq, double bw) {
    const double t = 1.0 / kRate;
    c_ = -std::exp(-2.0 * kPi * bw * t);
    b_ = 2.0 * std::exp(-kPi * bw * t) * std::cos(2.0 * kPi * freq * t);
    a_ = 1.0 - b_ - c_;
  }
  double operator()(double x) {
    const double y = a_ * x + b_ * y1_ + c_ * y2_;
    y2_ = y1_;
    y1_ = y;
    return y;
  }
  double a() const { return a_; }
  double b() const { return b_; }
  double c() const { return c_; }

 private:
  double a_ = 1.0, b_ = 0.0, c_ = 0.0, y1_ = 0.0, y2_ = 0.0;
};

// Matching two-zero antiresonator (inverse of the resonator transfer function).
class AntiResonator {
 public:
  AntiResonator(double freq, double bw) {
    const Resonator r(freq, bw);
    a_ = 1.0 / r.a();
    b_ = -r.b() / r.a();
    c_ = -r.c() / r.a();
  }
  double operator()(double x) {
    const double y = a_ * x + b_ * x1_ + c_ * x2_;
    x2_ = x1_;
    x1_ = x;
    return y;
  }

 private:
  double a_, b_, c_, x1_ = 0.0, x2_ = 0.0;
};

// Peaking equalizer biquad (gain in dB at `freq`).
std::vector<double> peaking(std::span<const double> x, double freq, double q, double gain_db) {
  const double a = std::pow(10.0, gain_db / 40.0);
  const double w0 = 2.0 * kPi * freq / kRate;
  const double alpha = std::sin(w0) / (2.0 * q);
  const double b0 = 1.0 + alpha * a, b1 = -2.0 * std::cos(w0), b2 = 1.0 - alpha * a;
  const double a0 = 1.0 + alpha / a, a1 = -2.0 * std::cos(w0), a2 = 1.0 - alpha / a;
  std::vector<double> y(x.size());
  double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
  for (std::size_t n = 0; n < x.size(); ++n) {
    const double v = (b0 * x[n] + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2) / a0;
    x2 = x1;
    x1 = x[n];
    y2 = y1;
    y1 = v;
    y[n] = v;
  }
  return y;
}

// Raised-cosine attack and release.
void apply_ramps(std::vector<double>& x, double attack_ms, double release_ms) {
  const std::size_t n = x.size();
  const std::size_t a = std::min(samples_for(attack_ms), n / 2);
  const std::size_t r = std::min(samples_for(release_ms), n / 2);
  for (std::size_t i = 0; i < a; ++i) x[i] *= 0.5 - 0.5 * std::cos(kPi * (i + 0.5) / a);
  for (std::size_t i = 0; i < r; ++i) x[n - 1 - i] *= 0.5 - 0.5 * std::cos(kPi * (i + 0.5) / r);
}

void scale_to_rms(std::vector<double>& x, double target) {
  const double r = rms(x);
  if (r > 0.0) {
    for (auto& v : x) v *= target / r;
  }
}

// One glottal closure transient: an impulse through a low, wide resonance.
std::vector<double> glottal_pulse(double peak) {
  const std::size_t n = samples_for(kGlottalPulseMs);
  Resonator r(600.0, 250.0);
  std::vector<double> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = r(i == 0 ? 1.0 : 0.0);
  const double m = *std::max_element(p.begin(), p.end(), [](double a, double b) {
    return std::abs(a) < std::abs(b);
  });
  for (auto& v : p) v *= peak / std::abs(m);
  return p;
}

void check_duration(double ms, const char* what) {
  if (!(ms >= 50.0)) throw ConfigError(std::string(what) + " needs at least 50 ms");
}

constexpr double kFricativeRms = 0.04;
constexpr double kBurstRms = 0.06;
constexpr double kPulsePeak = 0.25;
// Nasal turbulence RMS relative to the vowel, at full nasal depth.
constexpr double kNasalNoiseLevel = 0.4;

}  // namespace

Formants vowel_formants(char vowel) {
  switch (vowel) {
    case 'a': return {800.0, 1200.0, 2800.0};
    case 'i': return {300.0, 2300.0, 3000.0};
    case 'u': return {350.0, 900.0, 2700.0};
    default: throw ParseError(std::string("unknown vowel '") + vowel + "'");
  }
}

Waveform synth_vowel(char vowel, double duration_ms, const VowelOptions& o, std::uint64_t seed) {
  check_duration(duration_ms, "vowel");
  if (!(o.f0 > 0.0) || !(o.nasal_depth >= 0.0 && o.nasal_depth <= 1.0)) {
    throw ConfigError("vowel needs f0 > 0 and nasal depth in [0, 1]");
  }
  const Formants f = vowel_formants(vowel);
  const std::size_t n = samples_for(duration_ms);
  const double period = kRate / o.f0;

  const double d = o.nasal_depth;
  std::vector<double> oral(n);
  Resonator r1(f.f1, kFormantBandwidths.f1), r2(f.f2, kFormantBandwidths.f2), r3(f.f3, kFormantBandwidths.f3);
  const std::size_t transition = o.f3_onset_hz > 0.0 ? samples_for(o.transition_ms) : 0;
  double next_pulse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double e = 0.0;
    if (static_cast<double>(i) >= next_pulse) {
      e = 1.0;
      next_pulse += period;
    }
    if (i < transition) {
      const double u = static_cast<double>(i) / static_cast<double>(transition);
      r3.set(o.f3_onset_hz + (f.f3 - o.f3_onset_hz) * u, kFormantBandwidths.f3);
    } else if (i == transition && transition > 0) {
      r3.set(f.f3, kFormantBandwidths.f3);
    }
    oral[i] = r3(r2(r1(e)));
  }

  std::vector<double> out = oral;
  if (d > 0.0) {
    Resonator pole(250.0, 100.0);
    AntiResonator zero(500.0, 150.0);
    for (std::size_t i = 0; i < n; ++i) out[i] = (1.0 - d) * oral[i] + d * zero(pole(oral[i]));
    out = peaking(out, f.f1, f.f1 / (2.0 * kFormantBandwidths.f1), -6.0 * d);
    // Nasal emission adds broadband turbulence that is not locked to the pulses.
    scale_to_rms(out, 1.0);
    const auto turbulence = band_noise(n, 200.0, 5000.0, derive(seed, 12));
    for (std::size_t i = 0; i < n; ++i) out[i] += kNasalNoiseLevel * d * turbulence[i];
  }
  apply_ramps(out, 15.0, 15.0);
  scale_to_rms(out, o.rms);
  return Waveform(std::move(out), kRate);
}

Waveform synth_vowel(char vowel, double duration_ms, double f0, double nasal_depth, std::uint64_t seed) {
  VowelOptions o;
  o.f0 = f0;
  o.nasal_depth = nasal_depth;
  return synth_vowel(vowel, duration_ms, o, seed);
}

Waveform synth_fricative_s(double duration_ms, ErrorType error, std::uint64_t seed) {
  check_duration(duration_ms, "fricative");
  const std::size_t n = samples_for(duration_ms);
  std::vector<double> out(n, 0.0);
  switch (error) {
    case ErrorType::kNone:
    case ErrorType::kNasalized:
      out = band_noise(n, 3500.0, 8000.0, derive(seed, 1));
      break;
    case ErrorType::kPSNAE: {
      const auto high = band_noise(n, 3500.0, 8000.0, derive(seed, 1));
      const auto low = band_noise(n, 100.0, 1000.0, derive(seed, 2));
      for (std::size_t i = 0; i < n; ++i) out[i] = 0.5 * high[i] + 0.5 * low[i];
      break;
    }
    case ErrorType::kPA:
      out = band_noise(n, 2000.0, 4000.0, derive(seed, 3));
      break;
    case ErrorType::kGS: {
      // Glottal closure just before the vowel, silence elsewhere.
      const auto pulse = glottal_pulse(kPulsePeak);
      const std::size_t at = n - std::min(n, samples_for(25.0));
      for (std::size_t i = 0; i < pulse.size() && at + i < n; ++i) out[at + i] = pulse[i];
      return Waveform(std::move(out), kRate);
    }
    case ErrorType::kVelar:
      throw ConfigError("velar substitution does not apply to /s/");
  }
  apply_ramps(out, 25.0, 25.0);
  // Healthy level is the reference; PSNAE keeps the healthy band at -6 dB.
  scale_to_rms(out, error == ErrorType::kPSNAE ? 0.5 * std::sqrt(2.0) * kFricativeRms : kFricativeRms);
  return Waveform(std::move(out), kRate);
}

Waveform synth_stop(char stop, ErrorType error, char vowel_context, const StopTiming& timing,
                    std::uint64_t seed) {
  if (stop != 'k' && stop != 't' && stop != 'T') throw ParseError(std::string("unknown stop '") + stop + "'");
  if (error == ErrorType::kPSNAE) throw ConfigError("PSNAE does not apply to stops");
  if (error == ErrorType::kVelar && stop == 'k') throw ConfigError("velar substitution does not apply to /k/");
  vowel_formants(vowel_context);

  const std::size_t closure = samples_for(timing.closure_ms);
  const std::size_t burst = samples_for(timing.burst_ms);
  const std::size_t tail = error == ErrorType::kPA ? samples_for(timing.palatal_tail_ms) : 0;
  std::vector<double> out(closure + burst + tail, 0.0);

  if (error == ErrorType::kGS) {
    const auto pulse = glottal_pulse(kPulsePeak);
    for (std::size_t i = 0; i < pulse.size() && closure + i < out.size(); ++i) out[closure + i] = pulse[i];
    return Waveform(std::move(out), kRate);
  }

  double lo = 0.0, hi = 0.0;
  const char place = error == ErrorType::kVelar ? 'k' : stop;
  if (error == ErrorType::kPA) {
    lo = 2000.0;
    hi = 3000.0;
  } else if (place == 'k') {
    const double front = vowel_context == 'i' ? 300.0 : 0.0;
    lo = 800.0 + front;
    hi = 1800.0 + front;
  } else if (place == 't') {
    lo = 2500.0;
    hi = 4000.0;
  } else {
    lo = 2000.0;
    hi = 3500.0;
  }
  auto b = band_noise(burst, lo, hi, derive(seed, 4));
  // Fast attack, exponential release.
  const double tau = 5e-3 * kRate;
  for (std::size_t i = 0; i < burst; ++i) {
    const double attack = std::min(1.0, (static_cast<double>(i) + 1.0) / (1e-3 * kRate));
    b[i] *= attack * std::exp(-static_cast<double>(i) / tau);
  }
  scale_to_rms(b, kBurstRms);
  std::copy(b.begin(), b.end(), out.begin() + static_cast<std::ptrdiff_t>(closure));

  if (tail > 0) {
    auto t = band_noise(tail, 2000.0, 4000.0, derive(seed, 5));
    apply_ramps(t, 5.0, 15.0);
    scale_to_rms(t, 0.5 * kBurstRms);
    std::copy(t.begin(), t.end(), out.begin() + static_cast<std::ptrdiff_t>(closure + burst));
  }
  return Waveform(std::move(out), kRate);
}

std::vector<std::pair<char, char>> parse_word(std::string_view word) {
  if (word.empty() || word.size() % 2 != 0) {
    throw ParseError("word '" + std::string(word) + "' is not a sequence of consonant-vowel pairs");
  }
  std::vector<std::pair<char, char>> out;
  for (std::size_t i = 0; i < word.size(); i += 2) {
    const char c = word[i], v = word[i + 1];
    if (c != 's' && c != 'k' && c != 't' && c != 'T') {
      throw ParseError("word '" + std::string(word) + "': unknown consonant '" + c + "'");
    }
    if (v != 'a' && v != 'i' && v != 'u') {
      throw ParseError("word '" + std::string(word) + "': unknown vowel '" + v + "'");
    }
    out.emplace_back(c, v);
  }
  return out;
}

bool error_applies_to_word(std::string_view word, ErrorType error) {
  for (const auto& [c, v] : parse_word(word)) {
    switch (error) {
      case ErrorType::kPSNAE:
        if (c != 's') return false;
        break;
      case ErrorType::kVelar:
        if (c != 't' && c != 'T') return false;
        break;
      default:
        break;
    }
  }
  return true;
}

namespace {

Stimulus render(const StimulusSpec& spec, ErrorType error, double depth) {
  const auto pairs = parse_word(spec.word);
  if (!error_applies_to_word(spec.word, error)) {
    throw ConfigError("error " + std::string(pipeline::to_string(error)) + " does not apply to '" +
                      spec.word + "'");
  }
  const ErrorType consonant_error = error == ErrorType::kNasalized ? ErrorType::kNone : error;
  std::vector<Waveform> parts;
  std::vector<pipeline::PhonemeSegment> segs;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto [c, v] = pairs[p];
    const std::uint64_t cs = derive(spec.seed, 100 + 2 * p);
    const std::uint64_t vs = derive(spec.seed, 101 + 2 * p);
    pipeline::PhonemeSegment cseg;
    cseg.label = std::string(1, c);
    cseg.error = consonant_error;
    if (c == 's') {
      cseg.cls = pipeline::PhonemeClass::kFricative;
      parts.push_back(synth_fricative_s(spec.fricative_ms, consonant_error, cs));
    } else {
      cseg.cls = pipeline::PhonemeClass::kStop;
      parts.push_back(synth_stop(c, consonant_error, v, spec.stop, cs));
    }
    segs.push_back(cseg);

    VowelOptions vo;
    vo.f0 = spec.f0;
    vo.nasal_depth = depth;
    if (c == 'T') vo.f3_onset_hz = 0.7 * vowel_formants(v).f3;
    parts.push_back(synth_vowel(v, spec.vowel_ms, vo, vs));
    pipeline::PhonemeSegment vseg;
    vseg.label = std::string(1, v);
    vseg.cls = pipeline::PhonemeClass::kVowel;
    vseg.error = depth > 0.0 ? ErrorType::kNasalized : ErrorType::kNone;
    segs.push_back(vseg);
  }

  Stimulus out;
  out.wave = dsp::cross_fade_concat(parts, spec.fade_ms);
  const std::size_t fade = dsp::fade_samples(kRate, spec.fade_ms);
  std::vector<std::size_t> lengths;
  for (const auto& w : parts) lengths.push_back(w.size());
  const auto offsets = dsp::concat_offsets(lengths, fade);
  for (std::size_t k = 0; k < segs.size(); ++k) {
    segs[k].start = k == 0 ? 0 : offsets[k] + fade / 2;
    segs[k].end = k + 1 == segs.size() ? out.wave.size() : offsets[k + 1] + fade / 2;
  }
  out.annotation.segments = std::move(segs);
  out.annotation.word = spec.word;

  if (spec.noise_floor_rms > 0.0) {
    Rng rng(derive(spec.seed, 7));
    for (auto& s : out.wave.samples) s += spec.noise_floor_rms * rng.gaussian();
  }
  out.annotation.validate(out.wave.size());
  return out;
}

}  // namespace

WordStimulus synth_word(const StimulusSpec& spec) {
  if (!(spec.nasal_depth >= 0.0 && spec.nasal_depth <= 1.0)) throw ConfigError("nasal depth must lie in [0, 1]");
  if (spec.error == ErrorType::kNasalized && spec.nasal_depth <= 0.0) {
    throw ConfigError("a nasalized stimulus needs nasal depth > 0");
  }
  WordStimulus w;
  w.distorted = render(spec, spec.error, spec.nasal_depth);
  w.healthy = render(spec, ErrorType::kNone, 0.0);
  return w;
}

Stimulus synth_healthy_word(const StimulusSpec& spec) { return render(spec, ErrorType::kNone, 0.0); }

transforms::TemplateBank template_bank_from(std::span<const Stimulus> healthy) {
  transforms::TemplateBank bank;
  for (const auto& stim : healthy) {
    const auto& segs = stim.annotation.segments;
    for (std::size_t k = 0; k + 1 < segs.size(); ++k) {
      if (!pipeline::is_obstruent(segs[k].cls) || segs[k + 1].cls != pipeline::PhonemeClass::kVowel) continue;
      transforms::TemplateKey key{segs[k].label, segs[k + 1].label};
      if (bank.contains(key)) continue;
      const auto& w = stim.wave.samples;
      auto cut = [&](const pipeline::PhonemeSegment& s) {
        return std::vector<double>(w.begin() + static_cast<std::ptrdiff_t>(s.start),
                                   w.begin() + static_cast<std::ptrdiff_t>(s.end));
      };
      transforms::TemplateEntry entry;
      entry.exemplar = Waveform(cut(segs[k]), stim.wave.sample_rate);
      entry.context_rms = rms(cut(segs[k + 1]));
      bank.add(std::move(key), std::move(entry));
    }
  }
  return bank;
}

}  // namespace clpenh::stimuli
