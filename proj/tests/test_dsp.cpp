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


#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <functional>

#include "clpenh/dsp/crossfade.hpp"
#include "clpenh/dsp/dtw.hpp"
#include "clpenh/dsp/features.hpp"
#include "clpenh/dsp/lpc.hpp"
#include "clpenh/dsp/stft.hpp"
#include "clpenh/errors.hpp"
#include "test_support.hpp"

namespace clpenh::dsp {
namespace {

using clpenh::testing::sine;
using clpenh::testing::white_noise;

// ---------------------------------------------------------------- STFT

TEST(Stft, DcBinEqualsWindowSum) {
  const Waveform dc(std::vector<double>(4096, 1.0), 16000);
  const auto s = stft(dc, 512, 128);
  const auto win = hann_window(512);
  double sum = 0.0;
  for (double v : win) sum += v;
  ASSERT_EQ(s.num_bins(), 257);
  for (Eigen::Index t = 0; t < s.num_frames(); ++t) EXPECT_NEAR(std::abs(s.frames(t, 0)), sum, 1e-9);
}

TEST(Stft, BinCentredToneMatchesHannSpectrum) {
  // Periodic Hann has DFT N/2 at bin 0, -N/4 at bins +-1 and zero elsewhere,
  // so a cosine of amplitude A at bin k0 gives A*N/4 at k0, A*N/8 at k0+-1.
  const int n = 512, k0 = 40;
  const double amp = 0.8;
  const auto w = sine(k0 * 16000.0 / n, 0.25, 16000, amp, clpenh::testing::kPi / 2.0);
  const auto s = stft(w, n, 128);
  for (Eigen::Index t = 0; t < s.num_frames(); ++t) {
    EXPECT_NEAR(std::abs(s.frames(t, k0)), amp * n / 4.0, 1e-8);
    EXPECT_NEAR(std::abs(s.frames(t, k0 - 1)), amp * n / 8.0, 1e-8);
    EXPECT_NEAR(std::abs(s.frames(t, k0 + 1)), amp * n / 8.0, 1e-8);
    for (Eigen::Index k = 0; k < s.num_bins(); ++k) {
      if (std::abs(k - k0) > 1) {
        ASSERT_LT(std::abs(s.frames(t, k)), 1e-8);
      }
    }
  }
}

TEST(Stft, ZerosGiveZeroSpectrogram) {
  const auto s = stft(Waveform(std::vector<double>(2048, 0.0), 16000));
  EXPECT_EQ(s.frames.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(istft(s, 2048).samples, std::vector<double>(2048, 0.0));
}

TEST(Stft, ShorterThanFrameIsTooShort) {
  EXPECT_THROW(stft(Waveform(std::vector<double>(511, 0.1), 16000), 512, 128), TooShortError);
}

TEST(Stft, FrameGeometry) {
  const auto s = stft(white_noise(16000, 16000, 1), 512, 128);
  EXPECT_EQ(s.num_frames(), (16000 - 512) / 128 + 1);
  EXPECT_EQ(s.frame_len, 512);
  EXPECT_EQ(s.hop, 128);
}

double interior_error(const Waveform& a, const Waveform& b, std::size_t edge) {
  double err = 0.0;
  for (std::size_t i = edge; i + edge < a.size(); ++i) err = std::max(err, std::abs(a.samples[i] - b.samples[i]));
  return err;
}

TEST(Stft, RoundTripPerfectReconstructionProperty) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::size_t len = 3000 + 97 * seed;
    const auto w = white_noise(len, 16000, seed, 0.3);
    double peak = 0.0;
    for (double v : w.samples) peak = std::max(peak, std::abs(v));
    for (int hop : {128, 256}) {
      const auto s = stft(w, 512, hop);
      const auto covered = static_cast<std::size_t>((s.num_frames() - 1) * hop + 512);
      const auto r = istft(s, covered);
      ASSERT_EQ(r.size(), covered);
      ASSERT_LE(interior_error(r, Waveform({w.samples.begin(), w.samples.begin() + covered}, 16000), 512),
                1e-6 * peak);
    }
  }
}

TEST(Stft, PaddedRoundTripCoversEdges) {
  const auto w = white_noise(5000, 16000, 11, 0.3);
  const auto r = istft(stft_padded(w), w.size());
  EXPECT_LE(interior_error(r, w, 0), 1e-9);
}

TEST(Stft, DoubledMagnitudeDoublesSignal) {
  const auto w = white_noise(512 + 30 * 128, 16000, 12);
  auto s = stft(w);
  s.frames *= 2.0;
  const auto r = istft(s, w.size());
  for (std::size_t i = 512; i + 512 < w.size(); ++i) ASSERT_NEAR(r.samples[i], 2.0 * w.samples[i], 1e-9);
}

TEST(Stft, InvalidFramingRejected) {
  EXPECT_THROW(validate_framing(500, 125), std::invalid_argument);
  EXPECT_THROW(validate_framing(512, 512), std::invalid_argument);
}

// ---------------------------------------------------------------- features

TEST(MelCepstra, Deterministic) {
  const auto w = white_noise(8000, 16000, 2);
  EXPECT_EQ(mel_cepstra(w).frames, mel_cepstra(w).frames);
}

TEST(MelCepstra, GainShiftsOnlyC0) {
  // Scaling by 2 multiplies every filter energy by 4; the orthonormal DCT
  // maps that constant log offset to c_0 only, as sqrt(26) * ln 4.
  const auto w = white_noise(8000, 16000, 3);
  Waveform w2 = w;
  for (auto& v : w2.samples) v *= 2.0;
  const auto a = mel_cepstra(w), b = mel_cepstra(w2);
  ASSERT_EQ(a.num_frames(), b.num_frames());
  for (Eigen::Index t = 0; t < a.num_frames(); ++t) {
    ASSERT_NEAR(b.frames(t, 0) - a.frames(t, 0), std::sqrt(26.0) * std::log(4.0), 1e-6);
    for (int k = 1; k < a.order; ++k) ASSERT_NEAR(a.frames(t, k), b.frames(t, k), 1e-6);
  }
}

TEST(MelCepstra, FlatFrameHasSmallHigherCepstra) {
  std::vector<double> x(400, 0.0);
  x[200] = 0.5;  // centred impulse: flat power spectrum after windowing
  const auto c = mel_cepstra(Waveform(x, 16000));
  ASSERT_EQ(c.num_frames(), 1);
  for (int k = 1; k < c.order; ++k) EXPECT_LT(std::abs(c.frames(0, k)), 0.05 * std::abs(c.frames(0, 0)));
}

TEST(MelCepstra, AllEntriesFiniteOnSilence) {
  const auto c = mel_cepstra(Waveform(std::vector<double>(3200, 0.0), 16000));
  EXPECT_TRUE(c.frames.allFinite());
}

TEST(ThirdOctave, LowToneConcentratesInFirstBand) {
  const auto e = third_octave_energies(sine(150.0, 1.0, 10000));
  const Eigen::VectorXd total = e.frames.colwise().sum();
  Eigen::Index arg = 0;
  total.maxCoeff(&arg);
  EXPECT_EQ(arg, 0);
  // A 150 Hz tone is only 1.5 bins wide at this resolution; band 0 still
  // holds the clear majority of the analysed energy.
  EXPECT_GT(total[0] / total.sum(), 0.6);
}

TEST(ThirdOctave, HighToneInTopBand) {
  const auto e = third_octave_energies(sine(4800.0, 1.0, 10000));
  const Eigen::VectorXd total = e.frames.colwise().sum();
  Eigen::Index arg = 0;
  total.maxCoeff(&arg);
  EXPECT_EQ(arg, kNumThirdOctaveBands - 1);
}

TEST(ThirdOctave, SilenceIsZeroAndCentresAreThirdOctaves) {
  const auto e = third_octave_energies(Waveform(std::vector<double>(5000, 0.0), 10000));
  EXPECT_EQ(e.frames.maxCoeff(), 0.0);
  ASSERT_EQ(e.frames.cols(), 15);
  for (int j = 0; j < 15; ++j) EXPECT_NEAR(e.centres_hz[j], 150.0 * std::pow(2.0, j / 3.0), 1e-9);
}

TEST(ThirdOctave, FramesAreIndependentAndNonNegative) {
  const auto w = white_noise(6000, 10000, 4);
  const auto all = third_octave_energies(w);
  EXPECT_GE(all.frames.minCoeff(), 0.0);
  // Frame t equals frame 0 of the excerpt starting at t * hop.
  for (Eigen::Index t : {3, 17, 30}) {
    std::vector<double> part(w.samples.begin() + t * 128, w.samples.end());
    const auto sub = third_octave_energies(Waveform(part, 10000));
    for (int j = 0; j < 15; ++j) ASSERT_NEAR(sub.frames(0, j), all.frames(t, j), 1e-12 * (1.0 + all.frames(t, j)));
  }
}

TEST(ThirdOctave, RequiresTenKilohertz) {
  EXPECT_THROW(third_octave_energies(white_noise(5000, 16000, 1)), std::invalid_argument);
}

// ---------------------------------------------------------------- LPC

TEST(Lpc, RecoversAr2Coefficients) {
  // x[n] = 1.5 x[n-1] - 0.7 x[n-2] + e[n], i.e. A(z) = 1 - 1.5 z^-1 + 0.7 z^-2.
  const auto e = white_noise(4096, 16000, 5, 1.0);
  std::vector<double> x(4096, 0.0);
  for (std::size_t n = 0; n < x.size(); ++n) {
    x[n] = e.samples[n] + (n >= 1 ? 1.5 * x[n - 1] : 0.0) - (n >= 2 ? 0.7 * x[n - 2] : 0.0);
  }
  const auto r = lpc(x, 2);
  EXPECT_NEAR(r.coeffs[0], -1.5, 0.05);
  EXPECT_NEAR(r.coeffs[1], 0.7, 0.05);
}

TEST(Lpc, WhiteNoiseHasNoPredictionGain) {
  const auto w = white_noise(8192, 16000, 6);
  const auto r = lpc(w.samples, 12);
  const double gain_db = 10.0 * std::log10(clpenh::testing::energy(w.samples) / clpenh::testing::energy(r.residual));
  EXPECT_NEAR(gain_db, 0.0, 1.0);
}

TEST(Lpc, InverseThenSynthesisIsExact) {
  const auto v = clpenh::testing::pulse_vowel(150.0, 0.05);
  const auto r = lpc(v.wave.samples, 12);
  const auto back = synthesis_filter(r.residual, r.coeffs);
  const double scale = std::sqrt(clpenh::testing::energy(v.wave.samples));
  for (std::size_t i = 0; i < back.size(); ++i) ASSERT_NEAR(back[i], v.wave.samples[i], 1e-6 * scale);
}

TEST(Lpc, LevinsonSolvesToeplitzNormalEquations) {
  const auto w = white_noise(2000, 16000, 7);
  std::vector<double> x = w.samples;
  clpenh::testing::resonate(x, 900.0, 150.0, 16000);
  const int p = 10;
  const auto r = autocorrelation(x, p);
  Eigen::MatrixXd toeplitz(p, p);
  Eigen::VectorXd rhs(p);
  for (int i = 0; i < p; ++i) {
    rhs[i] = -r[i + 1];
    for (int j = 0; j < p; ++j) toeplitz(i, j) = r[std::abs(i - j)];
  }
  const Eigen::VectorXd oracle = toeplitz.ldlt().solve(rhs);
  const auto lev = levinson_durbin(r, p);
  for (int i = 0; i < p; ++i) EXPECT_NEAR(lev.coeffs[i], oracle[i], 1e-8);
  const auto direct = reflection_to_direct(lev.reflection);
  for (int i = 0; i < p; ++i) EXPECT_NEAR(direct[i], lev.coeffs[i], 1e-10);
}

TEST(Lpc, AllZeroFrameIsDegenerate) {
  EXPECT_THROW(lpc(std::vector<double>(400, 0.0), 12), DegenerateSignalError);
}

// ---------------------------------------------------------------- DTW

// Minimum path cost over every monotone path, by exhaustive recursion.
double brute_force_dtw(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const Eigen::Index m = a.rows(), n = b.rows();
  double best = std::numeric_limits<double>::infinity();
  std::function<void(Eigen::Index, Eigen::Index, double)> walk = [&](Eigen::Index i, Eigen::Index j, double acc) {
    acc += (a.row(i) - b.row(j)).norm();
    if (i == m - 1 && j == n - 1) {
      best = std::min(best, acc);
      return;
    }
    if (i + 1 < m) walk(i + 1, j, acc);
    if (j + 1 < n) walk(i, j + 1, acc);
    if (i + 1 < m && j + 1 < n) walk(i + 1, j + 1, acc);
  };
  walk(0, 0, 0.0);
  return best;
}

void expect_valid_path(const DtwPath& p, int m, int n) {
  ASSERT_FALSE(p.pairs.empty());
  EXPECT_EQ(p.pairs.front(), std::make_pair(0, 0));
  EXPECT_EQ(p.pairs.back(), std::make_pair(m - 1, n - 1));
  for (std::size_t k = 1; k < p.pairs.size(); ++k) {
    const int di = p.pairs[k].first - p.pairs[k - 1].first;
    const int dj = p.pairs[k].second - p.pairs[k - 1].second;
    ASSERT_TRUE((di == 1 && dj == 0) || (di == 0 && dj == 1) || (di == 1 && dj == 1));
  }
  EXPECT_GE(static_cast<int>(p.pairs.size()), std::max(m, n));
  EXPECT_LE(static_cast<int>(p.pairs.size()), m + n - 1);
}

TEST(Dtw, MatchesBruteForceOnRandomSmallInputs) {
  std::mt19937_64 gen(42);
  std::uniform_int_distribution<int> len(1, 6);
  std::normal_distribution<double> val(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const int m = len(gen), n = len(gen), d = 1 + trial % 3;
    Eigen::MatrixXd a(m, d), b(n, d);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = val(gen);
    for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = val(gen);
    const auto p = dtw_align(a, b);
    ASSERT_NEAR(p.cost, brute_force_dtw(a, b), 1e-9) << "trial " << trial;
    expect_valid_path(p, m, n);
    double along = 0.0;
    for (const auto& [i, j] : p.pairs) along += (a.row(i) - b.row(j)).norm();
    ASSERT_NEAR(along, p.cost, 1e-9);
  }
}

TEST(Dtw, IdenticalSequencesGiveDiagonal) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Random(7, 4);
  const auto p = dtw_align(a, a);
  EXPECT_EQ(p.cost, 0.0);
  ASSERT_EQ(p.pairs.size(), 7u);
  for (int k = 0; k < 7; ++k) EXPECT_EQ(p.pairs[k], std::make_pair(k, k));
}

TEST(Dtw, DuplicatedFrameGivesOneHorizontalStep) {
  Eigen::MatrixXd a(5, 2);
  a << 0, 0, 1, 0, 2, 1, 3, 3, 5, 2;
  Eigen::MatrixXd b(6, 2);
  b << a.topRows(3), a.row(2), a.bottomRows(2);
  const auto p = dtw_align(a, b);
  EXPECT_EQ(p.cost, 0.0);
  int horizontal = 0;
  for (std::size_t k = 1; k < p.pairs.size(); ++k) {
    if (p.pairs[k].first == p.pairs[k - 1].first && p.pairs[k].second == p.pairs[k - 1].second + 1) ++horizontal;
  }
  EXPECT_EQ(horizontal, 1);
}

TEST(Dtw, DimensionMismatchAndEmptyRejected) {
  EXPECT_THROW(dtw_align(Eigen::MatrixXd::Zero(3, 2), Eigen::MatrixXd::Zero(3, 3)), DimensionMismatchError);
  EXPECT_THROW(dtw_align(Eigen::MatrixXd::Zero(0, 2), Eigen::MatrixXd::Zero(3, 2)), std::invalid_argument);
}

TEST(Dtw, SecondToFirstMapping) {
  DtwPath p;
  p.pairs = {{0, 0}, {1, 0}, {2, 1}, {2, 2}, {3, 3}};
  EXPECT_EQ(map_second_to_first(p, 4), (std::vector<int>{0, 2, 2, 3}));
}

// ---------------------------------------------------------------- cross-fade

TEST(CrossFade, ConstantSegmentsStayConstant) {
  const Waveform seg(std::vector<double>(800, 0.5), 16000);
  const std::vector<Waveform> segs{seg, seg};
  const auto out = cross_fade_concat(segs, 5.0);
  ASSERT_EQ(out.size(), 1600u - 80u);
  for (double v : out.samples) ASSERT_NEAR(v, 0.5, 0.03 * 0.5);
}

TEST(CrossFade, SingleSegmentUnchangedAndZeroFadeConcatenates) {
  const auto a = white_noise(300, 16000, 1), b = white_noise(200, 16000, 2);
  EXPECT_EQ(cross_fade_concat(std::vector<Waveform>{a}, 5.0).samples, a.samples);
  const auto out = cross_fade_concat(std::vector<Waveform>{a, b}, 0.0);
  std::vector<double> expect = a.samples;
  expect.insert(expect.end(), b.samples.begin(), b.samples.end());
  EXPECT_EQ(out.samples, expect);
}

TEST(CrossFade, LengthArithmeticAndOffsets) {
  std::vector<Waveform> segs{white_noise(500, 16000, 1), white_noise(700, 16000, 2), white_noise(300, 16000, 3)};
  const auto out = cross_fade_concat(segs, 5.0);
  EXPECT_EQ(out.size(), 1500u - 2u * 80u);
  const std::vector<std::size_t> lens{500, 700, 300};
  EXPECT_EQ(concat_offsets(lens, 80), (std::vector<std::size_t>{0, 420, 1040}));
  // Outside the joints every segment is copied verbatim.
  for (std::size_t i = 80; i < 420; ++i) ASSERT_EQ(out.samples[i], segs[0].samples[i]);
  for (std::size_t i = 80; i < 620; ++i) ASSERT_EQ(out.samples[420 + i], segs[1].samples[i]);
}

TEST(CrossFade, TooShortSegmentRejected) {
  std::vector<Waveform> segs{white_noise(500, 16000, 1), white_noise(100, 16000, 2)};
  EXPECT_THROW(cross_fade_concat(segs, 5.0), TooShortError);
}

}  // namespace
}  // namespace clpenh::dsp
