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


#include "clpenh/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "clpenh/csv.hpp"
#include "clpenh/errors.hpp"

namespace clpenh::metrics {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr int kMetricOrder = 13;

Waveform at_rate(const Waveform& w, int rate) {
  return w.sample_rate == rate ? w : resample(w, rate);
}

// Band amplitude envelopes (frames x bands) of both signals.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> envelopes(const Waveform& test, const Waveform& ref) {
  if (test.sample_rate != kMetricsRate || ref.sample_rate != kMetricsRate) {
    throw DimensionMismatchError("intelligibility metrics need 10 kHz input");
  }
  if (test.size() != ref.size()) {
    throw DimensionMismatchError("intelligibility metrics need equal lengths (" +
                                 std::to_string(test.size()) + " vs " + std::to_string(ref.size()) + ")");
  }
  Eigen::MatrixXd x = dsp::third_octave_energies(ref).frames.cwiseSqrt();
  Eigen::MatrixXd y = dsp::third_octave_energies(test).frames.cwiseSqrt();
  if (x.rows() < kStoiSegmentFrames) {
    throw TooShortError("intelligibility metrics need at least " +
                        std::to_string(kStoiSegmentFrames) + " frames, got " +
                        std::to_string(x.rows()));
  }
  return {std::move(x), std::move(y)};
}

// Zero-mean, unit-norm copy (all zeros if the vector is constant).
Eigen::VectorXd normalized(const Eigen::VectorXd& v) {
  Eigen::VectorXd c = v.array() - v.mean();
  return c / (c.norm() + kEps);
}

}  // namespace

double stoi(const Waveform& test, const Waveform& ref) {
  const auto [x, y] = envelopes(test, ref);
  const double clip = 1.0 + std::pow(10.0, -kStoiClipDb / 20.0);
  const Eigen::Index n = kStoiSegmentFrames;
  double total = 0.0;
  long count = 0;
  for (Eigen::Index m = n; m <= x.rows(); ++m) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const Eigen::VectorXd xs = x.col(j).segment(m - n, n);
      const Eigen::VectorXd ys = y.col(j).segment(m - n, n);
      const double alpha = xs.norm() / (ys.norm() + kEps);
      const Eigen::VectorXd yc = (alpha * ys).cwiseMin(clip * xs);
      total += normalized(xs).dot(normalized(yc));
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

double estoi(const Waveform& test, const Waveform& ref) {
  const auto [x, y] = envelopes(test, ref);
  const Eigen::Index n = kStoiSegmentFrames;
  const Eigen::Index bands = x.cols();
  double total = 0.0;
  long count = 0;
  for (Eigen::Index m = n; m <= x.rows(); ++m) {
    Eigen::MatrixXd xb = x.middleRows(m - n, n);  // frames x bands
    Eigen::MatrixXd yb = y.middleRows(m - n, n);
    for (Eigen::Index j = 0; j < bands; ++j) {
      xb.col(j) = normalized(xb.col(j));
      yb.col(j) = normalized(yb.col(j));
    }
    double seg = 0.0;
    for (Eigen::Index t = 0; t < n; ++t) {
      seg += normalized(xb.row(t).transpose()).dot(normalized(yb.row(t).transpose()));
    }
    total += seg / static_cast<double>(n);
    ++count;
  }
  return total / static_cast<double>(count);
}

ReferenceTemplate make_template(std::string id, std::string word_label, const Waveform& wave) {
  ReferenceTemplate t;
  t.id = std::move(id);
  t.word_label = std::move(word_label);
  t.wave = at_rate(wave, kEnhancementRate);
  if (t.wave.empty() || rms(t.wave.samples) <= 0.0) {
    throw DegenerateSignalError("reference template '" + t.id + "' is silent");
  }
  t.wave_10k = at_rate(wave, kMetricsRate);
  t.align_features = dsp::mel_cepstra(t.wave_10k, kMetricOrder, dsp::speech_framing(kMetricsRate));
  t.mcd_features = dsp::mel_cepstra(t.wave, kMetricOrder);
  t.bands = dsp::third_octave_energies(t.wave_10k);
  return t;
}

void TemplateStore::add(ReferenceTemplate t) {
  const std::string id = t.id;
  templates_[id] = std::move(t);
}

const ReferenceTemplate& TemplateStore::at(const std::string& id) const {
  const auto it = templates_.find(id);
  if (it == templates_.end()) throw TemplateNotFoundError("no reference template '" + id + "'");
  return it->second;
}

TemplateStore TemplateStore::load(const std::filesystem::path& index_csv) {
  const auto rows = read_csv(index_csv);
  const auto base = index_csv.parent_path();
  TemplateStore store;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (r == 0 && !row.empty() && row[0] == "template_id") continue;
    if (row.size() != 3) {
      throw ParseError(index_csv.string() + ": row " + std::to_string(r + 1) +
                       " needs template_id,wav_path,word_label");
    }
    std::filesystem::path wav = row[1];
    if (wav.is_relative()) wav = base / wav;
    store.add(make_template(row[0], row[2], read_wav(wav)));
  }
  return store;
}

Waveform p_align(const Waveform& test, const ReferenceTemplate& tmpl) {
  const Waveform t10 = at_rate(test, kMetricsRate);
  if (t10.empty() || rms(t10.samples) <= 0.0) throw AlignmentError("cannot align a silent signal");
  if (tmpl.wave_10k.empty()) throw AlignmentError("template '" + tmpl.id + "' has no samples");

  const dsp::Framing fr = tmpl.align_features.framing;
  const auto test_feats = dsp::mel_cepstra(t10, kMetricOrder, fr);
  const auto path = dsp::dtw_align(test_feats.without_c0(), tmpl.align_features.without_c0());
  if (!std::isfinite(path.cost) || path.pairs.empty()) {
    throw AlignmentError("alignment against template '" + tmpl.id + "' failed");
  }

  // Median test frame for each template frame.
  const int n_tmpl = static_cast<int>(tmpl.align_features.num_frames());
  std::vector<std::vector<int>> matches(static_cast<std::size_t>(n_tmpl));
  for (const auto& [i, j] : path.pairs) matches[j].push_back(i);
  std::vector<long> source_frame(static_cast<std::size_t>(n_tmpl));
  for (int j = 0; j < n_tmpl; ++j) {
    auto& m = matches[j];
    source_frame[j] = m[m.size() / 2];
  }

  const std::size_t out_len = tmpl.wave_10k.size();
  const long frame_len = fr.frame_len;
  const long hop = fr.hop;
  // Frames needed to cover the whole template; any beyond the feature track
  // continue linearly from the last matched test frame.
  const long covered = out_len <= static_cast<std::size_t>(frame_len)
                           ? 1
                           : 1 + (static_cast<long>(out_len) - frame_len + hop - 1) / hop;
  std::vector<double> window(static_cast<std::size_t>(frame_len));
  for (long k = 0; k < frame_len; ++k) {
    const double s = std::sin(std::numbers::pi * (static_cast<double>(k) + 0.5) / frame_len);
    window[k] = s * s;
  }
  std::vector<double> acc(out_len, 0.0), norm(out_len, 0.0);
  const long test_len = static_cast<long>(t10.size());
  const auto& ref = tmpl.wave_10k.samples;
  auto test_at = [&](long s) { return (s >= 0 && s < test_len) ? t10.samples[s] : 0.0; };
  for (long j = 0; j < covered; ++j) {
    const long src = j < n_tmpl ? source_frame[j] : source_frame.back() + (j - n_tmpl + 1);
    // Sub-frame refinement: DTW resolves one hop, so the test frame is slid
    // by up to half a hop to the lag of highest windowed correlation with
    // the template frame.
    long best_lag = 0;
    double ref_energy = 0.0;
    for (long k = 0; k < frame_len && j * hop + k < static_cast<long>(out_len); ++k) {
      const double r = window[k] * ref[j * hop + k];
      ref_energy += r * r;
    }
    if (ref_energy > 0.0) {
      double best = -std::numeric_limits<double>::infinity();
      for (long lag = -hop / 2; lag <= hop / 2; ++lag) {
        double dot = 0.0, energy = 0.0;
        for (long k = 0; k < frame_len && j * hop + k < static_cast<long>(out_len); ++k) {
          const double t = window[k] * test_at(src * hop + lag + k);
          dot += window[k] * ref[j * hop + k] * t;
          energy += t * t;
        }
        const double ncc = energy > 0.0 ? dot / std::sqrt(energy * ref_energy) : -1.0;
        if (ncc > best + 1e-12 || (std::abs(ncc - best) <= 1e-12 && std::abs(lag) < std::abs(best_lag))) {
          best = ncc;
          best_lag = lag;
        }
      }
    }
    for (long k = 0; k < frame_len; ++k) {
      const long o = j * hop + k;
      if (o >= static_cast<long>(out_len)) break;
      const long s = src * hop + best_lag + k;
      const double v = test_at(s);
      acc[o] += window[k] * v;
      norm[o] += window[k];
    }
  }
  Waveform out;
  out.sample_rate = kMetricsRate;
  out.samples.resize(out_len);
  for (std::size_t n = 0; n < out_len; ++n) out.samples[n] = norm[n] > 0.0 ? acc[n] / norm[n] : 0.0;
  return out;
}

double p_stoi(const Waveform& test, const ReferenceTemplate& tmpl) {
  return stoi(p_align(test, tmpl), tmpl.wave_10k);
}

double p_estoi(const Waveform& test, const ReferenceTemplate& tmpl) {
  return estoi(p_align(test, tmpl), tmpl.wave_10k);
}

double mcd_along_path(const dsp::CepstraTrack& a, const dsp::CepstraTrack& b,
                      const dsp::DtwPath& path) {
  if (a.order != b.order) throw DimensionMismatchError("MCD tracks differ in cepstral order");
  if (path.pairs.empty()) throw AlignmentError("MCD needs a non-empty alignment path");
  const double k = 10.0 / std::numbers::ln10 * std::numbers::sqrt2;
  double total = 0.0;
  for (const auto& [i, j] : path.pairs) {
    total += (a.frames.row(i).tail(a.order - 1) - b.frames.row(j).tail(b.order - 1)).norm();
  }
  return k * total / static_cast<double>(path.pairs.size());
}

double mcd(const Waveform& test, const ReferenceTemplate& tmpl) {
  const Waveform t16 = at_rate(test, kEnhancementRate);
  if (t16.empty() || rms(t16.samples) <= 0.0) throw AlignmentError("cannot score a silent signal");
  const auto feats = dsp::mel_cepstra(t16, kMetricOrder);
  const auto path = dsp::dtw_align(feats.without_c0(), tmpl.mcd_features.without_c0());
  return mcd_along_path(feats, tmpl.mcd_features, path);
}

MetricsReport score(const Waveform& test, const ReferenceTemplate& tmpl) {
  const Waveform aligned = p_align(test, tmpl);
  MetricsReport r;
  r.p_stoi = stoi(aligned, tmpl.wave_10k);
  r.p_estoi = estoi(aligned, tmpl.wave_10k);
  r.mcd = mcd(test, tmpl);
  return r;
}

}  // namespace clpenh::metrics
