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


// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "clpenh/annotation.hpp"
#include "clpenh/dsp/crossfade.hpp"
#include "clpenh/dsp/dtw.hpp"
#include "clpenh/dsp/features.hpp"
#include "clpenh/dsp/stft.hpp"
#include "clpenh/errors.hpp"
#include "clpenh/events.hpp"
#include "clpenh/metrics.hpp"
#include "clpenh/pipeline.hpp"
#include "clpenh/stimuli.hpp"
#include "clpenh/transforms/gmm.hpp"
#include "clpenh/transforms/nmf.hpp"
#include "clpenh/transforms/segment_transforms.hpp"
#include "malformed_annotations.hpp"
#include "test_support.hpp"
#include "transform_properties.hpp"

namespace {

using namespace clpenh;
namespace fs = std::filesystem;

// Collects the reasons a criterion failed; an empty list is a pass.
struct Verdict {
  std::vector<std::string> failures;
  std::vector<std::string> notes;

  void require(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream ss;
  ss.precision(digits);
  ss << v;
  return ss.str();
}

double peak(const Waveform& w) {
  double p = 0.0;
  for (double v : w.samples) p = std::max(p, std::abs(v));
  return p;
}

// ---------------------------------------------------------------- oracles

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

// Fraction of true instants with a detection within `tol`, and fraction of
// detections with no true instant within `tol`.
std::pair<double, double> match_instants(const std::vector<std::size_t>& truth, const std::vector<std::size_t>& found,
                                         std::size_t tol) {
  auto near = [tol](const std::vector<std::size_t>& set, std::size_t x) {
    return std::any_of(set.begin(), set.end(), [&](std::size_t v) { return (v > x ? v - x : x - v) <= tol; });
  };
  std::size_t hit = 0, fa = 0;
  for (auto t : truth) hit += near(found, t);
  for (auto f : found) fa += !near(truth, f);
  return {truth.empty() ? 0.0 : static_cast<double>(hit) / truth.size(),
          found.empty() ? 0.0 : static_cast<double>(fa) / found.size()};
}

Eigen::MatrixXd mel_log_energies(const Waveform& w) {
  const auto spec = dsp::stft_padded(w);
  const dsp::MelAnalyzer mel(w.sample_rate, spec.frame_len);
  Eigen::MatrixXd out(spec.num_frames(), dsp::kNumMelFilters);
  for (Eigen::Index t = 0; t < spec.num_frames(); ++t) {
    const Eigen::VectorXd p = spec.frames.row(t).cwiseAbs2().transpose();
    out.row(t) = mel.log_energies(p).transpose();
  }
  return out;
}

constexpr double kNatToDb = 10.0 / 2.302585092994046;

// ---------------------------------------------------------------- 1

Verdict kernel_identities() {
  Verdict v;
  double worst_stft = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto w = testing::white_noise(3000 + 131 * seed, 16000, seed, 0.3);
    const auto r = dsp::istft(dsp::stft_padded(w), w.size());
    double err = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) err = std::max(err, std::abs(r.samples[i] - w.samples[i]));
    worst_stft = std::max(worst_stft, err / peak(w));
  }
  v.require(worst_stft <= 1e-6, "STFT round trip relative error " + fmt(worst_stft));

  double worst_stoi = 1.0, worst_estoi = 1.0, worst_mcd = 0.0;
  for (const char* word : {"sasa", "kaka", "tata", "TaTa"}) {
    stimuli::StimulusSpec spec;
    spec.word = word;
    spec.seed = 5;
    const auto w = stimuli::synth_healthy_word(spec).wave;
    const auto w10 = resample(w, kMetricsRate);
    worst_stoi = std::min(worst_stoi, metrics::stoi(w10, w10));
    worst_estoi = std::min(worst_estoi, metrics::estoi(w10, w10));
    worst_mcd = std::max(worst_mcd, metrics::mcd(w, metrics::make_template("t", word, w)));
  }
  v.require(worst_stoi >= 0.999, "stoi(x,x) = " + fmt(worst_stoi));
  v.require(worst_estoi >= 0.999, "estoi(x,x) = " + fmt(worst_estoi));
  v.require(worst_mcd <= 1e-9, "mcd(x,x) = " + fmt(worst_mcd));

  std::mt19937_64 gen(2024);
  std::uniform_int_distribution<int> len(1, 6);
  std::normal_distribution<double> val(0.0, 1.0);
  int mismatches = 0;
  const int trials = 1000;
  for (int trial = 0; trial < trials; ++trial) {
    const int m = len(gen), n = len(gen), d = 1 + trial % 4;
    Eigen::MatrixXd a(m, d), b(n, d);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = val(gen);
    for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = val(gen);
    if (std::abs(dsp::dtw_align(a, b).cost - brute_force_dtw(a, b)) > 1e-9) ++mismatches;
  }
  v.require(mismatches == 0, std::to_string(mismatches) + " of " + std::to_string(trials) + " DTW costs differ");
  v.notes.push_back("stft " + fmt(worst_stft) + ", stoi " + fmt(worst_stoi) + ", estoi " + fmt(worst_estoi) +
                    ", mcd " + fmt(worst_mcd) + ", dtw trials " + std::to_string(trials));
  return v;
}

// ---------------------------------------------------------------- 2

Verdict optimization_guarantees() {
  Verdict v;
  const int corpora = 24;
  int violations = 0;
  for (int c = 0; c < corpora; ++c) {
    std::mt19937_64 gen(100 + c);
    std::normal_distribution<double> nd(0.0, 1.0);
    std::uniform_real_distribution<double> centre(-4.0, 4.0);
    const int dim = 2 + c % 5, clusters = 2 + c % 4;
    std::vector<Eigen::VectorXd> mu(clusters, Eigen::VectorXd(dim));
    for (auto& m : mu) {
      for (int d = 0; d < dim; ++d) m[d] = centre(gen);
    }
    Eigen::MatrixXd data(400 + 50 * c, dim);
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
      const auto& m = mu[i % clusters];
      for (int d = 0; d < dim; ++d) data(i, d) = m[d] + (0.3 + 0.2 * d) * nd(gen);
    }
    transforms::GmmTrainOptions opt;
    opt.components = 2 + c % 6;
    opt.seed = static_cast<std::uint64_t>(c);
    opt.tolerance = 0.0;
    opt.max_iterations = 80;
    const auto fit = transforms::fit_gmm(data, opt);
    for (std::size_t i = 1; i < fit.log_likelihood.size(); ++i) {
      if (fit.log_likelihood[i] < fit.log_likelihood[i - 1] - 1e-9) ++violations;
    }
    if (fit.log_likelihood.size() < 2) v.failures.push_back("corpus " + std::to_string(c) + " ran < 2 iterations");
  }
  v.require(violations == 0, std::to_string(violations) + " EM log-likelihood decreases");

  double worst_ratio = 0.0;
  int kl_increases = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int bins = 257, rank = 10, frames = 30;
    Eigen::MatrixXd w(bins, rank), h(rank, frames);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = u(gen);
    for (Eigen::Index i = 0; i < h.size(); ++i) h.data()[i] = u(gen);
    for (Eigen::Index c = 0; c < w.cols(); ++c) w.col(c) /= w.col(c).sum();
    const Eigen::MatrixXd vmat = w * h;
    const auto solved = transforms::nmf_activations(vmat, w, 200);
    for (std::size_t i = 1; i < solved.kl.size(); ++i) {
      if (solved.kl[i] > solved.kl[i - 1] + 1e-12 * vmat.sum()) ++kl_increases;
    }
    worst_ratio = std::max(worst_ratio, solved.kl.back() / vmat.sum());
  }
  v.require(kl_increases == 0, std::to_string(kl_increases) + " KL increases");
  v.require(worst_ratio <= 1e-4, "final KL / |V|_1 = " + fmt(worst_ratio));
  v.notes.push_back(std::to_string(corpora) + " GMM corpora, worst NMF KL/|V|_1 " + fmt(worst_ratio));
  return v;
}

// ---------------------------------------------------------------- 3

Verdict identity_suite() {
  Verdict v;
  stimuli::StimulusSpec spec;
  spec.word = "sasa";
  spec.seed = 21;
  spec.error = pipeline::ErrorType::kPSNAE;
  spec.nasal_depth = 0.8;
  const auto word = stimuli::synth_word(spec).distorted;
  const auto& w = word.wave;

  {
    transforms::SpectralCompressionConfig cfg;
    cfg.low_band_gain = 1.0;
    const auto out = transforms::spectral_compress(w, cfg);
    double err = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) err = std::max(err, std::abs(out.samples[i] - w.samples[i]));
    v.require(out.size() == w.size() && err <= 1e-6, "gain-1 compression error " + fmt(err));
  }
  {
    const auto vowel = testing::pulse_vowel(150.0, 0.4);
    events::GciSequence g;
    g.instants = vowel.impulses;
    transforms::TemporalEnhanceConfig cfg;
    cfg.base_weight = 1.0;
    const auto out = transforms::temporal_enhance(vowel.wave, g, cfg);
    double err = 0.0;
    for (std::size_t i = 0; i < vowel.wave.size(); ++i) {
      err = std::max(err, std::abs(out.output.samples[i] - vowel.wave.samples[i]));
    }
    v.require(!out.skipped && err <= 1e-6, "weight-1 temporal enhancement error " + fmt(err));
  }
  double worst_db = 0.0;
  {
    std::vector<dsp::CepstraTrack> tracks;
    for (const char* name : {"sasa", "kaka", "tata", "TaTa"}) {
      for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        stimuli::StimulusSpec s;
        s.word = name;
        s.seed = seed;
        tracks.push_back(dsp::mel_cepstra(stimuli::synth_healthy_word(s).wave, 13, {512, 128}));
      }
    }
    transforms::GmmTrainOptions opt;
    opt.components = 4;
    const auto trained = transforms::train_joint_gmm(tracks, tracks, opt);
    for (const char* name : {"sasa", "tata"}) {
      stimuli::StimulusSpec probe;
      probe.word = name;
      probe.seed = 99;
      const auto in = stimuli::synth_healthy_word(probe).wave;
      const auto out = transforms::gmm_convert(in, trained.model);
      const auto e_in = mel_log_energies(in), e_out = mel_log_energies(out);
      const auto spec_in = dsp::stft_padded(in);
      const Eigen::VectorXd energy = spec_in.frames.cwiseAbs2().rowwise().sum();
      for (Eigen::Index t = 0; t < e_in.rows(); ++t) {
        if (energy[t] < 1e-4 * energy.maxCoeff()) continue;
        const Eigen::VectorXd diff = (e_out.row(t) - e_in.row(t)).transpose();
        worst_db = std::max(worst_db, kNatToDb * std::sqrt(diff.squaredNorm() / diff.size()));
      }
    }
    v.require(worst_db < 1.0, "identity-trained GMM envelope deviation " + fmt(worst_db) + " dB");
  }
  double nmf_err = 0.0;
  {
    // Dictionary of the input's own normalised frames: V is exactly representable.
    const auto vowel = testing::pulse_vowel(160.0, 0.25).wave;
    const auto spec_in = dsp::stft_padded(vowel);
    transforms::NmfDictionaries d;
    d.w_src = (spec_in.magnitude().transpose().array() + transforms::kNmfFloor).matrix();
    for (Eigen::Index c = 0; c < d.w_src.cols(); ++c) d.w_src.col(c) /= d.w_src.col(c).sum();
    d.w_tgt = d.w_src;
    const auto out = transforms::nmf_convert(vowel, d, 200);
    for (std::size_t i = 512; i + 512 < vowel.size(); ++i) {
      nmf_err = std::max(nmf_err, std::abs(out.samples[i] - vowel.samples[i]));
    }
    nmf_err /= peak(vowel);
    v.require(out.size() == vowel.size() && nmf_err <= 1e-2, "shared-dictionary NMF error " + fmt(nmf_err));
  }
  {
    pipeline::EnhancementPlan plan;
    plan.choices.assign(word.annotation.segments.size(), pipeline::Transform::kPassthrough);
    const auto out = pipeline::enhance_word(w, word.annotation, plan);
    const std::size_t fade = dsp::fade_samples(16000, 5.0);
    const std::size_t n = word.annotation.segments.size();
    bool exact = out.size() == w.size() - (n - 1) * fade;
    bool bounded = true;
    for (std::size_t k = 0; exact && k < n; ++k) {
      const auto& s = word.annotation.segments[k];
      const std::size_t lo = s.start + (k == 0 ? 0 : fade);
      const std::size_t hi = s.end - (k + 1 < n ? fade : 0);
      for (std::size_t i = lo; i < hi; ++i) exact = exact && out.samples[i - k * fade] == w.samples[i];
      if (k + 1 < n) {
        // Joint samples mix the two overlapping tails, so stay within their envelope.
        for (std::size_t j = 0; j < fade; ++j) {
          const double a = w.samples[s.end - fade + j], b = w.samples[s.end + j];
          bounded = bounded && std::abs(out.samples[s.end - fade + j - k * fade]) <=
                                   std::max(std::abs(a), std::abs(b)) + 1e-12;
        }
      }
    }
    v.require(exact, "passthrough pipeline differs outside joints");
    v.require(bounded, "passthrough joint exceeds its inputs");
  }
  v.notes.push_back("GMM " + fmt(worst_db) + " dB, NMF " + fmt(nmf_err) + " of peak");
  return v;
}

// ---------------------------------------------------------------- 4

Verdict event_detection() {
  Verdict v;
  std::ostringstream note;
  for (double f0 : {100.0, 150.0, 220.0, 300.0}) {
    const auto vowel = testing::pulse_vowel(f0, 0.5);
    const auto g = events::detect_gci(vowel.wave);
    const auto [recall, fa] = match_instants(vowel.impulses, g.instants, 16);  // 1 ms at 16 kHz
    v.require(recall >= 0.9, "f0 " + fmt(f0) + " recall " + fmt(recall));
    v.require(fa <= 0.1, "f0 " + fmt(f0) + " false alarms " + fmt(fa));
    note << "f0 " << f0 << ": recall " << fmt(recall, 3) << " fa " << fmt(fa, 3) << "; ";
  }
  v.notes.push_back(note.str());
  return v;
}

// ---------------------------------------------------------------- 5 and 6

struct GroupMeans {
  std::string name;
  double stoi[4] = {}, estoi[4] = {}, mcd[4] = {};  // original, obstruent, vowel, both
};

std::vector<GroupMeans> run_corpus(int seeds) {
  using pipeline::ErrorType;
  const std::vector<std::string> words = {"sasa", "kaka", "tata", "TaTa"};
  // Insertion exemplars come from seeds disjoint from the test corpus.
  std::vector<stimuli::Stimulus> healthy;
  for (const auto& word : words) {
    stimuli::StimulusSpec s;
    s.word = word;
    s.seed = 10000;
    healthy.push_back(stimuli::synth_healthy_word(s));
  }
  const auto bank = stimuli::template_bank_from(healthy);
  pipeline::Resources res;
  res.bank = &bank;
  const pipeline::Scope scopes[] = {pipeline::Scope::kObstruentOnly, pipeline::Scope::kVowelOnly,
                                    pipeline::Scope::kBoth};

  std::vector<GroupMeans> groups;
  for (const auto& word : words) {
    for (auto e : {ErrorType::kGS, ErrorType::kPA, ErrorType::kPSNAE, ErrorType::kVelar}) {
      if (!stimuli::error_applies_to_word(word, e)) continue;
      GroupMeans g;
      g.name = word + "/" + std::string(pipeline::to_string(e));
      for (int seed = 0; seed < seeds; ++seed) {
        stimuli::StimulusSpec s;
        s.word = word;
        s.error = e;
        s.nasal_depth = 0.8;
        s.seed = static_cast<std::uint64_t>(seed);
        const auto ws = stimuli::synth_word(s);
        const auto tmpl = metrics::make_template("t", word, ws.healthy.wave);
        for (int c = 0; c < 4; ++c) {
          Waveform w = ws.distorted.wave;
          if (c > 0) {
            const auto plan = pipeline::default_plan(ws.distorted.annotation, scopes[c - 1], pipeline::Method::kRule);
            w = pipeline::enhance_word(w, ws.distorted.annotation, plan, res);
          }
          const auto r = metrics::score(w, tmpl);
          g.stoi[c] += r.p_stoi / seeds;
          g.estoi[c] += r.p_estoi / seeds;
          g.mcd[c] += r.mcd / seeds;
        }
      }
      groups.push_back(g);
    }
  }
  return groups;
}

void check_ordering(Verdict& v, const std::string& group, const char* metric, const double m[4]) {
  const double best_single = std::max(m[1], m[2]);
  v.require(m[0] < m[1], group + " " + metric + " original " + fmt(m[0]) + " !< obstruent_only " + fmt(m[1]));
  v.require(m[0] < m[2], group + " " + metric + " original " + fmt(m[0]) + " !< vowel_only " + fmt(m[2]));
  v.require(m[3] - best_single >= 0.02,
            group + " " + metric + " both " + fmt(m[3]) + " margin " + fmt(m[3] - best_single) + " < 0.02");
}

Verdict ordering(const std::vector<GroupMeans>& groups) {
  Verdict v;
  for (const auto& g : groups) {
    check_ordering(v, g.name, "p_stoi", g.stoi);
    check_ordering(v, g.name, "p_estoi", g.estoi);
  }
  return v;
}

Verdict mcd_direction(const std::vector<GroupMeans>& groups) {
  Verdict v;
  for (const auto& g : groups) {
    for (int c = 1; c < 4; ++c) {
      v.require(g.mcd[c] < g.mcd[0], g.name + " scope " + std::to_string(c) + " mcd " + fmt(g.mcd[c]) +
                                         " !< original " + fmt(g.mcd[0]));
    }
  }
  return v;
}

// ---------------------------------------------------------------- 7

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict determinism() {
  Verdict v;
  std::vector<std::string> enhance_csv, eval_csv;
  for (const char* name : {"acceptance_det_a", "acceptance_det_b"}) {
    const auto root = testing::scratch_dir(name);
    std::ostringstream out, err;
    auto run = [&](const std::vector<std::string>& args) {
      const int code = cli::run(args, out, err);
      v.require(code == cli::kExitOk, std::string(name) + ": " + args.front() + " exited " + std::to_string(code) +
                                          " " + err.str());
    };
    run({"synth", "--out-dir", (root / "corpus").string(), "--seed", "17", "--seeds", "2"});
    run({"enhance", "--config", (root / "corpus" / "synth.config.json").string(), "--manifest",
         (root / "corpus" / "manifest.csv").string(), "--out-dir", (root / "enh").string(), "--jobs", "2"});
    run({"eval", "--manifest", (root / "corpus" / "manifest.csv").string(), "--templates",
         (root / "corpus" / "templates.csv").string(), "--out", (root / "eval.csv").string()});
    enhance_csv.push_back(slurp(root / "enh" / "metrics_both.csv"));
    eval_csv.push_back(slurp(root / "eval.csv"));
  }
  v.require(!enhance_csv[0].empty() && enhance_csv[0] == enhance_csv[1], "enhance metrics CSVs differ");
  v.require(!eval_csv[0].empty() && eval_csv[0] == eval_csv[1], "eval metrics CSVs differ");
  return v;
}

// ---------------------------------------------------------------- 8

Verdict robustness() {
  Verdict v;
  std::string failure;
  const int trials = 60;
  v.require(testing::check_transform_properties(trials, 31337, failure), failure);
  int accepted = 0;
  const auto cases = testing::malformed_annotations();
  for (const auto& c : cases) {
    try {
      pipeline::parse_annotation(c.csv, 16000, 16000);
      ++accepted;
      v.failures.push_back("malformed annotation accepted: " + c.name);
    } catch (const Error&) {
    }
  }
  v.notes.push_back(std::to_string(trials) + " transform trials, " + std::to_string(cases.size() - accepted) + "/" +
                    std::to_string(cases.size()) + " malformed annotations rejected");
  return v;
}

// ---------------------------------------------------------------- runner

bool report(int id, const char* title, const std::function<Verdict()>& check) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = check();
  } catch (const std::exception& e) {
    v.failures.push_back(std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool pass = v.failures.empty();
  std::printf("%s criterion %d: %s (%.1f s)\n", pass ? "PASS" : "FAIL", id, title, secs);
  for (const auto& n : v.notes) std::printf("    %s\n", n.c_str());
  for (const auto& f : v.failures) std::printf("    - %s\n", f.c_str());
  std::fflush(stdout);
  return pass;
}

}  // namespace

int main() {
  bool ok = true;
  ok &= report(1, "kernel identities", kernel_identities);
  ok &= report(2, "optimization guarantees", optimization_guarantees);
  ok &= report(3, "identity suite", identity_suite);
  ok &= report(4, "GCI detection on synthetic vowels", event_detection);

  // Criteria 5 and 6 share one corpus run.
  std::vector<GroupMeans> groups;
  bool corpus_ok = false;
  ok &= report(5, "enhancement ordering on the synthetic corpus", [&] {
    groups = run_corpus(10);
    corpus_ok = true;
    Verdict v = ordering(groups);
    v.notes.push_back("group means: original / obstruent_only / vowel_only / both");
    for (const auto& g : groups) {
      std::ostringstream row;
      row << g.name << "  p_stoi";
      for (double x : g.stoi) row << ' ' << fmt(x, 3);
      row << "  p_estoi";
      for (double x : g.estoi) row << ' ' << fmt(x, 3);
      row << "  mcd";
      for (double x : g.mcd) row << ' ' << fmt(x, 4);
      v.notes.push_back(row.str());
    }
    return v;
  });
  ok &= report(6, "MCD direction on the synthetic corpus", [&] {
    return corpus_ok ? mcd_direction(groups) : Verdict{{"corpus scoring did not complete"}, {}};
  });
  ok &= report(7, "CLI determinism", determinism);
  ok &= report(8, "robustness", robustness);
  return ok ? 0 : 1;
}
