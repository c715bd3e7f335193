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


#include "clpenh/transforms/gmm.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "clpenh/dsp/dtw.hpp"
#include "clpenh/dsp/stft.hpp"
#include "clpenh/errors.hpp"

namespace clpenh::transforms {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

struct GaussianCache {
  Eigen::VectorXd mean;
  Eigen::MatrixXd chol_l;
  double log_norm = 0.0;  // -0.5 * (d log 2pi + log det)
};

GaussianCache make_cache(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw ModelFormatError("covariance is not positive definite");
  GaussianCache c;
  c.mean = mean;
  c.chol_l = llt.matrixL();
  const double logdet = 2.0 * c.chol_l.diagonal().array().log().sum();
  c.log_norm = -0.5 * (static_cast<double>(mean.size()) * kLog2Pi + logdet);
  return c;
}

// Row-wise log densities of data under one Gaussian.
Eigen::VectorXd log_density(const GaussianCache& g, const Eigen::MatrixXd& data) {
  Eigen::MatrixXd centred = (data.rowwise() - g.mean.transpose()).transpose();
  g.chol_l.triangularView<Eigen::Lower>().solveInPlace(centred);
  return (g.log_norm - 0.5 * centred.colwise().squaredNorm().array()).matrix().transpose();
}

double log_density(const GaussianCache& g, const Eigen::VectorXd& x) {
  Eigen::VectorXd d = x - g.mean;
  g.chol_l.triangularView<Eigen::Lower>().solveInPlace(d);
  return g.log_norm - 0.5 * d.squaredNorm();
}

// Responsibilities (N x Q) and the mean log-likelihood.
double e_step(const GaussianMixture& gmm, const Eigen::MatrixXd& data, Eigen::MatrixXd& resp) {
  const Eigen::Index n = data.rows();
  const int q = gmm.components();
  resp.resize(n, q);
  for (int k = 0; k < q; ++k) {
    const auto cache = make_cache(gmm.means[k], gmm.covariances[k]);
    resp.col(k) = log_density(cache, data).array() + std::log(gmm.weights[k]);
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double m = resp.row(i).maxCoeff();
    const double lse = m + std::log((resp.row(i).array() - m).exp().sum());
    resp.row(i) = (resp.row(i).array() - lse).exp();
    total += lse;
  }
  return total / static_cast<double>(n);
}

Eigen::MatrixXd covariance_of(const Eigen::MatrixXd& data, const Eigen::VectorXd& mean) {
  const Eigen::MatrixXd c = data.rowwise() - mean.transpose();
  return (c.transpose() * c) / static_cast<double>(data.rows());
}

GaussianMixture kmeans_init(const Eigen::MatrixXd& data, const GmmTrainOptions& opt) {
  const Eigen::Index n = data.rows();
  const int q = opt.components;
  const Eigen::Index d = data.cols();
  std::mt19937_64 rng(opt.seed);

  // k-means++ seeding.
  std::vector<Eigen::VectorXd> centres;
  centres.emplace_back(data.row(static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(n))).transpose());
  Eigen::VectorXd dist2 = (data.rowwise() - centres[0].transpose()).rowwise().squaredNorm();
  while (static_cast<int>(centres.size()) < q) {
    const double total = dist2.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      const double u = uniform01(rng) * total;
      double acc = 0.0;
      for (pick = 0; pick < n - 1; ++pick) {
        acc += dist2[pick];
        if (acc > u) break;
      }
    } else {
      pick = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(n));
    }
    centres.emplace_back(data.row(pick).transpose());
    dist2 = dist2.cwiseMin((data.rowwise() - centres.back().transpose()).rowwise().squaredNorm());
  }

  std::vector<int> assign(static_cast<std::size_t>(n), 0);
  for (int it = 0; it <= opt.kmeans_iterations; ++it) {
    for (Eigen::Index i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (int k = 0; k < q; ++k) {
        const double dd = (data.row(i).transpose() - centres[k]).squaredNorm();
        if (dd < best) {
          best = dd;
          assign[i] = k;
        }
      }
    }
    if (it == opt.kmeans_iterations) break;
    std::vector<Eigen::VectorXd> sums(static_cast<std::size_t>(q), Eigen::VectorXd::Zero(d));
    std::vector<int> counts(static_cast<std::size_t>(q), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums[assign[i]] += data.row(i).transpose();
      ++counts[assign[i]];
    }
    for (int k = 0; k < q; ++k) {
      if (counts[k] > 0) centres[k] = sums[k] / counts[k];
    }
  }

  const Eigen::VectorXd global_mean = data.colwise().mean().transpose();
  const Eigen::MatrixXd global_cov = covariance_of(data, global_mean);
  const Eigen::MatrixXd reg = opt.regularization * Eigen::MatrixXd::Identity(d, d);

  GaussianMixture gmm;
  gmm.weights.resize(q);
  for (int k = 0; k < q; ++k) {
    std::vector<Eigen::Index> members;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (assign[i] == k) members.push_back(i);
    }
    gmm.weights[k] = std::max<double>(static_cast<double>(members.size()), 1.0);
    if (static_cast<Eigen::Index>(members.size()) > d) {
      Eigen::MatrixXd sub(static_cast<Eigen::Index>(members.size()), d);
      for (std::size_t m = 0; m < members.size(); ++m) sub.row(static_cast<Eigen::Index>(m)) = data.row(members[m]);
      const Eigen::VectorXd mu = sub.colwise().mean().transpose();
      gmm.means.push_back(mu);
      gmm.covariances.push_back(covariance_of(sub, mu) + reg);
    } else {
      gmm.means.push_back(centres[k]);
      gmm.covariances.push_back(global_cov + reg);
    }
  }
  gmm.weights /= gmm.weights.sum();
  return gmm;
}

}  // namespace

void GaussianMixture::validate() const {
  const int q = components();
  if (q == 0) throw ModelFormatError("mixture has no components");
  if (static_cast<int>(means.size()) != q || static_cast<int>(covariances.size()) != q) {
    throw ModelFormatError("mixture parameter counts disagree");
  }
  if (std::abs(weights.sum() - 1.0) > 1e-9) throw ModelFormatError("mixture weights do not sum to 1");
  const int d = dim();
  for (int k = 0; k < q; ++k) {
    if (!(weights[k] > 0.0 && weights[k] <= 1.0)) throw ModelFormatError("mixture weight out of (0, 1]");
    if (means[k].size() != d || covariances[k].rows() != d || covariances[k].cols() != d) {
      throw ModelFormatError("mixture component dimensions disagree");
    }
    const auto& c = covariances[k];
    if (!c.allFinite() || !means[k].allFinite()) throw ModelFormatError("non-finite mixture parameter");
    if ((c - c.transpose()).cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, c.cwiseAbs().maxCoeff())) {
      throw ModelFormatError("covariance is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < 1e-8) throw ModelFormatError("covariance is not positive definite");
  }
}

double GaussianMixture::mean_log_likelihood(const Eigen::MatrixXd& data) const {
  Eigen::MatrixXd resp;
  return e_step(*this, data, resp);
}

void GmmJointModel::validate() const {
  mixture.validate();
  if (mixture.dim() != 2 * features.mapped_dim()) {
    throw ModelFormatError("joint model dimension " + std::to_string(mixture.dim()) +
                           " does not match feature order " + std::to_string(features.order));
  }
}

GmmFitResult fit_gmm(const Eigen::MatrixXd& data, const GmmTrainOptions& opt) {
  if (opt.components < 1) throw ConfigError("GMM needs at least one component");
  const Eigen::Index n = data.rows();
  const Eigen::Index d = data.cols();
  const Eigen::Index needed = 10 * static_cast<Eigen::Index>(opt.components) * d;
  if (n < needed || d == 0) {
    throw InsufficientDataError("GMM training needs at least " + std::to_string(needed) +
                                " frames for Q=" + std::to_string(opt.components) + ", dim=" +
                                std::to_string(d) + "; got " + std::to_string(n));
  }
  if (!data.allFinite()) throw InsufficientDataError("GMM training data contains non-finite values");

  GmmFitResult result;
  result.mixture = kmeans_init(data, opt);
  GaussianMixture& gmm = result.mixture;
  const Eigen::MatrixXd reg = opt.regularization * Eigen::MatrixXd::Identity(d, d);

  Eigen::MatrixXd resp;
  double ll = e_step(gmm, data, resp);
  result.log_likelihood.push_back(ll);
  for (int it = 0; it < opt.max_iterations; ++it) {
    const Eigen::VectorXd nk = resp.colwise().sum().transpose();
    GaussianMixture next;
    std::vector<double> kept;
    for (int k = 0; k < gmm.components(); ++k) {
      const double w = nk[k] / static_cast<double>(n);
      if (w < opt.prune_weight || nk[k] <= 0.0) {
        ++result.pruned;
        result.warnings.push_back("EM iteration " + std::to_string(it + 1) + ": component " +
                                  std::to_string(k) + " collapsed (weight " + std::to_string(w) +
                                  "), pruned");
        continue;
      }
      const Eigen::VectorXd mu = (resp.col(k).transpose() * data).transpose() / nk[k];
      const Eigen::MatrixXd centred = data.rowwise() - mu.transpose();
      Eigen::MatrixXd cov = (centred.transpose() * resp.col(k).asDiagonal() * centred) / nk[k];
      cov = 0.5 * (cov + cov.transpose()) + reg;
      kept.push_back(w);
      next.means.push_back(mu);
      next.covariances.push_back(std::move(cov));
    }
    if (kept.empty()) throw InsufficientDataError("EM collapsed every component");
    next.weights = Eigen::Map<Eigen::VectorXd>(kept.data(), static_cast<Eigen::Index>(kept.size()));
    next.weights /= next.weights.sum();
    gmm = std::move(next);

    const double next_ll = e_step(gmm, data, resp);
    result.log_likelihood.push_back(next_ll);
    const double gain = next_ll - ll;
    ll = next_ll;
    if (gain < opt.tolerance) break;
  }
  return result;
}

JointGmmTraining train_joint_gmm(std::span<const dsp::CepstraTrack> source,
                                 std::span<const dsp::CepstraTrack> target,
                                 const GmmTrainOptions& options) {
  if (source.size() != target.size()) {
    throw DimensionMismatchError("train_joint_gmm: source and target corpus sizes differ");
  }
  if (source.empty()) throw InsufficientDataError("train_joint_gmm: empty corpus");
  const auto& first = source.front();
  FeatureDescriptor desc{first.order, first.framing.frame_len, first.framing.hop, first.sample_rate};
  for (std::size_t p = 0; p < source.size(); ++p) {
    for (const auto* t : {&source[p], &target[p]}) {
      if (t->order != desc.order || t->frames.cols() != desc.order) {
        throw DimensionMismatchError("train_joint_gmm: cepstral orders differ within the corpus");
      }
    }
  }

  const int half = desc.mapped_dim();
  std::vector<Eigen::VectorXd> rows;
  for (std::size_t p = 0; p < source.size(); ++p) {
    const Eigen::MatrixXd xs = source[p].without_c0();
    const Eigen::MatrixXd ys = target[p].without_c0();
    const auto path = dsp::dtw_align(xs, ys);
    for (const auto& [i, j] : path.pairs) {
      Eigen::VectorXd z(2 * half);
      z << xs.row(i).transpose(), ys.row(j).transpose();
      rows.push_back(std::move(z));
    }
  }
  Eigen::MatrixXd data(static_cast<Eigen::Index>(rows.size()), 2 * half);
  for (std::size_t r = 0; r < rows.size(); ++r) data.row(static_cast<Eigen::Index>(r)) = rows[r].transpose();

  auto fit = fit_gmm(data, options);
  JointGmmTraining out;
  out.model.mixture = std::move(fit.mixture);
  out.model.features = desc;
  out.log_likelihood = std::move(fit.log_likelihood);
  out.pruned = fit.pruned;
  out.warnings = std::move(fit.warnings);
  out.aligned_frames = rows.size();
  return out;
}

namespace {

struct ConversionCache {
  std::vector<GaussianCache> source;
  std::vector<Eigen::MatrixXd> regression;  // Sigma_yx * Sigma_xx^-1
  std::vector<Eigen::VectorXd> mean_x, mean_y;
  Eigen::VectorXd log_weights;
};

ConversionCache build_cache(const GmmJointModel& model) {
  const int h = model.half_dim();
  ConversionCache c;
  const auto& mix = model.mixture;
  c.log_weights = mix.weights.array().log();
  for (int k = 0; k < mix.components(); ++k) {
    const Eigen::MatrixXd sxx = mix.covariances[k].topLeftCorner(h, h);
    const Eigen::MatrixXd syx = mix.covariances[k].bottomLeftCorner(h, h);
    c.mean_x.push_back(mix.means[k].head(h));
    c.mean_y.push_back(mix.means[k].tail(h));
    c.source.push_back(make_cache(c.mean_x.back(), sxx));
    Eigen::LLT<Eigen::MatrixXd> llt(sxx);
    // A = Syx Sxx^-1  <=>  Sxx A^T = Sxy.
    c.regression.push_back(llt.solve(syx.transpose()).transpose());
  }
  return c;
}

Eigen::VectorXd posteriors(const ConversionCache& c, const Eigen::VectorXd& x) {
  const auto q = static_cast<Eigen::Index>(c.source.size());
  Eigen::VectorXd lp(q);
  for (Eigen::Index k = 0; k < q; ++k) lp[k] = c.log_weights[k] + log_density(c.source[k], x);
  const double m = lp.maxCoeff();
  Eigen::VectorXd p = (lp.array() - m).exp();
  return p / p.sum();
}

Eigen::VectorXd map_frame(const ConversionCache& c, const Eigen::VectorXd& x) {
  const Eigen::VectorXd p = posteriors(c, x);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(x.size());
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    y += p[k] * (c.mean_y[k] + c.regression[k] * (x - c.mean_x[k]));
  }
  return y;
}

void check_dim(const GmmJointModel& model, const Eigen::VectorXd& x) {
  if (x.size() != model.half_dim()) {
    throw DimensionMismatchError("GMM expects " + std::to_string(model.half_dim()) +
                                 "-dimensional features, got " + std::to_string(x.size()));
  }
}

}  // namespace

Eigen::VectorXd gmm_posteriors(const GmmJointModel& model, const Eigen::VectorXd& x) {
  check_dim(model, x);
  return posteriors(build_cache(model), x);
}

Eigen::VectorXd gmm_map_frame(const GmmJointModel& model, const Eigen::VectorXd& x) {
  check_dim(model, x);
  return map_frame(build_cache(model), x);
}

Waveform gmm_convert(const Waveform& seg, const GmmJointModel& model) {
  const auto& desc = model.features;
  if (model.mixture.dim() != 2 * desc.mapped_dim()) {
    throw DimensionMismatchError("gmm_convert: model dimension does not match its descriptor");
  }
  if (seg.sample_rate != desc.sample_rate) {
    throw DimensionMismatchError("gmm_convert: model trained at " + std::to_string(desc.sample_rate) +
                                 " Hz, segment is " + std::to_string(seg.sample_rate) + " Hz");
  }
  if (seg.empty()) return seg;
  const ConversionCache cache = build_cache(model);
  auto spec = dsp::stft_padded(seg, desc.frame_len, desc.hop);
  const dsp::MelAnalyzer mel(seg.sample_rate, desc.frame_len);
  const double max_gain = 100.0;  // +40 dB in amplitude
  const double min_gain = 0.01;

  Eigen::VectorXd power(spec.num_bins());
  for (Eigen::Index t = 0; t < spec.num_frames(); ++t) {
    power = spec.frames.row(t).cwiseAbs2().transpose();
    if (power.sum() == 0.0) continue;
    const Eigen::VectorXd c = mel.cepstra(power, desc.order);
    const Eigen::VectorXd x = c.tail(desc.mapped_dim());
    Eigen::VectorXd converted = c;
    converted.tail(desc.mapped_dim()) = map_frame(cache, x);
    const Eigen::VectorXd log_ratio =
        mel.log_energies_from_cepstra(converted) - mel.log_energies_from_cepstra(c);
    const Eigen::VectorXd per_bin = mel.filters_to_bins(log_ratio);
    for (Eigen::Index k = 0; k < spec.num_bins(); ++k) {
      const double g = std::clamp(std::exp(0.5 * per_bin[k]), min_gain, max_gain);
      spec.frames(t, k) *= g;
    }
  }
  return dsp::istft(spec, seg.size());
}

}  // namespace clpenh::transforms
