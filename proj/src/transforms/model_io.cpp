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


#include "clpenh/transforms/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "clpenh/errors.hpp"

namespace clpenh::transforms {

namespace {

constexpr char kMagic[8] = {'C', 'L', 'P', 'E', 'N', 'H', 'M', 'D'};
constexpr std::uint32_t kMaxDim = 1u << 20;

static_assert(std::endian::native == std::endian::little, "model container assumes little-endian");

class Writer {
 public:
  Writer() { bytes_.insert(bytes_.end(), std::begin(kMagic), std::end(kMagic)); }
  void u32(std::uint32_t v) { raw(&v, sizeof v); }
  void f64(double v) { raw(&v, sizeof v); }
  std::vector<unsigned char> take() { return std::move(bytes_); }

 private:
  void raw(const void* p, std::size_t n) {
    const auto* c = static_cast<const unsigned char*>(p);
    bytes_.insert(bytes_.end(), c, c + n);
  }
  std::vector<unsigned char> bytes_;
};

class Reader {
 public:
  explicit Reader(std::span<const unsigned char> b) : bytes_(b) {
    if (b.size() < sizeof kMagic || std::memcmp(b.data(), kMagic, sizeof kMagic) != 0) {
      throw ModelFormatError("not a clpenh model file (bad magic)");
    }
    pos_ = sizeof kMagic;
  }
  std::uint32_t u32() {
    std::uint32_t v;
    raw(&v, sizeof v);
    return v;
  }
  double f64() {
    double v;
    raw(&v, sizeof v);
    return v;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }
  void expect_payload(std::size_t doubles) const {
    if (remaining() != doubles * sizeof(double)) {
      throw ModelFormatError("model payload is " + std::to_string(remaining()) +
                             " bytes, header implies " + std::to_string(doubles * sizeof(double)));
    }
  }

 private:
  void raw(void* p, std::size_t n) {
    if (remaining() < n) throw ModelFormatError("truncated model file");
    std::memcpy(p, bytes_.data() + pos_, n);
    pos_ += n;
  }
  std::span<const unsigned char> bytes_;
  std::size_t pos_ = 0;
};

void check_header(Reader& r, ModelKind want) {
  const std::uint32_t version = r.u32();
  if (version != kModelFormatVersion) {
    throw ModelFormatError("model format version " + std::to_string(version) +
                           " is not supported (expected " + std::to_string(kModelFormatVersion) + ")");
  }
  const std::uint32_t kind = r.u32();
  if (kind != static_cast<std::uint32_t>(want)) {
    throw ModelFormatError("model file holds kind " + std::to_string(kind) + ", expected " +
                           std::to_string(static_cast<std::uint32_t>(want)));
  }
}

std::uint32_t bounded(std::uint32_t v, const char* what) {
  if (v == 0 || v > kMaxDim) {
    throw ModelFormatError(std::string("model dimension '") + what + "' out of range: " +
                           std::to_string(v));
  }
  return v;
}

std::vector<unsigned char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write model file " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing model file " + path.string());
}

}  // namespace

std::vector<unsigned char> encode_model(const GmmJointModel& model) {
  model.validate();
  const auto& f = model.features;
  const auto& mix = model.mixture;
  Writer w;
  w.u32(kModelFormatVersion);
  w.u32(static_cast<std::uint32_t>(ModelKind::kGmm));
  for (int v : {f.order, f.frame_len, f.hop, f.sample_rate, mix.components(), mix.dim()}) {
    w.u32(static_cast<std::uint32_t>(v));
  }
  for (int q = 0; q < mix.components(); ++q) w.f64(mix.weights[q]);
  for (const auto& m : mix.means) {
    for (Eigen::Index i = 0; i < m.size(); ++i) w.f64(m[i]);
  }
  for (const auto& c : mix.covariances) {
    for (Eigen::Index i = 0; i < c.rows(); ++i) {
      for (Eigen::Index j = 0; j < c.cols(); ++j) w.f64(c(i, j));
    }
  }
  return w.take();
}

std::vector<unsigned char> encode_model(const NmfDictionaries& dicts) {
  dicts.validate();
  Writer w;
  w.u32(kModelFormatVersion);
  w.u32(static_cast<std::uint32_t>(ModelKind::kNmf));
  for (auto v : {static_cast<Eigen::Index>(dicts.frame_len), static_cast<Eigen::Index>(dicts.hop),
                 static_cast<Eigen::Index>(dicts.sample_rate), dicts.num_bins(),
                 static_cast<Eigen::Index>(dicts.rank())}) {
    w.u32(static_cast<std::uint32_t>(v));
  }
  for (const auto* m : {&dicts.w_src, &dicts.w_tgt}) {
    for (Eigen::Index i = 0; i < m->rows(); ++i) {
      for (Eigen::Index j = 0; j < m->cols(); ++j) w.f64((*m)(i, j));
    }
  }
  return w.take();
}

ModelKind peek_model_kind(std::span<const unsigned char> bytes) {
  Reader r(bytes);
  r.u32();
  const std::uint32_t kind = r.u32();
  if (kind != 1 && kind != 2) throw ModelFormatError("unknown model kind " + std::to_string(kind));
  return static_cast<ModelKind>(kind);
}

GmmJointModel decode_gmm(std::span<const unsigned char> bytes) {
  Reader r(bytes);
  check_header(r, ModelKind::kGmm);
  GmmJointModel m;
  m.features.order = static_cast<int>(bounded(r.u32(), "order"));
  m.features.frame_len = static_cast<int>(bounded(r.u32(), "frame_len"));
  m.features.hop = static_cast<int>(bounded(r.u32(), "hop"));
  m.features.sample_rate = static_cast<int>(bounded(r.u32(), "sample_rate"));
  const std::uint32_t q = bounded(r.u32(), "components");
  const std::uint32_t dim = bounded(r.u32(), "dim");
  if (dim != 2u * static_cast<std::uint32_t>(m.features.mapped_dim())) {
    throw ModelFormatError("GMM dimension " + std::to_string(dim) + " does not match cepstral order " +
                           std::to_string(m.features.order));
  }
  r.expect_payload(static_cast<std::size_t>(q) * (1 + dim + static_cast<std::size_t>(dim) * dim));
  auto& mix = m.mixture;
  mix.weights.resize(q);
  for (std::uint32_t k = 0; k < q; ++k) mix.weights[k] = r.f64();
  for (std::uint32_t k = 0; k < q; ++k) {
    Eigen::VectorXd mu(dim);
    for (std::uint32_t i = 0; i < dim; ++i) mu[i] = r.f64();
    mix.means.push_back(std::move(mu));
  }
  for (std::uint32_t k = 0; k < q; ++k) {
    Eigen::MatrixXd c(dim, dim);
    for (std::uint32_t i = 0; i < dim; ++i) {
      for (std::uint32_t j = 0; j < dim; ++j) c(i, j) = r.f64();
    }
    mix.covariances.push_back(std::move(c));
  }
  m.validate();
  return m;
}

NmfDictionaries decode_nmf(std::span<const unsigned char> bytes) {
  Reader r(bytes);
  check_header(r, ModelKind::kNmf);
  NmfDictionaries d;
  d.frame_len = static_cast<int>(bounded(r.u32(), "frame_len"));
  d.hop = static_cast<int>(bounded(r.u32(), "hop"));
  d.sample_rate = static_cast<int>(bounded(r.u32(), "sample_rate"));
  const std::uint32_t bins = bounded(r.u32(), "bins");
  const std::uint32_t rank = bounded(r.u32(), "rank");
  if (bins != static_cast<std::uint32_t>(d.frame_len / 2 + 1)) {
    throw ModelFormatError("NMF bin count " + std::to_string(bins) + " does not match frame length " +
                           std::to_string(d.frame_len));
  }
  r.expect_payload(2 * static_cast<std::size_t>(bins) * rank);
  for (auto* m : {&d.w_src, &d.w_tgt}) {
    m->resize(bins, rank);
    for (std::uint32_t i = 0; i < bins; ++i) {
      for (std::uint32_t j = 0; j < rank; ++j) (*m)(i, j) = r.f64();
    }
  }
  d.validate();
  return d;
}

void save_model(const GmmJointModel& model, const std::filesystem::path& path) {
  write_file(path, encode_model(model));
}

void save_model(const NmfDictionaries& dicts, const std::filesystem::path& path) {
  write_file(path, encode_model(dicts));
}

GmmJointModel load_gmm(const std::filesystem::path& path) { return decode_gmm(read_file(path)); }

NmfDictionaries load_nmf(const std::filesystem::path& path) { return decode_nmf(read_file(path)); }

}  // namespace clpenh::transforms
