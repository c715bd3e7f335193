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


#include "clpenh/transforms/insertion.hpp"

#include <cmath>
#include <complex>
#include <fstream>
#include <sstream>
#include <vector>

#include "clpenh/csv.hpp"
#include "clpenh/dsp/stft.hpp"
#include "clpenh/errors.hpp"

namespace clpenh::transforms {

double TemplateEntry::level_ratio() const {
  if (!(context_rms > 0.0)) throw ConfigError("template context RMS must be positive");
  return rms(exemplar.samples) / context_rms;
}

void TemplateBank::add(TemplateKey key, TemplateEntry entry) {
  if (!(rms(entry.exemplar.samples) > 1e-4)) {
    throw DegenerateSignalError("template /" + key.label + "/ (" + key.context + ") is silent");
  }
  if (!(entry.context_rms > 0.0)) throw ConfigError("template context RMS must be positive");
  entries_[std::move(key)] = std::move(entry);
}

const TemplateEntry& TemplateBank::at(const TemplateKey& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) {
    throw TemplateNotFoundError("no template for /" + key.label + "/ in context /" + key.context + "/");
  }
  return it->second;
}

TemplateBank TemplateBank::load(const std::filesystem::path& index_csv) {
  const auto rows = read_csv(index_csv);
  TemplateBank bank;
  const auto base = index_csv.parent_path();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (r == 0 && !row.empty() && row[0] == "label") continue;
    if (row.size() != 4) {
      throw ParseError(index_csv.string() + ": row " + std::to_string(r + 1) +
                       " must have 4 fields (label,context,wav_path,context_rms)");
    }
    std::filesystem::path wav = row[2];
    if (wav.is_relative()) wav = base / wav;
    bank.add({row[0], row[1]}, {read_wav(wav), parse_double(row[3], "context_rms")});
  }
  return bank;
}

void TemplateBank::save(const std::filesystem::path& dir, const std::string& index_name) const {
  std::filesystem::create_directories(dir);
  std::vector<std::vector<std::string>> rows{{"label", "context", "wav_path", "context_rms"}};
  for (const auto& [key, entry] : entries_) {
    const std::string name = "bank_" + key.label + "_" + key.context + ".wav";
    write_wav(entry.exemplar, dir / name);
    rows.push_back({key.label, key.context, name, format_double(entry.context_rms)});
  }
  write_csv(dir / index_name, rows);
}

Waveform time_scale(const Waveform& w, std::size_t target_len) {
  if (target_len == w.size()) return w;
  if (w.empty()) throw DegenerateSignalError("time_scale: empty exemplar");
  const auto src = dsp::stft_padded(w);
  const int frame_len = src.frame_len;
  const int hop = src.hop;
  const int pad = src.pad;

  std::size_t total = target_len + 2 * static_cast<std::size_t>(pad);
  if (total < static_cast<std::size_t>(frame_len)) total = frame_len;
  const std::size_t rem = (total - frame_len) % hop;
  if (rem != 0) total += hop - rem;
  const Eigen::Index out_frames = 1 + static_cast<Eigen::Index>((total - frame_len) / hop);
  const Eigen::Index in_frames = src.num_frames();
  const Eigen::Index bins = src.num_bins();

  dsp::Spectrogram out = src;
  out.frames.resize(out_frames, bins);
  Eigen::VectorXd phase(bins);
  auto source_for = [&](Eigen::Index j) {
    if (out_frames == 1) return Eigen::Index{0};
    const double pos = static_cast<double>(j) * (in_frames - 1) / static_cast<double>(out_frames - 1);
    return static_cast<Eigen::Index>(std::lround(pos));
  };
  for (Eigen::Index j = 0; j < out_frames; ++j) {
    const Eigen::Index s = source_for(j);
    for (Eigen::Index k = 0; k < bins; ++k) {
      if (j == 0) {
        phase[k] = std::arg(src.frames(s, k));
      } else {
        // Source phase advance across one hop, measured around the frame we copy.
        const Eigen::Index a = s > 0 ? s - 1 : s;
        const Eigen::Index b = s > 0 ? s : std::min<Eigen::Index>(s + 1, in_frames - 1);
        const double expected = 2.0 * M_PI * static_cast<double>(k) * hop / frame_len;
        double dev = std::arg(src.frames(b, k)) - std::arg(src.frames(a, k)) - expected;
        dev = std::remainder(dev, 2.0 * M_PI);
        phase[k] += expected + (a == b ? 0.0 : dev);
      }
      out.frames(j, k) = std::polar(std::abs(src.frames(s, k)), phase[k]);
    }
  }
  return dsp::istft(out, target_len);
}

Waveform insert_template(const InsertionSlot& slot, const TemplateBank& bank, double neighbor_rms) {
  const TemplateEntry& entry = bank.at(slot.key);
  if (!(neighbor_rms > 0.0)) throw ConfigError("insert_template: neighbour RMS must be positive");
  Waveform out = time_scale(entry.exemplar, slot.length);
  if (rms(out.samples) == 0.0) throw DegenerateSignalError("insert_template: scaled exemplar is silent");
  return normalize_rms(out, neighbor_rms * entry.level_ratio());
}

}  // namespace clpenh::transforms
