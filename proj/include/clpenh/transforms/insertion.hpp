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


#pragma once

#include <compare>
#include <cstddef>
#include <filesystem>
#include <map>
#include <string>

#include "clpenh/audio_io.hpp"

namespace clpenh::transforms {

struct TemplateKey {
  std::string label;    // phoneme, e.g. "s", "k", "T"
  std::string context;  // neighbouring vowel, e.g. "a"
  auto operator<=>(const TemplateKey&) const = default;
};

// Healthy exemplar plus the RMS of the vowel it was recorded next to, which
// fixes the consonant-to-vowel level ratio used on insertion.
struct TemplateEntry {
  Waveform exemplar;
  double context_rms = 0.0;

  double level_ratio() const;
};

// Healthy phoneme exemplars keyed by (label, vowel context). Every stored
// exemplar has RMS > 1e-4.
class TemplateBank {
 public:
  void add(TemplateKey key, TemplateEntry entry);
  bool contains(const TemplateKey& key) const { return entries_.count(key) != 0; }
  // Throws TemplateNotFoundError.
  const TemplateEntry& at(const TemplateKey& key) const;
  std::size_t size() const { return entries_.size(); }
  const std::map<TemplateKey, TemplateEntry>& entries() const { return entries_; }

  // Index CSV: label,context,wav_path,context_rms (wav paths relative to the
  // index file's directory unless absolute).
  static TemplateBank load(const std::filesystem::path& index_csv);
  void save(const std::filesystem::path& dir, const std::string& index_name = "bank.csv") const;

 private:
  std::map<TemplateKey, TemplateEntry> entries_;
};

struct InsertionSlot {
  std::size_t length = 0;  // samples
  TemplateKey key;
};

// Stretches or compresses a waveform to exactly `target_len` samples by
// nearest-frame repetition/decimation of its STFT magnitude; phase is
// regenerated by accumulating each bin's source phase advance.
Waveform time_scale(const Waveform& w, std::size_t target_len);

// Exemplar time-scaled to the slot, RMS set to neighbor_rms * level_ratio.
// An exemplar already matching the slot length is only rescaled.
Waveform insert_template(const InsertionSlot& slot, const TemplateBank& bank, double neighbor_rms);

}  // namespace clpenh::transforms
