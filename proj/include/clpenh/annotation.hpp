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

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "clpenh/audio_io.hpp"

namespace clpenh::pipeline {

enum class PhonemeClass { kFricative, kStop, kVowel, kNasal, kOther };

enum class ErrorType { kNone, kGS, kPA, kPSNAE, kVelar, kNasalized };

// Tokens used in annotation files: fricative/stop/vowel/nasal/other and
// none/GS/PA/PSNAE/velar/nasalized. Parsing is case-insensitive and throws
// ParseError on anything else.
std::string_view to_string(PhonemeClass c);
std::string_view to_string(ErrorType e);
PhonemeClass parse_phoneme_class(std::string_view token);
ErrorType parse_error_type(std::string_view token);

bool is_obstruent(PhonemeClass c);
// GS/PA/Velar need an obstruent, PSNAE a fricative, Nasalized a vowel.
bool error_applies(PhonemeClass c, ErrorType e);

struct PhonemeSegment {
  std::string label;  // e.g. "s", "k", "T", "a"
  PhonemeClass cls = PhonemeClass::kOther;
  ErrorType error = ErrorType::kNone;
  std::size_t start = 0;  // sample index, inclusive
  std::size_t end = 0;    // sample index, exclusive

  std::size_t length() const { return end - start; }
};

struct WordAnnotation {
  std::string word;  // concatenated segment labels, e.g. "sasa"
  std::vector<PhonemeSegment> segments;
  std::filesystem::path source;

  // Non-empty, sorted, gap-free and overlap-free segments that end within
  // the waveform, with class/error combinations that make sense. Throws
  // AnnotationError.
  void validate(std::size_t wav_len) const;
};

// CSV rows `start_sec,end_sec,label,class,error` (header optional). Times are
// rounded to samples at `sample_rate`; neighbouring boundaries that disagree
// by at most one sample are snapped together, as is a final end within one
// sample of the waveform end.
WordAnnotation parse_annotation(std::string_view csv_text, std::size_t wav_len, int sample_rate,
                                std::string_view origin = "annotation");
WordAnnotation load_annotation(const std::filesystem::path& path, const Waveform& wav);

// Inverse of parse_annotation.
std::string format_annotation(const WordAnnotation& ann, int sample_rate);
void save_annotation(const WordAnnotation& ann, int sample_rate, const std::filesystem::path& path);

}  // namespace clpenh::pipeline
