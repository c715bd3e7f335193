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


#include "clpenh/annotation.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <utility>

#include "clpenh/csv.hpp"
#include "clpenh/errors.hpp"

namespace clpenh::pipeline {

namespace {

constexpr std::array<std::pair<PhonemeClass, std::string_view>, 5> kClassTokens{{
    {PhonemeClass::kFricative, "fricative"},
    {PhonemeClass::kStop, "stop"},
    {PhonemeClass::kVowel, "vowel"},
    {PhonemeClass::kNasal, "nasal"},
    {PhonemeClass::kOther, "other"},
}};

constexpr std::array<std::pair<ErrorType, std::string_view>, 6> kErrorTokens{{
    {ErrorType::kNone, "none"},
    {ErrorType::kGS, "GS"},
    {ErrorType::kPA, "PA"},
    {ErrorType::kPSNAE, "PSNAE"},
    {ErrorType::kVelar, "velar"},
    {ErrorType::kNasalized, "nasalized"},
}};

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

std::string describe(const PhonemeSegment& s, std::size_t index) {
  return "segment " + std::to_string(index) + " (/" + s.label + "/)";
}

}  // namespace

std::string_view to_string(PhonemeClass c) {
  for (const auto& [v, t] : kClassTokens) {
    if (v == c) return t;
  }
  return "other";
}

std::string_view to_string(ErrorType e) {
  for (const auto& [v, t] : kErrorTokens) {
    if (v == e) return t;
  }
  return "none";
}

PhonemeClass parse_phoneme_class(std::string_view token) {
  for (const auto& [v, t] : kClassTokens) {
    if (iequals(token, t)) return v;
  }
  throw ParseError("unknown phoneme class '" + std::string(token) + "'");
}

ErrorType parse_error_type(std::string_view token) {
  for (const auto& [v, t] : kErrorTokens) {
    if (iequals(token, t)) return v;
  }
  throw ParseError("unknown error type '" + std::string(token) + "'");
}

bool is_obstruent(PhonemeClass c) { return c == PhonemeClass::kFricative || c == PhonemeClass::kStop; }

bool error_applies(PhonemeClass c, ErrorType e) {
  switch (e) {
    case ErrorType::kNone:
      return true;
    case ErrorType::kGS:
    case ErrorType::kPA:
    case ErrorType::kVelar:
      return is_obstruent(c);
    case ErrorType::kPSNAE:
      return c == PhonemeClass::kFricative;
    case ErrorType::kNasalized:
      return c == PhonemeClass::kVowel;
  }
  return false;
}

void WordAnnotation::validate(std::size_t wav_len) const {
  if (segments.empty()) throw AnnotationError("annotation has no segments");
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& s = segments[i];
    if (s.label.empty()) throw AnnotationError(describe(s, i) + " has an empty label");
    if (s.start >= s.end) throw AnnotationError(describe(s, i) + " is empty or reversed");
    if (s.end > wav_len) {
      throw AnnotationError(describe(s, i) + " ends at sample " + std::to_string(s.end) +
                            ", beyond the waveform (" + std::to_string(wav_len) + " samples)");
    }
    if (!error_applies(s.cls, s.error)) {
      throw AnnotationError(describe(s, i) + ": error " + std::string(to_string(s.error)) +
                            " does not apply to class " + std::string(to_string(s.cls)));
    }
    if (i > 0) {
      const auto& prev = segments[i - 1];
      if (s.start < prev.end) throw AnnotationError(describe(s, i) + " overlaps the previous segment");
      if (s.start > prev.end) throw AnnotationError("gap before " + describe(s, i));
    }
  }
}

WordAnnotation parse_annotation(std::string_view csv_text, std::size_t wav_len, int sample_rate,
                                std::string_view origin) {
  const auto rows = parse_csv(csv_text);
  const std::string where(origin);
  WordAnnotation ann;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (r == 0 && !row.empty() && iequals(row[0], "start_sec")) continue;
    const std::string at = where + " row " + std::to_string(r + 1);
    if (row.size() != 5) {
      throw ParseError(at + ": expected 5 fields (start_sec,end_sec,label,class,error), got " +
                       std::to_string(row.size()));
    }
    const double t0 = parse_double(row[0], at + " start_sec");
    const double t1 = parse_double(row[1], at + " end_sec");
    if (!(t0 >= 0.0) || !std::isfinite(t1)) throw AnnotationError(at + ": invalid time");
    PhonemeSegment s;
    s.start = static_cast<std::size_t>(std::llround(t0 * sample_rate));
    const long long e = std::llround(t1 * sample_rate);
    if (e < 0) throw AnnotationError(at + ": negative end time");
    s.end = static_cast<std::size_t>(e);
    s.label = row[2];
    s.cls = parse_phoneme_class(row[3]);
    s.error = parse_error_type(row[4]);
    ann.segments.push_back(std::move(s));
  }
  if (ann.segments.empty()) throw AnnotationError(where + ": no segments");

  // Snap sub-sample disagreements produced by decimal rounding.
  for (std::size_t i = 1; i < ann.segments.size(); ++i) {
    auto& s = ann.segments[i];
    const std::size_t prev_end = ann.segments[i - 1].end;
    const auto diff = static_cast<long long>(s.start) - static_cast<long long>(prev_end);
    if (diff != 0 && std::llabs(diff) <= 1) s.start = prev_end;
  }
  auto& last = ann.segments.back();
  if (last.end == wav_len + 1) last.end = wav_len;
  for (const auto& s : ann.segments) ann.word += s.label;
  try {
    ann.validate(wav_len);
  } catch (const AnnotationError& e) {
    throw AnnotationError(where + ": " + e.what());
  }
  return ann;
}

WordAnnotation load_annotation(const std::filesystem::path& path, const Waveform& wav) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open annotation " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  auto ann = parse_annotation(ss.str(), wav.size(), wav.sample_rate, path.string());
  ann.source = path;
  return ann;
}

std::string format_annotation(const WordAnnotation& ann, int sample_rate) {
  std::vector<CsvRow> rows;
  rows.push_back({"start_sec", "end_sec", "label", "class", "error"});
  const double sr = sample_rate;
  for (const auto& s : ann.segments) {
    rows.push_back({format_fixed(static_cast<double>(s.start) / sr, 6),
                    format_fixed(static_cast<double>(s.end) / sr, 6), s.label,
                    std::string(to_string(s.cls)), std::string(to_string(s.error))});
  }
  return to_csv(rows);
}

void save_annotation(const WordAnnotation& ann, int sample_rate, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write annotation " + path.string());
  out << format_annotation(ann, sample_rate);
  if (!out) throw IoError("failed writing annotation " + path.string());
}

}  // namespace clpenh::pipeline
