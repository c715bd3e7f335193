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

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace clpenh {

using CsvRow = std::vector<std::string>;

// Comma-separated, optional double quotes, UTF-8 passthrough. Blank lines and
// lines starting with '#' are skipped; fields are whitespace-trimmed.
std::vector<CsvRow> parse_csv(std::string_view text);
std::vector<CsvRow> read_csv(const std::filesystem::path& path);  // IoError if unreadable
void write_csv(const std::filesystem::path& path, const std::vector<CsvRow>& rows);
std::string to_csv(const std::vector<CsvRow>& rows);

// Strict parsers: the whole field must be consumed (ParseError otherwise).
double parse_double(std::string_view field, std::string_view what);
long long parse_int(std::string_view field, std::string_view what);

// Round-trippable ("%.17g") and fixed-precision formatting.
std::string format_double(double v);
std::string format_fixed(double v, int digits = 6);

}  // namespace clpenh
