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

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "clpenh/transforms/gmm.hpp"
#include "clpenh/transforms/nmf.hpp"

namespace clpenh::transforms {

// Binary container shared by both conversion models:
//   "CLPENHMD"  u32 version  u32 kind  kind-specific u32 dimensions
//   followed by row-major little-endian float64 payloads.
inline constexpr std::uint32_t kModelFormatVersion = 1;

enum class ModelKind : std::uint32_t { kGmm = 1, kNmf = 2 };

std::vector<unsigned char> encode_model(const GmmJointModel& model);
std::vector<unsigned char> encode_model(const NmfDictionaries& dicts);

// Throw ModelFormatError on bad magic, version, kind, dimensions or size.
GmmJointModel decode_gmm(std::span<const unsigned char> bytes);
NmfDictionaries decode_nmf(std::span<const unsigned char> bytes);

// Kind stored in a container, without decoding the payload.
ModelKind peek_model_kind(std::span<const unsigned char> bytes);

void save_model(const GmmJointModel& model, const std::filesystem::path& path);
void save_model(const NmfDictionaries& dicts, const std::filesystem::path& path);
GmmJointModel load_gmm(const std::filesystem::path& path);
NmfDictionaries load_nmf(const std::filesystem::path& path);

}  // namespace clpenh::transforms
