// Copyright 2026 The MTME Authors.
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
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "mtme/model.h"
#include "mtme/tensor.h"

namespace mtme {

// On-disk layout (all integers little-endian u32):
//
//   "MTME" | version | header_len | header (UTF-8 JSON) | count |
//   count × { name_len | name | rank | dims[rank] | fp32 values[numel] }
//
// The JSON header carries everything that is not a tensor: architecture,
// configuration and free-form metadata.
inline constexpr char kMagic[4] = {'M', 'T', 'M', 'E'};
inline constexpr std::uint32_t kFormatVersion = 1;

struct TensorArchive {
  nlohmann::json header = nlohmann::json::object();
  std::vector<std::pair<std::string, Tensor>> tensors;
};

std::string encode_archive(const TensorArchive& archive);
// Throws FormatError carrying the byte offset of the first inconsistency.
TensorArchive decode_archive(const std::string& bytes);

void write_archive(const TensorArchive& archive, const std::filesystem::path& path);
TensorArchive read_archive(const std::filesystem::path& path);

// Exact size encode_archive() will produce.
std::size_t archive_size(const TensorArchive& archive);

// Neural models. Frozen embedding tables are stored as "frozen/embedding/<i>".
TensorArchive to_archive(const ModelParams& model);
ModelParams from_archive(const TensorArchive& archive);

void save_model(const ModelParams& model, const std::filesystem::path& path);
ModelParams load_model(const std::filesystem::path& path);

// Architecture recorded in a file without decoding its tensors' meaning.
ArchKind archive_arch(const TensorArchive& archive);

}  // namespace mtme
