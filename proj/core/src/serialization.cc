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

#include "mtme/serialization.h"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "mtme/error.h"

namespace mtme {
namespace {

static_assert(std::endian::native == std::endian::little,
              "the MTME writer assumes a little-endian host");

constexpr const char* kFrozenPrefix = "frozen/embedding/";

void put_u32(std::string& out, std::size_t value) {
  if (value > std::numeric_limits<std::uint32_t>::max()) {
    throw Error("value " + std::to_string(value) + " does not fit the MTME u32 field");
  }
  const auto v = static_cast<std::uint32_t>(value);
  char buf[4];
  std::memcpy(buf, &v, 4);
  out.append(buf, 4);
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  std::size_t offset() const { return pos_; }
  bool done() const { return pos_ == bytes_.size(); }

  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) {
      throw FormatError(std::string("truncated file while reading ") + what, pos_);
    }
  }

  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v;
    std::memcpy(&v, bytes_.data() + pos_, 4);
    pos_ += 4;
    return v;
  }

  std::string text(std::size_t n, const char* what) {
    need(n, what);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  float f32() {
    float v;
    std::memcpy(&v, bytes_.data() + pos_, 4);
    pos_ += 4;
    return v;
  }

 private:
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::size_t archive_size(const TensorArchive& archive) {
  std::size_t n = 4 + 4 + 4 + archive.header.dump().size() + 4;
  for (const auto& [name, t] : archive.tensors) {
    n += 4 + name.size() + 4 + 4 * t.rank() + 4 * t.numel();
  }
  return n;
}

std::string encode_archive(const TensorArchive& archive) {
  std::string out;
  out.reserve(archive_size(archive));
  out.append(kMagic, 4);
  put_u32(out, kFormatVersion);
  const std::string header = archive.header.dump();
  put_u32(out, header.size());
  out += header;
  put_u32(out, archive.tensors.size());
  for (const auto& [name, t] : archive.tensors) {
    put_u32(out, name.size());
    out += name;
    put_u32(out, t.rank());
    for (std::size_t d : t.shape()) put_u32(out, d);
    for (double v : t.values()) {
      const auto f = static_cast<float>(v);
      char buf[4];
      std::memcpy(buf, &f, 4);
      out.append(buf, 4);
    }
  }
  return out;
}

TensorArchive decode_archive(const std::string& bytes) {
  Reader in(bytes);
  const std::string magic = in.text(4, "magic");
  if (std::memcmp(magic.data(), kMagic, 4) != 0) throw FormatError("bad magic, not an MTME file", 0);
  const std::size_t version_at = in.offset();
  const std::uint32_t version = in.u32("version");
  if (version != kFormatVersion) {
    throw FormatError("unsupported format version " + std::to_string(version), version_at);
  }
  const std::uint32_t header_len = in.u32("header length");
  const std::size_t header_at = in.offset();
  TensorArchive archive;
  try {
    archive.header = nlohmann::json::parse(in.text(header_len, "header"));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed JSON header: ") + e.what(), header_at);
  }
  if (!archive.header.is_object()) throw FormatError("header is not a JSON object", header_at);

  const std::uint32_t count = in.u32("tensor count");
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t name_len = in.u32("name length");
    std::string name = in.text(name_len, "tensor name");
    const std::size_t rank_at = in.offset();
    const std::uint32_t rank = in.u32("rank");
    if (rank > 8) throw FormatError("implausible rank " + std::to_string(rank), rank_at);
    Shape shape;
    std::size_t numel = 1;
    for (std::uint32_t r = 0; r < rank; ++r) {
      const std::size_t dim_at = in.offset();
      const std::uint32_t d = in.u32("dimension");
      if (d == 0) throw FormatError("zero dimension in tensor '" + name + "'", dim_at);
      shape.push_back(d);
      // Clamped so absurd dimensions cannot overflow; the size check below fails anyway.
      numel = std::min<std::size_t>(numel * d, bytes.size() + 1);
    }
    in.need(4 * numel, "tensor values");
    std::vector<double> values(numel);
    for (double& v : values) v = in.f32();
    archive.tensors.emplace_back(std::move(name), Tensor(std::move(shape), std::move(values)));
  }
  if (!in.done()) throw FormatError("trailing bytes after last tensor", in.offset());
  return archive;
}

void write_archive(const TensorArchive& archive, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  const std::string bytes = encode_archive(archive);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

TensorArchive read_archive(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return decode_archive(buf.str());
}

ArchKind archive_arch(const TensorArchive& archive) {
  if (!archive.header.contains("arch") || !archive.header["arch"].is_string()) {
    throw FormatError("header has no architecture", 12);
  }
  return arch_from_string(archive.header["arch"].get<std::string>());
}

TensorArchive to_archive(const ModelParams& model) {
  TensorArchive a;
  a.header["arch"] = to_string(model.arch);
  a.header["config"] = model.config;
  a.header["metadata"] = model.metadata;
  a.header["tables"] = model.tables.size();
  for (const auto& [name, t] : model.params) a.tensors.emplace_back(name, t.detach());
  for (std::size_t i = 0; i < model.tables.size(); ++i) {
    a.tensors.emplace_back(kFrozenPrefix + std::to_string(i), model.tables[i].matrix());
  }
  return a;
}

ModelParams from_archive(const TensorArchive& archive) {
  ModelParams model;
  try {
    model.arch = archive_arch(archive);
    if (!is_neural(model.arch)) {
      throw ConfigError("file holds a " + to_string(model.arch) + " model, not a neural one");
    }
    model.config = archive.header.at("config").get<MultiTaskConfig>();
    model.metadata = archive.header.value("metadata", nlohmann::json::object());
    const auto n_tables = archive.header.at("tables").get<std::size_t>();
    model.tables.resize(n_tables);
    std::vector<bool> seen(n_tables, false);
    for (const auto& [name, t] : archive.tensors) {
      if (name.starts_with(kFrozenPrefix)) {
        const std::size_t i = std::stoul(name.substr(std::strlen(kFrozenPrefix)));
        if (i >= n_tables || t.rank() != 2) throw FormatError("bad table tensor '" + name + "'", 0);
        model.tables[i] = EmbeddingTable(t);
        seen[i] = true;
      } else {
        model.params.emplace(name, t);
      }
    }
    for (std::size_t i = 0; i < n_tables; ++i) {
      if (!seen[i]) throw FormatError("missing embedding table " + std::to_string(i), 0);
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("inconsistent header: ") + e.what(), 12);
  }
  return model;
}

void save_model(const ModelParams& model, const std::filesystem::path& path) {
  write_archive(to_archive(model), path);
}

ModelParams load_model(const std::filesystem::path& path) {
  return from_archive(read_archive(path));
}

}  // namespace mtme
