// Copyright 2026 The avcl Authors.
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

#include "avcl/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include "avcl/binary_io.hpp"
#include "avcl/error.hpp"
#include "avcl/rng.hpp"

namespace avcl {

namespace {

constexpr char kMagic[4] = {'A', 'V', 'C', '1'};

}  // namespace

void write_container(const std::filesystem::path& path, const std::vector<Section>& sections) {
  std::ostringstream os;
  os.write(kMagic, 4);
  binio::put_u32(os, kCheckpointVersion);
  binio::put_u32(os, static_cast<std::uint32_t>(sections.size()));
  for (const auto& s : sections) {
    binio::put_string(os, s.name);
    binio::put_string(os, s.payload);
  }
  std::string bytes = os.str();
  std::ostringstream digest;
  binio::put_u64(digest, fnv1a(bytes.data(), bytes.size()));
  bytes += digest.str();

  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::vector<Section> read_container(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::istringstream is(bytes);

  char magic[4];
  binio::read_exact(is, magic, 4, "checkpoint magic");
  if (std::memcmp(magic, kMagic, 4) != 0) throw CorruptHeaderError(path.string() + " is not an AVC1 checkpoint");
  const auto version = binio::get_u32(is, "checkpoint version");
  if (version != kCheckpointVersion) {
    throw VersionMismatchError(path.string() + " has checkpoint version " + std::to_string(version) +
                               ", this build reads version " + std::to_string(kCheckpointVersion));
  }
  const auto count = binio::get_u32(is, "section count");
  std::vector<Section> sections;
  for (std::uint32_t i = 0; i < count; ++i) {
    Section s;
    s.name = binio::get_string(is, "section name", 1u << 12);
    const auto n = binio::get_u64(is, "section length");
    if (n > bytes.size()) throw TruncatedFileError("truncated input while reading section '" + s.name + "'");
    s.payload.resize(n);
    binio::read_exact(is, s.payload.data(), n, "section payload");
    sections.push_back(std::move(s));
  }
  const auto body = static_cast<std::size_t>(is.tellg());
  const auto stored = binio::get_u64(is, "checkpoint digest");
  if (stored != fnv1a(bytes.data(), body)) throw CorruptHeaderError(path.string() + " failed its integrity check");
  if (is.peek() != std::char_traits<char>::eof()) throw CorruptHeaderError(path.string() + " has trailing bytes");
  return sections;
}

const Section& find_section(const std::vector<Section>& sections, const std::string& name) {
  for (const auto& s : sections) {
    if (s.name == name) return s;
  }
  throw DataError("checkpoint has no '" + name + "' section");
}

}  // namespace avcl
