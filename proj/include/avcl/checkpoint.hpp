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

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

// "AVC1" container: 4 magic bytes, u32 format version, u32 section count,
// then per section a name, a u64 payload length and the payload. A trailing
// u64 FNV-1a digest of everything before it guards against corruption.
namespace avcl {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Section {
  std::string name;
  std::string payload;
};

/// Writes to a temporary sibling and renames it into place.
void write_container(const std::filesystem::path& path, const std::vector<Section>& sections);

/// Throws CorruptHeaderError, VersionMismatchError or TruncatedFileError.
std::vector<Section> read_container(const std::filesystem::path& path);

const Section& find_section(const std::vector<Section>& sections, const std::string& name);

}  // namespace avcl
