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

#include "avcl/tensor_io.hpp"

#include <fstream>

#include "avcl/binary_io.hpp"
#include "avcl/error.hpp"

namespace avcl {

namespace {
constexpr char kMagic[4] = {'A', 'V', 'T', '1'};
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 34;
}  // namespace

void write_tensor(std::ostream& os, const Tensor& t) {
  os.write(kMagic, 4);
  binio::put_u8(os, static_cast<std::uint8_t>(t.rank()));
  for (auto extent : t.shape()) binio::put_u64(os, extent);
  for (double v : t.data()) binio::put_f64(os, v);
}

Tensor read_tensor(std::istream& is) {
  char magic[4];
  binio::read_exact(is, magic, 4, "tensor magic");
  if (!std::equal(magic, magic + 4, kMagic)) throw CorruptHeaderError("not an AVT1 tensor (bad magic)");
  const auto rank = binio::get_u8(is, "tensor rank");
  Shape shape(rank);
  std::uint64_t total = 1;
  for (auto& extent : shape) {
    extent = binio::get_u64(is, "tensor extent");
    if (extent == 0) throw CorruptHeaderError("AVT1 tensor with zero extent");
    total *= extent;
    if (total > kMaxElements) throw CorruptHeaderError("AVT1 tensor too large");
  }
  std::vector<double> values(total);
  for (auto& v : values) v = binio::get_f64(is, "tensor data");
  return Tensor(std::move(shape), std::move(values));
}

void save_tensor(const std::filesystem::path& path, const Tensor& t) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw DataError("cannot open " + path.string() + " for writing");
  write_tensor(os, t);
  if (!os) throw DataError("failed writing " + path.string());
}

Tensor load_tensor(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open " + path.string());
  return read_tensor(is);
}

}  // namespace avcl
