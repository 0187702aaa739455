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
#include <string_view>
#include <utility>
#include <vector>

#include "avcl/augment.hpp"
#include "avcl/sampling.hpp"
#include "avcl/trainer.hpp"

// Plain-text run configuration.
//
//   # comment
//   seed = 3
//   [optimizer]
//   batch_size = 32
//
// Keys outside a section live in the "run" section; a dotted key such as
// "optimizer.epochs = 3" names its section explicitly. Every key must be
// known; values are checked against the key's type. The canonical form lists
// every key as "section.key = value" in schema order with normalized values,
// and config_hash is the FNV-1a digest of the hashed keys in that form.
namespace avcl::cli {

enum class ValueType { kInt, kReal, kBool, kString };

struct KeySpec {
  std::string key;  // "section.name"
  ValueType type;
  std::string default_value;
  bool hashed = true;  // output locations do not change the experiment
};

const std::vector<KeySpec>& schema();

class Config {
 public:
  Config();  // all defaults

  static Config parse(std::string_view text, const std::string& origin = "<config>");
  static Config load(const std::filesystem::path& path);

  /// Sets "section.key" (or "key" for the run section). Throws ConfigError
  /// for unknown keys and badly typed values.
  void set(std::string_view dotted_key, std::string_view value);
  /// Applies "--section.key=value" style arguments.
  void apply_overrides(const std::vector<std::string>& args);

  const std::string& get(std::string_view dotted_key) const;
  long long get_int(std::string_view dotted_key) const;
  double get_real(std::string_view dotted_key) const;
  bool get_bool(std::string_view dotted_key) const;

  std::string canonical() const;
  /// Canonical form restricted to hashed keys.
  std::string hashed_form() const;
  std::string hash() const;

  const std::vector<std::pair<std::string, std::string>>& entries() const { return values_; }

 private:
  std::vector<std::pair<std::string, std::string>> values_;  // schema order
};

/// Typed view of a configuration.
struct Experiment {
  std::filesystem::path data_dir;
  std::filesystem::path output_dir;
  SyntheticDatasetConfig data;
  std::size_t test_every = 4;  // every n-th video of a class goes to the test split
  PretrainConfig pretrain;
  ProbeConfig probe;
  std::vector<augment::AugmentationSpec> augmentations;
  bool aligned = false;
  augment::SpatialConfig spatial;
  EvalSamplerConfig eval;
  std::string config_hash;

  augment::Pipeline pipeline() const;
};

Experiment materialize(const Config& cfg);

}  // namespace avcl::cli
