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

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "avcl/ops.hpp"
#include "avcl/rng.hpp"
#include "avcl/tensor.hpp"

// Small layer library. Layers hold tensor handles, so collecting them into a
// Parameters list shares storage with the layer.
namespace avcl::nn {

struct Parameter {
  std::string name;
  Tensor value;
  bool decay = true;  // false for biases and batch-norm affine terms
};
using Parameters = std::vector<Parameter>;

struct Buffer {
  std::string name;
  Tensor value;
};
using Buffers = std::vector<Buffer>;

/// Fingerprint of names, shapes and values.
std::uint64_t parameter_hash(const Parameters& params);

/// Copies values from `src` into `dst`, matching by position; names and
/// shapes must agree.
void copy_values(const Parameters& src, const Parameters& dst);
void copy_values(const Buffers& src, const Buffers& dst);

void set_requires_grad(const Parameters& params, bool value);

struct Linear {
  Tensor weight;  // [in, out]
  Tensor bias;    // [out] or undefined

  static Linear create(std::size_t in, std::size_t out, bool with_bias, Rng& rng);
  Tensor operator()(const Tensor& x) const;
  void collect(const std::string& prefix, Parameters& out) const;
};

struct Conv2d {
  Tensor weight;  // [out, in, kh, kw]
  Tensor bias;    // [out] or undefined
  ops::Conv2dOptions opts;

  static Conv2d create(std::size_t in, std::size_t out, std::size_t kh, std::size_t kw, ops::Conv2dOptions opts,
                       bool with_bias, Rng& rng);
  Tensor operator()(const Tensor& x) const;
  void collect(const std::string& prefix, Parameters& out) const;
};

struct BatchNorm {
  Tensor gamma;
  Tensor beta;
  ops::BatchNormState state;

  static BatchNorm create(std::size_t channels);
  Tensor operator()(const Tensor& x, ops::Mode mode);
  void collect(const std::string& prefix, Parameters& out) const;
  void collect_buffers(const std::string& prefix, Buffers& out) const;
};

}  // namespace avcl::nn
