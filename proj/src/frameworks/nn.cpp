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

#include "avcl/nn.hpp"

#include <cmath>
#include <cstring>

#include "avcl/error.hpp"

namespace avcl::nn {

std::uint64_t parameter_hash(const Parameters& params) {
  std::uint64_t h = fnv1a(nullptr, 0);
  for (const auto& p : params) {
    h = fnv1a(p.name.data(), p.name.size(), h);
    for (std::size_t d : p.value.shape()) {
      const auto v = static_cast<std::uint64_t>(d);
      h = fnv1a(&v, sizeof v, h);
    }
    const auto data = p.value.data();
    h = fnv1a(data.data(), data.size_bytes(), h);
  }
  return h;
}

namespace {

void copy_tensor(const std::string& name, const Tensor& src, const Tensor& dst) {
  if (src.shape() != dst.shape()) {
    throw ShapeError("copy_values: '" + name + "' has shape " + shape_str(src.shape()) + " vs " +
                     shape_str(dst.shape()));
  }
  const auto s = src.data();
  auto d = dst.impl().data.data();
  std::memcpy(d, s.data(), s.size_bytes());
}

}  // namespace

void copy_values(const Parameters& src, const Parameters& dst) {
  if (src.size() != dst.size()) throw ShapeError("copy_values: parameter lists differ in length");
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (src[i].name != dst[i].name) throw ShapeError("copy_values: '" + src[i].name + "' vs '" + dst[i].name + "'");
    copy_tensor(src[i].name, src[i].value, dst[i].value);
  }
}

void copy_values(const Buffers& src, const Buffers& dst) {
  if (src.size() != dst.size()) throw ShapeError("copy_values: buffer lists differ in length");
  for (std::size_t i = 0; i < src.size(); ++i) copy_tensor(src[i].name, src[i].value, dst[i].value);
}

void set_requires_grad(const Parameters& params, bool value) {
  for (const auto& p : params) {
    Tensor t = p.value;
    t.set_requires_grad(value);
  }
}

namespace {

Tensor he_normal(Shape shape, std::size_t fan_in, Rng& rng) {
  const double std = std::sqrt(2.0 / static_cast<double>(fan_in));
  std::vector<double> v(shape_numel(shape));
  for (auto& x : v) x = std * standard_normal(rng);
  return Tensor(std::move(shape), std::move(v), true);
}

}  // namespace

Linear Linear::create(std::size_t in, std::size_t out, bool with_bias, Rng& rng) {
  Linear l;
  l.weight = he_normal({in, out}, in, rng);
  if (with_bias) l.bias = Tensor::zeros({out}, true);
  return l;
}

Tensor Linear::operator()(const Tensor& x) const {
  Tensor y = ops::matmul(x, weight);
  return bias.defined() ? y + bias : y;
}

void Linear::collect(const std::string& prefix, Parameters& out) const {
  out.push_back({prefix + ".weight", weight, true});
  if (bias.defined()) out.push_back({prefix + ".bias", bias, false});
}

Conv2d Conv2d::create(std::size_t in, std::size_t out, std::size_t kh, std::size_t kw, ops::Conv2dOptions opts,
                      bool with_bias, Rng& rng) {
  Conv2d c;
  c.weight = he_normal({out, in, kh, kw}, in * kh * kw, rng);
  if (with_bias) c.bias = Tensor::zeros({out}, true);
  c.opts = opts;
  return c;
}

Tensor Conv2d::operator()(const Tensor& x) const { return ops::conv2d(x, weight, bias, opts); }

void Conv2d::collect(const std::string& prefix, Parameters& out) const {
  out.push_back({prefix + ".weight", weight, true});
  if (bias.defined()) out.push_back({prefix + ".bias", bias, false});
}

BatchNorm BatchNorm::create(std::size_t channels) {
  return BatchNorm{Tensor::full({channels}, 1.0, true), Tensor::zeros({channels}, true),
                   ops::BatchNormState::create(channels)};
}

Tensor BatchNorm::operator()(const Tensor& x, ops::Mode mode) { return ops::batch_norm(x, gamma, beta, state, mode); }

void BatchNorm::collect(const std::string& prefix, Parameters& out) const {
  out.push_back({prefix + ".gamma", gamma, false});
  out.push_back({prefix + ".beta", beta, false});
}

void BatchNorm::collect_buffers(const std::string& prefix, Buffers& out) const {
  out.push_back({prefix + ".running_mean", state.running_mean});
  out.push_back({prefix + ".running_var", state.running_var});
}

}  // namespace avcl::nn
