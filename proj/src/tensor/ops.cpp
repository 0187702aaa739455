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

#include "avcl/ops.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iostream>
#include <limits>
#include <string>

#include "avcl/error.hpp"
#include "avcl/kernels.hpp"

namespace avcl::ops {

namespace {

bool needs_grad(std::initializer_list<const Tensor*> inputs) {
  if (!active_tape()) return false;
  for (const Tensor* t : inputs) {
    if (t && t->defined() && t->requires_grad()) return true;
  }
  return false;
}

void record(std::string_view name, const Tensor& out, Tape::BackwardFn fn) {
  active_tape()->record(name, out, std::move(fn));
}

[[noreturn]] void shape_fail(std::string_view op, const std::string& detail) {
  throw ShapeError(std::string(op) + ": " + detail);
}

void require_defined(std::string_view op, const Tensor& x) {
  if (!x.defined()) shape_fail(op, "undefined input tensor");
}

// View of `shape` as [outer, extent, inner] around `axis`.
struct AxisSplit {
  std::size_t outer = 1, extent = 1, inner = 1;
};

AxisSplit split_axis(std::string_view op, const Shape& shape, std::size_t axis) {
  if (axis >= shape.size()) shape_fail(op, "axis " + std::to_string(axis) + " out of range for " + shape_str(shape));
  AxisSplit s;
  for (std::size_t i = 0; i < axis; ++i) s.outer *= shape[i];
  s.extent = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
  return s;
}

Shape drop_axis(const Shape& shape, std::size_t axis) {
  Shape out = shape;
  out.erase(out.begin() + static_cast<std::ptrdiff_t>(axis));
  return out;
}

// -- broadcasting -----------------------------------------------------------

Shape broadcast_shape(std::string_view op, const Shape& a, const Shape& b) {
  const std::size_t r = std::max(a.size(), b.size());
  Shape out(r);
  for (std::size_t i = 0; i < r; ++i) {
    const std::size_t da = i < r - a.size() ? 1 : a[i - (r - a.size())];
    const std::size_t db = i < r - b.size() ? 1 : b[i - (r - b.size())];
    if (da == db || db == 1) {
      out[i] = da;
    } else if (da == 1) {
      out[i] = db;
    } else {
      shape_fail(op, "shapes " + shape_str(a) + " and " + shape_str(b) + " are not broadcastable");
    }
  }
  return out;
}

// Flat input index for every flat output index; empty when shapes are equal.
std::vector<std::size_t> broadcast_map(const Shape& in, const Shape& out) {
  if (in == out) return {};
  const std::size_t total = shape_numel(out);
  std::vector<std::size_t> map(total, 0);
  if (shape_numel(in) == 1) return map;
  const std::size_t r = out.size(), offset = r - in.size();
  std::vector<std::size_t> stride(r, 0);
  std::size_t s = 1;
  for (std::size_t i = r; i-- > offset;) {
    const std::size_t d = in[i - offset];
    stride[i] = d == 1 ? 0 : s;
    s *= d;
  }
  std::vector<std::size_t> counter(r, 0);
  std::size_t idx = 0;
  for (std::size_t o = 0; o < total; ++o) {
    map[o] = idx;
    for (std::size_t i = r; i-- > 0;) {
      ++counter[i];
      idx += stride[i];
      if (counter[i] < out[i]) break;
      idx -= stride[i] * counter[i];
      counter[i] = 0;
    }
  }
  return map;
}

inline std::size_t mapped(const std::vector<std::size_t>& map, std::size_t o) { return map.empty() ? o : map[o]; }

template <class F, class DA, class DB>
Tensor binary(std::string_view name, const Tensor& a, const Tensor& b, F f, DA dfa, DB dfb) {
  require_defined(name, a);
  require_defined(name, b);
  Shape shape = broadcast_shape(name, a.shape(), b.shape());
  auto ia = broadcast_map(a.shape(), shape);
  auto ib = broadcast_map(b.shape(), shape);
  const auto ad = a.data(), bd = b.data();
  std::vector<double> values(shape_numel(shape));
  for (std::size_t o = 0; o < values.size(); ++o) values[o] = f(ad[mapped(ia, o)], bd[mapped(ib, o)]);
  const bool track = needs_grad({&a, &b});
  Tensor out(std::move(shape), std::move(values), track);
  if (track) {
    record(name, out, [a, b, ia = std::move(ia), ib = std::move(ib), dfa, dfb](std::span<const double> g) {
      const auto ad = a.data(), bd = b.data();
      if (a.requires_grad()) {
        auto ga = a.impl().grad_buffer();
        for (std::size_t o = 0; o < g.size(); ++o) {
          const auto i = mapped(ia, o), j = mapped(ib, o);
          ga[i] += g[o] * dfa(ad[i], bd[j]);
        }
      }
      if (b.requires_grad()) {
        auto gb = b.impl().grad_buffer();
        for (std::size_t o = 0; o < g.size(); ++o) {
          const auto i = mapped(ia, o), j = mapped(ib, o);
          gb[j] += g[o] * dfb(ad[i], bd[j]);
        }
      }
    });
  }
  return out;
}

// `deriv(x, y)` is dy/dx evaluated at input x and output y.
template <class F, class D>
Tensor unary(std::string_view name, const Tensor& x, F f, D deriv) {
  require_defined(name, x);
  const auto xd = x.data();
  std::vector<double> values(xd.size());
  for (std::size_t i = 0; i < xd.size(); ++i) values[i] = f(xd[i]);
  const bool track = needs_grad({&x});
  Tensor out(x.shape(), std::move(values), track);
  if (track) {
    record(name, out, [x, out, deriv](std::span<const double> g) {
      const auto xd = x.data(), yd = out.data();
      auto gx = x.impl().grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * deriv(xd[i], yd[i]);
    });
  }
  return out;
}

std::atomic<std::size_t> g_zero_norms{0};

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  return binary(
      "add", a, b, [](double x, double y) { return x + y; }, [](double, double) { return 1.0; },
      [](double, double) { return 1.0; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary(
      "sub", a, b, [](double x, double y) { return x - y; }, [](double, double) { return 1.0; },
      [](double, double) { return -1.0; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary(
      "mul", a, b, [](double x, double y) { return x * y; }, [](double, double y) { return y; },
      [](double x, double) { return x; });
}

Tensor div(const Tensor& a, const Tensor& b) {
  return binary(
      "div", a, b, [](double x, double y) { return x / y; }, [](double, double y) { return 1.0 / y; },
      [](double x, double y) { return -x / (y * y); });
}

Tensor neg(const Tensor& x) {
  return unary(
      "neg", x, [](double v) { return -v; }, [](double, double) { return -1.0; });
}

Tensor scale(const Tensor& x, double factor) {
  return unary(
      "scale", x, [factor](double v) { return v * factor; }, [factor](double, double) { return factor; });
}

Tensor add_scalar(const Tensor& x, double value) {
  return unary(
      "add_scalar", x, [value](double v) { return v + value; }, [](double, double) { return 1.0; });
}

Tensor relu(const Tensor& x) {
  return unary(
      "relu", x, [](double v) { return v > 0.0 ? v : 0.0; }, [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor exp(const Tensor& x) {
  return unary(
      "exp", x, [](double v) { return std::exp(v); }, [](double, double y) { return y; });
}

Tensor log(const Tensor& x) {
  return unary(
      "log", x, [](double v) { return std::log(v); }, [](double v, double) { return 1.0 / v; });
}

// -- linear algebra -----------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_defined("matmul", a);
  require_defined("matmul", b);
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    shape_fail("matmul", "cannot multiply " + shape_str(a.shape()) + " by " + shape_str(b.shape()));
  }
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  std::vector<double> values(m * n);
  kernels::parallel::gemm(false, false, m, n, k, a.data().data(), b.data().data(), values.data(), false);
  const bool track = needs_grad({&a, &b});
  Tensor out({m, n}, std::move(values), track);
  if (track) {
    record("matmul", out, [a, b, m, n, k](std::span<const double> g) {
      if (a.requires_grad()) {
        kernels::parallel::gemm(false, true, m, k, n, g.data(), b.data().data(), a.impl().grad_buffer().data(), true);
      }
      if (b.requires_grad()) {
        kernels::parallel::gemm(true, false, k, n, m, a.data().data(), g.data(), b.impl().grad_buffer().data(), true);
      }
    });
  }
  return out;
}

Tensor transpose(const Tensor& x) {
  require_defined("transpose", x);
  if (x.rank() != 2) shape_fail("transpose", "expects a 2-D tensor, got " + shape_str(x.shape()));
  const std::size_t r = x.dim(0), c = x.dim(1);
  const auto xd = x.data();
  std::vector<double> values(r * c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) values[j * r + i] = xd[i * c + j];
  const bool track = needs_grad({&x});
  Tensor out({c, r}, std::move(values), track);
  if (track) {
    record("transpose", out, [x, r, c](std::span<const double> g) {
      auto gx = x.impl().grad_buffer();
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) gx[i * c + j] += g[j * r + i];
    });
  }
  return out;
}

Tensor permute(const Tensor& x, const std::vector<std::size_t>& axes) {
  require_defined("permute", x);
  const Shape& in_shape = x.shape();
  const std::size_t rank = in_shape.size();
  std::vector<bool> seen(rank, false);
  if (axes.size() != rank) shape_fail("permute", "axis list does not match " + shape_str(in_shape));
  for (std::size_t a : axes) {
    if (a >= rank || seen[a]) shape_fail("permute", "axis list is not a permutation for " + shape_str(in_shape));
    seen[a] = true;
  }
  Shape out_shape(rank);
  std::vector<std::size_t> in_strides(rank, 1);
  for (std::size_t i = rank; i-- > 1;) in_strides[i - 1] = in_strides[i] * in_shape[i];
  for (std::size_t i = 0; i < rank; ++i) out_shape[i] = in_shape[axes[i]];

  // Source offset of every output element.
  const std::size_t n = x.numel();
  std::vector<std::size_t> src(n);
  std::vector<std::size_t> idx(rank, 0);
  for (std::size_t o = 0; o < n; ++o) {
    std::size_t off = 0;
    for (std::size_t i = 0; i < rank; ++i) off += idx[i] * in_strides[axes[i]];
    src[o] = off;
    for (std::size_t i = rank; i-- > 0;) {
      if (++idx[i] < out_shape[i]) break;
      idx[i] = 0;
    }
  }
  const auto xd = x.data();
  std::vector<double> values(n);
  for (std::size_t o = 0; o < n; ++o) values[o] = xd[src[o]];
  const bool track = needs_grad({&x});
  Tensor out(std::move(out_shape), std::move(values), track);
  if (track) {
    record("permute", out, [x, src = std::move(src)](std::span<const double> g) {
      auto gx = x.impl().grad_buffer();
      for (std::size_t o = 0; o < g.size(); ++o) gx[src[o]] += g[o];
    });
  }
  return out;
}

// -- convolution and pooling --------------------------------------------------

Tensor conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias, Conv2dOptions opts) {
  require_defined("conv2d", x);
  require_defined("conv2d", weight);
  if (x.rank() != 4 || weight.rank() != 4 || x.dim(1) != weight.dim(1)) {
    shape_fail("conv2d", "input " + shape_str(x.shape()) + " incompatible with weight " + shape_str(weight.shape()));
  }
  if (opts.stride == 0) shape_fail("conv2d", "stride must be positive");
  if (bias.defined() && (bias.rank() != 1 || bias.dim(0) != weight.dim(0))) {
    shape_fail("conv2d", "bias " + shape_str(bias.shape()) + " does not match weight " + shape_str(weight.shape()));
  }
  kernels::ConvGeometry geom{x.dim(0), x.dim(1), x.dim(2), x.dim(3), weight.dim(0), weight.dim(2), weight.dim(3),
                             opts.stride, opts.pad};
  if (geom.kernel_h > geom.in_h + 2 * geom.pad || geom.kernel_w > geom.in_w + 2 * geom.pad) {
    shape_fail("conv2d", "kernel " + shape_str(weight.shape()) + " larger than padded input " + shape_str(x.shape()));
  }
  Shape shape{geom.batch, geom.out_channels, geom.out_h(), geom.out_w()};
  std::vector<double> values(shape_numel(shape));
  kernels::parallel::conv2d_forward(geom, x.data().data(), weight.data().data(),
                                    bias.defined() ? bias.data().data() : nullptr, values.data());
  const bool track = needs_grad({&x, &weight, &bias});
  Tensor out(std::move(shape), std::move(values), track);
  if (track) {
    record("conv2d", out, [x, weight, bias, geom](std::span<const double> g) {
      if (x.requires_grad()) {
        kernels::parallel::conv2d_backward_input(geom, g.data(), weight.data().data(), x.impl().grad_buffer().data());
      }
      const bool want_w = weight.requires_grad();
      const bool want_b = bias.defined() && bias.requires_grad();
      if (want_w || want_b) {
        std::vector<double> scratch;
        double* gw = nullptr;
        if (want_w) {
          gw = weight.impl().grad_buffer().data();
        } else {
          scratch.assign(weight.numel(), 0.0);
          gw = scratch.data();
        }
        kernels::parallel::conv2d_backward_weight(geom, g.data(), x.data().data(), gw,
                                                  want_b ? bias.impl().grad_buffer().data() : nullptr);
      }
    });
  }
  return out;
}

namespace {

Tensor pool2d(std::string_view name, const Tensor& x, std::size_t kernel, std::size_t stride, bool is_max) {
  require_defined(name, x);
  if (x.rank() != 4) shape_fail(name, "expects [N,C,H,W], got " + shape_str(x.shape()));
  if (kernel == 0 || stride == 0 || kernel > x.dim(2) || kernel > x.dim(3)) {
    shape_fail(name, "kernel " + std::to_string(kernel) + " invalid for " + shape_str(x.shape()));
  }
  const std::size_t planes = x.dim(0) * x.dim(1), h = x.dim(2), w = x.dim(3);
  const std::size_t oh = (h - kernel) / stride + 1, ow = (w - kernel) / stride + 1;
  const auto xd = x.data();
  std::vector<double> values(planes * oh * ow);
  std::vector<std::size_t> argmax(is_max ? values.size() : 0);
  const double inv = 1.0 / static_cast<double>(kernel * kernel);
  for (std::size_t p = 0; p < planes; ++p) {
    for (std::size_t i = 0; i < oh; ++i) {
      for (std::size_t j = 0; j < ow; ++j) {
        const std::size_t o = (p * oh + i) * ow + j;
        double acc = is_max ? -std::numeric_limits<double>::infinity() : 0.0;
        std::size_t best = 0;
        for (std::size_t a = 0; a < kernel; ++a) {
          for (std::size_t b = 0; b < kernel; ++b) {
            const std::size_t idx = (p * h + i * stride + a) * w + j * stride + b;
            if (is_max) {
              if (xd[idx] > acc) {
                acc = xd[idx];
                best = idx;
              }
            } else {
              acc += xd[idx];
            }
          }
        }
        values[o] = is_max ? acc : acc * inv;
        if (is_max) argmax[o] = best;
      }
    }
  }
  const bool track = needs_grad({&x});
  Tensor out({x.dim(0), x.dim(1), oh, ow}, std::move(values), track);
  if (track) {
    record(name, out,
           [x, argmax = std::move(argmax), is_max, kernel, stride, planes, h, w, oh, ow, inv](std::span<const double> g) {
             auto gx = x.impl().grad_buffer();
             if (is_max) {
               for (std::size_t o = 0; o < g.size(); ++o) gx[argmax[o]] += g[o];
               return;
             }
             for (std::size_t p = 0; p < planes; ++p)
               for (std::size_t i = 0; i < oh; ++i)
                 for (std::size_t j = 0; j < ow; ++j) {
                   const double gv = g[(p * oh + i) * ow + j] * inv;
                   for (std::size_t a = 0; a < kernel; ++a)
                     for (std::size_t b = 0; b < kernel; ++b) gx[(p * h + i * stride + a) * w + j * stride + b] += gv;
                 }
           });
  }
  return out;
}

}  // namespace

Tensor max_pool2d(const Tensor& x, std::size_t kernel, std::size_t stride) {
  return pool2d("max_pool2d", x, kernel, stride, true);
}

Tensor avg_pool2d(const Tensor& x, std::size_t kernel, std::size_t stride) {
  return pool2d("avg_pool2d", x, kernel, stride, false);
}

// -- shape manipulation ---------------------------------------------------------

Tensor reshape(const Tensor& x, Shape shape) {
  require_defined("reshape", x);
  if (shape_numel(shape) != x.numel()) {
    shape_fail("reshape", "cannot view " + shape_str(x.shape()) + " as " + shape_str(shape));
  }
  const bool track = needs_grad({&x});
  const auto xd = x.data();
  Tensor out(std::move(shape), std::vector<double>(xd.begin(), xd.end()), track);
  if (track) {
    record("reshape", out, [x](std::span<const double> g) {
      auto gx = x.impl().grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
    });
  }
  return out;
}

Tensor concat(std::span<const Tensor> parts, std::size_t axis) {
  if (parts.empty()) shape_fail("concat", "no inputs");
  for (const auto& p : parts) require_defined("concat", p);
  const Shape& first = parts[0].shape();
  if (axis >= first.size()) shape_fail("concat", "axis out of range for " + shape_str(first));
  Shape shape = first;
  shape[axis] = 0;
  for (const auto& p : parts) {
    const Shape& s = p.shape();
    bool ok = s.size() == first.size();
    for (std::size_t i = 0; ok && i < s.size(); ++i) ok = i == axis || s[i] == first[i];
    if (!ok) shape_fail("concat", "shape " + shape_str(s) + " does not match " + shape_str(first));
    shape[axis] += s[axis];
  }
  const auto split = split_axis("concat", shape, axis);
  std::vector<double> values(shape_numel(shape));
  std::size_t offset = 0;
  bool track = false;
  for (const auto& p : parts) {
    const std::size_t chunk = p.dim(axis) * split.inner;
    const auto pd = p.data();
    for (std::size_t o = 0; o < split.outer; ++o) {
      std::copy_n(pd.begin() + o * chunk, chunk, values.begin() + o * split.extent * split.inner + offset);
    }
    offset += chunk;
    track = track || needs_grad({&p});
  }
  Tensor out(std::move(shape), std::move(values), track);
  if (track) {
    std::vector<Tensor> inputs(parts.begin(), parts.end());
    record("concat", out, [inputs = std::move(inputs), axis, split](std::span<const double> g) {
      std::size_t offset = 0;
      for (const auto& p : inputs) {
        const std::size_t chunk = p.dim(axis) * split.inner;
        if (p.requires_grad()) {
          auto gp = p.impl().grad_buffer();
          for (std::size_t o = 0; o < split.outer; ++o)
            for (std::size_t i = 0; i < chunk; ++i) gp[o * chunk + i] += g[o * split.extent * split.inner + offset + i];
        }
        offset += chunk;
      }
    });
  }
  return out;
}

Tensor slice(const Tensor& x, std::size_t axis, std::size_t begin, std::size_t end) {
  require_defined("slice", x);
  const auto split = split_axis("slice", x.shape(), axis);
  if (begin >= end || end > split.extent) {
    shape_fail("slice", "range [" + std::to_string(begin) + "," + std::to_string(end) + ") invalid for axis " +
                            std::to_string(axis) + " of " + shape_str(x.shape()));
  }
  Shape shape = x.shape();
  shape[axis] = end - begin;
  const std::size_t chunk = (end - begin) * split.inner;
  const auto xd = x.data();
  std::vector<double> values(split.outer * chunk);
  for (std::size_t o = 0; o < split.outer; ++o) {
    std::copy_n(xd.begin() + (o * split.extent + begin) * split.inner, chunk, values.begin() + o * chunk);
  }
  const bool track = needs_grad({&x});
  Tensor out(std::move(shape), std::move(values), track);
  if (track) {
    record("slice", out, [x, split, begin, chunk](std::span<const double> g) {
      auto gx = x.impl().grad_buffer();
      for (std::size_t o = 0; o < split.outer; ++o)
        for (std::size_t i = 0; i < chunk; ++i) gx[(o * split.extent + begin) * split.inner + i] += g[o * chunk + i];
    });
  }
  return out;
}

// -- reductions -------------------------------------------------------------------

Tensor sum(const Tensor& x) {
  require_defined("sum", x);
  double acc = 0.0;
  for (double v : x.data()) acc += v;
  const bool track = needs_grad({&x});
  Tensor out({}, {acc}, track);
  if (track) {
    record("sum", out, [x](std::span<const double> g) {
      auto gx = x.impl().grad_buffer();
      for (auto& v : gx) v += g[0];
    });
  }
  return out;
}

Tensor sum(const Tensor& x, std::size_t axis) {
  require_defined("sum", x);
  const auto s = split_axis("sum", x.shape(), axis);
  const auto xd = x.data();
  std::vector<double> values(s.outer * s.inner, 0.0);
  for (std::size_t o = 0; o < s.outer; ++o)
    for (std::size_t k = 0; k < s.extent; ++k)
      for (std::size_t i = 0; i < s.inner; ++i) values[o * s.inner + i] += xd[(o * s.extent + k) * s.inner + i];
  const bool track = needs_grad({&x});
  Tensor out(drop_axis(x.shape(), axis), std::move(values), track);
  if (track) {
    record("sum_axis", out, [x, s](std::span<const double> g) {
      auto gx = x.impl().grad_buffer();
      for (std::size_t o = 0; o < s.outer; ++o)
        for (std::size_t k = 0; k < s.extent; ++k)
          for (std::size_t i = 0; i < s.inner; ++i) gx[(o * s.extent + k) * s.inner + i] += g[o * s.inner + i];
    });
  }
  return out;
}

Tensor mean(const Tensor& x) { return scale(sum(x), 1.0 / static_cast<double>(x.numel())); }

Tensor mean(const Tensor& x, std::size_t axis) {
  const auto s = split_axis("mean", x.shape(), axis);
  return scale(sum(x, axis), 1.0 / static_cast<double>(s.extent));
}

Tensor max(const Tensor& x, std::size_t axis) {
  require_defined("max", x);
  const auto s = split_axis("max", x.shape(), axis);
  const auto xd = x.data();
  std::vector<double> values(s.outer * s.inner);
  std::vector<std::size_t> argmax(values.size());
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t i = 0; i < s.inner; ++i) {
      std::size_t best = o * s.extent * s.inner + i;
      for (std::size_t k = 1; k < s.extent; ++k) {
        const std::size_t idx = (o * s.extent + k) * s.inner + i;
        if (xd[idx] > xd[best]) best = idx;
      }
      values[o * s.inner + i] = xd[best];
      argmax[o * s.inner + i] = best;
    }
  }
  const bool track = needs_grad({&x});
  Tensor out(drop_axis(x.shape(), axis), std::move(values), track);
  if (track) {
    record("max_axis", out, [x, argmax = std::move(argmax)](std::span<const double> g) {
      auto gx = x.impl().grad_buffer();
      for (std::size_t o = 0; o < g.size(); ++o) gx[argmax[o]] += g[o];
    });
  }
  return out;
}

Tensor softmax(const Tensor& x, std::size_t axis) {
  require_defined("softmax", x);
  const auto s = split_axis("softmax", x.shape(), axis);
  const auto xd = x.data();
  std::vector<double> values(xd.size());
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t i = 0; i < s.inner; ++i) {
      auto at = [&](std::size_t k) { return (o * s.extent + k) * s.inner + i; };
      double hi = xd[at(0)];
      for (std::size_t k = 1; k < s.extent; ++k) hi = std::max(hi, xd[at(k)]);
      double z = 0.0;
      for (std::size_t k = 0; k < s.extent; ++k) z += (values[at(k)] = std::exp(xd[at(k)] - hi));
      for (std::size_t k = 0; k < s.extent; ++k) values[at(k)] /= z;
    }
  }
  const bool track = needs_grad({&x});
  Tensor out(x.shape(), std::move(values), track);
  if (track) {
    record("softmax", out, [x, out, s](std::span<const double> g) {
      const auto y = out.data();
      auto gx = x.impl().grad_buffer();
      for (std::size_t o = 0; o < s.outer; ++o) {
        for (std::size_t i = 0; i < s.inner; ++i) {
          auto at = [&](std::size_t k) { return (o * s.extent + k) * s.inner + i; };
          double dot = 0.0;
          for (std::size_t k = 0; k < s.extent; ++k) dot += g[at(k)] * y[at(k)];
          for (std::size_t k = 0; k < s.extent; ++k) gx[at(k)] += y[at(k)] * (g[at(k)] - dot);
        }
      }
    });
  }
  return out;
}

Tensor log_softmax(const Tensor& x, std::size_t axis) {
  require_defined("log_softmax", x);
  const auto s = split_axis("log_softmax", x.shape(), axis);
  const auto xd = x.data();
  std::vector<double> values(xd.size());
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t i = 0; i < s.inner; ++i) {
      auto at = [&](std::size_t k) { return (o * s.extent + k) * s.inner + i; };
      double hi = xd[at(0)];
      for (std::size_t k = 1; k < s.extent; ++k) hi = std::max(hi, xd[at(k)]);
      double z = 0.0;
      for (std::size_t k = 0; k < s.extent; ++k) z += std::exp(xd[at(k)] - hi);
      const double lse = hi + std::log(z);
      for (std::size_t k = 0; k < s.extent; ++k) values[at(k)] = xd[at(k)] - lse;
    }
  }
  const bool track = needs_grad({&x});
  Tensor out(x.shape(), std::move(values), track);
  if (track) {
    record("log_softmax", out, [x, out, s](std::span<const double> g) {
      const auto y = out.data();
      auto gx = x.impl().grad_buffer();
      for (std::size_t o = 0; o < s.outer; ++o) {
        for (std::size_t i = 0; i < s.inner; ++i) {
          auto at = [&](std::size_t k) { return (o * s.extent + k) * s.inner + i; };
          double total = 0.0;
          for (std::size_t k = 0; k < s.extent; ++k) total += g[at(k)];
          for (std::size_t k = 0; k < s.extent; ++k) gx[at(k)] += g[at(k)] - std::exp(y[at(k)]) * total;
        }
      }
    });
  }
  return out;
}

Tensor l2_normalize(const Tensor& x, std::size_t axis) {
  require_defined("l2_normalize", x);
  const auto s = split_axis("l2_normalize", x.shape(), axis);
  const auto xd = x.data();
  std::vector<double> values(xd.size(), 0.0);
  std::vector<double> norms(s.outer * s.inner);
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t i = 0; i < s.inner; ++i) {
      auto at = [&](std::size_t k) { return (o * s.extent + k) * s.inner + i; };
      double sq = 0.0;
      for (std::size_t k = 0; k < s.extent; ++k) sq += xd[at(k)] * xd[at(k)];
      const double norm = std::sqrt(sq);
      norms[o * s.inner + i] = norm;
      if (norm == 0.0) {
        if (g_zero_norms.fetch_add(1) == 0) std::cerr << "warning: l2_normalize of a zero vector\n";
        continue;
      }
      for (std::size_t k = 0; k < s.extent; ++k) values[at(k)] = xd[at(k)] / norm;
    }
  }
  const bool track = needs_grad({&x});
  Tensor out(x.shape(), std::move(values), track);
  if (track) {
    record("l2_normalize", out, [x, out, s, norms = std::move(norms)](std::span<const double> g) {
      const auto y = out.data();
      auto gx = x.impl().grad_buffer();
      for (std::size_t o = 0; o < s.outer; ++o) {
        for (std::size_t i = 0; i < s.inner; ++i) {
          const double norm = norms[o * s.inner + i];
          if (norm == 0.0) continue;
          auto at = [&](std::size_t k) { return (o * s.extent + k) * s.inner + i; };
          double dot = 0.0;
          for (std::size_t k = 0; k < s.extent; ++k) dot += g[at(k)] * y[at(k)];
          for (std::size_t k = 0; k < s.extent; ++k) gx[at(k)] += (g[at(k)] - y[at(k)] * dot) / norm;
        }
      }
    });
  }
  return out;
}

std::size_t l2_normalize_zero_count() { return g_zero_norms.load(); }

Tensor stop_gradient(const Tensor& x) {
  require_defined("stop_gradient", x);
  return x.clone();
}

// -- batch normalization ------------------------------------------------------------

BatchNormState BatchNormState::create(std::size_t channels) {
  return BatchNormState{Tensor::zeros({channels}), Tensor::full({channels}, 1.0)};
}

Tensor batch_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, BatchNormState& state, Mode mode) {
  require_defined("batch_norm", x);
  if (x.rank() < 2) shape_fail("batch_norm", "expects [N,C,...], got " + shape_str(x.shape()));
  const std::size_t n = x.dim(0), c = x.dim(1);
  const std::size_t inner = x.numel() / (n * c);
  if (state.running_mean.numel() != c || state.running_var.numel() != c) {
    shape_fail("batch_norm", "running statistics sized " + std::to_string(state.running_mean.numel()) +
                                 " for input " + shape_str(x.shape()));
  }
  if (gamma.defined() && gamma.numel() != c) shape_fail("batch_norm", "gamma " + shape_str(gamma.shape()));
  if (beta.defined() && beta.numel() != c) shape_fail("batch_norm", "beta " + shape_str(beta.shape()));
  if (mode == Mode::kTrain && n < 2) {
    shape_fail("batch_norm", "degenerate batch: train mode needs at least 2 samples, got " + shape_str(x.shape()));
  }

  const auto xd = x.data();
  const double count = static_cast<double>(n * inner);
  auto at = [&](std::size_t b, std::size_t ch, std::size_t i) { return (b * c + ch) * inner + i; };

  std::vector<double> mean(c), inv_std(c);
  if (mode == Mode::kTrain) {
    auto rm = state.running_mean.mutable_data();
    auto rv = state.running_var.mutable_data();
    for (std::size_t ch = 0; ch < c; ++ch) {
      double acc = 0.0;
      for (std::size_t b = 0; b < n; ++b)
        for (std::size_t i = 0; i < inner; ++i) acc += xd[at(b, ch, i)];
      const double mu = acc / count;
      double sq = 0.0;
      for (std::size_t b = 0; b < n; ++b)
        for (std::size_t i = 0; i < inner; ++i) sq += (xd[at(b, ch, i)] - mu) * (xd[at(b, ch, i)] - mu);
      const double var = sq / count;
      mean[ch] = mu;
      inv_std[ch] = 1.0 / std::sqrt(var + state.eps);
      rm[ch] = (1.0 - state.momentum) * rm[ch] + state.momentum * mu;
      rv[ch] = (1.0 - state.momentum) * rv[ch] + state.momentum * (sq / (count - 1.0));
    }
  } else {
    const auto rm = state.running_mean.data();
    const auto rv = state.running_var.data();
    for (std::size_t ch = 0; ch < c; ++ch) {
      mean[ch] = rm[ch];
      inv_std[ch] = 1.0 / std::sqrt(rv[ch] + state.eps);
    }
  }

  std::vector<double> xhat(xd.size()), values(xd.size());
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      const double gm = gamma.defined() ? gamma.data()[ch] : 1.0;
      const double bt = beta.defined() ? beta.data()[ch] : 0.0;
      for (std::size_t i = 0; i < inner; ++i) {
        const auto idx = at(b, ch, i);
        xhat[idx] = (xd[idx] - mean[ch]) * inv_std[ch];
        values[idx] = gm * xhat[idx] + bt;
      }
    }
  }

  const bool track = needs_grad({&x, &gamma, &beta});
  Tensor out(x.shape(), std::move(values), track);
  if (track) {
    record("batch_norm", out,
           [x, gamma, beta, mode, n, c, inner, count, inv_std = std::move(inv_std),
            xhat = std::move(xhat)](std::span<const double> g) {
             auto at = [&](std::size_t b, std::size_t ch, std::size_t i) { return (b * c + ch) * inner + i; };
             for (std::size_t ch = 0; ch < c; ++ch) {
               double sum_g = 0.0, sum_gx = 0.0;
               for (std::size_t b = 0; b < n; ++b)
                 for (std::size_t i = 0; i < inner; ++i) {
                   sum_g += g[at(b, ch, i)];
                   sum_gx += g[at(b, ch, i)] * xhat[at(b, ch, i)];
                 }
               if (gamma.defined() && gamma.requires_grad()) gamma.impl().grad_buffer()[ch] += sum_gx;
               if (beta.defined() && beta.requires_grad()) beta.impl().grad_buffer()[ch] += sum_g;
               if (!x.requires_grad()) continue;
               auto gx = x.impl().grad_buffer();
               const double gm = gamma.defined() ? gamma.data()[ch] : 1.0;
               for (std::size_t b = 0; b < n; ++b) {
                 for (std::size_t i = 0; i < inner; ++i) {
                   const auto idx = at(b, ch, i);
                   if (mode == Mode::kTrain) {
                     gx[idx] += gm * inv_std[ch] * (g[idx] - sum_g / count - xhat[idx] * sum_gx / count);
                   } else {
                     gx[idx] += gm * inv_std[ch] * g[idx];
                   }
                 }
               }
             }
           });
  }
  return out;
}

}  // namespace avcl::ops
