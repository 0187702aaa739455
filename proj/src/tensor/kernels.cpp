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

#include "avcl/kernels.hpp"

#include <algorithm>
#include <cstdint>

namespace avcl::kernels {

namespace {

using Index = std::ptrdiff_t;

inline double elem(const double* m, bool trans, std::size_t rows, std::size_t cols, std::size_t r,
                   std::size_t c) {
  // `rows`/`cols` describe op(m); the stored matrix is transposed when `trans`.
  return trans ? m[c * rows + r] : m[r * cols + c];
}

// Output columns [lo, hi) whose input column ow*stride + k - pad lies in [0, in).
inline void valid_range(std::size_t out, std::size_t in, std::size_t k, std::size_t stride,
                        std::size_t pad, std::size_t& lo, std::size_t& hi) {
  lo = 0;
  while (lo < out && lo * stride + k < pad) ++lo;
  hi = lo;
  while (hi < out && hi * stride + k < in + pad) ++hi;
}

}  // namespace

namespace serial {

void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, const double* a,
          const double* b, double* c, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = accumulate ? c[i * n + j] : 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += elem(a, trans_a, m, k, i, p) * elem(b, trans_b, k, n, p, j);
      c[i * n + j] = acc;
    }
  }
}

void conv2d_forward(const ConvGeometry& g, const double* input, const double* weight, const double* bias,
                    double* output) {
  const auto oh_n = g.out_h(), ow_n = g.out_w();
  for (std::size_t n = 0; n < g.batch; ++n) {
    for (std::size_t o = 0; o < g.out_channels; ++o) {
      for (std::size_t oh = 0; oh < oh_n; ++oh) {
        for (std::size_t ow = 0; ow < ow_n; ++ow) {
          double acc = bias ? bias[o] : 0.0;
          for (std::size_t c = 0; c < g.in_channels; ++c) {
            for (std::size_t kh = 0; kh < g.kernel_h; ++kh) {
              for (std::size_t kw = 0; kw < g.kernel_w; ++kw) {
                const Index ih = static_cast<Index>(oh * g.stride + kh) - static_cast<Index>(g.pad);
                const Index iw = static_cast<Index>(ow * g.stride + kw) - static_cast<Index>(g.pad);
                if (ih < 0 || iw < 0 || ih >= static_cast<Index>(g.in_h) || iw >= static_cast<Index>(g.in_w))
                  continue;
                acc += input[((n * g.in_channels + c) * g.in_h + ih) * g.in_w + iw] *
                       weight[((o * g.in_channels + c) * g.kernel_h + kh) * g.kernel_w + kw];
              }
            }
          }
          output[((n * g.out_channels + o) * oh_n + oh) * ow_n + ow] = acc;
        }
      }
    }
  }
}

void conv2d_backward_input(const ConvGeometry& g, const double* grad_out, const double* weight,
                           double* grad_in) {
  const auto oh_n = g.out_h(), ow_n = g.out_w();
  for (std::size_t n = 0; n < g.batch; ++n) {
    for (std::size_t c = 0; c < g.in_channels; ++c) {
      for (std::size_t ih = 0; ih < g.in_h; ++ih) {
        for (std::size_t iw = 0; iw < g.in_w; ++iw) {
          double& acc = grad_in[((n * g.in_channels + c) * g.in_h + ih) * g.in_w + iw];
          for (std::size_t o = 0; o < g.out_channels; ++o) {
            for (std::size_t kh = 0; kh < g.kernel_h; ++kh) {
              for (std::size_t kw = 0; kw < g.kernel_w; ++kw) {
                const Index th = static_cast<Index>(ih + g.pad) - static_cast<Index>(kh);
                const Index tw = static_cast<Index>(iw + g.pad) - static_cast<Index>(kw);
                if (th < 0 || tw < 0 || th % static_cast<Index>(g.stride) || tw % static_cast<Index>(g.stride))
                  continue;
                const auto oh = static_cast<std::size_t>(th) / g.stride;
                const auto ow = static_cast<std::size_t>(tw) / g.stride;
                if (oh >= oh_n || ow >= ow_n) continue;
                acc += grad_out[((n * g.out_channels + o) * oh_n + oh) * ow_n + ow] *
                       weight[((o * g.in_channels + c) * g.kernel_h + kh) * g.kernel_w + kw];
              }
            }
          }
        }
      }
    }
  }
}

void conv2d_backward_weight(const ConvGeometry& g, const double* grad_out, const double* input,
                            double* grad_weight, double* grad_bias) {
  const auto oh_n = g.out_h(), ow_n = g.out_w();
  for (std::size_t o = 0; o < g.out_channels; ++o) {
    for (std::size_t c = 0; c < g.in_channels; ++c) {
      for (std::size_t kh = 0; kh < g.kernel_h; ++kh) {
        for (std::size_t kw = 0; kw < g.kernel_w; ++kw) {
          double& acc = grad_weight[((o * g.in_channels + c) * g.kernel_h + kh) * g.kernel_w + kw];
          for (std::size_t n = 0; n < g.batch; ++n) {
            for (std::size_t oh = 0; oh < oh_n; ++oh) {
              for (std::size_t ow = 0; ow < ow_n; ++ow) {
                const Index ih = static_cast<Index>(oh * g.stride + kh) - static_cast<Index>(g.pad);
                const Index iw = static_cast<Index>(ow * g.stride + kw) - static_cast<Index>(g.pad);
                if (ih < 0 || iw < 0 || ih >= static_cast<Index>(g.in_h) || iw >= static_cast<Index>(g.in_w))
                  continue;
                acc += grad_out[((n * g.out_channels + o) * oh_n + oh) * ow_n + ow] *
                       input[((n * g.in_channels + c) * g.in_h + ih) * g.in_w + iw];
              }
            }
          }
        }
      }
    }
  }
  if (grad_bias) {
    for (std::size_t o = 0; o < g.out_channels; ++o) {
      double acc = grad_bias[o];
      for (std::size_t n = 0; n < g.batch; ++n)
        for (std::size_t p = 0; p < oh_n * ow_n; ++p) acc += grad_out[(n * g.out_channels + o) * oh_n * ow_n + p];
      grad_bias[o] = acc;
    }
  }
}

}  // namespace serial

namespace parallel {

void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, const double* a,
          const double* b, double* c, bool accumulate) {
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < static_cast<Index>(m); ++i) {
    double* row = c + i * n;
    if (!accumulate) std::fill(row, row + n, 0.0);
    for (std::size_t p = 0; p < k; ++p) {
      const double av = elem(a, trans_a, m, k, i, p);
      if (trans_b) {
        for (std::size_t j = 0; j < n; ++j) row[j] += av * b[j * k + p];
      } else {
        const double* brow = b + p * n;
        for (std::size_t j = 0; j < n; ++j) row[j] += av * brow[j];
      }
    }
  }
}

void conv2d_forward(const ConvGeometry& g, const double* input, const double* weight, const double* bias,
                    double* output) {
  const auto oh_n = g.out_h(), ow_n = g.out_w();
  const auto planes = static_cast<Index>(g.batch * g.out_channels);
#pragma omp parallel for schedule(static)
  for (Index plane = 0; plane < planes; ++plane) {
    const std::size_t n = plane / g.out_channels, o = plane % g.out_channels;
    double* out = output + plane * oh_n * ow_n;
    std::fill(out, out + oh_n * ow_n, bias ? bias[o] : 0.0);
    for (std::size_t c = 0; c < g.in_channels; ++c) {
      const double* in = input + (n * g.in_channels + c) * g.in_h * g.in_w;
      for (std::size_t kh = 0; kh < g.kernel_h; ++kh) {
        for (std::size_t kw = 0; kw < g.kernel_w; ++kw) {
          const double w = weight[((o * g.in_channels + c) * g.kernel_h + kh) * g.kernel_w + kw];
          std::size_t lo, hi;
          valid_range(ow_n, g.in_w, kw, g.stride, g.pad, lo, hi);
          for (std::size_t oh = 0; oh < oh_n; ++oh) {
            const Index ih = static_cast<Index>(oh * g.stride + kh) - static_cast<Index>(g.pad);
            if (ih < 0 || ih >= static_cast<Index>(g.in_h)) continue;
            const double* in_row = in + ih * g.in_w;
            double* out_row = out + oh * ow_n;
            for (std::size_t ow = lo; ow < hi; ++ow) out_row[ow] += in_row[ow * g.stride + kw - g.pad] * w;
          }
        }
      }
    }
  }
}

void conv2d_backward_input(const ConvGeometry& g, const double* grad_out, const double* weight,
                           double* grad_in) {
  const auto oh_n = g.out_h(), ow_n = g.out_w();
  const auto planes = static_cast<Index>(g.batch * g.in_channels);
#pragma omp parallel for schedule(static)
  for (Index plane = 0; plane < planes; ++plane) {
    const std::size_t n = plane / g.in_channels, c = plane % g.in_channels;
    double* gin = grad_in + plane * g.in_h * g.in_w;
    for (std::size_t o = 0; o < g.out_channels; ++o) {
      const double* gout = grad_out + (n * g.out_channels + o) * oh_n * ow_n;
      for (std::size_t kh = 0; kh < g.kernel_h; ++kh) {
        for (std::size_t kw = 0; kw < g.kernel_w; ++kw) {
          const double w = weight[((o * g.in_channels + c) * g.kernel_h + kh) * g.kernel_w + kw];
          std::size_t lo, hi;
          valid_range(ow_n, g.in_w, kw, g.stride, g.pad, lo, hi);
          for (std::size_t oh = 0; oh < oh_n; ++oh) {
            const Index ih = static_cast<Index>(oh * g.stride + kh) - static_cast<Index>(g.pad);
            if (ih < 0 || ih >= static_cast<Index>(g.in_h)) continue;
            double* gin_row = gin + ih * g.in_w;
            const double* gout_row = gout + oh * ow_n;
            for (std::size_t ow = lo; ow < hi; ++ow) gin_row[ow * g.stride + kw - g.pad] += gout_row[ow] * w;
          }
        }
      }
    }
  }
}

void conv2d_backward_weight(const ConvGeometry& g, const double* grad_out, const double* input,
                            double* grad_weight, double* grad_bias) {
  const auto oh_n = g.out_h(), ow_n = g.out_w();
  const auto pairs = static_cast<Index>(g.out_channels * g.in_channels);
#pragma omp parallel for schedule(static)
  for (Index pair = 0; pair < pairs; ++pair) {
    const std::size_t o = pair / g.in_channels, c = pair % g.in_channels;
    for (std::size_t kh = 0; kh < g.kernel_h; ++kh) {
      for (std::size_t kw = 0; kw < g.kernel_w; ++kw) {
        double acc = grad_weight[((o * g.in_channels + c) * g.kernel_h + kh) * g.kernel_w + kw];
        std::size_t lo, hi;
        valid_range(ow_n, g.in_w, kw, g.stride, g.pad, lo, hi);
        for (std::size_t n = 0; n < g.batch; ++n) {
          const double* gout = grad_out + (n * g.out_channels + o) * oh_n * ow_n;
          const double* in = input + (n * g.in_channels + c) * g.in_h * g.in_w;
          for (std::size_t oh = 0; oh < oh_n; ++oh) {
            const Index ih = static_cast<Index>(oh * g.stride + kh) - static_cast<Index>(g.pad);
            if (ih < 0 || ih >= static_cast<Index>(g.in_h)) continue;
            const double* in_row = in + ih * g.in_w;
            const double* gout_row = gout + oh * ow_n;
            for (std::size_t ow = lo; ow < hi; ++ow) acc += gout_row[ow] * in_row[ow * g.stride + kw - g.pad];
          }
        }
        grad_weight[((o * g.in_channels + c) * g.kernel_h + kh) * g.kernel_w + kw] = acc;
      }
    }
  }
  if (grad_bias) {
#pragma omp parallel for schedule(static)
    for (Index o = 0; o < static_cast<Index>(g.out_channels); ++o) {
      double acc = grad_bias[o];
      for (std::size_t n = 0; n < g.batch; ++n) {
        const double* gout = grad_out + (n * g.out_channels + o) * oh_n * ow_n;
        for (std::size_t p = 0; p < oh_n * ow_n; ++p) acc += gout[p];
      }
      grad_bias[o] = acc;
    }
  }
}

}  // namespace parallel

}  // namespace avcl::kernels
