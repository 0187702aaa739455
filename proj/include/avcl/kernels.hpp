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

// Hot loops of the tensor engine. Each kernel exists twice: a naive serial
// reference (namespace `serial`) and an OpenMP version (namespace
// `parallel`) that the ops call. The parallel kernels partition work over
// output slices and keep the per-element summation order of the reference,
// so both produce bitwise identical results.
namespace avcl::kernels {

struct ConvGeometry {
  std::size_t batch = 0;
  std::size_t in_channels = 0;
  std::size_t in_h = 0;
  std::size_t in_w = 0;
  std::size_t out_channels = 0;
  std::size_t kernel_h = 0;
  std::size_t kernel_w = 0;
  std::size_t stride = 1;
  std::size_t pad = 0;

  std::size_t out_h() const { return (in_h + 2 * pad - kernel_h) / stride + 1; }
  std::size_t out_w() const { return (in_w + 2 * pad - kernel_w) / stride + 1; }
};

namespace serial {

/// C[m,n] (+)= op(A)[m,k] * op(B)[k,n]; op transposes when the flag is set.
void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k,
          const double* a, const double* b, double* c, bool accumulate);

void conv2d_forward(const ConvGeometry& g, const double* input, const double* weight,
                    const double* bias, double* output);
// Backward kernels accumulate into their gradient outputs.
void conv2d_backward_input(const ConvGeometry& g, const double* grad_out, const double* weight,
                           double* grad_in);
void conv2d_backward_weight(const ConvGeometry& g, const double* grad_out, const double* input,
                            double* grad_weight, double* grad_bias);

}  // namespace serial

namespace parallel {

void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k,
          const double* a, const double* b, double* c, bool accumulate);

void conv2d_forward(const ConvGeometry& g, const double* input, const double* weight,
                    const double* bias, double* output);
// Backward kernels accumulate into their gradient outputs.
void conv2d_backward_input(const ConvGeometry& g, const double* grad_out, const double* weight,
                           double* grad_in);
void conv2d_backward_weight(const ConvGeometry& g, const double* grad_out, const double* input,
                            double* grad_weight, double* grad_bias);

}  // namespace parallel

}  // namespace avcl::kernels
