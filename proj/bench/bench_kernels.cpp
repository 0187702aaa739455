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

#include <benchmark/benchmark.h>

#include <vector>

#include "avcl/kernels.hpp"
#include "avcl/rng.hpp"

namespace {

using avcl::kernels::ConvGeometry;

std::vector<double> randn(std::size_t n) {
  avcl::Rng rng(n);
  std::vector<double> v(n);
  for (auto& x : v) x = avcl::standard_normal(rng);
  return v;
}

// Second audio conv stage of the encoder on a batch of 32 clips.
const ConvGeometry kAudioConv{32, 8, 32, 54, 16, 3, 3, 2, 1};

template <bool Parallel>
void BM_ConvForward(benchmark::State& state) {
  const ConvGeometry& g = kAudioConv;
  const auto in = randn(g.batch * g.in_channels * g.in_h * g.in_w);
  const auto w = randn(g.out_channels * g.in_channels * g.kernel_h * g.kernel_w);
  std::vector<double> out(g.batch * g.out_channels * g.out_h() * g.out_w());
  for (auto _ : state) {
    if constexpr (Parallel) {
      avcl::kernels::parallel::conv2d_forward(g, in.data(), w.data(), nullptr, out.data());
    } else {
      avcl::kernels::serial::conv2d_forward(g, in.data(), w.data(), nullptr, out.data());
    }
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_ConvForward<false>)->Name("conv_forward/serial");
BENCHMARK(BM_ConvForward<true>)->Name("conv_forward/parallel");

template <bool Parallel>
void BM_ConvBackwardWeight(benchmark::State& state) {
  const ConvGeometry& g = kAudioConv;
  const auto in = randn(g.batch * g.in_channels * g.in_h * g.in_w);
  const auto gout = randn(g.batch * g.out_channels * g.out_h() * g.out_w());
  std::vector<double> gw(g.out_channels * g.in_channels * g.kernel_h * g.kernel_w);
  for (auto _ : state) {
    if constexpr (Parallel) {
      avcl::kernels::parallel::conv2d_backward_weight(g, gout.data(), in.data(), gw.data(), nullptr);
    } else {
      avcl::kernels::serial::conv2d_backward_weight(g, gout.data(), in.data(), gw.data(), nullptr);
    }
    benchmark::DoNotOptimize(gw.data());
  }
}
BENCHMARK(BM_ConvBackwardWeight<false>)->Name("conv_backward_weight/serial");
BENCHMARK(BM_ConvBackwardWeight<true>)->Name("conv_backward_weight/parallel");

template <bool Parallel>
void BM_Gemm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = randn(n * n), b = randn(n * n);
  std::vector<double> c(n * n);
  for (auto _ : state) {
    if constexpr (Parallel) {
      avcl::kernels::parallel::gemm(false, false, n, n, n, a.data(), b.data(), c.data(), false);
    } else {
      avcl::kernels::serial::gemm(false, false, n, n, n, a.data(), b.data(), c.data(), false);
    }
    benchmark::DoNotOptimize(c.data());
  }
}
BENCHMARK(BM_Gemm<false>)->Name("gemm/serial")->Arg(64)->Arg(256);
BENCHMARK(BM_Gemm<true>)->Name("gemm/parallel")->Arg(64)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
