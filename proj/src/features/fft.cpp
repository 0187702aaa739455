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

#include "avcl/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>

#include "avcl/error.hpp"

namespace avcl::fft {

namespace {

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

template <class T>
std::unique_ptr<T[], FftwFree> alloc(std::size_t n) {
  auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * std::max<std::size_t>(n, 1)));
  if (!p) throw std::bad_alloc();
  return std::unique_ptr<T[], FftwFree>(p);
}

struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

// Planning is not thread-safe in FFTW; execution with the new-array API is.
std::mutex g_plan_mutex;
std::map<std::size_t, PlanPair>& plan_cache() {
  static std::map<std::size_t, PlanPair> cache;
  return cache;
}

PlanPair plans_for(std::size_t n) {
  std::lock_guard lock(g_plan_mutex);
  auto& cache = plan_cache();
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  auto real = alloc<double>(n);
  auto cplx = alloc<fftw_complex>(n / 2 + 1);
  PlanPair p;
  p.forward = fftw_plan_dft_r2c_1d(static_cast<int>(n), real.get(), cplx.get(), FFTW_ESTIMATE);
  p.inverse = fftw_plan_dft_c2r_1d(static_cast<int>(n), cplx.get(), real.get(), FFTW_ESTIMATE);
  if (!p.forward || !p.inverse) throw NumericError("FFTW could not plan a transform of length " + std::to_string(n));
  cache.emplace(n, p);
  return p;
}

}  // namespace

std::vector<std::complex<double>> rfft(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n == 0) throw ShapeError("rfft: empty input");
  const auto plans = plans_for(n);
  auto real = alloc<double>(n);
  auto cplx = alloc<fftw_complex>(n / 2 + 1);
  std::copy(x.begin(), x.end(), real.get());
  fftw_execute_dft_r2c(plans.forward, real.get(), cplx.get());
  std::vector<std::complex<double>> out(n / 2 + 1);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = {cplx[k][0], cplx[k][1]};
  return out;
}

std::vector<double> irfft(std::span<const std::complex<double>> spectrum, std::size_t n) {
  if (n == 0 || spectrum.size() != n / 2 + 1) throw ShapeError("irfft: spectrum size does not match length");
  const auto plans = plans_for(n);
  auto real = alloc<double>(n);
  auto cplx = alloc<fftw_complex>(n / 2 + 1);
  for (std::size_t k = 0; k < spectrum.size(); ++k) {
    cplx[k][0] = spectrum[k].real();
    cplx[k][1] = spectrum[k].imag();
  }
  fftw_execute_dft_c2r(plans.inverse, cplx.get(), real.get());
  std::vector<double> out(real.get(), real.get() + n);
  const double inv = 1.0 / static_cast<double>(n);
  for (auto& v : out) v *= inv;
  return out;
}

}  // namespace avcl::fft
