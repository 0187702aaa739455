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

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

// Thin wrapper over FFTW for the real transforms used by the feature and
// noise code. Plans are cached per length; execution is thread-safe.
namespace avcl::fft {

/// Forward real DFT; returns the n/2 + 1 non-negative frequency bins.
std::vector<std::complex<double>> rfft(std::span<const double> x);

/// Inverse of rfft for a signal of length n, including the 1/n factor.
std::vector<double> irfft(std::span<const std::complex<double>> spectrum, std::size_t n);

}  // namespace avcl::fft
