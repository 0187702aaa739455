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
#include <vector>

#include "avcl/avcore.hpp"
#include "avcl/tensor.hpp"

namespace avcl {

/// Hop sizes of the spectrogram-resolution sweep.
inline constexpr std::size_t kSweepHops[] = {256, 128, 64, 32};

struct SpectrogramConfig {
  std::size_t n_fft = 512;
  std::size_t hop = 128;
  std::size_t n_mels = 64;
  double f_min = 0.0;
  double f_max = 0.0;  // 0 selects the Nyquist frequency
  double log_floor = 1e-10;

  /// Throws ConfigError on an unusable configuration for `sample_rate`.
  void validate(int sample_rate) const;
  double resolved_f_max(int sample_rate) const { return f_max > 0.0 ? f_max : sample_rate / 2.0; }
  std::size_t num_frames(std::size_t signal_length) const;
};

struct Spectrogram {
  Tensor values;  // [n_mels, frames], natural-log power
  SpectrogramConfig config;
  int sample_rate = 0;

  std::size_t num_mels() const { return values.dim(0); }
  std::size_t num_frames() const { return values.dim(1); }
};

double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Centre frequencies (Hz) of the n_mels triangular filters.
std::vector<double> mel_center_frequencies(const SpectrogramConfig& cfg, int sample_rate);

/// Row-major [n_mels, n_fft/2 + 1] triangular filterbank on the HTK mel scale.
std::vector<double> mel_filterbank(const SpectrogramConfig& cfg, int sample_rate);

std::vector<double> hann_window(std::size_t n);

Spectrogram mel_spectrogram(const Waveform& audio, const SpectrogramConfig& cfg);

}  // namespace avcl
