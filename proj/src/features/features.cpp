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

#include "avcl/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "avcl/error.hpp"
#include "avcl/fft.hpp"

namespace avcl {

void SpectrogramConfig::validate(int sample_rate) const {
  if (sample_rate <= 0) throw ConfigError("spectrogram: sample rate must be positive");
  if (n_fft < 2) throw ConfigError("spectrogram: n_fft must be at least 2");
  if (std::find(std::begin(kSweepHops), std::end(kSweepHops), hop) == std::end(kSweepHops)) {
    throw ConfigError("spectrogram: hop " + std::to_string(hop) + " is not one of 32, 64, 128, 256");
  }
  if (hop > n_fft) throw ConfigError("spectrogram: hop exceeds n_fft");
  if (n_mels == 0) throw ConfigError("spectrogram: n_mels must be positive");
  if (!(log_floor > 0.0)) throw ConfigError("spectrogram: log_floor must be positive");
  const double top = resolved_f_max(sample_rate);
  if (top > sample_rate / 2.0) throw ConfigError("spectrogram: f_max above Nyquist");
  if (!(f_min >= 0.0 && f_min < top)) throw ConfigError("spectrogram: need 0 <= f_min < f_max");
}

std::size_t SpectrogramConfig::num_frames(std::size_t signal_length) const {
  if (signal_length < n_fft) return 0;
  return (signal_length - n_fft) / hop + 1;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

namespace {

std::vector<double> mel_edges(const SpectrogramConfig& cfg, int sample_rate) {
  const double lo = hz_to_mel(cfg.f_min);
  const double hi = hz_to_mel(cfg.resolved_f_max(sample_rate));
  std::vector<double> edges(cfg.n_mels + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(cfg.n_mels + 1));
  }
  return edges;
}

}  // namespace

std::vector<double> mel_center_frequencies(const SpectrogramConfig& cfg, int sample_rate) {
  const auto edges = mel_edges(cfg, sample_rate);
  return {edges.begin() + 1, edges.end() - 1};
}

std::vector<double> mel_filterbank(const SpectrogramConfig& cfg, int sample_rate) {
  const auto edges = mel_edges(cfg, sample_rate);
  const std::size_t bins = cfg.n_fft / 2 + 1;
  std::vector<double> fb(cfg.n_mels * bins, 0.0);
  for (std::size_t m = 0; m < cfg.n_mels; ++m) {
    const double left = edges[m], center = edges[m + 1], right = edges[m + 2];
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / static_cast<double>(cfg.n_fft);
      double w = 0.0;
      if (f > left && f <= center) {
        w = (f - left) / (center - left);
      } else if (f > center && f < right) {
        w = (right - f) / (right - center);
      }
      fb[m * bins + k] = w;
    }
  }
  return fb;
}

std::vector<double> hann_window(std::size_t n) {
  // Periodic Hann, the usual choice for spectral analysis.
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
  }
  return w;
}

Spectrogram mel_spectrogram(const Waveform& audio, const SpectrogramConfig& cfg) {
  cfg.validate(audio.sample_rate);
  const std::size_t length = audio.length();
  if (length < cfg.n_fft) {
    throw ShapeError("mel_spectrogram: signal of " + std::to_string(length) + " samples is shorter than one " +
                     std::to_string(cfg.n_fft) + "-sample window");
  }
  const std::size_t frames = cfg.num_frames(length);
  const std::size_t bins = cfg.n_fft / 2 + 1;
  const auto window = hann_window(cfg.n_fft);
  const auto fb = mel_filterbank(cfg, audio.sample_rate);
  const auto x = audio.samples.data();

  std::vector<double> out(cfg.n_mels * frames);
  std::vector<double> segment(cfg.n_fft);
  std::vector<double> power(bins);
  for (std::size_t f = 0; f < frames; ++f) {
    for (std::size_t i = 0; i < cfg.n_fft; ++i) segment[i] = x[f * cfg.hop + i] * window[i];
    const auto spec = fft::rfft(segment);
    for (std::size_t k = 0; k < bins; ++k) power[k] = std::norm(spec[k]);
    for (std::size_t m = 0; m < cfg.n_mels; ++m) {
      double e = 0.0;
      const double* row = fb.data() + m * bins;
      for (std::size_t k = 0; k < bins; ++k) e += row[k] * power[k];
      out[m * frames + f] = std::log(std::max(e, cfg.log_floor));
    }
  }
  return Spectrogram{Tensor({cfg.n_mels, frames}, std::move(out)), cfg, audio.sample_rate};
}

}  // namespace avcl
