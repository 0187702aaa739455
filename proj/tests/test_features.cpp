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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "avcl/error.hpp"
#include "avcl/features.hpp"
#include "avcl/fft.hpp"
#include "avcl/rng.hpp"

namespace avcl {
namespace {

Waveform sine(double hz, std::size_t n, int sr, double amp = 0.5) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = amp * std::sin(2 * std::numbers::pi * hz * i / sr);
  return Waveform{Tensor({n}, std::move(v)), sr};
}

TEST(Fft, MatchesNaiveDft) {
  Rng rng(1);
  for (std::size_t n : {7u, 16u, 45u}) {
    std::vector<double> x(n);
    for (auto& v : x) v = standard_normal(rng);
    const auto spec = fft::rfft(x);
    ASSERT_EQ(spec.size(), n / 2 + 1);
    for (std::size_t k = 0; k < spec.size(); ++k) {
      std::complex<double> acc = 0;
      for (std::size_t i = 0; i < n; ++i) acc += x[i] * std::polar(1.0, -2 * std::numbers::pi * k * i / n);
      EXPECT_NEAR(spec[k].real(), acc.real(), 1e-10);
      EXPECT_NEAR(spec[k].imag(), acc.imag(), 1e-10);
    }
    const auto back = fft::irfft(spec, n);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(back[i], x[i], 1e-12);
  }
}

TEST(Mel, ScaleRoundTripAndKnownPoint) {
  EXPECT_NEAR(hz_to_mel(1000.0), 999.9855, 1e-3);  // 2595 log10(1 + 1000/700)
  for (double hz : {0.0, 60.0, 440.0, 5512.5}) EXPECT_NEAR(mel_to_hz(hz_to_mel(hz)), hz, 1e-9);
}

TEST(Mel, HannWindowIsPeriodic) {
  const auto w = hann_window(8);
  EXPECT_DOUBLE_EQ(w[0], 0.0);
  EXPECT_NEAR(w[4], 1.0, 1e-15);
  EXPECT_NEAR(w[2], 0.5, 1e-15);
  EXPECT_NEAR(w[1], w[7], 1e-15);
}

TEST(Mel, FilterbankTrianglesAreNonNegativeAndCover) {
  SpectrogramConfig cfg;
  const auto fb = mel_filterbank(cfg, 11025);
  const std::size_t bins = cfg.n_fft / 2 + 1;
  ASSERT_EQ(fb.size(), cfg.n_mels * bins);
  for (std::size_t m = 0; m < cfg.n_mels; ++m) {
    double peak = 0;
    for (std::size_t k = 0; k < bins; ++k) {
      ASSERT_GE(fb[m * bins + k], 0.0);
      peak = std::max(peak, fb[m * bins + k]);
    }
    EXPECT_GT(peak, 0.0) << "empty filter " << m;
    EXPECT_LE(peak, 1.0 + 1e-12);
  }
  const auto centers = mel_center_frequencies(cfg, 11025);
  ASSERT_EQ(centers.size(), cfg.n_mels);
  EXPECT_TRUE(std::is_sorted(centers.begin(), centers.end()));
  EXPECT_LT(centers.back(), 11025 / 2.0);
}

TEST(Spectrogram, FrameCountExample) {
  SpectrogramConfig cfg;
  Waveform w{Tensor::zeros({2048}), 11025};
  EXPECT_EQ(mel_spectrogram(w, cfg).num_frames(), 13u);
  EXPECT_EQ(cfg.num_frames(2048), 13u);
}

TEST(Spectrogram, FrameCountFormulaAcrossHops) {
  for (std::size_t hop : kSweepHops) {
    SpectrogramConfig cfg;
    cfg.hop = hop;
    for (std::size_t len : {512u, 513u, 1000u, 4097u}) {
      EXPECT_EQ(cfg.num_frames(len), (len - 512) / hop + 1);
    }
  }
  SpectrogramConfig a, b;
  a.hop = 128;
  b.hop = 64;
  EXPECT_EQ(b.num_frames(512 + 128 * 10), 2 * a.num_frames(512 + 128 * 10) - 1);
}

TEST(Spectrogram, SilenceHitsTheFloor) {
  SpectrogramConfig cfg;
  const auto s = mel_spectrogram(Waveform{Tensor::zeros({1024}), 11025}, cfg);
  for (double v : s.values.data()) EXPECT_EQ(v, std::log(cfg.log_floor));
}

TEST(Spectrogram, SineAtFilterCentreWins) {
  SpectrogramConfig cfg;
  cfg.n_fft = 2048;
  cfg.hop = 256;
  cfg.n_mels = 32;
  const int sr = 11025;
  const auto centers = mel_center_frequencies(cfg, sr);
  for (std::size_t m : {6u, 12u, 20u, 28u}) {
    const auto s = mel_spectrogram(sine(centers[m], 8192, sr), cfg);
    std::vector<double> energy(cfg.n_mels, 0.0);
    for (std::size_t i = 0; i < cfg.n_mels; ++i) {
      for (std::size_t f = 0; f < s.num_frames(); ++f) energy[i] += s.values.at(i * s.num_frames() + f);
    }
    const auto best = std::max_element(energy.begin(), energy.end()) - energy.begin();
    EXPECT_EQ(static_cast<std::size_t>(best), m);
  }
}

TEST(Spectrogram, ScalingNeverDecreasesValues) {
  Rng rng(4);
  std::vector<double> x(3000);
  for (auto& v : x) v = 0.1 * standard_normal(rng);
  std::vector<double> y = x;
  for (auto& v : y) v *= 3.0;
  SpectrogramConfig cfg;
  const auto a = mel_spectrogram(Waveform{Tensor({3000}, x), 11025}, cfg);
  const auto b = mel_spectrogram(Waveform{Tensor({3000}, y), 11025}, cfg);
  for (std::size_t i = 0; i < a.values.numel(); ++i) {
    ASSERT_GE(b.values.at(i), a.values.at(i));
    EXPECT_NEAR(b.values.at(i) - a.values.at(i), std::log(9.0), 1e-6);
  }
}

TEST(Spectrogram, ValidationErrors) {
  SpectrogramConfig cfg;
  EXPECT_THROW(mel_spectrogram(Waveform{Tensor::zeros({100}), 11025}, cfg), ShapeError);
  cfg.hop = 100;
  EXPECT_THROW(cfg.validate(11025), ConfigError);
  cfg = {};
  cfg.f_max = 9000;
  EXPECT_THROW(cfg.validate(11025), ConfigError);
  cfg = {};
  cfg.log_floor = 0;
  EXPECT_THROW(cfg.validate(11025), ConfigError);
  cfg = {};
  cfg.n_fft = 64;
  cfg.hop = 128;
  EXPECT_THROW(cfg.validate(11025), ConfigError);
  EXPECT_NO_THROW(SpectrogramConfig{}.validate(11025));
}

}  // namespace
}  // namespace avcl
