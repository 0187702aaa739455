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

#include "avcl/error.hpp"
#include "avcl/sampling.hpp"

namespace avcl {
namespace {

SourceVideo blank_video(double seconds, std::size_t h = 20, std::size_t w = 20, int fps = 8, int sr = 1000) {
  SourceVideo v;
  v.id = "blank";
  const auto frames = static_cast<std::size_t>(std::lround(seconds * fps));
  std::vector<double> px(frames * h * w * 3);
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = static_cast<double>(i / (h * w * 3)) / frames;
  v.video = FrameSequence{Tensor({frames, h, w, 3}, std::move(px)), fps};
  const auto samples = static_cast<std::size_t>(std::lround(seconds * sr));
  std::vector<double> a(samples);
  for (std::size_t i = 0; i < samples; ++i) a[i] = static_cast<double>(i);
  v.audio = Waveform{Tensor({samples}, std::move(a)), sr};
  return v;
}

TEST(Triangular, SupportAndMean) {
  Rng rng(1);
  double sum = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double t = sample_triangular(6.0, rng);
    ASSERT_GE(t, 0.0);
    ASSERT_LE(t, 6.0);
    sum += t;
  }
  EXPECT_NEAR(sum / n, 2.0, 0.05);  // mean of p(t) ∝ (T - t) is T/3
  EXPECT_EQ(sample_triangular(0.0, rng), 0.0);
}

TEST(PairSampler, SecondStartIsFirstPlusQuantizedDelay) {
  const auto v = blank_video(10.0);
  ClipPairSampler sampler;
  Rng rng(2);
  const std::size_t last = sampler.geometry().max_start_frame(v);
  EXPECT_EQ(last, 69u);
  for (int i = 0; i < 5000; ++i) {
    const auto d = sampler.draw(v, rng);
    ASSERT_LE(d.interval, last / 8.0);
    ASSERT_EQ(d.second_frame - d.first_frame, static_cast<std::size_t>(std::floor(d.interval * 8)));
    ASSERT_LE(d.second_frame, last);
  }
}

TEST(PairSampler, ClipsCarrySynchronizedStreams) {
  const auto v = blank_video(4.0);
  ClipPairSampler sampler;
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    Rng copy = rng;
    const auto d = sampler.draw(v, copy);
    const auto [a, b] = sampler.sample(v, rng);
    EXPECT_DOUBLE_EQ(a.start_time, d.first_frame / 8.0);
    EXPECT_DOUBLE_EQ(b.start_time, d.second_frame / 8.0);
    EXPECT_DOUBLE_EQ(b.audio.samples.at(0), std::floor(d.second_frame * 1000.0 / 8 + 0.5));
    EXPECT_NO_THROW(validate_clip(a));
    EXPECT_NO_THROW(validate_clip(b));
  }
}

TEST(PairSampler, ExactlyOneClipLongMeansZeroDelay) {
  const auto v = blank_video(1.375);
  ClipPairSampler sampler;
  Rng rng(4);
  for (int i = 0; i < 20; ++i) {
    const auto d = sampler.draw(v, rng);
    EXPECT_EQ(d.first_frame, 0u);
    EXPECT_EQ(d.second_frame, 0u);
  }
  EXPECT_THROW(sampler.draw(blank_video(1.0), rng), DataError);
}

TEST(EvalSampler, StartsSpanTheValidRange) {
  const auto v = blank_video(10.0);
  const auto starts = eval_start_frames(v, {}, 10);
  ASSERT_EQ(starts.size(), 10u);
  EXPECT_EQ(starts.front(), 0u);
  EXPECT_EQ(starts.back(), 69u);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(starts[i], static_cast<std::size_t>(std::floor(i * 69.0 / 9 + 0.5)));
  const auto short_starts = eval_start_frames(blank_video(1.375), {}, 10);
  EXPECT_TRUE(std::all_of(short_starts.begin(), short_starts.end(), [](auto s) { return s == 0; }));
}

TEST(EvalSampler, CropsTileTheLongerAxis) {
  EvalSamplerConfig cfg;
  const auto square = eval_crops(20, 20, cfg);
  ASSERT_EQ(square.size(), 3u);
  for (const auto& c : square) {
    EXPECT_EQ(c.crop_h, 17u);
    EXPECT_EQ(c.crop_y, 1u);
  }
  EXPECT_EQ(square[0].crop_x, 0u);
  EXPECT_EQ(square[1].crop_x, 2u);
  EXPECT_EQ(square[2].crop_x, 3u);

  const auto tall = eval_crops(40, 20, cfg);
  EXPECT_EQ(tall[0].crop_y, 0u);
  EXPECT_EQ(tall[2].crop_y, 23u);
  EXPECT_EQ(tall[1].crop_x, 1u);
}

TEST(EvalSampler, ThirtyDeterministicViews) {
  const auto v = blank_video(10.0);
  const auto a = sample_eval_clips(v, {});
  const auto b = sample_eval_clips(v, {});
  ASSERT_EQ(a.size(), 30u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].clip_index, i / 3);
    EXPECT_EQ(a[i].crop_index, i % 3);
    EXPECT_EQ(a[i].clip.video.frames.shape(), (Shape{10, 16, 16, 3}));
    EXPECT_TRUE(std::equal(a[i].clip.video.frames.data().begin(), a[i].clip.video.frames.data().end(),
                           b[i].clip.video.frames.data().begin()));
    EXPECT_EQ(a[i].crop, b[i].crop);
  }
  EXPECT_THROW(eval_start_frames(v, {}, 0), ConfigError);
}

}  // namespace
}  // namespace avcl
