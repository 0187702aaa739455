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

#include "avcl/avcore.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "avcl/error.hpp"
#include "avcl/rng.hpp"
#include "avcl/tensor_io.hpp"

namespace avcl {

void validate_clip(const AVClip& clip) {
  const double period = 1.0 / clip.video.fps;
  const double gap = std::abs(clip.audio.duration_seconds() - clip.video.duration_seconds());
  if (gap > period + 1e-12) {
    std::ostringstream os;
    os << "clip " << clip.source_id << "@" << clip.start_time << ": audio lasts " << clip.audio.duration_seconds()
       << " s but video lasts " << clip.video.duration_seconds() << " s";
    throw DataError(os.str());
  }
}

std::size_t ClipGeometry::frames_per_clip(int fps) const {
  return static_cast<std::size_t>(std::floor(clip_seconds * fps + 0.5));
}

std::size_t ClipGeometry::samples_per_clip(int sample_rate) const {
  return static_cast<std::size_t>(std::floor(clip_seconds * sample_rate + 0.5));
}

std::size_t ClipGeometry::max_start_frame(const SourceVideo& video) const {
  const double room = video.video.duration_seconds() - clip_seconds;
  if (room < -1e-12) {
    throw DataError("video " + video.id + " is shorter than one clip of " + std::to_string(clip_seconds) + " s");
  }
  auto by_time = static_cast<std::size_t>(std::floor(std::max(room, 0.0) * video.video.fps + 1e-9));
  const std::size_t frames = frames_per_clip(video.video.fps);
  if (video.video.num_frames() < frames) {
    throw DataError("video " + video.id + " has fewer frames than one clip");
  }
  by_time = std::min(by_time, video.video.num_frames() - frames);
  // Also respect the audio track.
  const std::size_t samples = samples_per_clip(video.audio.sample_rate);
  while (by_time > 0) {
    const auto start = static_cast<std::size_t>(
        std::floor(static_cast<double>(by_time) * video.audio.sample_rate / video.video.fps + 0.5));
    if (start + samples <= video.audio.length()) break;
    --by_time;
  }
  return by_time;
}

AVClip extract_clip(const SourceVideo& video, std::size_t start_frame, const ClipGeometry& geom) {
  const int fps = video.video.fps, sr = video.audio.sample_rate;
  const std::size_t frames = geom.frames_per_clip(fps);
  const std::size_t samples = geom.samples_per_clip(sr);
  const auto audio_start =
      static_cast<std::size_t>(std::floor(static_cast<double>(start_frame) * sr / fps + 0.5));
  if (start_frame + frames > video.video.num_frames() || audio_start + samples > video.audio.length()) {
    throw DataError("clip at frame " + std::to_string(start_frame) + " exceeds video " + video.id);
  }
  const auto ad = video.audio.samples.data();
  std::vector<double> audio(ad.begin() + audio_start, ad.begin() + audio_start + samples);

  const std::size_t frame_size = video.video.height() * video.video.width() * 3;
  const auto vd = video.video.frames.data();
  std::vector<double> pixels(vd.begin() + start_frame * frame_size, vd.begin() + (start_frame + frames) * frame_size);

  AVClip clip;
  clip.audio = Waveform{Tensor({samples}, std::move(audio)), sr};
  clip.video = FrameSequence{Tensor({frames, video.video.height(), video.video.width(), 3}, std::move(pixels)), fps};
  clip.source_id = video.id;
  clip.start_time = static_cast<double>(start_frame) / fps;
  validate_clip(clip);
  return clip;
}

// -- synthetic data ---------------------------------------------------------------

double class_base_frequency(std::size_t k) { return 220.0 * std::pow(2.0, 0.5 * static_cast<double>(k)); }

namespace {

constexpr std::array<std::array<double, 3>, kMaxSyntheticClasses> kPalette{{
    {0.95, 0.15, 0.15},
    {0.15, 0.85, 0.20},
    {0.20, 0.30, 0.95},
    {0.95, 0.90, 0.15},
    {0.85, 0.20, 0.85},
    {0.15, 0.90, 0.90},
    {0.98, 0.55, 0.10},
    {0.55, 0.25, 0.70},
}};

// Object trajectory of class `k` at time `t` (seconds), in [-1, 1]^2.
std::pair<double, double> trajectory(std::size_t k, double t, double phase) {
  const double w = 2.0 * std::numbers::pi * (0.25 + 0.05 * static_cast<double>(k));
  const double a = w * t + phase;
  switch (k % 4) {
    case 0: return {std::sin(a), 0.0};
    case 1: return {0.0, std::sin(a)};
    case 2: return {std::cos(a), std::sin(a)};
    default: return {std::sin(a), -std::sin(a)};
  }
}

Waveform synth_audio(const SyntheticDatasetConfig& cfg, std::size_t label, Rng& rng) {
  const std::size_t n = static_cast<std::size_t>(std::floor(cfg.video_seconds * cfg.sample_rate + 0.5));
  const double sr = cfg.sample_rate;
  const double f0 = class_base_frequency(label);
  const double nyquist = 0.5 * sr;
  const double phase[3] = {uniform(rng, 0, 2 * std::numbers::pi), uniform(rng, 0, 2 * std::numbers::pi),
                           uniform(rng, 0, 2 * std::numbers::pi)};
  const double hum_f = uniform(rng, 0.35, 0.8) * nyquist;
  const double hum_phase = uniform(rng, 0, 2 * std::numbers::pi);
  const double gain = uniform(rng, 0.7, 1.0);
  const double rhythm = 1.0 + 0.5 * static_cast<double>(label);

  std::vector<double> s(n);
  const double amps[3] = {0.30, 0.15, 0.075};
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sr;
    double v = 0.0;
    for (int h = 0; h < 3; ++h) {
      const double f = f0 * (h + 1);
      if (f < nyquist) v += amps[h] * std::sin(2 * std::numbers::pi * f * t + phase[h]);
    }
    v *= 0.8 + 0.2 * std::sin(2 * std::numbers::pi * rhythm * t);
    v += 0.2 * std::sin(2 * std::numbers::pi * hum_f * t + hum_phase);
    v += 0.05 * standard_normal(rng);
    s[i] = std::clamp(gain * v, -1.0, 1.0);
  }
  return Waveform{Tensor({n}, std::move(s)), cfg.sample_rate};
}

FrameSequence synth_video(const SyntheticDatasetConfig& cfg, std::size_t label, Rng& rng) {
  const std::size_t t_n = static_cast<std::size_t>(std::floor(cfg.video_seconds * cfg.fps + 0.5));
  const std::size_t h = cfg.frame_height, w = cfg.frame_width;
  double base[3];
  for (double& b : base) b = uniform(rng, 0.25, 0.75);
  // Static background texture: two random gratings.
  const double gx[2] = {uniform(rng, 0.1, 0.6), uniform(rng, 0.1, 0.6)};
  const double gy[2] = {uniform(rng, 0.1, 0.6), uniform(rng, 0.1, 0.6)};
  const double gp[2] = {uniform(rng, 0, 6.283), uniform(rng, 0, 6.283)};
  const double phase = uniform(rng, 0, 2 * std::numbers::pi);
  const double flicker_f = uniform(rng, 1.5, 3.5);
  const double flicker_p = uniform(rng, 0, 2 * std::numbers::pi);
  const auto& color = kPalette[label];
  const double half = std::max(1.0, 0.15 * static_cast<double>(std::min(h, w)));

  std::vector<double> px(t_n * h * w * 3);
  for (std::size_t t = 0; t < t_n; ++t) {
    const double sec = static_cast<double>(t) / cfg.fps;
    auto [ox, oy] = trajectory(label, sec, phase);
    const double cx = (0.5 + 0.3 * ox) * (w - 1), cy = (0.5 + 0.3 * oy) * (h - 1);
    const double flicker = 0.08 * std::sin(2 * std::numbers::pi * flicker_f * sec + flicker_p);
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        const double tex = 0.08 * std::sin(gx[0] * x + gy[0] * y + gp[0]) + 0.08 * std::sin(gx[1] * x - gy[1] * y + gp[1]);
        const bool inside = std::abs(static_cast<double>(x) - cx) <= half && std::abs(static_cast<double>(y) - cy) <= half;
        for (std::size_t c = 0; c < 3; ++c) {
          double v = inside ? color[c] : base[c] + tex;
          v += flicker + 0.03 * standard_normal(rng);
          px[((t * h + y) * w + x) * 3 + c] = std::clamp(v, 0.0, 1.0);
        }
      }
    }
  }
  return FrameSequence{Tensor({t_n, h, w, 3}, std::move(px)), cfg.fps};
}

}  // namespace

Dataset generate_synthetic_dataset(const SyntheticDatasetConfig& cfg) {
  if (cfg.num_classes < 2) throw ConfigError("synthetic dataset needs at least 2 classes");
  if (cfg.num_classes > kMaxSyntheticClasses) {
    throw ConfigError("synthetic dataset supports at most " + std::to_string(kMaxSyntheticClasses) +
                      " distinguishable classes, requested " + std::to_string(cfg.num_classes));
  }
  if (cfg.num_videos == 0) throw ConfigError("synthetic dataset needs at least one video");
  if (cfg.video_seconds < 2.0 * kDefaultClipSeconds) {
    throw ConfigError("video_seconds must be at least two clip durations");
  }
  if (cfg.fps <= 0 || cfg.sample_rate <= 0 || cfg.frame_height < 4 || cfg.frame_width < 4) {
    throw ConfigError("invalid synthetic dataset rates or frame size");
  }
  if (class_base_frequency(0) >= 0.5 * cfg.sample_rate) throw ConfigError("sample rate too low for class signatures");

  Dataset ds;
  ds.num_classes = static_cast<int>(cfg.num_classes);
  ds.videos.resize(cfg.num_videos);
  for (std::size_t i = 0; i < cfg.num_videos; ++i) {
    const std::size_t label = i % cfg.num_classes;
    Rng rng = substream({cfg.seed, i, 0x5eed});
    auto& v = ds.videos[i];
    char id[32];
    std::snprintf(id, sizeof id, "vid%05zu", i);
    v.id = id;
    v.label = static_cast<int>(label);
    v.audio = synth_audio(cfg, label, rng);
    v.video = synth_video(cfg, label, rng);
  }
  return ds;
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& ds, std::size_t every) {
  if (every < 2) throw ConfigError("split stride must be at least 2");
  Dataset train, test;
  train.num_classes = test.num_classes = ds.num_classes;
  std::vector<std::size_t> seen(static_cast<std::size_t>(std::max(ds.num_classes, 1)), 0);
  for (const auto& v : ds.videos) {
    auto& count = seen.at(static_cast<std::size_t>(v.label));
    (count++ % every == every - 1 ? test : train).videos.push_back(v);
  }
  return {std::move(train), std::move(test)};
}

// -- persistence -------------------------------------------------------------------

void save_dataset(const Dataset& ds, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "media");
  std::ostringstream manifest;
  manifest << "# avcl-dataset v1\n";
  manifest << "num_classes " << ds.num_classes << "\n";
  for (const auto& v : ds.videos) {
    const std::string audio = "media/" + v.id + ".audio.avt";
    const std::string frames = "media/" + v.id + ".frames.avt";
    save_tensor(dir / audio, v.audio.samples);
    save_tensor(dir / frames, v.video.frames);
    manifest << v.id << '\t' << v.label << '\t' << v.audio.sample_rate << '\t' << v.video.fps << '\t' << audio << '\t'
             << frames << '\n';
  }
  const auto tmp = dir / "manifest.txt.tmp";
  {
    std::ofstream os(tmp, std::ios::trunc);
    if (!os) throw DataError("cannot write " + tmp.string());
    os << manifest.str();
  }
  fs::rename(tmp, dir / "manifest.txt");
}

Dataset load_dataset(const std::filesystem::path& dir) {
  std::ifstream is(dir / "manifest.txt");
  if (!is) throw DataError("no dataset manifest in " + dir.string());
  std::string line;
  if (!std::getline(is, line) || line != "# avcl-dataset v1") throw CorruptHeaderError("bad dataset manifest header");
  Dataset ds;
  if (!std::getline(is, line)) throw TruncatedFileError("dataset manifest ends early");
  {
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key >> ds.num_classes) || key != "num_classes") throw CorruptHeaderError("bad num_classes line");
  }
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    SourceVideo v;
    std::string audio, frames;
    if (!(ls >> v.id >> v.label >> v.audio.sample_rate >> v.video.fps >> audio >> frames)) {
      throw DataError("malformed manifest line: " + line);
    }
    if (v.label < 0 || v.label >= ds.num_classes) throw DataError("label out of range in line: " + line);
    v.audio.samples = load_tensor(dir / audio);
    v.video.frames = load_tensor(dir / frames);
    if (v.audio.samples.rank() != 1 || v.video.frames.rank() != 4 || v.video.frames.dim(3) != 3) {
      throw DataError("media of " + v.id + " has unexpected shape");
    }
    ds.videos.push_back(std::move(v));
  }
  return ds;
}

}  // namespace avcl
