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
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "avcl/tensor.hpp"

namespace avcl {

inline constexpr double kDefaultClipSeconds = 1.28;

/// Mono audio; samples nominally in [-1, 1].
struct Waveform {
  Tensor samples;  // [L]
  int sample_rate = 0;

  std::size_t length() const { return samples.defined() ? samples.numel() : 0; }
  double duration_seconds() const { return static_cast<double>(length()) / sample_rate; }
};

/// Video frames laid out [time, height, width, 3] with values in [0, 1].
struct FrameSequence {
  Tensor frames;
  int fps = 0;

  std::size_t num_frames() const { return frames.defined() ? frames.dim(0) : 0; }
  std::size_t height() const { return frames.dim(1); }
  std::size_t width() const { return frames.dim(2); }
  double duration_seconds() const { return static_cast<double>(num_frames()) / fps; }
};

/// Paired audio and video sharing one temporal extent.
struct AVClip {
  Waveform audio;
  FrameSequence video;
  std::string source_id;
  double start_time = 0.0;
};

/// Throws DataError when the audio and video durations disagree by more
/// than one frame period.
void validate_clip(const AVClip& clip);

struct SourceVideo {
  std::string id;
  int label = 0;
  Waveform audio;
  FrameSequence video;
};

struct Dataset {
  std::vector<SourceVideo> videos;
  int num_classes = 0;

  std::size_t size() const { return videos.size(); }
  bool empty() const { return videos.empty(); }
};

/// Clip geometry on the video frame grid; audio is cut at the sample that
/// corresponds exactly to the start frame.
struct ClipGeometry {
  double clip_seconds = kDefaultClipSeconds;

  std::size_t frames_per_clip(int fps) const;
  std::size_t samples_per_clip(int sample_rate) const;
  /// Largest start frame whose clip still lies inside a video of the given length.
  std::size_t max_start_frame(const SourceVideo& video) const;
};

/// Cuts the clip starting at `start_frame`. Throws DataError when the clip
/// would leave the source video.
AVClip extract_clip(const SourceVideo& video, std::size_t start_frame, const ClipGeometry& geom);

struct SyntheticDatasetConfig {
  std::size_t num_videos = 256;
  std::size_t num_classes = 4;
  double video_seconds = 10.0;
  int fps = 8;
  int sample_rate = 11025;
  std::size_t frame_height = 20;
  std::size_t frame_width = 20;
  std::uint64_t seed = 0;
};

inline constexpr std::size_t kMaxSyntheticClasses = 8;

/// Base frequency of the audio signature of class `k`.
double class_base_frequency(std::size_t k);

/// Balanced, class-separable audiovisual videos. Pure function of `cfg`.
Dataset generate_synthetic_dataset(const SyntheticDatasetConfig& cfg);

/// Deterministic stratified split: within each class every `every`-th video
/// (by position) goes to the test side.
std::pair<Dataset, Dataset> split_dataset(const Dataset& ds, std::size_t every = 4);

// Dataset directory: manifest.txt plus one audio and one frames AVT1 file
// per video.
void save_dataset(const Dataset& ds, const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace avcl
