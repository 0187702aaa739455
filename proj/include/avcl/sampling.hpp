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
#include <utility>
#include <vector>

#include "avcl/augment.hpp"
#include "avcl/avcore.hpp"
#include "avcl/rng.hpp"

namespace avcl {

/// Draws from the triangular density p(t) ∝ (t_max − t) on [0, t_max].
double sample_triangular(double t_max, Rng& rng);

struct PairDraw {
  double interval = 0.0;          // continuous draw, seconds
  std::size_t first_frame = 0;
  std::size_t second_frame = 0;   // first_frame + interval quantized down to the frame grid
};

/// Positive pairs: two clips of one video separated by a random delay
/// whose density decreases with the delay. The delay is truncated so the
/// second clip always fits.
class ClipPairSampler {
 public:
  explicit ClipPairSampler(ClipGeometry geom = {}) : geom_(geom) {}

  PairDraw draw(const SourceVideo& video, Rng& rng) const;
  std::pair<AVClip, AVClip> sample(const SourceVideo& video, Rng& rng) const;
  const ClipGeometry& geometry() const { return geom_; }

 private:
  ClipGeometry geom_;
};

struct EvalSamplerConfig {
  std::size_t num_clips = 10;
  std::size_t num_crops = 3;
  double crop_fraction = 0.85;  // crop side relative to the shorter frame side
  std::size_t out_h = 16;
  std::size_t out_w = 16;
};

struct EvalView {
  AVClip clip;
  std::size_t clip_index = 0;
  std::size_t crop_index = 0;
  augment::SpatialParams crop;
};

/// Start frames of the evaluation clips, evenly spread over the valid range.
std::vector<std::size_t> eval_start_frames(const SourceVideo& video, const ClipGeometry& geom,
                                           std::size_t num_clips);

/// The three deterministic crops at the start, centre and end of the longer
/// spatial axis (width on ties).
std::vector<augment::SpatialParams> eval_crops(std::size_t frame_h, std::size_t frame_w, const EvalSamplerConfig& cfg);

/// num_clips × num_crops views, clip-major. Pure function of its inputs.
std::vector<EvalView> sample_eval_clips(const SourceVideo& video, const ClipGeometry& geom,
                                        const EvalSamplerConfig& cfg = {});

}  // namespace avcl
