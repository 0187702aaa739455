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

#include "avcl/sampling.hpp"

#include <algorithm>
#include <cmath>

#include "avcl/error.hpp"

namespace avcl {

double sample_triangular(double t_max, Rng& rng) {
  const double u = uniform(rng, 0.0, 1.0);
  return t_max * (1.0 - std::sqrt(1.0 - u));
}

namespace {

void require_one_clip(const SourceVideo& video, const ClipGeometry& geom) {
  if (video.video.num_frames() < geom.frames_per_clip(video.video.fps) ||
      video.audio.length() < geom.samples_per_clip(video.audio.sample_rate)) {
    throw DataError("video '" + video.id + "' is shorter than one " + std::to_string(geom.clip_seconds) + " s clip");
  }
}

}  // namespace

PairDraw ClipPairSampler::draw(const SourceVideo& video, Rng& rng) const {
  require_one_clip(video, geom_);
  const std::size_t last_start = geom_.max_start_frame(video);
  const int fps = video.video.fps;
  const double t_max = static_cast<double>(last_start) / fps;

  PairDraw d;
  d.interval = sample_triangular(t_max, rng);
  const auto gap = std::min(last_start, static_cast<std::size_t>(std::floor(d.interval * fps)));
  d.first_frame = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(last_start - gap)));
  d.second_frame = d.first_frame + gap;
  return d;
}

std::pair<AVClip, AVClip> ClipPairSampler::sample(const SourceVideo& video, Rng& rng) const {
  const auto d = draw(video, rng);
  return {extract_clip(video, d.first_frame, geom_), extract_clip(video, d.second_frame, geom_)};
}

std::vector<std::size_t> eval_start_frames(const SourceVideo& video, const ClipGeometry& geom,
                                           std::size_t num_clips) {
  require_one_clip(video, geom);
  if (num_clips == 0) throw ConfigError("eval sampler: num_clips must be positive");
  const std::size_t last_start = geom.max_start_frame(video);
  std::vector<std::size_t> starts(num_clips, 0);
  if (num_clips == 1) return starts;
  for (std::size_t i = 0; i < num_clips; ++i) {
    const double exact = static_cast<double>(i) * static_cast<double>(last_start) / static_cast<double>(num_clips - 1);
    starts[i] = std::min(last_start, static_cast<std::size_t>(std::floor(exact + 0.5)));
  }
  return starts;
}

std::vector<augment::SpatialParams> eval_crops(std::size_t frame_h, std::size_t frame_w,
                                               const EvalSamplerConfig& cfg) {
  const std::size_t side = std::min(frame_h, frame_w);
  const auto crop = std::clamp<std::size_t>(static_cast<std::size_t>(std::floor(cfg.crop_fraction * side + 0.5)), 1,
                                            side);
  const bool along_width = frame_w >= frame_h;
  const std::size_t span = (along_width ? frame_w : frame_h) - crop;
  const std::size_t across = ((along_width ? frame_h : frame_w) - crop) / 2;

  std::vector<augment::SpatialParams> crops;
  for (std::size_t i = 0; i < cfg.num_crops; ++i) {
    const std::size_t offset =
        cfg.num_crops == 1 ? span / 2
                           : static_cast<std::size_t>(std::floor(static_cast<double>(i * span) /
                                                                     static_cast<double>(cfg.num_crops - 1) +
                                                                 0.5));
    augment::SpatialParams p;
    p.crop_h = p.crop_w = crop;
    p.crop_y = along_width ? across : offset;
    p.crop_x = along_width ? offset : across;
    p.out_h = cfg.out_h;
    p.out_w = cfg.out_w;
    crops.push_back(p);
  }
  return crops;
}

std::vector<EvalView> sample_eval_clips(const SourceVideo& video, const ClipGeometry& geom,
                                        const EvalSamplerConfig& cfg) {
  const auto starts = eval_start_frames(video, geom, cfg.num_clips);
  const auto crops = eval_crops(video.video.height(), video.video.width(), cfg);
  std::vector<EvalView> views;
  views.reserve(starts.size() * crops.size());
  for (std::size_t i = 0; i < starts.size(); ++i) {
    const AVClip base = extract_clip(video, starts[i], geom);
    for (std::size_t j = 0; j < crops.size(); ++j) {
      EvalView v{base, i, j, crops[j]};
      v.clip.video = augment::spatial_augment(base.video, crops[j]);
      views.push_back(std::move(v));
    }
  }
  return views;
}

}  // namespace avcl
