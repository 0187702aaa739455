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
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "avcl/avcore.hpp"
#include "avcl/rng.hpp"
#include "avcl/tensor.hpp"

namespace avcl::augment {

enum class Kind { kFade, kTimeMask, kTimeShift, kResample, kPitchShift, kColoredNoise, kSpatial };

/// Temporal kinds act along the time axis of both streams.
bool is_temporal(Kind kind);
/// Audio-domain kinds act on the waveform only and have a placement.
bool is_audio_domain(Kind kind);
std::string_view kind_name(Kind kind);  // short code: FD TM TS RE PS CN SP
Kind parse_kind(std::string_view text);

enum class Placement { kBeforeTemporal, kAfterTemporal };
enum class Streams { kBoth, kAudioOnly, kVideoOnly };
enum class Stream { kAudio, kVideo };

struct AugmentationSpec {
  Kind kind = Kind::kResample;
  double alpha = 0.0;  // maximum temporal intensity, in [0, 1]
  Placement placement = Placement::kBeforeTemporal;
  bool aligned = false;
  Streams streams = Streams::kBoth;  // temporal kinds only

  int max_semitones = 15;      // pitch shift
  double snr_min_db = 10.0;    // colored noise
  double snr_max_db = 30.0;

  void validate() const;
};

// -- realized randomness -------------------------------------------------------

enum class FadeCurve { kLinear, kLogarithmic, kExponential, kQuarterSine, kHalfSine };
enum class MaskFill { kNoise, kConstant };
enum class NoiseColor { kWhite, kPink, kBrown };

struct FadeParams {
  FadeCurve curve = FadeCurve::kLinear;
  double left = 0.0;   // fraction of the clip faded in, <= alpha / 2
  double right = 0.0;  // fraction of the clip faded out, <= alpha / 2
  bool operator==(const FadeParams&) const = default;
};

struct MaskParams {
  double start = 0.0;
  double length = 0.0;  // <= alpha
  MaskFill fill = MaskFill::kConstant;
  std::uint64_t noise_seed = 0;
  bool operator==(const MaskParams&) const = default;
};

struct ShiftParams {
  double shift = 0.0;  // signed fraction, |shift| <= alpha
  bool operator==(const ShiftParams&) const = default;
};

struct ResampleParams {
  double factor = 1.0;  // realized down-factor in [1 - alpha, 1]
  bool operator==(const ResampleParams&) const = default;
};

struct PitchParams {
  int semitones = 0;
  bool operator==(const PitchParams&) const = default;
};

struct NoiseParams {
  NoiseColor color = NoiseColor::kWhite;
  double snr_db = 0.0;
  std::uint64_t noise_seed = 0;
  bool operator==(const NoiseParams&) const = default;
};

struct SpatialParams {
  std::size_t crop_y = 0, crop_x = 0, crop_h = 0, crop_w = 0;
  std::size_t out_h = 0, out_w = 0;
  bool flip = false;
  double brightness = 1.0;
  double contrast = 1.0;
  bool operator==(const SpatialParams&) const = default;
};

using DrawnParams =
    std::variant<FadeParams, MaskParams, ShiftParams, ResampleParams, PitchParams, NoiseParams, SpatialParams>;

/// One realized augmentation, as written to the parameter log.
struct Applied {
  Kind kind;
  Stream stream;
  bool aligned = false;
  DrawnParams params;
};

std::string describe(const Applied& a);

// -- draws ------------------------------------------------------------------------

FadeParams draw_fade(double alpha, Rng& rng);
MaskParams draw_mask(double alpha, Rng& rng);
ShiftParams draw_shift(double alpha, Rng& rng);
ResampleParams draw_resample(double alpha, Rng& rng);

struct SpatialConfig {
  std::size_t out_h = 16;
  std::size_t out_w = 16;
  double min_scale = 0.7;  // crop side as a fraction of the shorter frame side
  double jitter = 0.2;     // brightness/contrast factors drawn from [1 - jitter, 1 + jitter]
  bool allow_flip = true;
};

SpatialParams draw_spatial(const SpatialConfig& cfg, std::size_t frame_h, std::size_t frame_w, Rng& rng);

// -- temporal ops on a signal whose leading axis is time -------------------------

/// Index of a fractional position: round-half-up of fraction * length.
std::size_t fraction_to_index(double fraction, std::size_t length);

double fade_gain(FadeCurve curve, double u);
Tensor fade(const Tensor& signal, const FadeParams& p);
Tensor time_mask(const Tensor& signal, const MaskParams& p, Stream stream);
Tensor time_shift(const Tensor& signal, const ShiftParams& p);
Tensor resample(const Tensor& signal, const ResampleParams& p);
double effective_rate(double rate, const ResampleParams& p);

// -- audio-domain ops ------------------------------------------------------------------

double pitch_ratio(int semitones);
Waveform pitch_shift(const Waveform& audio, int semitones);

/// Unit-variance noise whose power spectral density falls as f^0, f^-1 or f^-2.
std::vector<double> colored_noise_samples(std::size_t n, NoiseColor color, std::uint64_t seed);
Waveform colored_noise(const Waveform& audio, NoiseColor color, double snr_db, std::uint64_t seed);

// -- spatial ----------------------------------------------------------------------------

/// One crop/resize/flip/jitter applied identically to every frame.
FrameSequence spatial_augment(const FrameSequence& video, const SpatialParams& p);

// -- pipelines ----------------------------------------------------------------------------

struct ClipKey {
  std::uint64_t video_index = 0;
  std::uint64_t clip_index = 0;
  std::uint64_t epoch = 0;
};

struct PipelineResult {
  AVClip clip;
  std::vector<Applied> log;
};

/// Ordered augmentation program: spatial and audio-domain "before" kinds,
/// then the temporal block in declaration order, then audio-domain "after"
/// kinds. Randomness comes from a substream keyed by (seed, ClipKey), so a
/// pipeline is a pure function of its inputs and safe to share.
class Pipeline {
 public:
  Pipeline() = default;
  Pipeline(std::vector<AugmentationSpec> specs, std::uint64_t seed, SpatialConfig spatial = {});

  PipelineResult apply(const AVClip& clip, ClipKey key) const;

  /// Same pipeline without the temporal kinds (linear-probe protocol).
  Pipeline domain_only() const;
  bool has_temporal() const;
  const std::vector<AugmentationSpec>& specs() const { return specs_; }
  const SpatialConfig& spatial_config() const { return spatial_; }
  std::uint64_t seed() const { return seed_; }

 private:
  std::vector<AugmentationSpec> specs_;
  std::uint64_t seed_ = 0;
  SpatialConfig spatial_;
};

/// Validates `specs` (no duplicate temporal kind, alphas in range) and sets
/// the alignment flag of every temporal spec to `aligned || spec.aligned`.
Pipeline build_pipeline(std::vector<AugmentationSpec> specs, bool aligned, std::uint64_t seed,
                        SpatialConfig spatial = {});

/// Parses "PS,SP,RE:0.75,TS:0.5@audio" style lists. Suffix "@audio"/"@video"
/// restricts a temporal kind to one stream; "PS!after" places an
/// audio-domain kind after the temporal block.
std::vector<AugmentationSpec> parse_specs(std::string_view text);
std::string format_specs(const std::vector<AugmentationSpec>& specs);

}  // namespace avcl::augment
