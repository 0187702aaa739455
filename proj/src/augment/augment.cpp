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

#include "avcl/augment.hpp"

#include <algorithm>
#include <cmath>
#include <cctype>
#include <complex>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include "avcl/error.hpp"
#include "avcl/fft.hpp"

namespace avcl::augment {

bool is_temporal(Kind kind) {
  return kind == Kind::kFade || kind == Kind::kTimeMask || kind == Kind::kTimeShift || kind == Kind::kResample;
}

bool is_audio_domain(Kind kind) { return kind == Kind::kPitchShift || kind == Kind::kColoredNoise; }

std::string_view kind_name(Kind kind) {
  switch (kind) {
    case Kind::kFade: return "FD";
    case Kind::kTimeMask: return "TM";
    case Kind::kTimeShift: return "TS";
    case Kind::kResample: return "RE";
    case Kind::kPitchShift: return "PS";
    case Kind::kColoredNoise: return "CN";
    case Kind::kSpatial: return "SP";
  }
  return "?";
}

Kind parse_kind(std::string_view text) {
  static const std::pair<std::string_view, Kind> names[] = {
      {"FD", Kind::kFade},           {"fade", Kind::kFade},
      {"TM", Kind::kTimeMask},       {"time_mask", Kind::kTimeMask},
      {"TS", Kind::kTimeShift},      {"time_shift", Kind::kTimeShift},
      {"RE", Kind::kResample},       {"resample", Kind::kResample},
      {"PS", Kind::kPitchShift},     {"pitch_shift", Kind::kPitchShift},
      {"CN", Kind::kColoredNoise},   {"colored_noise", Kind::kColoredNoise},
      {"SP", Kind::kSpatial},        {"spatial", Kind::kSpatial},
  };
  for (const auto& [name, kind] : names) {
    if (name == text) return kind;
  }
  throw ConfigError("unknown augmentation kind '" + std::string(text) + "'");
}

void AugmentationSpec::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ConfigError(std::string(kind_name(kind)) + ": alpha must lie in [0,1], got " + std::to_string(alpha));
  }
  if (kind == Kind::kPitchShift && max_semitones < 0) throw ConfigError("PS: max_semitones must be non-negative");
  if (kind == Kind::kColoredNoise && !(snr_min_db <= snr_max_db)) throw ConfigError("CN: empty SNR range");
}

namespace {

const char* curve_name(FadeCurve c) {
  switch (c) {
    case FadeCurve::kLinear: return "linear";
    case FadeCurve::kLogarithmic: return "logarithmic";
    case FadeCurve::kExponential: return "exponential";
    case FadeCurve::kQuarterSine: return "quarter_sine";
    case FadeCurve::kHalfSine: return "half_sine";
  }
  return "?";
}

const char* color_name(NoiseColor c) {
  switch (c) {
    case NoiseColor::kWhite: return "white";
    case NoiseColor::kPink: return "pink";
    case NoiseColor::kBrown: return "brown";
  }
  return "?";
}

}  // namespace

std::string describe(const Applied& a) {
  std::ostringstream os;
  os.precision(17);
  os << kind_name(a.kind) << '\t' << (a.stream == Stream::kAudio ? "audio" : "video") << '\t'
     << (a.aligned ? "aligned" : "independent") << '\t';
  std::visit(
      [&os](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, FadeParams>) {
          os << "curve=" << curve_name(p.curve) << " left=" << p.left << " right=" << p.right;
        } else if constexpr (std::is_same_v<P, MaskParams>) {
          os << "start=" << p.start << " length=" << p.length
             << " fill=" << (p.fill == MaskFill::kNoise ? "noise" : "constant") << " noise_seed=" << p.noise_seed;
        } else if constexpr (std::is_same_v<P, ShiftParams>) {
          os << "shift=" << p.shift;
        } else if constexpr (std::is_same_v<P, ResampleParams>) {
          os << "factor=" << p.factor;
        } else if constexpr (std::is_same_v<P, PitchParams>) {
          os << "semitones=" << p.semitones;
        } else if constexpr (std::is_same_v<P, NoiseParams>) {
          os << "color=" << color_name(p.color) << " snr_db=" << p.snr_db << " noise_seed=" << p.noise_seed;
        } else {
          os << "crop=" << p.crop_y << ',' << p.crop_x << ',' << p.crop_h << ',' << p.crop_w << " out=" << p.out_h
             << 'x' << p.out_w << " flip=" << p.flip << " brightness=" << p.brightness << " contrast=" << p.contrast;
        }
      },
      a.params);
  return os.str();
}

// -- draws ------------------------------------------------------------------------

FadeParams draw_fade(double alpha, Rng& rng) {
  FadeParams p;
  p.curve = static_cast<FadeCurve>(uniform_int(rng, 0, 4));
  p.left = uniform(rng, 0.0, 1.0) * alpha * 0.5;
  p.right = uniform(rng, 0.0, 1.0) * alpha * 0.5;
  return p;
}

MaskParams draw_mask(double alpha, Rng& rng) {
  MaskParams p;
  p.length = uniform(rng, 0.0, 1.0) * alpha;
  p.start = uniform(rng, 0.0, 1.0) * (1.0 - p.length);
  p.fill = uniform_int(rng, 0, 1) == 0 ? MaskFill::kNoise : MaskFill::kConstant;
  p.noise_seed = rng();
  return p;
}

ShiftParams draw_shift(double alpha, Rng& rng) { return ShiftParams{uniform(rng, -1.0, 1.0) * alpha}; }

ResampleParams draw_resample(double alpha, Rng& rng) {
  return ResampleParams{1.0 - uniform(rng, 0.0, 1.0) * alpha};
}

SpatialParams draw_spatial(const SpatialConfig& cfg, std::size_t frame_h, std::size_t frame_w, Rng& rng) {
  SpatialParams p;
  const std::size_t side = std::min(frame_h, frame_w);
  const double scale = uniform(rng, cfg.min_scale, 1.0);
  const auto crop = std::clamp<std::size_t>(static_cast<std::size_t>(std::floor(scale * side + 0.5)), 1, side);
  p.crop_h = p.crop_w = crop;
  p.crop_y = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(frame_h - crop)));
  p.crop_x = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(frame_w - crop)));
  p.out_h = cfg.out_h;
  p.out_w = cfg.out_w;
  p.flip = cfg.allow_flip && uniform_int(rng, 0, 1) == 1;
  p.brightness = uniform(rng, 1.0 - cfg.jitter, 1.0 + cfg.jitter);
  p.contrast = uniform(rng, 1.0 - cfg.jitter, 1.0 + cfg.jitter);
  return p;
}

// -- temporal ops -------------------------------------------------------------------

namespace {

struct TimeView {
  std::size_t length;  // T
  std::size_t slice;   // elements per time step
};

TimeView time_view(const Tensor& signal) {
  if (!signal.defined() || signal.rank() == 0) throw ShapeError("temporal op: signal needs a leading time axis");
  return {signal.dim(0), signal.numel() / signal.dim(0)};
}

}  // namespace

std::size_t fraction_to_index(double fraction, std::size_t length) {
  const double x = std::floor(fraction * static_cast<double>(length) + 0.5);
  return static_cast<std::size_t>(std::clamp(x, 0.0, static_cast<double>(length)));
}

double fade_gain(FadeCurve curve, double u) {
  u = std::clamp(u, 0.0, 1.0);
  switch (curve) {
    case FadeCurve::kLinear: return u;
    case FadeCurve::kLogarithmic: return std::log1p(9.0 * u) / std::log(10.0);
    case FadeCurve::kExponential: return std::expm1(4.0 * u) / std::expm1(4.0);
    case FadeCurve::kQuarterSine: return std::sin(u * std::numbers::pi / 2.0);
    case FadeCurve::kHalfSine: return (1.0 - std::cos(u * std::numbers::pi)) / 2.0;
  }
  return u;
}

Tensor fade(const Tensor& signal, const FadeParams& p) {
  const auto [t_n, slice] = time_view(signal);
  const std::size_t left = fraction_to_index(p.left, t_n);
  const std::size_t right = fraction_to_index(p.right, t_n);
  std::vector<double> out(signal.data().begin(), signal.data().end());
  for (std::size_t t = 0; t < t_n; ++t) {
    double env = 1.0;
    if (t < left) env = std::min(env, fade_gain(p.curve, static_cast<double>(t) / left));
    if (t + right >= t_n && right > 0) env = std::min(env, fade_gain(p.curve, static_cast<double>(t_n - 1 - t) / right));
    if (env == 1.0) continue;
    for (std::size_t i = 0; i < slice; ++i) out[t * slice + i] *= env;
  }
  return Tensor(signal.shape(), std::move(out));
}

Tensor time_mask(const Tensor& signal, const MaskParams& p, Stream stream) {
  const auto [t_n, slice] = time_view(signal);
  const std::size_t begin = fraction_to_index(p.start, t_n);
  const std::size_t end = std::max(begin, fraction_to_index(p.start + p.length, t_n));
  std::vector<double> out(signal.data().begin(), signal.data().end());
  const double lo = stream == Stream::kAudio ? -1.0 : 0.0;
  const double fill = stream == Stream::kAudio ? 0.0 : 0.5;
  Rng rng(p.noise_seed);
  for (std::size_t t = begin; t < end; ++t) {
    for (std::size_t i = 0; i < slice; ++i) {
      out[t * slice + i] = p.fill == MaskFill::kNoise ? std::clamp(standard_normal(rng), lo, 1.0) : fill;
    }
  }
  return Tensor(signal.shape(), std::move(out));
}

Tensor time_shift(const Tensor& signal, const ShiftParams& p) {
  const auto [t_n, slice] = time_view(signal);
  const double raw = std::floor(p.shift * static_cast<double>(t_n) + 0.5);
  const auto n = static_cast<std::int64_t>(t_n);
  const std::int64_t s = ((static_cast<std::int64_t>(raw) % n) + n) % n;
  const auto in = signal.data();
  std::vector<double> out(in.size());
  for (std::size_t t = 0; t < t_n; ++t) {
    const std::size_t dst = (t + static_cast<std::size_t>(s)) % t_n;
    std::copy_n(in.begin() + t * slice, slice, out.begin() + dst * slice);
  }
  return Tensor(signal.shape(), std::move(out));
}

Tensor resample(const Tensor& signal, const ResampleParams& p) {
  const auto [t_n, slice] = time_view(signal);
  if (!(p.factor > 0.0 && p.factor <= 1.0)) {
    throw ShapeError("resample: factor " + std::to_string(p.factor) + " leaves no samples");
  }
  const auto in = signal.data();
  std::vector<double> out(in.size());
  for (std::size_t t = 0; t < t_n; ++t) {
    // Decimated sample held at output position t, mapped back to its source index.
    const auto kept = static_cast<std::size_t>(std::floor(static_cast<double>(t) * p.factor));
    const auto src = std::min(t_n - 1, static_cast<std::size_t>(std::floor(static_cast<double>(kept) / p.factor)));
    std::copy_n(in.begin() + src * slice, slice, out.begin() + t * slice);
  }
  return Tensor(signal.shape(), std::move(out));
}

double effective_rate(double rate, const ResampleParams& p) { return rate * p.factor; }

// -- audio-domain ops -----------------------------------------------------------------------

double pitch_ratio(int semitones) { return std::pow(2.0, semitones / 12.0); }

Waveform pitch_shift(const Waveform& audio, int semitones) {
  const double r = pitch_ratio(semitones);
  const auto in = audio.samples.data();
  const std::size_t n = in.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    const double pos = static_cast<double>(t) * r;
    const auto i = static_cast<std::size_t>(std::floor(pos));
    if (i >= n) break;
    const double frac = pos - static_cast<double>(i);
    const double next = i + 1 < n ? in[i + 1] : 0.0;
    out[t] = frac == 0.0 ? in[i] : in[i] * (1.0 - frac) + next * frac;
  }
  return Waveform{Tensor(audio.samples.shape(), std::move(out)), audio.sample_rate};
}

std::vector<double> colored_noise_samples(std::size_t n, NoiseColor color, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> white(n);
  for (auto& v : white) v = standard_normal(rng);
  if (color == NoiseColor::kWhite || n < 4) return white;
  auto spec = fft::rfft(white);
  const double exponent = color == NoiseColor::kPink ? 0.5 : 1.0;  // amplitude ~ f^-exponent
  spec[0] = 0.0;
  for (std::size_t k = 1; k < spec.size(); ++k) spec[k] *= std::pow(static_cast<double>(k), -exponent);
  auto shaped = fft::irfft(spec, n);
  double power = 0.0;
  for (double v : shaped) power += v * v;
  power /= static_cast<double>(n);
  const double norm = power > 0.0 ? 1.0 / std::sqrt(power) : 0.0;
  for (auto& v : shaped) v *= norm;
  return shaped;
}

Waveform colored_noise(const Waveform& audio, NoiseColor color, double snr_db, std::uint64_t seed) {
  if (std::isinf(snr_db) && snr_db > 0) return Waveform{audio.samples.clone(), audio.sample_rate};
  if (std::isnan(snr_db)) throw NumericError("colored_noise: SNR is NaN");
  const auto in = audio.samples.data();
  double power = 0.0;
  for (double v : in) power += v * v;
  power /= static_cast<double>(std::max<std::size_t>(in.size(), 1));
  if (power == 0.0) throw NumericError("colored_noise: cannot reach a finite SNR on a zero-power signal");
  const double gain = std::sqrt(power / std::pow(10.0, snr_db / 10.0));
  const auto noise = colored_noise_samples(in.size(), color, seed);
  std::vector<double> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] + gain * noise[i];
  return Waveform{Tensor(audio.samples.shape(), std::move(out)), audio.sample_rate};
}

// -- spatial ------------------------------------------------------------------------------------

FrameSequence spatial_augment(const FrameSequence& video, const SpatialParams& p) {
  const std::size_t t_n = video.num_frames(), h = video.height(), w = video.width();
  if (p.crop_h == 0 || p.crop_w == 0 || p.crop_y + p.crop_h > h || p.crop_x + p.crop_w > w) {
    throw ShapeError("spatial_augment: crop " + std::to_string(p.crop_h) + "x" + std::to_string(p.crop_w) + "+" +
                     std::to_string(p.crop_y) + "+" + std::to_string(p.crop_x) + " exceeds frame " +
                     std::to_string(h) + "x" + std::to_string(w));
  }
  if (p.out_h == 0 || p.out_w == 0) throw ShapeError("spatial_augment: empty output size");
  const auto in = video.frames.data();
  std::vector<double> out(t_n * p.out_h * p.out_w * 3);

  // Bilinear source coordinates are shared by all frames.
  struct Tap {
    std::size_t i0, i1;
    double w1;
  };
  auto taps = [](std::size_t out_n, std::size_t crop_n, std::size_t offset) {
    std::vector<Tap> v(out_n);
    const double ratio = static_cast<double>(crop_n) / static_cast<double>(out_n);
    for (std::size_t o = 0; o < out_n; ++o) {
      const double src = std::clamp((o + 0.5) * ratio - 0.5, 0.0, static_cast<double>(crop_n - 1));
      const auto i0 = static_cast<std::size_t>(std::floor(src));
      const std::size_t i1 = std::min(i0 + 1, crop_n - 1);
      v[o] = {offset + i0, offset + i1, src - static_cast<double>(i0)};
    }
    return v;
  };
  const auto ys = taps(p.out_h, p.crop_h, p.crop_y);
  const auto xs = taps(p.out_w, p.crop_w, p.crop_x);
  const double bias = 0.5 * (1.0 - p.contrast);

  for (std::size_t t = 0; t < t_n; ++t) {
    const double* frame = in.data() + t * h * w * 3;
    for (std::size_t oy = 0; oy < p.out_h; ++oy) {
      for (std::size_t ox = 0; ox < p.out_w; ++ox) {
        const auto& ty = ys[oy];
        const auto& tx = xs[p.flip ? p.out_w - 1 - ox : ox];
        for (std::size_t c = 0; c < 3; ++c) {
          auto px = [&](std::size_t y, std::size_t x) { return frame[(y * w + x) * 3 + c]; };
          double v = px(ty.i0, tx.i0);
          if (tx.w1 != 0.0 || ty.w1 != 0.0) {
            const double top = px(ty.i0, tx.i0) * (1.0 - tx.w1) + px(ty.i0, tx.i1) * tx.w1;
            const double bot = px(ty.i1, tx.i0) * (1.0 - tx.w1) + px(ty.i1, tx.i1) * tx.w1;
            v = top * (1.0 - ty.w1) + bot * ty.w1;
          }
          v = (v * p.brightness) * p.contrast + bias;
          out[((t * p.out_h + oy) * p.out_w + ox) * 3 + c] = std::clamp(v, 0.0, 1.0);
        }
      }
    }
  }
  return FrameSequence{Tensor({t_n, p.out_h, p.out_w, 3}, std::move(out)), video.fps};
}

// -- pipelines ------------------------------------------------------------------------------------

Pipeline::Pipeline(std::vector<AugmentationSpec> specs, std::uint64_t seed, SpatialConfig spatial)
    : specs_(std::move(specs)), seed_(seed), spatial_(spatial) {}

bool Pipeline::has_temporal() const {
  return std::any_of(specs_.begin(), specs_.end(), [](const auto& s) { return is_temporal(s.kind); });
}

Pipeline Pipeline::domain_only() const {
  std::vector<AugmentationSpec> kept;
  for (const auto& s : specs_) {
    if (!is_temporal(s.kind)) kept.push_back(s);
  }
  return Pipeline(std::move(kept), seed_, spatial_);
}

namespace {

Tensor apply_temporal(Kind kind, const Tensor& signal, const DrawnParams& params, Stream stream) {
  switch (kind) {
    case Kind::kFade: return fade(signal, std::get<FadeParams>(params));
    case Kind::kTimeMask: return time_mask(signal, std::get<MaskParams>(params), stream);
    case Kind::kTimeShift: return time_shift(signal, std::get<ShiftParams>(params));
    case Kind::kResample: return resample(signal, std::get<ResampleParams>(params));
    default: throw ConfigError("not a temporal augmentation");
  }
}

DrawnParams draw_temporal(Kind kind, double alpha, Rng& rng) {
  switch (kind) {
    case Kind::kFade: return draw_fade(alpha, rng);
    case Kind::kTimeMask: return draw_mask(alpha, rng);
    case Kind::kTimeShift: return draw_shift(alpha, rng);
    case Kind::kResample: return draw_resample(alpha, rng);
    default: throw ConfigError("not a temporal augmentation");
  }
}

}  // namespace

PipelineResult Pipeline::apply(const AVClip& clip, ClipKey key) const {
  Rng rng = substream({seed_, key.video_index, key.clip_index, key.epoch});
  PipelineResult result{clip, {}};
  AVClip& c = result.clip;

  auto run_audio_domain = [&](Placement where) {
    for (const auto& s : specs_) {
      if (!is_audio_domain(s.kind) || s.placement != where) continue;
      if (s.kind == Kind::kPitchShift) {
        PitchParams p{static_cast<int>(uniform_int(rng, -s.max_semitones, s.max_semitones))};
        c.audio = pitch_shift(c.audio, p.semitones);
        result.log.push_back({s.kind, Stream::kAudio, false, p});
      } else {
        NoiseParams p;
        p.color = static_cast<NoiseColor>(uniform_int(rng, 0, 2));
        p.snr_db = uniform(rng, s.snr_min_db, s.snr_max_db);
        p.noise_seed = rng();
        c.audio = colored_noise(c.audio, p.color, p.snr_db, p.noise_seed);
        result.log.push_back({s.kind, Stream::kAudio, false, p});
      }
    }
  };

  for (const auto& s : specs_) {
    if (s.kind != Kind::kSpatial) continue;
    const auto p = draw_spatial(spatial_, c.video.height(), c.video.width(), rng);
    c.video = spatial_augment(c.video, p);
    result.log.push_back({s.kind, Stream::kVideo, false, p});
  }
  run_audio_domain(Placement::kBeforeTemporal);

  for (const auto& s : specs_) {
    if (!is_temporal(s.kind)) continue;
    const bool to_audio = s.streams != Streams::kVideoOnly;
    const bool to_video = s.streams != Streams::kAudioOnly;
    const bool shared = s.aligned && to_audio && to_video;
    DrawnParams audio_p, video_p;
    if (shared) {
      audio_p = video_p = draw_temporal(s.kind, s.alpha, rng);
    } else {
      if (to_audio) audio_p = draw_temporal(s.kind, s.alpha, rng);
      if (to_video) video_p = draw_temporal(s.kind, s.alpha, rng);
    }
    if (to_audio) {
      c.audio.samples = apply_temporal(s.kind, c.audio.samples, audio_p, Stream::kAudio);
      result.log.push_back({s.kind, Stream::kAudio, shared, audio_p});
    }
    if (to_video) {
      c.video.frames = apply_temporal(s.kind, c.video.frames, video_p, Stream::kVideo);
      result.log.push_back({s.kind, Stream::kVideo, shared, video_p});
    }
  }

  run_audio_domain(Placement::kAfterTemporal);
  return result;
}

Pipeline build_pipeline(std::vector<AugmentationSpec> specs, bool aligned, std::uint64_t seed, SpatialConfig spatial) {
  std::set<Kind> seen;
  for (auto& s : specs) {
    s.validate();
    if (is_temporal(s.kind)) {
      if (!seen.insert(s.kind).second) {
        throw ConfigError("duplicate temporal augmentation " + std::string(kind_name(s.kind)) + " in pipeline");
      }
      s.aligned = s.aligned || aligned;
    }
  }
  return Pipeline(std::move(specs), seed, spatial);
}

std::vector<AugmentationSpec> parse_specs(std::string_view text) {
  std::vector<AugmentationSpec> specs;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto comma = text.find(',', pos);
    if (comma == std::string_view::npos) comma = text.size();
    std::string item(text.substr(pos, comma - pos));
    pos = comma + 1;
    item.erase(std::remove_if(item.begin(), item.end(), [](unsigned char ch) { return std::isspace(ch); }),
               item.end());
    if (item.empty()) {
      if (comma == text.size()) break;
      continue;
    }
    AugmentationSpec s;
    if (auto bang = item.find('!'); bang != std::string::npos) {
      const auto where = item.substr(bang + 1);
      if (where == "after") {
        s.placement = Placement::kAfterTemporal;
      } else if (where != "before") {
        throw ConfigError("unknown placement '" + where + "'");
      }
      item.resize(bang);
    }
    if (auto at = item.find('@'); at != std::string::npos) {
      const auto which = item.substr(at + 1);
      if (which == "audio") {
        s.streams = Streams::kAudioOnly;
      } else if (which == "video") {
        s.streams = Streams::kVideoOnly;
      } else if (which == "aligned") {
        s.aligned = true;
      } else if (which != "both") {
        throw ConfigError("unknown stream selector '" + which + "'");
      }
      item.resize(at);
    }
    if (auto colon = item.find(':'); colon != std::string::npos) {
      try {
        s.alpha = std::stod(item.substr(colon + 1));
      } catch (const std::exception&) {
        throw ConfigError("bad alpha in '" + item + "'");
      }
      item.resize(colon);
    }
    s.kind = parse_kind(item);
    s.validate();
    specs.push_back(s);
    if (comma == text.size()) break;
  }
  return specs;
}

std::string format_specs(const std::vector<AugmentationSpec>& specs) {
  std::ostringstream os;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& s = specs[i];
    if (i) os << ',';
    os << kind_name(s.kind);
    if (is_temporal(s.kind)) os << ':' << s.alpha;
    if (s.streams == Streams::kAudioOnly) os << "@audio";
    if (s.streams == Streams::kVideoOnly) os << "@video";
    if (is_temporal(s.kind) && s.aligned && s.streams == Streams::kBoth) os << "@aligned";
    if (is_audio_domain(s.kind) && s.placement == Placement::kAfterTemporal) os << "!after";
  }
  return os.str();
}

}  // namespace avcl::augment
