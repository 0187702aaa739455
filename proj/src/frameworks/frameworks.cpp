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

#include "avcl/frameworks.hpp"

#include <algorithm>
#include <cmath>

#include "avcl/error.hpp"

namespace avcl {

// -- preprocessing ------------------------------------------------------------------

ClipFeatures preprocess_clip(const AVClip& clip, const SpectrogramConfig& spec) {
  const Spectrogram s = mel_spectrogram(clip.audio, spec);
  const auto v = s.values.data();
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= static_cast<double>(v.size());
  const double inv = var > 1e-16 ? 1.0 / std::sqrt(var) : 0.0;
  std::vector<double> audio(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) audio[i] = (v[i] - mean) * inv;

  const std::size_t t_n = clip.video.num_frames(), h = clip.video.height(), w = clip.video.width();
  const auto f = clip.video.frames.data();
  std::vector<double> video(f.size());
  for (std::size_t t = 0; t < t_n; ++t) {
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        for (std::size_t c = 0; c < 3; ++c) {
          video[((t * 3 + c) * h + y) * w + x] = (f[((t * h + y) * w + x) * 3 + c] - 0.5) / 0.25;
        }
      }
    }
  }
  return ClipFeatures{Tensor({1, s.num_mels(), s.num_frames()}, std::move(audio)),
                      Tensor({t_n, 3, h, w}, std::move(video))};
}

EncoderInput stack_features(std::span<const ClipFeatures> clips) {
  if (clips.empty()) throw ShapeError("stack_features: empty batch");
  const Shape& a_shape = clips[0].audio.shape();
  const Shape& v_shape = clips[0].video.shape();
  std::vector<double> audio, video;
  audio.reserve(clips.size() * clips[0].audio.numel());
  video.reserve(clips.size() * clips[0].video.numel());
  for (const auto& c : clips) {
    if (c.audio.shape() != a_shape || c.video.shape() != v_shape) {
      throw ShapeError("stack_features: clip shapes " + shape_str(c.audio.shape()) + "/" + shape_str(c.video.shape()) +
                       " differ from " + shape_str(a_shape) + "/" + shape_str(v_shape));
    }
    audio.insert(audio.end(), c.audio.data().begin(), c.audio.data().end());
    video.insert(video.end(), c.video.data().begin(), c.video.data().end());
  }
  EncoderInput in;
  in.batch = clips.size();
  in.frames = v_shape[0];
  in.audio = Tensor({in.batch, a_shape[0], a_shape[1], a_shape[2]}, std::move(audio));
  in.video = Tensor({in.batch * in.frames, v_shape[1], v_shape[2], v_shape[3]}, std::move(video));
  return in;
}

// -- encoder and heads ----------------------------------------------------------------

Encoder Encoder::create(const EncoderConfig& cfg, Rng& rng) {
  const ops::Conv2dOptions down{2, 1};
  Encoder e;
  e.cfg_ = cfg;
  e.v_conv1_ = nn::Conv2d::create(3, cfg.video_channels1, 3, 3, down, false, rng);
  e.v_bn1_ = nn::BatchNorm::create(cfg.video_channels1);
  e.v_conv2_ = nn::Conv2d::create(cfg.video_channels1, cfg.video_channels2, 3, 3, down, false, rng);
  e.v_bn2_ = nn::BatchNorm::create(cfg.video_channels2);
  e.v_temporal_ =
      nn::Conv2d::create(cfg.video_channels2, cfg.video_channels2, cfg.temporal_kernel, 1, {1, 0}, true, rng);
  e.a_conv1_ = nn::Conv2d::create(1, cfg.audio_channels1, 3, 3, down, false, rng);
  e.a_bn1_ = nn::BatchNorm::create(cfg.audio_channels1);
  e.a_conv2_ = nn::Conv2d::create(cfg.audio_channels1, cfg.audio_channels2, 3, 3, down, false, rng);
  e.a_bn2_ = nn::BatchNorm::create(cfg.audio_channels2);
  e.fuse_ = nn::Linear::create(cfg.video_channels2 + cfg.audio_channels2, cfg.embed_dim, true, rng);
  return e;
}

Tensor Encoder::video_features(const EncoderInput& in, ops::Mode mode) {
  if (in.video.rank() != 4 || in.video.dim(1) != 3 || in.video.dim(0) != in.batch * in.frames) {
    throw ShapeError("encoder: video input " + shape_str(in.video.shape()) + " does not hold " +
                     std::to_string(in.batch) + " clips of " + std::to_string(in.frames) + " RGB frames");
  }
  if (in.frames < cfg_.temporal_kernel) {
    throw ShapeError("encoder: " + std::to_string(in.frames) + " frames are fewer than the temporal kernel");
  }
  Tensor x = ops::relu(v_bn1_(v_conv1_(in.video), mode));
  x = ops::relu(v_bn2_(v_conv2_(x), mode));
  const std::size_t c = x.dim(1);
  x = ops::mean(ops::reshape(x, {x.dim(0), c, x.dim(2) * x.dim(3)}), 2);  // [B*T, c]
  x = ops::permute(ops::reshape(x, {in.batch, in.frames, c}), {0, 2, 1});
  x = ops::relu(v_temporal_(ops::reshape(x, {in.batch, c, in.frames, 1})));  // [B, c, T', 1]
  return ops::mean(ops::reshape(x, {in.batch, c, x.dim(2)}), 2);
}

Tensor Encoder::audio_features(const EncoderInput& in, ops::Mode mode) {
  if (in.audio.rank() != 4 || in.audio.dim(1) != 1 || in.audio.dim(0) != in.batch) {
    throw ShapeError("encoder: audio input " + shape_str(in.audio.shape()) + " is not [" + std::to_string(in.batch) +
                     ", 1, mels, frames]");
  }
  Tensor x = ops::relu(a_bn1_(a_conv1_(in.audio), mode));
  x = ops::relu(a_bn2_(a_conv2_(x), mode));  // [B, c, mel', time']
  return ops::max(ops::mean(x, 2), 2);
}

Tensor Encoder::forward(const EncoderInput& in, ops::Mode mode) {
  const Tensor parts[] = {video_features(in, mode), audio_features(in, mode)};
  return fuse_(ops::concat(parts, 1));
}

void Encoder::collect(const std::string& prefix, nn::Parameters& out) const {
  v_conv1_.collect(prefix + ".video.conv1", out);
  v_bn1_.collect(prefix + ".video.bn1", out);
  v_conv2_.collect(prefix + ".video.conv2", out);
  v_bn2_.collect(prefix + ".video.bn2", out);
  v_temporal_.collect(prefix + ".video.temporal", out);
  a_conv1_.collect(prefix + ".audio.conv1", out);
  a_bn1_.collect(prefix + ".audio.bn1", out);
  a_conv2_.collect(prefix + ".audio.conv2", out);
  a_bn2_.collect(prefix + ".audio.bn2", out);
  fuse_.collect(prefix + ".fuse", out);
}

void Encoder::collect_buffers(const std::string& prefix, nn::Buffers& out) const {
  v_bn1_.collect_buffers(prefix + ".video.bn1", out);
  v_bn2_.collect_buffers(prefix + ".video.bn2", out);
  a_bn1_.collect_buffers(prefix + ".audio.bn1", out);
  a_bn2_.collect_buffers(prefix + ".audio.bn2", out);
}

Mlp Mlp::create(const std::vector<std::size_t>& widths, Rng& rng) {
  if (widths.size() < 2) throw ConfigError("mlp needs at least an input and an output width");
  Mlp m;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    const bool last = i + 2 == widths.size();
    m.layers_.push_back(nn::Linear::create(widths[i], widths[i + 1], last, rng));
    if (!last) m.norms_.push_back(nn::BatchNorm::create(widths[i + 1]));
  }
  return m;
}

Tensor Mlp::forward(const Tensor& x, ops::Mode mode) {
  Tensor h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    h = layers_[i](h);
    if (i < norms_.size()) h = ops::relu(norms_[i](h, mode));
  }
  return h;
}

void Mlp::collect(const std::string& prefix, nn::Parameters& out) const {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    layers_[i].collect(prefix + ".fc" + std::to_string(i), out);
    if (i < norms_.size()) norms_[i].collect(prefix + ".bn" + std::to_string(i), out);
  }
}

void Mlp::collect_buffers(const std::string& prefix, nn::Buffers& out) const {
  for (std::size_t i = 0; i < norms_.size(); ++i) norms_[i].collect_buffers(prefix + ".bn" + std::to_string(i), out);
}

// -- similarity and losses -------------------------------------------------------------

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw ShapeError("cosine_similarity: vectors of different length");
  double uv = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    uv += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  if (uu == 0.0 || vv == 0.0) throw NumericError("cosine_similarity: zero vector");
  return uv / (std::sqrt(uu) * std::sqrt(vv));
}

namespace {

void require_matrix(std::string_view op, const Tensor& t) {
  if (!t.defined() || t.rank() != 2) {
    throw ShapeError(std::string(op) + ": expected a 2-D tensor, got " +
                     (t.defined() ? shape_str(t.shape()) : std::string("undefined")));
  }
}

void require_nonzero_rows(std::string_view op, const Tensor& t) {
  const std::size_t d = t.dim(1);
  const auto v = t.data();
  for (std::size_t r = 0; r < t.dim(0); ++r) {
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) s += v[r * d + j] * v[r * d + j];
    if (s == 0.0) throw NumericError(std::string(op) + ": row " + std::to_string(r) + " is a zero vector");
  }
}

void require_unit_rows(std::string_view op, const Tensor& t) {
  const std::size_t d = t.dim(1);
  const auto v = t.data();
  for (std::size_t r = 0; r < t.dim(0); ++r) {
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) s += v[r * d + j] * v[r * d + j];
    if (std::abs(std::sqrt(s) - 1.0) > 1e-6) {
      throw NumericError(std::string(op) + ": row " + std::to_string(r) + " has norm " + std::to_string(std::sqrt(s)) +
                         ", expected unit norm");
    }
  }
}

void require_tau(std::string_view op, double tau) {
  if (!(tau > 0.0)) throw ConfigError(std::string(op) + ": temperature must be positive, got " + std::to_string(tau));
}

// Large negative logit that excludes an entry from a softmax without
// producing infinities.
constexpr double kMaskedLogit = -1e30;

Tensor diagonal_mask(std::size_t n) {
  Tensor m = Tensor::zeros({n, n});
  auto d = m.mutable_data();
  for (std::size_t i = 0; i < n; ++i) d[i * n + i] = kMaskedLogit;
  return m;
}

}  // namespace

Tensor cosine_similarity(const Tensor& u, const Tensor& v) {
  require_matrix("cosine_similarity", u);
  require_matrix("cosine_similarity", v);
  if (u.shape() != v.shape()) {
    throw ShapeError("cosine_similarity: " + shape_str(u.shape()) + " vs " + shape_str(v.shape()));
  }
  require_nonzero_rows("cosine_similarity", u);
  require_nonzero_rows("cosine_similarity", v);
  return ops::sum(ops::l2_normalize(u, 1) * ops::l2_normalize(v, 1), 1);
}

Tensor infonce_loss(const Tensor& z, double tau) {
  require_matrix("infonce_loss", z);
  require_tau("infonce_loss", tau);
  const std::size_t rows = z.dim(0);
  if (rows < 2 || rows % 2 != 0) {
    throw ShapeError("infonce_loss: need 2N rows with N >= 1, got " + std::to_string(rows));
  }
  require_unit_rows("infonce_loss", z);
  const std::size_t n = rows / 2;
  Tensor logits = ops::scale(ops::matmul(z, ops::transpose(z)), 1.0 / tau) + diagonal_mask(rows);
  Tensor positives = Tensor::zeros({rows, rows});
  auto p = positives.mutable_data();
  for (std::size_t i = 0; i < rows; ++i) p[i * rows + (i + n) % rows] = 1.0;
  return ops::scale(ops::sum(ops::log_softmax(logits, 1) * positives), -1.0 / static_cast<double>(rows));
}

Tensor moco_loss(const Tensor& queries, const Tensor& keys, const Tensor& negatives, double tau,
                 bool in_batch_negatives) {
  require_matrix("moco_loss", queries);
  require_matrix("moco_loss", keys);
  require_tau("moco_loss", tau);
  if (queries.shape() != keys.shape()) {
    throw ShapeError("moco_loss: queries " + shape_str(queries.shape()) + " vs keys " + shape_str(keys.shape()));
  }
  const std::size_t b = queries.dim(0);
  std::vector<Tensor> parts;
  parts.push_back(ops::reshape(ops::sum(queries * keys, 1), {b, 1}));
  if (negatives.defined()) {
    require_matrix("moco_loss", negatives);
    if (negatives.dim(1) != queries.dim(1)) {
      throw ShapeError("moco_loss: negatives " + shape_str(negatives.shape()) + " vs queries " +
                       shape_str(queries.shape()));
    }
    parts.push_back(ops::matmul(queries, ops::transpose(negatives)));
  }
  if (in_batch_negatives && b > 1) {
    parts.push_back(ops::matmul(queries, ops::transpose(keys)) + diagonal_mask(b));
  }
  Tensor logits = ops::scale(ops::concat(parts, 1), 1.0 / tau);
  return ops::neg(ops::mean(ops::slice(ops::log_softmax(logits, 1), 1, 0, 1)));
}

Tensor negative_cosine(const Tensor& p, const Tensor& z) { return ops::neg(ops::mean(cosine_similarity(p, z))); }

Tensor byol_loss(const Tensor& p1, const Tensor& z2, const Tensor& p2, const Tensor& z1) {
  return ops::scale(negative_cosine(p1, ops::stop_gradient(z2)) + negative_cosine(p2, ops::stop_gradient(z1)), 0.5);
}

Tensor simsiam_loss(const Tensor& p1, const Tensor& z2, const Tensor& p2, const Tensor& z1) {
  return ops::scale(negative_cosine(p1, ops::stop_gradient(z2)) + negative_cosine(p2, ops::stop_gradient(z1)), 0.5);
}

void momentum_update(const nn::Parameters& target, const nn::Parameters& online, double m) {
  if (!(m >= 0.0 && m <= 1.0)) throw ConfigError("momentum_update: m must lie in [0, 1], got " + std::to_string(m));
  if (target.size() != online.size()) throw ShapeError("momentum_update: parameter lists differ in length");
  for (std::size_t i = 0; i < target.size(); ++i) {
    const auto& t = target[i];
    const auto& o = online[i];
    if (t.name != o.name || t.value.shape() != o.value.shape()) {
      throw ShapeError("momentum_update: '" + t.name + "' " + shape_str(t.value.shape()) + " vs '" + o.name + "' " +
                       shape_str(o.value.shape()));
    }
    auto td = t.value.impl().data.data();
    const auto od = o.value.data();
    for (std::size_t j = 0; j < od.size(); ++j) td[j] = m * td[j] + (1.0 - m) * od[j];
  }
}

Queue::Queue(std::size_t capacity, std::size_t dim)
    : capacity_(capacity), dim_(dim), storage_(capacity * dim, 0.0) {
  if (capacity == 0 || dim == 0) throw ConfigError("queue: capacity and dimension must be positive");
}

void Queue::enqueue(const Tensor& keys) {
  require_matrix("queue", keys);
  if (keys.dim(1) != dim_) throw ShapeError("queue: keys " + shape_str(keys.shape()) + " do not have dim " +
                                            std::to_string(dim_));
  require_unit_rows("queue", keys);
  const auto k = keys.data();
  for (std::size_t r = 0; r < keys.dim(0); ++r) {
    std::copy_n(k.begin() + r * dim_, dim_, storage_.begin() + cursor_ * dim_);
    cursor_ = (cursor_ + 1) % capacity_;
    size_ = std::min(size_ + 1, capacity_);
  }
}

Tensor Queue::entries() const {
  if (size_ == 0) return {};
  std::vector<double> out(size_ * dim_);
  const std::size_t oldest = full() ? cursor_ : 0;
  for (std::size_t i = 0; i < size_; ++i) {
    std::copy_n(storage_.begin() + ((oldest + i) % capacity_) * dim_, dim_, out.begin() + i * dim_);
  }
  return Tensor({size_, dim_}, std::move(out));
}

void Queue::restore(std::vector<double> storage, std::size_t cursor, std::size_t size) {
  if (storage.size() != capacity_ * dim_ || cursor >= capacity_ || size > capacity_ ||
      (size < capacity_ && cursor != size)) {
    throw DataError("queue: inconsistent saved state");
  }
  storage_ = std::move(storage);
  cursor_ = cursor;
  size_ = size;
}

// -- frameworks --------------------------------------------------------------------------

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::kSimCLR: return "simclr";
    case Variant::kMoCo: return "moco";
    case Variant::kBYOL: return "byol";
    case Variant::kSimSiam: return "simsiam";
  }
  return "?";
}

Variant parse_variant(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  for (Variant v : {Variant::kSimCLR, Variant::kMoCo, Variant::kBYOL, Variant::kSimSiam}) {
    if (variant_name(v) == lower) return v;
  }
  throw ConfigError("unknown framework '" + std::string(text) + "' (simclr, moco, byol, simsiam)");
}

void FrameworkConfig::validate() const {
  if ((variant == Variant::kSimCLR || variant == Variant::kMoCo) && !(tau > 0.0)) {
    throw ConfigError("framework: temperature must be positive");
  }
  if (uses_momentum() && !(momentum > 0.0 && momentum < 1.0)) {
    throw ConfigError("framework: momentum must lie in (0, 1)");
  }
  if (variant == Variant::kMoCo && queue_size == 0) throw ConfigError("framework: queue size must be positive");
  if (encoder.embed_dim == 0 || proj_dim == 0 || pred_hidden == 0) throw ConfigError("framework: zero width");
}

ContrastiveModel ContrastiveModel::create(const FrameworkConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng = substream({seed, 0x1417});
  const std::size_t d = cfg.encoder.embed_dim;
  ContrastiveModel m;
  m.cfg_ = cfg;
  m.encoder_ = Encoder::create(cfg.encoder, rng);
  m.projector_ = Mlp::create({d, d, d, cfg.proj_dim}, rng);
  if (cfg.uses_predictor()) m.predictor_ = Mlp::create({cfg.proj_dim, cfg.pred_hidden, cfg.proj_dim}, rng);
  if (cfg.uses_momentum()) {
    m.m_encoder_ = Encoder::create(cfg.encoder, rng);
    m.m_projector_ = Mlp::create({d, d, d, cfg.proj_dim}, rng);
    nn::Parameters online;
    m.encoder_.collect("encoder", online);
    m.projector_.collect("projector", online);
    const auto target = m.momentum_parameters();
    nn::copy_values(online, target);
    nn::set_requires_grad(target, false);
  }
  if (cfg.variant == Variant::kMoCo) m.queue_ = Queue(cfg.queue_size, cfg.proj_dim);
  return m;
}

Tensor ContrastiveModel::loss(const EncoderInput& view1, const EncoderInput& view2) {
  using ops::Mode;
  switch (cfg_.variant) {
    case Variant::kSimCLR: {
      const Tensor z[] = {ops::l2_normalize(projector_.forward(encoder_.forward(view1, Mode::kTrain), Mode::kTrain), 1),
                          ops::l2_normalize(projector_.forward(encoder_.forward(view2, Mode::kTrain), Mode::kTrain), 1)};
      return infonce_loss(ops::concat(z, 0), cfg_.tau);
    }
    case Variant::kMoCo: {
      Tensor q = projector_.forward(encoder_.forward(view1, Mode::kTrain), Mode::kTrain);
      q = ops::l2_normalize(predictor_.forward(q, Mode::kTrain), 1);
      Tensor k;
      {
        NoGradScope no_grad;
        k = ops::l2_normalize(m_projector_.forward(m_encoder_.forward(view2, Mode::kTrain), Mode::kTrain), 1);
      }
      pending_keys_ = k;
      return moco_loss(q, k, queue_.entries(), cfg_.tau, !queue_.full());
    }
    case Variant::kBYOL: {
      const Tensor p1 =
          predictor_.forward(projector_.forward(encoder_.forward(view1, Mode::kTrain), Mode::kTrain), Mode::kTrain);
      const Tensor p2 =
          predictor_.forward(projector_.forward(encoder_.forward(view2, Mode::kTrain), Mode::kTrain), Mode::kTrain);
      Tensor z1, z2;
      {
        NoGradScope no_grad;
        z1 = m_projector_.forward(m_encoder_.forward(view1, Mode::kTrain), Mode::kTrain);
        z2 = m_projector_.forward(m_encoder_.forward(view2, Mode::kTrain), Mode::kTrain);
      }
      return byol_loss(p1, z2, p2, z1);
    }
    case Variant::kSimSiam: {
      const Tensor z1 = projector_.forward(encoder_.forward(view1, Mode::kTrain), Mode::kTrain);
      const Tensor z2 = projector_.forward(encoder_.forward(view2, Mode::kTrain), Mode::kTrain);
      const Tensor p1 = predictor_.forward(z1, Mode::kTrain);
      const Tensor p2 = predictor_.forward(z2, Mode::kTrain);
      return simsiam_loss(p1, z2, p2, z1);
    }
  }
  throw ConfigError("unknown framework variant");
}

void ContrastiveModel::after_step() {
  if (cfg_.uses_momentum()) {
    nn::Parameters online;
    encoder_.collect("encoder", online);
    projector_.collect("projector", online);
    momentum_update(momentum_parameters(), online, cfg_.momentum);
  }
  if (cfg_.variant == Variant::kMoCo && pending_keys_.defined()) {
    queue_.enqueue(pending_keys_);
    pending_keys_ = Tensor();
  }
}

Tensor ContrastiveModel::embed(const EncoderInput& in, ops::Mode mode) {
  NoGradScope no_grad;
  return encoder_.forward(in, mode);
}

nn::Parameters ContrastiveModel::parameters() const {
  nn::Parameters out;
  encoder_.collect("encoder", out);
  projector_.collect("projector", out);
  if (cfg_.uses_predictor()) predictor_.collect("predictor", out);
  return out;
}

nn::Parameters ContrastiveModel::encoder_parameters() const {
  nn::Parameters out;
  encoder_.collect("encoder", out);
  return out;
}

nn::Parameters ContrastiveModel::momentum_parameters() const {
  nn::Parameters out;
  if (!cfg_.uses_momentum()) return out;
  m_encoder_.collect("encoder", out);
  m_projector_.collect("projector", out);
  return out;
}

nn::Buffers ContrastiveModel::buffers() const {
  nn::Buffers out;
  encoder_.collect_buffers("encoder", out);
  projector_.collect_buffers("projector", out);
  if (cfg_.uses_predictor()) predictor_.collect_buffers("predictor", out);
  if (cfg_.uses_momentum()) {
    m_encoder_.collect_buffers("momentum.encoder", out);
    m_projector_.collect_buffers("momentum.projector", out);
  }
  return out;
}

}  // namespace avcl
