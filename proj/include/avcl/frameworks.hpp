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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "avcl/avcore.hpp"
#include "avcl/features.hpp"
#include "avcl/nn.hpp"
#include "avcl/tensor.hpp"

namespace avcl {

// -- preprocessing ------------------------------------------------------------------

/// Network inputs of one clip: standardized log-mel [1, mels, frames] and
/// normalized frames [T, 3, H, W].
struct ClipFeatures {
  Tensor audio;
  Tensor video;
};

ClipFeatures preprocess_clip(const AVClip& clip, const SpectrogramConfig& spec);

/// A batch of clips laid out for the encoder.
struct EncoderInput {
  Tensor audio;  // [B, 1, mels, frames]
  Tensor video;  // [B * T, 3, H, W]
  std::size_t batch = 0;
  std::size_t frames = 0;  // T
};

EncoderInput stack_features(std::span<const ClipFeatures> clips);

// -- encoder and heads ----------------------------------------------------------------

struct EncoderConfig {
  std::size_t video_channels1 = 8;
  std::size_t video_channels2 = 16;
  std::size_t temporal_kernel = 3;
  std::size_t audio_channels1 = 8;
  std::size_t audio_channels2 = 16;
  std::size_t embed_dim = 32;  // d
};

/// Video: per-frame conv stages, spatial mean, a temporal conv over frames
/// and a temporal mean. Audio: conv stages over [mel, frames], mean over
/// mel, max over time. The two vectors are concatenated and projected to d.
class Encoder {
 public:
  static Encoder create(const EncoderConfig& cfg, Rng& rng);

  Tensor forward(const EncoderInput& in, ops::Mode mode);
  Tensor video_features(const EncoderInput& in, ops::Mode mode);
  Tensor audio_features(const EncoderInput& in, ops::Mode mode);

  void collect(const std::string& prefix, nn::Parameters& out) const;
  void collect_buffers(const std::string& prefix, nn::Buffers& out) const;
  const EncoderConfig& config() const { return cfg_; }

 private:
  EncoderConfig cfg_;
  nn::Conv2d v_conv1_, v_conv2_, v_temporal_;
  nn::BatchNorm v_bn1_, v_bn2_;
  nn::Conv2d a_conv1_, a_conv2_;
  nn::BatchNorm a_bn1_, a_bn2_;
  nn::Linear fuse_;
};

/// Linear layers with batch norm and ReLU between them; the last layer is
/// plain linear.
class Mlp {
 public:
  static Mlp create(const std::vector<std::size_t>& widths, Rng& rng);

  Tensor forward(const Tensor& x, ops::Mode mode);
  void collect(const std::string& prefix, nn::Parameters& out) const;
  void collect_buffers(const std::string& prefix, nn::Buffers& out) const;
  std::size_t num_layers() const { return layers_.size(); }

 private:
  std::vector<nn::Linear> layers_;
  std::vector<nn::BatchNorm> norms_;
};

// -- similarity and losses -------------------------------------------------------------

double cosine_similarity(std::span<const double> u, std::span<const double> v);

/// Row-wise cosine similarity of [N, d] tensors, differentiable. Throws
/// NumericError on a zero row.
Tensor cosine_similarity(const Tensor& u, const Tensor& v);

/// InfoNCE over 2N unit rows where row i and row i + N form a positive pair.
/// The denominator of row i spans every other row; the result is the mean
/// over the 2N ordered positive pairs.
Tensor infonce_loss(const Tensor& z, double tau);

/// Queries [B, d] against their keys [B, d] (no gradient) and the negatives
/// [K, d] (may be undefined). With `in_batch_negatives` the other keys of
/// the batch are added as negatives. Mean over queries.
Tensor moco_loss(const Tensor& queries, const Tensor& keys, const Tensor& negatives, double tau,
                 bool in_batch_negatives);

/// Mean negative cosine similarity between matching rows.
Tensor negative_cosine(const Tensor& p, const Tensor& z);

/// Symmetrized negative cosine; targets are taken as constants.
Tensor byol_loss(const Tensor& p1, const Tensor& z2, const Tensor& p2, const Tensor& z1);
/// Same objective with stop-gradient applied to both target branches.
Tensor simsiam_loss(const Tensor& p1, const Tensor& z2, const Tensor& p2, const Tensor& z1);

/// θ_m ← m·θ_m + (1 − m)·θ, in place on `target`, never recorded.
void momentum_update(const nn::Parameters& target, const nn::Parameters& online, double m);

/// Fixed-capacity FIFO of unit-norm key embeddings.
class Queue {
 public:
  Queue() = default;
  Queue(std::size_t capacity, std::size_t dim);

  /// Appends the rows of `keys` [B, d], overwriting the oldest entries once full.
  void enqueue(const Tensor& keys);
  /// Current entries, oldest first, as [size, d]; undefined when empty.
  Tensor entries() const;

  std::size_t capacity() const { return capacity_; }
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return size_; }
  bool full() const { return size_ == capacity_; }

  // Raw ring state for checkpoints.
  const std::vector<double>& storage() const { return storage_; }
  std::size_t cursor() const { return cursor_; }
  void restore(std::vector<double> storage, std::size_t cursor, std::size_t size);

 private:
  std::size_t capacity_ = 0, dim_ = 0;
  std::vector<double> storage_;
  std::size_t cursor_ = 0;  // next write slot
  std::size_t size_ = 0;
};

// -- frameworks --------------------------------------------------------------------------

enum class Variant { kSimCLR, kMoCo, kBYOL, kSimSiam };

std::string_view variant_name(Variant v);
Variant parse_variant(std::string_view text);

struct FrameworkConfig {
  Variant variant = Variant::kSimCLR;
  double tau = 0.1;
  double momentum = 0.99;
  std::size_t queue_size = 1024;
  std::size_t proj_dim = 128;
  std::size_t pred_hidden = 64;
  EncoderConfig encoder;

  void validate() const;
  bool uses_momentum() const { return variant == Variant::kMoCo || variant == Variant::kBYOL; }
  bool uses_predictor() const { return variant != Variant::kSimCLR; }
};

/// Online encoder + heads, and for MoCo/BYOL the momentum copy and queue.
class ContrastiveModel {
 public:
  static ContrastiveModel create(const FrameworkConfig& cfg, std::uint64_t seed);

  /// Loss of one batch of positive pairs, recorded on the active tape.
  /// MoCo keys are kept until after_step().
  Tensor loss(const EncoderInput& view1, const EncoderInput& view2);
  /// Momentum update and queue insertion; call after the optimizer step.
  void after_step();

  /// Pre-projection embeddings of the online encoder, no gradient.
  Tensor embed(const EncoderInput& in, ops::Mode mode = ops::Mode::kEval);

  const FrameworkConfig& config() const { return cfg_; }
  nn::Parameters parameters() const;          // online trainable parameters
  nn::Parameters encoder_parameters() const;  // online encoder only
  nn::Parameters momentum_parameters() const;
  nn::Buffers buffers() const;
  Queue& queue() { return queue_; }
  const Queue& queue() const { return queue_; }

 private:
  FrameworkConfig cfg_;
  Encoder encoder_;
  Mlp projector_;
  Mlp predictor_;
  Encoder m_encoder_;
  Mlp m_projector_;
  Queue queue_;
  Tensor pending_keys_;
};

}  // namespace avcl
