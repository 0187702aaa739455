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
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "avcl/augment.hpp"
#include "avcl/avcore.hpp"
#include "avcl/features.hpp"
#include "avcl/frameworks.hpp"
#include "avcl/nn.hpp"
#include "avcl/sampling.hpp"

namespace avcl {

// -- optimization -----------------------------------------------------------------

struct OptimizerConfig {
  double base_lr = 0.1;
  double momentum = 0.9;
  double weight_decay = 1e-4;  // never applied to parameters with decay == false
};

/// base_lr × batch_size / 256.
double effective_lr(double base_lr, std::size_t batch_size);

struct ScheduleConfig {
  double peak_lr = 0.0;
  std::size_t warmup_steps = 0;
  std::size_t total_steps = 0;

  static ScheduleConfig for_epochs(double peak_lr, std::size_t warmup_epochs, std::size_t total_epochs,
                                   std::size_t steps_per_epoch);
};

/// Linear warm-up from 0 to peak_lr, then a half cosine reaching 0 at total_steps.
double lr_at(std::size_t step, const ScheduleConfig& cfg);

struct SgdState {
  std::vector<std::vector<double>> velocity;  // one buffer per parameter, created on first step
};

/// v ← μ·v + g + wd·p, p ← p − lr·v. Throws NumericError naming the first
/// parameter whose gradient is not finite.
void sgd_step(const nn::Parameters& params, SgdState& state, double lr, const OptimizerConfig& cfg);

// -- pretraining ---------------------------------------------------------------------

struct PretrainConfig {
  FrameworkConfig framework;
  OptimizerConfig optimizer;
  std::size_t batch_size = 32;
  std::size_t epochs = 50;
  std::size_t warmup_epochs = 10;
  ClipGeometry geometry;
  SpectrogramConfig spectrogram;
  std::uint64_t seed = 0;
  std::string config_hash;  // embedded in checkpoints and checked on resume

  std::size_t steps_per_epoch(std::size_t train_size) const;
  std::size_t total_steps(std::size_t train_size) const { return epochs * steps_per_epoch(train_size); }
  ScheduleConfig schedule(std::size_t train_size) const;
};

struct TrainState {
  ContrastiveModel model;
  SgdState sgd;
  std::uint64_t seed = 0;
  std::size_t step = 0;
  std::size_t steps_per_epoch = 0;
  std::vector<double> loss_trace;
  std::string config_hash;

  std::size_t epoch() const { return steps_per_epoch ? step / steps_per_epoch : 0; }
};

TrainState init_train_state(const PretrainConfig& cfg, std::size_t train_size);

struct StepRecord {
  std::size_t step = 0;
  std::size_t epoch = 0;
  double lr = 0.0;
  double loss = 0.0;
};
using StepCallback = std::function<void(const StepRecord&)>;

/// Order in which the training videos are visited in `epoch`.
std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::size_t epoch);

/// Augmented, preprocessed positive pairs for the videos `indices` at `epoch`.
/// Work fans out over threads; results are ordered by position in `indices`.
std::pair<EncoderInput, EncoderInput> make_pair_batch(const Dataset& train, const std::vector<std::size_t>& indices,
                                                      std::size_t epoch, std::uint64_t seed,
                                                      const augment::Pipeline& pipeline, const ClipGeometry& geom,
                                                      const SpectrogramConfig& spec);

/// Runs optimizer steps from state.step until `stop_step` (clamped to the
/// configured total). Deterministic in (train, cfg, pipeline, state).
void pretrain(TrainState& state, const Dataset& train, const PretrainConfig& cfg, const augment::Pipeline& pipeline,
              std::size_t stop_step = std::numeric_limits<std::size_t>::max(), const StepCallback& on_step = {});

void save_checkpoint(const TrainState& state, const std::filesystem::path& path);
/// Restores into a state built from the same configuration. A config hash
/// that differs from state.config_hash is a ConfigError.
void load_checkpoint(const std::filesystem::path& path, TrainState& state);

// -- linear probe ------------------------------------------------------------------------

struct ProbeConfig {
  double base_lr = 30.0;
  std::size_t epochs = 30;
  std::size_t batch_size = 64;
  double momentum = 0.9;
  double weight_decay = 0.0;
  bool standardize = true;  // z-score features with training-set statistics
  std::uint64_t seed = 0;
};

struct LinearProbe {
  Tensor weight;  // [d, classes]
  Tensor bias;    // [classes]
  std::vector<double> mean, inv_std;  // feature standardization, empty when off

  std::size_t num_classes() const { return weight.dim(1); }
  Tensor standardize(const Tensor& features) const;
  Tensor logits(const Tensor& features) const;
};

/// Trains a softmax linear classifier on fixed features [n, d].
LinearProbe train_probe_on_features(const Tensor& features, const std::vector<int>& labels, std::size_t num_classes,
                                    const ProbeConfig& cfg);

/// Trains the probe on frozen pre-projection embeddings. `pipeline` must
/// not contain temporal kinds; each epoch every training video contributes
/// one freshly sampled and augmented clip.
LinearProbe train_probe(ContrastiveModel& model, const Dataset& train, const ProbeConfig& cfg,
                        const augment::Pipeline& pipeline, const ClipGeometry& geom, const SpectrogramConfig& spec);

void save_probe(const LinearProbe& probe, const std::string& config_hash, const std::filesystem::path& path);
LinearProbe load_probe(const std::filesystem::path& path, std::string* config_hash = nullptr);

// -- evaluation ------------------------------------------------------------------------------

/// Mean of the row-wise softmax of logits [V, C].
std::vector<double> average_softmax(const Tensor& logits);

struct EvalResult {
  double top1 = 0.0;
  std::optional<double> top5;  // only when there are more than five classes
  std::vector<int> predictions;
  std::vector<std::size_t> views_per_video;
};

/// Averaged class scores of one video over its 10 × 3 evaluation views.
std::vector<double> video_scores(ContrastiveModel& model, const LinearProbe& probe, const SourceVideo& video,
                                 const ClipGeometry& geom, const SpectrogramConfig& spec,
                                 const EvalSamplerConfig& eval_cfg, std::size_t* num_views = nullptr);

EvalResult evaluate(ContrastiveModel& model, const LinearProbe& probe, const Dataset& test, const ClipGeometry& geom,
                    const SpectrogramConfig& spec, const EvalSamplerConfig& eval_cfg = {});

// -- metrics logs -------------------------------------------------------------------------

/// "step\tepoch\tlr\tloss"
std::string format_step_line(const StepRecord& r);
/// {"epoch":..,"top1":..,"top5":..,"config_hash":".."}
std::string format_eval_record(std::size_t epoch, const EvalResult& r, const std::string& config_hash);

}  // namespace avcl
