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

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "avcl/error.hpp"
#include "avcl/trainer.hpp"
#include "test_util.hpp"

namespace avcl {
namespace {

namespace fs = std::filesystem;

const Dataset& tiny_train() {
  static const Dataset ds = [] {
    SyntheticDatasetConfig cfg;
    cfg.num_videos = 16;
    cfg.video_seconds = 3.0;
    cfg.seed = 5;
    return split_dataset(generate_synthetic_dataset(cfg)).first;
  }();
  return ds;
}

PretrainConfig tiny_config(Variant v = Variant::kSimCLR) {
  PretrainConfig cfg;
  cfg.framework.variant = v;
  cfg.framework.queue_size = 8;
  cfg.framework.proj_dim = 16;
  cfg.framework.pred_hidden = 8;
  cfg.framework.encoder.embed_dim = 8;
  cfg.batch_size = 4;
  cfg.epochs = 2;
  cfg.warmup_epochs = 1;
  cfg.seed = 3;
  cfg.config_hash = "00000000000000aa";
  return cfg;
}

augment::Pipeline tiny_pipeline(std::uint64_t seed) {
  return augment::build_pipeline(augment::parse_specs("SP,PS,RE:0.75"), false, seed);
}

fs::path temp_path(const std::string& name) {
  return fs::temp_directory_path() / ("avcl_trainer_" + name + "_" + std::to_string(::getpid()));
}

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

TEST(Schedule, EffectiveLrAndEndpoints) {
  EXPECT_DOUBLE_EQ(effective_lr(0.1, 128), 0.05);
  const auto s = ScheduleConfig::for_epochs(effective_lr(0.1, 128), 10, 50, 4);
  EXPECT_EQ(lr_at(0, s), 0.0);
  EXPECT_DOUBLE_EQ(lr_at(40, s), 0.05);
  EXPECT_NEAR(lr_at(200, s), 0.0, 1e-18);
  EXPECT_DOUBLE_EQ(lr_at(20, s), 0.025);
  // Continuity at the junction.
  EXPECT_NEAR(lr_at(39, s), lr_at(40, s), 0.05 / 40 + 1e-15);
  EXPECT_NEAR(lr_at(41, s), lr_at(40, s), 1e-4);
  EXPECT_THROW(lr_at(201, s), ConfigError);
}

TEST(Schedule, MonotoneAfterWarmupAndShortRunClamp) {
  const auto s = ScheduleConfig::for_epochs(1.0, 10, 50, 3);
  for (std::size_t t = 30; t < 150; ++t) EXPECT_GE(lr_at(t, s), lr_at(t + 1, s));
  const auto short_run = ScheduleConfig::for_epochs(1.0, 10, 2, 3);
  EXPECT_EQ(short_run.warmup_steps, 3u);
  EXPECT_THROW(ScheduleConfig::for_epochs(1.0, 1, 0, 3), ConfigError);
}

TEST(Sgd, Examples) {
  nn::Parameters params{{"w", Tensor::from({1.0, -2.0}, true), true}};
  SgdState state;
  OptimizerConfig cfg{0.0, 0.0, 0.0};
  params[0].value.zero_grad();
  sgd_step(params, state, 0.1, cfg);
  EXPECT_EQ(params[0].value.at(0), 1.0);

  nn::Parameters scalar{{"s", Tensor::from({0.5}, true), true}};
  scalar[0].value.mutable_grad()[0] = 1.0;
  SgdState s2;
  sgd_step(scalar, s2, 0.1, cfg);
  EXPECT_DOUBLE_EQ(scalar[0].value.at(0), 0.4);
}

TEST(Sgd, MomentumAndWeightDecayExemption) {
  nn::Parameters params{{"w", Tensor::from({1.0}, true), true}, {"b", Tensor::from({1.0}, true), false}};
  OptimizerConfig cfg{0.0, 0.9, 0.1};
  SgdState state;
  for (auto& p : params) p.value.zero_grad();
  sgd_step(params, state, 1.0, cfg);
  EXPECT_DOUBLE_EQ(params[0].value.at(0), 0.9);  // v = 0.1
  EXPECT_EQ(params[1].value.at(0), 1.0);
  sgd_step(params, state, 1.0, cfg);
  EXPECT_DOUBLE_EQ(params[0].value.at(0), 0.9 - (0.9 * 0.1 + 0.1 * 0.9));
  EXPECT_EQ(params[1].value.at(0), 1.0);
}

TEST(Sgd, NonFiniteGradientNamesTheParameter) {
  nn::Parameters params{{"encoder.fuse.weight", Tensor::from({1.0}, true), true}};
  params[0].value.mutable_grad()[0] = std::nan("");
  SgdState state;
  try {
    sgd_step(params, state, 0.1, {});
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("encoder.fuse.weight"), std::string::npos);
  }
  EXPECT_EQ(params[0].value.at(0), 1.0);
}

TEST(EpochOrder, PermutationAndDeterminism) {
  const auto a = epoch_order(12, 1, 0);
  auto sorted = a;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < 12; ++i) EXPECT_EQ(sorted[i], i);
  EXPECT_EQ(a, epoch_order(12, 1, 0));
  EXPECT_NE(a, epoch_order(12, 1, 1));
}

TEST(Pretrain, DropsPartialBatchAndRecordsTrace) {
  auto cfg = tiny_config();
  EXPECT_EQ(cfg.steps_per_epoch(12), 3u);
  EXPECT_EQ(cfg.steps_per_epoch(14), 3u);
  auto state = init_train_state(cfg, tiny_train().size());
  std::vector<StepRecord> records;
  pretrain(state, tiny_train(), cfg, tiny_pipeline(cfg.seed), SIZE_MAX,
           [&](const StepRecord& r) { records.push_back(r); });
  ASSERT_EQ(records.size(), 6u);
  EXPECT_EQ(state.step, 6u);
  EXPECT_EQ(state.loss_trace.size(), 6u);
  EXPECT_EQ(records[0].lr, 0.0);
  EXPECT_EQ(records[4].epoch, 1u);
  for (const auto& r : records) EXPECT_TRUE(std::isfinite(r.loss));
  // First SimCLR loss sits near log(2N − 1) for an untrained encoder.
  EXPECT_GT(records[0].loss, 0.0);
}

TEST(Pretrain, BitwiseDeterministicForEveryVariant) {
  for (Variant v : {Variant::kSimCLR, Variant::kMoCo, Variant::kBYOL, Variant::kSimSiam}) {
    auto cfg = tiny_config(v);
    auto a = init_train_state(cfg, tiny_train().size());
    auto b = init_train_state(cfg, tiny_train().size());
    pretrain(a, tiny_train(), cfg, tiny_pipeline(cfg.seed));
    pretrain(b, tiny_train(), cfg, tiny_pipeline(cfg.seed));
    EXPECT_EQ(a.loss_trace, b.loss_trace) << variant_name(v);
    EXPECT_EQ(nn::parameter_hash(a.model.parameters()), nn::parameter_hash(b.model.parameters()));
  }
}

TEST(Pretrain, ResumeMatchesUninterruptedRun) {
  for (Variant v : {Variant::kSimCLR, Variant::kMoCo}) {
    auto cfg = tiny_config(v);
    const auto pipe = tiny_pipeline(cfg.seed);
    auto full = init_train_state(cfg, tiny_train().size());
    pretrain(full, tiny_train(), cfg, pipe);

    auto part = init_train_state(cfg, tiny_train().size());
    pretrain(part, tiny_train(), cfg, pipe, 4);
    const auto path = temp_path("resume");
    save_checkpoint(part, path);
    auto resumed = init_train_state(cfg, tiny_train().size());
    load_checkpoint(path, resumed);
    EXPECT_EQ(resumed.step, 4u);
    pretrain(resumed, tiny_train(), cfg, pipe);
    EXPECT_EQ(resumed.loss_trace, full.loss_trace);
    EXPECT_EQ(nn::parameter_hash(resumed.model.parameters()), nn::parameter_hash(full.model.parameters()));

    const auto p1 = temp_path("full1"), p2 = temp_path("full2");
    save_checkpoint(full, p1);
    save_checkpoint(resumed, p2);
    EXPECT_EQ(read_bytes(p1), read_bytes(p2));
    for (const auto& p : {path, p1, p2}) fs::remove(p);
  }
}

TEST(Checkpoint, RejectsDifferentConfigHash) {
  auto cfg = tiny_config();
  auto state = init_train_state(cfg, tiny_train().size());
  const auto path = temp_path("hash");
  save_checkpoint(state, path);
  cfg.config_hash = "00000000000000bb";
  auto other = init_train_state(cfg, tiny_train().size());
  EXPECT_THROW(load_checkpoint(path, other), ConfigError);
  fs::remove(path);
}

TEST(Probe, SeparableFeaturesReachFullAccuracy) {
  Rng rng(1);
  const std::size_t n = 64, d = 6, classes = 4;
  std::vector<double> f(n * d);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = static_cast<int>(i % classes);
    for (std::size_t k = 0; k < d; ++k) f[i * d + k] = 0.1 * standard_normal(rng) + (k == i % classes ? 2.0 : 0.0);
  }
  const Tensor features({n, d}, f);
  ProbeConfig cfg;
  cfg.epochs = 20;
  cfg.batch_size = 16;
  const auto probe = train_probe_on_features(features, labels, classes, cfg);
  const Tensor logits = probe.logits(features);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < classes; ++c) {
      if (logits.at(i * classes + c) > logits.at(i * classes + best)) best = c;
    }
    correct += static_cast<int>(best) == labels[i];
  }
  EXPECT_EQ(correct, n);
  EXPECT_THROW(train_probe_on_features(features, std::vector<int>(n, 7), classes, cfg), DataError);
}

TEST(Probe, EncoderFrozenAndTemporalPipelineRejected) {
  auto cfg = tiny_config();
  auto state = init_train_state(cfg, tiny_train().size());
  const auto before = nn::parameter_hash(state.model.encoder_parameters());
  ProbeConfig pc;
  pc.epochs = 2;
  pc.batch_size = 4;
  const auto pipe = tiny_pipeline(cfg.seed);
  EXPECT_THROW(train_probe(state.model, tiny_train(), pc, pipe, cfg.geometry, cfg.spectrogram), ConfigError);
  const auto probe = train_probe(state.model, tiny_train(), pc, pipe.domain_only(), cfg.geometry, cfg.spectrogram);
  EXPECT_EQ(nn::parameter_hash(state.model.encoder_parameters()), before);
  EXPECT_EQ(probe.weight.shape(), (Shape{8, 4}));

  const auto path = temp_path("probe");
  save_probe(probe, "abc", path);
  std::string hash;
  const auto back = load_probe(path, &hash);
  EXPECT_EQ(hash, "abc");
  EXPECT_TRUE(std::equal(back.weight.data().begin(), back.weight.data().end(), probe.weight.data().begin()));
  EXPECT_EQ(back.mean, probe.mean);
  fs::remove(path);
}

TEST(Eval, AveragesSoftmaxAndCountsViews) {
  const Tensor same({3, 2}, {1, 2, 1, 2, 1, 2});
  const auto avg = average_softmax(same);
  EXPECT_NEAR(avg[1], 1.0 / (1.0 + std::exp(-1.0)), 1e-15);
  const Tensor mixed({2, 2}, {0, 0, 100, 0});
  EXPECT_NEAR(average_softmax(mixed)[0], 0.75, 1e-15);

  auto cfg = tiny_config();
  auto state = init_train_state(cfg, tiny_train().size());
  LinearProbe probe;
  probe.weight = Tensor::zeros({8, 4});
  probe.bias = Tensor::from({0.0, 0.0, 1.0, 0.0});
  const auto result = evaluate(state.model, probe, tiny_train(), cfg.geometry, cfg.spectrogram);
  ASSERT_EQ(result.views_per_video.size(), tiny_train().size());
  for (auto v : result.views_per_video) EXPECT_EQ(v, 30u);
  for (int p : result.predictions) EXPECT_EQ(p, 2);
  EXPECT_DOUBLE_EQ(result.top1, 0.25);
  EXPECT_FALSE(result.top5.has_value());
}

TEST(Metrics, Formats) {
  EXPECT_EQ(format_step_line({3, 1, 0.5, 0.25}), "3\t1\t0.5\t0.25");
  EvalResult r;
  r.top1 = 0.5;
  EXPECT_EQ(format_eval_record(2, r, "ff"), R"({"epoch":2,"top1":0.5,"config_hash":"ff"})");
  r.top5 = 0.75;
  EXPECT_EQ(format_eval_record(2, r, "ff"), R"({"epoch":2,"top1":0.5,"top5":0.75,"config_hash":"ff"})");
}

}  // namespace
}  // namespace avcl
