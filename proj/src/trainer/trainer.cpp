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

#include "avcl/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <exception>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "avcl/binary_io.hpp"
#include "avcl/checkpoint.hpp"
#include "avcl/error.hpp"
#include "avcl/tensor_io.hpp"

namespace avcl {

// -- optimization -----------------------------------------------------------------

double effective_lr(double base_lr, std::size_t batch_size) {
  return base_lr * static_cast<double>(batch_size) / 256.0;
}

ScheduleConfig ScheduleConfig::for_epochs(double peak_lr, std::size_t warmup_epochs, std::size_t total_epochs,
                                          std::size_t steps_per_epoch) {
  if (total_epochs == 0 || steps_per_epoch == 0) throw ConfigError("schedule: no optimizer steps to schedule");
  // Runs shorter than the warm-up keep at least one epoch of decay.
  const std::size_t warm = std::min(warmup_epochs, total_epochs - 1);
  return ScheduleConfig{peak_lr, warm * steps_per_epoch, total_epochs * steps_per_epoch};
}

double lr_at(std::size_t step, const ScheduleConfig& cfg) {
  if (cfg.total_steps == 0 || cfg.warmup_steps >= cfg.total_steps) {
    throw ConfigError("schedule: warm-up must end before the final step");
  }
  if (step > cfg.total_steps) {
    throw ConfigError("schedule: step " + std::to_string(step) + " beyond final step " +
                      std::to_string(cfg.total_steps));
  }
  if (step < cfg.warmup_steps) {
    return cfg.peak_lr * static_cast<double>(step) / static_cast<double>(cfg.warmup_steps);
  }
  const double progress =
      static_cast<double>(step - cfg.warmup_steps) / static_cast<double>(cfg.total_steps - cfg.warmup_steps);
  return cfg.peak_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

void sgd_step(const nn::Parameters& params, SgdState& state, double lr, const OptimizerConfig& cfg) {
  if (state.velocity.empty()) {
    for (const auto& p : params) state.velocity.emplace_back(p.value.numel(), 0.0);
  }
  if (state.velocity.size() != params.size()) throw ShapeError("sgd_step: optimizer state does not match parameters");
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& p = params[i];
    auto& v = state.velocity[i];
    if (v.size() != p.value.numel()) throw ShapeError("sgd_step: velocity of '" + p.name + "' has the wrong size");
    if (p.value.has_grad()) {
      for (double g : p.value.grad()) {
        if (!std::isfinite(g)) throw NumericError("non-finite gradient in parameter '" + p.name + "'");
      }
    }
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& p = params[i];
    auto& v = state.velocity[i];
    auto w = p.value.impl().data.data();
    const double wd = p.decay ? cfg.weight_decay : 0.0;
    const bool has = p.value.has_grad();
    const auto g = has ? p.value.grad() : std::span<const double>();
    for (std::size_t j = 0; j < v.size(); ++j) {
      v[j] = cfg.momentum * v[j] + (has ? g[j] : 0.0) + wd * w[j];
      w[j] -= lr * v[j];
    }
  }
}

// -- pretraining ---------------------------------------------------------------------

std::size_t PretrainConfig::steps_per_epoch(std::size_t train_size) const {
  if (batch_size < 2) throw ConfigError("pretrain: batch size must be at least 2");
  return train_size / batch_size;  // partial batches are dropped
}

ScheduleConfig PretrainConfig::schedule(std::size_t train_size) const {
  return ScheduleConfig::for_epochs(effective_lr(optimizer.base_lr, batch_size), warmup_epochs, epochs,
                                    steps_per_epoch(train_size));
}

TrainState init_train_state(const PretrainConfig& cfg, std::size_t train_size) {
  TrainState s;
  s.model = ContrastiveModel::create(cfg.framework, cfg.seed);
  s.seed = cfg.seed;
  s.steps_per_epoch = cfg.steps_per_epoch(train_size);
  s.config_hash = cfg.config_hash;
  return s;
}

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::size_t epoch) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng = substream({seed, epoch, 0x5f0f});
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(i - 1)));
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

namespace {

// Runs body(i) for i in [0, n) across threads and rethrows the first error.
template <typename Body>
void parallel_for(std::size_t n, Body body) {
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
#pragma omp critical(avcl_parallel_for_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace

std::pair<EncoderInput, EncoderInput> make_pair_batch(const Dataset& train, const std::vector<std::size_t>& indices,
                                                      std::size_t epoch, std::uint64_t seed,
                                                      const augment::Pipeline& pipeline, const ClipGeometry& geom,
                                                      const SpectrogramConfig& spec) {
  const ClipPairSampler sampler(geom);
  std::vector<ClipFeatures> first(indices.size()), second(indices.size());
  parallel_for(indices.size(), [&](std::size_t b) {
    const std::size_t v = indices[b];
    Rng rng = substream({seed, v, epoch, 0x9a12});
    const auto [c1, c2] = sampler.sample(train.videos[v], rng);
    first[b] = preprocess_clip(pipeline.apply(c1, {v, 0, epoch}).clip, spec);
    second[b] = preprocess_clip(pipeline.apply(c2, {v, 1, epoch}).clip, spec);
  });
  return {stack_features(first), stack_features(second)};
}

void pretrain(TrainState& state, const Dataset& train, const PretrainConfig& cfg, const augment::Pipeline& pipeline,
              std::size_t stop_step, const StepCallback& on_step) {
  if (train.empty()) throw DataError("pretrain: training set is empty");
  const std::size_t per_epoch = cfg.steps_per_epoch(train.size());
  if (per_epoch == 0) {
    throw ConfigError("pretrain: " + std::to_string(train.size()) + " videos do not fill one batch of " +
                      std::to_string(cfg.batch_size));
  }
  if (state.steps_per_epoch != per_epoch) throw ConfigError("pretrain: state was built for a different data size");
  const ScheduleConfig schedule = cfg.schedule(train.size());
  const std::size_t last = std::min(stop_step, schedule.total_steps);

  std::vector<std::size_t> order;
  std::size_t order_epoch = std::numeric_limits<std::size_t>::max();
  const nn::Parameters params = state.model.parameters();
  while (state.step < last) {
    const std::size_t epoch = state.step / per_epoch;
    if (epoch != order_epoch) {
      order = epoch_order(train.size(), state.seed, epoch);
      order_epoch = epoch;
    }
    const std::size_t offset = (state.step % per_epoch) * cfg.batch_size;
    const std::vector<std::size_t> batch(order.begin() + static_cast<std::ptrdiff_t>(offset),
                                         order.begin() + static_cast<std::ptrdiff_t>(offset + cfg.batch_size));
    const auto [view1, view2] =
        make_pair_batch(train, batch, epoch, state.seed, pipeline, cfg.geometry, cfg.spectrogram);

    const double lr = lr_at(state.step, schedule);
    for (const auto& p : params) {
      Tensor t = p.value;
      t.clear_grad();
    }
    double loss_value;
    {
      Tape tape;
      TapeScope scope(tape);
      const Tensor loss = state.model.loss(view1, view2);
      loss_value = loss.item();
      if (!std::isfinite(loss_value)) {
        throw NumericError("pretrain: non-finite loss at step " + std::to_string(state.step));
      }
      tape.backward(loss);
    }
    sgd_step(params, state.sgd, lr, cfg.optimizer);
    state.model.after_step();
    state.loss_trace.push_back(loss_value);
    if (on_step) on_step({state.step, epoch, lr, loss_value});
    ++state.step;
  }
}

// -- checkpoints --------------------------------------------------------------------------

namespace {

std::string pack_tensors(const std::vector<std::pair<std::string, Tensor>>& items) {
  std::ostringstream os;
  binio::put_u64(os, items.size());
  for (const auto& [name, t] : items) {
    binio::put_string(os, name);
    write_tensor(os, t);
  }
  return os.str();
}

std::vector<std::pair<std::string, Tensor>> unpack_tensors(const std::string& payload) {
  std::istringstream is(payload);
  const auto n = binio::get_u64(is, "tensor count");
  std::vector<std::pair<std::string, Tensor>> items;
  for (std::uint64_t i = 0; i < n; ++i) {
    auto name = binio::get_string(is, "tensor name", 1u << 12);
    items.emplace_back(std::move(name), read_tensor(is));
  }
  return items;
}

template <typename Named>
std::vector<std::pair<std::string, Tensor>> as_items(const std::vector<Named>& list) {
  std::vector<std::pair<std::string, Tensor>> items;
  for (const auto& p : list) items.emplace_back(p.name, p.value);
  return items;
}

template <typename Named>
void restore_items(const std::string& what, const std::vector<std::pair<std::string, Tensor>>& saved,
                   const std::vector<Named>& live) {
  if (saved.size() != live.size()) {
    throw DataError("checkpoint " + what + ": " + std::to_string(saved.size()) + " entries, model has " +
                    std::to_string(live.size()));
  }
  for (std::size_t i = 0; i < saved.size(); ++i) {
    if (saved[i].first != live[i].name || saved[i].second.shape() != live[i].value.shape()) {
      throw DataError("checkpoint " + what + ": '" + saved[i].first + "' " + shape_str(saved[i].second.shape()) +
                      " does not match '" + live[i].name + "' " + shape_str(live[i].value.shape()));
    }
    const auto src = saved[i].second.data();
    std::memcpy(live[i].value.impl().data.data(), src.data(), src.size_bytes());
  }
}

}  // namespace

void save_checkpoint(const TrainState& state, const std::filesystem::path& path) {
  std::vector<Section> sections;
  {
    std::ostringstream os;
    binio::put_string(os, state.config_hash);
    binio::put_u64(os, state.seed);
    binio::put_u64(os, state.step);
    binio::put_u64(os, state.steps_per_epoch);
    binio::put_string(os, std::string(variant_name(state.model.config().variant)));
    sections.push_back({"meta", os.str()});
  }
  sections.push_back({"params", pack_tensors(as_items(state.model.parameters()))});
  sections.push_back({"momentum", pack_tensors(as_items(state.model.momentum_parameters()))});
  sections.push_back({"buffers", pack_tensors(as_items(state.model.buffers()))});
  {
    std::ostringstream os;
    binio::put_u64(os, state.sgd.velocity.size());
    for (const auto& v : state.sgd.velocity) {
      binio::put_u64(os, v.size());
      for (double x : v) binio::put_f64(os, x);
    }
    sections.push_back({"velocity", os.str()});
  }
  {
    const Queue& q = state.model.queue();
    std::ostringstream os;
    binio::put_u64(os, q.capacity());
    binio::put_u64(os, q.dim());
    binio::put_u64(os, q.cursor());
    binio::put_u64(os, q.size());
    for (double x : q.storage()) binio::put_f64(os, x);
    sections.push_back({"queue", os.str()});
  }
  {
    std::ostringstream os;
    binio::put_u64(os, state.loss_trace.size());
    for (double x : state.loss_trace) binio::put_f64(os, x);
    sections.push_back({"trace", os.str()});
  }
  write_container(path, sections);
}

void load_checkpoint(const std::filesystem::path& path, TrainState& state) {
  const auto sections = read_container(path);
  TrainState next = std::move(state);
  {
    std::istringstream is(find_section(sections, "meta").payload);
    const auto hash = binio::get_string(is, "config hash", 1u << 12);
    if (hash != next.config_hash) {
      throw ConfigError("checkpoint " + path.string() + " was written by config " + hash + ", current config is " +
                        next.config_hash);
    }
    next.seed = binio::get_u64(is, "seed");
    next.step = binio::get_u64(is, "step");
    const auto per_epoch = binio::get_u64(is, "steps per epoch");
    if (per_epoch != next.steps_per_epoch) throw DataError("checkpoint was written for a different data size");
    const auto variant = binio::get_string(is, "variant", 64);
    if (variant != variant_name(next.model.config().variant)) {
      throw DataError("checkpoint holds a " + variant + " model");
    }
  }
  restore_items("params", unpack_tensors(find_section(sections, "params").payload), next.model.parameters());
  restore_items("momentum", unpack_tensors(find_section(sections, "momentum").payload),
                next.model.momentum_parameters());
  restore_items("buffers", unpack_tensors(find_section(sections, "buffers").payload), next.model.buffers());
  {
    std::istringstream is(find_section(sections, "velocity").payload);
    const auto n = binio::get_u64(is, "velocity count");
    const auto params = next.model.parameters();
    if (n != 0 && n != params.size()) throw DataError("checkpoint velocity does not match the parameters");
    next.sgd.velocity.assign(n, {});
    for (std::uint64_t i = 0; i < n; ++i) {
      const auto len = binio::get_u64(is, "velocity length");
      if (len != params[i].value.numel()) throw DataError("checkpoint velocity of '" + params[i].name + "' has wrong size");
      next.sgd.velocity[i].resize(len);
      for (auto& x : next.sgd.velocity[i]) x = binio::get_f64(is, "velocity");
    }
  }
  {
    std::istringstream is(find_section(sections, "queue").payload);
    const auto cap = binio::get_u64(is, "queue capacity");
    const auto dim = binio::get_u64(is, "queue dim");
    const auto cursor = binio::get_u64(is, "queue cursor");
    const auto size = binio::get_u64(is, "queue size");
    Queue& q = next.model.queue();
    if (cap != q.capacity() || dim != q.dim()) throw DataError("checkpoint queue has a different geometry");
    std::vector<double> storage(cap * dim);
    for (auto& x : storage) x = binio::get_f64(is, "queue entry");
    if (cap) q.restore(std::move(storage), cursor, size);
  }
  {
    std::istringstream is(find_section(sections, "trace").payload);
    const auto n = binio::get_u64(is, "trace length");
    if (n != next.step) throw DataError("checkpoint trace length differs from its step count");
    next.loss_trace.resize(n);
    for (auto& x : next.loss_trace) x = binio::get_f64(is, "trace value");
  }
  state = std::move(next);
}

// -- linear probe ------------------------------------------------------------------------

Tensor LinearProbe::standardize(const Tensor& features) const {
  if (mean.empty()) return features;
  const std::size_t d = features.dim(1);
  if (d != mean.size()) throw ShapeError("probe: feature width " + std::to_string(d) + " differs from " +
                                         std::to_string(mean.size()));
  std::vector<double> out(features.data().begin(), features.data().end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (out[i] - mean[i % d]) * inv_std[i % d];
  return Tensor(features.shape(), std::move(out));
}

Tensor LinearProbe::logits(const Tensor& features) const {
  return ops::matmul(standardize(features), weight) + bias;
}

namespace {

class ProbeTrainer {
 public:
  ProbeTrainer(std::size_t dim, std::size_t classes, std::size_t n, const ProbeConfig& cfg) : cfg_(cfg) {
    if (cfg.batch_size == 0 || cfg.epochs == 0) throw ConfigError("probe: batch size and epochs must be positive");
    if (n == 0) throw DataError("probe: no training examples");
    probe_.weight = Tensor::zeros({dim, classes}, true);
    probe_.bias = Tensor::zeros({classes}, true);
    const std::size_t per_epoch = (n + cfg.batch_size - 1) / cfg.batch_size;
    schedule_ = ScheduleConfig::for_epochs(effective_lr(cfg.base_lr, cfg.batch_size), 0, cfg.epochs, per_epoch);
    opt_ = OptimizerConfig{0.0, cfg.momentum, cfg.weight_decay};
  }

  void fit_standardization(const Tensor& features) {
    if (!cfg_.standardize) return;
    const std::size_t n = features.dim(0), d = features.dim(1);
    const auto f = features.data();
    probe_.mean.assign(d, 0.0);
    probe_.inv_std.assign(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) probe_.mean[j] += f[i * d + j];
    for (auto& m : probe_.mean) m /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) probe_.inv_std[j] += std::pow(f[i * d + j] - probe_.mean[j], 2);
    for (auto& s : probe_.inv_std) {
      const double sd = std::sqrt(s / static_cast<double>(n));
      s = sd > 1e-12 ? 1.0 / sd : 0.0;
    }
  }

  void run_epoch(const Tensor& features, const std::vector<int>& labels, std::size_t epoch) {
    const std::size_t n = features.dim(0), d = features.dim(1), classes = probe_.num_classes();
    const Tensor x = probe_.standardize(features);
    const auto xd = x.data();
    const auto order = epoch_order(n, cfg_.seed ^ 0x70be, epoch);
    const nn::Parameters params{{"probe.weight", probe_.weight, true}, {"probe.bias", probe_.bias, false}};
    for (std::size_t begin = 0; begin < n; begin += cfg_.batch_size) {
      const std::size_t end = std::min(n, begin + cfg_.batch_size), b = end - begin;
      std::vector<double> xb(b * d), yb(b * classes, 0.0);
      for (std::size_t i = 0; i < b; ++i) {
        std::copy_n(xd.begin() + order[begin + i] * d, d, xb.begin() + i * d);
        yb[i * classes + static_cast<std::size_t>(labels[order[begin + i]])] = 1.0;
      }
      for (const auto& p : params) {
        Tensor t = p.value;
        t.clear_grad();
      }
      {
        Tape tape;
        TapeScope scope(tape);
        const Tensor logits = ops::matmul(Tensor({b, d}, std::move(xb)), probe_.weight) + probe_.bias;
        const Tensor loss =
            ops::scale(ops::sum(ops::log_softmax(logits, 1) * Tensor({b, classes}, std::move(yb))),
                       -1.0 / static_cast<double>(b));
        tape.backward(loss);
      }
      sgd_step(params, sgd_, lr_at(step_, schedule_), opt_);
      ++step_;
    }
  }

  LinearProbe finish() {
    probe_.weight.set_requires_grad(false);
    probe_.bias.set_requires_grad(false);
    return probe_;
  }

 private:
  ProbeConfig cfg_;
  LinearProbe probe_;
  ScheduleConfig schedule_;
  OptimizerConfig opt_;
  SgdState sgd_;
  std::size_t step_ = 0;
};

void check_labels(const std::vector<int>& labels, std::size_t classes) {
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= classes) {
      throw DataError("probe: label " + std::to_string(y) + " outside " + std::to_string(classes) + " classes");
    }
  }
}

Tensor embed_features(ContrastiveModel& model, const std::vector<ClipFeatures>& clips) {
  constexpr std::size_t kChunk = 64;
  std::vector<double> out;
  std::size_t d = 0;
  for (std::size_t begin = 0; begin < clips.size(); begin += kChunk) {
    const std::size_t end = std::min(clips.size(), begin + kChunk);
    const Tensor e = model.embed(stack_features(std::span(clips).subspan(begin, end - begin)), ops::Mode::kEval);
    d = e.dim(1);
    out.insert(out.end(), e.data().begin(), e.data().end());
  }
  return Tensor({clips.size(), d}, std::move(out));
}

}  // namespace

LinearProbe train_probe_on_features(const Tensor& features, const std::vector<int>& labels, std::size_t num_classes,
                                    const ProbeConfig& cfg) {
  if (features.rank() != 2 || features.dim(0) != labels.size()) {
    throw ShapeError("probe: features " + shape_str(features.shape()) + " do not match " +
                     std::to_string(labels.size()) + " labels");
  }
  check_labels(labels, num_classes);
  ProbeTrainer trainer(features.dim(1), num_classes, labels.size(), cfg);
  trainer.fit_standardization(features);
  for (std::size_t e = 0; e < cfg.epochs; ++e) trainer.run_epoch(features, labels, e);
  return trainer.finish();
}

LinearProbe train_probe(ContrastiveModel& model, const Dataset& train, const ProbeConfig& cfg,
                        const augment::Pipeline& pipeline, const ClipGeometry& geom, const SpectrogramConfig& spec) {
  if (pipeline.has_temporal()) throw ConfigError("probe: the probe pipeline must not contain temporal augmentations");
  if (train.empty()) throw DataError("probe: training set is empty");
  std::vector<int> labels;
  for (const auto& v : train.videos) labels.push_back(v.label);
  const auto classes = static_cast<std::size_t>(train.num_classes);
  check_labels(labels, classes);

  ProbeTrainer trainer(model.config().encoder.embed_dim, classes, train.size(), cfg);
  std::vector<ClipFeatures> clips(train.size());
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    parallel_for(train.size(), [&](std::size_t v) {
      const SourceVideo& video = train.videos[v];
      Rng rng = substream({cfg.seed, v, epoch, 0x7a0b});
      const auto start = static_cast<std::size_t>(
          uniform_int(rng, 0, static_cast<std::int64_t>(geom.max_start_frame(video))));
      clips[v] = preprocess_clip(pipeline.apply(extract_clip(video, start, geom), {v, 2, epoch}).clip, spec);
    });
    const Tensor features = embed_features(model, clips);
    if (epoch == 0) trainer.fit_standardization(features);
    trainer.run_epoch(features, labels, epoch);
  }
  return trainer.finish();
}

void save_probe(const LinearProbe& probe, const std::string& config_hash, const std::filesystem::path& path) {
  std::vector<std::pair<std::string, Tensor>> items{{"weight", probe.weight}, {"bias", probe.bias}};
  if (!probe.mean.empty()) {
    items.emplace_back("mean", Tensor({probe.mean.size()}, probe.mean));
    items.emplace_back("inv_std", Tensor({probe.inv_std.size()}, probe.inv_std));
  }
  std::ostringstream meta;
  binio::put_string(meta, config_hash);
  write_container(path, {{"probe_meta", meta.str()}, {"probe", pack_tensors(items)}});
}

LinearProbe load_probe(const std::filesystem::path& path, std::string* config_hash) {
  const auto sections = read_container(path);
  std::istringstream meta(find_section(sections, "probe_meta").payload);
  const auto hash = binio::get_string(meta, "config hash", 1u << 12);
  if (config_hash) *config_hash = hash;
  LinearProbe p;
  for (auto& [name, t] : unpack_tensors(find_section(sections, "probe").payload)) {
    if (name == "weight") {
      p.weight = t;
    } else if (name == "bias") {
      p.bias = t;
    } else if (name == "mean") {
      p.mean.assign(t.data().begin(), t.data().end());
    } else if (name == "inv_std") {
      p.inv_std.assign(t.data().begin(), t.data().end());
    }
  }
  if (!p.weight.defined() || !p.bias.defined() || p.weight.rank() != 2 || p.bias.numel() != p.weight.dim(1)) {
    throw DataError(path.string() + " does not hold a linear probe");
  }
  return p;
}

// -- evaluation ------------------------------------------------------------------------------

std::vector<double> average_softmax(const Tensor& logits) {
  if (logits.rank() != 2 || logits.dim(0) == 0) throw ShapeError("average_softmax: expected [views, classes]");
  const Tensor probs = ops::softmax(logits, 1);
  const std::size_t v = logits.dim(0), c = logits.dim(1);
  std::vector<double> mean(c, 0.0);
  const auto p = probs.data();
  for (std::size_t i = 0; i < v; ++i)
    for (std::size_t j = 0; j < c; ++j) mean[j] += p[i * c + j];
  for (auto& m : mean) m /= static_cast<double>(v);
  return mean;
}

std::vector<double> video_scores(ContrastiveModel& model, const LinearProbe& probe, const SourceVideo& video,
                                 const ClipGeometry& geom, const SpectrogramConfig& spec,
                                 const EvalSamplerConfig& eval_cfg, std::size_t* num_views) {
  const auto views = sample_eval_clips(video, geom, eval_cfg);
  std::vector<ClipFeatures> clips(views.size());
  parallel_for(views.size(), [&](std::size_t i) { clips[i] = preprocess_clip(views[i].clip, spec); });
  if (num_views) *num_views = views.size();
  NoGradScope no_grad;
  return average_softmax(probe.logits(embed_features(model, clips)));
}

EvalResult evaluate(ContrastiveModel& model, const LinearProbe& probe, const Dataset& test, const ClipGeometry& geom,
                    const SpectrogramConfig& spec, const EvalSamplerConfig& eval_cfg) {
  if (test.empty()) throw DataError("evaluate: test set is empty");
  if (static_cast<std::size_t>(test.num_classes) != probe.num_classes()) {
    throw DataError("evaluate: probe has " + std::to_string(probe.num_classes()) + " classes, test set has " +
                    std::to_string(test.num_classes));
  }
  EvalResult r;
  std::size_t hit1 = 0, hit5 = 0;
  for (const auto& video : test.videos) {
    std::size_t views = 0;
    const auto scores = video_scores(model, probe, video, geom, spec, eval_cfg, &views);
    r.views_per_video.push_back(views);
    const auto best = static_cast<int>(std::max_element(scores.begin(), scores.end()) - scores.begin());
    r.predictions.push_back(best);
    if (best == video.label) ++hit1;
    std::size_t rank = 0;  // classes scoring strictly higher than the true one
    for (double s : scores) rank += s > scores[static_cast<std::size_t>(video.label)];
    if (rank < 5) ++hit5;
  }
  const double n = static_cast<double>(test.size());
  r.top1 = static_cast<double>(hit1) / n;
  if (probe.num_classes() > 5) r.top5 = static_cast<double>(hit5) / n;
  return r;
}

// -- metrics logs -------------------------------------------------------------------------

std::string format_step_line(const StepRecord& r) {
  std::ostringstream os;
  os.precision(17);
  os << r.step << '\t' << r.epoch << '\t' << r.lr << '\t' << r.loss;
  return os.str();
}

std::string format_eval_record(std::size_t epoch, const EvalResult& r, const std::string& config_hash) {
  nlohmann::ordered_json j;
  j["epoch"] = epoch;
  j["top1"] = r.top1;
  if (r.top5) j["top5"] = *r.top5;
  j["config_hash"] = config_hash;
  return j.dump();
}

}  // namespace avcl
