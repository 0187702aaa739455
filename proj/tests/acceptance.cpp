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

// Acceptance gate: one PASS/FAIL line per criterion. Arguments select
// criteria by number ("acceptance 1 4 9"); the default runs all of them.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <limits>
#include <list>
#include <numbers>
#include <set>
#include <sstream>
#include <string>

#include "avcl/augment.hpp"
#include "avcl/commands.hpp"
#include "avcl/config.hpp"
#include "avcl/error.hpp"
#include "avcl/fft.hpp"
#include "avcl/frameworks.hpp"
#include "avcl/sampling.hpp"
#include "avcl/trainer.hpp"
#include "gradient_cases.hpp"
#include "test_util.hpp"

namespace {

using namespace avcl;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;
  std::vector<std::string> failures;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (failures.size() < 10) failures.push_back(what);
    }
  }
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

fs::path scratch_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("avcl_acceptance_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// -- 1: InfoNCE against direct summation ------------------------------------------

double infonce_oracle(const Tensor& z, double tau) {
  const std::size_t rows = z.dim(0), d = z.dim(1), n = rows / 2;
  const auto v = z.data();
  long double total = 0;
  for (std::size_t i = 0; i < rows; ++i) {
    long double denom = 0, pos = 0;
    for (std::size_t k = 0; k < rows; ++k) {
      if (k == i) continue;
      long double dot = 0;
      for (std::size_t j = 0; j < d; ++j) dot += static_cast<long double>(v[i * d + j]) * v[k * d + j];
      const long double e = std::exp(dot / tau);
      denom += e;
      if (k == (i + n) % rows) pos = e;
    }
    total += -std::log(pos / denom);
  }
  return static_cast<double>(total / rows);
}

Outcome criterion1() {
  Outcome o;
  const auto t0 = Clock::now();
  Rng rng(101);
  const double taus[] = {0.05, 0.1, 0.5, 1.0};
  double worst = 0;
  for (int b = 0; b < 100; ++b) {
    const auto n = static_cast<std::size_t>(uniform_int(rng, 1, 8));
    const auto d = static_cast<std::size_t>(uniform_int(rng, 4, 32));
    const double tau = taus[uniform_int(rng, 0, 3)];
    const Tensor z = testing::random_unit_rows(2 * n, d, rng);
    const double got = infonce_loss(z, tau).item(), want = infonce_oracle(z, tau);
    const double rel = std::abs(got - want) / std::max(std::abs(want), 1e-300);
    worst = std::max(worst, rel);
    o.require(rel <= 1e-9, "batch " + std::to_string(b) + " rel err " + fmt("%.3g", rel));
  }
  const Tensor one = testing::random_unit_rows(1, 6, rng);
  const Tensor parts[] = {one, one};
  const double degenerate = infonce_loss(ops::concat(parts, 0), 1.0).item();
  o.require(degenerate == 0.0, "N=1 identical pair gave " + fmt("%.17g", degenerate));
  const double secs = seconds_since(t0);
  o.require(secs < 10.0, "runtime " + fmt("%.1f s", secs));
  o.detail = "100 batches, max rel err " + fmt("%.2e", worst) + ", N=1 loss " + fmt("%g", degenerate) + ", " +
             fmt("%.2f s", secs);
  return o;
}

// -- 2: gradients ------------------------------------------------------------------------

Outcome criterion2() {
  Outcome o;
  const auto t0 = Clock::now();
  Rng rng(202);
  double worst = 0;
  std::size_t checked = 0, cases = 0;
  for (int round = 0; round < 3; ++round) {
    auto all = testing::primitive_cases(rng);
    auto losses = testing::loss_cases(rng);
    all.insert(all.end(), losses.begin(), losses.end());
    for (const auto& c : all) {
      const auto r = testing::check_gradients(c.loss, c.wrt, 1e-5);
      worst = std::max(worst, r.max_rel_err);
      checked += r.checked;
      ++cases;
      o.require(r.max_rel_err <= 1e-4, c.name + " rel err " + fmt("%.3g", r.max_rel_err));
    }
  }

  // Target branches: loss-level stop-gradient and model-level momentum copies.
  std::size_t zero_checked = 0;
  for (auto fn : {&byol_loss, &simsiam_loss}) {
    Tensor p1 = testing::random_tensor({4, 5}, rng), p2 = testing::random_tensor({4, 5}, rng);
    Tensor z1 = testing::random_tensor({4, 5}, rng), z2 = testing::random_tensor({4, 5}, rng);
    Tape tape;
    TapeScope scope(tape);
    tape.backward(fn(p1, z2, p2, z1));
    for (const Tensor& z : {z1, z2}) {
      if (!z.has_grad()) continue;
      for (double g : z.grad()) o.require(g == 0.0, "loss target received gradient");
    }
    zero_checked += 2;
  }
  for (Variant v : {Variant::kMoCo, Variant::kBYOL, Variant::kSimSiam}) {
    FrameworkConfig cfg;
    cfg.variant = v;
    cfg.queue_size = 8;
    cfg.proj_dim = 16;
    cfg.pred_hidden = 8;
    cfg.encoder.embed_dim = 8;
    auto model = ContrastiveModel::create(cfg, 5);
    auto input = [&] {
      EncoderInput in;
      in.batch = 4;
      in.frames = 3;
      in.audio = testing::random_tensor({4, 1, 16, 9}, rng, false);
      in.video = testing::random_tensor({12, 3, 16, 16}, rng, false);
      return in;
    };
    const auto a = input(), b = input();
    Tape tape;
    TapeScope scope(tape);
    const Tensor loss = model.loss(a, b);
    tape.backward(loss);
    for (const auto& p : model.momentum_parameters()) {
      if (!p.value.has_grad()) continue;
      for (double g : p.value.grad()) o.require(g == 0.0, std::string(variant_name(v)) + " momentum " + p.name);
    }
    if (v == Variant::kMoCo) {
      const Tensor keys = model.queue().entries();
      o.require(!keys.defined() || !keys.requires_grad(), "moco queue keys require grad");
    }
    zero_checked += 1;
  }
  const double secs = seconds_since(t0);
  o.require(secs < 120.0, "runtime " + fmt("%.1f s", secs));
  o.detail = std::to_string(cases) + " cases / " + std::to_string(checked) + " elements, max rel err " +
             fmt("%.2e", worst) + ", " + std::to_string(zero_checked) + " target branches zero, " +
             fmt("%.1f s", secs);
  return o;
}

// -- 3: augmentation invariants ------------------------------------------------------------

Tensor random_signal(Rng& rng, std::size_t& t_n) {
  t_n = static_cast<std::size_t>(uniform_int(rng, 1, 64));
  const auto slice = static_cast<std::size_t>(uniform_int(rng, 1, 3));
  std::vector<double> v(t_n * slice);
  for (auto& x : v) x = uniform(rng, -1.0, 1.0);
  return Tensor({t_n, slice}, std::move(v));
}

bool equal(const Tensor& a, const Tensor& b) {
  return a.shape() == b.shape() && std::equal(a.data().begin(), a.data().end(), b.data().begin());
}

std::vector<std::vector<double>> slices(const Tensor& x) {
  const std::size_t t_n = x.dim(0), s = x.numel() / t_n;
  std::vector<std::vector<double>> out;
  for (std::size_t t = 0; t < t_n; ++t) out.emplace_back(x.data().begin() + t * s, x.data().begin() + (t + 1) * s);
  return out;
}

Outcome criterion3() {
  using namespace augment;
  Outcome o;
  const auto t0 = Clock::now();
  Rng rng(303);
  std::size_t cases = 0;
  const int per_property = 1500;

  // Zero strength is the identity for every temporal kind.
  for (int i = 0; i < per_property; ++i) {
    std::size_t t_n;
    const Tensor x = random_signal(rng, t_n);
    o.require(equal(fade(x, draw_fade(0.0, rng)), x), "FD alpha=0");
    o.require(equal(time_mask(x, draw_mask(0.0, rng), Stream::kAudio), x), "TM alpha=0");
    o.require(equal(time_shift(x, draw_shift(0.0, rng)), x), "TS alpha=0");
    o.require(equal(resample(x, draw_resample(0.0, rng)), x), "RE alpha=0");
    cases += 4;
  }

  // Time shift keeps the multiset of slices; a full-length shift is the identity.
  for (int i = 0; i < per_property; ++i) {
    std::size_t t_n;
    const Tensor x = random_signal(rng, t_n);
    const auto y = time_shift(x, draw_shift(uniform(rng, 0.0, 1.0), rng));
    auto a = slices(x), b = slices(y);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    o.require(a == b, "TS multiset");
    o.require(equal(time_shift(x, {1.0}), x) && equal(time_shift(x, {-1.0}), x), "TS full length");
    cases += 2;
  }

  // Mask touches one contiguous window no longer than alpha of the clip.
  for (int i = 0; i < per_property; ++i) {
    std::size_t t_n;
    const Tensor x = random_signal(rng, t_n);
    const double alpha = uniform(rng, 0.0, 1.0);
    const auto p = draw_mask(alpha, rng);
    const Stream stream = i % 2 ? Stream::kAudio : Stream::kVideo;
    const Tensor y = time_mask(x, p, stream);
    const auto xs = slices(x), ys = slices(y);
    const std::size_t begin = fraction_to_index(p.start, t_n), end = fraction_to_index(p.start + p.length, t_n);
    std::size_t changed = 0;
    for (std::size_t t = 0; t < t_n; ++t) {
      const bool inside = t >= begin && t < end;
      if (!inside) o.require(xs[t] == ys[t], "TM outside window changed");
      changed += inside;
    }
    o.require(p.length <= alpha && static_cast<double>(changed) <= alpha * t_n + 1.0, "TM length bound");
    cases += 2;
  }

  // Resample keeps the length, holds earlier samples, and bounds the distinct slices.
  for (int i = 0; i < per_property; ++i) {
    const auto t_n = static_cast<std::size_t>(uniform_int(rng, 1, 200));
    std::vector<double> ramp(t_n);
    std::iota(ramp.begin(), ramp.end(), 0.0);
    const Tensor x({t_n}, ramp);
    const auto p = draw_resample(uniform(rng, 0.0, 1.0), rng);
    const Tensor y = resample(x, p);
    o.require(y.shape() == x.shape(), "RE length");
    std::set<double> distinct(y.data().begin(), y.data().end());
    o.require(distinct.size() <= static_cast<std::size_t>(std::ceil(p.factor * t_n)), "RE distinct bound");
    bool causal = true;
    for (std::size_t t = 0; t < t_n; ++t) causal &= y.at(t) <= static_cast<double>(t);
    o.require(causal, "RE reads ahead");
    cases += 3;
  }
  {
    const ResampleParams half{0.5};
    o.require(effective_rate(44100, half) == 22050 && effective_rate(8, half) == 4, "RE rate arithmetic");
    std::vector<double> audio(44100), frames(8);
    std::iota(audio.begin(), audio.end(), 0.0);
    std::iota(frames.begin(), frames.end(), 0.0);
    const Tensor ya = resample(Tensor({44100}, audio), half), yv = resample(Tensor({8}, frames), half);
    o.require(std::set<double>(ya.data().begin(), ya.data().end()).size() == 22050, "RE 44.1k -> 22.05k samples");
    o.require(std::set<double>(yv.data().begin(), yv.data().end()).size() == 4, "RE 8 -> 4 frames");
    cases += 3;
  }

  // Fade envelope never amplifies; at alpha=0.5 each side spans at most a quarter.
  double widest = 0;
  for (int i = 0; i < per_property; ++i) {
    const auto t_n = static_cast<std::size_t>(uniform_int(rng, 4, 128));
    const Tensor ones = Tensor::full({t_n}, 1.0);
    const auto p = draw_fade(0.5, rng);
    const Tensor y = fade(ones, p);
    bool bounded = true;
    for (double v : y.data()) bounded &= v >= 0.0 && v <= 1.0;
    o.require(bounded, "FD envelope outside [0,1]");
    o.require(p.left <= 0.25 && p.right <= 0.25, "FD extent above a quarter");
    std::size_t faded_left = 0;
    while (faded_left < t_n && y.at(faded_left) < 1.0) ++faded_left;
    o.require(faded_left <= fraction_to_index(0.25, t_n), "FD faded span");
    widest = std::max({widest, p.left, p.right});
    cases += 3;
  }
  o.require(widest > 0.249, "FD never approached a quarter clip");

  // Alignment: equal fractional parameters across streams, strength only for RE.
  AVClip clip;
  clip.audio = Waveform{Tensor::full({640}, 0.25), 640};
  clip.video = FrameSequence{Tensor::full({10, 4, 4, 3}, 0.5), 8};
  const auto aligned = build_pipeline(parse_specs("FD:0.8,TM:0.8,TS:0.8,RE:0.8"), true, 9);
  const auto independent = build_pipeline(parse_specs("FD:0.8,TM:0.8,TS:0.8,RE:0.8"), false, 9);
  std::size_t differing = 0;
  for (int i = 0; i < per_property / 2; ++i) {
    const ClipKey key{static_cast<std::uint64_t>(i), 0, 0};
    const auto r = aligned.apply(clip, key);
    for (std::size_t j = 0; j + 1 < r.log.size(); j += 2) {
      o.require(r.log[j].stream == Stream::kAudio && r.log[j + 1].stream == Stream::kVideo, "log order");
      o.require(r.log[j].aligned && r.log[j].params == r.log[j + 1].params,
                std::string(kind_name(r.log[j].kind)) + " aligned params differ");
      if (r.log[j].kind == Kind::kResample) {
        o.require(std::holds_alternative<ResampleParams>(r.log[j].params), "RE carries more than a strength");
      }
      ++cases;
    }
    const auto u = independent.apply(clip, key);
    for (std::size_t j = 0; j + 1 < u.log.size(); j += 2) differing += !(u.log[j].params == u.log[j + 1].params);
  }
  o.require(differing > 0, "independent streams never differ");

  const double secs = seconds_since(t0);
  o.require(cases >= 10000, "only " + std::to_string(cases) + " cases");
  o.require(secs < 60.0, "runtime " + fmt("%.1f s", secs));
  o.detail = std::to_string(cases) + " property cases, " + fmt("%.1f s", secs);
  return o;
}

// -- 4: momentum and queue ---------------------------------------------------------------------

Outcome criterion4() {
  Outcome o;
  Rng rng(404);
  double worst_ema = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const double m = uniform(rng, 0.0, 1.0);
    nn::Parameters target{{"w", testing::random_tensor({7}, rng, false)}};
    nn::Parameters online{{"w", testing::random_tensor({7}, rng, false)}};
    const auto before = std::vector<double>(target[0].value.data().begin(), target[0].value.data().end());
    momentum_update(target, online, m);
    for (std::size_t i = 0; i < 7; ++i) {
      const double want = m * before[i] + (1.0 - m) * online[0].value.at(i);
      const double err = std::abs(target[0].value.at(i) - want);
      worst_ema = std::max(worst_ema, err);
      o.require(err == 0.0, "EMA mismatch at m=" + fmt("%.6f", m));
    }
  }

  // Frozen online parameters. With m = 1/2 every iterate is representable, so
  // each coordinate's offset halves exactly. Other m cannot be exact in binary
  // floating point; they are held to the accumulated rounding bound instead.
  double worst_geo = 0;
  for (double m : {0.5, 0.75, 0.9, 0.99}) {
    nn::Parameters online{{"w", Tensor::from({0.5, -1.0, 2.0})}};
    nn::Parameters target{{"w", Tensor::from({1.5, 0.0, 1.0})}};
    std::vector<double> offset0(3);
    for (std::size_t i = 0; i < 3; ++i) offset0[i] = target[0].value.at(i) - online[0].value.at(i);
    long double dist0 = 0;
    for (double d : offset0) dist0 += static_cast<long double>(d) * d;
    dist0 = std::sqrt(dist0);
    long double mn = 1;
    for (int n = 1; n <= 50; ++n) {
      momentum_update(target, online, m);
      mn *= m;
      long double dist = 0;
      for (std::size_t i = 0; i < 3; ++i) {
        const double off = target[0].value.at(i) - online[0].value.at(i);
        if (m == 0.5) {
          o.require(off == std::ldexp(offset0[i], -n), "m=0.5 offset not exactly halved at n=" + std::to_string(n));
        }
        dist += static_cast<long double>(off) * off;
      }
      dist = std::sqrt(dist);
      const double err = static_cast<double>(std::abs(dist - mn * dist0));
      const double bound = 4.0 * n * std::numeric_limits<double>::epsilon() * 2.0 * std::sqrt(3.0);
      worst_geo = std::max(worst_geo, err / bound);
      o.require(err <= bound, "geometric convergence m=" + fmt("%g", m) + " n=" + std::to_string(n) + " err " +
                                  fmt("%.3g", err));
    }
  }

  // FIFO against a list oracle, across batch sizes that wrap the ring unevenly.
  std::size_t enqueued = 0;
  for (std::size_t cap : {4u, 6u, 10u}) {
    Queue q(cap, 3);
    std::list<std::vector<double>> oracle;
    for (int step = 0; step < 12; ++step) {
      const auto b = static_cast<std::size_t>(uniform_int(rng, 1, 4));
      const Tensor keys = testing::random_unit_rows(b, 3, rng);
      q.enqueue(keys);
      for (std::size_t r = 0; r < b; ++r) {
        oracle.emplace_back(keys.data().begin() + r * 3, keys.data().begin() + (r + 1) * 3);
        if (oracle.size() > cap) oracle.pop_front();
        ++enqueued;
      }
      const Tensor e = q.entries();
      o.require(q.size() == oracle.size(), "queue size");
      std::size_t r = 0;
      for (const auto& row : oracle) {
        for (std::size_t k = 0; k < 3; ++k) o.require(e.at(r * 3 + k) == row[k], "queue order");
        ++r;
      }
    }
    o.require(q.full(), "queue not full");
  }
  o.detail = "EMA max err " + fmt("%g", worst_ema) + ", geometric n<=50: m=0.5 bit-exact, m in {0.75,0.9,0.99} at " +
             fmt("%.2f", worst_geo) + " of the rounding bound, " +
             std::to_string(enqueued) + " keys through FIFO oracle";
  return o;
}

// -- 5: strength trend on the synthetic dataset ------------------------------------------------

cli::Config trend_config(const fs::path& data_dir, const fs::path& out, std::uint64_t seed, double alpha) {
  cli::Config cfg;
  cfg.set("data.dir", data_dir.string());
  cfg.set("run.output_dir", out.string());
  cfg.set("run.seed", std::to_string(seed));
  cfg.set("framework.variant", "simclr");
  cfg.set("optimizer.epochs", "50");
  std::ostringstream pipeline;
  pipeline << "SP,PS,RE:" << alpha;
  cfg.set("augment.pipeline", pipeline.str());
  return cfg;
}

Outcome criterion5() {
  Outcome o;
  const auto t0 = Clock::now();
  const fs::path root = scratch_dir("trend");
  const fs::path data = root / "data";
  std::ostringstream log;
  cli::Config base = trend_config(data, root, 1, 0.0);
  cli::cmd_gen_data(base, log);

  const double alphas[] = {0.0, 0.25, 0.75};
  double mean[3] = {0, 0, 0};
  std::ostringstream runs;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    for (int a = 0; a < 3; ++a) {
      const auto cfg = trend_config(data, root / ("s" + std::to_string(seed) + "_a" + std::to_string(a)), seed,
                                    alphas[a]);
      const auto r0 = Clock::now();
      cli::cmd_pretrain(cfg, {}, log);
      cli::cmd_probe(cfg, log);
      const EvalResult r = cli::cmd_eval(cfg, log);
      mean[a] += r.top1 / 3.0;
      o.require(r.top1 >= 0.35, "seed " + std::to_string(seed) + " alpha " + fmt("%g", alphas[a]) + " top1 " +
                                    fmt("%.4f", r.top1) + " not 10 points above chance");
      runs << " s" << seed << "/a" << alphas[a] << "=" << fmt("%.4f", r.top1);
      std::cout << "  [5] seed " << seed << " alpha " << alphas[a] << " top1 " << fmt("%.4f", r.top1) << " ("
                << fmt("%.0f s", seconds_since(r0)) << ")" << std::endl;
    }
  }
  o.require(mean[2] >= mean[0], "mean top1 at alpha 0.75 below the alpha 0 control");
  o.require(mean[2] >= mean[1], "mean top1 at alpha 0.75 below alpha 0.25");
  const double secs = seconds_since(t0);
  o.require(secs < 3600.0, "runtime " + fmt("%.0f s", secs));
  o.detail = "mean top1 alpha0=" + fmt("%.4f", mean[0]) + " alpha0.25=" + fmt("%.4f", mean[1]) +
             " alpha0.75=" + fmt("%.4f", mean[2]) + ";" + runs.str() + ", " + fmt("%.0f s", secs);
  fs::remove_all(root);
  return o;
}

// -- 6: protocol fidelity ----------------------------------------------------------------------

cli::Config small_run_config(const fs::path& out) {
  cli::Config cfg;
  cfg.apply_overrides({"--run.output_dir=" + out.string(), "--data.num_videos=32", "--data.video_seconds=3",
                       "--optimizer.batch_size=8", "--optimizer.epochs=3", "--optimizer.warmup_epochs=1",
                       "--probe.epochs=3", "--probe.batch_size=8", "--framework.embed_dim=8",
                       "--framework.proj_dim=16", "--framework.pred_hidden=8", "--framework.queue_size=16"});
  return cfg;
}

Outcome criterion6() {
  Outcome o;
  const fs::path dir = scratch_dir("protocol");
  const auto cfg = small_run_config(dir);
  std::ostringstream log;
  const TrainState state = cli::cmd_pretrain(cfg, {}, log);
  const auto before = nn::parameter_hash(state.model.encoder_parameters());

  const auto e = cli::materialize(cfg);
  const Dataset ds = cli::obtain_dataset(cfg);
  auto [train, test] = split_dataset(ds, e.test_every);
  TrainState probe_state = init_train_state(e.pretrain, train.size());
  load_checkpoint(cli::run_paths(e).checkpoint, probe_state);
  const auto probe_pipe = e.pipeline().domain_only();
  o.require(!probe_pipe.has_temporal(), "probe pipeline has temporal kinds");
  bool rejected = false;
  try {
    train_probe(probe_state.model, train, e.probe, e.pipeline(), e.pretrain.geometry, e.pretrain.spectrogram);
  } catch (const ConfigError&) {
    rejected = true;
  }
  o.require(rejected, "probe accepted a temporal pipeline");
  const auto probe =
      train_probe(probe_state.model, train, e.probe, probe_pipe, e.pretrain.geometry, e.pretrain.spectrogram);
  const auto after = nn::parameter_hash(probe_state.model.encoder_parameters());
  o.require(before == after, "encoder hash changed during probe training");

  const EvalResult r = evaluate(probe_state.model, probe, test, e.pretrain.geometry, e.pretrain.spectrogram, e.eval);
  std::size_t thirty = 0;
  for (auto v : r.views_per_video) thirty += v == 30;
  o.require(thirty == test.size() && !test.empty(), "views per video differ from 30");

  // Schedule at the default desk-scale settings and at batch 128.
  std::string sched;
  for (std::size_t batch : {32u, 128u}) {
    PretrainConfig pc;
    pc.batch_size = batch;
    const std::size_t train_size = 192;
    const auto s = pc.schedule(train_size);
    const double peak = 0.1 * static_cast<double>(batch) / 256.0;
    o.require(lr_at(0, s) == 0.0, "lr at step 0");
    o.require(std::abs(lr_at(s.warmup_steps, s) - peak) <= 1e-15, "lr at end of warmup");
    o.require(lr_at(s.total_steps, s) <= 1e-17, "lr at final step");
    const double step_size = peak / static_cast<double>(s.warmup_steps);
    o.require(std::abs(lr_at(s.warmup_steps - 1, s) - peak) <= step_size + 1e-15, "jump entering the junction");
    o.require(std::abs(lr_at(s.warmup_steps + 1, s) - peak) <= step_size, "jump leaving the junction");
    sched += " b" + std::to_string(batch) + " peak " + fmt("%g", lr_at(s.warmup_steps, s));
  }
  o.detail = "encoder hash " + hex64(before) + " unchanged, probe pipeline '" + augment::format_specs(probe_pipe.specs()) +
             "', " + std::to_string(thirty) + " videos x 30 views," + sched;
  fs::remove_all(dir);
  return o;
}

// -- 7: determinism and resume -------------------------------------------------------------------

Outcome criterion7() {
  Outcome o;
  const fs::path root = scratch_dir("determinism");
  std::ostringstream log;
  std::string detail;
  for (const char* variant : {"simclr", "moco"}) {
    auto run = [&](const std::string& name) {
      auto cfg = small_run_config(root / (std::string(variant) + "_" + name));
      cfg.set("framework.variant", variant);
      return cfg;
    };
    const auto a = run("a"), b = run("b"), c = run("c");
    const TrainState sa = cli::cmd_pretrain(a, {}, log);
    const TrainState sb = cli::cmd_pretrain(b, {}, log);
    cli::cmd_pretrain(c, {true, sa.steps_per_epoch + 1}, log);  // stop mid-epoch
    const TrainState sc = cli::cmd_pretrain(c, {true}, log);     // resume from the last checkpoint

    const auto ca = read_bytes(root / (std::string(variant) + "_a") / "checkpoint.avc");
    const auto cb = read_bytes(root / (std::string(variant) + "_b") / "checkpoint.avc");
    const auto cc = read_bytes(root / (std::string(variant) + "_c") / "checkpoint.avc");
    o.require(sa.loss_trace == sb.loss_trace, std::string(variant) + " traces differ");
    o.require(!ca.empty() && ca == cb, std::string(variant) + " checkpoints differ");
    o.require(sa.loss_trace == sc.loss_trace, std::string(variant) + " resumed trace differs");
    o.require(ca == cc, std::string(variant) + " resumed checkpoint differs");
    const auto ma = read_bytes(root / (std::string(variant) + "_a") / "metrics.tsv");
    const auto mc = read_bytes(root / (std::string(variant) + "_c") / "metrics.tsv");
    o.require(ma == mc, std::string(variant) + " metrics logs differ");
    detail += std::string(detail.empty() ? "" : ", ") + variant + " " + std::to_string(sa.loss_trace.size()) +
              " steps, checkpoint " + std::to_string(ca.size()) + " bytes identical";
  }
  o.detail = detail + "; resume from mid-run matches";
  fs::remove_all(root);
  return o;
}

// -- 8: sampler distribution -------------------------------------------------------------------

Outcome criterion8() {
  Outcome o;
  SourceVideo video;
  video.id = "timeline";
  video.video = FrameSequence{Tensor::zeros({80, 1, 1, 3}), 8};
  video.audio = Waveform{Tensor::zeros({11025 * 10}), 11025};
  ClipPairSampler sampler;
  const double t_max = static_cast<double>(sampler.geometry().max_start_frame(video)) / 8.0;
  Rng rng(808);
  const std::size_t draws = 100000, bins = 20;
  std::vector<double> count(bins, 0.0);
  for (std::size_t i = 0; i < draws; ++i) {
    const auto d = sampler.draw(video, rng);
    o.require(d.interval >= 0.0 && d.interval <= t_max, "t outside [0, t_max]");
    const auto gap = static_cast<std::size_t>(std::floor(d.interval * 8.0));
    o.require(d.second_frame - d.first_frame == gap, "second start is not first start + t");
    o.require(d.second_frame <= sampler.geometry().max_start_frame(video), "second clip leaves the video");
    count[std::min(bins - 1, static_cast<std::size_t>(d.interval / t_max * bins))] += 1.0;
  }
  double worst = 0;
  for (std::size_t b = 0; b + 1 < bins; ++b) {
    const double p0 = count[b] / draws, p1 = count[b + 1] / draws;
    const double sigma = std::sqrt(draws * p0 * (1 - p0) + draws * p1 * (1 - p1));
    const double rise = (count[b + 1] - count[b]) / sigma;
    worst = std::max(worst, rise);
    o.require(rise <= 3.0, "bin " + std::to_string(b + 1) + " rises by " + fmt("%.2f sigma", rise));
  }
  // The quantized frame gap equals the continuous delay on the frame grid.
  AVClip first, second;
  Rng pair_rng(809);
  for (int i = 0; i < 200; ++i) {
    Rng copy = pair_rng;
    const auto d = sampler.draw(video, copy);
    std::tie(first, second) = sampler.sample(video, pair_rng);
    o.require(second.start_time - first.start_time == static_cast<double>(d.second_frame - d.first_frame) / 8.0,
              "clip times disagree with the draw");
  }
  o.detail = std::to_string(draws) + " draws, first bin " + fmt("%.0f", count[0]) + ", last bin " +
             fmt("%.0f", count[bins - 1]) + ", max rise " + fmt("%.2f sigma", worst);
  return o;
}

// -- 9: colored noise spectra and pitch ---------------------------------------------------------

double loglog_slope(const std::vector<double>& x) {
  const auto spec = fft::rfft(x);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t k = 1; k < spec.size() - 1; ++k) {
    const double lx = std::log10(static_cast<double>(k));
    const double ly = std::log10(std::norm(spec[k]));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

Outcome criterion9() {
  using augment::NoiseColor;
  Outcome o;
  std::string detail;
  const std::pair<NoiseColor, double> expected[] = {
      {NoiseColor::kWhite, 0.0}, {NoiseColor::kPink, -1.0}, {NoiseColor::kBrown, -2.0}};
  for (const auto& [color, want] : expected) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const double slope = loglog_slope(augment::colored_noise_samples(100000, color, seed));
      o.require(std::abs(slope - want) <= 0.2, "slope " + fmt("%.3f", slope) + " vs " + fmt("%g", want));
      if (seed == 1) detail += fmt("%.3f ", slope);
    }
  }
  const int sr = 11025;
  const std::size_t n = 11025;
  std::vector<double> tone(n);
  for (std::size_t i = 0; i < n; ++i) tone[i] = 0.5 * std::sin(2 * std::numbers::pi * 440.0 * i / sr);
  const Waveform shifted = augment::pitch_shift(Waveform{Tensor({n}, tone), sr}, 12);
  const std::vector<double> s(shifted.samples.data().begin(), shifted.samples.data().end());
  const auto spec = fft::rfft(s);
  std::size_t best = 1;
  for (std::size_t k = 1; k < spec.size(); ++k) {
    if (std::abs(spec[k]) > std::abs(spec[best])) best = k;
  }
  const double bin_hz = static_cast<double>(sr) / n;
  const double peak = best * bin_hz;
  o.require(std::abs(peak - 880.0) <= bin_hz, "pitch peak at " + fmt("%.1f Hz", peak));
  o.detail = "slopes white/pink/brown " + detail + "(+-0.2 of 0,-1,-2), 440 Hz +12 st -> " + fmt("%.1f Hz", peak);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"InfoNCE oracle equivalence", criterion1},
      {"gradient correctness", criterion2},
      {"augmentation invariants", criterion3},
      {"momentum/queue exactness", criterion4},
      {"strength trend (Resample)", criterion5},
      {"protocol fidelity", criterion6},
      {"determinism and resume", criterion7},
      {"sampler distribution", criterion8},
      {"colored-noise spectra and pitch", criterion9},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << id << "] " << criteria[i].first << ": " << o.detail
              << std::endl;
    for (const auto& f : o.failures) std::cout << "       - " << f << std::endl;
    failed += !o.pass;
  }
  fs::remove_all(fs::temp_directory_path() / ("avcl_acceptance_" + std::to_string(::getpid())));
  return failed == 0 ? 0 : 1;
}
