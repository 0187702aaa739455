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

#include "avcl/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "avcl/error.hpp"
#include "avcl/rng.hpp"

namespace avcl::cli {

const std::vector<KeySpec>& schema() {
  using T = ValueType;
  static const std::vector<KeySpec> keys = {
      {"run.seed", T::kInt, "0"},
      {"run.output_dir", T::kString, "runs/default", false},
      {"data.dir", T::kString, "data/synthetic", false},
      {"data.num_videos", T::kInt, "256"},
      {"data.num_classes", T::kInt, "4"},
      {"data.video_seconds", T::kReal, "10"},
      {"data.fps", T::kInt, "8"},
      {"data.sample_rate", T::kInt, "11025"},
      {"data.frame_height", T::kInt, "20"},
      {"data.frame_width", T::kInt, "20"},
      {"data.seed", T::kInt, "0"},
      {"data.test_every", T::kInt, "4"},
      {"clip.seconds", T::kReal, "1.28"},
      {"spectrogram.n_fft", T::kInt, "512"},
      {"spectrogram.hop", T::kInt, "128"},
      {"spectrogram.n_mels", T::kInt, "64"},
      {"spectrogram.f_min", T::kReal, "0"},
      {"spectrogram.f_max", T::kReal, "0"},
      {"spectrogram.log_floor", T::kReal, "1e-10"},
      {"augment.pipeline", T::kString, "SP,PS,RE:0.75"},
      {"augment.aligned", T::kBool, "false"},
      {"augment.max_semitones", T::kInt, "15"},
      {"augment.crop_size", T::kInt, "16"},
      {"augment.min_scale", T::kReal, "0.7"},
      {"augment.jitter", T::kReal, "0.2"},
      {"augment.flip", T::kBool, "true"},
      {"framework.variant", T::kString, "simclr"},
      {"framework.tau", T::kReal, "0.1"},
      {"framework.momentum", T::kReal, "0.99"},
      {"framework.queue_size", T::kInt, "1024"},
      {"framework.embed_dim", T::kInt, "32"},
      {"framework.proj_dim", T::kInt, "128"},
      {"framework.pred_hidden", T::kInt, "64"},
      {"optimizer.base_lr", T::kReal, "0.1"},
      {"optimizer.momentum", T::kReal, "0.9"},
      {"optimizer.weight_decay", T::kReal, "0.0001"},
      {"optimizer.batch_size", T::kInt, "32"},
      {"optimizer.epochs", T::kInt, "50"},
      {"optimizer.warmup_epochs", T::kInt, "10"},
      {"probe.base_lr", T::kReal, "30"},
      {"probe.epochs", T::kInt, "30"},
      {"probe.batch_size", T::kInt, "64"},
      {"probe.momentum", T::kReal, "0.9"},
      {"probe.weight_decay", T::kReal, "0"},
      {"probe.standardize", T::kBool, "true"},
      {"eval.num_clips", T::kInt, "10"},
      {"eval.num_crops", T::kInt, "3"},
      {"eval.crop_fraction", T::kReal, "0.85"},
      {"ablate.kind", T::kString, ""},
      {"ablate.alpha", T::kString, ""},
      {"ablate.pair", T::kString, ""},
      {"ablate.location", T::kString, ""},
      {"ablate.alignment", T::kString, ""},
      {"ablate.streams", T::kString, ""},
      {"ablate.hop", T::kString, ""},
      {"ablate.sample_rate", T::kString, ""},
      {"ablate.fps", T::kString, ""},
      {"ablate.framework", T::kString, ""},
      {"ablate.epochs", T::kString, ""},
      {"ablate.seed", T::kString, ""},
      {"ablate.parallel", T::kInt, "1", false},
  };
  return keys;
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

const KeySpec& find_key(std::string_view key) {
  for (const auto& k : schema()) {
    if (k.key == key) return k;
  }
  throw ConfigError("unknown configuration key '" + std::string(key) + "'");
}

std::string normalize(const KeySpec& spec, std::string_view raw) {
  const std::string v = trim(raw);
  auto bad = [&](const char* what) -> ConfigError {
    return ConfigError("key '" + spec.key + "' expects " + what + ", got '" + v + "'");
  };
  switch (spec.type) {
    case ValueType::kInt: {
      long long x = 0;
      const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
      if (ec != std::errc() || p != v.data() + v.size() || v.empty()) throw bad("an integer");
      return std::to_string(x);
    }
    case ValueType::kReal: {
      double x = 0;
      const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
      if (ec != std::errc() || p != v.data() + v.size() || v.empty()) throw bad("a number");
      char buf[64];
      const auto r = std::to_chars(buf, buf + sizeof buf, x);
      return std::string(buf, r.ptr);
    }
    case ValueType::kBool: {
      std::string l = v;
      std::transform(l.begin(), l.end(), l.begin(), [](unsigned char c) { return std::tolower(c); });
      if (l == "true" || l == "1" || l == "yes" || l == "on") return "true";
      if (l == "false" || l == "0" || l == "no" || l == "off") return "false";
      throw bad("true or false");
    }
    case ValueType::kString:
      if (spec.key == "augment.pipeline") return augment::format_specs(augment::parse_specs(v));
      if (spec.key == "framework.variant") return std::string(variant_name(parse_variant(v)));
      return v;
  }
  return v;
}

std::string qualify(std::string_view dotted) {
  return dotted.find('.') == std::string_view::npos ? "run." + std::string(dotted) : std::string(dotted);
}

}  // namespace

Config::Config() {
  for (const auto& k : schema()) values_.emplace_back(k.key, normalize(k, k.default_value));
}

void Config::set(std::string_view dotted_key, std::string_view value) {
  const std::string key = qualify(dotted_key);
  const KeySpec& spec = find_key(key);
  const std::string v = normalize(spec, value);
  for (auto& [k, val] : values_) {
    if (k == key) val = v;
  }
}

Config Config::parse(std::string_view text, const std::string& origin) {
  Config cfg;
  std::string section = "run";
  std::istringstream is{std::string(text)};
  std::string line;
  for (std::size_t lineno = 1; std::getline(is, line); ++lineno) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto where = origin + ":" + std::to_string(lineno) + ": ";
    if (t.front() == '[') {
      if (t.back() != ']' || t.size() < 3) throw ConfigError(where + "malformed section header '" + t + "'");
      section = trim(std::string_view(t).substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value', got '" + t + "'");
    const std::string key = trim(std::string_view(t).substr(0, eq));
    if (key.empty() || key.front() == '.' || key.back() == '.') throw ConfigError(where + "bad key '" + key + "'");
    // Dotted keys are fully qualified, which makes the canonical form loadable.
    const bool qualified = key.find('.') != std::string::npos;
    try {
      cfg.set(qualified ? key : section + "." + key, std::string_view(t).substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  return cfg;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

void Config::apply_overrides(const std::vector<std::string>& args) {
  for (const auto& arg : args) {
    std::string_view a = arg;
    if (a.starts_with("--")) a.remove_prefix(2);
    const auto eq = a.find('=');
    if (eq == std::string_view::npos) throw ConfigError("override '" + arg + "' is not of the form --key=value");
    set(a.substr(0, eq), a.substr(eq + 1));
  }
}

const std::string& Config::get(std::string_view dotted_key) const {
  const std::string key = qualify(dotted_key);
  for (const auto& [k, v] : values_) {
    if (k == key) return v;
  }
  throw ConfigError("unknown configuration key '" + key + "'");
}

long long Config::get_int(std::string_view key) const { return std::stoll(get(key)); }
double Config::get_real(std::string_view key) const { return std::stod(get(key)); }
bool Config::get_bool(std::string_view key) const { return get(key) == "true"; }

std::string Config::canonical() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

std::string Config::hashed_form() const {
  std::string out;
  const auto& keys = schema();
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (keys[i].hashed) out += values_[i].first + " = " + values_[i].second + "\n";
  }
  return out;
}

std::string Config::hash() const {
  const std::string form = hashed_form();
  return hex64(fnv1a(form.data(), form.size()));
}

augment::Pipeline Experiment::pipeline() const {
  return augment::build_pipeline(augmentations, aligned, pretrain.seed, spatial);
}

Experiment materialize(const Config& cfg) {
  auto non_negative = [&](std::string_view key) {
    const long long v = cfg.get_int(key);
    if (v < 0) throw ConfigError("key '" + std::string(key) + "' must not be negative");
    return static_cast<std::size_t>(v);
  };
  Experiment e;
  e.config_hash = cfg.hash();
  e.data_dir = cfg.get("data.dir");
  e.output_dir = cfg.get("run.output_dir");
  const auto seed = static_cast<std::uint64_t>(cfg.get_int("run.seed"));

  e.data.num_videos = non_negative("data.num_videos");
  e.data.num_classes = non_negative("data.num_classes");
  e.data.video_seconds = cfg.get_real("data.video_seconds");
  e.data.fps = static_cast<int>(cfg.get_int("data.fps"));
  e.data.sample_rate = static_cast<int>(cfg.get_int("data.sample_rate"));
  e.data.frame_height = non_negative("data.frame_height");
  e.data.frame_width = non_negative("data.frame_width");
  e.data.seed = static_cast<std::uint64_t>(cfg.get_int("data.seed"));
  e.test_every = non_negative("data.test_every");
  if (e.test_every < 2) throw ConfigError("data.test_every must be at least 2");

  auto& p = e.pretrain;
  p.seed = seed;
  p.config_hash = e.config_hash;
  p.geometry.clip_seconds = cfg.get_real("clip.seconds");
  if (!(p.geometry.clip_seconds > 0.0)) throw ConfigError("clip.seconds must be positive");
  p.spectrogram.n_fft = non_negative("spectrogram.n_fft");
  p.spectrogram.hop = non_negative("spectrogram.hop");
  p.spectrogram.n_mels = non_negative("spectrogram.n_mels");
  p.spectrogram.f_min = cfg.get_real("spectrogram.f_min");
  p.spectrogram.f_max = cfg.get_real("spectrogram.f_max");
  p.spectrogram.log_floor = cfg.get_real("spectrogram.log_floor");
  p.spectrogram.validate(e.data.sample_rate);

  p.framework.variant = parse_variant(cfg.get("framework.variant"));
  p.framework.tau = cfg.get_real("framework.tau");
  p.framework.momentum = cfg.get_real("framework.momentum");
  p.framework.queue_size = non_negative("framework.queue_size");
  p.framework.encoder.embed_dim = non_negative("framework.embed_dim");
  p.framework.proj_dim = non_negative("framework.proj_dim");
  p.framework.pred_hidden = non_negative("framework.pred_hidden");
  p.framework.validate();

  p.optimizer.base_lr = cfg.get_real("optimizer.base_lr");
  p.optimizer.momentum = cfg.get_real("optimizer.momentum");
  p.optimizer.weight_decay = cfg.get_real("optimizer.weight_decay");
  p.batch_size = non_negative("optimizer.batch_size");
  p.epochs = non_negative("optimizer.epochs");
  p.warmup_epochs = non_negative("optimizer.warmup_epochs");
  if (p.batch_size < 2) throw ConfigError("optimizer.batch_size must be at least 2");
  if (p.epochs == 0) throw ConfigError("optimizer.epochs must be positive");

  e.probe.base_lr = cfg.get_real("probe.base_lr");
  e.probe.epochs = non_negative("probe.epochs");
  e.probe.batch_size = non_negative("probe.batch_size");
  e.probe.momentum = cfg.get_real("probe.momentum");
  e.probe.weight_decay = cfg.get_real("probe.weight_decay");
  e.probe.standardize = cfg.get_bool("probe.standardize");
  e.probe.seed = seed;
  if (e.probe.epochs == 0 || e.probe.batch_size == 0) throw ConfigError("probe epochs and batch size must be positive");

  e.augmentations = augment::parse_specs(cfg.get("augment.pipeline"));
  const auto semis = cfg.get_int("augment.max_semitones");
  for (auto& s : e.augmentations) s.max_semitones = static_cast<int>(semis);
  e.aligned = cfg.get_bool("augment.aligned");
  e.spatial.out_h = e.spatial.out_w = non_negative("augment.crop_size");
  e.spatial.min_scale = cfg.get_real("augment.min_scale");
  e.spatial.jitter = cfg.get_real("augment.jitter");
  e.spatial.allow_flip = cfg.get_bool("augment.flip");
  if (e.spatial.out_h == 0 || !(e.spatial.min_scale > 0.0 && e.spatial.min_scale <= 1.0)) {
    throw ConfigError("augment.crop_size must be positive and augment.min_scale in (0, 1]");
  }
  e.pipeline();  // validates the list

  e.eval.num_clips = non_negative("eval.num_clips");
  e.eval.num_crops = non_negative("eval.num_crops");
  e.eval.crop_fraction = cfg.get_real("eval.crop_fraction");
  e.eval.out_h = e.eval.out_w = e.spatial.out_h;
  if (e.eval.num_clips == 0 || e.eval.num_crops == 0) throw ConfigError("eval clip and crop counts must be positive");
  return e;
}

}  // namespace avcl::cli
