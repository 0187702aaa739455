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

#include "avcl/commands.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "avcl/error.hpp"
#include "avcl/tensor_io.hpp"

namespace avcl::cli {

namespace fs = std::filesystem;

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return kConfigFailure;
  if (dynamic_cast<const DataError*>(&e)) return kDataFailure;
  if (dynamic_cast<const NumericError*>(&e)) return kNumericFailure;
  return kOther;
}

RunPaths run_paths(const Experiment& e) {
  const fs::path& d = e.output_dir;
  return {d / "checkpoint.avc", d / "metrics.tsv", d / "eval.jsonl", d / "probe.avc", d / "config.txt"};
}

namespace {

std::string data_signature(const Config& cfg) {
  std::string s;
  for (const auto& [k, v] : cfg.entries()) {
    if (k.starts_with("data.") && k != "data.dir") s += k + " = " + v + "\n";
  }
  return s;
}

void write_text(const fs::path& path, const std::string& text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::trunc);
    if (!os) throw DataError("cannot write " + tmp.string());
    os << text;
  }
  fs::rename(tmp, path);
}

std::string read_text(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot read " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

struct Prepared {
  Experiment exp;
  Dataset train, test;
};

Prepared prepare(const Config& cfg) {
  Prepared p{materialize(cfg), {}, {}};
  auto [train, test] = split_dataset(obtain_dataset(cfg), p.exp.test_every);
  p.train = std::move(train);
  p.test = std::move(test);
  return p;
}

void write_config_copy(const Experiment& e, const Config& cfg) {
  fs::create_directories(e.output_dir);
  write_text(run_paths(e).config, "# config_hash = " + e.config_hash + "\n" + cfg.canonical());
}

TrainState restore_finished(const Prepared& p) {
  TrainState state = init_train_state(p.exp.pretrain, p.train.size());
  const auto paths = run_paths(p.exp);
  if (!fs::exists(paths.checkpoint)) throw DataError("no checkpoint at " + paths.checkpoint.string());
  load_checkpoint(paths.checkpoint, state);
  if (state.step != p.exp.pretrain.total_steps(p.train.size())) {
    throw DataError("checkpoint " + paths.checkpoint.string() + " stops at step " + std::to_string(state.step) +
                    "; finish pretraining first");
  }
  return state;
}

}  // namespace

Dataset obtain_dataset(const Config& cfg) {
  const Experiment e = materialize(cfg);
  const fs::path signature = e.data_dir / "generator.txt";
  if (fs::exists(e.data_dir / "manifest.txt") && fs::exists(signature) &&
      read_text(signature) == data_signature(cfg)) {
    return load_dataset(e.data_dir);
  }
  return generate_synthetic_dataset(e.data);
}

void cmd_gen_data(const Config& cfg, std::ostream& log) {
  const Experiment e = materialize(cfg);
  const Dataset ds = generate_synthetic_dataset(e.data);
  save_dataset(ds, e.data_dir);
  write_text(e.data_dir / "generator.txt", data_signature(cfg));
  log << "wrote " << ds.size() << " videos of " << ds.num_classes << " classes to " << e.data_dir.string() << "\n";
}

TrainState cmd_pretrain(const Config& cfg, const PretrainOptions& opts, std::ostream& log) {
  const Prepared p = prepare(cfg);
  const auto paths = run_paths(p.exp);
  write_config_copy(p.exp, cfg);
  const PretrainConfig& pc = p.exp.pretrain;
  TrainState state = init_train_state(pc, p.train.size());
  if (opts.resume && fs::exists(paths.checkpoint)) {
    load_checkpoint(paths.checkpoint, state);
    log << "resuming from step " << state.step << "\n";
  }

  // The metrics log is rebuilt from the checkpointed trace so a resumed run
  // produces the same file as an uninterrupted one.
  const ScheduleConfig schedule = pc.schedule(p.train.size());
  std::ofstream metrics(paths.metrics, std::ios::trunc);
  if (!metrics) throw DataError("cannot write " + paths.metrics.string());
  metrics << "step\tepoch\tlr\tloss\n";
  for (std::size_t s = 0; s < state.loss_trace.size(); ++s) {
    metrics << format_step_line({s, s / state.steps_per_epoch, lr_at(s, schedule), state.loss_trace[s]}) << "\n";
  }

  const augment::Pipeline pipeline = p.exp.pipeline();
  const std::size_t total = pc.total_steps(p.train.size());
  const std::size_t stop = std::min(opts.stop_after_step, total);
  while (state.step < stop) {
    const std::size_t epoch_end = std::min(stop, (state.epoch() + 1) * state.steps_per_epoch);
    pretrain(state, p.train, pc, pipeline, epoch_end,
             [&](const StepRecord& r) { metrics << format_step_line(r) << "\n"; });
    metrics.flush();
    save_checkpoint(state, paths.checkpoint);
    log << "epoch " << state.epoch() << "/" << pc.epochs << " step " << state.step << " loss "
        << state.loss_trace.back() << "\n";
  }
  return state;
}

LinearProbe cmd_probe(const Config& cfg, std::ostream& log) {
  const Prepared p = prepare(cfg);
  TrainState state = restore_finished(p);
  const augment::Pipeline domain = p.exp.pipeline().domain_only();
  const auto before = nn::parameter_hash(state.model.encoder_parameters());
  LinearProbe probe =
      train_probe(state.model, p.train, p.exp.probe, domain, p.exp.pretrain.geometry, p.exp.pretrain.spectrogram);
  if (nn::parameter_hash(state.model.encoder_parameters()) != before) {
    throw NumericError("probe training modified the encoder");
  }
  save_probe(probe, p.exp.config_hash, run_paths(p.exp).probe);
  log << "probe trained on " << p.train.size() << " videos with pipeline '" << augment::format_specs(domain.specs())
      << "', encoder hash " << hex64(before) << "\n";
  return probe;
}

EvalResult cmd_eval(const Config& cfg, std::ostream& log) {
  const Prepared p = prepare(cfg);
  TrainState state = restore_finished(p);
  const auto paths = run_paths(p.exp);
  std::string probe_hash;
  const LinearProbe probe = load_probe(paths.probe, &probe_hash);
  if (probe_hash != p.exp.config_hash) {
    throw ConfigError("probe " + paths.probe.string() + " belongs to config " + probe_hash);
  }
  const EvalResult r =
      evaluate(state.model, probe, p.test, p.exp.pretrain.geometry, p.exp.pretrain.spectrogram, p.exp.eval);
  const std::string record = format_eval_record(state.epoch(), r, p.exp.config_hash);
  write_text(paths.evals, record + "\n");
  log << record << "\n";
  return r;
}

void cmd_augment_preview(const Config& cfg, std::size_t video, std::uint64_t epoch, const fs::path& out_dir,
                         std::ostream& out) {
  const Prepared p = prepare(cfg);
  if (video >= p.train.size()) {
    throw ConfigError("video index " + std::to_string(video) + " outside the " + std::to_string(p.train.size()) +
                      " training videos");
  }
  const augment::Pipeline pipeline = p.exp.pipeline();
  const SourceVideo& src = p.train.videos[video];
  Rng rng = substream({p.exp.pretrain.seed, video, epoch, 0x9a12});
  const ClipPairSampler sampler(p.exp.pretrain.geometry);
  const PairDraw draw = sampler.draw(src, rng);
  out << "video\t" << src.id << "\tlabel " << src.label << "\n";
  out << "pair\tinterval " << draw.interval << " s\tframes " << draw.first_frame << " -> " << draw.second_frame
      << "\n";
  const std::size_t starts[] = {draw.first_frame, draw.second_frame};
  for (std::size_t c = 0; c < 2; ++c) {
    const auto result = pipeline.apply(extract_clip(src, starts[c], p.exp.pretrain.geometry), {video, c, epoch});
    for (const auto& a : result.log) out << "clip" << c << '\t' << augment::describe(a) << "\n";
    if (!out_dir.empty()) {
      fs::create_directories(out_dir);
      const std::string stem = "clip" + std::to_string(c);
      save_tensor(out_dir / (stem + ".audio.avt"), result.clip.audio.samples);
      save_tensor(out_dir / (stem + ".frames.avt"), result.clip.video.frames);
    }
  }
}

// -- ablation grids ------------------------------------------------------------------------

namespace {

const char* const kAxisNames[] = {"kind",        "alpha", "pair",      "location", "alignment", "streams",
                                  "hop",         "sample_rate", "fps", "framework", "epochs",   "seed"};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    out.push_back(item.substr(b, item.find_last_not_of(" \t") - b + 1));
  }
  return out;
}

void check_axis_value(const std::string& axis, const std::string& v) {
  auto fail = [&]() { throw ConfigError("ablate." + axis + ": invalid value '" + v + "'"); };
  if (axis == "kind") {
    if (!augment::is_temporal(augment::parse_kind(v))) fail();
  } else if (axis == "pair") {
    if (v != "none" && !augment::is_temporal(augment::parse_kind(v))) fail();
  } else if (axis == "location") {
    if (v != "before" && v != "after") fail();
  } else if (axis == "alignment") {
    if (v != "aligned" && v != "independent") fail();
  } else if (axis == "streams") {
    if (v != "both" && v != "audio" && v != "video") fail();
  } else if (axis == "framework") {
    parse_variant(v);
  }
}

std::string join_specs_with(const std::vector<augment::AugmentationSpec>& base,
                            const std::vector<augment::AugmentationSpec>& temporal) {
  std::vector<augment::AugmentationSpec> out;
  for (const auto& s : base) {
    if (!augment::is_temporal(s.kind)) out.push_back(s);
  }
  out.insert(out.end(), temporal.begin(), temporal.end());
  return augment::format_specs(out);
}

double base_alpha(const std::vector<augment::AugmentationSpec>& specs, augment::Kind kind) {
  for (const auto& s : specs) {
    if (s.kind == kind) return s.alpha;
  }
  return 0.5;
}

Config cell_config(const Config& base, const std::vector<std::pair<std::string, std::string>>& values,
                   const fs::path& dir) {
  Config c = base;
  for (const char* axis : kAxisNames) c.set(std::string("ablate.") + axis, "");
  c.set("run.output_dir", dir.string());
  std::map<std::string, std::string> v(values.begin(), values.end());

  auto specs = augment::parse_specs(c.get("augment.pipeline"));
  const std::optional<double> alpha = v.count("alpha") ? std::optional(std::stod(v["alpha"])) : std::nullopt;
  auto make = [&](augment::Kind k) {
    augment::AugmentationSpec s;
    s.kind = k;
    s.alpha = alpha.value_or(base_alpha(specs, k));
    return s;
  };
  if (v.count("kind")) {
    specs = augment::parse_specs(join_specs_with(specs, {make(augment::parse_kind(v["kind"]))}));
  }
  if (v.count("pair")) {
    std::vector<augment::AugmentationSpec> temporal;
    if (v["pair"] != "none") {
      const auto sep = v["pair"].find('>');
      temporal.push_back(make(augment::parse_kind(v["pair"].substr(0, sep))));
      if (sep != std::string::npos) temporal.push_back(make(augment::parse_kind(v["pair"].substr(sep + 1))));
    }
    specs = augment::parse_specs(join_specs_with(specs, temporal));
  }
  for (auto& s : specs) {
    if (alpha && augment::is_temporal(s.kind)) s.alpha = *alpha;
    if (v.count("location") && augment::is_audio_domain(s.kind)) {
      s.placement = v["location"] == "after" ? augment::Placement::kAfterTemporal : augment::Placement::kBeforeTemporal;
    }
    if (v.count("streams") && augment::is_temporal(s.kind)) {
      s.streams = v["streams"] == "audio"   ? augment::Streams::kAudioOnly
                  : v["streams"] == "video" ? augment::Streams::kVideoOnly
                                            : augment::Streams::kBoth;
    }
  }
  c.set("augment.pipeline", augment::format_specs(specs));
  if (v.count("alignment")) c.set("augment.aligned", v["alignment"] == "aligned" ? "true" : "false");
  if (v.count("hop")) c.set("spectrogram.hop", v["hop"]);
  if (v.count("sample_rate")) c.set("data.sample_rate", v["sample_rate"]);
  if (v.count("fps")) c.set("data.fps", v["fps"]);
  if (v.count("framework")) c.set("framework.variant", v["framework"]);
  if (v.count("epochs")) c.set("optimizer.epochs", v["epochs"]);
  if (v.count("seed")) c.set("run.seed", v["seed"]);
  materialize(c);  // rejects cells that do not form a valid run
  return c;
}

std::string cell_name(std::size_t index) {
  std::ostringstream os;
  os << "cell" << std::setw(3) << std::setfill('0') << index;
  return os.str();
}

std::string format_real(double x) {
  std::ostringstream os;
  os << std::setprecision(6) << x;
  return os.str();
}

void write_result(const fs::path& path, const CellResult& r) {
  std::ostringstream os;
  os << std::setprecision(17) << r.top1 << ' ' << (r.top5 ? format_real(*r.top5) : "-") << ' ' << r.seed << ' '
     << r.runtime_seconds << "\n";
  write_text(path, os.str());
}

CellResult read_result(const fs::path& path) {
  std::istringstream is(read_text(path));
  CellResult r;
  std::string top5;
  if (!(is >> r.top1 >> top5 >> r.seed >> r.runtime_seconds)) throw DataError("malformed cell result " + path.string());
  if (top5 != "-") r.top5 = std::stod(top5);
  return r;
}

}  // namespace

std::vector<Axis> grid_axes(const Config& cfg) {
  std::vector<Axis> axes;
  for (const char* name : kAxisNames) {
    const auto values = split_list(cfg.get(std::string("ablate.") + name));
    if (values.empty()) continue;
    for (const auto& v : values) check_axis_value(name, v);
    axes.push_back({name, values});
  }
  const bool has_kind = std::any_of(axes.begin(), axes.end(), [](const Axis& a) { return a.name == "kind"; });
  const bool has_pair = std::any_of(axes.begin(), axes.end(), [](const Axis& a) { return a.name == "pair"; });
  if (has_kind && has_pair) throw ConfigError("ablate: the kind and pair axes are mutually exclusive");
  return axes;
}

std::vector<Cell> expand_grid(const Config& base) {
  std::vector<Axis> axes = grid_axes(base);
  if (axes.empty()) return {};
  for (auto& a : axes) {
    if (a.name != "pair") continue;
    std::vector<std::string> kinds, expanded;
    bool control = false;
    for (const auto& v : a.values) {
      if (v == "none") {
        control = true;
      } else {
        kinds.push_back(std::string(augment::kind_name(augment::parse_kind(v))));
      }
    }
    for (const auto& r : kinds) {
      for (const auto& c : kinds) expanded.push_back(r == c ? r : r + ">" + c);
    }
    if (control) expanded.push_back("none");
    a.values = expanded;
  }
  const fs::path root = fs::path(base.get("run.output_dir")) / "cells";
  std::vector<Cell> cells;
  std::vector<std::size_t> idx(axes.size(), 0);
  while (true) {
    Cell cell;
    cell.index = cells.size();
    for (std::size_t i = 0; i < axes.size(); ++i) cell.values.emplace_back(axes[i].name, axes[i].values[idx[i]]);
    cell.config = cell_config(base, cell.values, root / cell_name(cell.index));
    cells.push_back(std::move(cell));
    std::size_t i = axes.size();
    while (i > 0 && ++idx[i - 1] == axes[i - 1].values.size()) idx[--i] = 0;
    if (i == 0) break;
  }
  return cells;
}

CellResult run_cell(const Cell& cell, const fs::path& dir) {
  const auto t0 = std::chrono::steady_clock::now();
  Config cfg = cell.config;
  cfg.set("run.output_dir", dir.string());
  std::ostringstream log;
  cmd_pretrain(cfg, {}, log);
  cmd_probe(cfg, log);
  const EvalResult r = cmd_eval(cfg, log);
  write_text(dir / "log.txt", log.str());
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {r.top1, r.top5, static_cast<std::uint64_t>(cfg.get_int("run.seed")), secs};
}

AblationReport cmd_ablate(const Config& base, const CellRunner& runner, std::size_t parallel, std::ostream& log) {
  const auto axes = grid_axes(base);
  const auto cells = expand_grid(base);
  const fs::path out = base.get("run.output_dir");
  fs::create_directories(out);

  std::vector<CellResult> results(cells.size());
  auto dir_of = [&](const Cell& c) { return fs::path(c.config.get("run.output_dir")); };
  if (parallel <= 1) {
    for (const auto& c : cells) {
      fs::create_directories(dir_of(c));
      results[c.index] = runner(c, dir_of(c));
      log << cell_name(c.index) << " top1 " << results[c.index].top1 << "\n";
    }
  } else {
    // Independent worker processes; each writes its result into its own cell directory.
    std::size_t next = 0, running = 0;
    std::map<pid_t, std::size_t> jobs;
    bool failed = false;
    while (next < cells.size() || running > 0) {
      while (!failed && running < parallel && next < cells.size()) {
        const Cell& c = cells[next];
        fs::create_directories(dir_of(c));
        log.flush();
        const pid_t pid = fork();
        if (pid < 0) throw Error("ablate: fork failed");
        if (pid == 0) {
          int code = kOk;
          try {
            write_result(dir_of(c) / "result.txt", runner(c, dir_of(c)));
          } catch (const std::exception& e) {
            std::ofstream(dir_of(c) / "error.txt") << e.what() << "\n";
            code = exit_code_for(e);
          }
          _exit(code);
        }
        jobs[pid] = next++;
        ++running;
      }
      if (running == 0) break;
      int status = 0;
      const pid_t done = wait(&status);
      if (done < 0) throw Error("ablate: wait failed");
      --running;
      const std::size_t i = jobs.at(done);
      if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
        failed = true;
        log << cell_name(i) << " failed\n";
        continue;
      }
      results[i] = read_result(dir_of(cells[i]) / "result.txt");
      log << cell_name(i) << " top1 " << results[i].top1 << "\n";
    }
    if (failed) throw Error("ablate: at least one cell failed; see error.txt in its directory");
  }

  AblationReport report;
  std::ostringstream csv;
  csv << "cell";
  for (const auto& a : axes) csv << ',' << a.name;
  csv << ",top1,top5,seed,runtime_s\n";
  for (const auto& c : cells) {
    const auto& r = results[c.index];
    csv << cell_name(c.index);
    for (const auto& [name, value] : c.values) csv << ',' << value;
    csv << ',' << format_real(r.top1) << ',' << (r.top5 ? format_real(*r.top5) : "") << ',' << r.seed << ','
        << format_real(r.runtime_seconds) << "\n";
  }
  report.rows_csv = csv.str();
  write_text(out / "ablation.csv", report.rows_csv);

  const auto pair_axis = std::find_if(axes.begin(), axes.end(), [](const Axis& a) { return a.name == "pair"; });
  if (pair_axis != axes.end()) {
    std::vector<std::string> kinds;
    bool control = false;
    for (const auto& v : pair_axis->values) {
      if (v == "none") {
        control = true;
      } else {
        kinds.push_back(std::string(augment::kind_name(augment::parse_kind(v))));
      }
    }
    // Mean top-1 per pair value, pooled over any other axes.
    std::map<std::string, std::pair<double, std::size_t>> acc;
    for (const auto& c : cells) {
      for (const auto& [name, value] : c.values) {
        if (name != "pair") continue;
        acc[value].first += results[c.index].top1;
        acc[value].second += 1;
      }
    }
    auto mean_of = [&](const std::string& key) { return acc[key].first / static_cast<double>(acc[key].second); };
    const std::size_t k = kinds.size();
    std::vector<std::vector<double>> m(k, std::vector<double>(k));
    for (std::size_t r = 0; r < k; ++r)
      for (std::size_t c = 0; c < k; ++c) m[r][c] = mean_of(r == c ? kinds[r] : kinds[r] + ">" + kinds[c]);
    std::ostringstream mc;
    mc << "first\\second";
    for (const auto& kind : kinds) mc << ',' << kind;
    mc << ",avg\n";
    for (std::size_t r = 0; r < k; ++r) {
      mc << kinds[r];
      double sum = 0.0;
      for (std::size_t c = 0; c < k; ++c) {
        mc << ',' << format_real(m[r][c]);
        sum += m[r][c];
      }
      mc << ',' << format_real(sum / static_cast<double>(k)) << "\n";
    }
    mc << "avg";
    for (std::size_t c = 0; c < k; ++c) {
      double sum = 0.0;
      for (std::size_t r = 0; r < k; ++r) sum += m[r][c];
      mc << ',' << format_real(sum / static_cast<double>(k));
    }
    mc << ',' << (control ? format_real(mean_of("none")) : "") << "\n";
    report.matrix_csv = mc.str();
    write_text(out / "matrix.csv", report.matrix_csv);
  }
  return report;
}

}  // namespace avcl::cli
