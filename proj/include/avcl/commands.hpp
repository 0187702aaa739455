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
#include <exception>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "avcl/config.hpp"
#include "avcl/trainer.hpp"

namespace avcl::cli {

enum ExitCode : int { kOk = 0, kOther = 1, kConfigFailure = 2, kDataFailure = 3, kNumericFailure = 4 };

/// Maps library errors onto process exit codes.
int exit_code_for(const std::exception& e);

struct RunPaths {
  std::filesystem::path checkpoint, metrics, evals, probe, config;
};
RunPaths run_paths(const Experiment& e);

/// Loads the dataset directory when it was generated from the same data
/// settings, otherwise generates the dataset in memory.
Dataset obtain_dataset(const Config& cfg);

void cmd_gen_data(const Config& cfg, std::ostream& log);

struct PretrainOptions {
  bool resume = true;
  std::size_t stop_after_step = std::numeric_limits<std::size_t>::max();
};
TrainState cmd_pretrain(const Config& cfg, const PretrainOptions& opts, std::ostream& log);
LinearProbe cmd_probe(const Config& cfg, std::ostream& log);
EvalResult cmd_eval(const Config& cfg, std::ostream& log);
void cmd_augment_preview(const Config& cfg, std::size_t video, std::uint64_t epoch,
                         const std::filesystem::path& out_dir, std::ostream& out);

// -- ablation grids ------------------------------------------------------------------------

/// Grid axes: kind, alpha, pair, location, alignment, streams, hop,
/// sample_rate, fps, framework, epochs, seed.
struct Axis {
  std::string name;
  std::vector<std::string> values;
};
std::vector<Axis> grid_axes(const Config& cfg);

struct Cell {
  std::size_t index = 0;
  std::vector<std::pair<std::string, std::string>> values;  // axis name -> value
  Config config;
};

/// Cartesian product of the axes. A pair axis over kinds K expands to the
/// |K|×|K| ordered pairs (diagonal = single kind) plus the no-augmentation
/// control when "none" is listed.
std::vector<Cell> expand_grid(const Config& base);

struct CellResult {
  double top1 = 0.0;
  std::optional<double> top5;
  std::uint64_t seed = 0;
  double runtime_seconds = 0.0;
};
using CellRunner = std::function<CellResult(const Cell&, const std::filesystem::path& dir)>;

/// Pretrain, probe and evaluate one cell inside `dir`.
CellResult run_cell(const Cell& cell, const std::filesystem::path& dir);

struct AblationReport {
  std::string rows_csv;
  std::string matrix_csv;  // pair grids only
};

/// Runs every cell (in `parallel` worker processes when > 1) and writes
/// ablation.csv, plus matrix.csv for pair grids, to the output directory.
AblationReport cmd_ablate(const Config& base, const CellRunner& runner, std::size_t parallel, std::ostream& log);

}  // namespace avcl::cli
