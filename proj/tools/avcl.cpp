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

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "avcl/commands.hpp"
#include "avcl/config.hpp"
#include "avcl/error.hpp"

namespace {

using avcl::cli::Config;

Config resolve_config(const std::string& path, const std::vector<std::string>& overrides) {
  Config cfg = path.empty() ? Config() : Config::load(path);
  cfg.apply_overrides(overrides);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Audiovisual contrastive learning with temporal augmentations"};
  app.require_subcommand(1);

  std::string config_path;
  auto add = [&](const std::string& name, const std::string& help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("-c,--config", config_path, "configuration file");
    sub->allow_extras();
    sub->footer("Any key may be overridden as --section.key=value.");
    return sub;
  };

  CLI::App* gen = add("gen-data", "generate the synthetic dataset directory");
  CLI::App* pre = add("pretrain", "self-supervised pretraining (resumes from an existing checkpoint)");
  bool fresh = false;
  std::size_t stop_after = static_cast<std::size_t>(-1);
  pre->add_flag("--fresh", fresh, "ignore an existing checkpoint");
  pre->add_option("--stop-after-step", stop_after, "stop once this many optimizer steps are done");
  CLI::App* probe = add("probe", "train the linear probe on frozen features");
  CLI::App* eval = add("eval", "10-clip x 3-crop evaluation of the probe");
  CLI::App* ablate = add("ablate", "run an ablation grid and write CSV tables");
  std::size_t parallel = 0;
  ablate->add_option("--parallel", parallel, "worker processes (default: ablate.parallel)");
  CLI::App* preview = add("augment-preview", "print the augmentations drawn for one training pair");
  std::size_t video = 0;
  std::uint64_t epoch = 0;
  std::string preview_out;
  preview->add_option("--video", video, "training video index");
  preview->add_option("--epoch", epoch, "epoch");
  preview->add_option("--out", preview_out, "directory for the augmented clips as AVT1 tensors");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : avcl::cli::kConfigFailure;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    const Config cfg = resolve_config(config_path, sub->remaining());
    if (sub == gen) {
      avcl::cli::cmd_gen_data(cfg, std::cout);
    } else if (sub == pre) {
      avcl::cli::cmd_pretrain(cfg, {!fresh, stop_after}, std::cout);
    } else if (sub == probe) {
      avcl::cli::cmd_probe(cfg, std::cout);
    } else if (sub == eval) {
      avcl::cli::cmd_eval(cfg, std::cout);
    } else if (sub == ablate) {
      const std::size_t workers = parallel ? parallel : static_cast<std::size_t>(cfg.get_int("ablate.parallel"));
      const auto report = avcl::cli::cmd_ablate(cfg, avcl::cli::run_cell, workers, std::cerr);
      std::cout << report.rows_csv;
      if (!report.matrix_csv.empty()) std::cout << "\n" << report.matrix_csv;
    } else if (sub == preview) {
      avcl::cli::cmd_augment_preview(cfg, video, epoch, preview_out, std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return avcl::cli::exit_code_for(e);
  }
  return 0;
}
