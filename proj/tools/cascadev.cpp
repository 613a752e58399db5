/* Copyright 2026 The CascadeV Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cascadev/commands.hpp"
#include "cascadev/errors.hpp"

namespace {

using cascadev::RunConfig;

struct Overrides {
  std::string config;
  std::optional<uint64_t> seed;
  std::optional<int> stages;
  std::optional<double> mu_max;
  std::optional<double> mu_min;
  std::optional<std::string> weighting;
  std::optional<std::string> iou;
  std::optional<std::string> ap;
  std::optional<int> num_scenes;
  std::optional<int> proposals;
  std::optional<std::string> model;
  std::optional<double> sigma_delta;
  std::optional<int> steps;
};

void add_common(CLI::App* cmd, Overrides& o, std::string& out) {
  cmd->add_option("--config", o.config, "JSON config file (or a manifest)");
  cmd->add_option("--out", out, "Output directory")->required();
  cmd->add_option("--seed", o.seed, "Master seed");
  cmd->add_option("--stages", o.stages, "Number of cascade stages L");
  cmd->add_option("--mu-max", o.mu_max, "CPA threshold at stage 0");
  cmd->add_option("--mu-min", o.mu_min, "CPA threshold at stage L");
  cmd->add_option("--weighting", o.weighting, "exp_neg_dist | literal");
  cmd->add_option("--iou", o.iou, "rotated | aabb");
  cmd->add_option("--ap", o.ap, "continuous | 11point");
}

RunConfig resolve(const Overrides& o) {
  RunConfig cfg = o.config.empty() ? RunConfig{} : cascadev::load_config(o.config);
  cascadev::Json j = cascadev::config_to_json(cfg);
  if (o.seed) j["seed"] = *o.seed;
  if (o.stages) j["schedule"]["num_stages"] = *o.stages;
  if (o.mu_max) j["schedule"]["mu_max"] = *o.mu_max;
  if (o.mu_min) j["schedule"]["mu_min"] = *o.mu_min;
  if (o.weighting) j["weighting"] = *o.weighting;
  if (o.iou) j["iou"] = *o.iou;
  if (o.ap) j["ap"] = *o.ap;
  if (o.num_scenes) j["num_scenes"] = *o.num_scenes;
  if (o.proposals) j["proposals"] = *o.proposals;
  if (o.model) {
    j["predictor"]["kind"] = "model";
    j["predictor"]["model_path"] = *o.model;
  }
  if (o.sigma_delta) j["predictor"]["sigma_delta"] = *o.sigma_delta;
  if (o.steps) j["train"]["steps"] = *o.steps;
  cfg = cascadev::config_from_json(j);
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cascade voting detector toolkit"};
  app.require_subcommand(1);
  Overrides o;
  std::string out;
  std::string input;

  auto* gen = app.add_subcommand("gen", "Generate synthetic scenes and a manifest");
  add_common(gen, o, out);
  gen->add_option("--num-scenes", o.num_scenes, "Number of scenes");

  auto* run = app.add_subcommand("run", "Run the cascade over scenes");
  add_common(run, o, out);
  run->add_option("scenes", input, "Scene directory")->required();
  run->add_option("--proposals", o.proposals, "Proposals per scene (B)");
  run->add_option("--model", o.model, "Trained model JSON (default: oracle predictor)");
  run->add_option("--sigma-delta", o.sigma_delta, "Oracle relative delta noise");

  auto* eval = app.add_subcommand("eval", "Compute AP and cascade statistics for a run");
  add_common(eval, o, out);
  eval->add_option("run_dir", input, "Directory written by 'run'")->required();

  auto* train = app.add_subcommand("train", "Train the stage heads");
  add_common(train, o, out);
  train->add_option("scenes", input, "Scene directory")->required();
  train->add_option("--steps", o.steps, "SGD steps");
  train->add_option("--proposals", o.proposals, "Proposals per scene (B)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    const RunConfig cfg = resolve(o);
    if (gen->parsed()) {
      cascadev::cmd_gen(cfg, out);
      std::printf("wrote %d scenes to %s\n", cfg.num_scenes, out.c_str());
    } else if (run->parsed()) {
      cascadev::cmd_run(input, cfg, out);
      std::printf("wrote traces and detections to %s\n", out.c_str());
    } else if (eval->parsed()) {
      const cascadev::ApResult r = cascadev::cmd_eval(input, cfg, out);
      for (const auto& t : r.thresholds) std::printf("mAP@%.2f = %.4f\n", t.iou_threshold, t.map);
    } else if (train->parsed()) {
      const cascadev::TrainResult r = cascadev::cmd_train(input, cfg, out);
      std::printf("trained %zu steps, final loss %.6f\n", r.history.size(),
                  r.history.empty() ? 0.0 : r.history.back().total);
    }
  } catch (const cascadev::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return cascadev::exit_code_for(e);
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
