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

#include "cascadev/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <memory>
#include <mutex>
#include <thread>

#include "cascadev/errors.hpp"

namespace cascadev {

namespace {

std::string numbered(const char* prefix, size_t i) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%05zu.json", prefix, i);
  return buf;
}

uint64_t scene_seed(const RunConfig& cfg, size_t i) { return derive_seed(cfg.seed, {i}); }

fs::path scenes_dir(const fs::path& p) {
  return fs::is_directory(p / "scenes") ? p / "scenes" : p;
}

Json with_config(std::string_view kind, const RunConfig& cfg) {
  Json j = tagged(kind);
  j["config"] = config_to_json(cfg);
  j["config_hash"] = config_hash(cfg);
  return j;
}

}  // namespace

int worker_count() {
  if (const char* env = std::getenv("CASCADEV_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || n < 1) {
      throw ConfigError("CASCADEV_THREADS must be a positive integer");
    }
    return static_cast<int>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(size_t n, const std::function<void(size_t)>& fn) {
  const size_t workers = std::min<size_t>(n, static_cast<size_t>(worker_count()));
  std::vector<std::exception_ptr> errors(n);
  if (workers <= 1) {
    for (size_t i = 0; i < n; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
        break;
      }
    }
  } else {
    std::atomic<size_t> next{0};
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    for (size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (size_t i = next++; i < n && !failed; i = next++) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
            failed = true;
          }
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::kInvalidArgument:
    case ErrorKind::kConfig: return 2;
    case ErrorKind::kData: return 3;
    case ErrorKind::kNumerical: return 4;
  }
  return 1;
}

std::vector<fs::path> list_files(const fs::path& dir, const std::string& prefix) {
  if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (e.is_regular_file() && name.rfind(prefix, 0) == 0 && e.path().extension() == ".json") {
      out.push_back(e.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<SyntheticScene> load_scenes(const fs::path& scenes) {
  const auto files = list_files(scenes_dir(scenes), "scene_");
  if (files.empty()) throw EmptyInputError("no scene files under " + scenes.string());
  std::vector<SyntheticScene> out(files.size());
  parallel_for(files.size(), [&](size_t i) { out[i] = scene_from_json(read_json(files[i])); });
  return out;
}

void cmd_gen(const RunConfig& cfg, const fs::path& out) {
  cfg.validate();
  const auto n = static_cast<size_t>(cfg.num_scenes);
  Json manifest = with_config("manifest", cfg);
  Json entries = Json::array();
  for (size_t i = 0; i < n; ++i) {
    entries.push_back(Json{{"file", "scenes/" + numbered("scene", i)}, {"seed", scene_seed(cfg, i)}});
  }
  parallel_for(n, [&](size_t i) {
    const SyntheticScene scene = gen_scene(cfg.scene, scene_seed(cfg, i));
    write_json(out / "scenes" / numbered("scene", i), scene_to_json(scene));
  });
  manifest["scenes"] = std::move(entries);
  write_json(out / "manifest.json", manifest, 2);
}

void cmd_run(const fs::path& scenes, const RunConfig& cfg, const fs::path& out) {
  cfg.validate();
  const auto files = list_files(scenes_dir(scenes), "scene_");
  if (files.empty()) throw EmptyInputError("no scene files under " + scenes.string());

  std::unique_ptr<HeadPredictor> model;
  if (cfg.predictor == PredictorKind::kModel) {
    HeadParams params = model_from_json(read_json(cfg.model_path));
    if (static_cast<int>(params.stages.size()) != cfg.schedule.num_stages) {
      throw ConfigError("model stage count differs from the schedule");
    }
    model = std::make_unique<HeadPredictor>(std::move(params));
  }
  const int last = cfg.ensemble_last == 0 ? cfg.schedule.num_stages : cfg.ensemble_last;
  const CascadeOptions options{cfg.weighting};

  parallel_for(files.size(), [&](size_t i) {
    const SyntheticScene scene = scene_from_json(read_json(files[i]));
    OracleNoise noise = cfg.oracle;
    noise.seed = derive_seed(cfg.seed, {scene.seed});
    const OraclePredictor oracle = oracle_predictor(scene, noise);
    const Predictor& predictor = model ? static_cast<const Predictor&>(*model) : oracle;

    auto proposals = initial_proposals(scene.points, scene.features, predictor, cfg.proposals);
    const StageTrace trace = run_cascade(std::move(proposals), predictor, cfg.schedule,
                                         std::span<const OrientedBox>(scene.gt_boxes), options);
    const auto dets = ensemble_stages(trace, cfg.ensemble_first, last, cfg.nms_iou, cfg.iou);
    write_json(out / "traces" / numbered("trace", i), trace_to_json(trace, scene.seed));
    write_json(out / "detections" / numbered("detections", i),
               detections_to_json(dets, scene.gt_boxes, scene.seed));
  });

  Json run = with_config("run", cfg);
  Json names = Json::array();
  for (const auto& f : files) names.push_back(f.filename().string());
  run["scenes"] = std::move(names);
  write_json(out / "run.json", run, 2);
}

ApResult cmd_eval(const fs::path& run_dir, const RunConfig& cfg, const fs::path& out) {
  cfg.validate();
  const auto det_files = list_files(run_dir / "detections", "detections_");
  if (det_files.empty()) throw EmptyInputError("no detection files under " + run_dir.string());
  const auto trace_files = list_files(run_dir / "traces", "trace_");

  std::vector<EvalScene> scenes(det_files.size());
  parallel_for(scenes.size(), [&](size_t i) { scenes[i] = detections_from_json(read_json(det_files[i])); });
  std::vector<StageTrace> traces(trace_files.size());
  parallel_for(traces.size(), [&](size_t i) { traces[i] = trace_from_json(read_json(trace_files[i])); });

  const ApOptions options{cfg.iou, cfg.ap};
  ApResult result = average_precision(scenes, cfg.iou_thresholds, options);
  write_json(out / "ap_result.json", ap_result_to_json(result, options), 2);
  if (!traces.empty()) write_text(out / "cascade_stats.csv", stats_csv(cascade_stats(traces)));
  return result;
}

TrainResult cmd_train(const fs::path& scenes, const RunConfig& cfg, const fs::path& out) {
  cfg.validate();
  const auto data = load_scenes(scenes);
  TrainConfig t = cfg.train;
  t.seed = cfg.seed;
  t.proposals = cfg.proposals;
  t.weighting = cfg.weighting;
  TrainResult result = train_cascade(data, cfg.schedule, t);
  write_json(out / "model.json", model_to_json(result.params), 1);
  write_text(out / "loss_history.csv", loss_history_csv(result.history, t.loss));
  return result;
}

}  // namespace cascadev
