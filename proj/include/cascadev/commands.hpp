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

// Subcommands behind the cascadev executable.

#ifndef CASCADEV_COMMANDS_HPP_
#define CASCADEV_COMMANDS_HPP_

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "cascadev/config.hpp"
#include "cascadev/errors.hpp"

namespace cascadev {

namespace fs = std::filesystem;

// Writes <out>/scenes/scene_NNNNN.json and <out>/manifest.json.
void cmd_gen(const RunConfig& cfg, const fs::path& out);

// Scenes are read from <scenes>/scenes (when present) or <scenes> itself.
// Writes traces/, detections/ and run.json under `out`.
void cmd_run(const fs::path& scenes, const RunConfig& cfg, const fs::path& out);

// Reads a run directory, writes ap_result.json and cascade_stats.csv.
ApResult cmd_eval(const fs::path& run_dir, const RunConfig& cfg, const fs::path& out);

// Writes model.json and loss_history.csv.
TrainResult cmd_train(const fs::path& scenes, const RunConfig& cfg, const fs::path& out);

std::vector<fs::path> list_files(const fs::path& dir, const std::string& prefix);
std::vector<SyntheticScene> load_scenes(const fs::path& scenes);

// Worker count: CASCADEV_THREADS when set, else the hardware concurrency.
int worker_count();

// Runs fn(i) for i in [0, n). The exception of the lowest failing index is
// rethrown.
void parallel_for(size_t n, const std::function<void(size_t)>& fn);

// 0 success, 2 configuration, 3 data, 4 numerical.
int exit_code_for(const Error& e);

}  // namespace cascadev

#endif  // CASCADEV_COMMANDS_HPP_
