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

// JSON and CSV serialization of scenes, traces, models and reports.
//
// Every JSON artifact carries "schema_version" ("<major>.<minor>") and a
// "kind" tag. Readers reject other major versions and mismatched kinds.

#ifndef CASCADEV_IO_HPP_
#define CASCADEV_IO_HPP_

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cascadev/cascade.hpp"
#include "cascadev/eval.hpp"
#include "cascadev/learner.hpp"
#include "cascadev/synth.hpp"

namespace cascadev {

inline constexpr int kSchemaMajor = 1;
inline constexpr std::string_view kSchemaVersion = "1.0";

using Json = nlohmann::json;

void to_json(Json& j, const Point3& p);
void from_json(const Json& j, Point3& p);
void to_json(Json& j, const OrientedBox& b);
void from_json(const Json& j, OrientedBox& b);
void to_json(Json& j, const Deltas& d);
void from_json(const Json& j, Deltas& d);
void to_json(Json& j, const Detection& d);
void from_json(const Json& j, Detection& d);
void to_json(Json& j, const Proposal& p);
void from_json(const Json& j, Proposal& p);
void to_json(Json& j, const Prediction& p);
void from_json(const Json& j, Prediction& p);
void to_json(Json& j, const ProposalTarget& t);
void from_json(const Json& j, ProposalTarget& t);
void to_json(Json& j, const Assignment& a);
void from_json(const Json& j, Assignment& a);
void to_json(Json& j, const StageRecord& r);
void from_json(const Json& j, StageRecord& r);
void to_json(Json& j, const Mlp& m);
void from_json(const Json& j, Mlp& m);

// Whole-document forms, tagged with schema version and kind.
Json scene_to_json(const SyntheticScene& scene);
SyntheticScene scene_from_json(const Json& j);
Json trace_to_json(const StageTrace& trace, uint64_t scene_seed);
StageTrace trace_from_json(const Json& j);
Json detections_to_json(std::span<const Detection> dets, std::span<const OrientedBox> gts,
                        uint64_t scene_seed);
EvalScene detections_from_json(const Json& j);
Json model_to_json(const HeadParams& params);
HeadParams model_from_json(const Json& j);
Json ap_result_to_json(const ApResult& r, const ApOptions& options);

Json tagged(std::string_view kind);
// Throws SchemaVersionError for a missing/unknown major version or a kind
// other than `kind`.
void check_schema(const Json& j, std::string_view kind);

// Throws DataError when the file cannot be read or parsed.
Json read_json(const std::filesystem::path& path);
// indent < 0 writes compact JSON.
void write_json(const std::filesystem::path& path, const Json& j, int indent = -1);
void write_text(const std::filesystem::path& path, const std::string& text);

std::string stats_csv(const CascadeStats& stats);
std::string loss_history_csv(std::span<const LossReport> history, const LossConfig& cfg);

// 64-bit FNV-1a of a string, as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view text);

}  // namespace cascadev

#endif  // CASCADEV_IO_HPP_
