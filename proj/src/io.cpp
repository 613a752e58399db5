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

#include "cascadev/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cascadev/errors.hpp"

namespace cascadev {

namespace {

template <class T>
std::optional<T> opt_get(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<T>();
}

template <class T>
void put_opt(Json& j, const char* key, const std::optional<T>& v) {
  if (v) {
    j[key] = *v;
  } else {
    j[key] = nullptr;
  }
}

std::string_view kind_name(PointKind k) {
  switch (k) {
    case PointKind::kSurface: return "surface";
    case PointKind::kInterior: return "interior";
    case PointKind::kClutter: return "clutter";
  }
  return "clutter";
}

PointKind parse_kind(const std::string& s) {
  if (s == "surface") return PointKind::kSurface;
  if (s == "interior") return PointKind::kInterior;
  if (s == "clutter") return PointKind::kClutter;
  throw DataError("unknown point kind '" + s + "'");
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

// Precision envelope sampled at 101 recall levels.
Json pr_samples(const std::vector<PrPoint>& curve) {
  Json out = Json::array();
  for (int i = 0; i <= 100; ++i) {
    const double r = i / 100.0;
    double p = 0.0;
    for (const PrPoint& pt : curve) {
      if (pt.recall >= r - 1e-12) p = std::max(p, pt.precision);
    }
    out.push_back({r, p});
  }
  return out;
}

}  // namespace

void to_json(Json& j, const Point3& p) { j = Json::array({p.x, p.y, p.z}); }

void from_json(const Json& j, Point3& p) {
  if (!j.is_array() || j.size() != 3) throw DataError("point must be [x, y, z]");
  p = {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

void to_json(Json& j, const OrientedBox& b) {
  j = Json{{"center", b.center}, {"size", {b.size.w, b.size.l, b.size.h}}, {"yaw", b.yaw}};
  put_opt(j, "class_id", b.class_id);
  put_opt(j, "score", b.score);
}

void from_json(const Json& j, OrientedBox& b) {
  const Json& s = j.at("size");
  if (!s.is_array() || s.size() != 3) throw DataError("size must be [w, l, h]");
  b = OrientedBox::make(j.at("center").get<Point3>(),
                        {s[0].get<double>(), s[1].get<double>(), s[2].get<double>()},
                        j.at("yaw").get<double>(), opt_get<int>(j, "class_id"));
  b.score = opt_get<double>(j, "score");
}

void to_json(Json& j, const Deltas& d) { j = Json{{"d", d.d}, {"heading", d.heading}}; }

void from_json(const Json& j, Deltas& d) {
  d.d = j.at("d").get<std::array<double, 6>>();
  d.heading = j.at("heading").get<double>();
}

void to_json(Json& j, const Detection& d) {
  j = Json{{"box", d.box},         {"score", d.score}, {"class_id", d.class_id},
           {"stage", d.stage},     {"proposal", d.proposal}};
}

void from_json(const Json& j, Detection& d) {
  d.box = j.at("box").get<OrientedBox>();
  d.score = j.at("score").get<double>();
  d.class_id = j.at("class_id").get<int>();
  d.stage = j.at("stage").get<int>();
  d.proposal = j.at("proposal").get<size_t>();
}

void to_json(Json& j, const Proposal& p) {
  j = Json{{"point", p.point},
           {"feature", p.feature},
           {"is_denoising", p.is_denoising},
           {"origin_index", p.origin_index}};
  put_opt(j, "denoising_gt", p.denoising_gt);
}

void from_json(const Json& j, Proposal& p) {
  p.point = j.at("point").get<Point3>();
  p.feature = j.at("feature").get<FeatureVec>();
  p.is_denoising = j.at("is_denoising").get<bool>();
  p.origin_index = j.at("origin_index").get<size_t>();
  p.denoising_gt = opt_get<size_t>(j, "denoising_gt");
}

void to_json(Json& j, const Prediction& p) {
  j = Json{{"class_probs", p.class_probs}, {"deltas", p.deltas}, {"centerness", p.centerness}};
}

void from_json(const Json& j, Prediction& p) {
  p.class_probs = j.at("class_probs").get<std::vector<double>>();
  p.deltas = j.at("deltas").get<Deltas>();
  p.centerness = j.at("centerness").get<double>();
}

void to_json(Json& j, const ProposalTarget& t) {
  j = Json::object();
  put_opt(j, "matched_gt", t.matched_gt);
  put_opt(j, "target_deltas", t.target_deltas);
  put_opt(j, "target_centerness", t.target_centerness);
  put_opt(j, "target_class", t.target_class);
  j["is_denoising"] = t.is_denoising;
}

void from_json(const Json& j, ProposalTarget& t) {
  t.matched_gt = opt_get<size_t>(j, "matched_gt");
  t.target_deltas = opt_get<Deltas>(j, "target_deltas");
  t.target_centerness = opt_get<double>(j, "target_centerness");
  t.target_class = opt_get<int>(j, "target_class");
  t.is_denoising = j.at("is_denoising").get<bool>();
}

void to_json(Json& j, const Assignment& a) { j = Json{{"mu", a.mu}, {"targets", a.targets}}; }

void from_json(const Json& j, Assignment& a) {
  a.mu = j.at("mu").get<double>();
  a.targets = j.at("targets").get<std::vector<ProposalTarget>>();
}

void to_json(Json& j, const StageRecord& r) {
  j = Json{{"stage", r.stage},
           {"mu", r.mu},
           {"inputs", r.inputs},
           {"predictions", r.predictions},
           {"updated_points", r.updated_points},
           {"detections", r.detections}};
  Json boxes = Json::array();
  for (const auto& b : r.boxes) boxes.push_back(b ? Json(*b) : Json(nullptr));
  j["boxes"] = std::move(boxes);
  put_opt(j, "assignment", r.assignment);
}

void from_json(const Json& j, StageRecord& r) {
  r.stage = j.at("stage").get<int>();
  r.mu = j.at("mu").get<double>();
  r.inputs = j.at("inputs").get<std::vector<Proposal>>();
  r.predictions = j.at("predictions").get<std::vector<Prediction>>();
  r.updated_points = j.at("updated_points").get<std::vector<Point3>>();
  r.detections = j.at("detections").get<std::vector<Detection>>();
  r.boxes.clear();
  for (const Json& b : j.at("boxes")) {
    r.boxes.push_back(b.is_null() ? std::nullopt : std::optional(b.get<OrientedBox>()));
  }
  r.assignment = opt_get<Assignment>(j, "assignment");
  if (r.predictions.size() != r.inputs.size() || r.boxes.size() != r.inputs.size()) {
    throw DataError("stage record arrays differ in length");
  }
}

void to_json(Json& j, const Mlp& m) {
  j = Json{{"in", m.in}, {"hidden", m.hidden}, {"out", m.out}, {"w1", m.w1},
           {"b1", m.b1}, {"w2", m.w2},         {"b2", m.b2}};
}

void from_json(const Json& j, Mlp& m) {
  m.in = j.at("in").get<int>();
  m.hidden = j.at("hidden").get<int>();
  m.out = j.at("out").get<int>();
  m.w1 = j.at("w1").get<std::vector<double>>();
  m.b1 = j.at("b1").get<std::vector<double>>();
  m.w2 = j.at("w2").get<std::vector<double>>();
  m.b2 = j.at("b2").get<std::vector<double>>();
  const auto h = static_cast<size_t>(m.hidden);
  if (m.w1.size() != h * m.in || m.b1.size() != h || m.w2.size() != h * m.out ||
      m.b2.size() != static_cast<size_t>(m.out)) {
    throw DataError("mlp weight shapes do not match its dimensions");
  }
}

Json tagged(std::string_view kind) {
  return Json{{"schema_version", kSchemaVersion}, {"kind", kind}};
}

void check_schema(const Json& j, std::string_view kind) {
  if (!j.is_object()) throw SchemaVersionError("document is not a JSON object");
  auto v = j.find("schema_version");
  if (v == j.end() || !v->is_string()) throw SchemaVersionError("missing schema_version");
  const std::string s = v->get<std::string>();
  int major = -1;
  if (std::sscanf(s.c_str(), "%d", &major) != 1 || major != kSchemaMajor) {
    throw SchemaVersionError("unsupported schema_version '" + s + "'");
  }
  auto k = j.find("kind");
  if (k == j.end() || !k->is_string() || k->get<std::string>() != kind) {
    throw SchemaVersionError("expected a '" + std::string(kind) + "' document");
  }
}

Json scene_to_json(const SyntheticScene& scene) {
  Json j = tagged("scene");
  j["seed"] = scene.seed;
  j["num_classes"] = scene.num_classes;
  j["gt_boxes"] = scene.gt_boxes;
  j["points"] = scene.points;
  j["features"] = scene.features;
  Json labels = Json::array();
  for (const auto& l : scene.point_gt_labels) labels.push_back(l ? Json(*l) : Json(nullptr));
  j["point_gt_labels"] = std::move(labels);
  Json kinds = Json::array();
  for (PointKind k : scene.point_kinds) kinds.push_back(kind_name(k));
  j["point_kinds"] = std::move(kinds);
  return j;
}

SyntheticScene scene_from_json(const Json& j) {
  check_schema(j, "scene");
  SyntheticScene s;
  try {
    s.seed = j.at("seed").get<uint64_t>();
    s.num_classes = j.at("num_classes").get<int>();
    s.gt_boxes = j.at("gt_boxes").get<std::vector<OrientedBox>>();
    s.points = j.at("points").get<std::vector<Point3>>();
    s.features = j.at("features").get<std::vector<FeatureVec>>();
    for (const Json& l : j.at("point_gt_labels")) {
      s.point_gt_labels.push_back(l.is_null() ? std::nullopt : std::optional(l.get<size_t>()));
    }
    for (const Json& k : j.at("point_kinds")) s.point_kinds.push_back(parse_kind(k.get<std::string>()));
  } catch (const Json::exception& e) {
    throw DataError(std::string("malformed scene: ") + e.what());
  }
  const size_t n = s.points.size();
  if (s.features.size() != n || s.point_gt_labels.size() != n || s.point_kinds.size() != n) {
    throw DataError("scene arrays differ in length");
  }
  return s;
}

Json trace_to_json(const StageTrace& trace, uint64_t scene_seed) {
  Json j = tagged("trace");
  j["scene_seed"] = scene_seed;
  j["gts"] = trace.gts;
  j["stages"] = trace.stages;
  return j;
}

StageTrace trace_from_json(const Json& j) {
  check_schema(j, "trace");
  StageTrace t;
  try {
    t.gts = j.at("gts").get<std::vector<OrientedBox>>();
    t.stages = j.at("stages").get<std::vector<StageRecord>>();
  } catch (const Json::exception& e) {
    throw DataError(std::string("malformed trace: ") + e.what());
  }
  return t;
}

Json detections_to_json(std::span<const Detection> dets, std::span<const OrientedBox> gts,
                        uint64_t scene_seed) {
  Json j = tagged("detections");
  j["scene_seed"] = scene_seed;
  j["detections"] = std::vector<Detection>(dets.begin(), dets.end());
  j["gts"] = std::vector<OrientedBox>(gts.begin(), gts.end());
  return j;
}

EvalScene detections_from_json(const Json& j) {
  check_schema(j, "detections");
  EvalScene s;
  try {
    s.detections = j.at("detections").get<std::vector<Detection>>();
    s.gts = j.at("gts").get<std::vector<OrientedBox>>();
  } catch (const Json::exception& e) {
    throw DataError(std::string("malformed detections: ") + e.what());
  }
  return s;
}

Json model_to_json(const HeadParams& params) {
  Json j = tagged("model");
  j["feature_dim"] = params.feature_dim;
  j["num_classes"] = params.num_classes;
  j["hidden"] = params.hidden;
  Json stages = Json::array();
  for (const StageHead& h : params.stages) {
    stages.push_back(Json{{"cls", h.cls}, {"reg", h.reg}, {"ctr", h.ctr}});
  }
  j["stages"] = std::move(stages);
  return j;
}

HeadParams model_from_json(const Json& j) {
  check_schema(j, "model");
  HeadParams p;
  try {
    p.feature_dim = j.at("feature_dim").get<int>();
    p.num_classes = j.at("num_classes").get<int>();
    p.hidden = j.at("hidden").get<int>();
    for (const Json& s : j.at("stages")) {
      p.stages.push_back({s.at("cls").get<Mlp>(), s.at("reg").get<Mlp>(), s.at("ctr").get<Mlp>()});
    }
  } catch (const Json::exception& e) {
    throw DataError(std::string("malformed model: ") + e.what());
  }
  if (p.stages.empty()) throw DataError("model has no stages");
  for (const StageHead& h : p.stages) {
    if (h.cls.in != p.feature_dim || h.cls.out != p.num_classes + 1 || h.reg.out != 7 ||
        h.ctr.out != 1 || h.reg.in != p.feature_dim || h.ctr.in != p.feature_dim) {
      throw DataError("model head shapes are inconsistent");
    }
  }
  return p;
}

Json ap_result_to_json(const ApResult& r, const ApOptions& options) {
  Json j = tagged("ap_result");
  j["matcher"] = to_string(options.matcher);
  j["interpolation"] = to_string(options.interpolation);
  Json ts = Json::array();
  for (const ThresholdAp& t : r.thresholds) {
    Json per = Json::array();
    for (const ClassAp& c : t.per_class) {
      per.push_back(Json{{"class_id", c.class_id},
                         {"num_gt", c.num_gt},
                         {"num_det", c.num_det},
                         {"ap", c.ap},
                         {"pr_samples", pr_samples(c.curve)}});
    }
    ts.push_back(Json{{"iou_threshold", t.iou_threshold}, {"map", t.map}, {"per_class", per}});
  }
  j["thresholds"] = std::move(ts);
  return j;
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw DataError("invalid JSON in " + path.string() + ": " + e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("failed writing " + path.string());
}

void write_json(const std::filesystem::path& path, const Json& j, int indent) {
  write_text(path, j.dump(indent) + "\n");
}

std::string stats_csv(const CascadeStats& stats) {
  std::ostringstream os;
  os << "stage,mu,positives,mean_centerness_before,mean_centerness_after,spearman_rho,"
        "samples,fraction_gained,p10_before,p50_before,p90_before,p10_after,p50_after,"
        "p90_after\n";
  for (const StageSummary& s : stats.summary()) {
    os << s.stage << ',' << fmt(s.mu) << ',' << s.positives << ','
       << fmt(s.mean_centerness_before) << ',' << fmt(s.mean_centerness_after) << ','
       << fmt(s.spearman_rho) << ',' << s.samples << ',' << fmt(s.fraction_gained) << ','
       << fmt(s.p10_before) << ',' << fmt(s.p50_before) << ',' << fmt(s.p90_before) << ','
       << fmt(s.p10_after) << ',' << fmt(s.p50_after) << ',' << fmt(s.p90_after) << '\n';
  }
  return os.str();
}

std::string loss_history_csv(std::span<const LossReport> history, const LossConfig& cfg) {
  std::ostringstream os;
  os << "step,total";
  const size_t stages = history.empty() ? 0 : history.front().stages.size();
  for (size_t l = 1; l <= stages; ++l) {
    os << ",s" << l << "_total,s" << l << "_cls,s" << l << "_reg,s" << l << "_ctr,s" << l
       << "_positives,s" << l << "_denoising";
  }
  os << '\n';
  for (const LossReport& r : history) {
    os << r.step << ',' << fmt(r.total);
    for (const StageLoss& s : r.stages) {
      os << ',' << fmt(s.total(cfg)) << ',' << fmt(s.cls) << ',' << fmt(s.reg) << ','
         << fmt(s.ctr) << ',' << s.positives << ',' << s.denoising;
    }
    os << '\n';
  }
  return os.str();
}

std::string fnv1a_hex(std::string_view text) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

}  // namespace cascadev
