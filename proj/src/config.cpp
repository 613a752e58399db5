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

#include "cascadev/config.hpp"

#include <set>

#include "cascadev/errors.hpp"

namespace cascadev {

namespace {

// Reads fields from one JSON object and rejects keys that were never read.
class Section {
 public:
  Section(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) throw ConfigError(where() + "must be an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->get<T>();
    } catch (const Json::exception&) {
      throw ConfigError(where() + "bad value for '" + key + "'");
    }
  }

  void get_size(const char* key, BoxSize& out) {
    std::vector<double> v{out.w, out.l, out.h};
    get(key, v);
    if (v.size() != 3) throw ConfigError(where() + "'" + key + "' needs 3 values");
    out = {v[0], v[1], v[2]};
  }

  const Json* child(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string sub(const char* key) const { return path_ + key + "."; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError("unknown config key '" + path_ + it.key() + "'");
    }
  }

 private:
  std::string where() const { return "config " + (path_.empty() ? std::string() : path_ + " "); }

  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <class F>
void with_child(Section& s, const char* key, F fn) {
  if (const Json* c = s.child(key)) {
    Section sub(*c, s.sub(key));
    fn(sub);
    sub.finish();
  }
}

template <class F>
auto parse_enum(const std::string& name, F parser) {
  try {
    return parser(name);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace

void RunConfig::validate() const {
  if (num_scenes < 1) throw ConfigError("num_scenes must be >= 1");
  if (proposals < 1) throw ConfigError("proposals must be >= 1");
  if (!(nms_iou > 0.0 && nms_iou < 1.0)) throw ConfigError("nms_iou must be in (0, 1)");
  if (iou_thresholds.empty()) throw ConfigError("iou_thresholds must not be empty");
  for (double t : iou_thresholds) {
    if (!(t > 0.0 && t < 1.0)) throw ConfigError("iou thresholds must be in (0, 1)");
  }
  scene.validate();
  try {
    schedule.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  oracle.validate();
  const int last = ensemble_last == 0 ? schedule.num_stages : ensemble_last;
  if (ensemble_first < 1 || ensemble_first > last || last > schedule.num_stages) {
    throw ConfigError("ensemble stage range is invalid");
  }
  if (predictor == PredictorKind::kModel && model_path.empty()) {
    throw ConfigError("predictor 'model' needs model_path");
  }
  if (train.steps < 1 || train.batch_scenes < 1 || train.hidden < 1 || !(train.lr > 0.0)) {
    throw ConfigError("train settings out of range");
  }
}

RunConfig config_from_json(const Json& j, RunConfig cfg) {
  Section top(j, "");
  top.get("seed", cfg.seed);
  top.get("num_scenes", cfg.num_scenes);
  with_child(top, "scene", [&](Section& s) {
    SceneConfig& c = cfg.scene;
    s.get("num_gt_min", c.num_gt_min);
    s.get("num_gt_max", c.num_gt_max);
    s.get_size("size_min", c.size_min);
    s.get_size("size_max", c.size_max);
    s.get("class_size_jitter", c.class_size_jitter);
    s.get("class_seed", c.class_seed);
    s.get("yaw_enabled", c.yaw_enabled);
    s.get("surface_points_per_box", c.surface_points_per_box);
    s.get("interior_points_per_box", c.interior_points_per_box);
    s.get("interior_depth", c.interior_depth);
    s.get("clutter_points", c.clutter_points);
    BoxSize ws{c.workspace_x, c.workspace_y, c.workspace_z};
    s.get_size("workspace", ws);
    c.workspace_x = ws.w;
    c.workspace_y = ws.l;
    c.workspace_z = ws.h;
    s.get("num_classes", c.num_classes);
    s.get("feature_dim", c.feature_dim);
    s.get("feature_sigma", c.feature_sigma);
  });
  with_child(top, "schedule", [&](Section& s) {
    s.get("mu_max", cfg.schedule.mu_max);
    s.get("mu_min", cfg.schedule.mu_min);
    s.get("num_stages", cfg.schedule.num_stages);
  });
  with_child(top, "predictor", [&](Section& s) {
    std::string kind = cfg.predictor == PredictorKind::kModel ? "model" : "oracle";
    s.get("kind", kind);
    if (kind == "oracle") {
      cfg.predictor = PredictorKind::kOracle;
    } else if (kind == "model") {
      cfg.predictor = PredictorKind::kModel;
    } else {
      throw ConfigError("unknown predictor kind '" + kind + "'");
    }
    s.get("model_path", cfg.model_path);
    s.get("sigma_delta", cfg.oracle.sigma_delta);
    s.get("sigma_heading", cfg.oracle.sigma_heading);
    s.get("p_class_flip", cfg.oracle.p_class_flip);
    s.get("centerness_bias", cfg.oracle.centerness_bias);
  });
  top.get("proposals", cfg.proposals);
  std::string name(to_string(cfg.weighting));
  top.get("weighting", name);
  cfg.weighting = parse_enum(name, parse_weighting);
  top.get("nms_iou", cfg.nms_iou);
  with_child(top, "ensemble", [&](Section& s) {
    s.get("first", cfg.ensemble_first);
    s.get("last", cfg.ensemble_last);
  });
  name = to_string(cfg.iou);
  top.get("iou", name);
  cfg.iou = parse_enum(name, parse_iou_variant);
  name = to_string(cfg.ap);
  top.get("ap", name);
  cfg.ap = parse_enum(name, parse_ap_interpolation);
  top.get("iou_thresholds", cfg.iou_thresholds);
  with_child(top, "train", [&](Section& s) {
    TrainConfig& t = cfg.train;
    s.get("steps", t.steps);
    s.get("lr", t.lr);
    s.get("batch_scenes", t.batch_scenes);
    s.get("hidden", t.hidden);
    s.get("denoising", t.denoising);
    with_child(s, "loss", [&](Section& l) {
      l.get("w_cls", t.loss.w_cls);
      l.get("w_reg", t.loss.w_reg);
      l.get("w_ctr", t.loss.w_ctr);
      l.get("focal", t.loss.focal);
      l.get("focal_gamma", t.loss.focal_gamma);
      l.get("smooth_l1_beta", t.loss.smooth_l1_beta);
    });
  });
  top.finish();
  return cfg;
}

Json config_to_json(const RunConfig& cfg) {
  const SceneConfig& c = cfg.scene;
  const LossConfig& l = cfg.train.loss;
  return Json{
      {"seed", cfg.seed},
      {"num_scenes", cfg.num_scenes},
      {"scene",
       {{"num_gt_min", c.num_gt_min},
        {"num_gt_max", c.num_gt_max},
        {"size_min", {c.size_min.w, c.size_min.l, c.size_min.h}},
        {"size_max", {c.size_max.w, c.size_max.l, c.size_max.h}},
        {"class_size_jitter", c.class_size_jitter},
        {"class_seed", c.class_seed},
        {"yaw_enabled", c.yaw_enabled},
        {"surface_points_per_box", c.surface_points_per_box},
        {"interior_points_per_box", c.interior_points_per_box},
        {"interior_depth", c.interior_depth},
        {"clutter_points", c.clutter_points},
        {"workspace", {c.workspace_x, c.workspace_y, c.workspace_z}},
        {"num_classes", c.num_classes},
        {"feature_dim", c.feature_dim},
        {"feature_sigma", c.feature_sigma}}},
      {"schedule",
       {{"mu_max", cfg.schedule.mu_max},
        {"mu_min", cfg.schedule.mu_min},
        {"num_stages", cfg.schedule.num_stages}}},
      {"predictor",
       {{"kind", cfg.predictor == PredictorKind::kModel ? "model" : "oracle"},
        {"model_path", cfg.model_path},
        {"sigma_delta", cfg.oracle.sigma_delta},
        {"sigma_heading", cfg.oracle.sigma_heading},
        {"p_class_flip", cfg.oracle.p_class_flip},
        {"centerness_bias", cfg.oracle.centerness_bias}}},
      {"proposals", cfg.proposals},
      {"weighting", to_string(cfg.weighting)},
      {"nms_iou", cfg.nms_iou},
      {"ensemble", {{"first", cfg.ensemble_first}, {"last", cfg.ensemble_last}}},
      {"iou", to_string(cfg.iou)},
      {"ap", to_string(cfg.ap)},
      {"iou_thresholds", cfg.iou_thresholds},
      {"train",
       {{"steps", cfg.train.steps},
        {"lr", cfg.train.lr},
        {"batch_scenes", cfg.train.batch_scenes},
        {"hidden", cfg.train.hidden},
        {"denoising", cfg.train.denoising},
        {"loss",
         {{"w_cls", l.w_cls},
          {"w_reg", l.w_reg},
          {"w_ctr", l.w_ctr},
          {"focal", l.focal},
          {"focal_gamma", l.focal_gamma},
          {"smooth_l1_beta", l.smooth_l1_beta}}}}}};
}

RunConfig load_config(const std::filesystem::path& path) {
  Json j;
  try {
    j = read_json(path);
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  // Manifests and run records embed the resolved config.
  if (j.is_object() && j.contains("schema_version") && j.contains("config")) {
    return config_from_json(j["config"]);
  }
  return config_from_json(j);
}

std::string config_hash(const RunConfig& cfg) { return fnv1a_hex(config_to_json(cfg).dump()); }

}  // namespace cascadev
