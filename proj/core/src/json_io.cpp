// Copyright (C) 2026 The posefuse Authors
// SPDX-License-Identifier: Apache-2.0

#include "posefuse/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include <unistd.h>

#include "posefuse/error.hpp"

namespace posefuse {

namespace fs = std::filesystem;

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) fail(ErrorCode::kIo, "read failed: " + path.string());
  return ss.str();
}

void write_file_atomic(const fs::path& path, std::string_view contents) {
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::kIo, "cannot open " + tmp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) fail(ErrorCode::kIo, "write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    fail(ErrorCode::kIo, "cannot rename into " + path.string());
  }
}

json read_json(const fs::path& path) {
  const std::string text = read_text_file(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::kParse, path.string() + ": " + e.what());
  }
}

namespace {

void dump_into(const json& v, std::string& out) {
  switch (v.type()) {
    case json::value_t::object: {
      out += '{';
      bool first = true;
      for (const auto& [key, item] : v.items()) {
        if (!first) out += ',';
        first = false;
        out += json(key).dump();
        out += ':';
        dump_into(item, out);
      }
      out += '}';
      break;
    }
    case json::value_t::array: {
      out += '[';
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        dump_into(v[i], out);
      }
      out += ']';
      break;
    }
    case json::value_t::number_float: {
      const double d = v.get<double>();
      if (!std::isfinite(d)) {
        out += "null";
        break;
      }
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.6f", d);
      // -0.000000 and 0.000000 must not differ between runs
      if (std::string_view(buf) == "-0.000000") std::snprintf(buf, sizeof buf, "0.000000");
      out += buf;
      break;
    }
    default:
      out += v.dump();
  }
}

template <typename T>
T get_field(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorCode::kParse, std::string("field '") + key + "': " + e.what());
  }
}

json point3_json(const Point3& p) { return json::array({p.x, p.y, p.z}); }

Point3 point3_from(const json& j) {
  if (!j.is_array() || j.size() != 3) fail(ErrorCode::kParse, "expected [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

const json& list_field(const json& j, const char* key) {
  if (j.is_array()) return j;
  if (!j.is_object() || !j.contains(key) || !j.at(key).is_array()) {
    fail(ErrorCode::kParse, std::string("expected an array or an object with '") + key + "'");
  }
  return j.at(key);
}

}  // namespace

std::string dump_canonical(const json& value) {
  std::string out;
  dump_into(value, out);
  out += '\n';
  return out;
}

void write_json(const fs::path& path, const json& value) {
  write_file_atomic(path, dump_canonical(value));
}

json camera_to_json(const CameraIntrinsics& c) {
  return {{"fx", c.fx()}, {"fy", c.fy()}, {"cx", c.cx()}, {"cy", c.cy()},
          {"width", c.width()}, {"height", c.height()}};
}

CameraIntrinsics camera_from_json(const json& j) {
  return CameraIntrinsics::make(get_field<double>(j, "fx"), get_field<double>(j, "fy"),
                                get_field<double>(j, "cx"), get_field<double>(j, "cy"),
                                get_field<int>(j, "width"), get_field<int>(j, "height"));
}

json skeleton_to_json(const Skeleton& s) {
  json joints = json::array();
  for (const JointSpec& joint : s.joints()) {
    json jj{{"name", joint.name}, {"parent", s.name(joint.parent)}};
    if (joint.bone) {
      jj["bone"] = {{"min_mm", joint.bone->min_length_mm},
                    {"max_mm", joint.bone->max_length_mm},
                    {"direction", point3_json(joint.bone->direction)}};
    }
    joints.push_back(std::move(jj));
  }
  return {{"root", s.name(s.root_index())}, {"joints", std::move(joints)}};
}

Skeleton skeleton_from_json(const json& j) {
  const json& joints = list_field(j, "joints");
  std::vector<JointSpec> joints_out;
  std::vector<json> parents;
  for (const json& jj : joints) {
    JointSpec joint;
    joint.name = get_field<std::string>(jj, "name");
    parents.push_back(jj.at("parent"));
    if (jj.contains("bone")) {
      const json& b = jj.at("bone");
      joint.bone = BonePrior{get_field<double>(b, "min_mm"), get_field<double>(b, "max_mm"),
                             point3_from(b.at("direction"))};
    }
    joints_out.push_back(std::move(joint));
  }
  const auto resolve = [&](const json& ref) -> int {
    if (ref.is_number_integer()) return ref.get<int>();
    if (ref.is_string()) {
      for (std::size_t k = 0; k < joints_out.size(); ++k) {
        if (joints_out[k].name == ref.get<std::string>()) return static_cast<int>(k);
      }
      fail(ErrorCode::kParse, "unknown joint name '" + ref.get<std::string>() + "'");
    }
    fail(ErrorCode::kParse, "joint reference must be a name or an index");
  };
  for (std::size_t k = 0; k < joints_out.size(); ++k) joints_out[k].parent = resolve(parents[k]);
  if (!j.is_object() || !j.contains("root")) fail(ErrorCode::kParse, "skeleton needs 'root'");
  const int root = resolve(j.at("root"));
  return Skeleton(std::move(joints_out), root);
}

json pose3d_to_json(const Pose3D& pose) {
  json joints = json::array();
  for (const Point3& p : pose.joints) joints.push_back(point3_json(p));
  json out{{"joints", std::move(joints)}, {"confidence", pose.confidence}};
  if (pose.person_id) out["person_id"] = *pose.person_id;
  return out;
}

Pose3D pose3d_from_json(const json& j) {
  Pose3D pose;
  try {
    for (const json& p : j.at("joints")) pose.joints.push_back(point3_from(p));
    pose.confidence = j.at("confidence").get<std::vector<double>>();
    if (j.contains("person_id") && !j.at("person_id").is_null()) {
      pose.person_id = j.at("person_id").get<int>();
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::kParse, std::string("pose3d: ") + e.what());
  }
  pose.validate();
  return pose;
}

json pose_set_to_json(const std::vector<Pose3D>& poses) {
  json arr = json::array();
  for (const Pose3D& p : poses) arr.push_back(pose3d_to_json(p));
  return {{"poses", std::move(arr)}};
}

std::vector<Pose3D> pose_set_from_json(const json& j) {
  std::vector<Pose3D> out;
  for (const json& p : list_field(j, "poses")) out.push_back(pose3d_from_json(p));
  return out;
}

json pose2d_to_json(const Pose2D& pose) {
  json joints = json::array();
  for (const Point2& p : pose.joints) joints.push_back(json::array({p.x, p.y}));
  json visible = json::array();
  for (bool v : pose.visible) visible.push_back(v);
  return {{"joints", std::move(joints)}, {"confidence", pose.confidence},
          {"visible", std::move(visible)}};
}

Pose2D pose2d_from_json(const json& j) {
  Pose2D pose;
  try {
    for (const json& p : j.at("joints")) {
      if (!p.is_array() || p.size() != 2) fail(ErrorCode::kParse, "expected [x, y]");
      pose.joints.push_back({p[0].get<double>(), p[1].get<double>()});
    }
    pose.confidence = j.at("confidence").get<std::vector<double>>();
    if (j.contains("visible")) {
      for (const json& v : j.at("visible")) pose.visible.push_back(v.get<bool>());
    } else {
      for (double c : pose.confidence) pose.visible.push_back(c > 0.0);
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::kParse, std::string("pose2d: ") + e.what());
  }
  pose.validate();
  return pose;
}

json pose2d_set_to_json(const std::vector<Pose2D>& poses) {
  json arr = json::array();
  for (const Pose2D& p : poses) arr.push_back(pose2d_to_json(p));
  return {{"poses", std::move(arr)}};
}

std::vector<Pose2D> pose2d_set_from_json(const json& j) {
  std::vector<Pose2D> out;
  for (const json& p : list_field(j, "poses")) out.push_back(pose2d_from_json(p));
  return out;
}

json detections_to_json(const std::vector<Detection>& detections) {
  json arr = json::array();
  for (const Detection& d : detections) {
    arr.push_back({{"box", json::array({d.x_min, d.y_min, d.x_max, d.y_max})}, {"score", d.score}});
  }
  return {{"detections", std::move(arr)}};
}

std::vector<Detection> detections_from_json(const json& j) {
  std::vector<Detection> out;
  for (const json& d : list_field(j, "detections")) {
    const auto box = get_field<std::vector<double>>(d, "box");
    if (box.size() != 4) fail(ErrorCode::kParse, "detection box needs four values");
    out.push_back({box[0], box[1], box[2], box[3], d.value("score", 1.0)});
  }
  return out;
}

json match_result_to_json(const MatchResult& r) {
  json pairs = json::array();
  for (const MatchPair& p : r.pairs) {
    pairs.push_back({{"bu", p.bu}, {"td", p.td}, {"similarity", p.similarity}});
  }
  return {{"pairs", std::move(pairs)}, {"unmatched_bu", r.unmatched_bu},
          {"unmatched_td", r.unmatched_td}};
}

MatchResult match_result_from_json(const json& j) {
  MatchResult r;
  for (const json& p : get_field<json>(j, "pairs")) {
    r.pairs.push_back({get_field<int>(p, "bu"), get_field<int>(p, "td"),
                       get_field<double>(p, "similarity")});
  }
  r.unmatched_bu = get_field<std::vector<int>>(j, "unmatched_bu");
  r.unmatched_td = get_field<std::vector<int>>(j, "unmatched_td");
  return r;
}

namespace {

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

json metric_report_to_json(const MetricReport& r) {
  json f1 = json::object();
  for (const auto& [key, value] : r.f1_at) f1[key] = value;
  json sequences = json::object();
  for (const auto& [id, s] : r.sequences) {
    sequences[id] = {{"pck", optional_json(s.pck)}, {"pck_abs", optional_json(s.pck_abs)},
                     {"joints", s.joints}, {"persons", s.persons}};
  }
  return {{"mpjpe_mm", optional_json(r.mpjpe)},
          {"pa_mpjpe_mm", optional_json(r.pa_mpjpe)},
          {"pck", optional_json(r.pck)},
          {"pck_abs", optional_json(r.pck_abs)},
          {"auc_rel", optional_json(r.auc_rel)},
          {"ap_root", optional_json(r.ap_root)},
          {"f1_at", std::move(f1)},
          {"pck_threshold_mm", r.pck_threshold_mm},
          {"counts",
           {{"persons_gt", r.persons_gt},
            {"persons_pred", r.persons_pred},
            {"persons_matched", r.persons_matched},
            {"joints_evaluated", r.joints_evaluated},
            {"frames", r.frames}}},
          {"sequences", std::move(sequences)}};
}

json adjacency_to_json(const Adjacency& a, const Skeleton& skeleton) {
  json names = json::array();
  for (std::size_t k = 0; k < skeleton.joint_count(); ++k) names.push_back(skeleton.name(k));
  json rows = json::array();
  for (std::size_t i = 0; i < a.rows; ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < a.cols; ++j) row.push_back(a(i, j));
    rows.push_back(std::move(row));
  }
  return {{"joints", std::move(names)}, {"matrix", std::move(rows)}};
}

json ssl_score_to_json(const SslScore& s) {
  return {{"e_rep", s.e_rep}, {"e_mp", s.e_mp}, {"weight_w", s.weight_w}, {"l_ssl", s.l_ssl}};
}

std::string SceneManifest::frame_id() const {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06lld", static_cast<long long>(frame_index));
  return sequence_id + "_" + buf;
}

SceneManifest load_manifest(const fs::path& path) {
  const json j = read_json(path);
  const fs::path base = path.parent_path();
  const auto resolve = [&](const char* key, bool required) -> fs::path {
    if (!j.contains(key) || j.at(key).is_null()) {
      if (required) fail(ErrorCode::kParse, path.string() + ": missing '" + key + "'");
      return {};
    }
    fs::path p = j.at(key).get<std::string>();
    return p.is_absolute() ? p : base / p;
  };
  SceneManifest m;
  try {
    m.sequence_id = j.value("sequence_id", std::string("seq0"));
    m.frame_index = j.value("frame_index", std::int64_t{0});
    m.camera = camera_from_json(j.at("camera"));
    m.stride = j.value("stride", 1);
  } catch (const json::exception& e) {
    fail(ErrorCode::kParse, path.string() + ": " + e.what());
  }
  m.skeleton = resolve("skeleton", false);
  m.heatmaps = resolve("heatmaps", true);
  m.tag_maps = resolve("tag_maps", true);
  m.root_depth = resolve("root_depth", true);
  m.rel_depth = resolve("rel_depth", true);
  m.detections = resolve("detections", false);
  m.gt_poses = resolve("gt_poses", false);
  m.td_poses = resolve("td_poses", false);
  return m;
}

void save_manifest(const fs::path& path, const SceneManifest& m) {
  const fs::path base = path.parent_path();
  const auto rel = [&](const fs::path& p) -> json {
    if (p.empty()) return nullptr;
    return (base.empty() ? p : p.lexically_relative(base)).generic_string();
  };
  write_json(path, {{"sequence_id", m.sequence_id},
                    {"frame_index", m.frame_index},
                    {"camera", camera_to_json(m.camera)},
                    {"stride", m.stride},
                    {"skeleton", rel(m.skeleton)},
                    {"heatmaps", rel(m.heatmaps)},
                    {"tag_maps", rel(m.tag_maps)},
                    {"root_depth", rel(m.root_depth)},
                    {"rel_depth", rel(m.rel_depth)},
                    {"detections", rel(m.detections)},
                    {"gt_poses", rel(m.gt_poses)},
                    {"td_poses", rel(m.td_poses)}});
}

}  // namespace posefuse
