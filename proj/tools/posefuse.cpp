// Copyright (C) 2026 The posefuse Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "posefuse/decode.hpp"
#include "posefuse/error.hpp"
#include "posefuse/fuse.hpp"
#include "posefuse/geometry.hpp"
#include "posefuse/graph.hpp"
#include "posefuse/json_io.hpp"
#include "posefuse/match.hpp"
#include "posefuse/metrics.hpp"
#include "posefuse/mlp.hpp"
#include "posefuse/pipeline.hpp"
#include "posefuse/synth.hpp"
#include "posefuse/tensor_io.hpp"

namespace fs = std::filesystem;
using namespace posefuse;

namespace {

Skeleton load_skeleton(const std::string& path) {
  return path.empty() ? Skeleton::default_skeleton() : skeleton_from_json(read_json(path));
}

void emit(const std::string& out, const json& value) {
  if (out.empty() || out == "-") {
    std::cout << dump_canonical(value);
  } else {
    write_json(out, value);
  }
}

FuseStrategy parse_strategy(const std::string& s) {
  if (s == "linear") return FuseStrategy::kLinear;
  if (s == "mlp") return FuseStrategy::kMlp;
  return FuseStrategy::kHard;
}

struct DecodeFlags {
  DecodeParams params;
  void add(CLI::App* app) {
    app->add_option("--min-score", params.min_score, "Minimum heatmap peak score")
        ->check(CLI::Range(0.0, 1.0));
    app->add_option("--max-people", params.max_people, "Maximum peaks kept per joint")
        ->check(CLI::PositiveNumber);
    app->add_option("--tag-gap", params.tag_gap, "Maximum tag distance to join a person")
        ->check(CLI::PositiveNumber);
  }
};

struct MatchFlags {
  MatchParams params;
  double global_scale = 0.0;
  double threshold = -1.0;
  void add(CLI::App* app) {
    app->add_option("--sigma", params.similarity.sigma, "OKS falloff sigma")
        ->check(CLI::PositiveNumber);
    app->add_option("--global-scale", global_scale,
                    "Person scale s in mm used for every pair (0: per top-down pose)");
    app->add_option("--match-threshold", threshold,
                    "Minimum pair similarity (negative: 0.1 * joint count)");
  }
  MatchParams resolve() const {
    MatchParams p = params;
    if (global_scale > 0.0) p.similarity.global_scale = global_scale;
    if (threshold >= 0.0) p.threshold = threshold;
    return p;
  }
};

struct MetricFlags {
  MetricConfig config;
  std::string pairing = "root3d";
  std::string camera;
  void add(CLI::App* app) {
    app->add_option("--pck-threshold", config.pck_threshold_mm, "PCK threshold in mm")
        ->check(CLI::PositiveNumber);
    app->add_option("--ap-threshold", config.ap_threshold_mm, "AP root threshold in mm")
        ->check(CLI::PositiveNumber);
    app->add_option("--f1-thresholds", config.f1_thresholds_m, "F1 thresholds in meters");
    app->add_option("--pairing", pairing, "Ground-truth pairing mode")
        ->check(CLI::IsMember({"root3d", "oks2d"}));
    app->add_option("--gate", config.pairing.gate_mm, "root3d pairing gate in mm")
        ->check(CLI::PositiveNumber);
    app->add_option("--oks-gate", config.pairing.oks_gate, "oks2d minimum mean OKS");
  }
  MetricConfig resolve(int root_index, const std::optional<CameraIntrinsics>& cam) const {
    MetricConfig c = config;
    c.root_index = root_index;
    c.pairing.mode = pairing == "oks2d" ? PairingMode::kOks2d : PairingMode::kRoot3d;
    c.pairing.camera = cam;
    return c;
  }
};

int cmd_synth(std::uint64_t seed, int persons, int frames, const std::string& out_dir,
              const std::string& sequence, const SynthParams& sp, const NoiseParams& noise,
              const std::string& skeleton_path) {
  const Skeleton skeleton = load_skeleton(skeleton_path);
  const CameraIntrinsics camera = default_synth_camera();
  const fs::path dir = out_dir;
  fs::create_directories(dir);
  const fs::path skel_file = dir / "skeleton.json";
  write_json(skel_file, skeleton_to_json(skeleton));
  write_json(dir / "camera.json", camera_to_json(camera));

  json list = json::array();
  for (int t = 0; t < frames; ++t) {
    const std::uint64_t frame_seed = derive_seed(seed, static_cast<std::uint64_t>(t));
    const SyntheticScene scene = generate_scene(frame_seed, persons, camera, skeleton, sp);
    const PerturbedSets sets = perturb_scene(scene, noise, derive_seed(frame_seed, 1));

    const fs::path manifest = write_scene_frame(dir, scene, sets, sequence, t, skel_file);
    list.push_back(manifest.filename().generic_string());
  }
  write_json(dir / "manifests.json", json{{"manifests", list}});
  return kExitOk;
}

std::vector<fs::path> expand_manifests(const std::vector<std::string>& args) {
  std::vector<fs::path> out;
  for (const std::string& a : args) {
    const fs::path p = a;
    if (p.filename() == "manifests.json") {
      const json j = read_json(p);
      for (const auto& item : j.at("manifests")) {
        fs::path m = item.get<std::string>();
        out.push_back(m.is_absolute() ? m : p.parent_path() / m);
      }
    } else {
      out.push_back(p);
    }
  }
  return out;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"posefuse: multi-person 3D pose decoding, fusion and evaluation"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate synthetic scenes with known ground truth");
  std::uint64_t seed = 0;
  int persons = 3;
  int frames = 1;
  std::string out_dir = "synth_out";
  std::string sequence = "seq0";
  std::string skeleton_path;
  SynthParams sp;
  NoiseParams noise;
  synth->add_option("--seed", seed, "Base seed; each frame derives its own");
  synth->add_option("--persons", persons, "Persons per frame")->check(CLI::Range(1, 64));
  synth->add_option("--frames", frames, "Frames to generate")->check(CLI::PositiveNumber);
  synth->add_option("--out", out_dir, "Output directory");
  synth->add_option("--sequence", sequence, "Sequence id written to manifests");
  synth->add_option("--skeleton", skeleton_path, "Skeleton JSON (empty: built-in 16 joints)");
  synth->add_option("--sigma-px", sp.sigma_px, "Heatmap blob sigma in map pixels")
      ->check(CLI::PositiveNumber);
  synth->add_option("--stride", sp.stride, "Image pixels per map pixel")->check(CLI::PositiveNumber);
  synth->add_option("--min-separation", sp.min_separation_mm, "Minimum root distance in mm");
  synth->add_option("--min-depth", sp.min_depth_mm, "Minimum root depth in mm");
  synth->add_option("--max-depth", sp.max_depth_mm, "Maximum root depth in mm");
  synth->add_option("--td-noise", noise.td_sigma_mm, "Top-down Gaussian joint noise in mm");
  synth->add_option("--bu-noise", noise.bu_sigma_mm, "Noisy bottom-up copy joint noise in mm");
  synth->add_option("--td-joint-dropout", noise.td_joint_dropout, "Top-down joint dropout")
      ->check(CLI::Range(0.0, 1.0));
  synth->add_option("--td-person-dropout", noise.td_person_dropout, "Top-down person dropout")
      ->check(CLI::Range(0.0, 1.0));

  // decode
  auto* decode = app.add_subcommand("decode", "Decode bottom-up maps into 3D poses");
  std::string manifest;
  std::string decode_out;
  std::string mode = "bottom-up";
  double enlarge = 1.2;
  DecodeFlags decode_flags;
  decode->add_option("--manifest", manifest, "Scene manifest")->required();
  decode->add_option("--out", decode_out, "Output JSON (- for stdout)");
  decode->add_option("--mode", mode, "bottom-up: 3D poses; top-down: 2D poses per detection")
      ->check(CLI::IsMember({"bottom-up", "top-down"}));
  decode->add_option("--enlarge", enlarge, "Detection box enlarge ratio (top-down)")
      ->check(CLI::Range(1.0, 10.0));
  decode_flags.add(decode);

  // match
  auto* match = app.add_subcommand("match", "Match bottom-up against top-down pose sets");
  std::string bu_path, td_path, match_out;
  MatchFlags match_flags;
  match->add_option("--bu", bu_path, "Bottom-up pose set JSON")->required();
  match->add_option("--td", td_path, "Top-down pose set JSON")->required();
  match->add_option("--out", match_out, "Output JSON (- for stdout)");
  match_flags.add(match);

  // fuse
  auto* fuse = app.add_subcommand("fuse", "Fuse matched pose pairs");
  std::string fuse_bu, fuse_td, fuse_matches_path, fuse_out, weights_path, fuse_skeleton;
  std::string strategy = "hard";
  MatchFlags fuse_match_flags;
  fuse->add_option("--bu", fuse_bu, "Bottom-up pose set JSON")->required();
  fuse->add_option("--td", fuse_td, "Top-down pose set JSON")->required();
  fuse->add_option("--matches", fuse_matches_path, "Match result JSON (empty: match here)");
  fuse->add_option("--strategy", strategy, "Fusion strategy")
      ->check(CLI::IsMember({"hard", "linear", "mlp"}));
  fuse->add_option("--weights", weights_path, "Integration MLP header (strategy mlp)");
  fuse->add_option("--skeleton", fuse_skeleton, "Skeleton JSON (empty: built-in)");
  fuse->add_option("--out", fuse_out, "Output JSON (- for stdout)");
  fuse_match_flags.add(fuse);

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate predictions against ground truth");
  std::string pred_path, gt_path, report_path, eval_skeleton, metrics_sel = "all";
  MetricFlags metric_flags;
  eval->add_option("--pred", pred_path, "Predicted pose set JSON")->required();
  eval->add_option("--gt", gt_path, "Ground-truth pose set JSON")->required();
  eval->add_option("--report", report_path, "Report JSON (- for stdout)");
  eval->add_option("--metrics", metrics_sel, "Metric selection")->check(CLI::IsMember({"all"}));
  eval->add_option("--skeleton", eval_skeleton, "Skeleton JSON (empty: built-in)");
  eval->add_option("--camera", metric_flags.camera, "Camera JSON (needed for oks2d pairing)");
  metric_flags.add(eval);

  // ssl-score
  auto* ssl = app.add_subcommand("ssl-score", "Semi-supervised consistency scores for a batch");
  std::string ssl_3d, ssl_2d, ssl_camera, ssl_repredicted, ssl_out, ssl_skeleton;
  double epoch = 1.0;
  double theta = std::numbers::pi / 2.0;
  double l_dis = 0.0;
  bool literal_sign = false;
  ssl->add_option("--pose3d", ssl_3d, "Pseudo-label 3D pose set JSON")->required();
  ssl->add_option("--pose2d", ssl_2d, "Detected 2D pose set JSON")->required();
  ssl->add_option("--camera", ssl_camera, "Camera JSON")->required();
  ssl->add_option("--repredicted", ssl_repredicted,
                  "Poses re-predicted from the rotated projections (empty: exact oracle)");
  ssl->add_option("--theta", theta, "Rotation about the vertical axis in radians");
  ssl->add_option("--epoch", epoch, "Training epoch r")->check(CLI::Range(1.0, 1e300));
  ssl->add_option("--l-dis", l_dis, "Discriminator loss term added to every sample");
  ssl->add_flag("--positive-softmax", literal_sign, "Weight with softmax(+E/r) instead of softmax(-E/r)");
  ssl->add_option("--skeleton", ssl_skeleton, "Skeleton JSON (empty: built-in)");
  ssl->add_option("--out", ssl_out, "Output JSON (- for stdout)");

  // adjacency
  auto* adjacency = app.add_subcommand("adjacency", "GCN adjacency from heatmap confidences");
  std::string adj_heatmaps, adj_skeleton, adj_out;
  adjacency->add_option("--heatmaps", adj_heatmaps, "K x H x W heatmap tensor")->required();
  adjacency->add_option("--skeleton", adj_skeleton, "Skeleton JSON (empty: built-in)");
  adjacency->add_option("--out", adj_out, "Output JSON (- for stdout)");

  // pipeline
  auto* pipeline = app.add_subcommand("pipeline", "decode -> match -> fuse -> eval over manifests");
  std::vector<std::string> manifests;
  PipelineConfig pc;
  std::string pipe_out = "pipeline_out", pipe_weights, pipe_strategy = "hard";
  DecodeFlags pipe_decode;
  MatchFlags pipe_match;
  MetricFlags pipe_metrics;
  pipeline->add_option("--manifest", manifests, "Manifest files or a manifests.json list")
      ->required();
  pipeline->add_option("--out", pipe_out, "Output directory");
  pipeline->add_option("--threads", pc.threads, "Worker threads (POSEFUSE_THREADS overrides)")
      ->check(CLI::PositiveNumber);
  pipeline->add_flag("--keep-going", pc.keep_going, "Skip failing frames (exit 3 if any)");
  pipeline->add_option("--strategy", pipe_strategy, "Fusion strategy")
      ->check(CLI::IsMember({"hard", "linear", "mlp"}));
  pipeline->add_option("--weights", pipe_weights, "Integration MLP header (strategy mlp)");
  pipe_decode.add(pipeline);
  pipe_match.add(pipeline);
  pipe_metrics.add(pipeline);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  if (synth->parsed()) {
    return cmd_synth(seed, persons, frames, out_dir, sequence, sp, noise, skeleton_path);
  }

  if (decode->parsed()) {
    const SceneManifest m = load_manifest(manifest);
    const FrameData f = load_frame(m, 0);
    if (mode == "bottom-up") {
      emit(decode_out, pose_set_to_json(decode_bottom_up(f.maps, f.camera, f.skeleton,
                                                         decode_flags.params)));
      return kExitOk;
    }
    if (m.detections.empty()) fail(ErrorCode::kInvalidArgument, "top-down mode needs detections");
    json per_box = json::array();
    for (const Detection& d : detections_from_json(read_json(m.detections))) {
      per_box.push_back(pose2d_set_to_json(decode_topdown(f.maps.joint_heatmaps, f.maps.tag_maps, d,
                                                          enlarge, f.camera, f.maps.stride,
                                                          decode_flags.params)));
    }
    emit(decode_out, json{{"detections", per_box}});
    return kExitOk;
  }

  if (match->parsed()) {
    const auto bu = pose_set_from_json(read_json(bu_path));
    const auto td = pose_set_from_json(read_json(td_path));
    emit(match_out, match_result_to_json(match_pose_sets(bu, td, match_flags.resolve())));
    return kExitOk;
  }

  if (fuse->parsed()) {
    const Skeleton skeleton = load_skeleton(fuse_skeleton);
    const auto bu = pose_set_from_json(read_json(fuse_bu));
    const auto td = pose_set_from_json(read_json(fuse_td));
    const MatchResult matches = fuse_matches_path.empty()
                                    ? match_pose_sets(bu, td, fuse_match_flags.resolve())
                                    : match_result_from_json(read_json(fuse_matches_path));
    std::optional<MlpWeights> weights;
    if (!weights_path.empty()) weights = load_mlp(weights_path);
    const auto fused = fuse_matches(bu, td, matches, parse_strategy(strategy), skeleton.root_index(),
                                    weights ? &*weights : nullptr);
    emit(fuse_out, pose_set_to_json(fused));
    return kExitOk;
  }

  if (eval->parsed()) {
    const Skeleton skeleton = load_skeleton(eval_skeleton);
    std::optional<CameraIntrinsics> cam;
    if (!metric_flags.camera.empty()) cam = camera_from_json(read_json(metric_flags.camera));
    const MetricConfig mc = metric_flags.resolve(skeleton.root_index(), cam);
    const auto pred = pose_set_from_json(read_json(pred_path));
    const auto gt = pose_set_from_json(read_json(gt_path));
    if (gt.empty()) fail(ErrorCode::kEmptyInput, "ground-truth set is empty");
    MetricReport report = finalize_report(evaluate_frame(pred, gt, mc), mc);
    report.frames = 1;
    emit(report_path, metric_report_to_json(report));
    return kExitOk;
  }

  if (ssl->parsed()) {
    const Skeleton skeleton = load_skeleton(ssl_skeleton);
    const int root = skeleton.root_index();
    const CameraIntrinsics camera = camera_from_json(read_json(ssl_camera));
    const auto p3 = pose_set_from_json(read_json(ssl_3d));
    const auto p2 = pose2d_set_from_json(read_json(ssl_2d));
    if (p3.size() != p2.size()) fail(ErrorCode::kDimsMismatch, "pose3d and pose2d batch sizes differ");
    std::vector<Pose3D> repredicted;
    if (!ssl_repredicted.empty()) {
      repredicted = pose_set_from_json(read_json(ssl_repredicted));
      if (repredicted.size() != p3.size()) {
        fail(ErrorCode::kDimsMismatch, "repredicted batch size differs");
      }
    }
    std::vector<double> e_rep, e_mp;
    for (std::size_t b = 0; b < p3.size(); ++b) {
      e_rep.push_back(reprojection_error(p3[b], p2[b], camera));
      const Pose3D rotated = rotate_about_vertical(p3[b], theta, root);
      const Repredictor repredict = [&](const Pose2D&) {
        return repredicted.empty() ? rotated : repredicted[b];
      };
      e_mp.push_back(multi_perspective_error(p3[b], theta, repredict, camera, root));
    }
    const auto w = ssl_weight(e_rep, e_mp, epoch,
                              literal_sign ? SoftmaxSign::kLiteral : SoftmaxSign::kNegative);
    json samples = json::array();
    for (std::size_t b = 0; b < p3.size(); ++b) {
      samples.push_back(ssl_score_to_json(
          SslScore{e_rep[b], e_mp[b], w[b], ssl_loss(w[b], e_rep[b], e_mp[b], l_dis)}));
    }
    emit(ssl_out, json{{"samples", samples}, {"weights", w}, {"epoch", epoch}});
    return kExitOk;
  }

  if (adjacency->parsed()) {
    const Skeleton skeleton = load_skeleton(adj_skeleton);
    emit(adj_out, adjacency_to_json(gcn_adjacency(read_tensor(adj_heatmaps), skeleton), skeleton));
    return kExitOk;
  }

  if (pipeline->parsed()) {
    pc.strategy = parse_strategy(pipe_strategy);
    pc.decode = pipe_decode.params;
    pc.match = pipe_match.resolve();
    pc.metrics = pipe_metrics.resolve(0, std::nullopt);
    pc.out_dir = pipe_out;
    if (!pipe_weights.empty()) pc.weights = load_mlp(pipe_weights);
    const auto paths = expand_manifests(manifests);
    const PipelineResult result = run_pipeline(paths, pc);
    for (const FrameFailure& f : result.failures) std::cerr << "error: " << f.message << '\n';
    std::cerr << result.frames_ok << " of " << paths.size() << " frames evaluated\n";
    return result.exit_code;
  }
  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return e.code() == ErrorCode::kInvalidArgument ? kExitUsage : kExitDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDataError;
  }
}
