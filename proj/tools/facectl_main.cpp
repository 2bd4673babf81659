// facectl: control-signal tooling for landmark-driven portrait animation.
//
// Exit codes: 0 success, 1 validation failure, 2 usage or input error.

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "facectl/align.hpp"
#include "facectl/error.hpp"
#include "facectl/image_io.hpp"
#include "facectl/keypoints.hpp"
#include "facectl/losses.hpp"
#include "facectl/metrics.hpp"
#include "facectl/pipeline.hpp"
#include "facectl/projection.hpp"
#include "facectl/raster.hpp"
#include "facectl/scheduler.hpp"
#include "facectl/synth.hpp"

namespace fs = std::filesystem;
using namespace facectl;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitUsage = 2;

struct ValidationFailure {
  std::vector<std::string> violations;
};

// Options shared by the commands that read keypoints.
struct TopologyArgs {
  std::string topology;

  FaceTopology load() const { return topology.empty() ? default_topology() : load_topology(topology); }
};

struct ResolutionArgs {
  std::string resolution = "512";

  Resolution parse() const {
    Resolution r;
    const auto x = resolution.find('x');
    try {
      if (x == std::string::npos) {
        r.width = r.height = std::stoi(resolution);
      } else {
        r.width = std::stoi(resolution.substr(0, x));
        r.height = std::stoi(resolution.substr(x + 1));
      }
    } catch (const std::exception&) {
      throw SchemaError("bad --resolution '" + resolution + "' (expected N or WxH)");
    }
    if (r.width < kMinResolution || r.height < kMinResolution) {
      throw ResolutionError("resolution " + resolution + " below minimum " + std::to_string(kMinResolution));
    }
    return r;
  }
};

struct AlignArgs {
  std::size_t anchor = 0;
  bool no_rotation = false;
  std::vector<std::string> fit_groups;
  bool retarget = false;

  AlignOptions options(const FaceTopology& topo) const {
    AlignOptions o;
    o.anchor = anchor;
    o.use_rotation = !no_rotation;
    if (!fit_groups.empty()) {
      std::vector<int> indices;
      std::set<int> seen;
      for (const auto& g : fit_groups) {
        if (!topo.groups.contains(g)) throw SchemaError("unknown fit group '" + g + "'");
        for (int i : topo.group(g)) {
          if (seen.insert(i).second) indices.push_back(i);
        }
      }
      o.fit_indices = std::move(indices);
    }
    return o;
  }
};

struct StyleArgs {
  std::optional<int> line_width, pupil_radius, dilate;

  RenderStyle style() const {
    for (const auto& v : {line_width, pupil_radius, dilate}) {
      if (v && *v < 1) throw SchemaError("line width and radii must be >= 1");
    }
    return {line_width, pupil_radius, dilate};
  }
};

void add_topology(CLI::App* cmd, TopologyArgs& a) {
  cmd->add_option("--topology", a.topology, "Face topology JSON (default: built-in mp478)");
}

void add_resolution(CLI::App* cmd, ResolutionArgs& a) {
  cmd->add_option("--resolution", a.resolution, "Output size, N or WxH")->capture_default_str();
}

void add_align(CLI::App* cmd, AlignArgs& a) {
  cmd->add_option("--anchor", a.anchor, "Driving frame position used to fit the alignment")->capture_default_str();
  cmd->add_flag("--no-rotation", a.no_rotation, "Fit scale and translation only");
  cmd->add_option("--fit-groups", a.fit_groups, "Groups used for the fit (default: all retained features)");
  cmd->add_flag("--retarget", a.retarget, "Re-base expression offsets onto the reference geometry");
}

void add_style(CLI::App* cmd, StyleArgs& a, bool lines, bool masks) {
  if (lines) {
    cmd->add_option("--line-width", a.line_width, "Chain line width in px (default 2 at 512, scaled)");
    cmd->add_option("--pupil-radius", a.pupil_radius, "Pupil disk radius in px (default 3 at 512, scaled)");
  }
  if (masks) cmd->add_option("--dilate", a.dilate, "Expression mask radius in px (default 10 at 512, scaled)");
}

KeypointFrame reference_frame(const std::string& path, std::size_t position, const FaceTopology& topo) {
  const auto seq = load_sequence(path, topo);
  if (position >= seq.frames.size()) {
    throw BadAnchor(path + ": reference frame " + std::to_string(position) + " outside " +
                    std::to_string(seq.frames.size()) + " frames");
  }
  return seq.frames[position];
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text << '\n';
  } else {
    write_text_file(out, text + "\n");
  }
}

std::vector<fs::path> list_images(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && is_image_path(entry.path())) out.push_back(entry.path().filename());
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Flags > config file > defaults: config keys are appended only for flags the
// command line does not already carry.
std::vector<std::string> merge_config(std::vector<std::string> args) {
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (config_path.empty()) return args;

  nlohmann::json cfg;
  try {
    cfg = nlohmann::json::parse(read_text_file(config_path));
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(config_path + ": " + e.what());
  }
  if (!cfg.is_object()) throw SchemaError(config_path + ": config must be a JSON object");

  auto present = [&](const std::string& flag) {
    return std::any_of(args.begin(), args.end(),
                       [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
  };
  auto scalar = [](const nlohmann::json& v) {
    return v.is_string() ? v.get<std::string>() : v.dump();
  };
  for (const auto& [key, value] : cfg.items()) {
    const std::string flag = "--" + key;
    if (present(flag)) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) args.push_back(flag);
    } else if (value.is_array()) {
      for (const auto& v : value) {
        args.push_back(flag);
        args.push_back(scalar(v));
      }
    } else {
      args.push_back(flag);
      args.push_back(scalar(value));
    }
  }
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"facectl: expression-aware landmark control signals, masks, losses and generation plans"};
  app.require_subcommand(1);

  // synth
  int synth_frames = 16;
  std::uint64_t synth_seed = 0;
  std::string synth_out;
  TopologyArgs synth_topo;
  auto* synth = app.add_subcommand("synth", "Write a deterministic synthetic keypoint sequence");
  synth->add_option("--frames", synth_frames, "Number of frames")->check(CLI::PositiveNumber)->capture_default_str();
  synth->add_option("--seed", synth_seed, "Seed")->capture_default_str();
  synth->add_option("--out", synth_out, "Output JSON (default stdout)");
  add_topology(synth, synth_topo);

  // align
  std::string align_driving, align_reference, align_out;
  std::size_t align_ref_frame = 0;
  TopologyArgs align_topo;
  AlignArgs align_args;
  auto* align = app.add_subcommand("align", "Align a driving sequence to a reference frame");
  align->add_option("--driving", align_driving, "Driving sequence JSON")->required();
  align->add_option("--reference", align_reference, "Reference keypoints JSON")->required();
  align->add_option("--ref-frame", align_ref_frame, "Frame position inside the reference file")->capture_default_str();
  align->add_option("--out", align_out, "Output JSON (default stdout)");
  add_topology(align, align_topo);
  add_align(align, align_args);

  // project
  std::string project_input, project_out;
  TopologyArgs project_topo;
  ResolutionArgs project_res;
  auto* project = app.add_subcommand("project", "Project keypoints to expression-aware landmarks");
  project->add_option("--input", project_input, "Keypoint sequence JSON")->required();
  project->add_option("--out", project_out, "Output landmark JSON (default stdout)");
  add_topology(project, project_topo);
  add_resolution(project, project_res);

  // render
  std::string render_input, render_dir, render_format = "png";
  int render_jobs = 1;
  TopologyArgs render_topo;
  ResolutionArgs render_res;
  StyleArgs render_style;
  auto* render = app.add_subcommand("render", "Rasterize landmark control images");
  render->add_option("--input", render_input, "Keypoint sequence JSON")->required();
  render->add_option("--out-dir", render_dir, "Output directory")->required();
  render->add_option("--format", render_format, "png, ppm")->capture_default_str();
  render->add_option("--jobs", render_jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  add_topology(render, render_topo);
  add_resolution(render, render_res);
  add_style(render, render_style, true, false);

  // masks
  std::string masks_input, masks_dir, masks_format = "png";
  int masks_jobs = 1;
  int masks_downsample = 1;
  TopologyArgs masks_topo;
  ResolutionArgs masks_res;
  StyleArgs masks_style;
  auto* masks = app.add_subcommand("masks", "Rasterize expression and facial masks");
  masks->add_option("--input", masks_input, "Keypoint sequence JSON")->required();
  masks->add_option("--out-dir", masks_dir, "Output directory")->required();
  masks->add_option("--format", masks_format, "png, pgm")->capture_default_str();
  masks->add_option("--jobs", masks_jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  masks->add_option("--downsample", masks_downsample, "Box-downsample factor, block set if any pixel is")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  add_topology(masks, masks_topo);
  add_resolution(masks, masks_res);
  add_style(masks, masks_style, false, true);

  // loss
  std::string loss_z, loss_zhat, loss_me, loss_mf, loss_eps, loss_eps_pred, loss_mode = "sum-inside-norm";
  auto* loss = app.add_subcommand("loss", "Evaluate LDM + facial fine-grained loss on EMOT tensors");
  loss->add_option("--z", loss_z, "Ground-truth latent")->required();
  loss->add_option("--z-hat", loss_zhat, "Predicted latent")->required();
  loss->add_option("--me", loss_me, "Expression mask")->required();
  loss->add_option("--mf", loss_mf, "Facial mask")->required();
  auto* eps_opt = loss->add_option("--eps", loss_eps, "Ground-truth noise");
  auto* eps_pred_opt = loss->add_option("--eps-pred", loss_eps_pred, "Predicted noise");
  eps_opt->needs(eps_pred_opt);
  eps_pred_opt->needs(eps_opt);
  loss->add_option("--mode", loss_mode, "sum-inside-norm | sum-of-norms")
      ->check(CLI::IsMember({"sum-inside-norm", "sum-of-norms"}))
      ->capture_default_str();

  // plan
  int plan_frames = 0, plan_window = kDefaultWindow, plan_stride = 0;
  std::string plan_out, plan_check;
  auto* plan = app.add_subcommand("plan", "Keyframe-then-interpolate window plan for long videos");
  auto* frames_opt = plan->add_option("--frames", plan_frames, "Total frames T");
  plan->add_option("--check", plan_check, "Validate an existing plan JSON instead of planning")
      ->excludes(frames_opt);
  plan->add_option("--window", plan_window, "Model window W")->capture_default_str();
  plan->add_option("--stride", plan_stride, "Keyframe stride (default W-1)");
  plan->add_option("--out", plan_out, "Output JSON (default stdout)");

  // metrics
  std::string metrics_pred, metrics_gt, metrics_pred_lmk, metrics_gt_lmk, metrics_csv_out, metrics_json_out;
  double metrics_tau = kDefaultApThreshold;
  auto* metrics = app.add_subcommand("metrics", "L1, SSIM and landmark AP between prediction and ground truth");
  metrics->add_option("--pred", metrics_pred, "Predicted image directory")->required();
  metrics->add_option("--gt", metrics_gt, "Ground-truth image directory")->required();
  auto* pl = metrics->add_option("--pred-landmarks", metrics_pred_lmk, "Predicted landmark JSON");
  auto* gl = metrics->add_option("--gt-landmarks", metrics_gt_lmk, "Ground-truth landmark JSON");
  pl->needs(gl);
  gl->needs(pl);
  metrics->add_option("--tau", metrics_tau, "AP threshold, fraction of inter-ocular distance")->capture_default_str();
  metrics->add_option("--csv", metrics_csv_out, "Per-frame CSV output");
  metrics->add_option("--json", metrics_json_out, "Summary JSON output (default stdout)");

  // pipeline
  std::string pipe_reference, pipe_driving, pipe_dir, pipe_format = "png";
  std::size_t pipe_ref_frame = 0;
  int pipe_window = kDefaultWindow, pipe_stride = 0, pipe_jobs = 1;
  TopologyArgs pipe_topo;
  ResolutionArgs pipe_res;
  AlignArgs pipe_align;
  StyleArgs pipe_style;
  auto* pipeline = app.add_subcommand("pipeline", "Align, project and rasterize a driving sequence end to end");
  pipeline->add_option("--reference", pipe_reference, "Reference keypoints JSON")->required();
  pipeline->add_option("--driving", pipe_driving, "Driving sequence JSON")->required();
  pipeline->add_option("--ref-frame", pipe_ref_frame, "Frame position inside the reference file")->capture_default_str();
  pipeline->add_option("--out-dir", pipe_dir, "Output directory")->required();
  pipeline->add_option("--window", pipe_window, "Model window W for plan.json")->capture_default_str();
  pipeline->add_option("--stride", pipe_stride, "Keyframe stride (default W-1)");
  pipeline->add_option("--format", pipe_format, "png, ppm")->capture_default_str();
  pipeline->add_option("--jobs", pipe_jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  add_topology(pipeline, pipe_topo);
  add_resolution(pipeline, pipe_res);
  add_align(pipeline, pipe_align);
  add_style(pipeline, pipe_style, true, true);

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = merge_config(std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "facectl: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*synth) {
      const auto topo = synth_topo.load();
      emit(synth_out, serialize_sequence(synth_sequence(synth_frames, synth_seed, topo)));
    } else if (*align) {
      const auto topo = align_topo.load();
      const auto driving = load_sequence(align_driving, topo);
      const auto ref = reference_frame(align_reference, align_ref_frame, topo);
      const auto opts = align_args.options(topo);
      const auto out = align_args.retarget ? retarget_offsets(driving, ref, topo, opts)
                                           : align_sequence(driving, ref, topo, opts);
      emit(align_out, serialize_sequence(out));
    } else if (*project) {
      const auto topo = project_topo.load();
      const auto seq = load_sequence(project_input, topo);
      emit(project_out, serialize_landmarks(project_sequence(seq, topo, project_res.parse())));
    } else if (*render) {
      const auto topo = render_topo.load();
      const auto seq = load_sequence(render_input, topo);
      const auto res = render_res.parse();
      const auto style = render_style.style();
      fs::create_directories(render_dir);
      parallel_for(seq.frames.size(), render_jobs, [&](std::size_t f) {
        const auto lm = project_frame(seq.frames[f], topo, res);
        write_image(fs::path(render_dir) / frame_filename("lmk", f, render_format),
                    render_landmark_image(lm, topo, style));
      });
    } else if (*masks) {
      const auto topo = masks_topo.load();
      const auto seq = load_sequence(masks_input, topo);
      const auto res = masks_res.parse();
      const int radius = masks_style.style().dilate_radius.value_or(scaled_size(kDilateRadiusAt512, res));
      fs::create_directories(masks_dir);
      parallel_for(seq.frames.size(), masks_jobs, [&](std::size_t f) {
        const auto& frame = seq.frames[f];
        Mask expr = render_expression_mask(project_frame(frame, topo, res), radius);
        Mask face = render_facial_mask(frame, topo, res);
        if (masks_downsample > 1) {
          expr = downsample_mask(expr, masks_downsample);
          face = downsample_mask(face, masks_downsample);
        }
        write_image(fs::path(masks_dir) / frame_filename("mexp", f, masks_format), mask_to_gray(expr));
        write_image(fs::path(masks_dir) / frame_filename("mface", f, masks_format), mask_to_gray(face));
      });
    } else if (*loss) {
      const auto z = read_tensor(loss_z);
      const auto z_hat = read_tensor(loss_zhat);
      const auto m_e = read_tensor(loss_me);
      const auto m_f = read_tensor(loss_mf);
      const auto mode = parse_ffg_mode(loss_mode);
      const LossReport report = loss_eps.empty()
                                    ? ffg_report(z, z_hat, m_e, m_f, mode)
                                    : total_loss(read_tensor(loss_eps), read_tensor(loss_eps_pred), z, z_hat, m_e, m_f, mode);
      std::cout << report.to_json() << '\n';
    } else if (*plan) {
      if (plan_check.empty() && frames_opt->count() == 0) throw SchemaError("plan needs --frames or --check");
      const auto p = plan_check.empty() ? plan_inference(plan_frames, plan_window, plan_stride)
                                        : plan_from_json(read_text_file(plan_check));
      auto violations = validate_plan(p);
      if (!violations.empty()) throw ValidationFailure{std::move(violations)};
      emit(plan_out, plan_to_json(p));
    } else if (*metrics) {
      const auto names = list_images(metrics_pred);
      std::vector<FrameMetrics> rows;
      for (const auto& name : names) {
        const auto gt_path = fs::path(metrics_gt) / name;
        if (!fs::exists(gt_path)) continue;
        const auto a = read_rgb_image(fs::path(metrics_pred) / name);
        const auto b = read_rgb_image(gt_path);
        rows.push_back({name.string(), l1_metric(a, b), ssim(a, b), std::nullopt});
      }
      if (rows.empty()) throw IoError("no matching images between " + metrics_pred + " and " + metrics_gt);
      std::optional<double> ap;
      if (!metrics_pred_lmk.empty()) {
        const auto pred = parse_landmarks(read_text_file(metrics_pred_lmk));
        const auto gt = parse_landmarks(read_text_file(metrics_gt_lmk));
        ap = landmark_ap(pred, gt, metrics_tau);
        if (pred.size() == rows.size()) {
          for (std::size_t f = 0; f < rows.size(); ++f) rows[f].landmark_ap = landmark_ap(pred[f], gt[f], metrics_tau);
        }
      }
      if (!metrics_csv_out.empty()) write_text_file(metrics_csv_out, metrics_csv(rows));
      auto summary = nlohmann::json::parse(metrics_summary_json(rows));
      if (ap) summary["landmark_ap"] = *ap;
      emit(metrics_json_out, summary.dump(2));
    } else if (*pipeline) {
      const auto topo = pipe_topo.load();
      const auto driving = load_sequence(pipe_driving, topo);
      const auto ref = reference_frame(pipe_reference, pipe_ref_frame, topo);
      PipelineConfig cfg;
      cfg.resolution = pipe_res.parse();
      cfg.style = pipe_style.style();
      cfg.align = pipe_align.options(topo);
      cfg.retarget = pipe_align.retarget;
      cfg.window = pipe_window;
      cfg.stride = pipe_stride;
      cfg.image_format = pipe_format;
      cfg.jobs = pipe_jobs;
      const auto result = run_pipeline(driving, ref, topo, pipe_dir, cfg);
      auto violations = validate_plan(result.plan);
      if (driving.frames.size() >= 2 && !violations.empty()) throw ValidationFailure{std::move(violations)};
      std::cout << "wrote " << result.files.size() << " files to " << pipe_dir << '\n';
    }
  } catch (const ValidationFailure& v) {
    std::cerr << "facectl: validation failed\n";
    for (const auto& line : v.violations) std::cerr << "  " << line << '\n';
    return kExitValidation;
  } catch (const Error& e) {
    std::cerr << "facectl: " << to_string(e.kind()) << ": " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "facectl: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitOk;
}
