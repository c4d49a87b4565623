#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "dt6d/background.hpp"
#include "dt6d/bench.hpp"
#include "dt6d/check/selftest.hpp"
#include "dt6d/config.hpp"
#include "dt6d/datagen.hpp"
#include "dt6d/errors.hpp"
#include "dt6d/mesh.hpp"
#include "dt6d/nn/model_io.hpp"
#include "dt6d/nn/train.hpp"
#include "dt6d/parallel.hpp"
#include "dt6d/tracker.hpp"

namespace fs = std::filesystem;
using namespace dt6d;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;
constexpr int kExitConfig = 3;

TriMesh resolve_mesh(const PipelineConfig& cfg) {
  if (cfg.mesh == "toy") return make_toy_mesh();
  return load_mesh(cfg.mesh);
}

TriMesh default_occluder() {
  RandomStream rng = RandomStream::substream(0xD76D, 0, "occluder");
  return make_ellipsoid(0.05, 0.075, 0.04, 2, 0.25, rng);
}

/// Write-once discipline: refuses to clobber existing outputs.
std::string fresh_path(const std::string& dir, const std::string& name) {
  const std::string path = dir + "/" + name;
  if (fs::exists(path))
    throw ConfigError("output collision: " + path + " already exists (outputs are write-once)");
  return path;
}

void log_resolved_config(const PipelineConfig& cfg, const std::string& command) {
  fs::create_directories(cfg.output_dir);
  const std::string path = fresh_path(cfg.output_dir, command + ".resolved.ini");
  std::ofstream f(path);
  f << "# resolved configuration for `dt6d " << command << "`\n" << cfg.resolved_text();
  if (!f) throw FormatError("cannot write " + path);
}

std::vector<RgbdFrame> build_backgrounds(const PipelineConfig& cfg) {
  if (!cfg.bg_dir.empty())
    return build_background_pool(import_background_dir(cfg.bg_dir), cfg.bg_ssim_threshold);
  return make_procedural_pool(cfg.intrinsics(), cfg.bg_pool, cfg.bg_ssim_threshold, cfg.seed);
}

GenParams make_gen_params(const PipelineConfig& cfg, const TriMesh* mesh, const TriMesh* occluder,
                          const std::vector<RgbdFrame>* backgrounds) {
  GenParams p;
  p.mesh = mesh;
  p.occluder = occluder;
  p.backgrounds = backgrounds;
  p.intrinsics = cfg.intrinsics();
  p.input_side = cfg.input_side;
  p.radius_lo_m = cfg.radius_lo;
  p.radius_hi_m = cfg.radius_hi;
  p.t_max_mm = cfg.t_max_mm;
  p.r_max_deg = cfg.r_max_deg;
  p.bbox_margin = cfg.bbox_margin;
  p.augment = cfg.augment;
  return p;
}

SynthConfig make_synth_config(const PipelineConfig& cfg, SequenceKind kind, uint64_t seed_offset) {
  SynthConfig synth;
  synth.kind = kind;
  synth.n_frames = cfg.bench_frames;
  synth.seed = cfg.seed + seed_offset;
  synth.intrinsics = cfg.intrinsics();
  synth.t_max_mm = cfg.t_max_mm;
  synth.r_max_deg = cfg.r_max_deg;
  synth.noise_sigma = cfg.bench_noise_sigma;
  synth.turntable_rate_deg = cfg.turntable_rate_deg;
  synth.turntable_z_m = cfg.turntable_z;
  synth.radius_lo_m = cfg.radius_lo + 0.05;
  synth.radius_hi_m = cfg.radius_hi - 0.2;
  return synth;
}

SyntheticSequence resolve_sequence(const PipelineConfig& cfg, const TriMesh& mesh) {
  if (cfg.sequence_dir.empty())
    throw ConfigError("config: track.sequence is required (directory or synth:handheld / synth:turntable)");
  if (cfg.sequence_dir == "synth:handheld")
    return synth_sequence(mesh, make_synth_config(cfg, SequenceKind::kHandheld, 101));
  if (cfg.sequence_dir == "synth:turntable") {
    SynthConfig synth = make_synth_config(cfg, SequenceKind::kTurntable, 102);
    synth.occlusion = cfg.occlusion_levels.empty() ? 0.0 : cfg.occlusion_levels.front();
    return synth_sequence(mesh, synth);
  }
  return load_sequence(cfg.sequence_dir);
}

Tracker make_tracker(const PipelineConfig& cfg, const TriMesh* mesh, const RigidPose& init) {
  if (cfg.model_path.empty())
    throw ConfigError("config: track.model is required (path to a trained model file)");
  auto model = nn::load_model<float>(cfg.model_path);
  if (model.params.cfg.input_side != cfg.input_side)
    throw ConfigError("config: datagen.input_side (" + std::to_string(cfg.input_side) +
                      ") does not match the model input side (" +
                      std::to_string(model.params.cfg.input_side) + ")");
  return Tracker(mesh, std::move(model.params), model.stats, cfg.intrinsics(), init, cfg.t_max_mm,
                 cfg.r_max_deg, cfg.bbox_margin, resolve_worker_count(cfg.threads));
}

int cmd_gen_data(const PipelineConfig& cfg) {
  log_resolved_config(cfg, "gen-data");
  const std::string dataset_path = fresh_path(cfg.output_dir, "dataset.dt6d");
  const std::string log_path = fresh_path(cfg.output_dir, "gen-data.log");

  const TriMesh mesh = resolve_mesh(cfg);
  const TriMesh occluder = default_occluder();
  const auto backgrounds = build_backgrounds(cfg);
  const GenParams params = make_gen_params(cfg, &mesh, &occluder, &backgrounds);
  const int workers = resolve_worker_count(cfg.threads);

  const auto start = std::chrono::steady_clock::now();
  const DatagenResult result =
      generate_dataset(params, cfg.seed, cfg.count, cfg.stats_subset, dataset_path, workers);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  std::ofstream log(log_path);
  log << "records = " << cfg.count << "\n";
  log << "background_pool = " << backgrounds.size() << "\n";
  for (int c = 0; c < 4; ++c)
    log << "channel_" << c << " = mean " << result.stats.mean[c] << ", std "
        << result.stats.stddev[c] << "\n";
  log << "occluder_rate = " << static_cast<double>(result.rates.occluder_applied) / cfg.count << "\n";
  log << "blur_rate = " << static_cast<double>(result.rates.blur_applied) / cfg.count << "\n";
  log << "noise_rate = " << static_cast<double>(result.rates.noise_applied) / cfg.count << "\n";
  log << "seconds = " << seconds << "\n";
  std::cout << "wrote " << dataset_path << " (" << cfg.count << " records, "
            << backgrounds.size() << " backgrounds, " << seconds << " s)\n";
  return 0;
}

int cmd_train(const PipelineConfig& cfg) {
  log_resolved_config(cfg, "train");
  const std::string dataset_path = cfg.output_dir + "/dataset.dt6d";
  if (!fs::exists(dataset_path))
    throw ConfigError("config: dataset not found at " + dataset_path + " (run gen-data first)");
  const std::string model_path = fresh_path(cfg.output_dir, "model.dt6d");
  const std::string history_path = fresh_path(cfg.output_dir, "history.csv");

  const Dataset dataset = Dataset::open(dataset_path);
  if (static_cast<int>(dataset.header().side) != cfg.input_side)
    throw ConfigError("config: datagen.input_side does not match dataset side");

  nn::NetConfig net = cfg.network;
  net.input_side = cfg.input_side;
  const int workers = resolve_worker_count(cfg.threads);

  nn::TrainResult result = nn::train_model(dataset, net, cfg.train, workers,
                                           [](const nn::EpochRecord& rec) {
                                             std::printf("epoch %3d  train %.6f  val %.6f  lr %.6g\n",
                                                         rec.epoch, rec.train_mse, rec.val_mse, rec.lr);
                                             std::fflush(stdout);
                                           });
  nn::save_model(result.params, dataset.header().stats, model_path);
  nn::write_history_csv(result.history, history_path);
  std::cout << "best epoch " << result.best_epoch << " (val mse " << result.best_val_mse
            << ") -> " << model_path << "\n";
  return 0;
}

int cmd_track(const PipelineConfig& cfg) {
  log_resolved_config(cfg, "track");
  const std::string out_path = fresh_path(cfg.output_dir, "trajectory.csv");

  const TriMesh mesh = resolve_mesh(cfg);
  const SyntheticSequence seq = resolve_sequence(cfg, mesh);
  Tracker tracker = make_tracker(cfg, &mesh, seq.frames.front().gt_pose);

  FILE* f = std::fopen(out_path.c_str(), "w");
  if (!f) throw FormatError("cannot write " + out_path);
  std::fprintf(f, "frame,r00,r01,r02,r10,r11,r12,r20,r21,r22,tx,ty,tz,t_err_mm,r_err_deg\n");
  for (size_t i = 0; i < seq.frames.size(); ++i) {
    try {
      tracker.iterate(seq.frames[i].observed, cfg.track_iterations);
    } catch (const TrackingLost&) {
      // keep last estimate; the row still reports its error
    }
    const RigidPose& p = tracker.pose();
    const PoseErrors err = pose_error(p, seq.frames[i].gt_pose);
    std::fprintf(f, "%zu", i);
    for (int j = 0; j < 9; ++j) std::fprintf(f, ",%.9g", p.rotation.m[j]);
    std::fprintf(f, ",%.9g,%.9g,%.9g,%.9g,%.9g\n", p.translation.x, p.translation.y,
                 p.translation.z, err.translation_mm, err.rotation_deg);
  }
  std::fclose(f);
  std::cout << "wrote " << out_path << " (" << seq.frames.size() << " frames)\n";
  return 0;
}

std::string orientation_name(OccluderOrientation o) {
  return o == OccluderOrientation::kVertical ? "vertical" : "horizontal";
}

int cmd_bench_occlusion(const PipelineConfig& cfg) {
  log_resolved_config(cfg, "bench-occlusion");
  const TriMesh mesh = resolve_mesh(cfg);
  Tracker prototype = make_tracker(cfg, &mesh, RigidPose{Mat3::identity(), {0, 0, cfg.turntable_z}});

  OcclusionSweepConfig sweep;
  sweep.levels = cfg.occlusion_levels;
  sweep.n_frames = cfg.bench_frames;
  sweep.reset_every = cfg.bench_reset_every;
  sweep.seed = cfg.seed + 200;
  sweep.sequence = make_synth_config(cfg, SequenceKind::kTurntable, 0);
  const auto cells = occlusion_sweep(prototype, mesh, sweep);

  std::vector<std::pair<std::string, Summary>> summaries;
  for (const auto& cell : cells) {
    char prefix[64];
    std::snprintf(prefix, sizeof prefix, "occl_%02d_%s", static_cast<int>(cell.level * 100 + 0.5),
                  orientation_name(cell.orientation).c_str());
    const std::string frames_name =
        cell.level == 0 ? "occlusion_control_frames.csv" : std::string(prefix) + "_frames.csv";
    write_report_csv(cell.report, fresh_path(cfg.output_dir, frames_name));
    summaries.emplace_back(std::string(prefix) + "_translation", summarize_translation(cell.report));
    summaries.emplace_back(std::string(prefix) + "_rotation", summarize_rotation(cell.report));
  }
  write_summary_csv(summaries, fresh_path(cfg.output_dir, "occlusion_summary.csv"));
  std::cout << "wrote occlusion sweep (" << cells.size() << " cells) to " << cfg.output_dir << "\n";
  return 0;
}

int cmd_bench_init(const PipelineConfig& cfg) {
  log_resolved_config(cfg, "bench-init");
  const TriMesh mesh = resolve_mesh(cfg);

  SynthConfig synth = make_synth_config(cfg, SequenceKind::kHandheld, 300);
  synth.n_frames = std::max(cfg.bench_frames, 10);
  const SyntheticSequence seq = synth_sequence(mesh, synth);
  Tracker prototype = make_tracker(cfg, &mesh, seq.frames.front().gt_pose);

  InitPerturbationConfig init_cfg;
  init_cfg.trials = cfg.init_trials;
  init_cfg.iterations = cfg.init_iterations;
  init_cfg.seed = cfg.seed + 301;
  const auto cells = init_perturbation_bench(prototype, seq, init_cfg);
  write_init_csv(cells, fresh_path(cfg.output_dir, "init_perturbation.csv"));
  std::cout << "wrote init perturbation study (" << cells.size() << " increments) to "
            << cfg.output_dir << "\n";
  return 0;
}

int cmd_bench_sequence(const PipelineConfig& cfg, const std::string& export_dir) {
  log_resolved_config(cfg, "bench-sequence");
  const TriMesh mesh = resolve_mesh(cfg);
  const SyntheticSequence seq = resolve_sequence(cfg, mesh);
  if (!export_dir.empty()) {
    save_sequence(seq, export_dir);
    std::cout << "exported sequence to " << export_dir << "\n";
  }
  Tracker tracker = make_tracker(cfg, &mesh, seq.frames.front().gt_pose);
  const BenchReport report = run_tracking_benchmark(tracker, seq, cfg.bench_reset_every);
  write_report_csv(report, fresh_path(cfg.output_dir, "sequence_frames.csv"));
  std::vector<std::pair<std::string, Summary>> summaries{
      {"sequence_translation", summarize_translation(report)},
      {"sequence_rotation", summarize_rotation(report)},
  };
  write_summary_csv(summaries, fresh_path(cfg.output_dir, "sequence_summary.csv"));
  std::cout << "wrote sequence benchmark (" << report.rows.size() << " frames, "
            << report.lost_frames.size() << " lost) to " << cfg.output_dir << "\n";
  return 0;
}

int cmd_render_preview(const PipelineConfig& cfg, uint64_t index) {
  log_resolved_config(cfg, "render-preview");
  const TriMesh mesh = resolve_mesh(cfg);
  const TriMesh occluder = default_occluder();
  const auto backgrounds = build_backgrounds(cfg);
  const GenParams params = make_gen_params(cfg, &mesh, &occluder, &backgrounds);

  SampleDebug debug;
  generate_sample_pair(params, cfg.seed, index, &debug);
  write_color_png(debug.frame_pred, fresh_path(cfg.output_dir, "preview_pred_color.png"));
  write_depth_png(debug.frame_pred, fresh_path(cfg.output_dir, "preview_pred_depth.png"));
  write_color_png(debug.frame_obs, fresh_path(cfg.output_dir, "preview_obs_color.png"));
  write_depth_png(debug.frame_obs, fresh_path(cfg.output_dir, "preview_obs_depth.png"));
  std::cout << "wrote preview PNGs (record " << index << ", occluder="
            << (debug.flags.occluder ? "yes" : "no") << ", blur=" << (debug.flags.blur ? "yes" : "no")
            << ", sigma=" << debug.flags.sigma << ") to " << cfg.output_dir << "\n";
  return 0;
}

int cmd_selftest(uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  const auto results = check::run_selftest(seed);
  bool all_pass = true;
  for (const auto& result : results) {
    std::printf("%s  %-32s %s\n", result.pass ? "PASS" : "FAIL", result.name.c_str(),
                result.detail.c_str());
    all_pass &= result.pass;
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("%s (%zu checks, %.1f s)\n", all_pass ? "selftest passed" : "SELFTEST FAILED",
              results.size(), seconds);
  return all_pass ? 0 : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dt6d: render-feedback 6-DOF object tracking pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  uint64_t preview_index = 0;
  uint64_t selftest_seed = 20250810;
  std::string export_dir;
  std::string bench_mode;

  auto* gen = app.add_subcommand("gen-data", "generate a training dataset");
  gen->add_option("--config", config_path, "pipeline config file")->required();

  auto* train = app.add_subcommand("train", "train the regressor on a dataset");
  train->add_option("--config", config_path, "pipeline config file")->required();

  auto* track = app.add_subcommand("track", "run the tracker over a sequence");
  track->add_option("--config", config_path, "pipeline config file")->required();

  auto* bench = app.add_subcommand("bench", "benchmark protocols");
  bench->add_option("mode", bench_mode, "occlusion | init | sequence")->required();
  bench->add_option("--config", config_path, "pipeline config file")->required();
  bench->add_option("--export", export_dir, "also save the synthesized sequence to this directory");

  auto* preview = app.add_subcommand("render-preview", "write one predicted/observed frame pair");
  preview->add_option("--config", config_path, "pipeline config file")->required();
  preview->add_option("--index", preview_index, "record index to render");

  auto* selftest = app.add_subcommand("selftest", "gradient-check and oracle suites");
  selftest->add_option("--seed", selftest_seed, "seed for the randomized checks");

  auto* tmpl = app.add_subcommand("config-template", "print a commented configuration template");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (tmpl->parsed()) {
      std::cout << config_template();
      return 0;
    }
    if (selftest->parsed()) return cmd_selftest(selftest_seed);

    const PipelineConfig cfg = PipelineConfig::load(config_path);
    if (gen->parsed()) return cmd_gen_data(cfg);
    if (train->parsed()) return cmd_train(cfg);
    if (track->parsed()) return cmd_track(cfg);
    if (preview->parsed()) return cmd_render_preview(cfg, preview_index);
    if (bench->parsed()) {
      if (bench_mode == "occlusion") return cmd_bench_occlusion(cfg);
      if (bench_mode == "init") return cmd_bench_init(cfg);
      if (bench_mode == "sequence") return cmd_bench_sequence(cfg, export_dir);
      std::cerr << "unknown bench mode: " << bench_mode << " (use occlusion | init | sequence)\n";
      return kExitUsage;
    }
    std::cerr << "no command\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
