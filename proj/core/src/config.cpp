#include "dt6d/config.hpp"

#include <fstream>
#include <sstream>

#include "dt6d/errors.hpp"

namespace dt6d {

namespace {

std::string trim(const std::string& s) {
  const size_t begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const size_t end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<double> parse_list(const std::string& value) {
  std::vector<double> out;
  std::istringstream ss(value);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(std::stod(trim(cell)));
  return out;
}

}  // namespace

std::map<std::string, std::string> parse_ini(const std::string& text) {
  std::map<std::string, std::string> entries;
  std::istringstream stream(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    const size_t comment = line.find_first_of("#;");
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("config: malformed section at line " + std::to_string(line_no));
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: expected key = value at line " + std::to_string(line_no));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config: empty key at line " + std::to_string(line_no));
    entries[section + "." + key] = value;
  }
  return entries;
}

CameraIntrinsics PipelineConfig::intrinsics() const {
  CameraIntrinsics k = CameraIntrinsics::kinect_like(width, height);
  if (fx > 0) k.fx = fx;
  if (fy > 0) k.fy = fy;
  if (cx >= 0) k.cx = cx;
  if (cy >= 0) k.cy = cy;
  return k;
}

void PipelineConfig::validate() const {
  intrinsics().validate();
  augment.validate();
  network.validate();
  train.validate();
  if (count == 0) throw ConfigError("config: datagen.count must be positive");
  if (input_side < 8) throw ConfigError("config: datagen.input_side too small");
  if (!(radius_lo > 0) || !(radius_hi > radius_lo))
    throw ConfigError("config: datagen radius range invalid");
  if (stats_subset < 100) throw ConfigError("config: datagen.stats_subset must be >= 100");
  if (bg_pool < 1) throw ConfigError("config: datagen.bg_pool must be >= 1");
  if (output_dir.empty()) throw ConfigError("config: project.output_dir required");
  if (bench_frames < 2) throw ConfigError("config: bench.frames must be >= 2");
  for (double level : occlusion_levels)
    if (level < 0 || level > 0.6) throw ConfigError("config: bench.occlusion_levels in [0,0.6]");
}

PipelineConfig PipelineConfig::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("config: cannot open: " + path);
  std::stringstream buffer;
  buffer << f.rdbuf();
  const auto entries = parse_ini(buffer.str());

  PipelineConfig cfg;
  for (const auto& [full_key, value] : entries) {
    try {
      if (full_key == "project.seed") cfg.seed = std::stoull(value);
      else if (full_key == "project.output_dir") cfg.output_dir = value;
      else if (full_key == "project.threads") cfg.threads = std::stoi(value);
      else if (full_key == "project.mesh") cfg.mesh = value;
      else if (full_key == "camera.width") cfg.width = std::stoi(value);
      else if (full_key == "camera.height") cfg.height = std::stoi(value);
      else if (full_key == "camera.fx") cfg.fx = std::stod(value);
      else if (full_key == "camera.fy") cfg.fy = std::stod(value);
      else if (full_key == "camera.cx") cfg.cx = std::stod(value);
      else if (full_key == "camera.cy") cfg.cy = std::stod(value);
      else if (full_key == "datagen.count") cfg.count = std::stoull(value);
      else if (full_key == "datagen.input_side") cfg.input_side = std::stoi(value);
      else if (full_key == "datagen.radius_lo") cfg.radius_lo = std::stod(value);
      else if (full_key == "datagen.radius_hi") cfg.radius_hi = std::stod(value);
      else if (full_key == "datagen.t_max_mm") cfg.t_max_mm = std::stod(value);
      else if (full_key == "datagen.r_max_deg") cfg.r_max_deg = std::stod(value);
      else if (full_key == "datagen.bbox_margin") cfg.bbox_margin = std::stod(value);
      else if (full_key == "datagen.stats_subset") cfg.stats_subset = std::stoull(value);
      else if (full_key == "datagen.bg_pool") cfg.bg_pool = std::stoi(value);
      else if (full_key == "datagen.bg_ssim_threshold") cfg.bg_ssim_threshold = std::stod(value);
      else if (full_key == "datagen.bg_dir") cfg.bg_dir = value;
      else if (full_key == "augment.p_noise") cfg.augment.p_noise = std::stod(value);
      else if (full_key == "augment.sigma_lo") cfg.augment.sigma_lo = std::stod(value);
      else if (full_key == "augment.sigma_hi") cfg.augment.sigma_hi = std::stod(value);
      else if (full_key == "augment.p_blur") cfg.augment.p_blur = std::stod(value);
      else if (full_key == "augment.p_occluder") cfg.augment.p_occluder = std::stod(value);
      else if (full_key == "augment.hue_lum_range") cfg.augment.hue_lum_range = std::stod(value);
      else if (full_key == "network.branch_filters") cfg.network.branch_filters = std::stoi(value);
      else if (full_key == "network.trunk_filters") cfg.network.trunk_filters = std::stoi(value);
      else if (full_key == "network.trunk_blocks") cfg.network.trunk_blocks = std::stoi(value);
      else if (full_key == "network.fc_units") cfg.network.fc_units = std::stoi(value);
      else if (full_key == "network.bn_momentum") cfg.network.bn_momentum = std::stod(value);
      else if (full_key == "network.bn_eps") cfg.network.bn_eps = std::stod(value);
      else if (full_key == "network.dropout_keep") cfg.network.dropout_keep = std::stod(value);
      else if (full_key == "train.batch") cfg.train.batch = std::stoi(value);
      else if (full_key == "train.lr") cfg.train.lr = std::stod(value);
      else if (full_key == "train.decay") cfg.train.decay = std::stod(value);
      else if (full_key == "train.patience") cfg.train.patience = std::stoi(value);
      else if (full_key == "train.max_epochs") cfg.train.max_epochs = std::stoi(value);
      else if (full_key == "track.model") cfg.model_path = value;
      else if (full_key == "track.sequence") cfg.sequence_dir = value;
      else if (full_key == "track.iterations") cfg.track_iterations = std::stoi(value);
      else if (full_key == "bench.frames") cfg.bench_frames = std::stoi(value);
      else if (full_key == "bench.reset_every") cfg.bench_reset_every = std::stoi(value);
      else if (full_key == "bench.occlusion_levels") cfg.occlusion_levels = parse_list(value);
      else if (full_key == "bench.init_trials") cfg.init_trials = std::stoi(value);
      else if (full_key == "bench.init_iterations") cfg.init_iterations = std::stoi(value);
      else if (full_key == "bench.noise_sigma") cfg.bench_noise_sigma = std::stod(value);
      else if (full_key == "bench.turntable_z") cfg.turntable_z = std::stod(value);
      else if (full_key == "bench.turntable_rate_deg") cfg.turntable_rate_deg = std::stod(value);
      else throw ConfigError("config: unknown key '" + full_key + "' in " + path);
    } catch (const std::invalid_argument&) {
      throw ConfigError("config: bad value for '" + full_key + "': " + value);
    } catch (const std::out_of_range&) {
      throw ConfigError("config: value out of range for '" + full_key + "': " + value);
    }
  }
  cfg.network.input_side = cfg.input_side;
  cfg.train.seed = cfg.seed;
  cfg.validate();
  return cfg;
}

std::string PipelineConfig::resolved_text() const {
  std::ostringstream out;
  out.precision(17);
  out << "[project]\n";
  out << "seed = " << seed << "\n";
  out << "output_dir = " << output_dir << "\n";
  out << "threads = " << threads << "\n";
  out << "mesh = " << mesh << "\n\n";
  out << "[camera]\n";
  out << "width = " << width << "\nheight = " << height << "\n";
  out << "fx = " << fx << "\nfy = " << fy << "\ncx = " << cx << "\ncy = " << cy << "\n\n";
  out << "[datagen]\n";
  out << "count = " << count << "\ninput_side = " << input_side << "\n";
  out << "radius_lo = " << radius_lo << "\nradius_hi = " << radius_hi << "\n";
  out << "t_max_mm = " << t_max_mm << "\nr_max_deg = " << r_max_deg << "\n";
  out << "bbox_margin = " << bbox_margin << "\nstats_subset = " << stats_subset << "\n";
  out << "bg_pool = " << bg_pool << "\nbg_ssim_threshold = " << bg_ssim_threshold << "\n";
  out << "bg_dir = " << bg_dir << "\n\n";
  out << "[augment]\n";
  out << "p_noise = " << augment.p_noise << "\nsigma_lo = " << augment.sigma_lo << "\n";
  out << "sigma_hi = " << augment.sigma_hi << "\np_blur = " << augment.p_blur << "\n";
  out << "p_occluder = " << augment.p_occluder << "\nhue_lum_range = " << augment.hue_lum_range << "\n\n";
  out << "[network]\n";
  out << "branch_filters = " << network.branch_filters << "\ntrunk_filters = " << network.trunk_filters << "\n";
  out << "trunk_blocks = " << network.trunk_blocks << "\nfc_units = " << network.fc_units << "\n";
  out << "bn_momentum = " << network.bn_momentum << "\nbn_eps = " << network.bn_eps << "\n";
  out << "dropout_keep = " << network.dropout_keep << "\n\n";
  out << "[train]\n";
  out << "batch = " << train.batch << "\nlr = " << train.lr << "\ndecay = " << train.decay << "\n";
  out << "patience = " << train.patience << "\nmax_epochs = " << train.max_epochs << "\n\n";
  out << "[track]\n";
  out << "model = " << model_path << "\nsequence = " << sequence_dir << "\n";
  out << "iterations = " << track_iterations << "\n\n";
  out << "[bench]\n";
  out << "frames = " << bench_frames << "\nreset_every = " << bench_reset_every << "\n";
  out << "occlusion_levels = ";
  for (size_t i = 0; i < occlusion_levels.size(); ++i)
    out << (i ? "," : "") << occlusion_levels[i];
  out << "\ninit_trials = " << init_trials << "\ninit_iterations = " << init_iterations << "\n";
  out << "noise_sigma = " << bench_noise_sigma << "\nturntable_z = " << turntable_z << "\n";
  out << "turntable_rate_deg = " << turntable_rate_deg << "\n";
  return out.str();
}

std::string config_template() {
  return R"(# dt6d pipeline configuration. Every key is optional; the values shown are
# the defaults. All randomness derives from project.seed.

[project]
seed = 1
output_dir = out
threads = 0            # 0 = all cores; the DT6D_THREADS env var overrides
mesh = toy             # builtin "toy" or a path to an OBJ file

[camera]
width = 256
height = 212
# fx/fy/cx/cy default to a Kinect-v2-like model scaled to width/height.
#fx = 182.5
#fy = 182.5
#cx = 128
#cy = 106

[datagen]
count = 20000          # training pairs to generate
input_side = 150       # network input resolution S
radius_lo = 0.4        # observed-pose distance range, meters
radius_hi = 1.5
t_max_mm = 20          # delta sampling / label scaling ranges
r_max_deg = 10
bbox_margin = 0.15
stats_subset = 512     # records used for channel statistics
bg_pool = 48           # procedural background scenes before deduplication
bg_ssim_threshold = 0.92
bg_dir =               # directory of color_*.png/depth_*.png; empty = procedural

[augment]
p_noise = 0.95
sigma_lo = 0
sigma_hi = 2           # 8-bit-equivalent units
p_blur = 0.4
p_occluder = 0.6
hue_lum_range = 0.05

[network]
branch_filters = 24
trunk_filters = 48
trunk_blocks = 3
fc_units = 50
bn_momentum = 0.99
bn_eps = 1e-5
dropout_keep = 0.5

[train]
batch = 64
lr = 0.005
decay = 1e-5           # per-step: lr/(1 + decay*t)
patience = 5
max_epochs = 50

[track]
model =                # model file produced by `train`
sequence =             # sequence directory (see `bench sequence --export`)
iterations = 1         # network applications per frame

[bench]
frames = 60
reset_every = 15
occlusion_levels = 0.1,0.2,0.3,0.4
init_trials = 40
init_iterations = 15
noise_sigma = 1
turntable_z = 0.7
turntable_rate_deg = 2
)";
}

}  // namespace dt6d
