#include "skynow/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace skynow {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  std::size_t b = s.find_last_not_of(" \t\r");
  return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

}  // namespace

std::map<std::string, std::string> parse_toml_subset(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::string section;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    // strip comments outside quotes
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line = line.substr(0, i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(lineno) +
                          ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": empty key or value");
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    const std::string full = section.empty() ? key : section + "." + key;
    if (kv.count(full))
      throw ConfigError("duplicate config key: " + full);
    kv[full] = value;
  }
  return kv;
}

namespace {

class ConfigReader {
 public:
  explicit ConfigReader(std::map<std::string, std::string> kv)
      : kv_(std::move(kv)) {}

  double number(const std::string& key, double fallback) {
    used_.insert(key);
    const auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    try {
      std::size_t pos = 0;
      const double v = std::stod(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument(key);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config key " + key + ": not a number: " + it->second);
    }
  }

  int integer(const std::string& key, int fallback) {
    const double v = number(key, fallback);
    if (v != std::floor(v))
      throw ConfigError("config key " + key + ": expected an integer");
    return static_cast<int>(v);
  }

  std::uint64_t seed(const std::string& key, std::uint64_t fallback) {
    return static_cast<std::uint64_t>(
        number(key, static_cast<double>(fallback)));
  }

  bool boolean(const std::string& key, bool fallback) {
    used_.insert(key);
    const auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    if (it->second == "true") return true;
    if (it->second == "false") return false;
    throw ConfigError("config key " + key + ": expected true/false");
  }

  void reject_unknown() const {
    for (const auto& [key, value] : kv_)
      if (!used_.count(key))
        throw ConfigError("unknown config key: " + key);
  }

 private:
  std::map<std::string, std::string> kv_;
  std::set<std::string> used_;
};

}  // namespace

RunConfig RunConfig::from_string(const std::string& text) {
  ConfigReader r(parse_toml_subset(text));
  RunConfig c;

  c.rig.location_cam1.latitude_deg =
      r.number("site.latitude", c.rig.location_cam1.latitude_deg);
  c.rig.location_cam1.longitude_deg =
      r.number("site.longitude", c.rig.location_cam1.longitude_deg);
  c.rig.location_cam2.latitude_deg =
      r.number("site.cam2_latitude", c.rig.location_cam2.latitude_deg);
  c.rig.location_cam2.longitude_deg =
      r.number("site.cam2_longitude", c.rig.location_cam2.longitude_deg);
  c.rig.baseline_m = r.number("site.baseline_m", c.rig.baseline_m);

  c.clear_sky.solar_constant_g0 =
      r.number("solar.g0", c.clear_sky.solar_constant_g0);
  c.min_elevation_deg =
      r.number("solar.min_elevation_deg", c.min_elevation_deg);

  c.lens1.theta_fov_deg = r.number("lens1.fov_deg", c.lens1.theta_fov_deg);
  c.lens1.image_radius_px =
      r.number("lens1.image_radius_px", c.lens1.image_radius_px);
  c.lens2.theta_fov_deg = r.number("lens2.fov_deg", c.lens2.theta_fov_deg);
  c.lens2.image_radius_px =
      r.number("lens2.image_radius_px", c.lens2.image_radius_px);

  c.sky_size = r.integer("grid.sky_size", c.sky_size);

  c.segmentation.saturation_std =
      r.number("segmentation.saturation_std", c.segmentation.saturation_std);
  c.segmentation.nbr_clear =
      r.number("segmentation.nbr_clear", c.segmentation.nbr_clear);
  c.segmentation.nbr_overcast =
      r.number("segmentation.nbr_overcast", c.segmentation.nbr_overcast);
  c.segmentation.regime_midpoint =
      r.number("segmentation.regime_midpoint", c.segmentation.regime_midpoint);
  c.segmentation.kmeans_seed =
      r.seed("segmentation.kmeans_seed", c.segmentation.kmeans_seed);
  c.segmentation.exclude_sun_disk = r.boolean(
      "segmentation.exclude_sun_disk", c.segmentation.exclude_sun_disk);

  c.flow.window_frac = r.number("flow.window_frac", c.flow.window_frac);
  c.flow.poly_neighborhood =
      r.integer("flow.poly_neighborhood", c.flow.poly_neighborhood);
  c.flow.poly_sigma = r.number("flow.poly_sigma", c.flow.poly_sigma);
  c.flow.iterations = r.integer("flow.iterations", c.flow.iterations);
  c.flow.pyramid_levels =
      r.integer("flow.pyramid_levels", c.flow.pyramid_levels);
  c.cmv_inconsistency_px =
      r.number("flow.inconsistency_px", c.cmv_inconsistency_px);

  c.cbh.min_height_m = r.number("cbh.min_m", c.cbh.min_height_m);
  c.cbh.max_height_m = r.number("cbh.max_m", c.cbh.max_height_m);
  c.cbh.step_m = r.number("cbh.step_m", c.cbh.step_m);
  c.cbh.unrealistic_height_m =
      r.number("cbh.unrealistic_m", c.cbh.unrealistic_height_m);
  c.cbh.start_window_px =
      r.integer("cbh.start_window_px", c.cbh.start_window_px);
  c.cbh.max_window_frac =
      r.number("cbh.max_window_frac", c.cbh.max_window_frac);
  c.cbh.ncc_floor = r.number("cbh.ncc_floor", c.cbh.ncc_floor);
  c.cbh.ambiguity_gap = r.number("cbh.ambiguity_gap", c.cbh.ambiguity_gap);
  c.cbh.circumsolar_exclusion_deg =
      r.number("cbh.circumsolar_deg", c.cbh.circumsolar_exclusion_deg);
  c.cbh.max_zenith_deg = r.number("cbh.max_zenith_deg", c.cbh.max_zenith_deg);

  c.eleventh_channel =
      r.boolean("features.eleventh_channel", c.eleventh_channel);

  c.train_seed = r.seed("train.seed", c.train_seed);
  c.max_epochs = r.integer("train.max_epochs", c.max_epochs);
  c.patience = r.integer("train.patience", c.patience);
  c.batch_size_override = r.integer("train.batch_size", c.batch_size_override);
  c.lr_override = r.number("train.learning_rate", c.lr_override);

  c.pi_repetitions = r.integer("eval.pi_repetitions", c.pi_repetitions);
  c.pi_bucket_s = r.integer("eval.pi_bucket_s", c.pi_bucket_s);
  c.pi_seed = r.seed("eval.pi_seed", c.pi_seed);

  c.synth_seed = r.seed("synth.seed", c.synth_seed);
  c.synth_days = r.integer("synth.days", c.synth_days);
  c.synth_frames_per_day =
      r.integer("synth.frames_per_day", c.synth_frames_per_day);
  c.synth_image_size = r.integer("synth.image_size", c.synth_image_size);
  c.synth_azimuth_correction1 =
      r.number("synth.azimuth_correction1", c.synth_azimuth_correction1);
  c.synth_azimuth_correction2 =
      r.number("synth.azimuth_correction2", c.synth_azimuth_correction2);
  c.synth_lens_deviation =
      r.boolean("synth.lens_deviation", c.synth_lens_deviation);

  r.reject_unknown();
  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_string(ss.str());
}

void RunConfig::validate() const {
  rig.validate();
  if (!(clear_sky.solar_constant_g0 > 0))
    throw ConfigError("solar constant must be > 0");
  if (sky_size < 16 || sky_size > 2048)
    throw ConfigError("grid.sky_size out of range");
  if (!(segmentation.nbr_clear < segmentation.nbr_overcast))
    throw ConfigError("nbr_clear must be below nbr_overcast");
  if (segmentation.saturation_std <= 0.0 || segmentation.saturation_std >= 1.0)
    throw ConfigError("saturation_std must be in (0,1)");
  flow.validate();
  cbh.validate();
  if (max_epochs < 1 || patience < 1)
    throw ConfigError("train.max_epochs and train.patience must be >= 1");
  if (pi_repetitions < 1) throw ConfigError("eval.pi_repetitions must be >= 1");
  if (synth_days < 1 || synth_frames_per_day < 2)
    throw ConfigError("synth roster needs >= 1 day and >= 2 frames");
}

}  // namespace skynow
