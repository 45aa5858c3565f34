#pragma once

#include <map>
#include <string>

#include "skynow/flow.hpp"
#include "skynow/lens.hpp"
#include "skynow/segmentation.hpp"
#include "skynow/solar.hpp"
#include "skynow/stereo.hpp"

namespace skynow {

/// Everything a batch run needs, loaded from one TOML-style key-value file.
/// Unknown keys are rejected; every key has a documented default.
struct RunConfig {
  // [site]
  StereoRig rig{{59.9724, 11.0524}, {59.9724, 11.0724}, 1120.0};

  // [solar]
  ClearSkyModel clear_sky;
  double min_elevation_deg = 10.0;

  // [lens1] / [lens2]; deviation polynomials come from calibration
  LensModel lens1{90.0, 960.0, std::vector<double>(8, 0.0)};
  LensModel lens2{90.0, 960.0, std::vector<double>(8, 0.0)};

  // [grid]
  int sky_size = 100;

  // [segmentation]
  SegThresholds segmentation;

  // [flow]
  FlowParams flow;
  double cmv_inconsistency_px = 2.0;

  // [cbh]
  CbhSearch cbh;

  // [features]
  bool eleventh_channel = false;  // reserved all-zero extra channel slot

  // [train]
  std::uint64_t train_seed = 42;
  int max_epochs = 60;
  int patience = 10;
  int batch_size_override = 0;   // 0 = architecture default
  double lr_override = 0.0;      // 0 = architecture default

  // [eval]
  int pi_repetitions = 10;
  int pi_bucket_s = 100;
  std::uint64_t pi_seed = 7;

  // [synth]
  std::uint64_t synth_seed = 1;
  int synth_days = 24;
  int synth_frames_per_day = 420;
  int synth_image_size = 128;
  double synth_azimuth_correction1 = 6.5;
  double synth_azimuth_correction2 = -9.7;
  bool synth_lens_deviation = true;

  static RunConfig load(const std::string& path);
  static RunConfig from_string(const std::string& text);
  void validate() const;
};

/// Minimal TOML subset: [section] headers, key = value lines, '#' comments.
/// Values: numbers, booleans, quoted strings.
std::map<std::string, std::string> parse_toml_subset(const std::string& text);

}  // namespace skynow
