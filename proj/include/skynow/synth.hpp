#pragma once

#include <string>
#include <vector>

#include "skynow/image.hpp"
#include "skynow/lens.hpp"
#include "skynow/stereo.hpp"

namespace skynow {

/// Virtual stereo sky scene: a single cloud layer (thresholded octave value
/// noise) advecting over two fisheye cameras, with a rendered sun disk and a
/// toy irradiance signal. Replaces the private instrument dataset and knows
/// its own ground truth.
struct SceneSpec {
  double cloud_fraction_target = 0.5;  // [0,1], measured on camera 1 frame 0
  double cloud_layer_height_m = 2000.0;
  Vec2 wind_px_per_frame{3.0, 0.0};  // at the 100 px reference grid
  std::uint64_t texture_seed = 1;
  GeoLocation site{59.9724, 11.0524};  // camera 1; sun trajectory anchor
  UtcTime start_time = 0;
  int frame_count = 2;
  int image_size = 128;  // raw render size
  StereoRig rig;
  LensModel lens1, lens2;            // deviation baked into the renders
  double azimuth_correction1 = 0.0;  // mounting rotations baked in
  double azimuth_correction2 = 0.0;
  double sun_radius_deg = 2.0;
  double sun_occlusion_cone_deg = 1.5;  // irradiance attenuation cone
  double attenuation = 0.75;            // GHI factor when sun fully occluded
  double texture_feature_px = 40.0;     // dominant cloud blob size, reference px

  void validate(double min_height_m = 500.0, double max_height_m = 10000.0) const;
};

struct SceneTruth {
  std::vector<UtcTime> timestamps;
  std::vector<double> ghi_wm2;            // toy irradiance per frame
  std::vector<double> ghi_clear_wm2;      // G0 cos(zenith) per frame
  std::vector<Vec2> sun_pixel_cam1_raw;   // raw coords, valid with flag below
  std::vector<std::uint8_t> sun_visible;  // 0 when fully occluded / below horizon
  // cloud masks on the 100 px reference grid (row-major, 0/1)
  std::vector<std::vector<std::uint8_t>> cloud_mask_cam1;
  std::vector<std::vector<std::uint8_t>> cloud_mask_cam2;
  Vec2 flow_px_per_frame;  // constant over cloud pixels by construction
  double cbh_m = 0.0;
  double threshold = 0.0;  // noise threshold realizing the cloud fraction
};

struct SceneFrames {
  std::vector<RawImage> cam1;
  std::vector<RawImage> cam2;
};

struct Scene {
  SceneFrames frames;
  SceneTruth truth;
};

constexpr int kReferenceGridSize = 100;

/// Renders the scene into both cameras with height-dependent parallax.
/// Deterministic for a fixed spec. Throws ConfigError on infeasible specs.
Scene generate(const SceneSpec& spec, const ClearSkyModel& model = {});

enum class SceneRegime { Clear, Overcast, Broken };

struct BenchmarkDay {
  std::string date;  // YYYY-MM-DD
  SceneRegime regime = SceneRegime::Broken;
  SceneSpec spec;
};

/// Fixed roster of clear / overcast / broken scene-days, deterministic from
/// the seed. Dates are consecutive; regime labels do not depend on the seed.
std::vector<BenchmarkDay> benchmark_roster(std::uint64_t seed, int n_days,
                                           int frames_per_day, int image_size,
                                           const StereoRig& rig,
                                           const LensModel& lens1,
                                           const LensModel& lens2,
                                           double az_corr1, double az_corr2);

}  // namespace skynow
