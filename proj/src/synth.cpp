#include "skynow/synth.hpp"

#include <algorithm>
#include <cmath>

#include "skynow/solar.hpp"

namespace skynow {

void SceneSpec::validate(double min_height_m, double max_height_m) const {
  if (!(cloud_fraction_target >= 0.0 && cloud_fraction_target <= 1.0))
    throw ConfigError("infeasible scene: cloud fraction outside [0,1]");
  if (cloud_layer_height_m < min_height_m || cloud_layer_height_m > max_height_m)
    throw ConfigError("scene cloud height outside the CBH candidate range");
  if (frame_count < 2) throw ConfigError("scene needs at least 2 frames");
  if (image_size < 32) throw ConfigError("scene image size too small");
  site.validate();
}

namespace {

inline double hash01(std::uint64_t seed, std::int64_t ix, std::int64_t iy,
                     int octave) {
  std::uint64_t h = Rng::mix(seed + 0x9e37 * octave,
                             static_cast<std::uint64_t>(ix) * 0x1f123bb5 +
                                 static_cast<std::uint64_t>(iy) * 0x5bd1e995);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

inline double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

// Octave value noise in reference-grid units, range ~[0,1].
double octave_noise(std::uint64_t seed, double x, double y, double feature_px,
                    int octaves = 4) {
  double sum = 0.0, amp = 1.0, norm = 0.0;
  double freq = 1.0 / feature_px;
  for (int o = 0; o < octaves; ++o) {
    const double fx = x * freq, fy = y * freq;
    const std::int64_t ix = static_cast<std::int64_t>(std::floor(fx));
    const std::int64_t iy = static_cast<std::int64_t>(std::floor(fy));
    const double tx = smoothstep(fx - ix);
    const double ty = smoothstep(fy - iy);
    const double v00 = hash01(seed, ix, iy, o);
    const double v10 = hash01(seed, ix + 1, iy, o);
    const double v01 = hash01(seed, ix, iy + 1, o);
    const double v11 = hash01(seed, ix + 1, iy + 1, o);
    const double v = (v00 * (1 - tx) + v10 * tx) * (1 - ty) +
                     (v01 * (1 - tx) + v11 * tx) * ty;
    sum += amp * v;
    norm += amp;
    amp *= 0.55;
    freq *= 2.0;
  }
  return sum / norm;
}

struct Renderer {
  const SceneSpec& spec;
  ClearSkyModel model;
  double threshold = 2.0;  // above 1 disables clouds
  SkyGrid ref{kReferenceGridSize, 90.0};

  explicit Renderer(const SceneSpec& s, const ClearSkyModel& m)
      : spec(s), model(m) {
    ref.fov_deg = s.lens1.theta_fov_deg;
  }

  // Cloud pattern on the reference plane at frame t (advected uniformly in
  // camera-1 image coordinates, so the camera-1 flow is the wind vector).
  // Three octaves: the finest octave would fragment the mask into boundary
  // pixels whose flow estimates are dominated by the static sky.
  double pattern(double ref_x, double ref_y, int t) const {
    return octave_noise(spec.texture_seed, ref_x - t * spec.wind_px_per_frame.x,
                        ref_y - t * spec.wind_px_per_frame.y,
                        spec.texture_feature_px, 3);
  }

  // Smooth in-cloud brightness field (no aliasing octaves).
  double brightness(double ref_x, double ref_y, int t) const {
    return octave_noise(spec.texture_seed, ref_x - t * spec.wind_px_per_frame.x,
                        ref_y - t * spec.wind_px_per_frame.y,
                        spec.texture_feature_px, 2);
  }

  // Finer brightness texture inside clouds, advected with the same wind so
  // optical flow and stereo correlation have structure to lock onto. Two
  // octaves only: features below ~2x the per-frame displacement would alias
  // in the flow estimate.
  double detail(double ref_x, double ref_y, int t) const {
    return octave_noise(spec.texture_seed ^ 0x5DEECE66DULL,
                        ref_x - t * spec.wind_px_per_frame.x,
                        ref_y - t * spec.wind_px_per_frame.y,
                        spec.texture_feature_px * 0.45, 2);
  }

  bool is_cloud(double ref_x, double ref_y, int t) const {
    return pattern(ref_x, ref_y, t) >= threshold;
  }

  // World point (east, north relative to camera 1) of a sky direction seen
  // from a camera at `cam_offset`, intersected with the cloud plane.
  Vec2 plane_point(double zenith_deg, double azimuth_deg,
                   const Vec2& cam_offset) const {
    const double zen = std::min(zenith_deg, 89.5);
    const double ground = spec.cloud_layer_height_m * std::tan(deg2rad(zen));
    return Vec2{cam_offset.x + ground * std::sin(deg2rad(azimuth_deg)),
                cam_offset.y + ground * std::cos(deg2rad(azimuth_deg))};
  }

  // Reference-grid coordinates of a world point (camera-1 ideal projection).
  Vec2 ref_coords(const Vec2& world) const {
    const double radial = std::sqrt(world.x * world.x + world.y * world.y);
    const double zen = rad2deg(std::atan2(radial, spec.cloud_layer_height_m));
    const double az = rad2deg(std::atan2(world.x, world.y));
    double px, py;
    ref.angles_to_pixel(zen, az, px, py);
    return Vec2{px, py};
  }

  bool cloud_on_ray(double zenith_deg, double azimuth_deg,
                    const Vec2& cam_offset, int t) const {
    const Vec2 rc = ref_coords(plane_point(zenith_deg, azimuth_deg, cam_offset));
    return is_cloud(rc.x, rc.y, t);
  }

  RawImage render(int t, bool cam2, const SolarGeometry& sun) const {
    const LensModel& lens = cam2 ? spec.lens2 : spec.lens1;
    const double az_corr =
        cam2 ? spec.azimuth_correction2 : spec.azimuth_correction1;
    const Vec2 offset = cam2 ? spec.rig.baseline_east_north() : Vec2{0, 0};
    const int sz = spec.image_size;
    RawImage im = RawImage::create(sz, sz);
    const double cx = (sz - 1) * 0.5, cy = (sz - 1) * 0.5;

    const double sun_zen = sun.zenith_deg;
    const bool sun_up = sun_zen < lens.theta_fov_deg;

    for (int y = 0; y < sz; ++y) {
      for (int x = 0; x < sz; ++x) {
        const double dx = x - cx, dy = y - cy;
        const double r = std::sqrt(dx * dx + dy * dy);
        if (r > lens.image_radius_px) continue;  // frame: stays black
        const double rho = r / lens.image_radius_px;
        const double zen = lens.zenith_of_rho(rho);
        if (zen > lens.theta_fov_deg) continue;
        const double az_cam = r > 1e-9 ? rad2deg(std::atan2(dx, -dy)) : 0.0;
        const double az_world = az_cam + az_corr;

        const Vec2 rc = ref_coords(plane_point(zen, az_world, offset));
        const double p = pattern(rc.x, rc.y, t);
        double out[3];
        if (p >= threshold) {
          // gray cloud; brightness stays below the sun-detection threshold
          const double g = 0.44 + 0.18 * brightness(rc.x, rc.y, t) +
                           0.31 * detail(rc.x, rc.y, t);
          out[0] = g;
          out[1] = g;
          out[2] = 0.97 * g;
        } else {
          // blue sky, intensity falling off with zenith (saturation constant)
          const double f = 1.0 - 0.15 * zen / lens.theta_fov_deg;
          out[0] = 0.25 * f;
          out[1] = 0.45 * f;
          out[2] = 0.80 * f;
          if (sun_up) {
            const double cosd =
                std::cos(deg2rad(zen)) * std::cos(deg2rad(sun_zen)) +
                std::sin(deg2rad(zen)) * std::sin(deg2rad(sun_zen)) *
                    std::cos(deg2rad(az_world - sun.azimuth_deg));
            if (rad2deg(std::acos(std::clamp(cosd, -1.0, 1.0))) <
                spec.sun_radius_deg) {
              out[0] = 1.0;
              out[1] = 1.0;
              out[2] = 0.97;
            }
          }
        }
        for (int c = 0; c < 3; ++c)
          im.at(x, y, c) = static_cast<std::uint8_t>(
              std::lround(std::clamp(out[c], 0.0, 1.0) * 255.0));
      }
    }
    return im;
  }

  // Fraction of the solar cone blocked by cloud, sampled on a sunflower
  // spiral of directions around the sun.
  double occluded_fraction(const SolarGeometry& sun, int t) const {
    if (sun.zenith_deg >= 89.0) return 0.0;
    const int k = 48;
    int cloudy = 0;
    for (int i = 0; i < k; ++i) {
      const double rr =
          spec.sun_occlusion_cone_deg * std::sqrt((i + 0.5) / k);
      const double ang = 2.399963229728653 * i;  // golden angle
      // small-angle offset of the sun direction
      const double zen = sun.zenith_deg + rr * std::cos(ang);
      const double az =
          sun.azimuth_deg +
          rr * std::sin(ang) /
              std::max(0.05, std::sin(deg2rad(std::max(1.0, sun.zenith_deg))));
      if (cloud_on_ray(std::max(0.0, zen), az, Vec2{0, 0}, t)) ++cloudy;
    }
    return static_cast<double>(cloudy) / k;
  }
};

}  // namespace

Scene generate(const SceneSpec& spec, const ClearSkyModel& model) {
  spec.validate();
  Renderer rend(spec, model);

  // threshold realizing the target cloud fraction on camera 1 at frame 0
  if (spec.cloud_fraction_target <= 0.0) {
    rend.threshold = 2.0;
  } else if (spec.cloud_fraction_target >= 1.0) {
    rend.threshold = -1.0;
  } else {
    const SkyGrid& ref = rend.ref;
    std::vector<Vec2> probes;
    for (int y = 0; y < ref.size; ++y)
      for (int x = 0; x < ref.size; ++x)
        if (ref.valid(x, y))
          probes.push_back(Vec2{static_cast<double>(x), static_cast<double>(y)});
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 40; ++it) {
      const double mid = 0.5 * (lo + hi);
      std::int64_t n = 0;
      for (const auto& p : probes)
        n += rend.pattern(p.x, p.y, 0) >= mid;
      const double frac = static_cast<double>(n) / probes.size();
      // higher threshold -> fewer cloud pixels
      if (frac > spec.cloud_fraction_target)
        lo = mid;
      else
        hi = mid;
    }
    rend.threshold = 0.5 * (lo + hi);
  }

  Scene scene;
  scene.truth.flow_px_per_frame = spec.wind_px_per_frame;
  scene.truth.cbh_m = spec.cloud_layer_height_m;
  scene.truth.threshold = rend.threshold;

  const Vec2 base = spec.rig.baseline_east_north();
  const SkyGrid& ref = rend.ref;

  for (int t = 0; t < spec.frame_count; ++t) {
    const UtcTime ts = spec.start_time + static_cast<UtcTime>(t) * kCadenceSeconds;
    const SolarGeometry sun = solar_position(ts, spec.site);

    scene.truth.timestamps.push_back(ts);
    scene.frames.cam1.push_back(rend.render(t, false, sun));
    scene.frames.cam2.push_back(rend.render(t, true, sun));

    // truth masks on the reference grid
    std::vector<std::uint8_t> m1(static_cast<std::size_t>(ref.size) * ref.size, 0);
    std::vector<std::uint8_t> m2 = m1;
    for (int y = 0; y < ref.size; ++y)
      for (int x = 0; x < ref.size; ++x) {
        if (!ref.valid(x, y)) continue;
        const std::size_t i = static_cast<std::size_t>(y * ref.size + x);
        m1[i] = rend.is_cloud(x, y, t) ? 1 : 0;
        double zen, az;
        ref.pixel_to_angles(x, y, zen, az);
        m2[i] = rend.cloud_on_ray(zen, az, base, t) ? 1 : 0;
      }
    scene.truth.cloud_mask_cam1.push_back(std::move(m1));
    scene.truth.cloud_mask_cam2.push_back(std::move(m2));

    // irradiance truth
    const double ghi_clear = clear_sky_ghi(sun, model);
    const double occ = ghi_clear > 0.0 ? rend.occluded_fraction(sun, t) : 0.0;
    scene.truth.ghi_clear_wm2.push_back(ghi_clear);
    scene.truth.ghi_wm2.push_back(ghi_clear * (1.0 - spec.attenuation * occ));

    // sun truth in raw camera-1 coordinates
    Vec2 sun_px{-1.0, -1.0};
    std::uint8_t visible = 0;
    if (sun.zenith_deg < spec.lens1.theta_fov_deg) {
      const double rho = spec.lens1.rho_of_zenith(sun.zenith_deg);
      const double az_cam = sun.azimuth_deg - spec.azimuth_correction1;
      const double c = (spec.image_size - 1) * 0.5;
      sun_px.x = c + rho * spec.lens1.image_radius_px * std::sin(deg2rad(az_cam));
      sun_px.y = c - rho * spec.lens1.image_radius_px * std::cos(deg2rad(az_cam));
      visible = rend.cloud_on_ray(sun.zenith_deg, sun.azimuth_deg, Vec2{0, 0}, t)
                    ? 0
                    : 1;
    }
    scene.truth.sun_pixel_cam1_raw.push_back(sun_px);
    scene.truth.sun_visible.push_back(visible);
  }
  return scene;
}

std::vector<BenchmarkDay> benchmark_roster(std::uint64_t seed, int n_days,
                                           int frames_per_day, int image_size,
                                           const StereoRig& rig,
                                           const LensModel& lens1,
                                           const LensModel& lens2,
                                           double az_corr1, double az_corr2) {
  if (n_days < 1) throw ConfigError("benchmark roster needs at least 1 day");
  std::vector<BenchmarkDay> days;
  // regime cycle is fixed so labels never depend on the seed
  const SceneRegime cycle[5] = {SceneRegime::Broken, SceneRegime::Clear,
                                SceneRegime::Broken, SceneRegime::Overcast,
                                SceneRegime::Broken};
  const std::int64_t day0 = days_from_civil(2024, 5, 1);
  for (int i = 0; i < n_days; ++i) {
    Rng rng(Rng::mix(seed, static_cast<std::uint64_t>(i)));
    BenchmarkDay day;
    day.regime = cycle[i % 5];
    day.date = format_date((day0 + i) * 86400);

    SceneSpec& s = day.spec;
    s.rig = rig;
    s.lens1 = lens1;
    s.lens2 = lens2;
    s.azimuth_correction1 = az_corr1;
    s.azimuth_correction2 = az_corr2;
    s.site = rig.location_cam1;
    s.image_size = image_size;
    s.frame_count = frames_per_day;
    s.start_time = (day0 + i) * 86400 + 9 * 3600 + 30 * 60;  // 09:30 UTC
    s.texture_seed = Rng::mix(seed, 1000 + static_cast<std::uint64_t>(i));
    switch (day.regime) {
      case SceneRegime::Clear:
        s.cloud_fraction_target = 0.0;
        s.wind_px_per_frame = Vec2{0.0, 0.0};
        break;
      case SceneRegime::Overcast:
        s.cloud_fraction_target = 0.97;
        s.wind_px_per_frame = Vec2{rng.uniform(0.5, 1.5), rng.uniform(-0.5, 0.5)};
        break;
      case SceneRegime::Broken:
        s.cloud_fraction_target = rng.uniform(0.3, 0.6);
        {
          const double ang = rng.uniform(0.0, 2.0 * kPi);
          const double mag = rng.uniform(1.5, 3.0);
          s.wind_px_per_frame = Vec2{mag * std::cos(ang), mag * std::sin(ang)};
        }
        break;
    }
    s.cloud_layer_height_m = 1000.0 + 250.0 * static_cast<double>(rng.index(13));
    days.push_back(std::move(day));
  }
  return days;
}

}  // namespace skynow
