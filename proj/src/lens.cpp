#include "skynow/lens.hpp"

#include <algorithm>
#include <cmath>

namespace skynow {

double LensModel::zenith_of_rho(double rho) const {
  double dev = 0.0;
  double p = 1.0;
  for (double c : deviation_poly) {
    dev += c * p;
    p *= rho;
  }
  return rho * theta_fov_deg + dev;
}

double LensModel::rho_of_zenith(double zenith_deg) const {
  double lo = 0.0, hi = 1.0;
  // mild deviations keep zenith(rho) monotone; widen hi if the lens table
  // undershoots the FOV at rho = 1
  if (zenith_of_rho(hi) < zenith_deg) hi = 1.1;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (zenith_of_rho(mid) < zenith_deg)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

void LensModel::validate() const {
  if (!(theta_fov_deg > 0.0 && theta_fov_deg <= 90.0))
    throw ConfigError("lens FOV must be in (0, 90] degrees");
  if (!(image_radius_px > 0.0)) throw ConfigError("lens image radius must be > 0");
  if (deviation_poly.size() != 8)
    throw ConfigError("lens deviation polynomial needs 8 coefficients");
}

namespace {

template <typename ImageT, typename IntensityFn>
std::optional<Vec2> sun_centroid(const ImageT& im, int w, int h,
                                 IntensityFn&& mean_rgb8) {
  double sx = 0.0, sy = 0.0;
  std::int64_t count = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (mean_rgb8(im, x, y) >= 245.0) {
        sx += x;
        sy += y;
        ++count;
      }
  if (count == 0) return std::nullopt;
  return Vec2{sx / count, sy / count};
}

}  // namespace

std::optional<Vec2> detect_sun(const RawImage& image) {
  return sun_centroid(image, image.width, image.height,
                      [](const RawImage& im, int x, int y) {
                        return (im.at(x, y, 0) + im.at(x, y, 1) +
                                im.at(x, y, 2)) /
                               3.0;
                      });
}

std::optional<Vec2> detect_sun(const SkyImage& image) {
  return sun_centroid(image, image.size(), image.size(),
                      [](const SkyImage& im, int x, int y) {
                        return (im.at(x, y, 0) + im.at(x, y, 1) +
                                im.at(x, y, 2)) /
                               3.0 * 255.0;
                      });
}

CameraCalibration calibrate_azimuth(const std::vector<SunObservation>& obs) {
  double sum_sin = 0.0, sum_cos = 0.0;
  std::vector<double> deltas;
  for (const auto& o : obs) {
    const double dx = o.pixel.x - o.image_center_x;
    const double dy = o.pixel.y - o.image_center_y;
    if (std::sqrt(dx * dx + dy * dy) < 3.0) continue;  // azimuth ill-defined
    const double img_az = wrap360(rad2deg(std::atan2(dx, -dy)));
    const double delta = deg2rad(o.ephemeris_azimuth_deg - img_az);
    sum_sin += std::sin(delta);
    sum_cos += std::cos(delta);
    deltas.push_back(delta);
  }
  if (deltas.size() < 10)
    throw DataError("calibrate_azimuth needs at least 10 usable sun observations");

  CameraCalibration calib;
  calib.azimuth_correction_deg = wrap180(rad2deg(std::atan2(sum_sin, sum_cos)));

  // circular spread around the recovered offset
  double sq = 0.0;
  for (double d : deltas) {
    const double r = wrap180(rad2deg(d) - calib.azimuth_correction_deg);
    sq += r * r;
  }
  calib.residual_spread_deg = std::sqrt(sq / static_cast<double>(deltas.size()));
  calib.residual_warning = calib.residual_spread_deg > 5.0;
  return calib;
}

DeviationFit fit_deviation_poly(const std::vector<LensTableRow>& table,
                                double theta_fov_deg) {
  if (table.size() < 9)
    throw DataError("fit_deviation_poly: need at least 9 table rows");
  const int rows = static_cast<int>(table.size());
  const int cols = 8;
  std::vector<double> a(static_cast<std::size_t>(rows) * cols);
  std::vector<double> b(rows);
  for (int i = 0; i < rows; ++i) {
    double p = 1.0;
    for (int j = 0; j < cols; ++j) {
      a[static_cast<std::size_t>(i) * cols + j] = p;
      p *= table[i].radius_norm;
    }
    b[i] = table[i].angle_deg - table[i].radius_norm * theta_fov_deg;
  }
  DeviationFit fit;
  fit.coefficients = lstsq(a, rows, cols, b);

  double mae = 0.0;
  for (int i = 0; i < rows; ++i) {
    double dev = 0.0, p = 1.0;
    for (int j = 0; j < cols; ++j) {
      dev += fit.coefficients[j] * p;
      p *= table[i].radius_norm;
    }
    mae += std::abs(dev - b[i]);
  }
  fit.mae_fraction_of_fov = mae / rows / theta_fov_deg;
  return fit;
}

SkyImage undistort(const RawImage& raw, const LensModel& lens,
                   const CameraCalibration& calib, const SkyGrid& out_grid,
                   UtcTime timestamp, const std::string& camera_id) {
  lens.validate();
  SkyImage out = SkyImage::create(out_grid);
  out.timestamp = timestamp;
  out.camera_id = camera_id;

  const double src_cx = (raw.width - 1) * 0.5;
  const double src_cy = (raw.height - 1) * 0.5;
  const double r_img = lens.image_radius_px;

  auto inside_fov = [&](int x, int y) {
    if (x < 0 || y < 0 || x >= raw.width || y >= raw.height) return false;
    const double dx = x - src_cx, dy = y - src_cy;
    return dx * dx + dy * dy <= r_img * r_img;
  };

  // the inverse lens relation depends only on the output radius
  const int lut_n = 2048;
  std::vector<double> rho_lut(lut_n + 1);
  for (int i = 0; i <= lut_n; ++i)
    rho_lut[static_cast<std::size_t>(i)] =
        lens.rho_of_zenith(lens.theta_fov_deg * i / lut_n);

  for (int y = 0; y < out_grid.size; ++y) {
    for (int x = 0; x < out_grid.size; ++x) {
      if (!out.is_valid(x, y)) continue;
      double zen, az_world;
      out.grid.pixel_to_angles(x, y, zen, az_world);
      if (zen > lens.theta_fov_deg) {
        out.valid[static_cast<std::size_t>(y * out_grid.size + x)] = 0;
        continue;
      }
      // mounting rotation handled in angular space
      const double az_cam = az_world - calib.azimuth_correction_deg;
      const double pos = zen / lens.theta_fov_deg * lut_n;
      const int i0 = std::min(lut_n - 1, static_cast<int>(pos));
      const double rho = rho_lut[static_cast<std::size_t>(i0)] +
                         (pos - i0) * (rho_lut[static_cast<std::size_t>(i0) + 1] -
                                       rho_lut[static_cast<std::size_t>(i0)]);
      const double r_src = rho * r_img;
      const double sx = src_cx + r_src * std::sin(deg2rad(az_cam));
      const double sy = src_cy - r_src * std::cos(deg2rad(az_cam));

      const int x0 = static_cast<int>(std::floor(sx));
      const int y0 = static_cast<int>(std::floor(sy));
      const double fx = sx - x0;
      const double fy = sy - y0;
      const double w[4] = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy,
                           fx * fy};
      const int px[4] = {x0, x0 + 1, x0, x0 + 1};
      const int py[4] = {y0, y0, y0 + 1, y0 + 1};

      double acc[3] = {0, 0, 0};
      double wsum = 0.0;
      for (int k = 0; k < 4; ++k) {
        if (!inside_fov(px[k], py[k])) continue;
        wsum += w[k];
        for (int c = 0; c < 3; ++c)
          acc[c] += w[k] * raw.at(px[k], py[k], c) / 255.0;
      }
      if (wsum <= 0.0) {
        out.valid[static_cast<std::size_t>(y * out_grid.size + x)] = 0;
        continue;
      }
      for (int c = 0; c < 3; ++c)
        out.at(x, y, c) = static_cast<float>(acc[c] / wsum);
    }
  }
  return out;
}

namespace {

inline double lanczos3(double t) {
  if (t == 0.0) return 1.0;
  const double a = 3.0;
  if (std::abs(t) >= a) return 0.0;
  const double pt = kPi * t;
  return a * std::sin(pt) * std::sin(pt / a) / (pt * pt);
}

}  // namespace

SkyImage downsample(const SkyImage& image, int target_size) {
  const int in = image.size();
  if (target_size > in) throw DataError("downsample: target exceeds source");
  SkyGrid out_grid{target_size, image.grid.fov_deg};
  SkyImage out = SkyImage::create(out_grid);
  out.timestamp = image.timestamp;
  out.camera_id = image.camera_id;

  const double scale = static_cast<double>(target_size) / in;  // <= 1
  const double support = 3.0 / scale;

  for (int oy = 0; oy < target_size; ++oy) {
    for (int ox = 0; ox < target_size; ++ox) {
      if (!out.is_valid(ox, oy)) continue;
      // output pixel center in input coordinates
      const double cx = (ox + 0.5) / scale - 0.5;
      const double cy = (oy + 0.5) / scale - 0.5;
      const int x0 = std::max(0, static_cast<int>(std::ceil(cx - support)));
      const int x1 = std::min(in - 1, static_cast<int>(std::floor(cx + support)));
      const int y0 = std::max(0, static_cast<int>(std::ceil(cy - support)));
      const int y1 = std::min(in - 1, static_cast<int>(std::floor(cy + support)));

      double acc[3] = {0, 0, 0};
      double wsum = 0.0;
      for (int iy = y0; iy <= y1; ++iy) {
        const double wy = lanczos3((iy - cy) * scale);
        if (wy == 0.0) continue;
        for (int ix = x0; ix <= x1; ++ix) {
          if (!image.is_valid(ix, iy)) continue;
          const double wgt = wy * lanczos3((ix - cx) * scale);
          if (wgt == 0.0) continue;
          wsum += wgt;
          for (int c = 0; c < 3; ++c) acc[c] += wgt * image.at(ix, iy, c);
        }
      }
      if (wsum <= 1e-12) {
        out.valid[static_cast<std::size_t>(oy * target_size + ox)] = 0;
        continue;
      }
      for (int c = 0; c < 3; ++c) {
        const double v = acc[c] / wsum;
        out.at(ox, oy, c) =
            static_cast<float>(v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v));
      }
    }
  }
  return out;
}

}  // namespace skynow
