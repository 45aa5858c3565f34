#include "skynow/stereo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace skynow {

namespace {
constexpr double kEarthRadiusM = 6371000.0;
}

Vec2 StereoRig::baseline_east_north() const {
  const double lat0 = deg2rad(0.5 * (location_cam1.latitude_deg +
                                     location_cam2.latitude_deg));
  Vec2 v;
  v.x = deg2rad(location_cam2.longitude_deg - location_cam1.longitude_deg) *
        std::cos(lat0) * kEarthRadiusM;
  v.y = deg2rad(location_cam2.latitude_deg - location_cam1.latitude_deg) *
        kEarthRadiusM;
  return v;
}

void StereoRig::validate() const {
  location_cam1.validate();
  location_cam2.validate();
  if (!(baseline_m > 0.0)) throw ConfigError("stereo baseline must be > 0");
}

std::vector<double> CbhSearch::candidates() const {
  std::vector<double> h;
  for (double v = min_height_m; v <= max_height_m + 1e-9; v += step_m)
    h.push_back(v);
  h.push_back(unrealistic_height_m);
  return h;
}

void CbhSearch::validate() const {
  if (!(min_height_m > 0.0 && max_height_m > min_height_m && step_m > 0.0))
    throw ConfigError("invalid CBH candidate grid");
  if (unrealistic_height_m <= max_height_m)
    throw ConfigError("unrealistic CBH bin must sit above the grid");
  if (start_window_px < 4) throw ConfigError("CBH start window too small");
  if (!(max_window_frac > 0.0 && max_window_frac <= 0.2))
    throw ConfigError("CBH max window must be at most 20% of the image");
}

std::optional<double> CbhMap::median_cbh_m() const {
  std::vector<float> vals;
  vals.reserve(height_m.size() / 8);
  for (float h : height_m)
    if (h >= 0.0f) vals.push_back(h);
  if (vals.empty()) return std::nullopt;
  std::sort(vals.begin(), vals.end());
  const std::size_t n = vals.size();
  return n % 2 ? static_cast<double>(vals[n / 2])
               : 0.5 * (vals[n / 2 - 1] + vals[n / 2]);
}

CbhMap CbhMap::empty(int size) {
  CbhMap m;
  m.size = size;
  m.height_m.assign(static_cast<std::size_t>(size) * size, -1.0f);
  return m;
}

std::optional<SolarGeometry> reproject_at_height(double zenith1_deg,
                                                 double azimuth1_deg,
                                                 double height_m,
                                                 const StereoRig& rig,
                                                 double fov_deg) {
  if (height_m <= 0.0) throw NumericError("reproject_at_height: height <= 0");
  const Vec2 base = rig.baseline_east_north();
  const double ground = height_m * std::tan(deg2rad(zenith1_deg));
  const double east = ground * std::sin(deg2rad(azimuth1_deg)) - base.x;
  const double north = ground * std::cos(deg2rad(azimuth1_deg)) - base.y;
  const double radial = std::sqrt(east * east + north * north);

  SolarGeometry g;
  g.zenith_deg = rad2deg(std::atan2(radial, height_m));
  g.azimuth_deg = radial > 1e-12
                      ? wrap360(rad2deg(std::atan2(east, north)))
                      : 0.0;
  if (g.zenith_deg >= fov_deg) return std::nullopt;
  return g;
}

namespace {

struct GrayPlane {
  int size;
  std::vector<float> v;
  std::vector<std::uint8_t> valid;

  bool sample(double x, double y, double& out) const {
    const int x0 = static_cast<int>(std::floor(x));
    const int y0 = static_cast<int>(std::floor(y));
    if (x0 < 0 || y0 < 0 || x0 + 1 >= size || y0 + 1 >= size) return false;
    const std::size_t i = static_cast<std::size_t>(y0 * size + x0);
    if (!(valid[i] && valid[i + 1] && valid[i + size] && valid[i + size + 1]))
      return false;
    const double fx = x - x0, fy = y - y0;
    out = (1 - fx) * (1 - fy) * v[i] + fx * (1 - fy) * v[i + 1] +
          (1 - fx) * fy * v[i + size] + fx * fy * v[i + size + 1];
    return true;
  }
};

GrayPlane make_gray(const SkyImage& im) {
  GrayPlane g;
  g.size = im.size();
  g.valid = im.valid;
  g.v.resize(static_cast<std::size_t>(g.size) * g.size);
  for (int y = 0; y < g.size; ++y)
    for (int x = 0; x < g.size; ++x)
      g.v[static_cast<std::size_t>(y * g.size + x)] =
          (im.at(x, y, 0) + im.at(x, y, 1) + im.at(x, y, 2)) / 3.0f;
  return g;
}

// Camera-1 window taps for one (pixel, window) pair, reused across all
// candidate heights.
struct WindowTaps {
  std::vector<std::int16_t> dx, dy;
  std::vector<double> a;
  int total = 0;

  void build(const GrayPlane& g1, int px, int py, int win, int stride) {
    dx.clear();
    dy.clear();
    a.clear();
    total = 0;
    const int lo = -(win / 2);
    const int hi = win - 1 - win / 2;
    for (int oy = lo; oy <= hi; oy += stride)
      for (int ox = lo; ox <= hi; ox += stride) {
        ++total;
        const int x1 = px + ox, y1 = py + oy;
        if (x1 < 0 || y1 < 0 || x1 >= g1.size || y1 >= g1.size) continue;
        const std::size_t i1 = static_cast<std::size_t>(y1 * g1.size + x1);
        if (!g1.valid[i1]) continue;
        dx.push_back(static_cast<std::int16_t>(ox));
        dy.push_back(static_cast<std::int16_t>(oy));
        a.push_back(g1.v[i1]);
      }
  }
};

// NCC between the fixed camera-1 taps and the warped window in camera 2:
// taps are mapped through the local Jacobian of the height reprojection so
// perspective magnification differences between the views do not flatten the
// correlation peak. Taps outside either FOV are dropped pairwise; fails when
// fewer than half survive. `every` subsamples taps (coarse pruning pass).
bool window_ncc(const WindowTaps& taps, const GrayPlane& g2, double qx,
                double qy, const double jac[4], int every, double& ncc) {
  double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
  int n = 0, total = 0;
  for (std::size_t k = 0; k < taps.a.size();
       k += static_cast<std::size_t>(every)) {
    ++total;
    double b;
    if (!g2.sample(qx + jac[0] * taps.dx[k] + jac[1] * taps.dy[k],
                   qy + jac[2] * taps.dx[k] + jac[3] * taps.dy[k], b))
      continue;
    const double a = taps.a[k];
    sa += a;
    sb += b;
    saa += a * a;
    sbb += b * b;
    sab += a * b;
    ++n;
  }
  if (n < std::max(4, total / 2) ||
      n * every < taps.total / 2)
    return false;
  const double va = saa - sa * sa / n;
  const double vb = sbb - sb * sb / n;
  if (va <= 1e-12 || vb <= 1e-12) {
    ncc = 0.0;
    return true;
  }
  ncc = (sab - sa * sb / n) / std::sqrt(va * vb);
  return true;
}

}  // namespace

CbhGeometry CbhGeometry::build(const SkyGrid& grid, const CbhSearch& search,
                               const StereoRig& rig, int threads) {
  search.validate();
  rig.validate();
  const auto heights = search.candidates();
  CbhGeometry g;
  g.size_ = grid.size;
  g.heights_ = static_cast<int>(heights.size());
  g.table_.assign(static_cast<std::size_t>(grid.size) * grid.size *
                      g.heights_ * 6,
                  std::numeric_limits<float>::quiet_NaN());

  parallel_for(threads, static_cast<std::int64_t>(grid.size) * grid.size,
               [&](std::int64_t pix) {
    const int x = static_cast<int>(pix % grid.size);
    const int y = static_cast<int>(pix / grid.size);
    double zen, az;
    if (!grid.pixel_to_angles(x, y, zen, az)) return;
    if (zen >= std::min(search.max_zenith_deg, grid.fov_deg - 1e-9)) return;

    auto project = [&](double px, double py, double h, double& qx,
                       double& qy) {
      double z, a;
      grid.pixel_to_angles(px, py, z, a);
      const auto dir2 = reproject_at_height(z, a, h, rig, grid.fov_deg);
      if (!dir2) return false;
      grid.angles_to_pixel(dir2->zenith_deg, dir2->azimuth_deg, qx, qy);
      return true;
    };

    for (int hi = 0; hi < g.heights_; ++hi) {
      const double h = heights[static_cast<std::size_t>(hi)];
      double qx, qy;
      if (!project(x, y, h, qx, qy)) continue;
      double jac[4] = {1, 0, 0, 1};
      double qxx, qxy, qyx, qyy;
      if (project(x + 1, y, h, qxx, qxy) && project(x, y + 1, h, qyx, qyy)) {
        jac[0] = qxx - qx;
        jac[2] = qxy - qy;
        jac[1] = qyx - qx;
        jac[3] = qyy - qy;
      }
      float* row = g.table_.data() + (pix * g.heights_ + hi) * 6;
      row[0] = static_cast<float>(qx);
      row[1] = static_cast<float>(qy);
      row[2] = static_cast<float>(jac[0]);
      row[3] = static_cast<float>(jac[1]);
      row[4] = static_cast<float>(jac[2]);
      row[5] = static_cast<float>(jac[3]);
    }
  });
  return g;
}

bool CbhGeometry::lookup(int pixel_index, int height_index, double& qx,
                         double& qy, double jac[4]) const {
  const float* row =
      table_.data() +
      (static_cast<std::size_t>(pixel_index) * heights_ + height_index) * 6;
  if (std::isnan(row[0])) return false;
  qx = row[0];
  qy = row[1];
  jac[0] = row[2];
  jac[1] = row[3];
  jac[2] = row[4];
  jac[3] = row[5];
  return true;
}

CbhMap match_height(const SkyImage& image1, const SkyImage& image2,
                    const SegmentationMap& cloud_mask1, const CbhSearch& search,
                    const StereoRig& rig, int threads,
                    const CbhGeometry* geometry) {
  search.validate();
  rig.validate();
  if (image1.size() != image2.size() || image1.size() != cloud_mask1.size)
    throw DataError("match_height: grid mismatch");
  const int sz = image1.size();
  CbhMap map = CbhMap::empty(sz);

  CbhGeometry local_geometry;
  if (!geometry) {
    local_geometry = CbhGeometry::build(image1.grid, search, rig, threads);
    geometry = &local_geometry;
  }

  std::vector<int> cloud_px;
  for (int y = 0; y < sz; ++y)
    for (int x = 0; x < sz; ++x)
      if (cloud_mask1.at(x, y) == PixelClass::Cloud) cloud_px.push_back(y * sz + x);
  if (cloud_px.empty()) return map;

  if (search.max_pixels_per_frame > 0 &&
      static_cast<int>(cloud_px.size()) > search.max_pixels_per_frame) {
    const std::size_t stride =
        (cloud_px.size() + search.max_pixels_per_frame - 1) /
        search.max_pixels_per_frame;
    std::vector<int> sub;
    for (std::size_t i = 0; i < cloud_px.size(); i += stride)
      sub.push_back(cloud_px[i]);
    cloud_px.swap(sub);
  }

  const GrayPlane g1 = make_gray(image1);
  const GrayPlane g2 = make_gray(image2);
  const auto heights = search.candidates();
  const int max_win =
      std::max(search.start_window_px,
               static_cast<int>(std::floor(search.max_window_frac * sz)));

  // circumsolar exclusion around the detected sun
  double sun_zen = 0.0, sun_az = 0.0;
  bool have_sun = false;
  if (const auto sun = detect_sun(image1)) {
    have_sun = image1.grid.pixel_to_angles(sun->x, sun->y, sun_zen, sun_az);
  }

  parallel_for(threads, static_cast<std::int64_t>(cloud_px.size()),
               [&](std::int64_t idx) {
    const int px = cloud_px[idx] % sz;
    const int py = cloud_px[idx] / sz;
    double zen1, az1;
    if (!image1.grid.pixel_to_angles(px, py, zen1, az1)) return;
    if (zen1 >= std::min(search.max_zenith_deg, image1.grid.fov_deg - 1e-9))
      return;

    if (have_sun) {
      const double cosd =
          std::cos(deg2rad(zen1)) * std::cos(deg2rad(sun_zen)) +
          std::sin(deg2rad(zen1)) * std::sin(deg2rad(sun_zen)) *
              std::cos(deg2rad(az1 - sun_az));
      if (rad2deg(std::acos(std::clamp(cosd, -1.0, 1.0))) <
          search.circumsolar_exclusion_deg)
        return;
    }

    const int n_heights = geometry->height_count();
    WindowTaps taps;
    std::vector<double> score(static_cast<std::size_t>(n_heights));

    int win = search.start_window_px;
    int best_i = -1;
    double best = -2.0;
    for (;;) {
      const int stride = (win + 9) / 10;  // caps a window at ~121 taps
      taps.build(g1, px, py, win, stride);

      // coarse pruning pass, then exact NCC on the contenders
      std::fill(score.begin(), score.end(), -2.0);
      double coarse_max = -2.0;
      for (int hi = 0; hi < n_heights; ++hi) {
        double qx, qy, jac[4];
        if (!geometry->lookup(cloud_px[idx], hi, qx, qy, jac)) continue;
        double c;
        if (!window_ncc(taps, g2, qx, qy, jac, 4, c)) continue;
        score[static_cast<std::size_t>(hi)] = c;
        coarse_max = std::max(coarse_max, c);
      }
      best_i = -1;
      best = -2.0;
      for (int hi = 0; hi < n_heights; ++hi) {
        double& s = score[static_cast<std::size_t>(hi)];
        if (s < coarse_max - 0.12) continue;  // cannot contend for the peak
        double qx, qy, jac[4];
        geometry->lookup(cloud_px[idx], hi, qx, qy, jac);
        double c;
        if (!window_ncc(taps, g2, qx, qy, jac, 1, c)) {
          s = -2.0;
          continue;
        }
        s = c;
        if (c > best) {
          best = c;
          best_i = hi;
        }
      }
      if (best_i < 0) return;  // nothing matchable

      // ambiguity looks past the immediate grid neighbors of the peak:
      // adjacent candidates sample the same correlation maximum
      double second = -2.0;
      for (int hi = 0; hi < n_heights; ++hi)
        if (std::abs(hi - best_i) > 1)
          second = std::max(second, score[static_cast<std::size_t>(hi)]);
      if (best - second >= search.ambiguity_gap) break;
      if (win >= max_win) break;  // decide from the widest window tried
      win = std::min(max_win,
                     static_cast<int>(std::lround(win * std::sqrt(2.0))));
    }
    if (best < search.ncc_floor) return;  // too uncertain
    const double best_h = heights[static_cast<std::size_t>(best_i)];
    if (best_h >= search.unrealistic_height_m) return;  // unrealistic bin
    map.height_m[static_cast<std::size_t>(py * sz + px)] =
        static_cast<float>(best_h);
  });
  return map;
}

CbhMap temporal_fill(const CbhMap& current, const CbhMap* previous,
                     const SegmentationMap& cloud_mask) {
  if (!previous) return current;
  if (previous->size != current.size || cloud_mask.size != current.size)
    throw DataError("temporal_fill: grid mismatch");
  CbhMap out = current;
  for (int y = 0; y < out.size; ++y)
    for (int x = 0; x < out.size; ++x)
      if (!out.has(x, y) && cloud_mask.at(x, y) == PixelClass::Cloud &&
          previous->has(x, y))
        out.at(x, y) = previous->at(x, y);
  return out;
}

std::vector<ResolutionSummary> resolution_study(
    const RawImage& raw1, const RawImage& raw2, const LensModel& lens1,
    const LensModel& lens2, const CameraCalibration& calib1,
    const CameraCalibration& calib2, const StereoRig& rig,
    const SegThresholds& seg_thr, const CbhSearch& search,
    const std::vector<int>& sizes, int threads) {
  std::vector<ResolutionSummary> out;
  for (int size : sizes) {
    const SkyGrid grid{size, lens1.theta_fov_deg};
    const SkyImage im1 = undistort(raw1, lens1, calib1, grid, 0, "cam1");
    const SkyImage im2 = undistort(raw2, lens2, calib2, grid, 0, "cam2");
    const SegmentationMap seg1 = segment(im1, seg_thr);

    CbhSearch s = search;
    if (s.max_pixels_per_frame <= 0 || s.max_pixels_per_frame > 4000)
      s.max_pixels_per_frame = 4000;
    const CbhMap map = match_height(im1, im2, seg1, s, rig, threads);

    ResolutionSummary sum;
    sum.size = size;
    std::vector<float> vals;
    for (float h : map.height_m)
      if (h >= 0.0f) vals.push_back(h);
    sum.valid_pixels = static_cast<std::int64_t>(vals.size());
    if (!vals.empty()) {
      std::sort(vals.begin(), vals.end());
      auto quantile = [&](double q) {
        const double pos = q * (vals.size() - 1);
        const std::size_t i = static_cast<std::size_t>(pos);
        const double f = pos - i;
        return i + 1 < vals.size() ? (1 - f) * vals[i] + f * vals[i + 1]
                                   : static_cast<double>(vals[i]);
      };
      sum.median_m = quantile(0.5);
      sum.iqr_m = quantile(0.75) - quantile(0.25);
    }
    out.push_back(sum);
  }
  return out;
}

void write_cbh_png(const std::string& path, const CbhMap& map) {
  std::vector<std::uint16_t> data(map.height_m.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const float h = map.height_m[i];
    data[i] = h >= 0.0f && h < 65535.0f
                  ? static_cast<std::uint16_t>(std::lround(h))
                  : 65535;
  }
  write_png_gray16(path, map.size, map.size, data);
}

CbhMap read_cbh_png(const std::string& path) {
  int w = 0, h = 0;
  const auto data = read_png_gray16(path, w, h);
  if (w != h) throw DataError("CBH PNG must be square: " + path);
  CbhMap map = CbhMap::empty(w);
  for (std::size_t i = 0; i < data.size(); ++i)
    map.height_m[i] = data[i] == 65535 ? -1.0f : static_cast<float>(data[i]);
  return map;
}

}  // namespace skynow
