#pragma once

#include <optional>
#include <string>
#include <vector>

#include "skynow/image.hpp"
#include "skynow/lens.hpp"
#include "skynow/segmentation.hpp"
#include "skynow/solar.hpp"

namespace skynow {

struct StereoRig {
  GeoLocation location_cam1;
  GeoLocation location_cam2;
  double baseline_m = 1120.0;

  /// East/north offset of camera 2 relative to camera 1, meters, from the
  /// two locations on a local tangent plane.
  Vec2 baseline_east_north() const;
  void validate() const;
};

struct CbhSearch {
  double min_height_m = 500.0;
  double max_height_m = 10000.0;
  double step_m = 250.0;
  /// Extra top bin absorbing circumsolar mismatches; always discarded.
  double unrealistic_height_m = 25000.0;
  int start_window_px = 10;
  double max_window_frac = 0.20;
  double ncc_floor = 0.5;       // peak NCC below this -> discarded
  double ambiguity_gap = 0.05;  // top-two NCC gap that triggers window growth
  double circumsolar_exclusion_deg = 5.0;
  /// Pixels beyond this zenith are not matched: the ground distance diverges
  /// and low candidate heights reproject outside the second camera's FOV,
  /// which would censor the candidate grid asymmetrically.
  double max_zenith_deg = 70.0;
  /// Deterministic stride cap on evaluated cloud pixels; 0 = all pixels.
  /// Used by the resolution study where dense evaluation is intractable.
  int max_pixels_per_frame = 0;

  /// Ascending realistic heights with the unrealistic bin appended last.
  std::vector<double> candidates() const;
  void validate() const;
};

/// Per-pixel cloud base heights; height < 0 means no estimate (not cloudy,
/// out of view, or discarded).
struct CbhMap {
  int size = 0;
  std::vector<float> height_m;

  float at(int x, int y) const {
    return height_m[static_cast<std::size_t>(y * size + x)];
  }
  float& at(int x, int y) {
    return height_m[static_cast<std::size_t>(y * size + x)];
  }
  bool has(int x, int y) const { return at(x, y) >= 0.0f; }
  /// Median over pixels with a valid height; nullopt when there are none.
  std::optional<double> median_cbh_m() const;
  static CbhMap empty(int size);
};

/// Maps a camera-1 sky direction to the camera-2 direction of the same point
/// on a horizontal plane at the hypothesized height. nullopt when the result
/// falls outside camera 2's FOV.
std::optional<SolarGeometry> reproject_at_height(double zenith1_deg,
                                                 double azimuth1_deg,
                                                 double height_m,
                                                 const StereoRig& rig,
                                                 double fov_deg);

/// Reprojection table for one grid/rig/candidate-set combination: camera-2
/// window center and local warp Jacobian per (pixel, candidate height).
/// Image-independent, so one table serves every frame of a run.
class CbhGeometry {
 public:
  static CbhGeometry build(const SkyGrid& grid, const CbhSearch& search,
                           const StereoRig& rig, int threads = 1);

  /// False when the candidate is unmappable for this pixel.
  bool lookup(int pixel_index, int height_index, double& qx, double& qy,
              double jac[4]) const;
  int height_count() const { return heights_; }

 private:
  int size_ = 0;
  int heights_ = 0;
  std::vector<float> table_;  // (pixel, height) -> qx,qy,j00,j01,j10,j11
};

/// Pixel-wise stereo matching over the candidate height grid. For each cloudy
/// camera-1 pixel the correlation window grows (doubling in area) while the
/// top two candidates stay within the ambiguity gap. Pixels whose best NCC is
/// below the floor, whose best candidate is the unrealistic bin, or which lie
/// within the circumsolar exclusion of the detected sun are discarded.
/// `geometry`, when given, must be built for the same grid/search/rig.
CbhMap match_height(const SkyImage& image1, const SkyImage& image2,
                    const SegmentationMap& cloud_mask1, const CbhSearch& search,
                    const StereoRig& rig, int threads = 1,
                    const CbhGeometry* geometry = nullptr);

/// Inserts the previous timestep's height for pixels that are cloudy now but
/// have no current estimate.
CbhMap temporal_fill(const CbhMap& current, const CbhMap* previous,
                     const SegmentationMap& cloud_mask);

struct ResolutionSummary {
  int size = 0;
  std::optional<double> median_m;
  double iqr_m = 0.0;
  std::int64_t valid_pixels = 0;
};

/// Image-size sensitivity study: runs undistort -> segment -> match_height on the
/// same raw stereo pair at several grid sizes and summarizes the height
/// distribution per size. Cloud pixels are stride-subsampled (cap 4000).
std::vector<ResolutionSummary> resolution_study(
    const RawImage& raw1, const RawImage& raw2, const LensModel& lens1,
    const LensModel& lens2, const CameraCalibration& calib1,
    const CameraCalibration& calib2, const StereoRig& rig,
    const SegThresholds& seg_thr, const CbhSearch& search,
    const std::vector<int>& sizes, int threads = 1);

/// CBH maps persist as 16-bit gray PNG, value = meters (65535 = no estimate).
void write_cbh_png(const std::string& path, const CbhMap& map);
CbhMap read_cbh_png(const std::string& path);

}  // namespace skynow
