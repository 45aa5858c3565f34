#pragma once

#include <optional>
#include <vector>

#include "skynow/image.hpp"
#include "skynow/solar.hpp"

namespace skynow {

/// Fisheye lens: equidistant projection plus a 7th-order polynomial deviation
/// in normalized radius rho = r / image_radius_px:
///   zenith(rho) = rho * theta_fov + sum_k c[k] * rho^k   (degrees)
struct LensModel {
  double theta_fov_deg = 90.0;   // (0, 90]
  double image_radius_px = 0.0;  // R_img
  std::vector<double> deviation_poly = std::vector<double>(8, 0.0);  // c0..c7

  double zenith_of_rho(double rho) const;
  /// Inverse of zenith_of_rho on [0, fov]; monotone bisection.
  double rho_of_zenith(double zenith_deg) const;
  void validate() const;
};

struct CameraCalibration {
  double azimuth_correction_deg = 0.0;  // (-180, 180]
  bool residual_warning = false;        // circular spread above 5 deg
  double residual_spread_deg = 0.0;
};

/// One (radius, angle) row of a manufacturer lens table.
struct LensTableRow {
  double radius_norm = 0.0;
  double angle_deg = 0.0;
};

struct DeviationFit {
  std::vector<double> coefficients;  // c0..c7
  double mae_fraction_of_fov = 0.0;  // fit MAE / theta_fov
};

/// Sun pixel = center of mass of all pixels with mean(R,G,B) >= 245 on the
/// 8-bit scale. nullopt when no pixel qualifies.
std::optional<Vec2> detect_sun(const RawImage& image);
std::optional<Vec2> detect_sun(const SkyImage& image);

struct SunObservation {
  Vec2 pixel;             // detected sun, raw-image coordinates
  double image_center_x;  // optical center of that frame
  double image_center_y;
  double ephemeris_azimuth_deg;
};

/// Circular-mean offset between ephemeris azimuths and image-frame azimuths
/// of the detected sun. Needs >= 10 usable pairs (sun at least 3 px off
/// center); sets residual_warning when the circular spread exceeds 5 deg.
CameraCalibration calibrate_azimuth(const std::vector<SunObservation>& obs);

/// Least-squares 7th-order fit of the deviation from the ideal equidistant
/// relation. Throws DataError on fewer than 9 rows.
DeviationFit fit_deviation_poly(const std::vector<LensTableRow>& table,
                                double theta_fov_deg);

/// Reprojects a raw fisheye frame onto the ideal north-up equidistant grid,
/// removing lens deviation and the mounting rotation. Bilinear sampling;
/// source taps outside the lens FOV disk get zero weight. Output pixels
/// outside the grid's FOV disk are exactly (0,0,0) with mask false.
SkyImage undistort(const RawImage& raw, const LensModel& lens,
                   const CameraCalibration& calib, const SkyGrid& out_grid,
                   UtcTime timestamp, const std::string& camera_id);

/// Lanczos-3 resampling to a smaller (or equal) square grid. Channels are
/// clipped to [0,1]; only valid input pixels contribute (weights renormalized).
SkyImage downsample(const SkyImage& image, int target_size);

}  // namespace skynow
