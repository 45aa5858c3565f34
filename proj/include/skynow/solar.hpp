#pragma once

#include <optional>
#include <vector>

#include "skynow/common.hpp"

namespace skynow {

struct GeoLocation {
  double latitude_deg = 0.0;   // [-90, 90]
  double longitude_deg = 0.0;  // [-180, 180], east positive

  void validate() const;
};

/// Azimuth convention (used everywhere in this project): degrees clockwise
/// from true north, in [0, 360). Elevation + zenith = 90 exactly.
struct SolarGeometry {
  double zenith_deg = 0.0;   // [0, 180]
  double azimuth_deg = 0.0;  // [0, 360)

  double elevation_deg() const { return 90.0 - zenith_deg; }
};

struct ClearSkyModel {
  double solar_constant_g0 = 1361.0;  // W/m^2
};

struct IrradianceSample {
  UtcTime timestamp = 0;
  double ghi_wm2 = 0.0;
};

struct IrradianceSeries {
  std::vector<IrradianceSample> samples;  // strictly increasing timestamps

  void validate() const;  // monotone timestamps, ghi >= 0
};

struct DailyStats {
  double mean_clearness_kbar = 0.0;
  double mean_variability_vbar = 0.0;
};

/// Geometric (unrefracted) solar position from the Astronomical Almanac
/// low-precision algorithm (Michalsky 1988), accuracy 0.01 deg, 1950-2050.
SolarGeometry solar_position(UtcTime time_utc, const GeoLocation& location);

/// Extraterrestrial clear-sky GHI, G0*cos(zenith), clamped to 0 at night.
double clear_sky_ghi(const SolarGeometry& geom, const ClearSkyModel& model);

/// ghi / ghi_clear; nullopt when ghi_clear <= 1 W/m^2 (undefined flag,
/// must not be propagated as a number).
std::optional<double> clearness_index(double ghi, double ghi_clear);

/// Daily mean clearness kbar and mean step variability vbar
/// (vbar = sqrt(mean of squared step-to-step clearness changes)).
/// Throws DataError on fewer than 2 samples.
DailyStats daily_stats(const std::vector<double>& k_series);

}  // namespace skynow
