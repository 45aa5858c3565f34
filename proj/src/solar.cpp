#include "skynow/solar.hpp"

#include <algorithm>
#include <cmath>

namespace skynow {

void GeoLocation::validate() const {
  if (!(latitude_deg >= -90.0 && latitude_deg <= 90.0))
    throw ConfigError("latitude out of range [-90, 90]");
  if (!(longitude_deg >= -180.0 && longitude_deg <= 180.0))
    throw ConfigError("longitude out of range [-180, 180]");
}

void IrradianceSeries::validate() const {
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].ghi_wm2 < 0.0) throw DataError("negative GHI sample");
    if (i > 0 && samples[i].timestamp <= samples[i - 1].timestamp)
      throw DataError("irradiance timestamps not strictly increasing");
  }
}

SolarGeometry solar_position(UtcTime time_utc, const GeoLocation& location) {
  location.validate();

  // Michalsky (1988), the Astronomical Almanac's approximate formulas.
  // jd relative to the J2000.0 epoch, including the day fraction.
  const double unix_j2000 = 946728000.0;  // 2000-01-01T12:00:00Z
  const double n = (static_cast<double>(time_utc) - unix_j2000) / 86400.0;

  const double mean_long = wrap360(280.460 + 0.9856474 * n);
  const double mean_anom = deg2rad(wrap360(357.528 + 0.9856003 * n));
  const double ecl_long = deg2rad(wrap360(
      mean_long + 1.915 * std::sin(mean_anom) + 0.020 * std::sin(2.0 * mean_anom)));
  const double obliquity = deg2rad(23.439 - 0.0000004 * n);

  const double ra = std::atan2(std::cos(obliquity) * std::sin(ecl_long),
                               std::cos(ecl_long));  // radians
  const double dec = std::asin(std::sin(obliquity) * std::sin(ecl_long));

  // Sidereal time from the UT excess-rate form.
  const double ut_hours =
      std::fmod(static_cast<double>(time_utc), 86400.0) / 3600.0;
  double gmst = std::fmod(6.697375 + 0.0657098242 * n + ut_hours, 24.0);
  if (gmst < 0.0) gmst += 24.0;
  double lmst = std::fmod(gmst + location.longitude_deg / 15.0, 24.0);
  if (lmst < 0.0) lmst += 24.0;

  double ha = deg2rad(wrap180(lmst * 15.0 - rad2deg(ra)));

  const double lat = deg2rad(location.latitude_deg);
  double sin_el = std::sin(dec) * std::sin(lat) +
                  std::cos(dec) * std::cos(lat) * std::cos(ha);
  sin_el = std::clamp(sin_el, -1.0, 1.0);
  const double el = std::asin(sin_el);

  // Azimuth clockwise from north.
  const double az_y = -std::cos(dec) * std::sin(ha);
  const double az_x = std::sin(dec) * std::cos(lat) -
                      std::cos(dec) * std::sin(lat) * std::cos(ha);
  double az = wrap360(rad2deg(std::atan2(az_y, az_x)));

  SolarGeometry geom;
  geom.zenith_deg = 90.0 - rad2deg(el);
  geom.azimuth_deg = az;
  return geom;
}

double clear_sky_ghi(const SolarGeometry& geom, const ClearSkyModel& model) {
  if (geom.zenith_deg >= 90.0) return 0.0;  // exact zero at and below horizon
  const double c = std::cos(deg2rad(geom.zenith_deg));
  return c > 0.0 ? model.solar_constant_g0 * c : 0.0;
}

std::optional<double> clearness_index(double ghi, double ghi_clear) {
  if (ghi < 0.0) throw DataError("clearness_index: negative GHI");
  if (ghi_clear <= 1.0) return std::nullopt;
  return ghi / ghi_clear;
}

DailyStats daily_stats(const std::vector<double>& k_series) {
  if (k_series.size() < 2)
    throw DataError("daily_stats needs at least 2 samples");
  double sum = 0.0;
  for (double k : k_series) sum += k;
  double sq = 0.0;
  for (std::size_t t = 1; t < k_series.size(); ++t) {
    const double d = k_series[t] - k_series[t - 1];
    sq += d * d;
  }
  DailyStats s;
  s.mean_clearness_kbar = sum / static_cast<double>(k_series.size());
  s.mean_variability_vbar =
      std::sqrt(sq / static_cast<double>(k_series.size() - 1));
  return s;
}

}  // namespace skynow
