#include <doctest.h>

#include "oracles.hpp"
#include "skynow/solar.hpp"

using namespace skynow;

TEST_CASE("solar position: equator, equinox, local solar noon is overhead") {
  double best = 180.0;
  for (int m = -30; m <= 30; ++m) {
    const SolarGeometry g = solar_position(
        utc_from_civil(2024, 3, 20, 12, 7, 0) + m * 60, GeoLocation{0.0, 0.0});
    best = std::min(best, g.zenith_deg);
  }
  CHECK(best < 0.5);
}

TEST_CASE("solar position: high-latitude midwinter midnight is below horizon") {
  const SolarGeometry g = solar_position(utc_from_civil(2023, 12, 21, 0, 0, 0),
                                         GeoLocation{59.97, 11.05});
  CHECK(g.elevation_deg() < 0.0);
}

TEST_CASE("solar position agrees with the independent ephemeris oracle") {
  Rng rng(2024);
  const UtcTime lo = utc_from_civil(1950, 1, 1);
  const UtcTime hi = utc_from_civil(2050, 1, 1);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const UtcTime t = lo + static_cast<UtcTime>(rng.uniform() *
                                                static_cast<double>(hi - lo));
    const double lat = rng.uniform(-80.0, 80.0);
    const double lon = rng.uniform(-180.0, 180.0);
    const SolarGeometry got = solar_position(t, GeoLocation{lat, lon});
    const auto want = oracles::ephemeris_oracle(t, lat, lon);
    worst = std::max(worst, std::abs(got.zenith_deg - want.zenith_deg));
  }
  CHECK(worst < 0.05);
}

TEST_CASE("solar position: azimuth continuous modulo 360 over a day") {
  const GeoLocation site{59.9724, 11.0524};
  const UtcTime t0 = utc_from_civil(2024, 6, 1);
  double prev = solar_position(t0, site).azimuth_deg;
  for (int k = 1; k < 8640; ++k) {
    const double az = solar_position(t0 + k * 10, site).azimuth_deg;
    CHECK(std::abs(wrap180(az - prev)) < 1.0);
    prev = az;
  }
}

TEST_CASE("elevation and zenith are exact complements") {
  const SolarGeometry g = solar_position(utc_from_civil(2024, 7, 1, 10, 0, 0),
                                         GeoLocation{45.0, 8.0});
  CHECK(g.elevation_deg() + g.zenith_deg == 90.0);
}

TEST_CASE("clear-sky GHI values and night clamp") {
  const ClearSkyModel m;
  CHECK(clear_sky_ghi({0.0, 0.0}, m) == doctest::Approx(1361.0).epsilon(1e-12));
  CHECK(clear_sky_ghi({60.0, 0.0}, m) == doctest::Approx(680.5).epsilon(1e-12));
  CHECK(clear_sky_ghi({120.0, 0.0}, m) == 0.0);

  // nonnegative everywhere, zero at or below the horizon
  for (double z = 0.0; z <= 180.0; z += 1.0) {
    const double v = clear_sky_ghi({z, 0.0}, m);
    CHECK(v >= 0.0);
    if (z >= 90.0) CHECK(v == 0.0);
  }
}

TEST_CASE("clearness index: values and the undefined flag") {
  CHECK(*clearness_index(800.0, 800.0) == doctest::Approx(1.0));
  CHECK(*clearness_index(400.0, 800.0) == doctest::Approx(0.5));
  CHECK(!clearness_index(100.0, 0.0).has_value());
  CHECK(!clearness_index(100.0, 1.0).has_value());
  CHECK_THROWS_AS((void)clearness_index(-1.0, 800.0), DataError);
}

TEST_CASE("daily stats: constant and alternating series") {
  const DailyStats c = daily_stats(std::vector<double>(40, 0.5));
  CHECK(c.mean_clearness_kbar == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(c.mean_variability_vbar == 0.0);

  std::vector<double> alt;
  for (int i = 0; i < 41; ++i) alt.push_back(i % 2 ? 1.0 : 0.0);
  const DailyStats a = daily_stats(alt);
  CHECK(a.mean_variability_vbar == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("daily stats match a brute-force recomputation") {
  Rng rng(7);
  std::vector<double> k;
  for (int i = 0; i < 100; ++i) k.push_back(rng.uniform());
  const DailyStats got = daily_stats(k);

  double mean = 0.0;
  for (double v : k) mean += v;
  mean /= static_cast<double>(k.size());
  double sq = 0.0;
  for (std::size_t i = 1; i < k.size(); ++i)
    sq += (k[i] - k[i - 1]) * (k[i] - k[i - 1]);
  const double vbar = std::sqrt(sq / static_cast<double>(k.size() - 1));

  CHECK(got.mean_clearness_kbar == doctest::Approx(mean).epsilon(1e-12));
  CHECK(got.mean_variability_vbar == doctest::Approx(vbar).epsilon(1e-12));
}

TEST_CASE("daily stats: errors and variability iff non-constant") {
  CHECK_THROWS_AS((void)daily_stats({0.5}), DataError);
  const DailyStats s = daily_stats({0.2, 0.2000001, 0.2});
  CHECK(s.mean_variability_vbar > 0.0);
}

TEST_CASE("irradiance series validation") {
  IrradianceSeries s;
  s.samples = {{0, 100.0}, {10, 200.0}};
  CHECK_NOTHROW(s.validate());
  s.samples.push_back({10, 300.0});
  CHECK_THROWS_AS(s.validate(), DataError);
  s.samples = {{0, -1.0}};
  CHECK_THROWS_AS(s.validate(), DataError);
}

TEST_CASE("geolocation range checks") {
  CHECK_THROWS_AS(solar_position(0, GeoLocation{91.0, 0.0}), ConfigError);
  CHECK_THROWS_AS(solar_position(0, GeoLocation{0.0, 181.0}), ConfigError);
}
