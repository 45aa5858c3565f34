#include <doctest.h>

#include <cmath>

#include "skynow/lens.hpp"

using namespace skynow;

namespace {

RawImage dark_image(int w, int h) {
  RawImage im = RawImage::create(w, h);
  std::fill(im.pixels.begin(), im.pixels.end(), 20);
  return im;
}

void draw_disk(RawImage& im, double cx, double cy, double r, std::uint8_t v) {
  for (int y = 0; y < im.height; ++y)
    for (int x = 0; x < im.width; ++x)
      if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r)
        for (int c = 0; c < 3; ++c) im.at(x, y, c) = v;
}

}  // namespace

TEST_CASE("detect_sun: centroid of a bright disk") {
  RawImage im = dark_image(640, 640);
  draw_disk(im, 300.0, 500.0, 5.5, 250);
  const auto sun = detect_sun(im);
  REQUIRE(sun.has_value());
  CHECK(std::abs(sun->x - 300.0) < 0.5);
  CHECK(std::abs(sun->y - 500.0) < 0.5);
}

TEST_CASE("detect_sun: none on a dark frame, combined centroid of two disks") {
  CHECK(!detect_sun(dark_image(64, 64)).has_value());

  RawImage im = dark_image(400, 400);
  draw_disk(im, 100.0, 100.0, 4.0, 255);
  draw_disk(im, 300.0, 300.0, 4.0, 255);
  const auto sun = detect_sun(im);
  REQUIRE(sun.has_value());
  CHECK(std::abs(sun->x - 200.0) < 1.0);
  CHECK(std::abs(sun->y - 200.0) < 1.0);
}

TEST_CASE("detect_sun is invariant under below-threshold noise") {
  RawImage im = dark_image(256, 256);
  draw_disk(im, 80.0, 90.0, 4.0, 255);
  const auto base = detect_sun(im);
  Rng rng(5);
  for (auto& p : im.pixels)
    if (p < 200) p = static_cast<std::uint8_t>(rng.index(220));
  const auto noisy = detect_sun(im);
  REQUIRE(base.has_value());
  REQUIRE(noisy.has_value());
  CHECK(base->x == doctest::Approx(noisy->x).epsilon(1e-12));
  CHECK(base->y == doctest::Approx(noisy->y).epsilon(1e-12));
}

TEST_CASE("calibrate_azimuth recovers a synthetic rotation") {
  for (double truth : {10.0, 0.0}) {
    std::vector<SunObservation> obs;
    for (int i = 0; i < 24; ++i) {
      const double eph_az = 120.0 + 5.0 * i;
      const double img_az = eph_az - truth;
      SunObservation o;
      o.image_center_x = 320.0;
      o.image_center_y = 320.0;
      const double r = 150.0;
      o.pixel.x = 320.0 + r * std::sin(deg2rad(img_az));
      o.pixel.y = 320.0 - r * std::cos(deg2rad(img_az));
      o.ephemeris_azimuth_deg = eph_az;
      obs.push_back(o);
    }
    const CameraCalibration calib = calibrate_azimuth(obs);
    CHECK(std::abs(calib.azimuth_correction_deg - truth) < 0.1);
    CHECK(!calib.residual_warning);
  }
}

TEST_CASE("calibrate_azimuth: too few pairs and noisy-residual warning") {
  std::vector<SunObservation> obs(5);
  CHECK_THROWS_AS((void)calibrate_azimuth(obs), DataError);

  Rng rng(3);
  obs.clear();
  for (int i = 0; i < 30; ++i) {
    const double eph_az = 90.0 + 7.0 * i;
    const double img_az = eph_az + rng.uniform(-12.0, 12.0);
    SunObservation o;
    o.image_center_x = 100.0;
    o.image_center_y = 100.0;
    o.pixel.x = 100.0 + 60.0 * std::sin(deg2rad(img_az));
    o.pixel.y = 100.0 - 60.0 * std::cos(deg2rad(img_az));
    o.ephemeris_azimuth_deg = eph_az;
    obs.push_back(o);
  }
  CHECK(calibrate_azimuth(obs).residual_warning);
}

TEST_CASE("fit_deviation_poly recovers a known polynomial") {
  const std::vector<double> truth = {0.0, 1.2, -0.8, 0.5, 0.3, -0.6, 0.2, 0.4};
  LensModel lens{90.0, 960.0, truth};
  std::vector<LensTableRow> table;
  for (int i = 1; i <= 24; ++i) {
    const double rho = i / 24.0;
    table.push_back({rho, lens.zenith_of_rho(rho)});
  }
  const DeviationFit fit = fit_deviation_poly(table, 90.0);
  for (int k = 0; k < 8; ++k)
    CHECK(std::abs(fit.coefficients[static_cast<std::size_t>(k)] -
                   truth[static_cast<std::size_t>(k)]) < 1e-6);
  CHECK(fit.mae_fraction_of_fov < 0.0015);
}

TEST_CASE("fit_deviation_poly: ideal equidistant table gives zero deviation") {
  std::vector<LensTableRow> table;
  for (int i = 1; i <= 20; ++i) {
    const double rho = i / 20.0;
    table.push_back({rho, rho * 90.0});
  }
  const DeviationFit fit = fit_deviation_poly(table, 90.0);
  for (double c : fit.coefficients) CHECK(std::abs(c) < 1e-9);
}

TEST_CASE("fit_deviation_poly: underdetermined table is an error") {
  std::vector<LensTableRow> table(8, {0.5, 45.0});
  CHECK_THROWS_AS((void)fit_deviation_poly(table, 90.0), DataError);
}

TEST_CASE("undistort: zero deviation maps r = R/2 to zenith 45") {
  // render an ideal equidistant frame whose value encodes zenith
  const int n = 200;
  LensModel lens{90.0, n * 0.5, std::vector<double>(8, 0.0)};
  RawImage raw = RawImage::create(n, n);
  const double c = (n - 1) * 0.5;
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      const double r = std::hypot(x - c, y - c);
      if (r > lens.image_radius_px) continue;
      const double zen = r / lens.image_radius_px * 90.0;
      const auto v = static_cast<std::uint8_t>(std::lround(zen / 90.0 * 255.0));
      raw.at(x, y, 0) = raw.at(x, y, 1) = raw.at(x, y, 2) = v;
    }
  const SkyGrid grid{n, 90.0};
  const SkyImage out = undistort(raw, lens, {}, grid, 0, "cam1");

  // with no deviation the reprojection is the identity: a pixel at half
  // radius still carries the 45-degree value
  const int px = static_cast<int>(std::lround(c + lens.image_radius_px * 0.5));
  const double got = out.at(px, static_cast<int>(std::lround(c)), 0) * 90.0;
  CHECK(std::abs(got - 45.0) < 1.0);  // two 8-bit quantizations round trip

  // the mapping itself is exact: half the grid radius is zenith 45
  double zen = 0.0, az = 0.0;
  grid.pixel_to_angles(grid.center() + grid.radius() * 0.5, grid.center(), zen,
                       az);
  CHECK(zen == doctest::Approx(45.0).epsilon(1e-12));

  // r = 0 is a fixed point carrying zenith 0
  CHECK(out.at(static_cast<int>(c), static_cast<int>(c), 0) * 90.0 < 1.0);
}

TEST_CASE("lens forward/inverse round trip within half a pixel") {
  LensModel lens{90.0, 960.0, {0.0, 0.9, -2.1, 1.6, 0.0, -0.8, 0.0, 0.4}};
  Rng rng(11);
  for (int i = 0; i < 500; ++i) {
    const double rho = rng.uniform(0.0, 0.99);
    const double zen = lens.zenith_of_rho(rho);
    const double back = lens.rho_of_zenith(zen);
    CHECK(std::abs(back - rho) * lens.image_radius_px < 0.5);
  }
}

TEST_CASE("undistort masks exactly the FOV complement") {
  const int n = 64;
  LensModel lens{90.0, n * 0.5, std::vector<double>(8, 0.0)};
  RawImage raw = RawImage::create(n, n);
  std::fill(raw.pixels.begin(), raw.pixels.end(), 200);
  const SkyGrid grid{n, 90.0};
  const SkyImage out = undistort(raw, lens, {}, grid, 0, "c");
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      if (!out.is_valid(x, y)) {
        CHECK(out.at(x, y, 0) == 0.0f);
        CHECK(out.at(x, y, 1) == 0.0f);
        CHECK(out.at(x, y, 2) == 0.0f);
      }
    }
}

TEST_CASE("downsample: constant image stays constant") {
  SkyImage im = SkyImage::create(SkyGrid{128, 90.0});
  for (std::size_t i = 0; i < im.rgb.size(); ++i)
    im.rgb[i] = im.valid[i / 3] ? 0.37f : 0.0f;
  const SkyImage out = downsample(im, 100);
  for (int y = 0; y < 100; ++y)
    for (int x = 0; x < 100; ++x)
      if (out.is_valid(x, y))
        CHECK(std::abs(out.at(x, y, 0) - 0.37f) < 1e-4);
}

TEST_CASE("downsample: same-size target is the identity") {
  SkyImage im = SkyImage::create(SkyGrid{64, 90.0});
  Rng rng(9);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x)
      if (im.is_valid(x, y))
        for (int c = 0; c < 3; ++c)
          im.at(x, y, c) = static_cast<float>(rng.uniform());
  const SkyImage out = downsample(im, 64);
  for (std::size_t i = 0; i < im.rgb.size(); ++i)
    CHECK(std::abs(out.rgb[i] - im.rgb[i]) < 1e-6);
}

TEST_CASE("downsample preserves the mean of a low-frequency sinusoid") {
  SkyImage im = SkyImage::create(SkyGrid{400, 90.0});
  double mean_in = 0.0;
  std::int64_t n_in = 0;
  for (int y = 0; y < 400; ++y)
    for (int x = 0; x < 400; ++x) {
      if (!im.is_valid(x, y)) continue;
      const float v = static_cast<float>(
          0.5 + 0.3 * std::sin(x * 2.0 * kPi / 200.0) *
                    std::cos(y * 2.0 * kPi / 160.0));
      for (int c = 0; c < 3; ++c) im.at(x, y, c) = v;
      mean_in += v;
      ++n_in;
    }
  mean_in /= static_cast<double>(n_in);

  const SkyImage out = downsample(im, 100);
  double mean_out = 0.0;
  std::int64_t n_out = 0;
  for (int y = 0; y < 100; ++y)
    for (int x = 0; x < 100; ++x)
      if (out.is_valid(x, y)) {
        mean_out += out.at(x, y, 0);
        ++n_out;
      }
  mean_out /= static_cast<double>(n_out);
  CHECK(std::abs(mean_out - mean_in) / mean_in < 0.01);
}

TEST_CASE("downsample is linear before clipping") {
  SkyImage im = SkyImage::create(SkyGrid{80, 90.0});
  Rng rng(4);
  for (int y = 0; y < 80; ++y)
    for (int x = 0; x < 80; ++x)
      if (im.is_valid(x, y))
        for (int c = 0; c < 3; ++c)
          im.at(x, y, c) = static_cast<float>(rng.uniform(0.0, 0.4));

  SkyImage doubled = im;
  for (auto& v : doubled.rgb) v *= 2.0f;

  const SkyImage a = downsample(im, 40);
  const SkyImage b = downsample(doubled, 40);
  for (std::size_t i = 0; i < a.rgb.size(); ++i)
    CHECK(std::abs(2.0f * a.rgb[i] - b.rgb[i]) < 1e-5);
}

TEST_CASE("downsample rejects upscaling") {
  SkyImage im = SkyImage::create(SkyGrid{32, 90.0});
  CHECK_THROWS_AS((void)downsample(im, 64), DataError);
}
