#pragma once

// Test-only oracles, independent of the library implementations they check.

#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "skynow/common.hpp"
#include "skynow/nn.hpp"

namespace oracles {

// Independent re-implementation of the Astronomical Almanac low-precision
// solar position (Michalsky 1988), built through the rotation-matrix route
// (ecliptic -> equatorial -> horizontal) instead of the spherical-trig
// shortcut used by the library.
struct EphemerisResult {
  double zenith_deg;
  double azimuth_deg;
};

inline EphemerisResult ephemeris_oracle(skynow::UtcTime t, double lat_deg,
                                        double lon_deg) {
  using namespace skynow;
  const double days = (static_cast<double>(t) - 946728000.0) / 86400.0;

  const double mean_long = wrap360(280.460 + 0.9856474 * days);
  const double g = deg2rad(wrap360(357.528 + 0.9856003 * days));
  const double lambda =
      deg2rad(wrap360(mean_long + 1.915 * std::sin(g) + 0.020 * std::sin(2 * g)));
  const double eps = deg2rad(23.439 - 0.0000004 * days);

  // unit vector of the sun in ecliptic coordinates, rotated to equatorial
  const double ex = std::cos(lambda);
  const double ey = std::sin(lambda);
  const double qx = ex;
  const double qy = ey * std::cos(eps);
  const double qz = ey * std::sin(eps);

  // hour angle via sidereal time
  const double ut_h = std::fmod(static_cast<double>(t), 86400.0) / 3600.0;
  double gmst = std::fmod(6.697375 + 0.0657098242 * days + ut_h, 24.0);
  if (gmst < 0) gmst += 24.0;
  const double lst_rad = deg2rad(gmst * 15.0 + lon_deg);

  // rotate into the horizontal frame at the site
  const double ra = std::atan2(qy, qx);
  const double dec = std::asin(qz);
  const double ha = lst_rad - ra;
  const double lat = deg2rad(lat_deg);

  // equatorial unit vector in the local (south, east, up) basis
  const double sx = std::cos(ha) * std::cos(dec);
  const double sy = std::sin(ha) * std::cos(dec);
  const double sz = std::sin(dec);
  const double south = sx * std::sin(lat) - sz * std::cos(lat);
  const double east = -sy;
  const double up = sx * std::cos(lat) + sz * std::sin(lat);

  EphemerisResult r;
  r.zenith_deg = rad2deg(std::acos(std::max(-1.0, std::min(1.0, up))));
  r.azimuth_deg = wrap360(rad2deg(std::atan2(east, -south)));
  return r;
}

// Central finite differences against analytic gradients. `loss(with_grad)`
// must fill the parameter gradients when with_grad is true. Returns the
// worst relative error over sampled coordinates. Coordinates whose epsilon
// and 2-epsilon estimates disagree straddle a kink (ReLU, |.|, max) where
// the derivative does not exist; those are skipped.
inline double gradient_check(std::vector<skynow::nn::Param<double>*> params,
                             const std::function<double(bool)>& loss,
                             int samples_per_param = 24,
                             std::uint64_t seed = 1234) {
  loss(true);
  skynow::Rng pick(seed);
  double worst = 0.0;
  for (auto* p : params) {
    const std::size_t n = p->value.data.size();
    for (int s = 0; s < samples_per_param; ++s) {
      const std::size_t i = static_cast<std::size_t>(pick.index(n));
      const double eps = 1e-6;
      const double keep = p->value.data[i];
      auto probe = [&](double offset) {
        p->value.data[i] = keep + offset;
        const double v = loss(false);
        p->value.data[i] = keep;
        return v;
      };
      const double up = probe(eps);
      const double dn = probe(-eps);
      const double mid = probe(0.0);
      const double fd1 = (up - dn) / (2 * eps);
      // one-sided slopes disagree when a kink lies inside the probe
      const double fd_plus = (up - mid) / eps;
      const double fd_minus = (mid - dn) / eps;
      if (std::abs(fd_plus - fd_minus) >
          1e-3 * std::max({std::abs(fd1), std::abs(fd_plus), 1e-6}))
        continue;  // non-smooth neighborhood
      const double an = p->grad.data[i];
      // the floor absorbs FD cancellation noise (~loss_scale * 1e-10) on
      // coordinates whose true gradient is zero
      const double denom = std::max({std::abs(fd1), std::abs(an), 1e-4});
      worst = std::max(worst, std::abs(fd1 - an) / denom);
    }
  }
  return worst;
}

// Brute-force window enumeration: every start where 105 consecutive usable
// steps exist. `usable` is indexed by timestep.
inline int count_windows_bruteforce(const std::vector<bool>& usable) {
  const int span = 105;
  int count = 0;
  for (int s = 0; s + span <= static_cast<int>(usable.size()); ++s) {
    bool ok = true;
    for (int k = 0; k < span && ok; ++k) ok = usable[static_cast<std::size_t>(s + k)];
    count += ok;
  }
  return count;
}

}  // namespace oracles
