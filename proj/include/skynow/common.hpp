#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace skynow {

// Failure classes mirror the CLI exit codes: config=2, data=3, numeric=4.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

/// Wrap an angle in degrees to [0, 360).
inline double wrap360(double deg) {
  double w = std::fmod(deg, 360.0);
  if (w < 0.0) w += 360.0;
  return w;
}

/// Wrap an angle in degrees to (-180, 180].
inline double wrap180(double deg) {
  double w = wrap360(deg);
  return w > 180.0 ? w - 360.0 : w;
}

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline double norm2(const Vec2& v) { return std::sqrt(v.x * v.x + v.y * v.y); }

// UTC instants as unix seconds. 10 s cadence everywhere, so seconds suffice.
using UtcTime = std::int64_t;

constexpr int kCadenceSeconds = 10;

/// Days since 1970-01-01 for a proleptic Gregorian civil date.
std::int64_t days_from_civil(int y, int mo, int d);
void civil_from_days(std::int64_t z, int& y, int& mo, int& d);

UtcTime utc_from_civil(int y, int mo, int d, int h = 0, int mi = 0, int s = 0);
std::string format_iso8601(UtcTime t);
/// Parses "YYYY-MM-DDTHH:MM:SSZ"; throws DataError on malformed input.
UtcTime parse_iso8601(const std::string& s);
/// Date part only, "YYYY-MM-DD".
std::string format_date(UtcTime t);

// Deterministic RNG. std::mt19937_64 output is pinned by the standard but the
// distributions are not, so the mappings to uniform/normal live here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::uint64_t index(std::uint64_t n) {
    // modulo bias is irrelevant at the sizes used here
    return n ? gen_() % n : 0;
  }

  /// Standard normal via Box-Muller.
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  /// Fisher-Yates shuffle, deterministic for a fixed seed.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(index(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  /// Derive an independent stream; mixing is splitmix64-style.
  static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937_64 gen_;
};

/// Least squares solve of A x = b (rows >= cols) via Householder QR.
/// A is row-major rows x cols. Throws NumericError on rank deficiency.
std::vector<double> lstsq(const std::vector<double>& a, int rows, int cols,
                          const std::vector<double>& b);

/// Runs fn(i) for i in [0, n) on up to `threads` workers. threads <= 1 runs
/// inline. Work items must be independent; results must not depend on
/// scheduling for the determinism contract to hold.
void parallel_for(int threads, std::int64_t n,
                  const std::function<void(std::int64_t)>& fn);

}  // namespace skynow
