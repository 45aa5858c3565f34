#include "skynow/common.hpp"

#include <atomic>
#include <cstdio>
#include <thread>

namespace skynow {

// Howard Hinnant's civil date algorithms.
std::int64_t days_from_civil(int y, int mo, int d) {
  y -= mo <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (mo + (mo > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& mo, int& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  mo = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  y = static_cast<int>(yy + (mo <= 2));
}

UtcTime utc_from_civil(int y, int mo, int d, int h, int mi, int s) {
  return days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + s;
}

std::string format_iso8601(UtcTime t) {
  std::int64_t days = t / 86400;
  std::int64_t sod = t % 86400;
  if (sod < 0) {
    sod += 86400;
    days -= 1;
  }
  int y, mo, d;
  civil_from_days(days, y, mo, d);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", y, mo, d,
                static_cast<int>(sod / 3600), static_cast<int>(sod / 60 % 60),
                static_cast<int>(sod % 60));
  return buf;
}

UtcTime parse_iso8601(const std::string& s) {
  int y, mo, d, h, mi, sec;
  char z = 0;
  if (std::sscanf(s.c_str(), "%d-%d-%dT%d:%d:%d%c", &y, &mo, &d, &h, &mi, &sec,
                  &z) < 6 ||
      mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || sec > 60)
    throw DataError("malformed ISO8601 timestamp: " + s);
  return utc_from_civil(y, mo, d, h, mi, sec);
}

std::string format_date(UtcTime t) {
  std::int64_t days = t / 86400;
  if (t % 86400 < 0) days -= 1;
  int y, mo, d;
  civil_from_days(days, y, mo, d);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, mo, d);
  return buf;
}

std::vector<double> lstsq(const std::vector<double>& a, int rows, int cols,
                          const std::vector<double>& b) {
  if (rows < cols) throw NumericError("lstsq: underdetermined system");
  std::vector<double> r = a;  // rows x cols, row-major, reduced in place
  std::vector<double> y = b;

  for (int k = 0; k < cols; ++k) {
    double norm = 0.0;
    for (int i = k; i < rows; ++i) norm += r[i * cols + k] * r[i * cols + k];
    norm = std::sqrt(norm);
    if (norm < 1e-300) throw NumericError("lstsq: rank-deficient matrix");
    if (r[k * cols + k] > 0) norm = -norm;

    // Householder vector stored in column k below the diagonal.
    std::vector<double> v(rows - k);
    v[0] = r[k * cols + k] - norm;
    for (int i = k + 1; i < rows; ++i) v[i - k] = r[i * cols + k];
    double vnorm2 = 0.0;
    for (double vi : v) vnorm2 += vi * vi;
    if (vnorm2 < 1e-300) throw NumericError("lstsq: rank-deficient matrix");

    for (int j = k; j < cols; ++j) {
      double dot = 0.0;
      for (int i = k; i < rows; ++i) dot += v[i - k] * r[i * cols + j];
      const double f = 2.0 * dot / vnorm2;
      for (int i = k; i < rows; ++i) r[i * cols + j] -= f * v[i - k];
    }
    double dot = 0.0;
    for (int i = k; i < rows; ++i) dot += v[i - k] * y[i];
    const double f = 2.0 * dot / vnorm2;
    for (int i = k; i < rows; ++i) y[i] -= f * v[i - k];
  }

  std::vector<double> x(cols);
  for (int i = cols - 1; i >= 0; --i) {
    double s = y[i];
    for (int j = i + 1; j < cols; ++j) s -= r[i * cols + j] * x[j];
    const double diag = r[i * cols + i];
    if (std::abs(diag) < 1e-250) throw NumericError("lstsq: singular R");
    x[i] = s / diag;
  }
  return x;
}

void parallel_for(int threads, std::int64_t n,
                  const std::function<void(std::int64_t)>& fn) {
  if (n <= 0) return;
  const int workers =
      std::max(1, std::min<std::int64_t>(threads, n) > 0
                      ? std::min<int>(threads, static_cast<int>(n))
                      : 1);
  if (workers <= 1) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::int64_t i = next.fetch_add(1);
        if (i >= n) return;
        fn(i);
      }
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace skynow
