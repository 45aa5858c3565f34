#include "skynow/segmentation.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "skynow/lens.hpp"

namespace skynow {

double saturation(float r, float g, float b) {
  const double sum = static_cast<double>(r) + g + b;
  if (sum <= 0.0) return 0.0;
  const double mn = std::min({static_cast<double>(r), static_cast<double>(g),
                              static_cast<double>(b)});
  return 1.0 - 3.0 * mn / sum;
}

double nbr(float r, float g, float b) {
  (void)g;
  const double sum = static_cast<double>(b) + r;
  if (sum <= 0.0) return 0.0;
  return (static_cast<double>(b) - r) / sum;
}

SkyModality modality(const SkyImage& image, const SegThresholds& thr) {
  double sum = 0.0, sq = 0.0;
  std::int64_t n = 0;
  const int sz = image.size();
  for (int y = 0; y < sz; ++y)
    for (int x = 0; x < sz; ++x) {
      if (!image.is_valid(x, y)) continue;
      const double s = saturation(image.at(x, y, 0), image.at(x, y, 1),
                                  image.at(x, y, 2));
      sum += s;
      sq += s * s;
      ++n;
    }
  if (n < 100) throw DataError("modality: fewer than 100 valid pixels");
  const double mean = sum / n;
  const double var = std::max(0.0, sq / n - mean * mean);
  return std::sqrt(var) > thr.saturation_std ? SkyModality::Multimodal
                                             : SkyModality::Unimodal;
}

namespace {

// Symmetric 3x3 eigen-decomposition by Jacobi rotations; eigenvalues
// descending with matching columns in v.
void eigen_sym3(double a[3][3], double eval[3], double evec[3][3]) {
  double v[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = std::abs(a[0][1]) + std::abs(a[0][2]) + std::abs(a[1][2]);
    if (off < 1e-15) break;
    for (int p = 0; p < 2; ++p)
      for (int q = p + 1; q < 3; ++q) {
        if (std::abs(a[p][q]) < 1e-18) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < 3; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < 3; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (int k = 0; k < 3; ++k) {
          const double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
  }
  std::array<int, 3> order = {0, 1, 2};
  std::sort(order.begin(), order.end(),
            [&](int i, int j) { return a[i][i] > a[j][j]; });
  for (int i = 0; i < 3; ++i) {
    eval[i] = a[order[i]][order[i]];
    for (int k = 0; k < 3; ++k) evec[k][i] = v[k][order[i]];
  }
}

struct P2 {
  double x, y;
};

inline double dist2(const P2& a, const P2& b) {
  const double dx = a.x - b.x, dy = a.y - b.y;
  return dx * dx + dy * dy;
}

// Deterministic farthest-point seeding: value-based, so the result is
// invariant under pixel permutation (ties broken lexicographically).
std::array<P2, 3> seed_centroids(const std::vector<P2>& pts) {
  P2 mean{0, 0};
  for (const auto& p : pts) {
    mean.x += p.x;
    mean.y += p.y;
  }
  mean.x /= pts.size();
  mean.y /= pts.size();

  auto better = [](double d, const P2& p, double bd, const P2& bp) {
    if (d != bd) return d > bd;
    if (p.x != bp.x) return p.x < bp.x;
    return p.y < bp.y;
  };

  std::array<P2, 3> c{};
  double bd = -1.0;
  for (const auto& p : pts)
    if (better(dist2(p, mean), p, bd, c[0])) {
      bd = dist2(p, mean);
      c[0] = p;
    }
  bd = -1.0;
  for (const auto& p : pts)
    if (better(dist2(p, c[0]), p, bd, c[1])) {
      bd = dist2(p, c[0]);
      c[1] = p;
    }
  bd = -1.0;
  for (const auto& p : pts) {
    const double d = std::min(dist2(p, c[0]), dist2(p, c[1]));
    if (better(d, p, bd, c[2])) {
      bd = d;
      c[2] = p;
    }
  }
  return c;
}

SegmentationMap finalize(const SkyImage& image,
                         std::vector<PixelClass> classes, SkyModality mode,
                         bool converged) {
  SegmentationMap m;
  m.size = image.size();
  m.classes = std::move(classes);
  m.modality = mode;
  m.kmeans_converged = converged;
  std::int64_t cloud = 0, sky = 0;
  for (const auto c : m.classes) {
    cloud += c == PixelClass::Cloud;
    sky += c == PixelClass::Sky;
  }
  m.cloud_fraction =
      (cloud + sky) > 0 ? static_cast<double>(cloud) / (cloud + sky) : 0.0;
  return m;
}

std::vector<std::uint8_t> sun_exclusion_mask(const SkyImage& image) {
  const int sz = image.size();
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(sz) * sz, 0);
  const auto sun = detect_sun(image);
  if (!sun) return mask;
  const int r = 3;
  for (int y = 0; y < sz; ++y)
    for (int x = 0; x < sz; ++x) {
      const double mean = (image.at(x, y, 0) + image.at(x, y, 1) +
                           image.at(x, y, 2)) /
                          3.0 * 255.0;
      if (mean < 245.0) continue;
      for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) {
          const int nx = x + dx, ny = y + dy;
          if (nx >= 0 && ny >= 0 && nx < sz && ny < sz &&
              dx * dx + dy * dy <= r * r)
            mask[static_cast<std::size_t>(ny * sz + nx)] = 1;
        }
    }
  return mask;
}

}  // namespace

SegmentationMap segment_multimodal(const SkyImage& image,
                                   const SegThresholds& thr) {
  const int sz = image.size();
  const std::size_t n = static_cast<std::size_t>(sz) * sz;

  std::vector<std::uint8_t> sun_mask;
  if (thr.exclude_sun_disk) sun_mask = sun_exclusion_mask(image);

  // per-channel normalization over the full frame (border included: the
  // frame is one of the three clusters)
  double mean[3] = {0, 0, 0}, var[3] = {0, 0, 0};
  for (std::size_t i = 0; i < n; ++i)
    for (int c = 0; c < 3; ++c) mean[c] += image.rgb[i * 3 + c];
  for (int c = 0; c < 3; ++c) mean[c] /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (int c = 0; c < 3; ++c) {
      const double d = image.rgb[i * 3 + c] - mean[c];
      var[c] += d * d;
    }
  double sd[3];
  for (int c = 0; c < 3; ++c)
    sd[c] = std::max(1e-9, std::sqrt(var[c] / static_cast<double>(n)));

  // PCA to 2 components
  double cov[3][3] = {{0}};
  std::vector<std::array<double, 3>> norm(n);
  for (std::size_t i = 0; i < n; ++i)
    for (int c = 0; c < 3; ++c)
      norm[i][c] = (image.rgb[i * 3 + c] - mean[c]) / sd[c];
  for (std::size_t i = 0; i < n; ++i)
    for (int a = 0; a < 3; ++a)
      for (int b = a; b < 3; ++b) cov[a][b] += norm[i][a] * norm[i][b];
  for (int a = 0; a < 3; ++a)
    for (int b = a; b < 3; ++b) {
      cov[a][b] /= static_cast<double>(n);
      cov[b][a] = cov[a][b];
    }
  double eval[3], evec[3][3];
  eigen_sym3(cov, eval, evec);
  // deterministic eigenvector orientation
  for (int j = 0; j < 2; ++j) {
    double lead = 0.0;
    for (int k = 0; k < 3; ++k)
      if (std::abs(evec[k][j]) > std::abs(lead)) lead = evec[k][j];
    if (lead < 0)
      for (int k = 0; k < 3; ++k) evec[k][j] = -evec[k][j];
  }

  std::vector<P2> pts(n);
  for (std::size_t i = 0; i < n; ++i) {
    pts[i].x = norm[i][0] * evec[0][0] + norm[i][1] * evec[1][0] +
               norm[i][2] * evec[2][0];
    pts[i].y = norm[i][0] * evec[0][1] + norm[i][1] * evec[1][1] +
               norm[i][2] * evec[2][1];
  }

  // k-means, k=3
  auto centroids = seed_centroids(pts);
  std::vector<std::uint8_t> assign(n, 0);
  bool converged = false;
  for (int it = 0; it < thr.kmeans_max_iterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      double best = dist2(pts[i], centroids[0]);
      std::uint8_t bk = 0;
      for (std::uint8_t k = 1; k < 3; ++k) {
        const double d = dist2(pts[i], centroids[k]);
        if (d < best) {
          best = d;
          bk = k;
        }
      }
      assign[i] = bk;
    }
    std::array<P2, 3> nc{};
    std::array<std::int64_t, 3> cnt{};
    for (std::size_t i = 0; i < n; ++i) {
      nc[assign[i]].x += pts[i].x;
      nc[assign[i]].y += pts[i].y;
      ++cnt[assign[i]];
    }
    double moved = 0.0;
    for (int k = 0; k < 3; ++k) {
      if (cnt[k] == 0) continue;  // empty cluster keeps its centroid
      nc[k].x /= static_cast<double>(cnt[k]);
      nc[k].y /= static_cast<double>(cnt[k]);
      moved = std::max(moved, std::sqrt(dist2(nc[k], centroids[k])));
      centroids[k] = nc[k];
    }
    if (moved < thr.kmeans_tolerance) {
      converged = true;
      break;
    }
  }

  // label clusters: most border pixels -> frame; of the rest, higher mean
  // nBR over valid pixels -> sky
  std::array<std::int64_t, 3> border_cnt{};
  std::array<double, 3> nbr_sum{};
  std::array<std::int64_t, 3> valid_cnt{};
  for (int y = 0; y < sz; ++y)
    for (int x = 0; x < sz; ++x) {
      const std::size_t i = static_cast<std::size_t>(y * sz + x);
      if (!image.is_valid(x, y)) {
        ++border_cnt[assign[i]];
      } else {
        nbr_sum[assign[i]] +=
            nbr(image.at(x, y, 0), image.at(x, y, 1), image.at(x, y, 2));
        ++valid_cnt[assign[i]];
      }
    }
  int frame_k = 0;
  for (int k = 1; k < 3; ++k)
    if (border_cnt[k] > border_cnt[frame_k]) frame_k = k;
  int rest[2], ri = 0;
  for (int k = 0; k < 3; ++k)
    if (k != frame_k) rest[ri++] = k;
  auto mean_nbr = [&](int k) {
    return valid_cnt[k] > 0 ? nbr_sum[k] / static_cast<double>(valid_cnt[k])
                            : -2.0;
  };
  const int sky_k = mean_nbr(rest[0]) >= mean_nbr(rest[1]) ? rest[0] : rest[1];
  const int cloud_k = sky_k == rest[0] ? rest[1] : rest[0];

  std::vector<PixelClass> classes(n, PixelClass::Invalid);
  for (int y = 0; y < sz; ++y)
    for (int x = 0; x < sz; ++x) {
      const std::size_t i = static_cast<std::size_t>(y * sz + x);
      if (!image.is_valid(x, y)) continue;
      if (!sun_mask.empty() && sun_mask[i]) {
        classes[i] = PixelClass::Sky;  // excluded sun disk counted as sky
        continue;
      }
      int k = assign[i];
      if (k == frame_k) {
        // valid pixel landing in the frame cluster: nearest of the other two
        k = dist2(pts[i], centroids[static_cast<std::size_t>(sky_k)]) <=
                    dist2(pts[i], centroids[static_cast<std::size_t>(cloud_k)])
                ? sky_k
                : cloud_k;
      }
      classes[i] = k == sky_k ? PixelClass::Sky : PixelClass::Cloud;
    }
  return finalize(image, std::move(classes), SkyModality::Multimodal,
                  converged);
}

SegmentationMap segment_unimodal(const SkyImage& image,
                                 const SegThresholds& thr) {
  const int sz = image.size();
  const std::size_t n = static_cast<std::size_t>(sz) * sz;

  double nbr_mean = 0.0;
  std::int64_t cnt = 0;
  for (int y = 0; y < sz; ++y)
    for (int x = 0; x < sz; ++x)
      if (image.is_valid(x, y)) {
        nbr_mean += nbr(image.at(x, y, 0), image.at(x, y, 1), image.at(x, y, 2));
        ++cnt;
      }
  if (cnt > 0) nbr_mean /= static_cast<double>(cnt);
  const bool clear_regime = nbr_mean >= thr.regime_midpoint;

  std::vector<PixelClass> classes(n, PixelClass::Invalid);
  for (int y = 0; y < sz; ++y)
    for (int x = 0; x < sz; ++x) {
      if (!image.is_valid(x, y)) continue;
      const double v =
          nbr(image.at(x, y, 0), image.at(x, y, 1), image.at(x, y, 2));
      PixelClass pc;
      if (clear_regime)
        pc = v < thr.nbr_clear ? PixelClass::Cloud : PixelClass::Sky;
      else
        pc = v > thr.nbr_overcast ? PixelClass::Sky : PixelClass::Cloud;
      classes[static_cast<std::size_t>(y * sz + x)] = pc;
    }
  return finalize(image, std::move(classes), SkyModality::Unimodal, true);
}

SegmentationMap segment(const SkyImage& image, const SegThresholds& thr) {
  return modality(image, thr) == SkyModality::Multimodal
             ? segment_multimodal(image, thr)
             : segment_unimodal(image, thr);
}

void write_segmentation_png(const std::string& path,
                            const SegmentationMap& m) {
  std::vector<std::uint8_t> gray(m.classes.size());
  for (std::size_t i = 0; i < m.classes.size(); ++i)
    gray[i] = m.classes[i] == PixelClass::Cloud
                  ? 255
                  : (m.classes[i] == PixelClass::Sky ? 128 : 0);
  write_png_gray8(path, m.size, m.size, gray);
}

SegmentationMap read_segmentation_png(const std::string& path) {
  int w = 0, h = 0;
  const auto gray = read_png_gray8(path, w, h);
  if (w != h) throw DataError("segmentation PNG must be square: " + path);
  SegmentationMap m;
  m.size = w;
  m.classes.resize(gray.size());
  std::int64_t cloud = 0, sky = 0;
  for (std::size_t i = 0; i < gray.size(); ++i) {
    if (gray[i] == 255) {
      m.classes[i] = PixelClass::Cloud;
      ++cloud;
    } else if (gray[i] == 128) {
      m.classes[i] = PixelClass::Sky;
      ++sky;
    } else {
      m.classes[i] = PixelClass::Invalid;
    }
  }
  m.cloud_fraction =
      (cloud + sky) > 0 ? static_cast<double>(cloud) / (cloud + sky) : 0.0;
  return m;
}

}  // namespace skynow
