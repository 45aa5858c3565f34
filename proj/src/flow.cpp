#include "skynow/flow.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace skynow {

Plane grayscale(const SkyImage& image) {
  Plane g = Plane::zeros(image.size());
  for (int y = 0; y < g.size; ++y)
    for (int x = 0; x < g.size; ++x)
      g.at(x, y) =
          (image.at(x, y, 0) + image.at(x, y, 1) + image.at(x, y, 2)) / 3.0f;
  return g;
}

namespace {

// 6x6 symmetric solve by Gaussian elimination with partial pivoting.
void solve6(double m[6][6], double rhs[6], double out[6]) {
  int piv[6] = {0, 1, 2, 3, 4, 5};
  for (int k = 0; k < 6; ++k) {
    int p = k;
    for (int i = k + 1; i < 6; ++i)
      if (std::abs(m[i][k]) > std::abs(m[p][k])) p = i;
    std::swap(piv[k], piv[p]);
    for (int j = 0; j < 6; ++j) std::swap(m[k][j], m[p][j]);
    std::swap(rhs[k], rhs[p]);
    if (std::abs(m[k][k]) < 1e-300) throw NumericError("singular applicability matrix");
    for (int i = k + 1; i < 6; ++i) {
      const double f = m[i][k] / m[k][k];
      for (int j = k; j < 6; ++j) m[i][j] -= f * m[k][j];
      rhs[i] -= f * rhs[k];
    }
  }
  for (int i = 5; i >= 0; --i) {
    double s = rhs[i];
    for (int j = i + 1; j < 6; ++j) s -= m[i][j] * out[j];
    out[i] = s / m[i][i];
  }
}

inline int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

// Sliding box sum over rows then columns; window anchored centered with a
// left bias for even sizes.
void box_blur(std::vector<double>& plane, int size, int win,
              std::vector<double>& scratch) {
  const int lo = -(win / 2);
  const int hi = win - 1 - win / 2;
  const double inv = 1.0 / win;
  scratch.assign(plane.size(), 0.0);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      double s = 0.0;
      for (int d = lo; d <= hi; ++d) s += plane[y * size + clampi(x + d, 0, size - 1)];
      scratch[y * size + x] = s * inv;
    }
  }
  for (int x = 0; x < size; ++x) {
    for (int y = 0; y < size; ++y) {
      double s = 0.0;
      for (int d = lo; d <= hi; ++d) s += scratch[clampi(y + d, 0, size - 1) * size + x];
      plane[y * size + x] = s * inv;
    }
  }
}

}  // namespace

PolyExpansion polynomial_expansion(const Plane& gray, int neighborhood,
                                   double sigma,
                                   const std::vector<std::uint8_t>* valid) {
  const int n = neighborhood;
  const int sz = gray.size;
  std::vector<double> g(2 * n + 1);
  double gsum = 0.0;
  for (int i = -n; i <= n; ++i) {
    g[i + n] = std::exp(-0.5 * i * i / (sigma * sigma));
    gsum += g[i + n];
  }
  for (auto& w : g) w /= gsum;

  // basis order: 1, x, y, x^2, y^2, xy
  auto basis = [](double x, double y, double* phi) {
    phi[0] = 1.0;
    phi[1] = x;
    phi[2] = y;
    phi[3] = x * x;
    phi[4] = y * y;
    phi[5] = x * y;
  };

  // normal matrix is position independent; invert once via 6 solves
  double normal[6][6] = {{0}};
  for (int dy = -n; dy <= n; ++dy)
    for (int dx = -n; dx <= n; ++dx) {
      const double w = g[dx + n] * g[dy + n];
      double phi[6];
      basis(dx, dy, phi);
      for (int a = 0; a < 6; ++a)
        for (int b = 0; b < 6; ++b) normal[a][b] += w * phi[a] * phi[b];
    }
  double inv[6][6];
  for (int col = 0; col < 6; ++col) {
    double m[6][6], rhs[6], out[6];
    std::copy(&normal[0][0], &normal[0][0] + 36, &m[0][0]);
    for (int i = 0; i < 6; ++i) rhs[i] = i == col ? 1.0 : 0.0;
    solve6(m, rhs, out);
    for (int i = 0; i < 6; ++i) inv[i][col] = out[i];
  }

  auto tap_valid = [&](int xx, int yy) {
    return !valid || (*valid)[static_cast<std::size_t>(yy * sz + xx)] != 0;
  };

  PolyExpansion pe;
  pe.size = sz;
  pe.coef.assign(static_cast<std::size_t>(sz) * sz * 6, 0.0);
  for (int y = 0; y < sz; ++y) {
    for (int x = 0; x < sz; ++x) {
      double rhs[6] = {0, 0, 0, 0, 0, 0};
      bool clipped = false;
      double local[6][6] = {{0}};
      for (int dy = -n; dy <= n; ++dy) {
        const int yy = clampi(y + dy, 0, sz - 1);
        for (int dx = -n; dx <= n; ++dx) {
          const int xx = clampi(x + dx, 0, sz - 1);
          if (!tap_valid(xx, yy)) {
            clipped = true;
            continue;
          }
          const double w = g[dx + n] * g[dy + n];
          double phi[6];
          basis(dx, dy, phi);
          for (int a = 0; a < 6; ++a) rhs[a] += w * gray.at(xx, yy) * phi[a];
          if (valid)
            for (int a = 0; a < 6; ++a)
              for (int b = a; b < 6; ++b) local[a][b] += w * phi[a] * phi[b];
        }
      }
      double r[6];
      if (!clipped) {
        for (int a = 0; a < 6; ++a) {
          r[a] = 0.0;
          for (int b = 0; b < 6; ++b) r[a] += inv[a][b] * rhs[b];
        }
      } else {
        // partial support: refit against the clipped normal matrix
        for (int a = 0; a < 6; ++a) {
          for (int b = a; b < 6; ++b) local[b][a] = local[a][b];
          local[a][a] += 1e-9;
        }
        try {
          solve6(local, rhs, r);
        } catch (const NumericError&) {
          std::fill(r, r + 6, 0.0);
        }
      }
      double* out = pe.coef.data() + static_cast<std::size_t>(y * sz + x) * 6;
      out[0] = r[0];  // c
      out[1] = r[1];  // b1
      out[2] = r[2];  // b2
      out[3] = r[3];  // a11
      out[4] = r[4];  // a22
      out[5] = r[5] * 0.5;  // a12 (basis carries xy once)
    }
  }
  return pe;
}

namespace {

// Normal-equation planes for the per-pixel 2x2 systems: g11, g12, g22, h1, h2.
// Pixels without usable data on both frames contribute zeros, which the box
// average treats as absent evidence rather than zero motion.
void update_matrices(const PolyExpansion& p1, const PolyExpansion& p2,
                     const std::vector<std::uint8_t>& valid,
                     const FlowField& flow, std::array<std::vector<double>, 5>& m) {
  const int sz = p1.size;
  for (auto& plane : m) plane.assign(static_cast<std::size_t>(sz) * sz, 0.0);
  for (int y = 0; y < sz; ++y) {
    for (int x = 0; x < sz; ++x) {
      const std::size_t i = static_cast<std::size_t>(y * sz + x);
      if (!valid[i]) continue;
      const double du = flow.u[i];
      const double dv = flow.v[i];
      const int x2 = clampi(static_cast<int>(std::lround(x + du)), 0, sz - 1);
      const int y2 = clampi(static_cast<int>(std::lround(y + dv)), 0, sz - 1);
      if (!valid[static_cast<std::size_t>(y2 * sz + x2)]) continue;
      const double* c1 = p1.at(x, y);
      const double* c2 = p2.at(x2, y2);

      const double a11 = 0.5 * (c1[3] + c2[3]);
      const double a22 = 0.5 * (c1[4] + c2[4]);
      const double a12 = 0.5 * (c1[5] + c2[5]);
      // delta-b compensated for the displacement already applied
      const double db1 = -0.5 * (c2[1] - c1[1]) + a11 * du + a12 * dv;
      const double db2 = -0.5 * (c2[2] - c1[2]) + a12 * du + a22 * dv;

      m[0][i] = a11 * a11 + a12 * a12;
      m[1][i] = a12 * (a11 + a22);
      m[2][i] = a12 * a12 + a22 * a22;
      m[3][i] = a11 * db1 + a12 * db2;
      m[4][i] = a12 * db1 + a22 * db2;
    }
  }
}

}  // namespace

namespace {

struct FlowLevel {
  int size = 0;
  Plane gray_prev, gray_next;
  std::vector<std::uint8_t> valid;
};

FlowLevel halve(const FlowLevel& fine) {
  FlowLevel coarse;
  coarse.size = (fine.size + 1) / 2;
  coarse.gray_prev = Plane::zeros(coarse.size);
  coarse.gray_next = Plane::zeros(coarse.size);
  coarse.valid.assign(static_cast<std::size_t>(coarse.size) * coarse.size, 0);
  for (int y = 0; y < coarse.size; ++y)
    for (int x = 0; x < coarse.size; ++x) {
      double sp = 0, sn = 0;
      int n = 0;
      for (int dy = 0; dy < 2; ++dy)
        for (int dx = 0; dx < 2; ++dx) {
          const int fx = 2 * x + dx, fy = 2 * y + dy;
          if (fx >= fine.size || fy >= fine.size) continue;
          if (!fine.valid[static_cast<std::size_t>(fy * fine.size + fx)])
            continue;
          sp += fine.gray_prev.at(fx, fy);
          sn += fine.gray_next.at(fx, fy);
          ++n;
        }
      if (n == 0) continue;
      coarse.gray_prev.at(x, y) = static_cast<float>(sp / n);
      coarse.gray_next.at(x, y) = static_cast<float>(sn / n);
      coarse.valid[static_cast<std::size_t>(y * coarse.size + x)] = 1;
    }
  return coarse;
}

// bilinear resize of a flow field to `size`, scaling displacements with it
FlowField upsample_flow(const FlowField& coarse, int size) {
  FlowField fine;
  fine.size = size;
  fine.u.assign(static_cast<std::size_t>(size) * size, 0.0f);
  fine.v.assign(fine.u.size(), 0.0f);
  const double ratio = static_cast<double>(size) / coarse.size;
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      const double cx =
          std::clamp((x + 0.5) / ratio - 0.5, 0.0, coarse.size - 1.0);
      const double cy =
          std::clamp((y + 0.5) / ratio - 0.5, 0.0, coarse.size - 1.0);
      const int x0 = std::min(static_cast<int>(cx), coarse.size - 2);
      const int y0 = std::min(static_cast<int>(cy), coarse.size - 2);
      const double fx = cx - x0, fy = cy - y0;
      auto lerp = [&](const std::vector<float>& p) {
        const std::size_t i = static_cast<std::size_t>(y0 * coarse.size + x0);
        return (1 - fx) * (1 - fy) * p[i] + fx * (1 - fy) * p[i + 1] +
               (1 - fx) * fy * p[i + coarse.size] +
               fx * fy * p[i + coarse.size + 1];
      };
      const std::size_t o = static_cast<std::size_t>(y * size + x);
      fine.u[o] = static_cast<float>(lerp(coarse.u) * ratio);
      fine.v[o] = static_cast<float>(lerp(coarse.v) * ratio);
    }
  return fine;
}

void refine_level(const FlowLevel& level, const FlowParams& params,
                  FlowField& flow) {
  const PolyExpansion p1 =
      polynomial_expansion(level.gray_prev, params.poly_neighborhood,
                           params.poly_sigma, &level.valid);
  const PolyExpansion p2 =
      polynomial_expansion(level.gray_next, params.poly_neighborhood,
                           params.poly_sigma, &level.valid);
  const int win = params.window_px(level.size);

  std::array<std::vector<double>, 5> m;
  std::vector<double> scratch;
  for (int it = 0; it < params.iterations; ++it) {
    update_matrices(p1, p2, level.valid, flow, m);
    for (auto& plane : m) box_blur(plane, level.size, win, scratch);
    for (std::size_t i = 0; i < flow.u.size(); ++i) {
      // G is PSD; a trace-relative ridge keeps textureless pixels finite
      const double lam = 1e-6 * (m[0][i] + m[2][i]) + 1e-300;
      const double g11 = m[0][i] + lam, g12 = m[1][i], g22 = m[2][i] + lam;
      const double h1 = m[3][i], h2 = m[4][i];
      const double det = g11 * g22 - g12 * g12;
      if (det <= 0.0) {  // exactly zero signal
        flow.u[i] = 0.0f;
        flow.v[i] = 0.0f;
        continue;
      }
      flow.u[i] = static_cast<float>((g22 * h1 - g12 * h2) / det);
      flow.v[i] = static_cast<float>((g11 * h2 - g12 * h1) / det);
    }
  }
}

}  // namespace

FlowField dense_flow(const SkyImage& prev, const SkyImage& next,
                     const FlowParams& params) {
  params.validate();
  if (prev.size() != next.size())
    throw DataError("dense_flow: frame sizes differ");

  FlowLevel base;
  base.size = prev.size();
  base.gray_prev = grayscale(prev);
  base.gray_next = grayscale(next);
  base.valid.resize(prev.valid.size());
  for (std::size_t i = 0; i < base.valid.size(); ++i)
    base.valid[i] = prev.valid[i] && next.valid[i];

  std::vector<FlowLevel> pyramid;
  pyramid.push_back(std::move(base));
  for (int l = 1; l < params.pyramid_levels && pyramid.back().size >= 48; ++l)
    pyramid.push_back(halve(pyramid.back()));

  FlowField flow;
  flow.size = pyramid.back().size;
  flow.u.assign(static_cast<std::size_t>(flow.size) * flow.size, 0.0f);
  flow.v.assign(flow.u.size(), 0.0f);

  for (int l = static_cast<int>(pyramid.size()) - 1; l >= 0; --l) {
    if (flow.size != pyramid[static_cast<std::size_t>(l)].size)
      flow = upsample_flow(flow, pyramid[static_cast<std::size_t>(l)].size);
    refine_level(pyramid[static_cast<std::size_t>(l)], params, flow);
  }
  return flow;
}

CmvSample aggregate_cmv(const FlowField& flow, const SegmentationMap& seg,
                        const std::string& camera_id, UtcTime timestamp) {
  if (flow.size != seg.size) throw DataError("aggregate_cmv: grid mismatch");
  CmvSample s;
  s.camera_id = camera_id;
  s.timestamp = timestamp;
  double su = 0.0, sv = 0.0;
  std::int64_t n = 0;
  for (int y = 0; y < flow.size; ++y)
    for (int x = 0; x < flow.size; ++x)
      if (seg.at(x, y) == PixelClass::Cloud) {
        su += flow.u_at(x, y);
        sv += flow.v_at(x, y);
        ++n;
      }
  if (n == 0) {
    s.empty_mask = true;
    return s;
  }
  s.mean_u = su / static_cast<double>(n);
  s.mean_v = sv / static_cast<double>(n);
  return s;
}

std::pair<std::vector<CmvSample>, std::vector<CmvSample>> cross_camera_filter(
    const std::vector<CmvSample>& cam1, const std::vector<CmvSample>& cam2,
    double inconsistency_threshold) {
  if (cam1.size() != cam2.size())
    throw DataError("cross_camera_filter: series lengths differ");
  std::vector<CmvSample> out1 = cam1, out2 = cam2;
  bool have_valid = false;
  CmvSample last1, last2;
  for (std::size_t t = 0; t < out1.size(); ++t) {
    const double du = out1[t].mean_u - out2[t].mean_u;
    const double dv = out1[t].mean_v - out2[t].mean_v;
    if (std::sqrt(du * du + dv * dv) > inconsistency_threshold) {
      if (have_valid) {
        out1[t].mean_u = last1.mean_u;
        out1[t].mean_v = last1.mean_v;
        out2[t].mean_u = last2.mean_u;
        out2[t].mean_v = last2.mean_v;
      } else {
        out1[t].mean_u = out1[t].mean_v = 0.0;
        out2[t].mean_u = out2[t].mean_v = 0.0;
      }
      out1[t].filled_by_locf = true;
      out2[t].filled_by_locf = true;
    } else {
      last1 = out1[t];
      last2 = out2[t];
      have_valid = true;
    }
  }
  return {std::move(out1), std::move(out2)};
}

}  // namespace skynow
