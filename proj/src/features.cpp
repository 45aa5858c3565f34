#include "skynow/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace skynow {

std::vector<SampleWindow> make_windows(const WindowingInputs& in) {
  std::map<UtcTime, double> ghi_at;
  for (const auto& s : in.ghi.samples) ghi_at[s.timestamp] = s.ghi_wm2;

  // usable = row + GHI present + elevation at or above the cutoff
  std::vector<int> usable;
  usable.reserve(in.rows.size());
  for (int i = 0; i < static_cast<int>(in.rows.size()); ++i) {
    const UtcTime ts = in.rows[i].timestamp;
    if (!ghi_at.count(ts)) continue;
    const SolarGeometry geom = solar_position(ts, in.site);
    if (geom.elevation_deg() < in.min_elevation_deg) continue;
    usable.push_back(i);
  }

  std::vector<SampleWindow> out;
  std::size_t run_start = 0;
  for (std::size_t k = 0; k <= usable.size(); ++k) {
    const bool breaks =
        k == usable.size() ||
        (k > run_start &&
         in.rows[usable[k]].timestamp - in.rows[usable[k - 1]].timestamp !=
             kCadenceSeconds);
    if (!breaks) continue;

    const std::size_t run_len = k - run_start;
    if (run_len >= static_cast<std::size_t>(kWindowSpan)) {
      for (std::size_t s = run_start; s + kWindowSpan <= k; ++s) {
        SampleWindow w;
        w.lookback_start = usable[s];
        const int issue = usable[s + kLookbackSteps - 1];
        w.issue_time = in.rows[issue].timestamp;
        w.day = format_date(w.issue_time);
        for (int t = 0; t < kLookbackSteps; ++t)
          w.ghi_history_norm[t] =
              ghi_at.at(in.rows[usable[s + t]].timestamp) / in.g0;
        for (int h = 0; h < kHorizonSteps; ++h)
          w.targets_norm[h] =
              ghi_at.at(in.rows[usable[s + kLookbackSteps + h]].timestamp) /
              in.g0;
        out.push_back(std::move(w));
      }
    }
    run_start = k;
  }
  return out;
}

SplitWindows chronological_split(const std::vector<SampleWindow>& windows,
                                 const std::map<std::string, Split>& day_split) {
  SplitWindows s;
  for (const auto& w : windows) {
    const auto it = day_split.find(w.day);
    if (it == day_split.end())
      throw DataError("window day not present in the split map: " + w.day);
    switch (it->second) {
      case Split::Train: s.train.push_back(w); break;
      case Split::Val: s.val.push_back(w); break;
      case Split::Test: s.test.push_back(w); break;
    }
  }

  // a window spans [issue - 140 s, issue + 900 s]
  auto span_min = [](const SampleWindow& w) {
    return w.issue_time - (kLookbackSteps - 1) * kCadenceSeconds;
  };
  auto span_max = [](const SampleWindow& w) {
    return w.issue_time + kHorizonSteps * kCadenceSeconds;
  };
  UtcTime fit_max = std::numeric_limits<UtcTime>::min();
  for (const auto& w : s.train) fit_max = std::max(fit_max, span_max(w));
  for (const auto& w : s.val) fit_max = std::max(fit_max, span_max(w));
  for (const auto& w : s.test)
    if (span_min(w) <= fit_max)
      throw DataError("chronological_split: test window overlaps train/val");
  return s;
}

Plane solar_position_map(const SkyGrid& grid, const SolarGeometry& sun) {
  Plane p = Plane::zeros(grid.size);
  const double sz = deg2rad(sun.zenith_deg);
  const double sa = deg2rad(sun.azimuth_deg);
  for (int y = 0; y < grid.size; ++y)
    for (int x = 0; x < grid.size; ++x) {
      double zen, az;
      if (!grid.pixel_to_angles(x, y, zen, az)) continue;
      const double cosd = std::cos(deg2rad(zen)) * std::cos(sz) +
                          std::sin(deg2rad(zen)) * std::sin(sz) *
                              std::cos(deg2rad(az) - sa);
      p.at(x, y) =
          static_cast<float>(std::acos(std::clamp(cosd, -1.0, 1.0)));
    }
  return p;
}

namespace {

nn::TensorF32 stack_batch(const std::vector<nn::TensorF32>& singles) {
  if (singles.empty()) throw DataError("empty batch");
  std::vector<int> shape = singles[0].shape;
  shape.insert(shape.begin(), static_cast<int>(singles.size()));
  nn::TensorF32 out = nn::TensorF32::zeros(shape);
  const std::size_t stride = singles[0].data.size();
  for (std::size_t b = 0; b < singles.size(); ++b) {
    if (singles[b].data.size() != stride)
      throw DataError("batch shape mismatch");
    std::copy(singles[b].data.begin(), singles[b].data.end(),
              out.data.begin() + b * stride);
  }
  return out;
}

}  // namespace

nn::TensorF32 build_method_a_input(const std::vector<SkyImage>& frames) {
  if (frames.size() != kLookbackSteps)
    throw DataError("method A window needs 15 frames");
  const int sz = frames[0].size();
  nn::TensorF32 t = nn::TensorF32::zeros({kLookbackSteps, sz, sz, 3});
  std::size_t o = 0;
  for (const auto& f : frames) {
    if (f.size() != sz) throw DataError("frame size mismatch");
    std::copy(f.rgb.begin(), f.rgb.end(), t.data.begin() + o);
    o += f.rgb.size();
  }
  return t;
}

nn::TensorF32 build_method_a_batch(
    const std::vector<std::vector<SkyImage>>& windows) {
  std::vector<nn::TensorF32> singles;
  singles.reserve(windows.size());
  for (const auto& w : windows) singles.push_back(build_method_a_input(w));
  return stack_batch(singles);
}

nn::TensorF32 build_method_b_input(const std::vector<FeatureFrame>& frames,
                                   const FeatureScaling& scaling) {
  if (frames.size() != kLookbackSteps)
    throw DataError("method B window needs 15 feature frames");
  const int sz = frames[0].seg1.size;
  nn::TensorF32 t = nn::TensorF32::zeros({kLookbackSteps, sz, sz, 9});
  auto clamp_unit = [](double v) {
    return static_cast<float>(std::clamp(v, -1.0, 1.0));
  };
  for (int step = 0; step < kLookbackSteps; ++step) {
    const FeatureFrame& f = frames[static_cast<std::size_t>(step)];
    for (int y = 0; y < sz; ++y)
      for (int x = 0; x < sz; ++x) {
        float* px = t.data.data() +
                    ((static_cast<std::size_t>(step) * sz + y) * sz + x) * 9;
        px[0] = static_cast<float>(f.sunpos1.at(x, y) / kPi);
        px[1] = f.seg1.at(x, y) == PixelClass::Cloud ? 1.0f : 0.0f;
        px[2] = clamp_unit(f.flow1.u_at(x, y) / scaling.cmv_scale_px);
        px[3] = clamp_unit(f.flow1.v_at(x, y) / scaling.cmv_scale_px);
        px[4] = static_cast<float>(f.sunpos2.at(x, y) / kPi);
        px[5] = f.seg2.at(x, y) == PixelClass::Cloud ? 1.0f : 0.0f;
        px[6] = clamp_unit(f.flow2.u_at(x, y) / scaling.cmv_scale_px);
        px[7] = clamp_unit(f.flow2.v_at(x, y) / scaling.cmv_scale_px);
        const float h = f.cbh1.at(x, y);
        px[8] = h >= 0.0f ? static_cast<float>(std::clamp(
                                h / scaling.cbh_max_m, 0.0, 1.0))
                          : 0.0f;
      }
  }
  return t;
}

nn::TensorF32 build_method_b_batch(
    const std::vector<std::vector<FeatureFrame>>& windows,
    const FeatureScaling& scaling) {
  std::vector<nn::TensorF32> singles;
  singles.reserve(windows.size());
  for (const auto& w : windows)
    singles.push_back(build_method_b_input(w, scaling));
  return stack_batch(singles);
}

nn::TensorF32 build_method_c_input(const FeatureSeriesRow* rows, int count,
                                   const FeatureScaling& scaling) {
  if (count != kLookbackSteps)
    throw DataError("method C window needs 15 rows");
  const int channels = scaling.method_c_channels();
  nn::TensorF32 t = nn::TensorF32::zeros({kLookbackSteps, channels});
  auto clamp_unit = [](double v) {
    return static_cast<float>(std::clamp(v, -1.0, 1.0));
  };
  for (int i = 0; i < count; ++i) {
    const FeatureSeriesRow& r = rows[i];
    float* c = t.data.data() + static_cast<std::size_t>(i) * channels;
    c[0] = static_cast<float>(r.cs_cam1);
    c[1] = static_cast<float>(r.cs_cam2);
    c[2] = clamp_unit(r.cmv_u1 / scaling.cmv_scale_px);
    c[3] = clamp_unit(r.cmv_v1 / scaling.cmv_scale_px);
    c[4] = clamp_unit(r.cmv_u2 / scaling.cmv_scale_px);
    c[5] = clamp_unit(r.cmv_v2 / scaling.cmv_scale_px);
    c[6] = static_cast<float>(
        std::clamp(r.median_cbh_m / scaling.cbh_max_m, 0.0, 1.0));
    c[7] = static_cast<float>(r.zenith_deg / 180.0);
    c[8] = static_cast<float>(r.azimuth_deg / 360.0);
    c[9] = static_cast<float>(r.ghi_clear_wm2 / scaling.g0);
  }
  return t;
}

nn::TensorF32 build_method_c_batch(
    const std::vector<std::vector<FeatureSeriesRow>>& windows,
    const FeatureScaling& scaling) {
  std::vector<nn::TensorF32> singles;
  singles.reserve(windows.size());
  for (const auto& w : windows)
    singles.push_back(
        build_method_c_input(w.data(), static_cast<int>(w.size()), scaling));
  return stack_batch(singles);
}

}  // namespace skynow
