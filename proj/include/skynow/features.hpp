#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "skynow/flow.hpp"
#include "skynow/image.hpp"
#include "skynow/nn.hpp"
#include "skynow/segmentation.hpp"
#include "skynow/solar.hpp"
#include "skynow/stereo.hpp"

namespace skynow {

constexpr int kLookbackSteps = 15;   // 150 s at 10 s cadence
constexpr int kHorizonSteps = 90;    // +10 s ... +900 s
constexpr int kWindowSpan = kLookbackSteps + kHorizonSteps;
constexpr int kMethodCChannels = 10;

/// Per-timestamp engineered products for one stereo pair of frames.
struct FeatureFrame {
  UtcTime timestamp = 0;
  SegmentationMap seg1, seg2;
  FlowField flow1, flow2;
  Plane sunpos1, sunpos2;  // per-pixel angular distance to the sun, radians
  CbhMap cbh1;
};

/// One aggregated feature row (the Method C time series). Channel order is
/// fixed: cs1, cs2, u1, v1, u2, v2, cbh, zenith, azimuth, ghi_clear.
struct FeatureSeriesRow {
  UtcTime timestamp = 0;
  double cs_cam1 = 0.0;
  double cs_cam2 = 0.0;
  double cmv_u1 = 0.0;
  double cmv_v1 = 0.0;
  double cmv_u2 = 0.0;
  double cmv_v2 = 0.0;
  double median_cbh_m = 0.0;  // 0 encodes "undefined" (clear frame)
  double zenith_deg = 0.0;
  double azimuth_deg = 0.0;
  double ghi_clear_wm2 = 0.0;
};

/// Channel scalings applied by the input builders. CMV channels may leave
/// [-1,1] only before clamping; everything else lands in [0,1].
struct FeatureScaling {
  double g0 = 1361.0;
  double cbh_max_m = 10000.0;
  double cmv_scale_px = 10.0;
  /// Reserved extra Method C channel (emitted as all zeros when enabled).
  bool eleventh_channel = false;

  int method_c_channels() const { return kMethodCChannels + (eleventh_channel ? 1 : 0); }
};

/// Supervised sample: 15 lookback steps and 90 normalized GHI targets.
struct SampleWindow {
  int lookback_start = 0;  // index of the first lookback row
  UtcTime issue_time = 0;  // timestamp of the last lookback step
  std::string day;         // UTC date of the issue time
  std::array<double, kLookbackSteps> ghi_history_norm{};
  std::array<double, kHorizonSteps> targets_norm{};
};

struct WindowingInputs {
  std::vector<FeatureSeriesRow> rows;  // sorted by timestamp
  IrradianceSeries ghi;
  GeoLocation site;
  double g0 = 1361.0;
  double min_elevation_deg = 10.0;
};

/// Enumerates all supervised windows over maximal contiguous runs of usable
/// timestamps (feature row + GHI present, 10 s spacing, solar elevation at
/// or above the cutoff). Gaps break runs; nothing is interpolated.
std::vector<SampleWindow> make_windows(const WindowingInputs& in);

enum class Split { Train, Val, Test };

struct SplitWindows {
  std::vector<SampleWindow> train, val, test;
};

/// Assigns windows by their day's split and rejects any assignment where a
/// test window overlaps (via lookback or horizon) a train/val timestamp.
SplitWindows chronological_split(const std::vector<SampleWindow>& windows,
                                 const std::map<std::string, Split>& day_split);

/// Per-pixel angular distance (radians) between the pixel's sky direction
/// and the sun; 0 outside the FOV disk.
Plane solar_position_map(const SkyGrid& grid, const SolarGeometry& sun);

// Input builders. Single-window builders return [lb, ...]; the batch
// variants stack to [bs, ...].
nn::TensorF32 build_method_a_input(const std::vector<SkyImage>& frames);
nn::TensorF32 build_method_a_batch(
    const std::vector<std::vector<SkyImage>>& windows);

/// Method B channel order: [sunpos1, cs1, u1, v1, sunpos2, cs2, u2, v2, cbh1].
nn::TensorF32 build_method_b_input(const std::vector<FeatureFrame>& frames,
                                   const FeatureScaling& scaling);
nn::TensorF32 build_method_b_batch(
    const std::vector<std::vector<FeatureFrame>>& windows,
    const FeatureScaling& scaling);

/// Method C channels in FeatureSeriesRow order, scaled: cs as-is, cmv / 10
/// clamped to [-1,1], cbh / 10 km, zenith / 180, azimuth / 360, ghi_clear / G0.
nn::TensorF32 build_method_c_input(const FeatureSeriesRow* rows, int count,
                                   const FeatureScaling& scaling);
nn::TensorF32 build_method_c_batch(
    const std::vector<std::vector<FeatureSeriesRow>>& windows,
    const FeatureScaling& scaling);

}  // namespace skynow
