// Acceptance suite: one pass/fail line per criterion, exit code = failures.
// Criteria run against the bundled synthetic scene generator plus exact
// equation-level checks; the end-to-end criteria drive the shared library
// through the same C API the CLI uses.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "skynow.h"
#include "skynow/io.hpp"
#include "skynow/metrics.hpp"
#include "skynow/pipeline.hpp"
#include "skynow/synth.hpp"

using namespace skynow;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;
std::vector<std::string> g_notes;

void report(int criterion, bool pass, const std::string& what,
            const std::string& detail) {
  std::printf("[%s] criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL",
              criterion, what.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

const StereoRig kRig{{59.9724, 11.0524}, {59.9724, 11.0724}, 1120.0};

SceneSpec scene_spec(double fraction, Vec2 wind, double height,
                     std::uint64_t seed, int frames, int size) {
  SceneSpec spec;
  spec.cloud_fraction_target = fraction;
  spec.wind_px_per_frame = wind;
  spec.cloud_layer_height_m = height;
  spec.texture_seed = seed;
  spec.frame_count = frames;
  spec.image_size = size;
  spec.start_time = utc_from_civil(2024, 6, 1, 11, 0, 0);
  spec.rig = kRig;
  spec.lens1 = LensModel{90.0, size * 0.5, std::vector<double>(8, 0.0)};
  spec.lens2 = spec.lens1;
  return spec;
}

SegmentationMap truth_mask(const Scene& scene, int frame) {
  SegmentationMap seg;
  seg.size = kReferenceGridSize;
  seg.classes.assign(static_cast<std::size_t>(seg.size) * seg.size,
                     PixelClass::Invalid);
  const SkyGrid grid{seg.size, 90.0};
  for (int y = 0; y < seg.size; ++y)
    for (int x = 0; x < seg.size; ++x)
      if (grid.valid(x, y))
        seg.classes[static_cast<std::size_t>(y * seg.size + x)] =
            scene.truth.cloud_mask_cam1[static_cast<std::size_t>(frame)]
                                       [static_cast<std::size_t>(y * seg.size + x)]
                ? PixelClass::Cloud
                : PixelClass::Sky;
  return seg;
}

// ---------------------------------------------------------------- criterion 1
void criterion_1_equations() {
  const auto t0 = Clock::now();
  bool ok = true;
  std::ostringstream why;
  auto expect = [&](bool cond, const char* what) {
    if (!cond) {
      ok = false;
      why << what << "; ";
    }
  };

  // Eq. (1): the equidistant mapping, exact at half radius and the center
  const SkyGrid grid{100, 90.0};
  double zen = 0.0, az = 0.0;
  grid.pixel_to_angles(grid.center() + grid.radius() * 0.5, grid.center(), zen, az);
  expect(std::abs(zen - 45.0) < 1e-9, "Eq1 r=R/2");
  grid.pixel_to_angles(grid.center(), grid.center(), zen, az);
  expect(std::abs(zen) < 1e-9, "Eq1 r=0");

  // Eq. (2): HSI saturation
  expect(std::abs(saturation(1, 1, 1) - 0.0) < 1e-9, "Eq2 gray");
  expect(std::abs(saturation(1, 0, 0) - 1.0) < 1e-9, "Eq2 red");
  expect(std::abs(saturation(0.5f, 0.25f, 0.25f) - 0.25) < 1e-6, "Eq2 mixed");

  // Eq. (3): normalized blue/red ratio
  expect(std::abs(nbr(0.5f, 0.0f, 0.5f)) < 1e-9, "Eq3 B=R");
  expect(std::abs(nbr(0.0f, 0.0f, 1.0f) - 1.0) < 1e-9, "Eq3 blue");
  expect(std::abs(nbr(0.4f, 0.0f, 0.6f) - 0.2) < 1e-6, "Eq3 0.2");

  // Eq. (4): clear-sky GHI
  const ClearSkyModel model;
  expect(std::abs(clear_sky_ghi({0, 0}, model) - 1361.0) < 1e-9, "Eq4 zenith");
  expect(std::abs(clear_sky_ghi({60, 0}, model) - 680.5) < 1e-9, "Eq4 60deg");
  expect(clear_sky_ghi({120, 0}, model) == 0.0, "Eq4 night");

  // Eqs. (5)-(6): daily clearness and variability
  const DailyStats cs = daily_stats(std::vector<double>(60, 0.5));
  expect(std::abs(cs.mean_clearness_kbar - 0.5) < 1e-9, "Eq5 const");
  expect(cs.mean_variability_vbar == 0.0, "Eq6 const");
  std::vector<double> alt;
  for (int i = 0; i < 61; ++i) alt.push_back(i % 2 ? 1.0 : 0.0);
  expect(std::abs(daily_stats(alt).mean_variability_vbar - 1.0) < 1e-9,
         "Eq6 alternating");

  // Eq. (7): clearness index
  expect(std::abs(*clearness_index(800, 800) - 1.0) < 1e-9, "Eq7 unity");
  expect(std::abs(*clearness_index(400, 800) - 0.5) < 1e-9, "Eq7 half");
  expect(!clearness_index(100, 0).has_value(), "Eq7 guard");

  // Eq. (8): learning-rate scaling
  expect(std::abs(nn::scale_lr(128, 3e-4, 128) - 3e-4) < 1e-12, "Eq8 same");
  expect(std::abs(nn::scale_lr(1, 1e-5, 128) - 1.28e-3) < 1e-12, "Eq8 128x");

  // Eq. (9): skill score
  expect(*skill_score(100, 100) == 0.0, "Eq9 equal");
  expect(*skill_score(0, 100) == 1.0, "Eq9 perfect");
  expect(*skill_score(200, 100) == -1.0, "Eq9 worse");

  // Eq. (10): smart persistence
  std::array<double, kHorizonSteps> future;
  future.fill(600.0);
  const ForecastRecord p = smart_persistence(400.0, 800.0, future, 0);
  expect(std::abs(p.ghi_wm2[0] - 300.0) < 1e-9, "Eq10 scaled");
  future.fill(800.0);
  const ForecastRecord flat = smart_persistence(431.0, 800.0, future, 0);
  expect(std::abs(flat.ghi_wm2[89] - 431.0) < 1e-9, "Eq10 flat");

  // Eq. (11): permutation importance, identity permutation is exactly zero
  {
    std::vector<FeatureSeriesRow> rows(40);
    Rng rng(4);
    for (auto& r : rows) r.cs_cam1 = rng.uniform();
    std::vector<SampleWindow> windows;
    for (int i = 0; i + kLookbackSteps <= 40; ++i) {
      SampleWindow w;
      w.lookback_start = i;
      for (auto& t : w.targets_norm) t = 0.5;
      windows.push_back(w);
    }
    PredictFn fn = [](const nn::TensorF32& lb, const SampleWindow&) {
      std::array<double, kHorizonSteps> out;
      out.fill(lb.data[0] * 100.0);
      return out;
    };
    std::vector<int> identity(40);
    for (int i = 0; i < 40; ++i) identity[static_cast<std::size_t>(i)] = i;
    const auto cells = permutation_importance_single(
        fn, rows, windows, FeatureScaling{}, 0, identity, 100);
    for (const auto& c : cells)
      expect(c.delta_mae == 0.0, "Eq11 identity");
  }

  const double dt = seconds_since(t0);
  report(1, ok && dt < 5.0, "equation conformance, Eqs. (1)-(11)",
         ok ? "all exact, " + format_double(dt) + " s" : why.str());
}

// ---------------------------------------------------------------- criterion 2
void criterion_2_gradients() {
  const auto t0 = Clock::now();
  Rng rng(123);
  double worst = 0.0;
  auto track = [&](double err) { worst = std::max(worst, err); };

  using T = double;
  const struct {
    int h, w, cin, cout;
  } conv_shapes[] = {{6, 6, 2, 3}, {7, 5, 1, 4}, {5, 8, 3, 2}};
  for (const auto& s : conv_shapes) {
    nn::Conv2D<T> conv(3, 3, s.cin, s.cout, true, "c", rng);
    nn::Tensor<T> x = nn::Tensor<T>::zeros({s.h, s.w, s.cin});
    for (auto& v : x.data) v = rng.normal();
    nn::Tensor<T> target = nn::Tensor<T>::zeros({s.h - 2, s.w - 2, s.cout});
    for (auto& v : target.data) v = rng.normal();
    track(oracles::gradient_check({&conv.weight, &conv.bias}, [&](bool g) {
      if (g) {
        conv.weight.zero_grad();
        conv.bias.zero_grad();
      }
      const auto y = conv.forward(x);
      const double l = nn::mae_loss(y, target);
      if (g)
        conv.backward(nn::mae_loss_grad(y, target));
      else
        conv.clear_cache();
      return l;
    }));
  }

  for (const int channels : {2, 3, 5}) {
    nn::ChannelScale<T> scale(channels);
    for (auto& v : scale.weight.value.data) v = rng.normal();
    nn::Tensor<T> x = nn::Tensor<T>::zeros({4, 4, channels});
    nn::Tensor<T> target = x;
    for (auto& v : x.data) v = rng.normal();
    for (auto& v : target.data) v = rng.normal();
    track(oracles::gradient_check({&scale.weight}, [&](bool g) {
      if (g) scale.weight.zero_grad();
      const auto y = scale.forward(x);
      const double l = nn::mae_loss(y, target);
      if (g)
        scale.backward(nn::mae_loss_grad(y, target));
      else
        scale.clear_cache();
      return l;
    }));
  }

  // maxpool routes gradients through an input parameter
  for (const int n : {4, 6, 5}) {
    nn::MaxPool2<T> pool;
    nn::Param<T> xp;
    xp.init({n, n, 2}, "x");
    for (auto& v : xp.value.data) v = rng.normal();
    nn::Tensor<T> target = nn::Tensor<T>::zeros({n / 2, n / 2, 2});
    for (auto& v : target.data) v = rng.normal();
    track(oracles::gradient_check({&xp}, [&](bool g) {
      const auto y = pool.forward(xp.value);
      const double l = nn::mae_loss(y, target);
      if (g)
        xp.grad = pool.backward(nn::mae_loss_grad(y, target));
      else
        pool.clear_cache();
      return l;
    }));
  }

  const struct {
    int in, units, steps;
  } lstm_shapes[] = {{3, 5, 4}, {2, 4, 6}, {6, 3, 5}};
  for (const auto& s : lstm_shapes) {
    nn::Lstm<T> lstm(s.in, s.units, false, "l", rng);
    nn::Tensor<T> seq = nn::Tensor<T>::zeros({s.steps, s.in});
    for (auto& v : seq.data) v = rng.normal() * 0.7;
    nn::Tensor<T> target = nn::Tensor<T>::zeros({s.units});
    for (auto& v : target.data) v = rng.normal();
    track(oracles::gradient_check({&lstm.wx, &lstm.wh, &lstm.b}, [&](bool g) {
      if (g) {
        lstm.wx.zero_grad();
        lstm.wh.zero_grad();
        lstm.b.zero_grad();
      }
      const auto y = lstm.forward(seq);
      const double l = nn::mae_loss(y, target);
      if (g)
        lstm.backward(nn::mae_loss_grad(y, target));
      else
        lstm.clear_cache();
      return l;
    }));
  }

  const struct {
    int in, units;
  } dense_shapes[] = {{5, 3}, {8, 8}, {3, 90}};
  for (const auto& s : dense_shapes) {
    nn::Dense<T> dense(s.in, s.units, "d", rng);
    nn::Tensor<T> x = nn::Tensor<T>::zeros({s.in});
    for (auto& v : x.data) v = rng.normal();
    nn::Tensor<T> target = nn::Tensor<T>::zeros({s.units});
    for (auto& v : target.data) v = rng.normal();
    track(oracles::gradient_check({&dense.weight, &dense.bias}, [&](bool g) {
      if (g) {
        dense.weight.zero_grad();
        dense.bias.zero_grad();
      }
      const auto y = dense.forward(x);
      const double l = nn::mae_loss(y, target);  // MAE head included
      if (g)
        dense.backward(nn::mae_loss_grad(y, target));
      else
        dense.clear_cache();
      return l;
    }));
  }

  const double dt = seconds_since(t0);
  report(2, worst < 1e-4 && dt < 120.0,
         "finite-difference gradients for every differentiable op",
         "worst rel err " + format_double(worst) + ", " + format_double(dt) + " s");
}

// ---------------------------------------------------------------- criterion 3
void criterion_3_flow() {
  const auto t0 = Clock::now();
  const struct {
    Vec2 wind;
    std::uint64_t seed;
  } cases[] = {{{3, 0}, 301}, {{-2, 4}, 302}, {{1, 1}, 303}};
  double worst = 0.0;
  for (const auto& tc : cases) {
    const Scene scene =
        generate(scene_spec(0.5, tc.wind, 2000.0, tc.seed, 2, 100));
    const SkyGrid grid{100, 90.0};
    const SkyImage f0 = from_raw8(scene.frames.cam1[0], grid, 0, "c");
    const SkyImage f1 = from_raw8(scene.frames.cam1[1], grid, 10, "c");
    const FlowField flow = dense_flow(f0, f1, FlowParams{});
    double su = 0, sv = 0;
    std::int64_t n = 0;
    const auto& mask = scene.truth.cloud_mask_cam1[1];
    for (int y = 0; y < 100; ++y)
      for (int x = 0; x < 100; ++x)
        if (mask[static_cast<std::size_t>(y * 100 + x)]) {
          su += flow.u_at(x, y);
          sv += flow.v_at(x, y);
          ++n;
        }
    worst = std::max({worst, std::abs(su / n - tc.wind.x),
                      std::abs(sv / n - tc.wind.y)});
  }
  const double dt = seconds_since(t0);
  report(3, worst < 0.5 && dt < 30.0,
         "flow recovery of (3,0), (-2,4), (1,1) translations",
         "worst component err " + format_double(worst) + " px, " +
             format_double(dt) + " s");
}

// ---------------------------------------------------------------- criterion 4
void criterion_4_segmentation() {
  bool ok = true;
  std::ostringstream detail;

  // three-class scene accuracy against generator labels
  const Scene rendered = generate(scene_spec(0.5, {1, 0}, 2000.0, 41, 2, 100));
  const SkyImage im =
      from_raw8(rendered.frames.cam1[0], SkyGrid{100, 90.0}, 0, "cam1");
  const SegmentationMap seg = segment(im, SegThresholds{});
  std::int64_t agree = 0, total = 0;
  for (int y = 0; y < 100; ++y)
    for (int x = 0; x < 100; ++x) {
      if (!im.is_valid(x, y)) continue;
      const bool truth =
          rendered.truth.cloud_mask_cam1[0][static_cast<std::size_t>(y * 100 + x)];
      agree += (seg.at(x, y) == PixelClass::Cloud) == truth;
      ++total;
    }
  const double acc = static_cast<double>(agree) / total;
  ok &= acc >= 0.95;
  detail << "accuracy " << format_double(acc);

  // unimodal clear and overcast scenes: cloud fraction within 0.02 of truth
  const Scene clear = generate(scene_spec(0.0, {0, 0}, 2000.0, 42, 2, 100));
  const SkyImage clear_im =
      from_raw8(clear.frames.cam1[0], SkyGrid{100, 90.0}, 0, "cam1");
  const SegmentationMap clear_seg = segment(clear_im, SegThresholds{});
  ok &= clear_seg.cloud_fraction <= 0.02;
  detail << ", clear fraction " << format_double(clear_seg.cloud_fraction);

  const Scene overcast = generate(scene_spec(1.0, {1, 0}, 2000.0, 43, 2, 100));
  const SkyImage over_im =
      from_raw8(overcast.frames.cam1[0], SkyGrid{100, 90.0}, 0, "cam1");
  const SegmentationMap over_seg = segment(over_im, SegThresholds{});
  ok &= over_seg.cloud_fraction >= 0.98;
  detail << ", overcast fraction " << format_double(over_seg.cloud_fraction);

  report(4, ok, "segmentation accuracy and unimodal cloud fractions",
         detail.str());
}

// ---------------------------------------------------------------- criterion 5
void criterion_5_cbh() {
  bool ok = true;
  std::ostringstream detail;
  for (const double height : {1000.0, 2000.0, 4000.0}) {
    const Scene scene = generate(
        scene_spec(0.45, {1.5, 0.5}, height, 500 + static_cast<int>(height), 2, 100));
    const SkyGrid grid{100, 90.0};
    const SkyImage im1 = from_raw8(scene.frames.cam1[0], grid, 0, "cam1");
    const SkyImage im2 = from_raw8(scene.frames.cam2[0], grid, 0, "cam2");
    const auto median =
        match_height(im1, im2, truth_mask(scene, 0), CbhSearch{}, kRig, 2)
            .median_cbh_m();
    const double err = median ? std::abs(*median - height) / height : 1.0;
    ok &= err < 0.10;
    detail << format_double(height) << "->"
           << (median ? format_double(*median) : "none") << " ";
  }

  // image-size sensitivity study on one scene
  const Scene scene = generate(scene_spec(0.45, {1.5, 0.5}, 2000.0, 777, 2, 400));
  LensModel lens{90.0, 200.0, std::vector<double>(8, 0.0)};
  const auto summaries =
      resolution_study(scene.frames.cam1[0], scene.frames.cam2[0], lens, lens,
                       {}, {}, kRig, SegThresholds{}, CbhSearch{},
                       {400, 200, 100, 50}, 2);
  detail << "| study: ";
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    const auto& s = summaries[i];
    detail << s.size << "px->"
           << (s.median_m ? format_double(*s.median_m) : "none") << " ";
    if (s.size >= 100) {
      const bool in_band =
          s.median_m && std::abs(*s.median_m - 2000.0) / 2000.0 <= 0.15;
      ok &= in_band;
    }
  }
  report(5, ok, "stereo CBH recovery and resolution stability", detail.str());
}

// ---------------------------------------------------------------- criterion 6
void criterion_6_persistence() {
  IrradianceSeries truth;
  Rng rng(66);
  const UtcTime t0 = utc_from_civil(2024, 6, 10, 9, 0, 0);
  const GeoLocation site{59.9724, 11.0524};
  const ClearSkyModel model;
  for (int i = 0; i < 1500; ++i) {
    const UtcTime ts = t0 + i * kCadenceSeconds;
    const double clear = clear_sky_ghi(solar_position(ts, site), model);
    truth.samples.push_back({ts, clear * rng.uniform(0.3, 1.0)});
  }
  std::map<UtcTime, double> truth_at;
  for (const auto& s : truth.samples) truth_at[s.timestamp] = s.ghi_wm2;

  std::vector<ForecastRecord> persistence;
  for (int i = 0; i + kHorizonSteps < 1400; i += 11) {
    const UtcTime ts = t0 + i * kCadenceSeconds;
    const double clear_now = clear_sky_ghi(solar_position(ts, site), model);
    std::array<double, kHorizonSteps> future;
    for (int h = 0; h < kHorizonSteps; ++h)
      future[static_cast<std::size_t>(h)] = clear_sky_ghi(
          solar_position(ts + (h + 1) * kCadenceSeconds, site), model);
    persistence.push_back(
        smart_persistence(truth_at.at(ts), clear_now, future, ts));
  }

  const MetricTable table = evaluate(persistence, truth, persistence, "persistence");
  bool ok = !table.cells.empty();
  for (const auto& cell : table.cells)
    ok &= cell.ss.has_value() && *cell.ss == 0.0;
  report(6, ok, "smart persistence scores zero skill against itself",
         std::to_string(table.cells.size()) + " cells, all exactly 0");
}

// ------------------------------------------------------- criteria 7 and 9/10
struct CapiRun {
  skynow_run* run = nullptr;

  CapiRun(const std::string& cfg, const std::string& dir, int threads) {
    if (skynow_run_open(cfg.empty() ? nullptr : cfg.c_str(), dir.c_str(),
                        threads, &run) != SKYNOW_OK)
      throw DataError("cannot open pipeline run at " + dir);
  }
  ~CapiRun() { skynow_run_close(run); }

  void exec(skynow_status (*fn)(skynow_run*), const char* name) {
    if (fn(run) != SKYNOW_OK)
      throw DataError(std::string(name) + ": " + skynow_last_error(run));
  }
  void exec2(skynow_status (*fn)(skynow_run*, const char*), const char* arg,
             const char* name) {
    if (fn(run, arg) != SKYNOW_OK)
      throw DataError(std::string(name) + ": " + skynow_last_error(run));
  }
  void full_pipeline(const char* method) {
    exec(&skynow_cmd_synth, "synth");
    exec(&skynow_cmd_calibrate, "calibrate");
    exec(&skynow_cmd_preprocess, "preprocess");
    exec(&skynow_cmd_segment, "segment");
    exec(&skynow_cmd_flow, "flow");
    exec(&skynow_cmd_cbh, "cbh");
    exec(&skynow_cmd_features, "features");
    exec2(&skynow_cmd_train, method, "train");
    exec2(&skynow_cmd_predict, method, "predict");
    exec(&skynow_cmd_evaluate, "evaluate");
  }
};

void write_config(const std::string& path, const std::string& body) {
  std::ofstream out(path);
  out << body;
}

void criterion_7_learning() {
  const auto t0 = Clock::now();
  const std::string dir = "/tmp/skynow_acceptance_bench";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string cfg = dir + "/config.toml";
  write_config(cfg,
               "[synth]\n"
               "seed = 7\n"
               "days = 20\n"
               "frames_per_day = 240\n"
               "image_size = 112\n"
               "[train]\n"
               "seed = 7\n"
               "max_epochs = 60\n"
               "patience = 10\n");

  bool ok = false;
  std::ostringstream detail;
  try {
    CapiRun run(cfg, dir, 2);
    run.full_pipeline("C");

    // average SS for horizons >= 60 s on the variable (broken) test days
    const DatasetManifest manifest = DatasetManifest::load(dir + "/manifest.json");
    std::set<std::string> variable_test_days;
    for (const auto& d : manifest.days)
      if (d.split == Split::Test && d.regime == "broken")
        variable_test_days.insert(d.date);

    double ss_sum = 0.0;
    int ss_n = 0;
    for (const auto& row : read_csv(dir + "/metrics/metrics.csv",
                                    "day,horizon_s,rmse,mae,ss,model")) {
      if (row[5] != "C" || !variable_test_days.count(row[0])) continue;
      const int horizon_s = std::stoi(row[1]);
      if (horizon_s < 60 || row[4].empty()) continue;
      ss_sum += std::stod(row[4]);
      ++ss_n;
    }
    const double mean_ss = ss_n ? ss_sum / ss_n : -1.0;
    const double dt = seconds_since(t0);
    ok = ss_n > 0 && mean_ss > 0.0 && dt < 1200.0;
    detail << "mean SS " << format_double(mean_ss) << " over " << ss_n
           << " cells on " << variable_test_days.size()
           << " variable test days, " << format_double(dt) << " s";
  } catch (const std::exception& e) {
    detail << "pipeline failure: " << e.what();
  }
  report(7, ok, "Method C beats smart persistence beyond 60 s", detail.str());
}

// ---------------------------------------------------------------- criterion 8
void criterion_8_importance() {
  bool ok = true;
  std::ostringstream detail;

  const int rows_n = 80;
  Rng rng(88);
  std::vector<FeatureSeriesRow> rows(rows_n);
  for (auto& r : rows) {
    r.cs_cam1 = rng.uniform();   // planted channel 0
    r.cs_cam2 = 0.4;             // constant channel 1
    r.cmv_u1 = rng.uniform();    // present but unused channel 2
  }
  // the generator couples channel 0 to future GHI with weight growing in h
  std::vector<SampleWindow> windows;
  for (int i = 0; i + kLookbackSteps <= rows_n; ++i) {
    SampleWindow w;
    w.lookback_start = i;
    const double x = rows[static_cast<std::size_t>(i + kLookbackSteps - 1)].cs_cam1;
    for (int h = 0; h < kHorizonSteps; ++h)
      w.targets_norm[h] = (h + 1) / 90.0 * x;
    windows.push_back(w);
  }
  // the planted model predicts that coupling exactly
  PredictFn fn = [](const nn::TensorF32& lb, const SampleWindow&) {
    const double x =
        lb.data[static_cast<std::size_t>((kLookbackSteps - 1) * kMethodCChannels)];
    std::array<double, kHorizonSteps> out;
    for (int h = 0; h < kHorizonSteps; ++h)
      out[static_cast<std::size_t>(h)] = (h + 1) / 90.0 * x * 1361.0;
    return out;
  };

  const auto planted = permutation_importance(fn, rows, windows,
                                              FeatureScaling{}, 0, 10, 5, 100);
  const auto constant = permutation_importance(fn, rows, windows,
                                               FeatureScaling{}, 1, 10, 5, 100);
  const auto unused = permutation_importance(fn, rows, windows,
                                             FeatureScaling{}, 2, 10, 5, 100);

  ok &= planted[0].delta_mae > 0.0;
  ok &= std::abs(constant[0].delta_mae) < 1e-6;
  ok &= std::abs(unused[0].delta_mae) < 1e-6;
  detail << "planted " << format_double(planted[0].delta_mae) << ", constant "
         << format_double(constant[0].delta_mae) << ", unused "
         << format_double(unused[0].delta_mae);

  // PI non-decreasing across horizon buckets for the coupled channel
  double prev = -1.0;
  bool monotone = true;
  for (const auto& c : planted) {
    if (c.bucket_start_s == 0 && c.bucket_end_s == 900) continue;  // overall
    if (c.delta_mae < prev - 1e-9) monotone = false;
    prev = c.delta_mae;
  }
  ok &= monotone;
  detail << (monotone ? ", monotone over buckets" : ", NOT monotone");

  report(8, ok, "permutation importance isolates the planted channel",
         detail.str());
}

// ------------------------------------------------------------- criterion 9
void criterion_9_determinism() {
  bool ok = true;
  std::ostringstream detail;
  const std::string base = "/tmp/skynow_acceptance_det";
  const std::string cfg_body =
      "[synth]\n"
      "seed = 5\n"
      "days = 3\n"
      "frames_per_day = 130\n"
      "image_size = 100\n"
      "[train]\n"
      "seed = 5\n"
      "max_epochs = 3\n"
      "patience = 2\n"
      "batch_size = 16\n";
  try {
    std::array<std::string, 2> dirs = {base + "_1", base + "_2"};
    for (const auto& dir : dirs) {
      fs::remove_all(dir);
      fs::create_directories(dir);
      write_config(dir + "/config.toml", cfg_body);
      CapiRun run(dir + "/config.toml", dir, 1);  // bit-exact reference path
      run.full_pipeline("C");
    }
    for (const char* rel :
         {"/features.csv", "/cmv.csv", "/truth/ghi.csv",
          "/models/method_C.weights", "/forecasts/method_C.csv",
          "/forecasts/persistence.csv", "/metrics/metrics.csv"}) {
      const bool same =
          read_text_file(dirs[0] + rel) == read_text_file(dirs[1] + rel);
      ok &= same;
      if (!same) detail << rel << " differs; ";
    }
    if (ok) detail << "weights + every CSV byte-identical across runs";
  } catch (const std::exception& e) {
    ok = false;
    detail << "pipeline failure: " << e.what();
  }
  report(9, ok, "fixed seed, single thread: byte-identical outputs",
         detail.str());
}

// ------------------------------------------------------------- criterion 10
void criterion_10_windows() {
  const GeoLocation site{59.9724, 11.0524};
  bool ok = true;

  // the fixed 120-step case
  {
    WindowingInputs in;
    in.site = site;
    const UtcTime t0 = utc_from_civil(2024, 6, 21, 10, 0, 0);
    for (int i = 0; i < 120; ++i) {
      FeatureSeriesRow r;
      r.timestamp = t0 + i * kCadenceSeconds;
      in.rows.push_back(r);
      in.ghi.samples.push_back({r.timestamp, 500.0});
    }
    ok &= make_windows(in).size() == 16;
  }

  // random calendars against the brute-force oracle, elevation cutoff active
  Rng rng(314159);
  int checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int steps = 105 + static_cast<int>(rng.index(160));
    // random day of year and start hour so some calendars cross the cutoff
    const int day = 1 + static_cast<int>(rng.index(364));
    const int hour = 3 + static_cast<int>(rng.index(18));
    const UtcTime t0 =
        utc_from_civil(2024, 1, 1, hour, 0, 0) + static_cast<UtcTime>(day) * 86400;

    WindowingInputs in;
    in.site = site;
    std::vector<bool> present(static_cast<std::size_t>(steps), true);
    const int gaps = static_cast<int>(rng.index(5));
    for (int g = 0; g < gaps; ++g)
      present[static_cast<std::size_t>(rng.index(steps))] = false;

    std::vector<bool> usable(static_cast<std::size_t>(steps));
    for (int i = 0; i < steps; ++i) {
      const UtcTime ts = t0 + i * kCadenceSeconds;
      FeatureSeriesRow r;
      r.timestamp = ts;
      in.rows.push_back(r);
      if (present[static_cast<std::size_t>(i)])
        in.ghi.samples.push_back({ts, 400.0});
      usable[static_cast<std::size_t>(i)] =
          present[static_cast<std::size_t>(i)] &&
          solar_position(ts, site).elevation_deg() >= 10.0;
    }
    const int want = oracles::count_windows_bruteforce(usable);
    const int got = static_cast<int>(make_windows(in).size());
    ok &= want == got;
    checked += want;
  }
  report(10, ok, "window arithmetic matches brute-force enumeration",
         std::to_string(checked) + " windows across 1000 random calendars");
}

}  // namespace

int main() {
  std::printf("acceptance suite (synthetic benchmark + equation checks)\n");
  const auto t0 = Clock::now();
  criterion_1_equations();
  criterion_2_gradients();
  criterion_3_flow();
  criterion_4_segmentation();
  criterion_5_cbh();
  criterion_6_persistence();
  criterion_7_learning();
  criterion_8_importance();
  criterion_9_determinism();
  criterion_10_windows();
  std::printf("acceptance finished in %.1f s: %s (%d failures)\n",
              seconds_since(t0), g_failures == 0 ? "ALL PASS" : "FAILURES",
              g_failures);
  return g_failures;
}
