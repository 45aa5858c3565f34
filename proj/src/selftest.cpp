#include <cmath>
#include <cstring>
#include <functional>
#include <iostream>
#include <sstream>

#include "skynow/io.hpp"
#include "skynow/metrics.hpp"
#include "skynow/pipeline.hpp"
#include "skynow/synth.hpp"

// Built-in oracle suite behind the `selftest` subcommand: a fast subset of
// the independent checks the test suite runs, usable on any installation.

namespace skynow {

namespace {

struct Reporter {
  std::ostream& out;
  int failures = 0;

  void check(const std::string& name, bool ok, const std::string& detail = "") {
    out << (ok ? "[ok]   " : "[FAIL] ") << name;
    if (!detail.empty()) out << " (" << detail << ")";
    out << "\n";
    if (!ok) ++failures;
  }
};

// central finite differences against the analytic gradient
template <typename Forward>
double max_grad_rel_error(std::vector<nn::Param<double>*> params,
                          Forward&& loss) {
  const double base = loss(true);  // runs backward, fills grads
  (void)base;
  double worst = 0.0;
  Rng pick(99);
  for (auto* p : params) {
    const std::size_t n = p->value.data.size();
    const std::size_t samples = std::min<std::size_t>(n, 20);
    for (std::size_t s = 0; s < samples; ++s) {
      const std::size_t i = static_cast<std::size_t>(pick.index(n));
      const double eps = 1e-6;
      const double keep = p->value.data[i];
      p->value.data[i] = keep + eps;
      const double up = loss(false);
      p->value.data[i] = keep - eps;
      const double dn = loss(false);
      p->value.data[i] = keep;
      const double fd = (up - dn) / (2 * eps);
      const double an = p->grad.data[i];
      const double denom = std::max({std::abs(fd), std::abs(an), 1e-8});
      worst = std::max(worst, std::abs(fd - an) / denom);
    }
  }
  return worst;
}

SceneSpec small_scene(double fraction, Vec2 wind, double height,
                      std::uint64_t seed, int frames, int size) {
  SceneSpec spec;
  spec.cloud_fraction_target = fraction;
  spec.wind_px_per_frame = wind;
  spec.cloud_layer_height_m = height;
  spec.texture_seed = seed;
  spec.frame_count = frames;
  spec.image_size = size;
  spec.start_time = utc_from_civil(2024, 6, 1, 11, 0, 0);
  spec.rig = StereoRig{{59.9724, 11.0524}, {59.9724, 11.0724}, 1120.0};
  spec.lens1 = LensModel{90.0, size * 0.5, std::vector<double>(8, 0.0)};
  spec.lens2 = spec.lens1;
  return spec;
}

}  // namespace

int Pipeline::cmd_selftest(std::ostream& out) {
  Reporter r{out};

  {  // ephemeris: equator, equinox, local solar noon
    double best = 90.0;
    for (int m = 0; m < 30; ++m) {
      const SolarGeometry g = solar_position(
          utc_from_civil(2024, 3, 20, 12, 0, 0) + m * 60, GeoLocation{0, 0});
      best = std::min(best, g.zenith_deg);
    }
    r.check("solar: equinox noon zenith < 0.5 deg", best < 0.5,
            "min zenith " + format_double(best));
  }
  {  // azimuth continuity across a day at the site
    double worst = 0.0;
    const UtcTime t0 = utc_from_civil(2024, 6, 1);
    for (int k = 1; k < 8640; ++k) {
      const double a0 = solar_position(t0 + (k - 1) * 10, cfg_.rig.location_cam1)
                            .azimuth_deg;
      const double a1 =
          solar_position(t0 + k * 10, cfg_.rig.location_cam1).azimuth_deg;
      worst = std::max(worst, std::abs(wrap180(a1 - a0)));
    }
    r.check("solar: azimuth continuous over a day", worst < 1.0,
            "max step " + format_double(worst) + " deg");
  }
  {  // clear-sky equation values
    const ClearSkyModel m;
    const bool ok =
        std::abs(clear_sky_ghi({0.0, 0.0}, m) - 1361.0) < 1e-9 &&
        std::abs(clear_sky_ghi({60.0, 0.0}, m) - 680.5) < 1e-9 &&
        clear_sky_ghi({120.0, 0.0}, m) == 0.0;
    r.check("solar: clear-sky GHI at 0/60/120 deg zenith", ok);
  }
  {  // daily statistics
    const DailyStats a = daily_stats(std::vector<double>(50, 0.5));
    std::vector<double> alt;
    for (int i = 0; i < 50; ++i) alt.push_back(i % 2 ? 1.0 : 0.0);
    const DailyStats b = daily_stats(alt);
    r.check("solar: daily stats on constant and alternating series",
            std::abs(a.mean_clearness_kbar - 0.5) < 1e-12 &&
                a.mean_variability_vbar == 0.0 &&
                std::abs(b.mean_variability_vbar - 1.0) < 1e-12);
  }
  {  // lens: forward/inverse round trip with a bent polynomial
    LensModel lens{90.0, 480.0, {0.0, 0.9, -2.1, 1.6, 0.0, -0.8, 0.0, 0.4}};
    Rng rng(5);
    double worst = 0.0;
    for (int i = 0; i < 500; ++i) {
      const double rho = rng.uniform(0.0, 0.98);
      const double back = lens.rho_of_zenith(lens.zenith_of_rho(rho));
      worst = std::max(worst, std::abs(back - rho) * lens.image_radius_px);
    }
    r.check("lens: round-trip within 0.5 px over 500 points", worst < 0.5,
            "worst " + format_double(worst) + " px");
  }
  {  // gradient checks in 64-bit mode
    Rng rng(11);
    nn::Dense<double> dense(7, 5, "d", rng);
    nn::Tensor<double> x = nn::Tensor<double>::zeros({7});
    nn::Tensor<double> target = nn::Tensor<double>::zeros({5});
    for (auto& v : x.data) v = rng.normal();
    for (auto& v : target.data) v = rng.normal();
    auto loss_d = [&](bool with_grad) {
      if (with_grad) {
        dense.weight.zero_grad();
        dense.bias.zero_grad();
      }
      const auto y = dense.forward(x);
      const double l = nn::mae_loss(y, target);
      if (with_grad)
        dense.backward(nn::mae_loss_grad(y, target));
      else
        dense.clear_cache();
      return l;
    };
    const double e1 =
        max_grad_rel_error({&dense.weight, &dense.bias}, loss_d);

    nn::Lstm<double> lstm(4, 6, false, "l", rng);
    nn::Tensor<double> seq = nn::Tensor<double>::zeros({5, 4});
    nn::Tensor<double> target2 = nn::Tensor<double>::zeros({6});
    for (auto& v : seq.data) v = rng.normal();
    for (auto& v : target2.data) v = rng.normal();
    auto loss_l = [&](bool with_grad) {
      if (with_grad) {
        lstm.wx.zero_grad();
        lstm.wh.zero_grad();
        lstm.b.zero_grad();
      }
      const auto y = lstm.forward(seq);
      const double l = nn::mae_loss(y, target2);
      if (with_grad)
        lstm.backward(nn::mae_loss_grad(y, target2));
      else
        lstm.clear_cache();
      return l;
    };
    const double e2 =
        max_grad_rel_error({&lstm.wx, &lstm.wh, &lstm.b}, loss_l);
    r.check("nn: finite-difference gradients (dense, lstm) < 1e-4",
            e1 < 1e-4 && e2 < 1e-4,
            "dense " + format_double(e1) + ", lstm " + format_double(e2));
  }
  {  // flow: translation recovery on a generated scene
    const Scene scene =
        generate(small_scene(0.45, {2.0, 1.0}, 2000.0, 77, 2, 100));
    const SkyGrid grid{100, 90.0};
    const SkyImage f0 =
        from_raw8(scene.frames.cam1[0], grid, 0, "cam1");
    const SkyImage f1 =
        from_raw8(scene.frames.cam1[1], grid, 10, "cam1");
    const FlowField flow = dense_flow(f0, f1, cfg_.flow);
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
    const double eu = std::abs(su / n - 2.0), ev = std::abs(sv / n - 1.0);
    r.check("flow: (2,1) px translation recovered within 0.5 px",
            n > 0 && eu < 0.5 && ev < 0.5,
            "err (" + format_double(eu) + ", " + format_double(ev) + ")");
  }
  {  // segmentation accuracy against generator truth
    const Scene scene =
        generate(small_scene(0.5, {0.0, 0.0}, 2000.0, 31, 2, 100));
    const SkyGrid grid{100, 90.0};
    const SkyImage im = from_raw8(scene.frames.cam1[0], grid, 0, "cam1");
    const SegmentationMap seg = segment(im, cfg_.segmentation);
    std::int64_t agree = 0, total = 0;
    for (int y = 0; y < 100; ++y)
      for (int x = 0; x < 100; ++x) {
        if (!im.is_valid(x, y)) continue;
        const bool truth_cloud =
            scene.truth.cloud_mask_cam1[0][static_cast<std::size_t>(y * 100 + x)];
        agree += (seg.at(x, y) == PixelClass::Cloud) == truth_cloud;
        ++total;
      }
    const double acc = static_cast<double>(agree) / total;
    r.check("segmentation: >= 95% pixel accuracy on a generated scene",
            acc >= 0.95, "accuracy " + format_double(acc));
  }
  {  // stereo CBH on a planar layer
    const Scene scene =
        generate(small_scene(0.45, {1.5, 0.5}, 2000.0, 13, 2, 100));
    const SkyGrid grid{100, 90.0};
    const SkyImage im1 = from_raw8(scene.frames.cam1[0], grid, 0, "cam1");
    const SkyImage im2 = from_raw8(scene.frames.cam2[0], grid, 0, "cam2");
    const SegmentationMap seg1 = segment(im1, cfg_.segmentation);
    const StereoRig rig{{59.9724, 11.0524}, {59.9724, 11.0724}, 1120.0};
    const CbhMap map = match_height(im1, im2, seg1, cfg_.cbh, rig);
    const auto median = map.median_cbh_m();
    const double err =
        median ? std::abs(*median - 2000.0) / 2000.0 : 1.0;
    r.check("stereo: 2000 m layer median within 10%", median && err < 0.10,
            median ? "median " + format_double(*median) + " m" : "no estimate");
  }
  {  // persistence skill against itself is exactly zero
    std::array<double, kHorizonSteps> future;
    future.fill(600.0);
    const ForecastRecord p = smart_persistence(400.0, 800.0, future, 0);
    const auto ss = skill_score(100.0, 100.0);
    r.check("persistence: k * future clear-sky and SS(self) == 0",
            std::abs(p.ghi_wm2[0] - 300.0) < 1e-12 && ss && *ss == 0.0);
  }
  {  // determinism: identical seeds give identical weights
    std::vector<FeatureSeriesRow> rows(150);
    IrradianceSeries ghi;
    Rng rng(3);
    const UtcTime t0 = utc_from_civil(2024, 6, 1, 11, 0, 0);
    for (int i = 0; i < 150; ++i) {
      rows[static_cast<std::size_t>(i)].timestamp = t0 + i * 10;
      rows[static_cast<std::size_t>(i)].cs_cam1 = rng.uniform();
      rows[static_cast<std::size_t>(i)].ghi_clear_wm2 = 800.0;
      ghi.samples.push_back({t0 + i * 10, 500.0 + 100.0 * rng.uniform()});
    }
    WindowingInputs in;
    in.rows = rows;
    in.ghi = ghi;
    in.site = cfg_.rig.location_cam1;
    in.g0 = cfg_.clear_sky.solar_constant_g0;
    const auto windows = make_windows(in);

    auto run = [&]() {
      ArchitectureSpec spec = ArchitectureSpec::for_method('C');
      ForecastModel<float> model(spec, 123);
      SeriesProvider provider(&rows, FeatureScaling{});
      TrainConfig tc;
      tc.batch_size = 16;
      tc.max_epochs = 2;
      tc.patience = 1;
      tc.seed = 9;
      train(model, provider, windows, windows, tc);
      std::string blob;
      for (auto* p : model.params())
        blob.append(reinterpret_cast<const char*>(p->value.data.data()),
                    p->value.data.size() * sizeof(float));
      return blob;
    };
    r.check("train: bit-identical weights for identical seeds", run() == run(),
            std::to_string(windows.size()) + " windows");
  }

  out << (r.failures == 0 ? "selftest passed" : "selftest FAILED") << " ("
      << r.failures << " failures)\n";
  return r.failures;
}

}  // namespace skynow
