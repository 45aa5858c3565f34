#include "skynow/pipeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <list>
#include <map>
#include <mutex>
#include <sstream>
#include <unordered_map>

#include "skynow/io.hpp"
#include "skynow/metrics.hpp"
#include "skynow/svg.hpp"
#include "skynow/synth.hpp"

namespace skynow {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void ensure_dir(const std::string& path) {
  std::error_code ec;
  fs::create_directories(path, ec);
  if (ec) throw DataError("cannot create directory: " + path);
}

std::vector<NamedTensor> snapshot_weights(ForecastModel<float>& model) {
  std::vector<NamedTensor> out;
  for (auto* p : model.params()) out.push_back({p->name, p->value});
  return out;
}

void restore_weights(ForecastModel<float>& model,
                     const std::vector<NamedTensor>& weights) {
  auto params = model.params();
  if (params.size() != weights.size())
    throw DataError("weights file does not match the architecture");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i]->name != weights[i].name ||
        params[i]->value.shape != weights[i].tensor.shape)
      throw DataError("weights mismatch at parameter " + weights[i].name);
    params[i]->value = weights[i].tensor;
  }
}

// mild 7th-order lens deviation baked into synthetic renders (degrees)
const std::vector<double> kSynthDeviation = {0.0, 0.9, -2.1, 1.6,
                                             0.0, -0.8, 0.0, 0.4};

}  // namespace

Pipeline::Pipeline(std::string run_dir, RunConfig config, int threads)
    : dir_(std::move(run_dir)), cfg_(std::move(config)),
      threads_(std::max(1, threads)) {
  ensure_dir(dir_);
}

std::string Pipeline::raw_dir(int cam) const {
  return dir_ + "/raw/cam" + std::to_string(cam);
}
std::string Pipeline::sky_dir(int cam) const {
  return dir_ + "/sky/cam" + std::to_string(cam);
}
std::string Pipeline::seg_dir(int cam) const {
  return dir_ + "/seg/cam" + std::to_string(cam);
}
std::string Pipeline::flow_dir(int cam) const {
  return dir_ + "/flow/cam" + std::to_string(cam);
}
std::string Pipeline::cbh_dir() const { return dir_ + "/cbh"; }

std::vector<std::pair<std::string, std::vector<UtcTime>>>
Pipeline::frames_by_day() const {
  const std::string dir = raw_dir(1);
  if (!fs::exists(dir)) throw DataError("no raw frames under " + dir);
  std::vector<UtcTime> stamps;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() != ".png") continue;
    stamps.push_back(parse_iso8601(entry.path().stem().string()));
  }
  std::sort(stamps.begin(), stamps.end());
  std::vector<std::pair<std::string, std::vector<UtcTime>>> days;
  for (UtcTime ts : stamps) {
    const std::string date = format_date(ts);
    if (days.empty() || days.back().first != date) days.push_back({date, {}});
    days.back().second.push_back(ts);
  }
  return days;
}

LensModel Pipeline::lens_with_calibration(int cam, const Calibration& c) const {
  LensModel lens = cam == 1 ? cfg_.lens1 : cfg_.lens2;
  lens.deviation_poly = cam == 1 ? c.deviation_poly1 : c.deviation_poly2;
  return lens;
}

SkyImage Pipeline::load_sky(int cam, UtcTime ts) const {
  const std::string path =
      sky_dir(cam) + "/" + format_iso8601(ts) + ".png";
  const RawImage raw = read_png_rgb8(path);
  const SkyGrid grid{cfg_.sky_size, (cam == 1 ? cfg_.lens1 : cfg_.lens2).theta_fov_deg};
  return from_raw8(raw, grid, ts, "cam" + std::to_string(cam));
}

Calibration Pipeline::load_calibration() const {
  std::ifstream in(calibration_path());
  if (!in)
    throw DataError("calibration.json missing; run `calibrate` first");
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw DataError("malformed calibration.json");
  Calibration c;
  c.cam1.azimuth_correction_deg = j.at("cam1").at("azimuth_correction_deg");
  c.cam2.azimuth_correction_deg = j.at("cam2").at("azimuth_correction_deg");
  c.deviation_poly1 =
      j.at("cam1").at("deviation_poly").get<std::vector<double>>();
  c.deviation_poly2 =
      j.at("cam2").at("deviation_poly").get<std::vector<double>>();
  return c;
}

void Pipeline::cmd_synth() {
  LensModel lens1 = cfg_.lens1;
  LensModel lens2 = cfg_.lens2;
  const double r = cfg_.synth_image_size * 0.5;
  lens1.image_radius_px = r;
  lens2.image_radius_px = r;
  if (cfg_.synth_lens_deviation) {
    lens1.deviation_poly = kSynthDeviation;
    lens2.deviation_poly = kSynthDeviation;
  }

  const auto roster = benchmark_roster(
      cfg_.synth_seed, cfg_.synth_days, cfg_.synth_frames_per_day,
      cfg_.synth_image_size, cfg_.rig, lens1, lens2,
      cfg_.synth_azimuth_correction1, cfg_.synth_azimuth_correction2);

  ensure_dir(raw_dir(1));
  ensure_dir(raw_dir(2));
  ensure_dir(dir_ + "/truth");
  ensure_dir(dir_ + "/lens");

  // chronological split: train, then val, then test
  const int n = static_cast<int>(roster.size());
  const int n_test = std::max(1, n * 15 / 100);
  const int n_val = std::max(1, n * 15 / 100);
  const int n_train = std::max(1, n - n_test - n_val);

  DatasetManifest manifest;
  IrradianceSeries ghi;
  json truths = json::array();

  std::mutex mu;
  std::vector<Scene> scenes(roster.size());
  parallel_for(threads_, n, [&](std::int64_t i) {
    scenes[static_cast<std::size_t>(i)] =
        generate(roster[static_cast<std::size_t>(i)].spec, cfg_.clear_sky);
  });

  for (int i = 0; i < n; ++i) {
    const BenchmarkDay& day = roster[static_cast<std::size_t>(i)];
    const Scene& scene = scenes[static_cast<std::size_t>(i)];

    for (std::size_t t = 0; t < scene.truth.timestamps.size(); ++t) {
      const std::string stamp = format_iso8601(scene.truth.timestamps[t]);
      write_png_rgb8(raw_dir(1) + "/" + stamp + ".png", scene.frames.cam1[t]);
      write_png_rgb8(raw_dir(2) + "/" + stamp + ".png", scene.frames.cam2[t]);
      ghi.samples.push_back(
          {scene.truth.timestamps[t], scene.truth.ghi_wm2[t]});
    }

    ManifestDay md;
    md.date = day.date;
    md.split = i < n_train ? Split::Train
                           : (i < n_train + n_val ? Split::Val : Split::Test);
    md.frames = static_cast<int>(scene.truth.timestamps.size());
    md.regime = day.regime == SceneRegime::Clear
                    ? "clear"
                    : (day.regime == SceneRegime::Overcast ? "overcast"
                                                           : "broken");
    manifest.days.push_back(md);

    truths.push_back({{"date", day.date},
                      {"regime", md.regime},
                      {"cbh_m", scene.truth.cbh_m},
                      {"wind_u_px", scene.truth.flow_px_per_frame.x},
                      {"wind_v_px", scene.truth.flow_px_per_frame.y},
                      {"threshold", scene.truth.threshold}});
  }

  std::sort(ghi.samples.begin(), ghi.samples.end(),
            [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
  write_ghi_csv(ghi_path(), ghi);
  manifest.save(manifest_path());

  // manufacturer-style deviation tables for the calibrate stage
  std::vector<LensTableRow> table;
  for (int k = 1; k <= 20; ++k) {
    const double rho = k / 20.0;
    table.push_back({rho, lens1.zenith_of_rho(rho)});
  }
  write_lens_table_csv(dir_ + "/lens/lens_cam1.csv", table);
  write_lens_table_csv(dir_ + "/lens/lens_cam2.csv", table);

  std::ofstream out(dir_ + "/truth/scenes.json", std::ios::binary);
  out << truths.dump(2) << "\n";
}

void Pipeline::cmd_calibrate() {
  Calibration calib;

  for (int cam = 1; cam <= 2; ++cam) {
    const std::string table_path =
        dir_ + "/lens/lens_cam" + std::to_string(cam) + ".csv";
    std::vector<double>& poly =
        cam == 1 ? calib.deviation_poly1 : calib.deviation_poly2;
    double& mae = cam == 1 ? calib.fit_mae_fraction1 : calib.fit_mae_fraction2;
    if (fs::exists(table_path)) {
      const auto table = read_lens_table_csv(table_path);
      const auto fit = fit_deviation_poly(
          table, (cam == 1 ? cfg_.lens1 : cfg_.lens2).theta_fov_deg);
      poly = fit.coefficients;
      mae = fit.mae_fraction_of_fov;
    }
  }

  const auto days = frames_by_day();
  for (int cam = 1; cam <= 2; ++cam) {
    std::vector<UtcTime> stamps;
    for (const auto& [date, day_stamps] : days)
      stamps.insert(stamps.end(), day_stamps.begin(), day_stamps.end());
    // cap the scan; sun tracks need spread, not density
    const std::size_t stride = std::max<std::size_t>(1, stamps.size() / 240);
    std::vector<SunObservation> obs;
    for (std::size_t i = 0; i < stamps.size(); i += stride) {
      const std::string path = raw_dir(cam) + "/" +
                               format_iso8601(stamps[i]) + ".png";
      if (!fs::exists(path)) continue;
      const RawImage raw = read_png_rgb8(path);
      const auto sun = detect_sun(raw);
      if (!sun) continue;
      SunObservation o;
      o.pixel = *sun;
      o.image_center_x = (raw.width - 1) * 0.5;
      o.image_center_y = (raw.height - 1) * 0.5;
      o.ephemeris_azimuth_deg =
          solar_position(stamps[i], cfg_.rig.location_cam1).azimuth_deg;
      obs.push_back(o);
    }
    (cam == 1 ? calib.cam1 : calib.cam2) = calibrate_azimuth(obs);
  }

  json j;
  for (int cam = 1; cam <= 2; ++cam) {
    const CameraCalibration& cc = cam == 1 ? calib.cam1 : calib.cam2;
    j["cam" + std::to_string(cam)] = {
        {"azimuth_correction_deg", cc.azimuth_correction_deg},
        {"residual_spread_deg", cc.residual_spread_deg},
        {"residual_warning", cc.residual_warning},
        {"deviation_poly",
         cam == 1 ? calib.deviation_poly1 : calib.deviation_poly2},
        {"fit_mae_fraction",
         cam == 1 ? calib.fit_mae_fraction1 : calib.fit_mae_fraction2}};
  }
  std::ofstream out(calibration_path(), std::ios::binary);
  if (!out) throw DataError("cannot write calibration.json");
  out << j.dump(2) << "\n";
}

void Pipeline::cmd_preprocess() {
  const Calibration calib = load_calibration();
  const auto days = frames_by_day();
  ensure_dir(sky_dir(1));
  ensure_dir(sky_dir(2));

  std::vector<UtcTime> stamps;
  for (const auto& [date, day_stamps] : days)
    stamps.insert(stamps.end(), day_stamps.begin(), day_stamps.end());

  for (int cam = 1; cam <= 2; ++cam) {
    LensModel lens = lens_with_calibration(cam, calib);
    const CameraCalibration& cc = cam == 1 ? calib.cam1 : calib.cam2;
    parallel_for(threads_, static_cast<std::int64_t>(stamps.size()),
                 [&](std::int64_t i) {
      const std::string stamp = format_iso8601(stamps[static_cast<std::size_t>(i)]);
      const std::string in_path = raw_dir(cam) + "/" + stamp + ".png";
      if (!fs::exists(in_path)) return;
      RawImage raw = read_png_rgb8(in_path);
      LensModel frame_lens = lens;
      frame_lens.image_radius_px = (raw.width - 1) * 0.5;
      const SkyGrid full{raw.width, frame_lens.theta_fov_deg};
      SkyImage und = undistort(raw, frame_lens, cc, full,
                               stamps[static_cast<std::size_t>(i)],
                               "cam" + std::to_string(cam));
      const SkyImage sky = downsample(und, cfg_.sky_size);
      write_png_rgb8(sky_dir(cam) + "/" + stamp + ".png", to_raw8(sky));
    });
  }
}

void Pipeline::cmd_segment() {
  const auto days = frames_by_day();
  ensure_dir(seg_dir(1));
  ensure_dir(seg_dir(2));
  std::vector<UtcTime> stamps;
  for (const auto& [date, day_stamps] : days)
    stamps.insert(stamps.end(), day_stamps.begin(), day_stamps.end());

  for (int cam = 1; cam <= 2; ++cam) {
    parallel_for(threads_, static_cast<std::int64_t>(stamps.size()),
                 [&](std::int64_t i) {
      const UtcTime ts = stamps[static_cast<std::size_t>(i)];
      const SkyImage sky = load_sky(cam, ts);
      const SegmentationMap seg = segment(sky, cfg_.segmentation);
      write_segmentation_png(
          seg_dir(cam) + "/" + format_iso8601(ts) + ".png", seg);
    });
  }
}

void Pipeline::cmd_flow() {
  const auto days = frames_by_day();
  ensure_dir(flow_dir(1));
  ensure_dir(flow_dir(2));

  std::vector<CmvCsvRow> all_rows;
  for (const auto& [date, stamps] : days) {
    if (stamps.size() < 2) continue;

    std::vector<std::vector<CmvSample>> cmv(2);
    for (int cam = 1; cam <= 2; ++cam) {
      cmv[cam - 1].resize(stamps.size() - 1);
      parallel_for(threads_, static_cast<std::int64_t>(stamps.size()) - 1,
                   [&, cam](std::int64_t k) {
        const UtcTime prev_ts = stamps[static_cast<std::size_t>(k)];
        const UtcTime ts = stamps[static_cast<std::size_t>(k) + 1];
        const SkyImage prev = load_sky(cam, prev_ts);
        const SkyImage next = load_sky(cam, ts);
        const FlowField field = dense_flow(prev, next, cfg_.flow);

        nn::TensorF32 t = nn::TensorF32::zeros({2, field.size, field.size});
        std::copy(field.u.begin(), field.u.end(), t.data.begin());
        std::copy(field.v.begin(), field.v.end(),
                  t.data.begin() + field.u.size());
        write_tensor(flow_dir(cam) + "/" + format_iso8601(ts) + ".tensor", t);

        const SegmentationMap seg = read_segmentation_png(
            seg_dir(cam) + "/" + format_iso8601(ts) + ".png");
        cmv[cam - 1][static_cast<std::size_t>(k)] =
            aggregate_cmv(field, seg, "cam" + std::to_string(cam), ts);
      });
    }

    const auto [f1, f2] =
        cross_camera_filter(cmv[0], cmv[1], cfg_.cmv_inconsistency_px);
    for (std::size_t k = 0; k < f1.size(); ++k) {
      CmvCsvRow row;
      row.timestamp = f1[k].timestamp;
      row.u1 = f1[k].mean_u;
      row.v1 = f1[k].mean_v;
      row.u2 = f2[k].mean_u;
      row.v2 = f2[k].mean_v;
      row.locf = f1[k].filled_by_locf;
      row.empty1 = f1[k].empty_mask;
      row.empty2 = f2[k].empty_mask;
      all_rows.push_back(row);
    }
  }
  write_cmv_csv(cmv_path(), all_rows);
}

void Pipeline::cmd_cbh() {
  const auto days = frames_by_day();
  ensure_dir(cbh_dir());

  // the reprojection table only depends on grid/search/rig; share it
  const SkyGrid grid{cfg_.sky_size, cfg_.lens1.theta_fov_deg};
  const CbhGeometry geometry =
      CbhGeometry::build(grid, cfg_.cbh, cfg_.rig, threads_);

  parallel_for(threads_, static_cast<std::int64_t>(days.size()),
               [&](std::int64_t d) {
    const auto& stamps = days[static_cast<std::size_t>(d)].second;
    CbhMap prev;
    bool have_prev = false;
    for (const UtcTime ts : stamps) {
      const SkyImage im1 = load_sky(1, ts);
      const SkyImage im2 = load_sky(2, ts);
      const SegmentationMap seg1 = read_segmentation_png(
          seg_dir(1) + "/" + format_iso8601(ts) + ".png");
      CbhMap map =
          match_height(im1, im2, seg1, cfg_.cbh, cfg_.rig, 1, &geometry);
      map = temporal_fill(map, have_prev ? &prev : nullptr, seg1);
      write_cbh_png(cbh_dir() + "/" + format_iso8601(ts) + ".png", map);
      prev = std::move(map);
      have_prev = true;
    }
  });
}

void Pipeline::cmd_features() {
  const auto days = frames_by_day();
  std::map<UtcTime, CmvCsvRow> cmv_at;
  for (const auto& row : read_cmv_csv(cmv_path())) cmv_at[row.timestamp] = row;

  std::vector<FeatureSeriesRow> rows;
  for (const auto& [date, stamps] : days) {
    for (const UtcTime ts : stamps) {
      const auto cmv_it = cmv_at.find(ts);
      if (cmv_it == cmv_at.end()) continue;  // first frame of a day: no flow

      FeatureSeriesRow r;
      r.timestamp = ts;
      const SegmentationMap seg1 = read_segmentation_png(
          seg_dir(1) + "/" + format_iso8601(ts) + ".png");
      const SegmentationMap seg2 = read_segmentation_png(
          seg_dir(2) + "/" + format_iso8601(ts) + ".png");
      r.cs_cam1 = seg1.cloud_fraction;
      r.cs_cam2 = seg2.cloud_fraction;
      r.cmv_u1 = cmv_it->second.u1;
      r.cmv_v1 = cmv_it->second.v1;
      r.cmv_u2 = cmv_it->second.u2;
      r.cmv_v2 = cmv_it->second.v2;
      const CbhMap cbh = read_cbh_png(cbh_dir() + "/" + format_iso8601(ts) + ".png");
      r.median_cbh_m = cbh.median_cbh_m().value_or(0.0);  // 0 = undefined
      const SolarGeometry sun = solar_position(ts, cfg_.rig.location_cam1);
      r.zenith_deg = sun.zenith_deg;
      r.azimuth_deg = sun.azimuth_deg;
      r.ghi_clear_wm2 = clear_sky_ghi(sun, cfg_.clear_sky);
      rows.push_back(r);
    }
  }
  write_features_csv(features_path(), rows);
}

namespace {

// Provider that streams Method A inputs from the preprocessed sky PNGs.
class SkyFrameProvider : public InputProvider {
 public:
  SkyFrameProvider(const Pipeline& pipe, const std::string& sky_dir1,
                   const std::vector<FeatureSeriesRow>* rows, SkyGrid grid)
      : pipe_(pipe), dir_(sky_dir1), rows_(rows), grid_(grid) {}

  nn::TensorF32 lookback(const SampleWindow& w) const override {
    std::vector<SkyImage> frames;
    frames.reserve(kLookbackSteps);
    for (int t = 0; t < kLookbackSteps; ++t) {
      const UtcTime ts =
          (*rows_)[static_cast<std::size_t>(w.lookback_start + t)].timestamp;
      frames.push_back(cached(ts));
    }
    return build_method_a_input(frames);
  }

 private:
  const SkyImage& cached(UtcTime ts) const {
    auto it = cache_.find(ts);
    if (it != cache_.end()) return it->second;
    if (cache_.size() > 600) cache_.clear();  // windows overlap day-locally
    const RawImage raw =
        read_png_rgb8(dir_ + "/" + format_iso8601(ts) + ".png");
    return cache_.emplace(ts, from_raw8(raw, grid_, ts, "cam1")).first->second;
  }

  const Pipeline& pipe_;
  std::string dir_;
  const std::vector<FeatureSeriesRow>* rows_;
  SkyGrid grid_;
  mutable std::unordered_map<UtcTime, SkyImage> cache_;
};

// Provider assembling Method B feature-map stacks from the stage outputs.
class FeatureMapProvider : public InputProvider {
 public:
  FeatureMapProvider(const RunConfig& cfg, const std::string& run_dir,
                     const std::vector<FeatureSeriesRow>* rows)
      : cfg_(cfg), dir_(run_dir), rows_(rows),
        grid_{cfg.sky_size, cfg.lens1.theta_fov_deg} {}

  nn::TensorF32 lookback(const SampleWindow& w) const override {
    std::vector<FeatureFrame> frames;
    frames.reserve(kLookbackSteps);
    for (int t = 0; t < kLookbackSteps; ++t) {
      const UtcTime ts =
          (*rows_)[static_cast<std::size_t>(w.lookback_start + t)].timestamp;
      frames.push_back(load_frame(ts));
    }
    FeatureScaling scaling;
    scaling.g0 = cfg_.clear_sky.solar_constant_g0;
    scaling.cbh_max_m = cfg_.cbh.max_height_m;
    return build_method_b_input(frames, scaling);
  }

 private:
  FeatureFrame load_frame(UtcTime ts) const {
    const std::string stamp = format_iso8601(ts);
    FeatureFrame f;
    f.timestamp = ts;
    f.seg1 = read_segmentation_png(dir_ + "/seg/cam1/" + stamp + ".png");
    f.seg2 = read_segmentation_png(dir_ + "/seg/cam2/" + stamp + ".png");
    for (int cam = 1; cam <= 2; ++cam) {
      const nn::TensorF32 t = read_tensor(dir_ + "/flow/cam" +
                                          std::to_string(cam) + "/" + stamp +
                                          ".tensor");
      FlowField& field = cam == 1 ? f.flow1 : f.flow2;
      field.size = t.dim(1);
      const std::size_t n = static_cast<std::size_t>(field.size) * field.size;
      field.u.assign(t.data.begin(), t.data.begin() + n);
      field.v.assign(t.data.begin() + n, t.data.end());
    }
    f.cbh1 = read_cbh_png(dir_ + "/cbh/" + stamp + ".png");
    const SolarGeometry sun = solar_position(ts, cfg_.rig.location_cam1);
    f.sunpos1 = solar_position_map(grid_, sun);
    f.sunpos2 = f.sunpos1;  // 1 km camera spacing is angularly negligible
    return f;
  }

  const RunConfig& cfg_;
  std::string dir_;
  const std::vector<FeatureSeriesRow>* rows_;
  SkyGrid grid_;
};

struct LoadedDataset {
  std::vector<FeatureSeriesRow> rows;
  IrradianceSeries ghi;
  SplitWindows splits;
  FeatureScaling scaling;
};

LoadedDataset load_dataset(const Pipeline& pipe, const RunConfig& cfg) {
  LoadedDataset d;
  d.rows = read_features_csv(pipe.features_path());
  d.ghi = read_ghi_csv(pipe.ghi_path());
  const DatasetManifest manifest = DatasetManifest::load(pipe.manifest_path());

  WindowingInputs in;
  in.rows = d.rows;
  in.ghi = d.ghi;
  in.site = cfg.rig.location_cam1;
  in.g0 = cfg.clear_sky.solar_constant_g0;
  in.min_elevation_deg = cfg.min_elevation_deg;
  const auto windows = make_windows(in);
  d.splits = chronological_split(windows, manifest.split_map());

  d.scaling.g0 = cfg.clear_sky.solar_constant_g0;
  d.scaling.cbh_max_m = cfg.cbh.max_height_m;
  d.scaling.eleventh_channel = cfg.eleventh_channel;
  return d;
}

std::unique_ptr<InputProvider> make_provider(const Pipeline& pipe,
                                             const RunConfig& cfg, char method,
                                             const LoadedDataset& data) {
  if (method == 'C')
    return std::make_unique<SeriesProvider>(&data.rows, data.scaling);
  if (method == 'A')
    return std::make_unique<SkyFrameProvider>(
        pipe, pipe.run_dir() + "/sky/cam1", &data.rows,
        SkyGrid{cfg.sky_size, cfg.lens1.theta_fov_deg});
  return std::make_unique<FeatureMapProvider>(cfg, pipe.run_dir(), &data.rows);
}

ArchitectureSpec arch_for(const RunConfig& cfg, char method) {
  ArchitectureSpec spec = ArchitectureSpec::for_method(method);
  spec.input_size = cfg.sky_size;
  if (method == 'C' && cfg.eleventh_channel) spec.input_channels += 1;
  return spec;
}

}  // namespace

void Pipeline::cmd_train(char method) {
  const LoadedDataset data = load_dataset(*this, cfg_);
  if (data.splits.train.empty())
    throw DataError("no training windows; check the manifest split");

  const ArchitectureSpec spec = arch_for(cfg_, method);
  ForecastModel<float> model(spec, cfg_.train_seed);

  TrainConfig tc;
  tc.batch_size =
      cfg_.batch_size_override > 0 ? cfg_.batch_size_override : spec.batch_size;
  tc.learning_rate = cfg_.lr_override > 0 ? cfg_.lr_override : spec.learning_rate;
  tc.max_epochs = cfg_.max_epochs;
  tc.patience = cfg_.patience;
  tc.seed = cfg_.train_seed;

  const auto provider = make_provider(*this, cfg_, method, data);
  const TrainHistory hist =
      train(model, *provider, data.splits.train, data.splits.val, tc);

  ensure_dir(dir_ + "/models");
  write_weights(weights_path(method), snapshot_weights(model));

  std::ostringstream hist_csv;
  hist_csv << "epoch,train_mae,val_mae\n";
  for (std::size_t e = 0; e < hist.train_mae.size(); ++e)
    hist_csv << e << "," << format_double(hist.train_mae[e]) << ","
             << format_double(hist.val_mae[e]) << "\n";
  write_text_file(dir_ + "/models/method_" + std::string(1, method) +
                      "_history.csv",
                  hist_csv.str());
  write_text_file(
      dir_ + "/models/method_" + std::string(1, method) + "_summary.txt",
      model_summary(model.layer_infos(), spec, model.param_count()));
}

void Pipeline::cmd_predict(char method) {
  const LoadedDataset data = load_dataset(*this, cfg_);
  const ArchitectureSpec spec = arch_for(cfg_, method);
  ForecastModel<float> model(spec, cfg_.train_seed);
  restore_weights(model, read_weights(weights_path(method)));

  const auto provider = make_provider(*this, cfg_, method, data);
  std::vector<ForecastRecord> records;
  for (const auto& w : data.splits.test)
    records.push_back(
        predict(model, *provider, w, cfg_.clear_sky.solar_constant_g0));

  ensure_dir(dir_ + "/forecasts");
  write_forecasts_csv(forecasts_path(method), records);
}

void Pipeline::cmd_evaluate() {
  const IrradianceSeries truth = read_ghi_csv(ghi_path());
  std::map<UtcTime, double> truth_at;
  for (const auto& s : truth.samples) truth_at[s.timestamp] = s.ghi_wm2;

  std::vector<std::pair<std::string, std::vector<ForecastRecord>>> models;
  for (char m : {'A', 'B', 'C'})
    if (fs::exists(forecasts_path(m)))
      models.push_back({std::string(1, m), read_forecasts_csv(forecasts_path(m))});
  if (models.empty())
    throw DataError("no forecast files to evaluate; run `predict` first");

  // persistence reference on the union of issue timestamps
  std::vector<UtcTime> issues;
  for (const auto& [name, records] : models)
    for (const auto& r : records) issues.push_back(r.issue_time);
  std::sort(issues.begin(), issues.end());
  issues.erase(std::unique(issues.begin(), issues.end()), issues.end());

  std::vector<ForecastRecord> persistence;
  for (const UtcTime t : issues) {
    const auto it = truth_at.find(t);
    if (it == truth_at.end()) continue;
    const double ghi_clear_now = clear_sky_ghi(
        solar_position(t, cfg_.rig.location_cam1), cfg_.clear_sky);
    if (ghi_clear_now <= 1.0) continue;
    std::array<double, kHorizonSteps> future;
    for (int h = 0; h < kHorizonSteps; ++h)
      future[static_cast<std::size_t>(h)] = clear_sky_ghi(
          solar_position(t + (h + 1) * kCadenceSeconds, cfg_.rig.location_cam1),
          cfg_.clear_sky);
    persistence.push_back(smart_persistence(it->second, ghi_clear_now, future, t));
  }

  MetricTable table;
  for (const auto& [name, records] : models) {
    const MetricTable part = evaluate(records, truth, persistence, name);
    table.cells.insert(table.cells.end(), part.cells.begin(), part.cells.end());
  }
  const MetricTable self = evaluate(persistence, truth, persistence, "persistence");
  table.cells.insert(table.cells.end(), self.cells.begin(), self.cells.end());

  ensure_dir(dir_ + "/metrics");
  write_metrics_csv(metrics_path(), table);
  ensure_dir(dir_ + "/forecasts");
  write_forecasts_csv(forecasts_persistence_path(), persistence);

  // figures: RMSE vs horizon, one SS heat map per model
  const std::vector<std::string> palette = {"#1f77b4", "#d62728", "#2ca02c",
                                            "#7f7f7f"};
  std::vector<SvgSeries> series;
  std::size_t color = 0;
  auto add_series = [&](const std::string& model_name) {
    SvgSeries s;
    s.label = model_name;
    s.color = palette[color++ % palette.size()];
    for (int h = 1; h <= kHorizonSteps; ++h) {
      const MetricCell* cell =
          table.find("all", h * kCadenceSeconds, model_name);
      if (!cell) continue;
      s.x.push_back(h * kCadenceSeconds);
      s.y.push_back(cell->rmse);
    }
    series.push_back(std::move(s));
  };
  for (const auto& [name, records] : models) add_series(name);
  add_series("persistence");
  write_svg_line_plot(dir_ + "/metrics/rmse_vs_horizon.svg",
                      "RMSE by forecast horizon", "horizon [s]",
                      "RMSE [W/m2]", series);

  std::vector<std::string> heatmap_models;
  for (const auto& [name, records] : models) heatmap_models.push_back(name);
  heatmap_models.push_back("persistence");
  for (const auto& name : heatmap_models) {
    std::vector<std::string> day_labels;
    for (const auto& c : table.cells)
      if (c.model == name && c.day != "all" && c.horizon_s == -1)
        day_labels.push_back(c.day);
    std::sort(day_labels.begin(), day_labels.end());
    std::vector<double> horizons;
    for (int h = 1; h <= kHorizonSteps; ++h)
      horizons.push_back(h * kCadenceSeconds);
    std::vector<std::vector<double>> cells(
        day_labels.size(), std::vector<double>(kHorizonSteps, 0.0));
    for (std::size_t r = 0; r < day_labels.size(); ++r)
      for (int h = 1; h <= kHorizonSteps; ++h) {
        const MetricCell* cell =
            table.find(day_labels[r], h * kCadenceSeconds, name);
        if (cell && cell->ss) cells[r][static_cast<std::size_t>(h - 1)] = *cell->ss;
      }
    write_svg_heatmap(dir_ + "/metrics/ss_heatmap_" + name + ".svg",
                      "Skill score vs persistence, model " + name, day_labels,
                      horizons, "horizon [s]", cells);
  }
}

void Pipeline::cmd_importance() {
  const LoadedDataset data = load_dataset(*this, cfg_);
  if (data.splits.test.empty())
    throw DataError("no test windows for the importance analysis");

  const ArchitectureSpec spec = arch_for(cfg_, 'C');
  auto model = std::make_shared<ForecastModel<float>>(spec, cfg_.train_seed);
  restore_weights(*model, read_weights(weights_path('C')));

  const double g0 = cfg_.clear_sky.solar_constant_g0;
  PredictFn predict_fn = [model, g0](const nn::TensorF32& lookback,
                                     const SampleWindow& w) {
    std::array<float, kLookbackSteps> hist;
    for (int i = 0; i < kLookbackSteps; ++i)
      hist[static_cast<std::size_t>(i)] =
          static_cast<float>(w.ghi_history_norm[i]);
    const nn::TensorF32 pred =
        model->forward(lookback, hist, false, nullptr);
    model->clear_caches();
    std::array<double, kHorizonSteps> out;
    for (int h = 0; h < kHorizonSteps; ++h)
      out[static_cast<std::size_t>(h)] =
          std::max(0.0, static_cast<double>(pred.data[h]) * g0);
    return out;
  };

  std::vector<PiCell> cells;
  for (int f = 0; f < kMethodCChannels; ++f) {
    const auto part = permutation_importance(
        predict_fn, data.rows, data.splits.test, data.scaling, f,
        cfg_.pi_repetitions, Rng::mix(cfg_.pi_seed, static_cast<std::uint64_t>(f)),
        cfg_.pi_bucket_s);
    cells.insert(cells.end(), part.begin(), part.end());
  }

  ensure_dir(dir_ + "/importance");
  write_pi_csv(dir_ + "/importance/pi.csv", cells);

  const std::vector<std::string> palette = {
      "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
      "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  std::vector<SvgSeries> series;
  for (int f = 0; f < kMethodCChannels; ++f) {
    SvgSeries s;
    s.label = kMethodCFeatureNames[static_cast<std::size_t>(f)];
    s.color = palette[static_cast<std::size_t>(f)];
    for (const auto& c : cells)
      if (c.feature_index == f && !(c.bucket_start_s == 0 && c.bucket_end_s == 900)) {
        s.x.push_back(0.5 * (c.bucket_start_s + c.bucket_end_s));
        s.y.push_back(c.delta_mae);
      }
    series.push_back(std::move(s));
  }
  write_svg_line_plot(dir_ + "/importance/pi.svg",
                      "Permutation importance by horizon", "horizon [s]",
                      "delta MAE [W/m2]", series);
}

}  // namespace skynow
