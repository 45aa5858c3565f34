#pragma once

#include <iosfwd>
#include <string>

#include "skynow/config.hpp"
#include "skynow/manifest.hpp"

namespace skynow {

struct Calibration {
  CameraCalibration cam1, cam2;
  std::vector<double> deviation_poly1 = std::vector<double>(8, 0.0);
  std::vector<double> deviation_poly2 = std::vector<double>(8, 0.0);
  double fit_mae_fraction1 = 0.0;
  double fit_mae_fraction2 = 0.0;
};

/// Batch pipeline over a run directory:
///   raw/{cam1,cam2}/<ISO8601>.png   input frames
///   truth/ghi.csv                   measured GHI series
///   manifest.json                   day inventory + chronological split
/// Each command reads its stage inputs and writes its stage outputs; all
/// outputs are deterministic given config + inputs + seeds.
class Pipeline {
 public:
  Pipeline(std::string run_dir, RunConfig config, int threads = 1);

  const RunConfig& config() const { return cfg_; }
  const std::string& run_dir() const { return dir_; }

  void cmd_synth();
  void cmd_calibrate();
  void cmd_preprocess();
  void cmd_segment();
  void cmd_flow();
  void cmd_cbh();
  void cmd_features();
  void cmd_train(char method);
  void cmd_predict(char method);
  void cmd_evaluate();
  void cmd_importance();
  /// Runs the built-in oracle suite; returns the number of failed checks.
  int cmd_selftest(std::ostream& out);

  // stage paths (also the on-disk contract; see README)
  std::string manifest_path() const { return dir_ + "/manifest.json"; }
  std::string ghi_path() const { return dir_ + "/truth/ghi.csv"; }
  std::string calibration_path() const { return dir_ + "/calibration.json"; }
  std::string features_path() const { return dir_ + "/features.csv"; }
  std::string cmv_path() const { return dir_ + "/cmv.csv"; }
  std::string weights_path(char method) const {
    return dir_ + "/models/method_" + std::string(1, method) + ".weights";
  }
  std::string forecasts_path(char method) const {
    return dir_ + "/forecasts/method_" + std::string(1, method) + ".csv";
  }
  std::string forecasts_persistence_path() const {
    return dir_ + "/forecasts/persistence.csv";
  }
  std::string metrics_path() const { return dir_ + "/metrics/metrics.csv"; }

  Calibration load_calibration() const;

 private:
  std::string raw_dir(int cam) const;
  std::string sky_dir(int cam) const;
  std::string seg_dir(int cam) const;
  std::string flow_dir(int cam) const;
  std::string cbh_dir() const;

  /// Sorted ISO8601 frame stamps under raw/cam1, grouped by date.
  std::vector<std::pair<std::string, std::vector<UtcTime>>> frames_by_day()
      const;
  LensModel lens_with_calibration(int cam, const Calibration& c) const;
  SkyImage load_sky(int cam, UtcTime ts) const;

  std::string dir_;
  RunConfig cfg_;
  int threads_ = 1;
};

}  // namespace skynow
