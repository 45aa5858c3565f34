#pragma once

#include <string>
#include <vector>

#include "skynow/features.hpp"
#include "skynow/lens.hpp"
#include "skynow/metrics.hpp"
#include "skynow/model.hpp"
#include "skynow/nn.hpp"

namespace skynow {

// All text outputs are written with fixed "%.10g" float formatting so that
// re-runs are byte-identical.

std::string format_double(double v);
std::vector<std::string> split_csv_line(const std::string& line);
std::vector<std::vector<std::string>> read_csv(const std::string& path,
                                               const std::string& expect_header);

// irradiance series: header "timestamp,ghi_wm2"
void write_ghi_csv(const std::string& path, const IrradianceSeries& series);
IrradianceSeries read_ghi_csv(const std::string& path);

// lens deviation table: header "radius_norm,angle_deg"
void write_lens_table_csv(const std::string& path,
                          const std::vector<LensTableRow>& rows);
std::vector<LensTableRow> read_lens_table_csv(const std::string& path);

// feature table: header exactly the FeatureSeriesRow field names
extern const char* kFeatureCsvHeader;
void write_features_csv(const std::string& path,
                        const std::vector<FeatureSeriesRow>& rows);
std::vector<FeatureSeriesRow> read_features_csv(const std::string& path);

// filtered CMV series, both cameras per row
struct CmvCsvRow {
  UtcTime timestamp = 0;
  double u1 = 0, v1 = 0, u2 = 0, v2 = 0;
  bool locf = false;
  bool empty1 = false, empty2 = false;
};
void write_cmv_csv(const std::string& path, const std::vector<CmvCsvRow>& rows);
std::vector<CmvCsvRow> read_cmv_csv(const std::string& path);

// multi-horizon forecasts: "timestamp,method,h10,...,h900"
void write_forecasts_csv(const std::string& path,
                         const std::vector<ForecastRecord>& records);
std::vector<ForecastRecord> read_forecasts_csv(const std::string& path);

// metric table: "day,horizon_s,rmse,mae,ss,model"; empty ss field = undefined
void write_metrics_csv(const std::string& path, const MetricTable& table);

// permutation importance: one row per feature x bucket
void write_pi_csv(const std::string& path, const std::vector<PiCell>& cells);

/// Tensor container: one-line JSON header {"version","dtype","shape"} + '\n'
/// + little-endian f32 payload.
void write_tensor(const std::string& path, const nn::TensorF32& t);
nn::TensorF32 read_tensor(const std::string& path);

/// Weights container: one-line JSON header (format version + ordered
/// parameter names/shapes) + '\n' + concatenated little-endian f32 payloads.
struct NamedTensor {
  std::string name;
  nn::TensorF32 tensor;
};
void write_weights(const std::string& path,
                   const std::vector<NamedTensor>& params);
std::vector<NamedTensor> read_weights(const std::string& path);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace skynow
