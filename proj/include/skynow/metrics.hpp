#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "skynow/model.hpp"

namespace skynow {

double rmse(const std::vector<double>& pred, const std::vector<double>& truth);
double mae(const std::vector<double>& pred, const std::vector<double>& truth);

/// 1 - rmse_forecast / rmse_reference; nullopt when the reference is zero.
std::optional<double> skill_score(double rmse_forecast, double rmse_reference);

/// Aggregate markers inside MetricCell: day == "all" pools every day,
/// horizon_s == -1 pools every horizon. Aggregates pool samples (they are
/// not means of cell metrics).
struct MetricCell {
  std::string day;
  int horizon_s = 0;
  double rmse = 0.0;
  double mae = 0.0;
  std::optional<double> ss;
  std::string model;
};

struct MetricTable {
  std::vector<MetricCell> cells;

  const MetricCell* find(const std::string& day, int horizon_s,
                         const std::string& model) const;
};

/// Per-(day, horizon) RMSE/MAE/SS of a forecast set against the measured
/// series, with the reference forecasts defining the skill denominator.
/// Horizons without any matched truth sample are dropped.
MetricTable evaluate(const std::vector<ForecastRecord>& forecasts,
                     const IrradianceSeries& truth,
                     const std::vector<ForecastRecord>& reference,
                     const std::string& model_name);

/// A forecaster as far as the importance analysis cares: normalized Method C
/// lookback channels in, 90 GHI values (W/m^2) out.
using PredictFn =
    std::function<std::array<double, kHorizonSteps>(const nn::TensorF32&,
                                                    const SampleWindow&)>;

struct PiCell {
  int feature_index = 0;
  std::string feature;
  int bucket_start_s = 0;  // inclusive
  int bucket_end_s = 0;    // exclusive; [0, 900] marks the all-horizon row
  double delta_mae = 0.0;  // MAE_shuffled - MAE_ref, W/m^2
  double mae_ref = 0.0;
  int repetitions = 0;
};

extern const std::array<std::string, kMethodCChannels> kMethodCFeatureNames;

/// Permutation importance core: evaluates one explicit permutation of one
/// feature across the evaluation set's timestamps. Exposed so oracles can
/// drive degenerate permutations directly.
std::vector<PiCell> permutation_importance_single(
    const PredictFn& predict, const std::vector<FeatureSeriesRow>& rows,
    const std::vector<SampleWindow>& windows, const FeatureScaling& scaling,
    int feature_index, const std::vector<int>& permutation, int bucket_s);

/// Eq.-style PI: shuffles feature values across the whole evaluation set's
/// time axis, repeated `repetitions` times with seeds derived from `seed`,
/// and reports the mean MAE increase per horizon bucket.
std::vector<PiCell> permutation_importance(
    const PredictFn& predict, const std::vector<FeatureSeriesRow>& rows,
    const std::vector<SampleWindow>& windows, const FeatureScaling& scaling,
    int feature_index, int repetitions, std::uint64_t seed, int bucket_s = 100);

/// Pearson correlation; shared plumbing for derived analyses.
double pearson(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace skynow
