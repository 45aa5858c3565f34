#include "skynow/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace skynow {

double rmse(const std::vector<double>& pred, const std::vector<double>& truth) {
  if (pred.size() != truth.size() || pred.empty())
    throw DataError("rmse: size mismatch or empty input");
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - truth[i];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(pred.size()));
}

double mae(const std::vector<double>& pred, const std::vector<double>& truth) {
  if (pred.size() != truth.size() || pred.empty())
    throw DataError("mae: size mismatch or empty input");
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i)
    acc += std::abs(pred[i] - truth[i]);
  return acc / static_cast<double>(pred.size());
}

std::optional<double> skill_score(double rmse_forecast, double rmse_reference) {
  if (rmse_reference <= 0.0) return std::nullopt;
  return 1.0 - rmse_forecast / rmse_reference;
}

const MetricCell* MetricTable::find(const std::string& day, int horizon_s,
                                    const std::string& model) const {
  for (const auto& c : cells)
    if (c.day == day && c.horizon_s == horizon_s && c.model == model) return &c;
  return nullptr;
}

namespace {

struct Accum {
  double sq = 0.0;
  double ab = 0.0;
  std::int64_t n = 0;

  void add(double err) {
    sq += err * err;
    ab += std::abs(err);
    ++n;
  }
  double rmse() const { return n ? std::sqrt(sq / static_cast<double>(n)) : 0.0; }
  double mae() const { return n ? ab / static_cast<double>(n) : 0.0; }
};

using CellKey = std::pair<std::string, int>;  // (day, horizon_s)

void accumulate(const std::vector<ForecastRecord>& records,
                const std::map<UtcTime, double>& truth_at,
                std::map<CellKey, Accum>& cells) {
  for (const auto& rec : records) {
    const std::string day = format_date(rec.issue_time);
    for (int h = 0; h < kHorizonSteps; ++h) {
      const int horizon_s = (h + 1) * kCadenceSeconds;
      const auto it = truth_at.find(rec.issue_time + horizon_s);
      if (it == truth_at.end()) continue;
      const double err = rec.ghi_wm2[static_cast<std::size_t>(h)] - it->second;
      cells[{day, horizon_s}].add(err);
      cells[{day, -1}].add(err);
      cells[{"all", horizon_s}].add(err);
      cells[{"all", -1}].add(err);
    }
  }
}

}  // namespace

MetricTable evaluate(const std::vector<ForecastRecord>& forecasts,
                     const IrradianceSeries& truth,
                     const std::vector<ForecastRecord>& reference,
                     const std::string& model_name) {
  truth.validate();
  std::map<UtcTime, double> truth_at;
  for (const auto& s : truth.samples) truth_at[s.timestamp] = s.ghi_wm2;

  std::map<CellKey, Accum> fc, ref;
  accumulate(forecasts, truth_at, fc);
  accumulate(reference, truth_at, ref);

  MetricTable table;
  for (const auto& [key, acc] : fc) {
    if (acc.n == 0) continue;
    MetricCell cell;
    cell.day = key.first;
    cell.horizon_s = key.second;
    cell.rmse = acc.rmse();
    cell.mae = acc.mae();
    cell.model = model_name;
    const auto rit = ref.find(key);
    if (rit != ref.end() && rit->second.n > 0)
      cell.ss = skill_score(cell.rmse, rit->second.rmse());
    table.cells.push_back(std::move(cell));
  }
  return table;
}

const std::array<std::string, kMethodCChannels> kMethodCFeatureNames = {
    "cs_cam1",      "cs_cam2",    "cmv_u1",      "cmv_v1",
    "cmv_u2",       "cmv_v2",     "median_cbh",  "zenith",
    "azimuth",      "ghi_clear"};

namespace {

std::vector<int> lookback_domain(const std::vector<SampleWindow>& windows) {
  std::vector<int> rows;
  for (const auto& w : windows)
    for (int t = 0; t < kLookbackSteps; ++t)
      rows.push_back(w.lookback_start + t);
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  return rows;
}

double feature_value(const FeatureSeriesRow& r, int idx) {
  switch (idx) {
    case 0: return r.cs_cam1;
    case 1: return r.cs_cam2;
    case 2: return r.cmv_u1;
    case 3: return r.cmv_v1;
    case 4: return r.cmv_u2;
    case 5: return r.cmv_v2;
    case 6: return r.median_cbh_m;
    case 7: return r.zenith_deg;
    case 8: return r.azimuth_deg;
    case 9: return r.ghi_clear_wm2;
    default: throw ConfigError("feature index out of range");
  }
}

void set_feature_value(FeatureSeriesRow& r, int idx, double v) {
  switch (idx) {
    case 0: r.cs_cam1 = v; break;
    case 1: r.cs_cam2 = v; break;
    case 2: r.cmv_u1 = v; break;
    case 3: r.cmv_v1 = v; break;
    case 4: r.cmv_u2 = v; break;
    case 5: r.cmv_v2 = v; break;
    case 6: r.median_cbh_m = v; break;
    case 7: r.zenith_deg = v; break;
    case 8: r.azimuth_deg = v; break;
    case 9: r.ghi_clear_wm2 = v; break;
    default: throw ConfigError("feature index out of range");
  }
}

// per-horizon MAE (W/m^2) of the predictor over the window set
std::vector<double> horizon_mae(const PredictFn& predict,
                                const std::vector<FeatureSeriesRow>& rows,
                                const std::vector<SampleWindow>& windows,
                                const FeatureScaling& scaling) {
  std::vector<double> acc(kHorizonSteps, 0.0);
  for (const auto& w : windows) {
    const nn::TensorF32 lb = build_method_c_input(
        rows.data() + w.lookback_start, kLookbackSteps, scaling);
    const auto pred = predict(lb, w);
    for (int h = 0; h < kHorizonSteps; ++h)
      acc[static_cast<std::size_t>(h)] +=
          std::abs(pred[static_cast<std::size_t>(h)] -
                   w.targets_norm[static_cast<std::size_t>(h)] * scaling.g0);
  }
  for (auto& v : acc) v /= static_cast<double>(windows.size());
  return acc;
}

std::vector<PiCell> bucketize(const std::vector<double>& mae_shuffled,
                              const std::vector<double>& mae_ref,
                              int feature_index, int bucket_s, int reps) {
  std::vector<PiCell> out;
  const int n_buckets = (kHorizonSteps * kCadenceSeconds + bucket_s - 1) / bucket_s;
  for (int b = -1; b < n_buckets; ++b) {
    PiCell cell;
    cell.feature_index = feature_index;
    cell.feature = kMethodCFeatureNames[static_cast<std::size_t>(feature_index)];
    cell.repetitions = reps;
    double ds = 0.0, rs = 0.0;
    int n = 0;
    for (int h = 0; h < kHorizonSteps; ++h) {
      const int horizon_s = (h + 1) * kCadenceSeconds;
      const int bucket = (horizon_s - 1) / bucket_s;
      if (b >= 0 && bucket != b) continue;
      ds += mae_shuffled[static_cast<std::size_t>(h)] -
            mae_ref[static_cast<std::size_t>(h)];
      rs += mae_ref[static_cast<std::size_t>(h)];
      ++n;
    }
    if (n == 0) continue;
    cell.bucket_start_s = b < 0 ? 0 : b * bucket_s;
    cell.bucket_end_s = b < 0 ? kHorizonSteps * kCadenceSeconds : (b + 1) * bucket_s;
    if (b < 0) cell.bucket_start_s = 0;  // the all-horizon row
    cell.delta_mae = ds / n;
    cell.mae_ref = rs / n;
    out.push_back(cell);
  }
  return out;
}

}  // namespace

std::vector<PiCell> permutation_importance_single(
    const PredictFn& predict, const std::vector<FeatureSeriesRow>& rows,
    const std::vector<SampleWindow>& windows, const FeatureScaling& scaling,
    int feature_index, const std::vector<int>& permutation, int bucket_s) {
  if (windows.empty()) throw DataError("permutation importance: no windows");
  const std::vector<int> domain = lookback_domain(windows);
  if (permutation.size() != domain.size())
    throw DataError("permutation length must match the evaluation domain");

  const std::vector<double> ref = horizon_mae(predict, rows, windows, scaling);

  std::vector<FeatureSeriesRow> shuffled = rows;
  for (std::size_t i = 0; i < domain.size(); ++i)
    set_feature_value(
        shuffled[static_cast<std::size_t>(domain[i])], feature_index,
        feature_value(rows[static_cast<std::size_t>(
                          domain[static_cast<std::size_t>(permutation[i])])],
                      feature_index));

  const std::vector<double> got = horizon_mae(predict, shuffled, windows, scaling);
  return bucketize(got, ref, feature_index, bucket_s, 1);
}

std::vector<PiCell> permutation_importance(
    const PredictFn& predict, const std::vector<FeatureSeriesRow>& rows,
    const std::vector<SampleWindow>& windows, const FeatureScaling& scaling,
    int feature_index, int repetitions, std::uint64_t seed, int bucket_s) {
  if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
  if (windows.empty()) throw DataError("permutation importance: no windows");
  const std::vector<int> domain = lookback_domain(windows);
  const std::vector<double> ref = horizon_mae(predict, rows, windows, scaling);

  // accumulate per-repetition deltas so an ignored channel (identical
  // predictions) yields exactly zero, with no re-rounding through the mean
  std::vector<double> delta(kHorizonSteps, 0.0);
  for (int rep = 0; rep < repetitions; ++rep) {
    Rng rng(Rng::mix(seed, static_cast<std::uint64_t>(rep)));
    std::vector<int> perm(domain.size());
    for (std::size_t i = 0; i < perm.size(); ++i)
      perm[i] = static_cast<int>(i);
    rng.shuffle(perm);

    std::vector<FeatureSeriesRow> shuffled = rows;
    for (std::size_t i = 0; i < domain.size(); ++i)
      set_feature_value(
          shuffled[static_cast<std::size_t>(domain[i])], feature_index,
          feature_value(rows[static_cast<std::size_t>(
                            domain[static_cast<std::size_t>(perm[i])])],
                        feature_index));
    const auto got = horizon_mae(predict, shuffled, windows, scaling);
    for (int h = 0; h < kHorizonSteps; ++h)
      delta[static_cast<std::size_t>(h)] +=
          got[static_cast<std::size_t>(h)] - ref[static_cast<std::size_t>(h)];
  }
  std::vector<double> mean_shuffled(kHorizonSteps);
  for (int h = 0; h < kHorizonSteps; ++h)
    mean_shuffled[static_cast<std::size_t>(h)] =
        ref[static_cast<std::size_t>(h)] +
        delta[static_cast<std::size_t>(h)] / repetitions;
  return bucketize(mean_shuffled, ref, feature_index, bucket_s, repetitions);
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2)
    throw DataError("pearson: need two equal series of length >= 2");
  const double n = static_cast<double>(a.size());
  double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sa += a[i];
    sb += b[i];
    saa += a[i] * a[i];
    sbb += b[i] * b[i];
    sab += a[i] * b[i];
  }
  const double va = saa - sa * sa / n;
  const double vb = sbb - sb * sb / n;
  if (va <= 0.0 || vb <= 0.0) return 0.0;
  return (sab - sa * sb / n) / std::sqrt(va * vb);
}

}  // namespace skynow
