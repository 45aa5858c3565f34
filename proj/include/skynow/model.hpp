#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "skynow/features.hpp"
#include "skynow/nn.hpp"

namespace skynow {

/// Architecture constants per method. A and B share the CNN-LSTM stack and
/// differ only in input channels; C feeds the aggregated series straight
/// into the LSTM.
struct ArchitectureSpec {
  char method = 'C';
  std::vector<int> conv_filters{8, 8, 16, 24, 32, 40};
  int conv_kernel = 3;
  int pool_size = 2;
  int pool_count = 5;
  std::vector<int> lstm_units{25, 25};
  int dense_units = kHorizonSteps;
  double dropout = 0.0;
  double learning_rate = 2e-4;
  int batch_size = 1024;
  int input_size = 100;     // image extent for A/B, ignored for C
  int input_channels = 10;  // 3 (A), 9 (B), feature channels (C)
  int lookback = kLookbackSteps;

  static ArchitectureSpec for_method(char method);
  bool uses_cnn() const { return method == 'A' || method == 'B'; }
  void validate() const;
};

struct ForecastRecord {
  UtcTime issue_time = 0;
  std::array<double, kHorizonSteps> ghi_wm2{};
  std::string method;
};

/// Clearness persistence baseline: k(t) * GHI_clear(t+h).
/// Throws DataError when ghi_clear_now <= 1 W/m^2.
ForecastRecord smart_persistence(
    double ghi_now, double ghi_clear_now,
    const std::array<double, kHorizonSteps>& ghi_clear_future,
    UtcTime issue_time);

struct LayerInfo {
  std::string name;
  std::string output_shape;
  std::int64_t params = 0;
};

/// The three architectures over the shared layer kit. Forward consumes one
/// window (lookback tensor + normalized GHI history); the CNN tower is
/// applied per lookback step with shared weights.
template <typename T>
class ForecastModel {
 public:
  ForecastModel(const ArchitectureSpec& spec, std::uint64_t init_seed)
      : spec_(spec) {
    spec_.validate();
    Rng rng(init_seed);
    int feat = spec_.input_channels;  // per-step LSTM input before GHI
    if (spec_.uses_cnn()) {
      scale_ = nn::ChannelScale<T>(spec_.input_channels, "scale1x1");
      int h = spec_.input_size;
      int cin = spec_.input_channels;
      for (std::size_t i = 0; i < spec_.conv_filters.size(); ++i) {
        const int k = std::min(spec_.conv_kernel, h);
        const int cout = spec_.conv_filters[i];
        convs_.emplace_back(k, k, cin, cout, true,
                            "conv" + std::to_string(i + 1), rng);
        conv_out_size_.push_back(h - k + 1);
        h = h - k + 1;
        cin = cout;
        const bool pooled =
            i + 1 <= static_cast<std::size_t>(spec_.pool_count) && h >= 2;
        pooled_.push_back(pooled);
        if (pooled) h /= 2;
        pool_out_size_.push_back(h);
        drops_.emplace_back(spec_.dropout);
      }
      cnn_final_h_ = h;
      cnn_final_c_ = cin;
      cnn_out_ = h * h * cin;
      feat = cnn_out_;
    }
    lstm1_ = nn::Lstm<T>(feat + 1, spec_.lstm_units[0], true, "lstm1", rng);
    lstm2_ = nn::Lstm<T>(spec_.lstm_units[0], spec_.lstm_units[1], false,
                         "lstm2", rng);
    dense_ = nn::Dense<T>(spec_.lstm_units[1], spec_.dense_units, "dense", rng);
  }

  const ArchitectureSpec& spec() const { return spec_; }

  /// lookback: [lb, H, W, C] for A/B, [lb, C] for C. Returns [90] normalized.
  nn::Tensor<T> forward(const nn::Tensor<T>& lookback,
                        const std::array<T, kLookbackSteps>& ghi_history,
                        bool training, Rng* dropout_rng) {
    const int lb = spec_.lookback;
    int feat = spec_.uses_cnn() ? cnn_out_ : spec_.input_channels;
    nn::Tensor<T> seq = nn::Tensor<T>::zeros({lb, feat + 1});

    if (spec_.uses_cnn()) {
      const int sz = spec_.input_size;
      const std::size_t frame_n =
          static_cast<std::size_t>(sz) * sz * spec_.input_channels;
      for (int t = 0; t < lb; ++t) {
        nn::Tensor<T> x = nn::Tensor<T>::zeros({sz, sz, spec_.input_channels});
        std::copy(lookback.data.begin() + t * frame_n,
                  lookback.data.begin() + (t + 1) * frame_n, x.data.begin());
        x = scale_.forward(x);
        for (std::size_t i = 0; i < convs_.size(); ++i) {
          x = convs_[i].forward(x);
          x = drops_[i].forward(x, training, dropout_rng);
          if (pooled_[i]) x = pools_.forward(x);
        }
        std::copy(x.data.begin(), x.data.end(),
                  seq.data.begin() + static_cast<std::size_t>(t) * (feat + 1));
        seq.data[static_cast<std::size_t>(t) * (feat + 1) + feat] =
            ghi_history[static_cast<std::size_t>(t)];
      }
    } else {
      for (int t = 0; t < lb; ++t) {
        std::copy(lookback.data.begin() + static_cast<std::size_t>(t) * feat,
                  lookback.data.begin() + static_cast<std::size_t>(t + 1) * feat,
                  seq.data.begin() + static_cast<std::size_t>(t) * (feat + 1));
        seq.data[static_cast<std::size_t>(t) * (feat + 1) + feat] =
            ghi_history[static_cast<std::size_t>(t)];
      }
    }

    nn::Tensor<T> h = lstm1_.forward(seq);
    h = lstm2_.forward(h);
    return dense_.forward(h);
  }

  /// Backpropagates the loss gradient; parameter gradients accumulate.
  void backward(const nn::Tensor<T>& dpred) {
    nn::Tensor<T> g = dense_.backward(dpred);
    g = lstm2_.backward(g);
    g = lstm1_.backward(g);  // [lb, feat+1]

    if (!spec_.uses_cnn()) return;
    const int lb = spec_.lookback;
    const int feat = cnn_out_;
    // shared CNN weights: caches unwind in reverse step order; the gradient
    // re-enters the tower with the final conv output shape
    for (int t = lb - 1; t >= 0; --t) {
      nn::Tensor<T> gx =
          nn::Tensor<T>::zeros({cnn_final_h_, cnn_final_h_, cnn_final_c_});
      std::copy(g.data.begin() + static_cast<std::size_t>(t) * (feat + 1),
                g.data.begin() + static_cast<std::size_t>(t) * (feat + 1) + feat,
                gx.data.begin());
      for (int i = static_cast<int>(convs_.size()) - 1; i >= 0; --i) {
        if (pooled_[static_cast<std::size_t>(i)]) gx = pools_.backward(gx);
        gx = drops_[static_cast<std::size_t>(i)].backward(gx);
        gx = convs_[static_cast<std::size_t>(i)].backward(gx);
      }
      scale_.backward(gx);
    }
  }

  std::vector<nn::Param<T>*> params() {
    std::vector<nn::Param<T>*> out;
    if (spec_.uses_cnn()) {
      out.push_back(&scale_.weight);
      for (auto& c : convs_) {
        out.push_back(&c.weight);
        out.push_back(&c.bias);
      }
    }
    out.push_back(&lstm1_.wx);
    out.push_back(&lstm1_.wh);
    out.push_back(&lstm1_.b);
    out.push_back(&lstm2_.wx);
    out.push_back(&lstm2_.wh);
    out.push_back(&lstm2_.b);
    out.push_back(&dense_.weight);
    out.push_back(&dense_.bias);
    return out;
  }

  void zero_grads() {
    for (auto* p : params()) p->zero_grad();
  }

  void clear_caches() {
    scale_.clear_cache();
    for (auto& c : convs_) c.clear_cache();
    for (auto& d : drops_) d.clear_cache();
    pools_.clear_cache();
    lstm1_.clear_cache();
    lstm2_.clear_cache();
    dense_.clear_cache();
  }

  std::int64_t param_count() {
    std::int64_t n = 0;
    for (auto* p : params()) n += p->value.numel();
    return n;
  }

  std::vector<LayerInfo> layer_infos() {
    std::vector<LayerInfo> infos;
    const int lbf = spec_.uses_cnn() ? cnn_out_ : spec_.input_channels;
    if (spec_.uses_cnn()) {
      int h = spec_.input_size;
      infos.push_back({"scale1x1", shape_str(h, spec_.input_channels),
                       spec_.input_channels});
      for (std::size_t i = 0; i < convs_.size(); ++i) {
        h = conv_out_size_[i];
        infos.push_back({"conv" + std::to_string(i + 1) + " (3x3 valid, relu)",
                         shape_str(h, convs_[i].cout),
                         convs_[i].weight.value.numel() +
                             convs_[i].bias.value.numel()});
        if (pooled_[i]) {
          h = pool_out_size_[i];
          infos.push_back({"maxpool2", shape_str(h, convs_[i].cout), 0});
        }
      }
      infos.push_back({"flatten+ghi", "[" + std::to_string(lbf + 1) + "]", 0});
    }
    infos.push_back({"lstm1",
                     "[" + std::to_string(spec_.lookback) + ", " +
                         std::to_string(spec_.lstm_units[0]) + "]",
                     lstm1_.wx.value.numel() + lstm1_.wh.value.numel() +
                         lstm1_.b.value.numel()});
    infos.push_back({"lstm2", "[" + std::to_string(spec_.lstm_units[1]) + "]",
                     lstm2_.wx.value.numel() + lstm2_.wh.value.numel() +
                         lstm2_.b.value.numel()});
    infos.push_back({"dense", "[" + std::to_string(spec_.dense_units) + "]",
                     dense_.weight.value.numel() + dense_.bias.value.numel()});
    return infos;
  }

 private:
  static std::string shape_str(int h, int c) {
    return "[" + std::to_string(h) + ", " + std::to_string(h) + ", " +
           std::to_string(c) + "]";
  }

  ArchitectureSpec spec_;
  nn::ChannelScale<T> scale_;
  std::vector<nn::Conv2D<T>> convs_;
  std::vector<nn::Dropout<T>> drops_;
  std::vector<bool> pooled_;
  std::vector<int> conv_out_size_, pool_out_size_;
  nn::MaxPool2<T> pools_;
  nn::Lstm<T> lstm1_, lstm2_;
  nn::Dense<T> dense_;
  int cnn_out_ = 0;
  int cnn_final_h_ = 0;
  int cnn_final_c_ = 0;
};

std::string model_summary(const std::vector<LayerInfo>& infos,
                          const ArchitectureSpec& spec,
                          std::int64_t total_params);

/// Materializes per-window model inputs (lets training stream Method A/B
/// frames from disk instead of holding every window in memory).
class InputProvider {
 public:
  virtual ~InputProvider() = default;
  virtual nn::TensorF32 lookback(const SampleWindow& w) const = 0;
};

/// Provider over an in-memory feature table (Method C).
class SeriesProvider : public InputProvider {
 public:
  SeriesProvider(const std::vector<FeatureSeriesRow>* rows,
                 FeatureScaling scaling)
      : rows_(rows), scaling_(scaling) {}
  nn::TensorF32 lookback(const SampleWindow& w) const override {
    return build_method_c_input(rows_->data() + w.lookback_start,
                                kLookbackSteps, scaling_);
  }

 private:
  const std::vector<FeatureSeriesRow>* rows_;
  FeatureScaling scaling_;
};

struct TrainConfig {
  int batch_size = 128;
  int max_epochs = 100;
  int patience = 10;  // early-stopping epochs without val improvement
  std::uint64_t seed = 42;
  double learning_rate = 1e-4;
};

struct TrainHistory {
  std::vector<double> train_mae;  // normalized units
  std::vector<double> val_mae;
  int best_epoch = -1;  // 0-based
  int epochs_run = 0;
};

template <typename T>
double mean_window_mae(ForecastModel<T>& model, const InputProvider& provider,
                       const std::vector<SampleWindow>& windows) {
  if (windows.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& w : windows) {
    const nn::Tensor<T> lb = provider.lookback(w).template cast<T>();
    std::array<T, kLookbackSteps> hist;
    for (int i = 0; i < kLookbackSteps; ++i)
      hist[static_cast<std::size_t>(i)] = static_cast<T>(w.ghi_history_norm[i]);
    const nn::Tensor<T> pred = model.forward(lb, hist, false, nullptr);
    model.clear_caches();
    double m = 0.0;
    for (int h = 0; h < kHorizonSteps; ++h)
      m += std::abs(static_cast<double>(pred.data[h]) - w.targets_norm[h]);
    acc += m / kHorizonSteps;
  }
  return acc / static_cast<double>(windows.size());
}

/// MAE + Adam training with shuffled mini-batches and early stopping on the
/// validation MAE; the best weights are restored. Deterministic for a fixed
/// seed on one thread.
template <typename T>
TrainHistory train(ForecastModel<T>& model, const InputProvider& provider,
                   const std::vector<SampleWindow>& train_windows,
                   const std::vector<SampleWindow>& val_windows,
                   const TrainConfig& cfg) {
  if (train_windows.empty()) throw DataError("train: empty training set");
  if (cfg.patience < 1 || cfg.batch_size < 1)
    throw ConfigError("train: patience and batch size must be >= 1");

  nn::Adam<T> adam(model.params(), cfg.learning_rate);
  Rng shuffle_rng(Rng::mix(cfg.seed, 0xA11));
  Rng dropout_rng(Rng::mix(cfg.seed, 0xD0));

  TrainHistory hist;
  std::vector<nn::Tensor<T>> best_weights;
  double best_val = std::numeric_limits<double>::infinity();
  int stale = 0;

  std::vector<std::size_t> order(train_windows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_mae = 0.0;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(
          order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      model.zero_grads();
      for (std::size_t k = start; k < end; ++k) {
        const SampleWindow& w = train_windows[order[k]];
        const nn::Tensor<T> lb = provider.lookback(w).template cast<T>();
        std::array<T, kLookbackSteps> ghist;
        for (int i = 0; i < kLookbackSteps; ++i)
          ghist[static_cast<std::size_t>(i)] =
              static_cast<T>(w.ghi_history_norm[i]);
        nn::Tensor<T> target = nn::Tensor<T>::zeros({kHorizonSteps});
        for (int h = 0; h < kHorizonSteps; ++h)
          target.data[h] = static_cast<T>(w.targets_norm[h]);

        const nn::Tensor<T> pred = model.forward(lb, ghist, true, &dropout_rng);
        epoch_mae += static_cast<double>(nn::mae_loss(pred, target));
        ++seen;
        model.backward(nn::mae_loss_grad(pred, target));
      }
      // average the batch gradient
      const T inv = static_cast<T>(1.0 / static_cast<double>(end - start));
      for (auto* p : model.params())
        for (auto& g : p->grad.data) g *= inv;
      adam.step();
    }
    hist.train_mae.push_back(epoch_mae / static_cast<double>(seen));

    const double val =
        val_windows.empty()
            ? hist.train_mae.back()
            : mean_window_mae(model, provider, val_windows);
    hist.val_mae.push_back(val);
    hist.epochs_run = epoch + 1;

    if (val < best_val) {
      best_val = val;
      hist.best_epoch = epoch;
      best_weights.clear();
      for (auto* p : model.params()) best_weights.push_back(p->value);
      stale = 0;
    } else if (++stale >= cfg.patience) {
      break;
    }
  }

  if (!best_weights.empty()) {
    auto params = model.params();
    for (std::size_t i = 0; i < params.size(); ++i)
      params[i]->value = best_weights[i];
  }
  return hist;
}

/// De-normalizes a model output into a forecast record (clamped at 0).
template <typename T>
ForecastRecord predict(ForecastModel<T>& model, const InputProvider& provider,
                       const SampleWindow& w, double g0) {
  const nn::Tensor<T> lb = provider.lookback(w).template cast<T>();
  std::array<T, kLookbackSteps> hist;
  for (int i = 0; i < kLookbackSteps; ++i)
    hist[static_cast<std::size_t>(i)] = static_cast<T>(w.ghi_history_norm[i]);
  const nn::Tensor<T> pred = model.forward(lb, hist, false, nullptr);
  model.clear_caches();
  ForecastRecord rec;
  rec.issue_time = w.issue_time;
  rec.method = std::string(1, model.spec().method);
  for (int h = 0; h < kHorizonSteps; ++h)
    rec.ghi_wm2[static_cast<std::size_t>(h)] =
        std::max(0.0, static_cast<double>(pred.data[h]) * g0);
  return rec;
}

}  // namespace skynow
