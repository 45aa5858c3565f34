#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "skynow/common.hpp"

// Minimal dense-tensor layers with exactly the ops the forecast models need.
// Everything is templated on the scalar so gradient checks can run the same
// code in 64-bit mode. Layers keep their forward caches on a stack, which
// makes weight sharing work: call forward k times, then backward k times in
// reverse order.

namespace skynow::nn {

template <typename T>
struct Tensor {
  std::vector<int> shape;
  std::vector<T> data;

  static Tensor zeros(std::vector<int> s) {
    Tensor t;
    t.shape = std::move(s);
    t.data.assign(t.count(t.shape), T(0));
    return t;
  }
  static std::size_t count(const std::vector<int>& s) {
    std::size_t n = 1;
    for (int d : s) n *= static_cast<std::size_t>(d);
    return n;
  }
  std::int64_t numel() const { return static_cast<std::int64_t>(data.size()); }
  int dim(int i) const { return shape[static_cast<std::size_t>(i)]; }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> t;
    t.shape = shape;
    t.data.resize(data.size());
    for (std::size_t i = 0; i < data.size(); ++i)
      t.data[i] = static_cast<U>(data[i]);
    return t;
  }
};

using TensorF32 = Tensor<float>;

template <typename T>
struct Param {
  Tensor<T> value;
  Tensor<T> grad;
  std::string name;

  void init(std::vector<int> shape, const std::string& n) {
    value = Tensor<T>::zeros(shape);
    grad = Tensor<T>::zeros(shape);
    name = n;
  }
  void zero_grad() { std::fill(grad.data.begin(), grad.data.end(), T(0)); }
};

template <typename T>
void glorot_uniform(Param<T>& p, int fan_in, int fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  for (auto& v : p.value.data)
    v = static_cast<T>(rng.uniform(-limit, limit));
}

/// Trainable per-channel scale (1x1 convolution with channels-in ==
/// channels-out and diagonal weights). Input layout [H, W, C].
template <typename T>
class ChannelScale {
 public:
  Param<T> weight;

  explicit ChannelScale(int channels = 1, const std::string& name = "scale") {
    weight.init({channels}, name);
    std::fill(weight.value.data.begin(), weight.value.data.end(), T(1));
  }

  Tensor<T> forward(const Tensor<T>& x) {
    const int c = weight.value.dim(0);
    Tensor<T> y = x;
    for (std::size_t i = 0; i < y.data.size(); ++i)
      y.data[i] *= weight.value.data[i % c];
    cache_.push_back(x);
    return y;
  }

  Tensor<T> backward(const Tensor<T>& gout) {
    const Tensor<T> x = std::move(cache_.back());
    cache_.pop_back();
    const int c = weight.value.dim(0);
    Tensor<T> gx = gout;
    for (std::size_t i = 0; i < gx.data.size(); ++i) {
      weight.grad.data[i % c] += gout.data[i] * x.data[i];
      gx.data[i] = gout.data[i] * weight.value.data[i % c];
    }
    return gx;
  }

  void clear_cache() { cache_.clear(); }

 private:
  std::vector<Tensor<T>> cache_;
};

/// Valid-padding cross-correlation, optional ReLU. Input [H, W, Cin],
/// kernel [kh, kw, Cin, Cout], output [H-kh+1, W-kw+1, Cout].
template <typename T>
class Conv2D {
 public:
  Param<T> weight;
  Param<T> bias;
  int kh = 3, kw = 3, cin = 1, cout = 1;
  bool relu = true;

  Conv2D() = default;
  Conv2D(int kh_, int kw_, int cin_, int cout_, bool relu_,
         const std::string& name, Rng& rng)
      : kh(kh_), kw(kw_), cin(cin_), cout(cout_), relu(relu_) {
    weight.init({kh, kw, cin, cout}, name + ".w");
    bias.init({cout}, name + ".b");
    glorot_uniform(weight, kh * kw * cin, kh * kw * cout, rng);
  }

  Tensor<T> forward(const Tensor<T>& x) {
    const int h = x.dim(0), w = x.dim(1);
    const int oh = h - kh + 1, ow = w - kw + 1;
    if (oh < 1 || ow < 1)
      throw DataError("conv2d: input " + std::to_string(h) + "x" +
                      std::to_string(w) + " smaller than kernel");
    Tensor<T> y = Tensor<T>::zeros({oh, ow, cout});
    for (int oy = 0; oy < oh; ++oy)
      for (int ox = 0; ox < ow; ++ox) {
        T* yrow = y.data.data() + (static_cast<std::size_t>(oy) * ow + ox) * cout;
        for (int co = 0; co < cout; ++co) yrow[co] = bias.value.data[co];
        for (int ky = 0; ky < kh; ++ky)
          for (int kx = 0; kx < kw; ++kx) {
            const T* xr = x.data.data() +
                          (static_cast<std::size_t>(oy + ky) * w + (ox + kx)) * cin;
            const T* wr = weight.value.data.data() +
                          (static_cast<std::size_t>(ky) * kw + kx) * cin * cout;
            for (int ci = 0; ci < cin; ++ci)
              for (int co = 0; co < cout; ++co)
                yrow[co] += xr[ci] * wr[ci * cout + co];
          }
      }
    if (relu)
      for (auto& v : y.data) v = v > T(0) ? v : T(0);
    cache_x_.push_back(x);
    cache_y_.push_back(y);
    return y;
  }

  Tensor<T> backward(const Tensor<T>& gout_in) {
    const Tensor<T> x = std::move(cache_x_.back());
    cache_x_.pop_back();
    const Tensor<T> y = std::move(cache_y_.back());
    cache_y_.pop_back();

    Tensor<T> gout = gout_in;
    if (relu)
      for (std::size_t i = 0; i < gout.data.size(); ++i)
        if (y.data[i] <= T(0)) gout.data[i] = T(0);

    const int h = x.dim(0), w = x.dim(1);
    const int oh = gout.dim(0), ow = gout.dim(1);
    Tensor<T> gx = Tensor<T>::zeros({h, w, cin});
    for (int oy = 0; oy < oh; ++oy)
      for (int ox = 0; ox < ow; ++ox) {
        const T* gr = gout.data.data() +
                      (static_cast<std::size_t>(oy) * ow + ox) * cout;
        for (int co = 0; co < cout; ++co) bias.grad.data[co] += gr[co];
        for (int ky = 0; ky < kh; ++ky)
          for (int kx = 0; kx < kw; ++kx) {
            const std::size_t xi =
                (static_cast<std::size_t>(oy + ky) * w + (ox + kx)) * cin;
            T* wg = weight.grad.data.data() +
                    (static_cast<std::size_t>(ky) * kw + kx) * cin * cout;
            const T* wv = weight.value.data.data() +
                          (static_cast<std::size_t>(ky) * kw + kx) * cin * cout;
            for (int ci = 0; ci < cin; ++ci)
              for (int co = 0; co < cout; ++co) {
                wg[ci * cout + co] += x.data[xi + ci] * gr[co];
                gx.data[xi + ci] += wv[ci * cout + co] * gr[co];
              }
          }
      }
    return gx;
  }

  void clear_cache() {
    cache_x_.clear();
    cache_y_.clear();
  }

 private:
  std::vector<Tensor<T>> cache_x_, cache_y_;
};

/// 2x2 max pooling, stride 2, trailing row/column discarded on odd extents.
template <typename T>
class MaxPool2 {
 public:
  Tensor<T> forward(const Tensor<T>& x) {
    const int h = x.dim(0), w = x.dim(1), c = x.dim(2);
    const int oh = h / 2, ow = w / 2;
    Tensor<T> y = Tensor<T>::zeros({oh, ow, c});
    std::vector<std::int32_t> arg(y.data.size());
    for (int oy = 0; oy < oh; ++oy)
      for (int ox = 0; ox < ow; ++ox)
        for (int ch = 0; ch < c; ++ch) {
          T best{};
          std::int32_t bi = -1;
          for (int dy = 0; dy < 2; ++dy)
            for (int dx = 0; dx < 2; ++dx) {
              const std::int32_t i = static_cast<std::int32_t>(
                  (static_cast<std::size_t>(oy * 2 + dy) * w + (ox * 2 + dx)) *
                      c +
                  ch);
              if (bi < 0 || x.data[static_cast<std::size_t>(i)] > best) {
                best = x.data[static_cast<std::size_t>(i)];
                bi = i;
              }
            }
          const std::size_t o =
              (static_cast<std::size_t>(oy) * ow + ox) * c + ch;
          y.data[o] = best;
          arg[o] = bi;
        }
    shapes_.push_back({h, w, c});
    argmax_.push_back(std::move(arg));
    return y;
  }

  Tensor<T> backward(const Tensor<T>& gout) {
    const auto shape = shapes_.back();
    shapes_.pop_back();
    const auto arg = std::move(argmax_.back());
    argmax_.pop_back();
    Tensor<T> gx = Tensor<T>::zeros(shape);
    for (std::size_t i = 0; i < gout.data.size(); ++i)
      gx.data[static_cast<std::size_t>(arg[i])] += gout.data[i];
    return gx;
  }

  void clear_cache() {
    shapes_.clear();
    argmax_.clear();
  }

 private:
  std::vector<std::vector<int>> shapes_;
  std::vector<std::vector<std::int32_t>> argmax_;
};

/// Inverted dropout: zero with probability rate, scale survivors by
/// 1/(1-rate); identity in eval mode.
template <typename T>
class Dropout {
 public:
  double rate = 0.0;

  explicit Dropout(double rate_ = 0.0) : rate(rate_) {}

  Tensor<T> forward(const Tensor<T>& x, bool training, Rng* rng) {
    if (!training || rate <= 0.0) {
      masks_.push_back({});
      return x;
    }
    Tensor<T> y = x;
    std::vector<std::uint8_t> mask(x.data.size());
    const T scale = static_cast<T>(1.0 / (1.0 - rate));
    for (std::size_t i = 0; i < y.data.size(); ++i) {
      const bool keep = rng->uniform() >= rate;
      mask[i] = keep;
      y.data[i] = keep ? y.data[i] * scale : T(0);
    }
    masks_.push_back(std::move(mask));
    return y;
  }

  Tensor<T> backward(const Tensor<T>& gout) {
    const auto mask = std::move(masks_.back());
    masks_.pop_back();
    if (mask.empty()) return gout;
    Tensor<T> gx = gout;
    const T scale = static_cast<T>(1.0 / (1.0 - rate));
    for (std::size_t i = 0; i < gx.data.size(); ++i)
      gx.data[i] = mask[i] ? gx.data[i] * scale : T(0);
    return gx;
  }

  void clear_cache() { masks_.clear(); }

 private:
  std::vector<std::vector<std::uint8_t>> masks_;
};

/// Fully connected linear layer, y = W x + b.
template <typename T>
class Dense {
 public:
  Param<T> weight;  // [units, in]
  Param<T> bias;    // [units]
  int in = 0, units = 0;

  Dense() = default;
  Dense(int in_, int units_, const std::string& name, Rng& rng)
      : in(in_), units(units_) {
    weight.init({units, in}, name + ".w");
    bias.init({units}, name + ".b");
    glorot_uniform(weight, in, units, rng);
  }

  Tensor<T> forward(const Tensor<T>& x) {
    Tensor<T> y = Tensor<T>::zeros({units});
    for (int u = 0; u < units; ++u) {
      T acc = bias.value.data[u];
      const T* wr = weight.value.data.data() + static_cast<std::size_t>(u) * in;
      for (int i = 0; i < in; ++i) acc += wr[i] * x.data[i];
      y.data[u] = acc;
    }
    cache_.push_back(x);
    return y;
  }

  Tensor<T> backward(const Tensor<T>& gout) {
    const Tensor<T> x = std::move(cache_.back());
    cache_.pop_back();
    Tensor<T> gx = Tensor<T>::zeros({in});
    for (int u = 0; u < units; ++u) {
      const T g = gout.data[u];
      bias.grad.data[u] += g;
      T* wg = weight.grad.data.data() + static_cast<std::size_t>(u) * in;
      const T* wv = weight.value.data.data() + static_cast<std::size_t>(u) * in;
      for (int i = 0; i < in; ++i) {
        wg[i] += g * x.data[i];
        gx.data[i] += g * wv[i];
      }
    }
    return gx;
  }

  void clear_cache() { cache_.clear(); }

 private:
  std::vector<Tensor<T>> cache_;
};

/// Standard LSTM over a [steps, in] sequence. Gate order i, f, g, o; forget
/// bias initialized to 1. Returns the full hidden sequence or only the last
/// state.
template <typename T>
class Lstm {
 public:
  Param<T> wx;  // [4*units, in]
  Param<T> wh;  // [4*units, units]
  Param<T> b;   // [4*units]
  int in = 0, units = 0;
  bool return_sequence = true;

  Lstm() = default;
  Lstm(int in_, int units_, bool return_sequence_, const std::string& name,
       Rng& rng)
      : in(in_), units(units_), return_sequence(return_sequence_) {
    wx.init({4 * units, in}, name + ".wx");
    wh.init({4 * units, units}, name + ".wh");
    b.init({4 * units}, name + ".b");
    const double lim_x = std::sqrt(1.0 / in);
    const double lim_h = std::sqrt(1.0 / units);
    for (auto& v : wx.value.data) v = static_cast<T>(rng.uniform(-lim_x, lim_x));
    for (auto& v : wh.value.data) v = static_cast<T>(rng.uniform(-lim_h, lim_h));
    for (int u = 0; u < units; ++u) b.value.data[units + u] = T(1);  // forget
  }

  Tensor<T> forward(const Tensor<T>& seq) {
    const int steps = seq.dim(0);
    Cache c;
    c.steps = steps;
    c.x = seq;
    c.gates = Tensor<T>::zeros({steps, 4 * units});
    c.cell = Tensor<T>::zeros({steps, units});
    c.hidden = Tensor<T>::zeros({steps, units});

    std::vector<T> h_prev(units, T(0)), c_prev(units, T(0));
    for (int t = 0; t < steps; ++t) {
      T* g = c.gates.data.data() + static_cast<std::size_t>(t) * 4 * units;
      const T* x = seq.data.data() + static_cast<std::size_t>(t) * in;
      for (int r = 0; r < 4 * units; ++r) {
        T acc = b.value.data[r];
        const T* wxr = wx.value.data.data() + static_cast<std::size_t>(r) * in;
        for (int i = 0; i < in; ++i) acc += wxr[i] * x[i];
        const T* whr = wh.value.data.data() + static_cast<std::size_t>(r) * units;
        for (int u = 0; u < units; ++u) acc += whr[u] * h_prev[u];
        g[r] = acc;
      }
      for (int u = 0; u < units; ++u) {
        const T i_g = sigmoid(g[u]);
        const T f_g = sigmoid(g[units + u]);
        const T g_g = std::tanh(g[2 * units + u]);
        const T o_g = sigmoid(g[3 * units + u]);
        g[u] = i_g;
        g[units + u] = f_g;
        g[2 * units + u] = g_g;
        g[3 * units + u] = o_g;
        const T cc = f_g * c_prev[u] + i_g * g_g;
        c.cell.data[static_cast<std::size_t>(t) * units + u] = cc;
        const T hh = o_g * std::tanh(cc);
        c.hidden.data[static_cast<std::size_t>(t) * units + u] = hh;
        c_prev[u] = cc;
        h_prev[u] = hh;
      }
    }

    Tensor<T> out;
    if (return_sequence) {
      out = c.hidden;
    } else {
      out = Tensor<T>::zeros({units});
      std::copy(c.hidden.data.end() - units, c.hidden.data.end(),
                out.data.begin());
    }
    cache_.push_back(std::move(c));
    return out;
  }

  /// gout is [steps, units] when return_sequence, else [units].
  Tensor<T> backward(const Tensor<T>& gout) {
    Cache c = std::move(cache_.back());
    cache_.pop_back();
    const int steps = c.steps;

    Tensor<T> gx = Tensor<T>::zeros({steps, in});
    std::vector<T> dh(units, T(0)), dc(units, T(0));
    for (int t = steps - 1; t >= 0; --t) {
      if (return_sequence) {
        for (int u = 0; u < units; ++u)
          dh[u] += gout.data[static_cast<std::size_t>(t) * units + u];
      } else if (t == steps - 1) {
        for (int u = 0; u < units; ++u) dh[u] += gout.data[u];
      }
      const T* g = c.gates.data.data() + static_cast<std::size_t>(t) * 4 * units;
      const T* cc = c.cell.data.data() + static_cast<std::size_t>(t) * units;
      const T* c_prev =
          t > 0 ? c.cell.data.data() + static_cast<std::size_t>(t - 1) * units
                : nullptr;
      const T* h_prev =
          t > 0 ? c.hidden.data.data() + static_cast<std::size_t>(t - 1) * units
                : nullptr;
      const T* x = c.x.data.data() + static_cast<std::size_t>(t) * in;

      std::vector<T> dgate(4 * units);
      for (int u = 0; u < units; ++u) {
        const T i_g = g[u], f_g = g[units + u], g_g = g[2 * units + u],
                o_g = g[3 * units + u];
        const T tc = std::tanh(cc[u]);
        const T dcell = dc[u] + dh[u] * o_g * (T(1) - tc * tc);
        const T cp = c_prev ? c_prev[u] : T(0);
        dgate[u] = dcell * g_g * i_g * (T(1) - i_g);
        dgate[units + u] = dcell * cp * f_g * (T(1) - f_g);
        dgate[2 * units + u] = dcell * i_g * (T(1) - g_g * g_g);
        dgate[3 * units + u] = dh[u] * tc * o_g * (T(1) - o_g);
        dc[u] = dcell * f_g;
      }
      std::fill(dh.begin(), dh.end(), T(0));
      for (int r = 0; r < 4 * units; ++r) {
        const T dg = dgate[r];
        b.grad.data[r] += dg;
        T* wxg = wx.grad.data.data() + static_cast<std::size_t>(r) * in;
        const T* wxv = wx.value.data.data() + static_cast<std::size_t>(r) * in;
        T* gxr = gx.data.data() + static_cast<std::size_t>(t) * in;
        for (int i = 0; i < in; ++i) {
          wxg[i] += dg * x[i];
          gxr[i] += dg * wxv[i];
        }
        if (h_prev) {
          T* whg = wh.grad.data.data() + static_cast<std::size_t>(r) * units;
          const T* whv = wh.value.data.data() + static_cast<std::size_t>(r) * units;
          for (int u = 0; u < units; ++u) {
            whg[u] += dg * h_prev[u];
            dh[u] += dg * whv[u];
          }
        } else {
          // h_prev is zero at t = 0; no gradient flows further back
        }
      }
    }
    return gx;
  }

  void clear_cache() { cache_.clear(); }

 private:
  static T sigmoid(T v) { return T(1) / (T(1) + std::exp(-v)); }

  struct Cache {
    int steps = 0;
    Tensor<T> x;
    Tensor<T> gates;   // post-activation i,f,g,o per step
    Tensor<T> cell;    // c_t
    Tensor<T> hidden;  // h_t
  };
  std::vector<Cache> cache_;
};

/// Mean absolute error; subgradient at zero is zero.
template <typename T>
T mae_loss(const Tensor<T>& pred, const Tensor<T>& target) {
  T acc = T(0);
  for (std::size_t i = 0; i < pred.data.size(); ++i)
    acc += std::abs(pred.data[i] - target.data[i]);
  return acc / static_cast<T>(pred.data.size());
}

template <typename T>
Tensor<T> mae_loss_grad(const Tensor<T>& pred, const Tensor<T>& target) {
  Tensor<T> g = Tensor<T>::zeros(pred.shape);
  const T inv = T(1) / static_cast<T>(pred.data.size());
  for (std::size_t i = 0; i < pred.data.size(); ++i) {
    const T d = pred.data[i] - target.data[i];
    g.data[i] = d > T(0) ? inv : (d < T(0) ? -inv : T(0));
  }
  return g;
}

/// Adam with standard bias correction.
template <typename T>
class Adam {
 public:
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  explicit Adam(std::vector<Param<T>*> params, double lr_)
      : lr(lr_), params_(std::move(params)) {
    for (auto* p : params_) {
      m_.push_back(std::vector<double>(p->value.data.size(), 0.0));
      v_.push_back(std::vector<double>(p->value.data.size(), 0.0));
    }
  }

  int step_count() const { return t_; }

  void step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1, t_);
    const double bc2 = 1.0 - std::pow(beta2, t_);
    for (std::size_t k = 0; k < params_.size(); ++k) {
      auto& p = *params_[k];
      for (std::size_t i = 0; i < p.value.data.size(); ++i) {
        const double g = static_cast<double>(p.grad.data[i]);
        m_[k][i] = beta1 * m_[k][i] + (1.0 - beta1) * g;
        v_[k][i] = beta2 * v_[k][i] + (1.0 - beta2) * g * g;
        const double mh = m_[k][i] / bc1;
        const double vh = v_[k][i] / bc2;
        p.value.data[i] -= static_cast<T>(lr * mh / (std::sqrt(vh) + eps));
      }
    }
  }

 private:
  int t_ = 0;
  std::vector<Param<T>*> params_;
  std::vector<std::vector<double>> m_, v_;
};

/// Learning-rate transfer under batch-size change: linear scaling.
inline double scale_lr(int old_bs, double old_lr, int new_bs) {
  if (old_bs < 1 || new_bs < 1) throw ConfigError("batch sizes must be >= 1");
  return old_lr * static_cast<double>(new_bs) / static_cast<double>(old_bs);
}

}  // namespace skynow::nn
