#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "dt6d/nn/tensor.hpp"
#include "dt6d/parallel.hpp"
#include "dt6d/rand.hpp"

// Layer primitives with hand-written backward passes. Every reduction runs
// in a fixed order per output element, so results are bit-identical for any
// worker count.

namespace dt6d::nn {

// ---------------------------------------------------------------- conv2d

/// Valid-padding stride-1 cross-correlation. in: [B,H,W,Ci], w: [K,K,Ci,Co],
/// bias: [Co]. out: [B,H-K+1,W-K+1,Co].
template <typename T>
void conv2d_valid(const Tensor<T>& in, const Tensor<T>& w, const std::vector<T>& bias,
                  Tensor<T>& out, int workers = 1) {
  const int batch = in.shape[0], h = in.shape[1], width = in.shape[2], ci = in.shape[3];
  const int k = w.shape[0], co = w.shape[3];
  if (w.shape[1] != k || w.shape[2] != ci || static_cast<int>(bias.size()) != co)
    throw std::invalid_argument("conv2d: kernel/bias shape mismatch");
  if (h < k || width < k) throw std::invalid_argument("conv2d: input smaller than kernel");
  const int oh = h - k + 1, ow = width - k + 1;
  out = Tensor<T>(batch, oh, ow, co);

  parallel_for(static_cast<size_t>(batch) * oh, workers, [&](size_t lo, size_t hi) {
    std::vector<T> acc(static_cast<size_t>(co));
    for (size_t job = lo; job < hi; ++job) {
      const int b = static_cast<int>(job) / oh;
      const int oy = static_cast<int>(job) % oh;
      for (int ox = 0; ox < ow; ++ox) {
        for (int c = 0; c < co; ++c) acc[c] = bias[c];
        for (int ky = 0; ky < k; ++ky) {
          const T* in_row = in.row(b, oy + ky, ox);
          for (int kx = 0; kx < k; ++kx) {
            for (int c = 0; c < ci; ++c) {
              const T value = in_row[kx * ci + c];
              const T* w_row = w.row(ky, kx, c);
              for (int f = 0; f < co; ++f) acc[f] += value * w_row[f];
            }
          }
        }
        T* out_row = out.row(b, oy, ox);
        for (int f = 0; f < co; ++f) out_row[f] = acc[f];
      }
    }
  });
}

template <typename T>
void conv2d_backward(const Tensor<T>& in, const Tensor<T>& w, const Tensor<T>& dout,
                     Tensor<T>& din, Tensor<T>& dw, std::vector<T>& dbias, int workers = 1) {
  const int batch = in.shape[0], h = in.shape[1], width = in.shape[2], ci = in.shape[3];
  const int k = w.shape[0], co = w.shape[3];
  const int oh = dout.shape[1], ow = dout.shape[2];
  din = Tensor<T>(batch, h, width, ci);
  dw = Tensor<T>(k, k, ci, co);
  dbias.assign(static_cast<size_t>(co), T{0});

  // dL/dbias: plain sum over batch and space, per filter.
  for (int b = 0; b < batch; ++b)
    for (int oy = 0; oy < oh; ++oy)
      for (int ox = 0; ox < ow; ++ox) {
        const T* row = dout.row(b, oy, ox);
        for (int f = 0; f < co; ++f) dbias[f] += row[f];
      }

  // dL/dw: each (ky,kx,ci) row accumulated serially over batch and space.
  parallel_for(static_cast<size_t>(k) * k * ci, workers, [&](size_t lo, size_t hi) {
    for (size_t job = lo; job < hi; ++job) {
      const int ky = static_cast<int>(job) / (k * ci);
      const int kx = (static_cast<int>(job) / ci) % k;
      const int c = static_cast<int>(job) % ci;
      T* dw_row = dw.row(ky, kx, c);
      for (int b = 0; b < batch; ++b)
        for (int oy = 0; oy < oh; ++oy) {
          const T* in_row = in.row(b, oy + ky, kx);
          const T* dout_row = dout.row(b, oy, 0);
          for (int ox = 0; ox < ow; ++ox) {
            const T value = in_row[ox * ci + c];
            const T* g = dout_row + static_cast<size_t>(ox) * co;
            for (int f = 0; f < co; ++f) dw_row[f] += value * g[f];
          }
        }
    }
  });

  // dL/din: gather from every output position that used the input pixel.
  parallel_for(static_cast<size_t>(batch) * h, workers, [&](size_t lo, size_t hi) {
    for (size_t job = lo; job < hi; ++job) {
      const int b = static_cast<int>(job) / h;
      const int iy = static_cast<int>(job) % h;
      for (int ix = 0; ix < width; ++ix) {
        T* din_px = din.row(b, iy, ix);
        const int ky_lo = std::max(0, iy - oh + 1), ky_hi = std::min(k - 1, iy);
        const int kx_lo = std::max(0, ix - ow + 1), kx_hi = std::min(k - 1, ix);
        for (int ky = ky_lo; ky <= ky_hi; ++ky) {
          const int oy = iy - ky;
          for (int kx = kx_lo; kx <= kx_hi; ++kx) {
            const int ox = ix - kx;
            const T* g = dout.row(b, oy, ox);
            for (int c = 0; c < ci; ++c) {
              const T* w_row = w.row(ky, kx, c);
              T acc = T{0};
              for (int f = 0; f < co; ++f) acc += g[f] * w_row[f];
              din_px[c] += acc;
            }
          }
        }
      }
    }
  });
}

// -------------------------------------------------------------- maxpool2

/// 2x2 max pooling, stride 2; odd trailing row/column dropped. Argmax flat
/// indices into the input buffer are kept for the backward pass. Ties take
/// the first maximum in row-major window order.
template <typename T>
void maxpool2(const Tensor<T>& in, Tensor<T>& out, std::vector<int64_t>& argmax, int workers = 1) {
  const int batch = in.shape[0], h = in.shape[1], w = in.shape[2], c = in.shape[3];
  if (h < 2 || w < 2) throw std::invalid_argument("maxpool2: spatial dims must be >= 2");
  const int oh = h / 2, ow = w / 2;
  out = Tensor<T>(batch, oh, ow, c);
  argmax.assign(out.size(), 0);

  parallel_for(static_cast<size_t>(batch) * oh, workers, [&](size_t lo, size_t hi) {
    for (size_t job = lo; job < hi; ++job) {
      const int b = static_cast<int>(job) / oh;
      const int oy = static_cast<int>(job) % oh;
      for (int ox = 0; ox < ow; ++ox) {
        for (int ch = 0; ch < c; ++ch) {
          T best{};
          int64_t best_idx = -1;
          for (int dy = 0; dy < 2; ++dy)
            for (int dx = 0; dx < 2; ++dx) {
              const int iy = oy * 2 + dy, ix = ox * 2 + dx;
              const int64_t idx =
                  ((static_cast<int64_t>(b) * h + iy) * w + ix) * c + ch;
              const T value = in.v[static_cast<size_t>(idx)];
              if (best_idx < 0 || value > best) {
                best = value;
                best_idx = idx;
              }
            }
          out.at(b, oy, ox, ch) = best;
          argmax[((static_cast<size_t>(b) * oh + oy) * ow + ox) * c + ch] = best_idx;
        }
      }
    }
  });
}

template <typename T>
void maxpool2_backward(const Tensor<T>& dout, const std::vector<int64_t>& argmax,
                       const std::array<int, 4>& in_shape, Tensor<T>& din) {
  din = Tensor<T>(in_shape[0], in_shape[1], in_shape[2], in_shape[3]);
  for (size_t i = 0; i < dout.size(); ++i)
    din.v[static_cast<size_t>(argmax[i])] += dout.v[i];
}

// ------------------------------------------------------------- batchnorm

template <typename T>
struct BnCache {
  std::vector<T> mean, inv_std;  // per channel, train mode batch statistics
};

/// Per-channel batch normalization over (B,H,W). Train mode uses batch
/// statistics (population variance, eps inside the sqrt) and updates the
/// running stats with keep-momentum `momentum`; eval mode uses running stats.
template <typename T>
void batchnorm_forward(const Tensor<T>& in, const std::vector<T>& gain, const std::vector<T>& bias,
                       std::vector<T>& run_mean, std::vector<T>& run_var, Tensor<T>& out,
                       BnCache<T>* cache, bool train, double momentum, double eps) {
  const int c = in.shape[3];
  const size_t rows = in.size() / static_cast<size_t>(c);
  if (train && in.shape[0] < 2)
    throw std::invalid_argument("batchnorm: train mode needs batch >= 2");
  out = Tensor<T>(in.shape[0], in.shape[1], in.shape[2], in.shape[3]);

  std::vector<T> mean(c), inv_std(c);
  if (train) {
    for (int ch = 0; ch < c; ++ch) {
      double sum = 0;
      for (size_t r = 0; r < rows; ++r) sum += in.v[r * c + ch];
      const double mu = sum / static_cast<double>(rows);
      double var = 0;
      for (size_t r = 0; r < rows; ++r) {
        const double d = in.v[r * c + ch] - mu;
        var += d * d;
      }
      var /= static_cast<double>(rows);
      mean[ch] = static_cast<T>(mu);
      inv_std[ch] = static_cast<T>(1.0 / std::sqrt(var + eps));
      run_mean[ch] = static_cast<T>(momentum * run_mean[ch] + (1 - momentum) * mu);
      run_var[ch] = static_cast<T>(momentum * run_var[ch] + (1 - momentum) * var);
    }
  } else {
    for (int ch = 0; ch < c; ++ch) {
      mean[ch] = run_mean[ch];
      inv_std[ch] = static_cast<T>(1.0 / std::sqrt(static_cast<double>(run_var[ch]) + eps));
    }
  }

  for (size_t r = 0; r < rows; ++r)
    for (int ch = 0; ch < c; ++ch)
      out.v[r * c + ch] = (in.v[r * c + ch] - mean[ch]) * inv_std[ch] * gain[ch] + bias[ch];

  if (cache) {
    cache->mean = std::move(mean);
    cache->inv_std = std::move(inv_std);
  }
}

template <typename T>
void batchnorm_backward(const Tensor<T>& in, const std::vector<T>& gain, const BnCache<T>& cache,
                        const Tensor<T>& dout, Tensor<T>& din, std::vector<T>& dgain,
                        std::vector<T>& dbias) {
  const int c = in.shape[3];
  const size_t rows = in.size() / static_cast<size_t>(c);
  const double n = static_cast<double>(rows);
  din = Tensor<T>(in.shape[0], in.shape[1], in.shape[2], in.shape[3]);
  dgain.assign(static_cast<size_t>(c), T{0});
  dbias.assign(static_cast<size_t>(c), T{0});

  for (int ch = 0; ch < c; ++ch) {
    const double mu = cache.mean[ch], istd = cache.inv_std[ch], g = gain[ch];
    double sum_dy = 0, sum_dy_xhat = 0;
    for (size_t r = 0; r < rows; ++r) {
      const double dy = dout.v[r * c + ch];
      const double xhat = (in.v[r * c + ch] - mu) * istd;
      sum_dy += dy;
      sum_dy_xhat += dy * xhat;
    }
    dbias[ch] = static_cast<T>(sum_dy);
    dgain[ch] = static_cast<T>(sum_dy_xhat);
    // dL/dx = g*istd/n * (n*dy - sum(dy) - xhat * sum(dy*xhat))
    for (size_t r = 0; r < rows; ++r) {
      const double dy = dout.v[r * c + ch];
      const double xhat = (in.v[r * c + ch] - mu) * istd;
      din.v[r * c + ch] =
          static_cast<T>(g * istd / n * (n * dy - sum_dy - xhat * sum_dy_xhat));
    }
  }
}

// ------------------------------------------------------------ activations

template <typename T>
void elu_forward(const Tensor<T>& in, Tensor<T>& out) {
  out = Tensor<T>(in.shape[0], in.shape[1], in.shape[2], in.shape[3]);
  for (size_t i = 0; i < in.size(); ++i) {
    const T x = in.v[i];
    out.v[i] = x > T{0} ? x : static_cast<T>(std::exp(static_cast<double>(x)) - 1.0);
  }
}

template <typename T>
void elu_backward(const Tensor<T>& in, const Tensor<T>& out, const Tensor<T>& dout, Tensor<T>& din) {
  din = Tensor<T>(in.shape[0], in.shape[1], in.shape[2], in.shape[3]);
  for (size_t i = 0; i < in.size(); ++i)
    din.v[i] = in.v[i] > T{0} ? dout.v[i] : dout.v[i] * (out.v[i] + T{1});
}

template <typename T>
void tanh_forward(const Tensor<T>& in, Tensor<T>& out) {
  out = Tensor<T>(in.shape[0], in.shape[1], in.shape[2], in.shape[3]);
  for (size_t i = 0; i < in.size(); ++i)
    out.v[i] = static_cast<T>(std::tanh(static_cast<double>(in.v[i])));
}

template <typename T>
void tanh_backward(const Tensor<T>& out, const Tensor<T>& dout, Tensor<T>& din) {
  din = Tensor<T>(out.shape[0], out.shape[1], out.shape[2], out.shape[3]);
  for (size_t i = 0; i < out.size(); ++i)
    din.v[i] = dout.v[i] * (T{1} - out.v[i] * out.v[i]);
}

// --------------------------------------------------------------- dropout

/// Inverted dropout: train mode zeroes units with probability 1-keep and
/// scales survivors by 1/keep; eval mode is the identity.
template <typename T>
void dropout_forward(const Tensor<T>& in, double keep, bool train, RandomStream& rng,
                     Tensor<T>& out, std::vector<uint8_t>& mask) {
  if (keep <= 0 || keep > 1) throw std::invalid_argument("dropout: keep must be in (0,1]");
  out = Tensor<T>(in.shape[0], in.shape[1], in.shape[2], in.shape[3]);
  mask.assign(in.size(), 1);
  if (!train || keep == 1.0) {
    out.v = in.v;
    return;
  }
  const T scale = static_cast<T>(1.0 / keep);
  for (size_t i = 0; i < in.size(); ++i) {
    if (rng.uniform() < keep) {
      out.v[i] = in.v[i] * scale;
    } else {
      mask[i] = 0;
      out.v[i] = T{0};
    }
  }
}

template <typename T>
void dropout_backward(const Tensor<T>& dout, const std::vector<uint8_t>& mask, double keep,
                      Tensor<T>& din) {
  din = Tensor<T>(dout.shape[0], dout.shape[1], dout.shape[2], dout.shape[3]);
  const T scale = static_cast<T>(1.0 / keep);
  for (size_t i = 0; i < dout.size(); ++i)
    din.v[i] = mask[i] ? dout.v[i] * scale : T{0};
}

// ----------------------------------------------------------------- dense

/// Affine map. in: [B,N] (stored as [B,1,1,N]), w: [N,M], bias: [M].
template <typename T>
void dense_forward(const Tensor<T>& in, const Tensor<T>& w, const std::vector<T>& bias,
                   Tensor<T>& out, int workers = 1) {
  const int batch = in.shape[0];
  const int n = static_cast<int>(in.size()) / batch;
  const int rows = w.shape[0], m = w.shape[1];
  if (rows != n || static_cast<int>(bias.size()) != m)
    throw std::invalid_argument("dense: shape mismatch");
  out = Tensor<T>(batch, 1, 1, m);

  parallel_for(static_cast<size_t>(batch), workers, [&](size_t lo, size_t hi) {
    for (size_t b = lo; b < hi; ++b) {
      const T* x = &in.v[b * static_cast<size_t>(n)];
      T* y = &out.v[b * static_cast<size_t>(m)];
      for (int j = 0; j < m; ++j) y[j] = bias[j];
      for (int i = 0; i < n; ++i) {
        const T xi = x[i];
        const T* w_row = &w.v[static_cast<size_t>(i) * m];
        for (int j = 0; j < m; ++j) y[j] += xi * w_row[j];
      }
    }
  });
}

template <typename T>
void dense_backward(const Tensor<T>& in, const Tensor<T>& w, const Tensor<T>& dout,
                    Tensor<T>& din, Tensor<T>& dw, std::vector<T>& dbias, int workers = 1) {
  const int batch = in.shape[0];
  const int n = w.shape[0], m = w.shape[1];
  din = Tensor<T>(in.shape[0], in.shape[1], in.shape[2], in.shape[3]);
  dw = Tensor<T>(n, m, 1, 1);
  dbias.assign(static_cast<size_t>(m), T{0});

  for (int b = 0; b < batch; ++b) {
    const T* g = &dout.v[static_cast<size_t>(b) * m];
    for (int j = 0; j < m; ++j) dbias[j] += g[j];
  }
  parallel_for(static_cast<size_t>(n), workers, [&](size_t lo, size_t hi) {
    for (size_t i = lo; i < hi; ++i) {
      T* dw_row = &dw.v[i * static_cast<size_t>(m)];
      for (int b = 0; b < batch; ++b) {
        const T xi = in.v[static_cast<size_t>(b) * n + i];
        const T* g = &dout.v[static_cast<size_t>(b) * m];
        for (int j = 0; j < m; ++j) dw_row[j] += xi * g[j];
      }
    }
  });
  parallel_for(static_cast<size_t>(batch), workers, [&](size_t lo, size_t hi) {
    for (size_t b = lo; b < hi; ++b) {
      T* dx = &din.v[b * static_cast<size_t>(n)];
      const T* g = &dout.v[b * static_cast<size_t>(m)];
      for (int i = 0; i < n; ++i) {
        const T* w_row = &w.v[static_cast<size_t>(i) * m];
        T acc = T{0};
        for (int j = 0; j < m; ++j) acc += w_row[j] * g[j];
        dx[i] = acc;
      }
    }
  });
}

// ---------------------------------------------------------------- concat

template <typename T>
void concat_channels(const Tensor<T>& a, const Tensor<T>& b, Tensor<T>& out) {
  if (a.shape[0] != b.shape[0] || a.shape[1] != b.shape[1] || a.shape[2] != b.shape[2])
    throw std::invalid_argument("concat: spatial shape mismatch");
  const int ca = a.shape[3], cb = b.shape[3];
  out = Tensor<T>(a.shape[0], a.shape[1], a.shape[2], ca + cb);
  const size_t rows = a.size() / static_cast<size_t>(ca);
  for (size_t r = 0; r < rows; ++r) {
    T* dst = &out.v[r * static_cast<size_t>(ca + cb)];
    const T* sa = &a.v[r * static_cast<size_t>(ca)];
    const T* sb = &b.v[r * static_cast<size_t>(cb)];
    for (int c = 0; c < ca; ++c) dst[c] = sa[c];
    for (int c = 0; c < cb; ++c) dst[ca + c] = sb[c];
  }
}

template <typename T>
void split_channels(const Tensor<T>& dout, int ca, Tensor<T>& da, Tensor<T>& db) {
  const int c = dout.shape[3], cb = c - ca;
  da = Tensor<T>(dout.shape[0], dout.shape[1], dout.shape[2], ca);
  db = Tensor<T>(dout.shape[0], dout.shape[1], dout.shape[2], cb);
  const size_t rows = dout.size() / static_cast<size_t>(c);
  for (size_t r = 0; r < rows; ++r) {
    const T* src = &dout.v[r * static_cast<size_t>(c)];
    T* pa = &da.v[r * static_cast<size_t>(ca)];
    T* pb = &db.v[r * static_cast<size_t>(cb)];
    for (int i = 0; i < ca; ++i) pa[i] = src[i];
    for (int i = 0; i < cb; ++i) pb[i] = src[ca + i];
  }
}

}  // namespace dt6d::nn
