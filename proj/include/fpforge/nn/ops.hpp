#pragma once

#include <cmath>

#include "fpforge/nn/tensor.hpp"

namespace fpforge::nn {

// All backward functions ACCUMULATE: parameter grads into w.grad / b.grad,
// input grads into dx->data when dx is non-null. Callers zero beforehand.

// --- convolution -----------------------------------------------------------

// Cross-correlation, zero padding. x: (N,Ci,H,W), w: (Co,Ci,kh,kw), b: (Co,1,1,1).
// Output spatial size: floor((H + 2p - k) / s) + 1.
template <typename T>
TensorT<T> conv2d(const TensorT<T>& x, const TensorT<T>& w, const TensorT<T>& b,
                  int stride, int pad) {
  if (w.c() != x.c()) throw InvalidArgument("conv2d: channel mismatch");
  if (b.n() != w.n()) throw InvalidArgument("conv2d: bias size mismatch");
  const int kh = w.h(), kw = w.w();
  const int ho = (x.h() + 2 * pad - kh) / stride + 1;
  const int wo = (x.w() + 2 * pad - kw) / stride + 1;
  if (ho < 1 || wo < 1) throw InvalidArgument("conv2d: kernel larger than padded input");

  TensorT<T> y(x.n(), w.n(), ho, wo);
  for (int in = 0; in < x.n(); ++in) {
    for (int co = 0; co < w.n(); ++co) {
      const T bias = b.data[static_cast<std::size_t>(co)];
      for (int oy = 0; oy < ho; ++oy) {
        for (int ox = 0; ox < wo; ++ox) {
          T acc = bias;
          const int iy0 = oy * stride - pad;
          const int ix0 = ox * stride - pad;
          for (int ci = 0; ci < x.c(); ++ci) {
            for (int ky = 0; ky < kh; ++ky) {
              const int iy = iy0 + ky;
              if (iy < 0 || iy >= x.h()) continue;
              const T* xrow = &x.data[x.index(in, ci, iy, 0)];
              const T* wrow = &w.data[w.index(co, ci, ky, 0)];
              for (int kx = 0; kx < kw; ++kx) {
                const int ix = ix0 + kx;
                if (ix < 0 || ix >= x.w()) continue;
                acc += xrow[ix] * wrow[kx];
              }
            }
          }
          y.at(in, co, oy, ox) = acc;
        }
      }
    }
  }
  return y;
}

template <typename T>
void conv2d_backward(const TensorT<T>& x, TensorT<T>& w, TensorT<T>& b,
                     const TensorT<T>& dy, int stride, int pad, TensorT<T>* dx) {
  const int kh = w.h(), kw = w.w();
  for (int in = 0; in < x.n(); ++in) {
    for (int co = 0; co < w.n(); ++co) {
      for (int oy = 0; oy < dy.h(); ++oy) {
        for (int ox = 0; ox < dy.w(); ++ox) {
          const T g = dy.at(in, co, oy, ox);
          if (g == T(0)) continue;
          b.grad[static_cast<std::size_t>(co)] += g;
          const int iy0 = oy * stride - pad;
          const int ix0 = ox * stride - pad;
          for (int ci = 0; ci < x.c(); ++ci) {
            for (int ky = 0; ky < kh; ++ky) {
              const int iy = iy0 + ky;
              if (iy < 0 || iy >= x.h()) continue;
              const T* xrow = &x.data[x.index(in, ci, iy, 0)];
              T* gwrow = &w.grad[w.index(co, ci, ky, 0)];
              const T* wrow = &w.data[w.index(co, ci, ky, 0)];
              T* gxrow = dx ? &dx->data[x.index(in, ci, iy, 0)] : nullptr;
              for (int kx = 0; kx < kw; ++kx) {
                const int ix = ix0 + kx;
                if (ix < 0 || ix >= x.w()) continue;
                gwrow[kx] += g * xrow[ix];
                if (gxrow) gxrow[ix] += g * wrow[kx];
              }
            }
          }
        }
      }
    }
  }
}

// Adjoint of conv2d (scatter form). x: (N,Ci,H,W), w: (Ci,Co,kh,kw), b: (Co,1,1,1).
// Output spatial size: (H - 1) * s + k; no input or output padding.
template <typename T>
TensorT<T> conv_transpose2d(const TensorT<T>& x, const TensorT<T>& w, const TensorT<T>& b,
                            int stride) {
  if (w.n() != x.c()) throw InvalidArgument("conv_transpose2d: channel mismatch");
  if (b.n() != w.c()) throw InvalidArgument("conv_transpose2d: bias size mismatch");
  if (stride < 1) throw InvalidArgument("conv_transpose2d: stride must be >= 1");
  const int kh = w.h(), kw = w.w();
  const int ho = (x.h() - 1) * stride + kh;
  const int wo = (x.w() - 1) * stride + kw;

  TensorT<T> y(x.n(), w.c(), ho, wo);
  for (int in = 0; in < x.n(); ++in) {
    for (int co = 0; co < w.c(); ++co) {
      const T bias = b.data[static_cast<std::size_t>(co)];
      for (std::size_t i = y.index(in, co, 0, 0); i < y.index(in, co, 0, 0) + static_cast<std::size_t>(ho) * wo; ++i)
        y.data[i] = bias;
    }
    for (int ci = 0; ci < x.c(); ++ci) {
      for (int iy = 0; iy < x.h(); ++iy) {
        for (int ix = 0; ix < x.w(); ++ix) {
          const T v = x.at(in, ci, iy, ix);
          if (v == T(0)) continue;
          for (int co = 0; co < w.c(); ++co) {
            for (int ky = 0; ky < kh; ++ky) {
              T* yrow = &y.data[y.index(in, co, iy * stride + ky, ix * stride)];
              const T* wrow = &w.data[w.index(ci, co, ky, 0)];
              for (int kx = 0; kx < kw; ++kx) yrow[kx] += v * wrow[kx];
            }
          }
        }
      }
    }
  }
  return y;
}

template <typename T>
void conv_transpose2d_backward(const TensorT<T>& x, TensorT<T>& w, TensorT<T>& b,
                               const TensorT<T>& dy, int stride, TensorT<T>* dx) {
  const int kh = w.h(), kw = w.w();
  for (int in = 0; in < x.n(); ++in) {
    for (int co = 0; co < w.c(); ++co) {
      T acc = T(0);
      const std::size_t base = dy.index(in, co, 0, 0);
      for (std::size_t i = 0; i < static_cast<std::size_t>(dy.h()) * dy.w(); ++i)
        acc += dy.data[base + i];
      b.grad[static_cast<std::size_t>(co)] += acc;
    }
    for (int ci = 0; ci < x.c(); ++ci) {
      for (int iy = 0; iy < x.h(); ++iy) {
        for (int ix = 0; ix < x.w(); ++ix) {
          const T v = x.at(in, ci, iy, ix);
          T gx = T(0);
          for (int co = 0; co < w.c(); ++co) {
            for (int ky = 0; ky < kh; ++ky) {
              const T* gyrow = &dy.data[dy.index(in, co, iy * stride + ky, ix * stride)];
              const T* wrow = &w.data[w.index(ci, co, ky, 0)];
              T* gwrow = &w.grad[w.index(ci, co, ky, 0)];
              for (int kx = 0; kx < kw; ++kx) {
                gx += gyrow[kx] * wrow[kx];
                gwrow[kx] += gyrow[kx] * v;
              }
            }
          }
          if (dx) dx->data[x.index(in, ci, iy, ix)] += gx;
        }
      }
    }
  }
}

// --- activations ------------------------------------------------------------

template <typename T>
TensorT<T> relu(const TensorT<T>& x) {
  TensorT<T> y = x;
  for (T& v : y.data) v = v > T(0) ? v : T(0);
  return y;
}

// dpre = dy where pre > 0 else 0; accumulates into dx.
template <typename T>
void relu_backward(const TensorT<T>& dy, const TensorT<T>& pre, TensorT<T>& dx) {
  for (std::size_t i = 0; i < dy.size(); ++i)
    if (pre.data[i] > T(0)) dx.data[i] += dy.data[i];
}

template <typename T>
TensorT<T> leaky_relu(const TensorT<T>& x, T slope) {
  TensorT<T> y = x;
  for (T& v : y.data) v = v > T(0) ? v : slope * v;
  return y;
}

template <typename T>
void leaky_relu_backward(const TensorT<T>& dy, const TensorT<T>& pre, T slope, TensorT<T>& dx) {
  for (std::size_t i = 0; i < dy.size(); ++i)
    dx.data[i] += pre.data[i] > T(0) ? dy.data[i] : slope * dy.data[i];
}

template <typename T>
TensorT<T> sigmoid(const TensorT<T>& x) {
  TensorT<T> y = x;
  for (T& v : y.data) v = T(1) / (T(1) + std::exp(-v));
  return y;
}

// Uses the forward output: d/dx sigmoid = y (1 - y).
template <typename T>
void sigmoid_backward(const TensorT<T>& dy, const TensorT<T>& y, TensorT<T>& dx) {
  for (std::size_t i = 0; i < dy.size(); ++i)
    dx.data[i] += dy.data[i] * y.data[i] * (T(1) - y.data[i]);
}

// --- pooling and concat ------------------------------------------------------

// 2x2 max pooling, stride 2. Spatial dims must be even. Ties resolve to the
// first element in row-major scan order.
template <typename T>
TensorT<T> maxpool2(const TensorT<T>& x, std::vector<std::size_t>& argmax) {
  if (x.h() % 2 != 0 || x.w() % 2 != 0) throw InvalidArgument("maxpool2: dims must be even");
  TensorT<T> y(x.n(), x.c(), x.h() / 2, x.w() / 2);
  argmax.assign(y.size(), 0);
  std::size_t oi = 0;
  for (int in = 0; in < x.n(); ++in) {
    for (int c = 0; c < x.c(); ++c) {
      for (int oy = 0; oy < y.h(); ++oy) {
        for (int ox = 0; ox < y.w(); ++ox, ++oi) {
          std::size_t best = x.index(in, c, 2 * oy, 2 * ox);
          T best_v = x.data[best];
          const std::size_t candidates[3] = {x.index(in, c, 2 * oy, 2 * ox + 1),
                                             x.index(in, c, 2 * oy + 1, 2 * ox),
                                             x.index(in, c, 2 * oy + 1, 2 * ox + 1)};
          for (std::size_t cand : candidates) {
            if (x.data[cand] > best_v) {
              best_v = x.data[cand];
              best = cand;
            }
          }
          y.data[oi] = best_v;
          argmax[oi] = best;
        }
      }
    }
  }
  return y;
}

template <typename T>
void maxpool2_backward(const TensorT<T>& dy, const std::vector<std::size_t>& argmax,
                       TensorT<T>& dx) {
  for (std::size_t i = 0; i < dy.size(); ++i) dx.data[argmax[i]] += dy.data[i];
}

// Channel concatenation [a | b].
template <typename T>
TensorT<T> concat_channels(const TensorT<T>& a, const TensorT<T>& b) {
  if (a.n() != b.n() || a.h() != b.h() || a.w() != b.w())
    throw InvalidArgument("concat_channels: shape mismatch");
  TensorT<T> y(a.n(), a.c() + b.c(), a.h(), a.w());
  const std::size_t plane = static_cast<std::size_t>(a.h()) * a.w();
  for (int in = 0; in < a.n(); ++in) {
    std::copy_n(&a.data[a.index(in, 0, 0, 0)], plane * a.c(), &y.data[y.index(in, 0, 0, 0)]);
    std::copy_n(&b.data[b.index(in, 0, 0, 0)], plane * b.c(), &y.data[y.index(in, a.c(), 0, 0)]);
  }
  return y;
}

template <typename T>
void split_channels_backward(const TensorT<T>& dy, TensorT<T>& da, TensorT<T>& db) {
  const std::size_t plane = static_cast<std::size_t>(da.h()) * da.w();
  for (int in = 0; in < da.n(); ++in) {
    const T* src = &dy.data[dy.index(in, 0, 0, 0)];
    for (std::size_t i = 0; i < plane * da.c(); ++i) da.data[da.index(in, 0, 0, 0) + i] += src[i];
    src = &dy.data[dy.index(in, da.c(), 0, 0)];
    for (std::size_t i = 0; i < plane * db.c(); ++i) db.data[db.index(in, 0, 0, 0) + i] += src[i];
  }
}

// --- losses -------------------------------------------------------------------

template <typename T>
T clamp_prob(T p) {
  const T lo = T(1e-7);
  const T hi = T(1) - T(1e-7);
  return p < lo ? lo : (p > hi ? hi : p);
}

// Mean over elements of -[t ln p + (1-t) ln(1-p)]; pred clamped to
// [1e-7, 1-1e-7] internally.
template <typename T>
double bce_loss(const TensorT<T>& pred, const TensorT<T>& target) {
  if (!pred.same_shape(target)) throw InvalidArgument("bce_loss: shape mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double p = static_cast<double>(clamp_prob(pred.data[i]));
    const double t = static_cast<double>(target.data[i]);
    acc -= t * std::log(p) + (1.0 - t) * std::log(1.0 - p);
  }
  return acc / static_cast<double>(pred.size());
}

// Accumulates dL/dpred scaled by upstream into dpred. Zero gradient where the
// clamp is active.
template <typename T>
void bce_loss_backward(const TensorT<T>& pred, const TensorT<T>& target, double upstream,
                       TensorT<T>& dpred) {
  const double inv_n = 1.0 / static_cast<double>(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const T raw = pred.data[i];
    const T p = clamp_prob(raw);
    if (raw != p) continue;
    const double t = static_cast<double>(target.data[i]);
    const double g = (-t / static_cast<double>(p) + (1.0 - t) / (1.0 - static_cast<double>(p))) * inv_n;
    dpred.data[i] += static_cast<T>(upstream * g);
  }
}

struct GanValue {
  double value = 0.0;           // V(D,G) = mean log D(x) + mean log(1 - D(G(z)))
  double generator_loss = 0.0;  // mean log(1 - D(G(z))), minimized by G
};

// Inputs are probabilities; clamped to [1e-7, 1-1e-7] before the logs.
template <typename T>
GanValue gan_value(const TensorT<T>& d_real, const TensorT<T>& d_fake) {
  double real_term = 0.0;
  for (const T p : d_real.data) real_term += std::log(static_cast<double>(clamp_prob(p)));
  real_term /= static_cast<double>(d_real.size());
  double fake_term = 0.0;
  for (const T p : d_fake.data) fake_term += std::log(1.0 - static_cast<double>(clamp_prob(p)));
  fake_term /= static_cast<double>(d_fake.size());
  return {real_term + fake_term, fake_term};
}

// d(V)/d(d_real_i) = 1/(n p_i); d(V)/d(d_fake_i) = -1/(m (1 - p_i)).
// Pass upstream = -1 for the discriminator loss (-V), and use
// generator_gan_backward for the generator objective.
template <typename T>
void gan_value_backward(const TensorT<T>& d_real, const TensorT<T>& d_fake, double upstream,
                        TensorT<T>* dd_real, TensorT<T>* dd_fake) {
  if (dd_real) {
    const double inv_n = 1.0 / static_cast<double>(d_real.size());
    for (std::size_t i = 0; i < d_real.size(); ++i) {
      const T raw = d_real.data[i];
      const T p = clamp_prob(raw);
      if (raw != p) continue;
      dd_real->data[i] += static_cast<T>(upstream * inv_n / static_cast<double>(p));
    }
  }
  if (dd_fake) {
    const double inv_m = 1.0 / static_cast<double>(d_fake.size());
    for (std::size_t i = 0; i < d_fake.size(); ++i) {
      const T raw = d_fake.data[i];
      const T p = clamp_prob(raw);
      if (raw != p) continue;
      dd_fake->data[i] += static_cast<T>(-upstream * inv_m / (1.0 - static_cast<double>(p)));
    }
  }
}

// Gradient of mean log(1 - d_fake) w.r.t. d_fake.
template <typename T>
void generator_gan_backward(const TensorT<T>& d_fake, double upstream, TensorT<T>& dd_fake) {
  const double inv_m = 1.0 / static_cast<double>(d_fake.size());
  for (std::size_t i = 0; i < d_fake.size(); ++i) {
    const T raw = d_fake.data[i];
    const T p = clamp_prob(raw);
    if (raw != p) continue;
    dd_fake.data[i] += static_cast<T>(-upstream * inv_m / (1.0 - static_cast<double>(p)));
  }
}

// Mean absolute error |x - y|.
template <typename T>
double l1_loss(const TensorT<T>& x, const TensorT<T>& y) {
  if (!x.same_shape(y)) throw InvalidArgument("l1_loss: shape mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    acc += std::abs(static_cast<double>(x.data[i]) - static_cast<double>(y.data[i]));
  return acc / static_cast<double>(x.size());
}

// Accumulates d/dx of upstream * mean|x - y| into dx (sign convention: grad
// w.r.t. the first argument).
template <typename T>
void l1_loss_backward(const TensorT<T>& x, const TensorT<T>& y, double upstream, TensorT<T>& dx) {
  const double inv_n = 1.0 / static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = static_cast<double>(x.data[i]) - static_cast<double>(y.data[i]);
    const double s = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
    dx.data[i] += static_cast<T>(upstream * s * inv_n);
  }
}

// Reconstruction penalty |x - F(G(x))| as mean absolute error.
template <typename T>
double cycle_consistency_loss(const TensorT<T>& x, const TensorT<T>& x_reconstructed) {
  return l1_loss(x_reconstructed, x);
}

// Gradient flows into the reconstruction (the original x is data).
template <typename T>
void cycle_consistency_backward(const TensorT<T>& x, const TensorT<T>& x_reconstructed,
                                double upstream, TensorT<T>& d_reconstructed) {
  l1_loss_backward(x_reconstructed, x, upstream, d_reconstructed);
}

}  // namespace fpforge::nn
