#pragma once

#include <string>

#include "fpforge/nn/ops.hpp"
#include "fpforge/rng.hpp"

namespace fpforge::nn {

struct UNetConfig {
  int in_channels = 1;
  int out_channels = 1;
  int depth = 3;         // down/up levels; paper-scale runs document 4
  int base_channels = 8; // channels at the first level; paper-scale 64
};

struct PatchDiscriminatorConfig {
  int in_channels = 1;  // 2 for conditional pairs
  int layers = 3;       // stride-2 blocks
  int base_channels = 8;
};

// Gaussian N(0, stddev) weights, zero biases, in ParamStore entry order.
template <typename T>
void init_weights_gaussian(ParamStore<T>& params, Rng& rng, double stddev = 0.02) {
  for (auto& entry : params.entries) {
    if (entry.is_bias) {
      std::fill(entry.value.data.begin(), entry.value.data.end(), T(0));
    } else {
      for (T& v : entry.value.data) v = static_cast<T>(rng.normal(0.0, stddev));
    }
  }
}

// Encoder-decoder with skip concatenations. Each contracting level is
// [conv3x3+ReLU, conv3x3+ReLU, maxpool2]; a double-conv bottleneck sits at
// the bottom; each expansive level upsamples with a stride-2 transposed conv,
// concatenates the matching skip, and applies two conv3x3+ReLU. Head is a
// 1x1 conv + sigmoid, so output shape equals input shape.
template <typename T>
struct UNet {
  UNetConfig cfg;
  ParamStore<T> params;

  struct ConvPair {
    int wa = -1, ba = -1, wb = -1, bb = -1;
  };
  struct UpBlock {
    int wt = -1, bt = -1, wa = -1, ba = -1, wb = -1, bb = -1;
  };

  std::vector<ConvPair> enc;  // by level, 0 = shallowest
  ConvPair bottleneck;
  std::vector<UpBlock> dec;  // by level
  int head_w = -1, head_b = -1;

  explicit UNet(const UNetConfig& c, std::string prefix = "") : cfg(c) {
    if (cfg.depth < 1 || cfg.base_channels < 1) throw InvalidArgument("UNet: bad config");
    enc.resize(cfg.depth);
    dec.resize(cfg.depth);
    for (int level = 0; level < cfg.depth; ++level) {
      const int cin = level == 0 ? cfg.in_channels : cfg.base_channels << (level - 1);
      const int cout = cfg.base_channels << level;
      const std::string tag = prefix + "enc" + std::to_string(level);
      enc[level].wa = params.add(tag + ".conv1.w", {cout, cin, 3, 3});
      enc[level].ba = params.add(tag + ".conv1.b", {cout, 1, 1, 1}, true);
      enc[level].wb = params.add(tag + ".conv2.w", {cout, cout, 3, 3});
      enc[level].bb = params.add(tag + ".conv2.b", {cout, 1, 1, 1}, true);
    }
    {
      const int cin = cfg.base_channels << (cfg.depth - 1);
      const int cout = cfg.base_channels << cfg.depth;
      bottleneck.wa = params.add(prefix + "bottleneck.conv1.w", {cout, cin, 3, 3});
      bottleneck.ba = params.add(prefix + "bottleneck.conv1.b", {cout, 1, 1, 1}, true);
      bottleneck.wb = params.add(prefix + "bottleneck.conv2.w", {cout, cout, 3, 3});
      bottleneck.bb = params.add(prefix + "bottleneck.conv2.b", {cout, 1, 1, 1}, true);
    }
    for (int level = cfg.depth - 1; level >= 0; --level) {
      const int c_here = cfg.base_channels << level;
      const int c_below = cfg.base_channels << (level + 1);
      const std::string tag = prefix + "dec" + std::to_string(level);
      dec[level].wt = params.add(tag + ".up.w", {c_below, c_here, 2, 2});
      dec[level].bt = params.add(tag + ".up.b", {c_here, 1, 1, 1}, true);
      dec[level].wa = params.add(tag + ".conv1.w", {c_here, 2 * c_here, 3, 3});
      dec[level].ba = params.add(tag + ".conv1.b", {c_here, 1, 1, 1}, true);
      dec[level].wb = params.add(tag + ".conv2.w", {c_here, c_here, 3, 3});
      dec[level].bb = params.add(tag + ".conv2.b", {c_here, 1, 1, 1}, true);
    }
    head_w = params.add(prefix + "head.w", {cfg.out_channels, cfg.base_channels, 1, 1});
    head_b = params.add(prefix + "head.b", {cfg.out_channels, 1, 1, 1}, true);
  }

  void init(Rng& rng, double stddev = 0.02) { init_weights_gaussian(params, rng, stddev); }

  struct Cache {
    TensorT<T> input;
    struct EncCache {
      TensorT<T> pre_a, act_a, pre_b, act_b, pooled;
      std::vector<std::size_t> argmax;
    };
    std::vector<EncCache> enc;
    TensorT<T> bott_pre_a, bott_act_a, bott_pre_b, bott_act_b;
    struct DecCache {
      TensorT<T> up_out, cat, pre_a, act_a, pre_b, act_b;
    };
    std::vector<DecCache> dec;  // by level
    TensorT<T> head_pre, output;
  };

  void check_input(const TensorT<T>& x) const {
    if (x.c() != cfg.in_channels) throw InvalidArgument("UNet: input channel mismatch");
    const int div = 1 << cfg.depth;
    if (x.h() % div != 0 || x.w() % div != 0)
      throw InvalidArgument("UNet: spatial dims must be divisible by 2^depth");
  }

  TensorT<T> forward(const TensorT<T>& x, Cache& cache) const {
    check_input(x);
    cache.input = x;
    cache.enc.resize(cfg.depth);
    cache.dec.resize(cfg.depth);

    const TensorT<T>* cur = &cache.input;
    for (int level = 0; level < cfg.depth; ++level) {
      auto& ec = cache.enc[level];
      ec.pre_a = conv2d(*cur, params[enc[level].wa], params[enc[level].ba], 1, 1);
      ec.act_a = relu(ec.pre_a);
      ec.pre_b = conv2d(ec.act_a, params[enc[level].wb], params[enc[level].bb], 1, 1);
      ec.act_b = relu(ec.pre_b);
      ec.pooled = maxpool2(ec.act_b, ec.argmax);
      cur = &ec.pooled;
    }

    cache.bott_pre_a = conv2d(*cur, params[bottleneck.wa], params[bottleneck.ba], 1, 1);
    cache.bott_act_a = relu(cache.bott_pre_a);
    cache.bott_pre_b = conv2d(cache.bott_act_a, params[bottleneck.wb], params[bottleneck.bb], 1, 1);
    cache.bott_act_b = relu(cache.bott_pre_b);
    cur = &cache.bott_act_b;

    for (int level = cfg.depth - 1; level >= 0; --level) {
      auto& dc = cache.dec[level];
      dc.up_out = conv_transpose2d(*cur, params[dec[level].wt], params[dec[level].bt], 2);
      dc.cat = concat_channels(dc.up_out, cache.enc[level].act_b);
      dc.pre_a = conv2d(dc.cat, params[dec[level].wa], params[dec[level].ba], 1, 1);
      dc.act_a = relu(dc.pre_a);
      dc.pre_b = conv2d(dc.act_a, params[dec[level].wb], params[dec[level].bb], 1, 1);
      dc.act_b = relu(dc.pre_b);
      cur = &dc.act_b;
    }

    cache.head_pre = conv2d(*cur, params[head_w], params[head_b], 1, 0);
    cache.output = sigmoid(cache.head_pre);
    return cache.output;
  }

  TensorT<T> predict(const TensorT<T>& x) const {
    Cache cache;
    return forward(x, cache);
  }

  // Accumulates parameter grads; accumulates input grad into *dx when given.
  void backward(const TensorT<T>& dout, Cache& cache, TensorT<T>* dx) {
    // head
    TensorT<T> d_head_pre = TensorT<T>::zeros_like(cache.head_pre);
    sigmoid_backward(dout, cache.output, d_head_pre);
    TensorT<T> d_cur = TensorT<T>::zeros_like(cache.dec[0].act_b);
    conv2d_backward(cache.dec[0].act_b, params[head_w], params[head_b], d_head_pre, 1, 0, &d_cur);

    // expansive path, shallowest level first (reverse of forward)
    std::vector<TensorT<T>> skip_grads(cfg.depth);
    for (int level = 0; level < cfg.depth; ++level) {
      auto& dc = cache.dec[level];
      TensorT<T> d_pre_b = TensorT<T>::zeros_like(dc.pre_b);
      relu_backward(d_cur, dc.pre_b, d_pre_b);
      TensorT<T> d_act_a = TensorT<T>::zeros_like(dc.act_a);
      conv2d_backward(dc.act_a, params[dec[level].wb], params[dec[level].bb], d_pre_b, 1, 1, &d_act_a);
      TensorT<T> d_pre_a = TensorT<T>::zeros_like(dc.pre_a);
      relu_backward(d_act_a, dc.pre_a, d_pre_a);
      TensorT<T> d_cat = TensorT<T>::zeros_like(dc.cat);
      conv2d_backward(dc.cat, params[dec[level].wa], params[dec[level].ba], d_pre_a, 1, 1, &d_cat);

      TensorT<T> d_up = TensorT<T>::zeros_like(dc.up_out);
      skip_grads[level] = TensorT<T>::zeros_like(cache.enc[level].act_b);
      split_channels_backward(d_cat, d_up, skip_grads[level]);

      const TensorT<T>& up_in = level == cfg.depth - 1 ? cache.bott_act_b : cache.dec[level + 1].act_b;
      TensorT<T> d_up_in = TensorT<T>::zeros_like(up_in);
      conv_transpose2d_backward(up_in, params[dec[level].wt], params[dec[level].bt], d_up, 2, &d_up_in);
      d_cur = std::move(d_up_in);
    }

    // bottleneck
    {
      TensorT<T> d_pre_b = TensorT<T>::zeros_like(cache.bott_pre_b);
      relu_backward(d_cur, cache.bott_pre_b, d_pre_b);
      TensorT<T> d_act_a = TensorT<T>::zeros_like(cache.bott_act_a);
      conv2d_backward(cache.bott_act_a, params[bottleneck.wb], params[bottleneck.bb], d_pre_b, 1, 1, &d_act_a);
      TensorT<T> d_pre_a = TensorT<T>::zeros_like(cache.bott_pre_a);
      relu_backward(d_act_a, cache.bott_pre_a, d_pre_a);
      TensorT<T> d_pooled = TensorT<T>::zeros_like(cache.enc[cfg.depth - 1].pooled);
      conv2d_backward(cache.enc[cfg.depth - 1].pooled, params[bottleneck.wa], params[bottleneck.ba],
                      d_pre_a, 1, 1, &d_pooled);
      d_cur = std::move(d_pooled);
    }

    // contracting path, deepest level first
    for (int level = cfg.depth - 1; level >= 0; --level) {
      auto& ec = cache.enc[level];
      TensorT<T> d_act_b = std::move(skip_grads[level]);  // skip contribution
      maxpool2_backward(d_cur, ec.argmax, d_act_b);
      TensorT<T> d_pre_b = TensorT<T>::zeros_like(ec.pre_b);
      relu_backward(d_act_b, ec.pre_b, d_pre_b);
      TensorT<T> d_act_a = TensorT<T>::zeros_like(ec.act_a);
      conv2d_backward(ec.act_a, params[enc[level].wb], params[enc[level].bb], d_pre_b, 1, 1, &d_act_a);
      TensorT<T> d_pre_a = TensorT<T>::zeros_like(ec.pre_a);
      relu_backward(d_act_a, ec.pre_a, d_pre_a);

      const TensorT<T>& in = level == 0 ? cache.input : cache.enc[level - 1].pooled;
      if (level == 0) {
        conv2d_backward(in, params[enc[level].wa], params[enc[level].ba], d_pre_a, 1, 1, dx);
      } else {
        TensorT<T> d_in = TensorT<T>::zeros_like(in);
        conv2d_backward(in, params[enc[level].wa], params[enc[level].ba], d_pre_a, 1, 1, &d_in);
        d_cur = std::move(d_in);
      }
    }
  }
};

// Stride-2 conv blocks (k=4, pad 1) with LeakyReLU(0.2), then a 1x1 conv to
// one channel of raw patch scores. Output is H/2^layers x W/2^layers.
template <typename T>
struct PatchDiscriminator {
  PatchDiscriminatorConfig cfg;
  ParamStore<T> params;

  struct Block {
    int w = -1, b = -1;
  };
  std::vector<Block> blocks;
  int head_w = -1, head_b = -1;

  static constexpr T kSlope = T(0.2);

  explicit PatchDiscriminator(const PatchDiscriminatorConfig& c, std::string prefix = "") : cfg(c) {
    if (cfg.layers < 1 || cfg.base_channels < 1)
      throw InvalidArgument("PatchDiscriminator: bad config");
    blocks.resize(cfg.layers);
    for (int i = 0; i < cfg.layers; ++i) {
      const int cin = i == 0 ? cfg.in_channels : cfg.base_channels << (i - 1);
      const int cout = cfg.base_channels << i;
      const std::string tag = prefix + "block" + std::to_string(i);
      blocks[i].w = params.add(tag + ".w", {cout, cin, 4, 4});
      blocks[i].b = params.add(tag + ".b", {cout, 1, 1, 1}, true);
    }
    const int top = cfg.base_channels << (cfg.layers - 1);
    head_w = params.add(prefix + "head.w", {1, top, 1, 1});
    head_b = params.add(prefix + "head.b", {1, 1, 1, 1}, true);
  }

  void init(Rng& rng, double stddev = 0.02) { init_weights_gaussian(params, rng, stddev); }

  struct Cache {
    TensorT<T> input;
    std::vector<TensorT<T>> pre, act;
    TensorT<T> scores;
  };

  TensorT<T> forward(const TensorT<T>& x, Cache& cache) const {
    if (x.c() != cfg.in_channels) throw InvalidArgument("PatchDiscriminator: channel mismatch");
    const int div = 1 << cfg.layers;
    if (x.h() % div != 0 || x.w() % div != 0)
      throw InvalidArgument("PatchDiscriminator: dims must be divisible by 2^layers");
    cache.input = x;
    cache.pre.resize(cfg.layers);
    cache.act.resize(cfg.layers);
    const TensorT<T>* cur = &cache.input;
    for (int i = 0; i < cfg.layers; ++i) {
      cache.pre[i] = conv2d(*cur, params[blocks[i].w], params[blocks[i].b], 2, 1);
      cache.act[i] = leaky_relu(cache.pre[i], kSlope);
      cur = &cache.act[i];
    }
    cache.scores = conv2d(*cur, params[head_w], params[head_b], 1, 0);
    return cache.scores;
  }

  TensorT<T> predict(const TensorT<T>& x) const {
    Cache cache;
    return forward(x, cache);
  }

  void backward(const TensorT<T>& dscores, Cache& cache, TensorT<T>* dx) {
    TensorT<T> d_cur = TensorT<T>::zeros_like(cache.act[cfg.layers - 1]);
    conv2d_backward(cache.act[cfg.layers - 1], params[head_w], params[head_b], dscores, 1, 0, &d_cur);
    for (int i = cfg.layers - 1; i >= 0; --i) {
      TensorT<T> d_pre = TensorT<T>::zeros_like(cache.pre[i]);
      leaky_relu_backward(d_cur, cache.pre[i], kSlope, d_pre);
      const TensorT<T>& in = i == 0 ? cache.input : cache.act[i - 1];
      if (i == 0) {
        conv2d_backward(in, params[blocks[i].w], params[blocks[i].b], d_pre, 2, 1, dx);
      } else {
        TensorT<T> d_in = TensorT<T>::zeros_like(in);
        conv2d_backward(in, params[blocks[i].w], params[blocks[i].b], d_pre, 2, 1, &d_in);
        d_cur = std::move(d_in);
      }
    }
  }
};

}  // namespace fpforge::nn
