#include <cmath>
#include <fstream>

#include <json.hpp>

#include "fpforge/harness.hpp"
#include "fpforge/nn/checkpoint.hpp"
#include "fpforge/nn/models.hpp"
#include "fpforge/nn/optim.hpp"

namespace fpforge {

using nlohmann::json;
using nn::PatchDiscriminator;
using nn::PatchDiscriminatorConfig;
using nn::Tensor;
using nn::UNet;
using nn::UNetConfig;

namespace {

struct ImagePair {
  GrayImage noisy;
  GrayImage clean;
};

std::vector<ImagePair> load_split(const DatasetManifest& manifest,
                                  const std::filesystem::path& base_dir, Split split) {
  std::vector<ImagePair> pairs;
  for (const ManifestRecord& rec : manifest.records) {
    if (rec.split != split) continue;
    pairs.push_back({read_image_file(base_dir / rec.noisy_path),
                     read_image_file(base_dir / rec.clean_path)});
  }
  return pairs;
}

void copy_crop(Tensor& dst, int slot, const GrayImage& img, int x0, int y0, int size) {
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x)
      dst.at(slot, 0, y, x) = static_cast<float>(img.at(x0 + x, y0 + y));
}

struct HistoryWriter {
  std::ofstream out;

  HistoryWriter(const std::filesystem::path& path, const std::vector<std::string>& columns) {
    out.open(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open history file for writing: " + path.string());
    out << "step";
    for (const std::string& c : columns) out << "\t" << c;
    out << "\n";
  }

  void row(int step, const std::vector<double>& losses) {
    char buf[32];
    out << step;
    for (double v : losses) {
      std::snprintf(buf, sizeof(buf), "%.8f", v);
      out << "\t" << buf;
    }
    out << "\n";
  }
};

// Shared batching: random crops of randomly drawn pairs. The noisy and clean
// tensors stay aligned unless `unpaired` independently redraws the clean side.
struct BatchSampler {
  const std::vector<ImagePair>& pairs;
  int input_size;
  bool unpaired = false;

  void fill(Rng& rng, Tensor& noisy, Tensor& clean) const {
    const int n = static_cast<int>(pairs.size());
    for (int b = 0; b < noisy.n(); ++b) {
      const int i = static_cast<int>(rng.uniform_int(0, n - 1));
      const ImagePair& p = pairs[static_cast<std::size_t>(i)];
      const int ox = static_cast<int>(rng.uniform_int(0, p.noisy.width - input_size));
      const int oy = static_cast<int>(rng.uniform_int(0, p.noisy.height - input_size));
      copy_crop(noisy, b, p.noisy, ox, oy, input_size);
      if (unpaired) {
        const int j = static_cast<int>(rng.uniform_int(0, n - 1));
        const ImagePair& q = pairs[static_cast<std::size_t>(j)];
        const int qx = static_cast<int>(rng.uniform_int(0, q.clean.width - input_size));
        const int qy = static_cast<int>(rng.uniform_int(0, q.clean.height - input_size));
        copy_crop(clean, b, q.clean, qx, qy, input_size);
      } else {
        copy_crop(clean, b, p.clean, ox, oy, input_size);
      }
    }
  }
};

json unet_config_json(const UNetConfig& c) {
  return json{{"in_channels", c.in_channels},
              {"out_channels", c.out_channels},
              {"depth", c.depth},
              {"base_channels", c.base_channels}};
}

json disc_config_json(const PatchDiscriminatorConfig& c) {
  return json{{"in_channels", c.in_channels},
              {"layers", c.layers},
              {"base_channels", c.base_channels}};
}

}  // namespace

TrainOutcome cmd_train(const RunConfig& cfg) {
  const std::uint64_t seed = cfg.require_seed();
  const TrainSettings& ts = cfg.train;
  if (cfg.manifest_path.empty()) throw InvalidArgument("train: manifest path required");
  if (cfg.out_dir.empty()) throw InvalidArgument("train: output directory required");
  if (ts.batch_size < 1) throw InvalidArgument("train: batch size must be >= 1");
  if (ts.input_size % (1 << ts.depth) != 0)
    throw InvalidArgument("train: input_size must be divisible by 2^depth");
  if (ts.model_kind != ModelKind::kUnet && ts.input_size % (1 << ts.disc_layers) != 0)
    throw InvalidArgument("train: input_size must be divisible by 2^disc_layers");

  const DatasetManifest manifest = read_manifest(cfg.manifest_path);
  const std::filesystem::path base_dir = cfg.manifest_path.parent_path();
  const std::vector<ImagePair> train_pairs = load_split(manifest, base_dir, Split::kTrain);
  if (train_pairs.empty()) throw InvalidArgument("train: train split is empty");
  for (const ImagePair& p : train_pairs) {
    if (p.noisy.width < ts.input_size || p.noisy.height < ts.input_size)
      throw InvalidArgument("train: input_size exceeds dataset image dimensions");
  }

  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  if (ec) throw IoError("cannot create output directory: " + cfg.out_dir.string());

  const int n_train = static_cast<int>(train_pairs.size());
  const int steps_per_epoch = (n_train + ts.batch_size - 1) / ts.batch_size;
  const int total_steps = ts.steps > 0 ? ts.steps : ts.epochs * steps_per_epoch;
  if (total_steps < 1) throw InvalidArgument("train: no steps to run");
  const int effective_epochs =
      ts.steps > 0 ? (total_steps + steps_per_epoch - 1) / steps_per_epoch : ts.epochs;
  const int decay_start = ts.decay_start_epoch < 0 ? effective_epochs : ts.decay_start_epoch;

  Rng init_rng(mix_seed(seed, stream::kWeightInit));
  Rng loop_rng(mix_seed(seed, stream::kTrainLoop));

  const auto step_lr = [&](int step) {
    const int epoch = step / steps_per_epoch;
    return nn::lr_schedule(ts.lr, epoch, effective_epochs, decay_start);
  };

  BatchSampler sampler{train_pairs, ts.input_size,
                       ts.model_kind == ModelKind::kCycleGanSmoke};
  Tensor noisy(ts.batch_size, 1, ts.input_size, ts.input_size);
  Tensor clean(ts.batch_size, 1, ts.input_size, ts.input_size);

  const std::filesystem::path ckpt_path = cfg.out_dir / "model.ckpt";
  const std::filesystem::path history_path = cfg.out_dir / "history.tsv";

  TrainOutcome outcome;
  outcome.checkpoint_path = ckpt_path;
  outcome.history_path = history_path;

  if (ts.model_kind == ModelKind::kUnet) {
    UNetConfig gc{1, 1, ts.depth, ts.base_channels};
    UNet<float> net(gc, "G.");
    net.init(init_rng);
    nn::AdamState<float> opt;
    opt.beta1 = 0.5;
    opt.beta2 = 0.999;
    opt.attach(net.params);

    HistoryWriter history(history_path, {"bce"});
    double first = 0.0, last = 0.0;
    for (int step = 0; step <= total_steps; ++step) {
      sampler.fill(loop_rng, noisy, clean);
      UNet<float>::Cache cache;
      const Tensor pred = net.forward(noisy, cache);
      const double loss = nn::bce_loss(pred, clean);
      history.row(step, {loss});
      if (step == 0) first = loss;
      last = loss;
      if (step == total_steps) break;

      Tensor dpred = Tensor::zeros_like(pred);
      nn::bce_loss_backward(pred, clean, 1.0, dpred);
      net.params.zero_grads();
      net.backward(dpred, cache, nullptr);
      opt.lr = step_lr(step);
      nn::adam_step(net.params, opt);
    }
    outcome.initial_loss = first;
    outcome.final_loss = last;

    const json config{{"model_kind", "unet"},
                      {"input_size", ts.input_size},
                      {"generator", unet_config_json(gc)}};
    nn::save_checkpoint(ckpt_path, config.dump(), {&net.params});
    return outcome;
  }

  if (ts.model_kind == ModelKind::kPix2PixSmoke) {
    UNetConfig gc{1, 1, ts.depth, ts.base_channels};
    PatchDiscriminatorConfig dc{2, ts.disc_layers, ts.disc_base_channels};
    UNet<float> gen(gc, "G.");
    PatchDiscriminator<float> disc(dc, "D.");
    gen.init(init_rng);
    disc.init(init_rng);
    nn::AdamState<float> g_opt, d_opt;
    g_opt.beta1 = d_opt.beta1 = 0.5;
    g_opt.beta2 = d_opt.beta2 = 0.999;
    g_opt.attach(gen.params);
    d_opt.attach(disc.params);

    HistoryWriter history(history_path, {"d_loss", "g_adv", "g_l1", "v"});
    double first = 0.0, last = 0.0;
    for (int step = 0; step <= total_steps; ++step) {
      sampler.fill(loop_rng, noisy, clean);
      const bool update = step > 0;

      UNet<float>::Cache g_cache;
      const Tensor fake = gen.forward(noisy, g_cache);

      // Discriminator phase; the generator pass above is treated as data.
      const Tensor real_in = nn::concat_channels(noisy, clean);
      const Tensor fake_in = nn::concat_channels(noisy, fake);
      PatchDiscriminator<float>::Cache dc_real, dc_fake;
      const Tensor p_real = nn::sigmoid(disc.forward(real_in, dc_real));
      const Tensor p_fake = nn::sigmoid(disc.forward(fake_in, dc_fake));
      const nn::GanValue v = nn::gan_value(p_real, p_fake);
      const double d_loss = -v.value;

      if (update) {
        Tensor dp_real = Tensor::zeros_like(p_real);
        Tensor dp_fake = Tensor::zeros_like(p_fake);
        nn::gan_value_backward(p_real, p_fake, -1.0, &dp_real, &dp_fake);
        Tensor ds_real = Tensor::zeros_like(p_real);
        Tensor ds_fake = Tensor::zeros_like(p_fake);
        nn::sigmoid_backward(dp_real, p_real, ds_real);
        nn::sigmoid_backward(dp_fake, p_fake, ds_fake);
        disc.params.zero_grads();
        disc.backward(ds_real, dc_real, nullptr);
        disc.backward(ds_fake, dc_fake, nullptr);
        d_opt.lr = step_lr(step - 1);
        nn::adam_step(disc.params, d_opt);
      }

      // Generator phase against the (possibly updated) discriminator.
      PatchDiscriminator<float>::Cache dc_gen;
      const Tensor p_fake2 = nn::sigmoid(disc.forward(fake_in, dc_gen));
      double g_adv;
      if (ts.non_saturating) {
        double acc = 0.0;
        for (float p : p_fake2.data) acc -= std::log(static_cast<double>(nn::clamp_prob(p)));
        g_adv = acc / static_cast<double>(p_fake2.size());
      } else {
        g_adv = nn::gan_value(p_real, p_fake2).generator_loss;
      }
      const double g_l1 = nn::l1_loss(fake, clean);
      history.row(step, {d_loss, g_adv, g_l1, v.value});
      if (step == 0) first = d_loss;
      last = d_loss;
      if (step == total_steps) break;

      Tensor dp = Tensor::zeros_like(p_fake2);
      if (ts.non_saturating) {
        const double inv = 1.0 / static_cast<double>(p_fake2.size());
        for (std::size_t i = 0; i < p_fake2.size(); ++i) {
          const float raw = p_fake2.data[i];
          const float p = nn::clamp_prob(raw);
          if (raw != p) continue;
          dp.data[i] += static_cast<float>(-inv / static_cast<double>(p));
        }
      } else {
        nn::generator_gan_backward(p_fake2, 1.0, dp);
      }
      Tensor ds = Tensor::zeros_like(p_fake2);
      nn::sigmoid_backward(dp, p_fake2, ds);
      disc.params.zero_grads();  // scratch; discarded next discriminator phase
      Tensor d_fake_in = Tensor::zeros_like(fake_in);
      disc.backward(ds, dc_gen, &d_fake_in);
      Tensor d_noisy_unused = Tensor::zeros_like(noisy);
      Tensor d_fake = Tensor::zeros_like(fake);
      nn::split_channels_backward(d_fake_in, d_noisy_unused, d_fake);
      nn::l1_loss_backward(fake, clean, ts.l1_weight, d_fake);

      gen.params.zero_grads();
      gen.backward(d_fake, g_cache, nullptr);
      g_opt.lr = step_lr(step - 1);
      nn::adam_step(gen.params, g_opt);
    }
    outcome.initial_loss = first;
    outcome.final_loss = last;

    const json config{{"model_kind", "pix2pix_smoke"},
                      {"input_size", ts.input_size},
                      {"generator", unet_config_json(gc)},
                      {"discriminator", disc_config_json(dc)},
                      {"l1_weight", ts.l1_weight}};
    nn::save_checkpoint(ckpt_path, config.dump(), {&gen.params, &disc.params});
    return outcome;
  }

  // cyclegan_smoke: forward mapping G (noisy -> clean), backward mapping F,
  // one discriminator per domain, cycle penalty both ways.
  UNetConfig gc{1, 1, ts.depth, ts.base_channels};
  PatchDiscriminatorConfig dc{1, ts.disc_layers, ts.disc_base_channels};
  UNet<float> gen_xy(gc, "G.");
  UNet<float> gen_yx(gc, "F.");
  PatchDiscriminator<float> disc_x(dc, "DX.");
  PatchDiscriminator<float> disc_y(dc, "DY.");
  gen_xy.init(init_rng);
  gen_yx.init(init_rng);
  disc_x.init(init_rng);
  disc_y.init(init_rng);
  nn::AdamState<float> g_opt, f_opt, dx_opt, dy_opt;
  for (auto* opt : {&g_opt, &f_opt, &dx_opt, &dy_opt}) {
    opt->beta1 = 0.5;
    opt->beta2 = 0.999;
  }
  g_opt.attach(gen_xy.params);
  f_opt.attach(gen_yx.params);
  dx_opt.attach(disc_x.params);
  dy_opt.attach(disc_y.params);

  HistoryWriter history(history_path, {"dx_loss", "dy_loss", "g_adv", "cycle"});
  double first = 0.0, last = 0.0;
  for (int step = 0; step <= total_steps; ++step) {
    sampler.fill(loop_rng, noisy, clean);
    const bool update = step > 0;

    UNet<float>::Cache g_cache1, f_cache1;
    const Tensor fake_y = gen_xy.forward(noisy, g_cache1);
    const Tensor fake_x = gen_yx.forward(clean, f_cache1);

    // Per-domain discriminator phases.
    const auto disc_phase = [&](PatchDiscriminator<float>& d, nn::AdamState<float>& opt,
                                const Tensor& real, const Tensor& fake_img) {
      PatchDiscriminator<float>::Cache c_real, c_fake;
      const Tensor p_real = nn::sigmoid(d.forward(real, c_real));
      const Tensor p_fake = nn::sigmoid(d.forward(fake_img, c_fake));
      const nn::GanValue v = nn::gan_value(p_real, p_fake);
      if (update) {
        Tensor dp_real = Tensor::zeros_like(p_real);
        Tensor dp_fake = Tensor::zeros_like(p_fake);
        nn::gan_value_backward(p_real, p_fake, -1.0, &dp_real, &dp_fake);
        Tensor ds_real = Tensor::zeros_like(p_real);
        Tensor ds_fake = Tensor::zeros_like(p_fake);
        nn::sigmoid_backward(dp_real, p_real, ds_real);
        nn::sigmoid_backward(dp_fake, p_fake, ds_fake);
        d.params.zero_grads();
        d.backward(ds_real, c_real, nullptr);
        d.backward(ds_fake, c_fake, nullptr);
        opt.lr = step_lr(step - 1);
        nn::adam_step(d.params, opt);
      }
      return -v.value;
    };
    const double dy_loss = disc_phase(disc_y, dy_opt, clean, fake_y);
    const double dx_loss = disc_phase(disc_x, dx_opt, noisy, fake_x);

    // Generator phase: adversarial terms + cycle reconstructions.
    PatchDiscriminator<float>::Cache dyc, dxc;
    const Tensor p_fy = nn::sigmoid(disc_y.forward(fake_y, dyc));
    const Tensor p_fx = nn::sigmoid(disc_x.forward(fake_x, dxc));
    double g_adv = 0.0;
    {
      double acc = 0.0;
      for (float p : p_fy.data) acc += std::log(1.0 - static_cast<double>(nn::clamp_prob(p)));
      g_adv += acc / static_cast<double>(p_fy.size());
      acc = 0.0;
      for (float p : p_fx.data) acc += std::log(1.0 - static_cast<double>(nn::clamp_prob(p)));
      g_adv += acc / static_cast<double>(p_fx.size());
    }
    UNet<float>::Cache f_cache2, g_cache2;
    const Tensor rec_x = gen_yx.forward(fake_y, f_cache2);
    const Tensor rec_y = gen_xy.forward(fake_x, g_cache2);
    const double cycle =
        nn::cycle_consistency_loss(noisy, rec_x) + nn::cycle_consistency_loss(clean, rec_y);

    history.row(step, {dx_loss, dy_loss, g_adv, cycle});
    if (step == 0) first = dx_loss;
    last = dx_loss;
    if (step == total_steps) break;

    gen_xy.params.zero_grads();
    gen_yx.params.zero_grads();

    // d(total)/d(fake_y): adversarial through D_Y plus cycle through F.
    Tensor d_fake_y = Tensor::zeros_like(fake_y);
    {
      Tensor dp = Tensor::zeros_like(p_fy);
      nn::generator_gan_backward(p_fy, 1.0, dp);
      Tensor ds = Tensor::zeros_like(p_fy);
      nn::sigmoid_backward(dp, p_fy, ds);
      disc_y.params.zero_grads();  // scratch
      disc_y.backward(ds, dyc, &d_fake_y);

      Tensor d_rec_x = Tensor::zeros_like(rec_x);
      nn::cycle_consistency_backward(noisy, rec_x, ts.cycle_weight, d_rec_x);
      gen_yx.backward(d_rec_x, f_cache2, &d_fake_y);
    }
    Tensor d_fake_x = Tensor::zeros_like(fake_x);
    {
      Tensor dp = Tensor::zeros_like(p_fx);
      nn::generator_gan_backward(p_fx, 1.0, dp);
      Tensor ds = Tensor::zeros_like(p_fx);
      nn::sigmoid_backward(dp, p_fx, ds);
      disc_x.params.zero_grads();  // scratch
      disc_x.backward(ds, dxc, &d_fake_x);

      Tensor d_rec_y = Tensor::zeros_like(rec_y);
      nn::cycle_consistency_backward(clean, rec_y, ts.cycle_weight, d_rec_y);
      gen_xy.backward(d_rec_y, g_cache2, &d_fake_x);
    }
    gen_xy.backward(d_fake_y, g_cache1, nullptr);
    gen_yx.backward(d_fake_x, f_cache1, nullptr);
    g_opt.lr = f_opt.lr = step_lr(step - 1);
    nn::adam_step(gen_xy.params, g_opt);
    nn::adam_step(gen_yx.params, f_opt);
  }
  outcome.initial_loss = first;
  outcome.final_loss = last;

  const json config{{"model_kind", "cyclegan_smoke"},
                    {"input_size", ts.input_size},
                    {"generator", unet_config_json(gc)},
                    {"generator_back", unet_config_json(gc)},
                    {"disc_x", disc_config_json(dc)},
                    {"disc_y", disc_config_json(dc)},
                    {"cycle_weight", ts.cycle_weight}};
  nn::save_checkpoint(ckpt_path, config.dump(),
                      {&gen_xy.params, &gen_yx.params, &disc_x.params, &disc_y.params});
  return outcome;
}

}  // namespace fpforge
