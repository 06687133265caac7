#include <fstream>

#include <json.hpp>

#include "fpforge/harness.hpp"
#include "fpforge/nn/checkpoint.hpp"
#include "fpforge/nn/models.hpp"

namespace fpforge {

using nlohmann::json;
using nn::PatchDiscriminator;
using nn::PatchDiscriminatorConfig;
using nn::Tensor;
using nn::UNet;
using nn::UNetConfig;

namespace {

UNetConfig unet_config_from_json(const json& j) {
  UNetConfig c;
  c.in_channels = j.at("in_channels").get<int>();
  c.out_channels = j.at("out_channels").get<int>();
  c.depth = j.at("depth").get<int>();
  c.base_channels = j.at("base_channels").get<int>();
  return c;
}

PatchDiscriminatorConfig disc_config_from_json(const json& j) {
  PatchDiscriminatorConfig c;
  c.in_channels = j.at("in_channels").get<int>();
  c.layers = j.at("layers").get<int>();
  c.base_channels = j.at("base_channels").get<int>();
  return c;
}

GrayImage center_crop(const GrayImage& img, int size) {
  if (img.width < size || img.height < size)
    throw InvalidArgument("eval: crop size " + std::to_string(size) +
                          " exceeds image " + std::to_string(img.width) + "x" +
                          std::to_string(img.height));
  GrayImage out(size, size, 0.0);
  const int x0 = (img.width - size) / 2;
  const int y0 = (img.height - size) / 2;
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) out.at(x, y) = img.at(x0 + x, y0 + y);
  return out;
}

Tensor tensor_from_image(const GrayImage& img) {
  Tensor t(1, 1, img.height, img.width);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) t.at(0, 0, y, x) = static_cast<float>(img.at(x, y));
  return t;
}

GrayImage image_from_tensor(const Tensor& t) {
  GrayImage img(t.w(), t.h(), 0.0);
  for (int y = 0; y < t.h(); ++y)
    for (int x = 0; x < t.w(); ++x) img.at(x, y) = static_cast<double>(t.at(0, 0, y, x));
  img.clamp01();
  return img;
}

GrayImage hstrip(const std::vector<const GrayImage*>& panels) {
  int total_w = 0;
  const int h = panels.front()->height;
  for (const GrayImage* p : panels) total_w += p->width;
  GrayImage out(total_w, h, 1.0);
  int x_off = 0;
  for (const GrayImage* p : panels) {
    for (int y = 0; y < p->height; ++y)
      for (int x = 0; x < p->width; ++x) out.at(x_off + x, y) = p->at(x, y);
    x_off += p->width;
  }
  return out;
}

}  // namespace

EvalOutcome cmd_eval(const RunConfig& cfg) {
  if (cfg.manifest_path.empty()) throw InvalidArgument("eval: manifest path required");
  if (cfg.checkpoint_path.empty()) throw InvalidArgument("eval: checkpoint path required");
  if (cfg.out_dir.empty()) throw InvalidArgument("eval: output directory required");

  const DatasetManifest manifest = read_manifest(cfg.manifest_path);
  const std::filesystem::path base_dir = cfg.manifest_path.parent_path();

  const nn::Checkpoint ckpt = nn::load_checkpoint(cfg.checkpoint_path);
  json config;
  try {
    config = json::parse(ckpt.config_json);
  } catch (const json::exception& e) {
    throw ParseError(std::string("checkpoint: bad config block: ") + e.what());
  }
  const std::string kind_name = config.at("model_kind").get<std::string>();
  const ModelKind kind = model_kind_from_string(kind_name);
  const int input_size = config.at("input_size").get<int>();

  // The forward generator maps noisy to clean for every model kind.
  UNet<float> generator(unet_config_from_json(config.at("generator")), "G.");
  if (kind == ModelKind::kUnet) {
    nn::restore_params(ckpt, {&generator.params});
  } else if (kind == ModelKind::kPix2PixSmoke) {
    PatchDiscriminator<float> disc(disc_config_from_json(config.at("discriminator")), "D.");
    nn::restore_params(ckpt, {&generator.params, &disc.params});
  } else {
    UNet<float> gen_back(unet_config_from_json(config.at("generator_back")), "F.");
    PatchDiscriminator<float> disc_x(disc_config_from_json(config.at("disc_x")), "DX.");
    PatchDiscriminator<float> disc_y(disc_config_from_json(config.at("disc_y")), "DY.");
    nn::restore_params(ckpt, {&generator.params, &gen_back.params, &disc_x.params, &disc_y.params});
  }

  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  if (ec) throw IoError("cannot create output directory: " + cfg.out_dir.string());
  if (cfg.write_strips) {
    std::filesystem::create_directories(cfg.out_dir / "strips", ec);
    if (ec) throw IoError("cannot create strips directory");
  }

  std::vector<GrayImage> noisy_crops, clean_crops, outputs;
  for (const ManifestRecord& rec : manifest.records) {
    if (rec.split != Split::kTest) continue;
    const GrayImage noisy = center_crop(read_image_file(base_dir / rec.noisy_path), input_size);
    const GrayImage clean = center_crop(read_image_file(base_dir / rec.clean_path), input_size);
    const GrayImage out = image_from_tensor(generator.predict(tensor_from_image(noisy)));
    if (cfg.write_strips) {
      // Panel order: noisy input, ground truth, model output.
      write_pgm_file(cfg.out_dir / "strips" / (rec.id + ".pgm"), hstrip({&noisy, &clean, &out}));
    }
    noisy_crops.push_back(noisy);
    clean_crops.push_back(clean);
    outputs.push_back(out);
  }
  if (outputs.empty()) throw InvalidArgument("eval: test split is empty");

  const MetricConfig mcfg;
  MetricsReport model_report = evaluate_pairs(outputs, clean_crops, mcfg, kind_name);
  const MetricsReport baseline = evaluate_pairs(noisy_crops, clean_crops, mcfg, "identity_baseline");

  EvalOutcome outcome;
  outcome.report = merge_reports({model_report, baseline});
  outcome.report.per_pair = std::move(model_report.per_pair);
  outcome.report_path = cfg.out_dir / "report.tsv";

  std::ofstream out(outcome.report_path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open report for writing: " + outcome.report_path.string());
  out << report_to_tsv(outcome.report);
  if (!out) throw IoError("short write to report");
  return outcome;
}

MetricsReport cmd_metrics(const std::filesystem::path& pred, const std::filesystem::path& truth,
                          const std::string& name) {
  std::vector<GrayImage> preds, truths;
  if (std::filesystem::is_directory(pred) != std::filesystem::is_directory(truth))
    throw InvalidArgument("metrics: both inputs must be files or both directories");
  if (std::filesystem::is_directory(pred)) {
    std::vector<std::filesystem::path> pred_files, truth_files;
    for (const auto& e : std::filesystem::directory_iterator(pred))
      if (e.is_regular_file()) pred_files.push_back(e.path());
    for (const auto& e : std::filesystem::directory_iterator(truth))
      if (e.is_regular_file()) truth_files.push_back(e.path());
    std::sort(pred_files.begin(), pred_files.end());
    std::sort(truth_files.begin(), truth_files.end());
    if (pred_files.size() != truth_files.size())
      throw InvalidArgument("metrics: directories hold different file counts");
    for (std::size_t i = 0; i < pred_files.size(); ++i) {
      preds.push_back(read_image_file(pred_files[i]));
      truths.push_back(read_image_file(truth_files[i]));
    }
  } else {
    preds.push_back(read_image_file(pred));
    truths.push_back(read_image_file(truth));
  }
  return evaluate_pairs(preds, truths, MetricConfig{}, name);
}

}  // namespace fpforge
