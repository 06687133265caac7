#include <fstream>
#include <set>

#include <json.hpp>

#include "fpforge/harness.hpp"

namespace fpforge {

using nlohmann::json;

const char* to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kUnet: return "unet";
    case ModelKind::kPix2PixSmoke: return "pix2pix_smoke";
    case ModelKind::kCycleGanSmoke: return "cyclegan_smoke";
  }
  return "unet";
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "unet") return ModelKind::kUnet;
  if (name == "pix2pix_smoke") return ModelKind::kPix2PixSmoke;
  if (name == "cyclegan_smoke") return ModelKind::kCycleGanSmoke;
  throw ParseError("unknown model kind \"" + name + "\"");
}

void merge_config_json(RunConfig& cfg, const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("config: top level must be an object");

  static const std::set<std::string> allowed = {
      "seed",          "count",       "width",        "height",
      "alpha",         "out",         "textures",     "allow_procedural",
      "manifest",      "checkpoint",  "strips",       "threads",
      "model",         "epochs",      "batch_size",   "lr",
      "decay_start_epoch", "input_size", "steps",     "depth",
      "base_channels", "disc_layers", "disc_base_channels",
      "l1_weight",     "cycle_weight", "non_saturating", "paper_scale"};
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key()))
      throw ParseError("config: unknown key \"" + item.key() + "\"");
  }

  const auto get = [&j](const char* key) { return j.at(key); };
  // Model kind first: paper-scale defaults are model-specific. Remaining keys
  // can then override whatever paper scale set.
  if (j.contains("model")) cfg.train.model_kind = model_kind_from_string(get("model").get<std::string>());
  if (j.contains("paper_scale") && get("paper_scale").get<bool>()) apply_paper_scale(cfg);
  if (j.contains("seed")) cfg.seed = get("seed").get<std::uint64_t>();
  if (j.contains("count")) cfg.count = get("count").get<int>();
  if (j.contains("width")) cfg.width = get("width").get<int>();
  if (j.contains("height")) cfg.height = get("height").get<int>();
  if (j.contains("alpha")) cfg.alpha = get("alpha").get<double>();
  if (j.contains("out")) cfg.out_dir = get("out").get<std::string>();
  if (j.contains("textures")) cfg.textures_dir = get("textures").get<std::string>();
  if (j.contains("allow_procedural")) cfg.allow_procedural = get("allow_procedural").get<bool>();
  if (j.contains("manifest")) cfg.manifest_path = get("manifest").get<std::string>();
  if (j.contains("checkpoint")) cfg.checkpoint_path = get("checkpoint").get<std::string>();
  if (j.contains("strips")) cfg.write_strips = get("strips").get<bool>();
  if (j.contains("threads")) cfg.threads = get("threads").get<int>();
  if (j.contains("epochs")) cfg.train.epochs = get("epochs").get<int>();
  if (j.contains("batch_size")) cfg.train.batch_size = get("batch_size").get<int>();
  if (j.contains("lr")) cfg.train.lr = get("lr").get<double>();
  if (j.contains("decay_start_epoch")) cfg.train.decay_start_epoch = get("decay_start_epoch").get<int>();
  if (j.contains("input_size")) cfg.train.input_size = get("input_size").get<int>();
  if (j.contains("steps")) cfg.train.steps = get("steps").get<int>();
  if (j.contains("depth")) cfg.train.depth = get("depth").get<int>();
  if (j.contains("base_channels")) cfg.train.base_channels = get("base_channels").get<int>();
  if (j.contains("disc_layers")) cfg.train.disc_layers = get("disc_layers").get<int>();
  if (j.contains("disc_base_channels"))
    cfg.train.disc_base_channels = get("disc_base_channels").get<int>();
  if (j.contains("l1_weight")) cfg.train.l1_weight = get("l1_weight").get<double>();
  if (j.contains("cycle_weight")) cfg.train.cycle_weight = get("cycle_weight").get<double>();
  if (j.contains("non_saturating")) cfg.train.non_saturating = get("non_saturating").get<bool>();
}

RunConfig run_config_from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config: " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  RunConfig cfg;
  merge_config_json(cfg, text);
  return cfg;
}

void apply_paper_scale(RunConfig& cfg) {
  cfg.count = 100000;  // 70k/10k/20k split
  cfg.width = 275;
  cfg.height = 400;
  cfg.train.input_size = 256;
  cfg.train.depth = 4;
  cfg.train.base_channels = 64;
  cfg.train.disc_layers = 3;
  cfg.train.disc_base_channels = 64;
  cfg.train.steps = 0;
  switch (cfg.train.model_kind) {
    case ModelKind::kUnet:
      cfg.train.epochs = 50;
      cfg.train.batch_size = 32;
      cfg.train.lr = 1e-4;
      cfg.train.decay_start_epoch = -1;
      break;
    case ModelKind::kPix2PixSmoke:
      cfg.train.epochs = 35;
      cfg.train.batch_size = 6;
      cfg.train.lr = 2e-4;
      cfg.train.decay_start_epoch = 20;  // 15 decay epochs
      break;
    case ModelKind::kCycleGanSmoke:
      cfg.train.epochs = 30;
      cfg.train.batch_size = 64;
      cfg.train.lr = 2e-4;
      cfg.train.decay_start_epoch = 20;
      break;
  }
}

}  // namespace fpforge
