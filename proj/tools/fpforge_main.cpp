#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "fpforge/harness.hpp"

namespace {

struct CliOverrides {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int count = -1;
  std::string out;
  std::string textures;
  std::string model;
  bool paper_scale = false;
  std::string manifest;
  std::string checkpoint;
  bool strips = false;
};

void attach_common(CLI::App* cmd, CliOverrides& ov) {
  cmd->add_option("--config", ov.config_path, "JSON config file");
  cmd->add_option("--seed", ov.seed, "master seed (all randomness derives from it)")
      ->each([&ov](const std::string&) { ov.seed_set = true; });
  cmd->add_option("--count", ov.count, "number of image pairs");
  cmd->add_option("--out", ov.out, "output directory");
  cmd->add_option("--textures", ov.textures, "directory of P5/P6 texture files");
  cmd->add_option("--model", ov.model, "unet|pix2pix_smoke|cyclegan_smoke");
  cmd->add_flag("--paper-scale", ov.paper_scale, "full-scale dataset/training defaults");
}

fpforge::RunConfig build_config(const CliOverrides& ov) {
  fpforge::RunConfig cfg;
  if (!ov.config_path.empty()) cfg = fpforge::run_config_from_json_file(ov.config_path);
  if (!ov.model.empty()) cfg.train.model_kind = fpforge::model_kind_from_string(ov.model);
  if (ov.paper_scale) fpforge::apply_paper_scale(cfg);
  if (ov.seed_set) cfg.seed = ov.seed;
  if (ov.count >= 0) cfg.count = ov.count;
  if (!ov.out.empty()) cfg.out_dir = ov.out;
  if (!ov.textures.empty()) cfg.textures_dir = ov.textures;
  if (!ov.manifest.empty()) cfg.manifest_path = ov.manifest;
  if (!ov.checkpoint.empty()) cfg.checkpoint_path = ov.checkpoint;
  if (ov.strips) cfg.write_strips = true;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fpforge: paired noisy/clean fingerprint dataset forge and denoising benchmark"};
  app.require_subcommand(1);

  CliOverrides gen_ov, train_ov, eval_ov;

  CLI::App* gen = app.add_subcommand("generate", "synthesize a paired dataset with a manifest");
  attach_common(gen, gen_ov);

  CLI::App* train = app.add_subcommand("train", "train a model on a generated dataset");
  attach_common(train, train_ov);
  train->add_option("--manifest", train_ov.manifest, "dataset manifest path");

  CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint on the test split");
  attach_common(eval, eval_ov);
  eval->add_option("--manifest", eval_ov.manifest, "dataset manifest path");
  eval->add_option("--checkpoint", eval_ov.checkpoint, "checkpoint path");
  eval->add_flag("--strips", eval_ov.strips, "write [noisy | truth | output] strips");

  std::string m_pred, m_truth, m_name = "pair", m_out;
  CLI::App* met = app.add_subcommand("metrics", "MSE/PSNR/SSIM between images or directories");
  met->add_option("--pred", m_pred, "prediction image or directory")->required();
  met->add_option("--truth", m_truth, "ground-truth image or directory")->required();
  met->add_option("--name", m_name, "row label");
  met->add_option("--out", m_out, "write the TSV report here instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      const fpforge::RunConfig cfg = build_config(gen_ov);
      const fpforge::DatasetManifest manifest = fpforge::cmd_generate(cfg);
      std::printf("generated %zu pairs (train %d / val %d / test %d) in %s\n",
                  manifest.records.size(), manifest.counts.train, manifest.counts.val,
                  manifest.counts.test, cfg.out_dir.string().c_str());
    } else if (train->parsed()) {
      const fpforge::RunConfig cfg = build_config(train_ov);
      const fpforge::TrainOutcome outcome = fpforge::cmd_train(cfg);
      std::printf("trained %s: loss %.6f -> %.6f\ncheckpoint: %s\nhistory: %s\n",
                  fpforge::to_string(cfg.train.model_kind), outcome.initial_loss,
                  outcome.final_loss, outcome.checkpoint_path.string().c_str(),
                  outcome.history_path.string().c_str());
    } else if (eval->parsed()) {
      const fpforge::RunConfig cfg = build_config(eval_ov);
      const fpforge::EvalOutcome outcome = fpforge::cmd_eval(cfg);
      std::fputs(fpforge::report_to_tsv(outcome.report).c_str(), stdout);
      std::printf("report: %s\n", outcome.report_path.string().c_str());
    } else if (met->parsed()) {
      const fpforge::MetricsReport report = fpforge::cmd_metrics(m_pred, m_truth, m_name);
      const std::string tsv = fpforge::report_to_tsv(report);
      if (m_out.empty()) {
        std::fputs(tsv.c_str(), stdout);
      } else {
        std::ofstream out(m_out, std::ios::binary | std::ios::trunc);
        if (!out) throw fpforge::IoError("cannot open report for writing: " + m_out);
        out << tsv;
      }
    }
  } catch (const fpforge::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 2;
  } catch (const fpforge::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const fpforge::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
