#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fpforge/compositor.hpp"
#include "fpforge/fpsynth.hpp"
#include "fpforge/metrics.hpp"

namespace fpforge {

enum class Split { kTrain, kVal, kTest };

const char* to_string(Split s);
Split split_from_string(const std::string& name);

struct ManifestRecord {
  std::string id;
  Split split = Split::kTrain;
  std::string clean_path;  // relative to the manifest directory
  std::string noisy_path;
  std::uint64_t master_seed = 0;  // per-image seed; all stage streams derive from it
  PatternClass pattern_class = PatternClass::kArch;
  std::string texture_id;
  double alpha = 0.45;
  DistortionParams distortion;
};

struct SplitCounts {
  int train = 0;
  int val = 0;
  int test = 0;
};

constexpr int kManifestVersion = 1;

struct DatasetManifest {
  int version = kManifestVersion;
  double alpha = 0.45;
  SplitCounts counts;
  std::vector<ManifestRecord> records;
};

// JSON-lines: a header object {version, alpha, counts} followed by one record
// object per line. Unknown fields, duplicate ids, and bad enum values are
// rejected with the line number.
void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);
DatasetManifest read_manifest(const std::filesystem::path& path);

// 7:1:2 largest-remainder quotas; each realized size is within 1 of the
// exact share.
SplitCounts split_quotas(int count);

// Assigns splits by ranking ids on a 64-bit hash, then slicing the quota
// sizes in rank order. Depends only on the id strings.
std::vector<Split> assign_splits(const std::vector<std::string>& ids);

// ---------------------------------------------------------------------------

enum class ModelKind { kUnet, kPix2PixSmoke, kCycleGanSmoke };

const char* to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

struct TrainSettings {
  ModelKind model_kind = ModelKind::kUnet;
  int epochs = 1;
  int batch_size = 8;
  double lr = 1e-4;
  int decay_start_epoch = -1;  // -1: no decay
  int input_size = 64;
  int steps = 0;  // 0: epochs * ceil(n_train / batch_size)
  int depth = 3;
  int base_channels = 8;
  int disc_layers = 3;
  int disc_base_channels = 8;
  double l1_weight = 100.0;    // conditional smoke training's reconstruction term
  double cycle_weight = 10.0;
  bool non_saturating = false;  // alternative generator objective, off by default
};

struct RunConfig {
  std::optional<std::uint64_t> seed;  // mandatory for generate/train; no wall-clock fallback
  int count = 100;
  int width = 275;
  int height = 400;
  double alpha = 0.45;
  std::filesystem::path out_dir;
  std::filesystem::path textures_dir;
  bool allow_procedural = true;
  std::filesystem::path manifest_path;
  std::filesystem::path checkpoint_path;
  bool write_strips = false;
  int threads = 0;  // generation workers; 0 = hardware concurrency
  TrainSettings train;

  std::uint64_t require_seed() const {
    if (!seed) throw InvalidArgument("seed is required (set --seed or \"seed\" in the config)");
    return *seed;
  }
};

// Reads a JSON object of overrides; unknown keys are rejected by name.
RunConfig run_config_from_json_file(const std::filesystem::path& path);
void merge_config_json(RunConfig& cfg, const std::string& json_text);

// Switches defaults to the full-scale dataset and training setup: 100k pairs
// at 275x400, 256x256 inputs, and the per-model epoch/batch/lr table.
void apply_paper_scale(RunConfig& cfg);

// ---------------------------------------------------------------------------

class TextureLibrary {
 public:
  static TextureLibrary from_directory(const std::filesystem::path& dir);
  static TextureLibrary procedural_default(std::uint64_t seed);

  bool empty() const { return textures_.empty(); }
  std::size_t size() const { return textures_.size(); }
  const TextureSource& at(std::size_t i) const { return textures_[i]; }
  const TextureSource& by_id(const std::string& id) const;

 private:
  std::vector<TextureSource> textures_;  // sorted by id
};

// Stage tags for per-record rng streams (see mix_seed).
namespace stream {
constexpr std::uint64_t kDistortionSample = 1;
constexpr std::uint64_t kPatternClass = 2;
constexpr std::uint64_t kTexturePick = 3;
constexpr std::uint64_t kDistortionApply = 4;
constexpr std::uint64_t kScratch = 5;
constexpr std::uint64_t kBackground = 6;
constexpr std::uint64_t kWeightInit = 7;
constexpr std::uint64_t kTrainLoop = 8;
}  // namespace stream

// Rebuilds a record's images from its manifest fields alone.
GrayImage recompute_clean(const ManifestRecord& rec, int width, int height);
GrayImage recompute_noisy(const ManifestRecord& rec, const TextureLibrary& textures,
                          int width, int height);

// Generates <id>_gt.pgm / <id>_noisy.pgm pairs plus manifest.jsonl in
// cfg.out_dir. Partial output is removed if any record fails.
DatasetManifest cmd_generate(const RunConfig& cfg);

struct TrainOutcome {
  std::filesystem::path checkpoint_path;
  std::filesystem::path history_path;
  double initial_loss = 0.0;
  double final_loss = 0.0;
};

TrainOutcome cmd_train(const RunConfig& cfg);

struct EvalOutcome {
  MetricsReport report;
  std::filesystem::path report_path;
};

// Runs the checkpointed generator over the test split (center crops),
// reporting the model row and the identity_baseline row.
EvalOutcome cmd_eval(const RunConfig& cfg);

// Pairwise metrics for two images or two directories of images.
MetricsReport cmd_metrics(const std::filesystem::path& pred,
                          const std::filesystem::path& truth, const std::string& name);

}  // namespace fpforge
