#include <atomic>
#include <cstdio>
#include <mutex>
#include <thread>

#include "fpforge/harness.hpp"

namespace fpforge {

namespace {

GrayImage noisy_from_master(const GrayImage& master, const ManifestRecord& rec,
                            const TextureLibrary& textures) {
  Rng distort_rng(mix_seed(rec.master_seed, stream::kDistortionApply));
  GrayImage noisy = apply_distortion(master, rec.distortion, distort_rng);

  Rng scratch_rng(mix_seed(rec.master_seed, stream::kScratch));
  noisy = add_scratches(noisy, scratch_rng, rec.distortion.scratch_count,
                        rec.distortion.scratch_width_px);

  Rng bg_rng(mix_seed(rec.master_seed, stream::kBackground));
  const GrayImage background =
      prepare_background(textures.by_id(rec.texture_id), master.width, master.height, bg_rng);

  return alpha_blend(noisy, background, BlendConfig{rec.alpha});
}

}  // namespace

GrayImage recompute_clean(const ManifestRecord& rec, int width, int height) {
  return generate_master(rec.master_seed, width, height, rec.pattern_class);
}

GrayImage recompute_noisy(const ManifestRecord& rec, const TextureLibrary& textures,
                          int width, int height) {
  return noisy_from_master(recompute_clean(rec, width, height), rec, textures);
}

namespace {

std::string record_id(int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "fp%06d", index);
  return buf;
}

}  // namespace

DatasetManifest cmd_generate(const RunConfig& cfg) {
  const std::uint64_t seed = cfg.require_seed();
  if (cfg.count < 1) throw InvalidArgument("generate: count must be >= 1");
  if (cfg.width < 64 || cfg.height < 64)
    throw InvalidArgument("generate: image dimensions must be at least 64x64");
  if (cfg.out_dir.empty()) throw InvalidArgument("generate: output directory required");

  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  if (ec) throw IoError("cannot create output directory: " + cfg.out_dir.string());

  TextureLibrary textures;
  if (!cfg.textures_dir.empty()) {
    textures = TextureLibrary::from_directory(cfg.textures_dir);
    if (textures.empty()) throw IoError("no .pgm/.ppm textures in " + cfg.textures_dir.string());
  } else if (cfg.allow_procedural) {
    textures = TextureLibrary::procedural_default(seed);
  } else {
    throw InvalidArgument("generate: no texture directory and procedural fallback disabled");
  }

  const PatternClass classes[3] = {PatternClass::kArch, PatternClass::kLoop, PatternClass::kWhorl};

  // Record metadata is drawn up front from per-image streams; workers only
  // render and write files.
  DatasetManifest manifest;
  manifest.alpha = cfg.alpha;
  manifest.records.resize(static_cast<std::size_t>(cfg.count));
  std::vector<std::string> ids(manifest.records.size());
  for (int i = 0; i < cfg.count; ++i) {
    ManifestRecord& rec = manifest.records[static_cast<std::size_t>(i)];
    rec.id = record_id(i);
    ids[static_cast<std::size_t>(i)] = rec.id;
    rec.master_seed = mix_seed(seed, static_cast<std::uint64_t>(i));
    rec.clean_path = rec.id + "_gt.pgm";
    rec.noisy_path = rec.id + "_noisy.pgm";
    rec.alpha = cfg.alpha;

    Rng class_rng(mix_seed(rec.master_seed, stream::kPatternClass));
    rec.pattern_class = classes[class_rng.uniform_int(0, 2)];

    Rng sample_rng(mix_seed(rec.master_seed, stream::kDistortionSample));
    rec.distortion = sample_distortion(sample_rng);

    Rng tex_rng(mix_seed(rec.master_seed, stream::kTexturePick));
    rec.texture_id = textures.at(static_cast<std::size_t>(
        tex_rng.uniform_int(0, static_cast<std::int64_t>(textures.size()) - 1))).id;
  }

  const std::vector<Split> splits = assign_splits(ids);
  for (std::size_t i = 0; i < splits.size(); ++i) manifest.records[i].split = splits[i];
  manifest.counts = split_quotas(cfg.count);

  // Per-record rendering is pure and independently seeded, so records fan out
  // across threads.
  std::atomic<int> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  const int max_threads = cfg.threads > 0
                              ? cfg.threads
                              : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const int worker_count = std::max(1, std::min(cfg.count, max_threads));

  const auto render_record = [&](const ManifestRecord& rec) {
    const GrayImage clean = recompute_clean(rec, cfg.width, cfg.height);
    write_pgm_file(cfg.out_dir / rec.clean_path, clean);
    write_pgm_file(cfg.out_dir / rec.noisy_path, noisy_from_master(clean, rec, textures));
  };

  const auto worker = [&]() {
    while (true) {
      const int i = next.fetch_add(1);
      if (i >= cfg.count) return;
      try {
        render_record(manifest.records[static_cast<std::size_t>(i)]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        next.store(cfg.count);
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(worker_count));
  for (int t = 0; t < worker_count; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();

  if (first_error) {
    for (const ManifestRecord& rec : manifest.records) {
      std::filesystem::remove(cfg.out_dir / rec.clean_path, ec);
      std::filesystem::remove(cfg.out_dir / rec.noisy_path, ec);
    }
    std::rethrow_exception(first_error);
  }

  const std::filesystem::path manifest_path =
      cfg.manifest_path.empty() ? cfg.out_dir / "manifest.jsonl" : cfg.manifest_path;
  write_manifest(manifest_path, manifest);
  return manifest;
}

}  // namespace fpforge
