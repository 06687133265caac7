#include <algorithm>
#include <fstream>
#include <set>

#include <json.hpp>

#include "fpforge/harness.hpp"

namespace fpforge {

using nlohmann::json;

const char* to_string(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "train";
}

Split split_from_string(const std::string& name) {
  if (name == "train") return Split::kTrain;
  if (name == "val") return Split::kVal;
  if (name == "test") return Split::kTest;
  throw ParseError("bad split name \"" + name + "\"");
}

SplitCounts split_quotas(int count) {
  if (count < 0) throw InvalidArgument("split_quotas: negative count");
  const double shares[3] = {0.7 * count, 0.1 * count, 0.2 * count};
  int sizes[3];
  double fractions[3];
  int assigned = 0;
  for (int i = 0; i < 3; ++i) {
    sizes[i] = static_cast<int>(shares[i]);
    fractions[i] = shares[i] - sizes[i];
    assigned += sizes[i];
  }
  // Largest remainder; ties resolve train > val > test.
  for (int left = count - assigned; left > 0; --left) {
    int best = 0;
    for (int i = 1; i < 3; ++i)
      if (fractions[i] > fractions[best]) best = i;
    sizes[best] += 1;
    fractions[best] = -1.0;
  }
  return {sizes[0], sizes[1], sizes[2]};
}

namespace {

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::vector<Split> assign_splits(const std::vector<std::string>& ids) {
  const SplitCounts quotas = split_quotas(static_cast<int>(ids.size()));
  std::vector<std::size_t> order(ids.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const std::uint64_t ha = fnv1a64(ids[a]);
    const std::uint64_t hb = fnv1a64(ids[b]);
    if (ha != hb) return ha < hb;
    return ids[a] < ids[b];
  });
  std::vector<Split> splits(ids.size(), Split::kTrain);
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    Split s = Split::kTrain;
    if (rank >= static_cast<std::size_t>(quotas.train)) {
      s = rank < static_cast<std::size_t>(quotas.train + quotas.val) ? Split::kVal : Split::kTest;
    }
    splits[order[rank]] = s;
  }
  return splits;
}

namespace {

json distortion_to_json(const DistortionParams& p) {
  return json{{"blur_sigma", p.blur_sigma},
              {"noise_sigma", p.noise_sigma},
              {"rotation_deg", p.rotation_deg},
              {"translate_x", p.translate_x},
              {"translate_y", p.translate_y},
              {"scratch_count", p.scratch_count},
              {"scratch_width_px", p.scratch_width_px},
              {"occlusion_fraction", p.occlusion_fraction}};
}

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed, int line) {
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key()))
      throw ParseError("manifest line " + std::to_string(line) + ": unknown field \"" +
                       item.key() + "\"");
  }
}

template <typename T>
T require_field(const json& obj, const char* key, int line) {
  if (!obj.contains(key))
    throw ParseError("manifest line " + std::to_string(line) + ": missing field \"" + key + "\"");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ParseError("manifest line " + std::to_string(line) + ": bad value for \"" + key + "\"");
  }
}

DistortionParams distortion_from_json(const json& obj, int line) {
  reject_unknown_keys(obj,
                      {"blur_sigma", "noise_sigma", "rotation_deg", "translate_x", "translate_y",
                       "scratch_count", "scratch_width_px", "occlusion_fraction"},
                      line);
  DistortionParams p;
  p.blur_sigma = require_field<double>(obj, "blur_sigma", line);
  p.noise_sigma = require_field<double>(obj, "noise_sigma", line);
  p.rotation_deg = require_field<double>(obj, "rotation_deg", line);
  p.translate_x = require_field<int>(obj, "translate_x", line);
  p.translate_y = require_field<int>(obj, "translate_y", line);
  p.scratch_count = require_field<int>(obj, "scratch_count", line);
  p.scratch_width_px = require_field<double>(obj, "scratch_width_px", line);
  p.occlusion_fraction = require_field<double>(obj, "occlusion_fraction", line);
  return p;
}

}  // namespace

void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open manifest for writing: " + path.string());

  const json header{{"version", manifest.version},
                    {"alpha", manifest.alpha},
                    {"counts",
                     {{"train", manifest.counts.train},
                      {"val", manifest.counts.val},
                      {"test", manifest.counts.test}}}};
  out << header.dump() << "\n";

  for (const ManifestRecord& rec : manifest.records) {
    const json j{{"id", rec.id},
                 {"split", to_string(rec.split)},
                 {"clean_path", rec.clean_path},
                 {"noisy_path", rec.noisy_path},
                 {"master_seed", rec.master_seed},
                 {"pattern_class", to_string(rec.pattern_class)},
                 {"texture_id", rec.texture_id},
                 {"alpha", rec.alpha},
                 {"distortion", distortion_to_json(rec.distortion)}};
    out << j.dump() << "\n";
  }
  if (!out) throw IoError("short write to manifest: " + path.string());
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open manifest: " + path.string());

  std::string line;
  int line_no = 0;
  if (!std::getline(in, line)) throw ParseError("manifest line 1: missing header");
  ++line_no;

  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception& e) {
    throw ParseError("manifest line 1: " + std::string(e.what()));
  }
  reject_unknown_keys(header, {"version", "alpha", "counts"}, line_no);

  DatasetManifest manifest;
  manifest.version = require_field<int>(header, "version", line_no);
  if (manifest.version > kManifestVersion)
    throw ParseError("manifest line 1: unsupported version " + std::to_string(manifest.version));
  manifest.alpha = require_field<double>(header, "alpha", line_no);
  const json counts = require_field<json>(header, "counts", line_no);
  reject_unknown_keys(counts, {"train", "val", "test"}, line_no);
  manifest.counts.train = require_field<int>(counts, "train", line_no);
  manifest.counts.val = require_field<int>(counts, "val", line_no);
  manifest.counts.test = require_field<int>(counts, "test", line_no);

  std::set<std::string> seen_ids;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError("manifest line " + std::to_string(line_no) + ": " + std::string(e.what()));
    }
    reject_unknown_keys(j,
                        {"id", "split", "clean_path", "noisy_path", "master_seed", "pattern_class",
                         "texture_id", "alpha", "distortion"},
                        line_no);
    ManifestRecord rec;
    rec.id = require_field<std::string>(j, "id", line_no);
    if (!seen_ids.insert(rec.id).second)
      throw ParseError("manifest line " + std::to_string(line_no) + ": duplicate id \"" + rec.id + "\"");
    const std::string split_name = require_field<std::string>(j, "split", line_no);
    try {
      rec.split = split_from_string(split_name);
    } catch (const ParseError&) {
      throw ParseError("manifest line " + std::to_string(line_no) + ": bad split name \"" +
                       split_name + "\"");
    }
    rec.clean_path = require_field<std::string>(j, "clean_path", line_no);
    rec.noisy_path = require_field<std::string>(j, "noisy_path", line_no);
    rec.master_seed = require_field<std::uint64_t>(j, "master_seed", line_no);
    const std::string cls = require_field<std::string>(j, "pattern_class", line_no);
    try {
      rec.pattern_class = pattern_class_from_string(cls);
    } catch (const ParseError&) {
      throw ParseError("manifest line " + std::to_string(line_no) + ": bad pattern class \"" +
                       cls + "\"");
    }
    rec.texture_id = require_field<std::string>(j, "texture_id", line_no);
    rec.alpha = require_field<double>(j, "alpha", line_no);
    rec.distortion = distortion_from_json(require_field<json>(j, "distortion", line_no), line_no);
    manifest.records.push_back(std::move(rec));
  }
  return manifest;
}

}  // namespace fpforge
