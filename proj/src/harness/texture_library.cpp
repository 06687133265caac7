#include <algorithm>

#include "fpforge/harness.hpp"

namespace fpforge {

TextureLibrary TextureLibrary::from_directory(const std::filesystem::path& dir) {
  TextureLibrary lib;
  if (!std::filesystem::is_directory(dir))
    throw IoError("texture directory does not exist: " + dir.string());
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string ext = entry.path().extension().string();
    if (ext != ".pgm" && ext != ".ppm") continue;
    TextureSource tex;
    tex.id = entry.path().filename().string();
    tex.image = read_image_file(entry.path());
    tex.origin = TextureOrigin::kFile;
    lib.textures_.push_back(std::move(tex));
  }
  std::sort(lib.textures_.begin(), lib.textures_.end(),
            [](const TextureSource& a, const TextureSource& b) { return a.id < b.id; });
  return lib;
}

TextureLibrary TextureLibrary::procedural_default(std::uint64_t seed) {
  TextureLibrary lib;
  const TextureKind kinds[4] = {TextureKind::kStripes, TextureKind::kChecker,
                                TextureKind::kPerlinLike, TextureKind::kSpeckle};
  // Two variants per kind; 256x384 comfortably covers crops and tiles.
  for (const TextureKind kind : kinds) {
    for (std::uint64_t variant = 0; variant < 2; ++variant) {
      lib.textures_.push_back(
          procedural_texture(kind, mix_seed(seed, 0xbead0000ULL + variant), 256, 384));
    }
  }
  std::sort(lib.textures_.begin(), lib.textures_.end(),
            [](const TextureSource& a, const TextureSource& b) { return a.id < b.id; });
  return lib;
}

const TextureSource& TextureLibrary::by_id(const std::string& id) const {
  for (const TextureSource& tex : textures_) {
    if (tex.id == id) return tex;
  }
  throw InvalidArgument("texture id not in library: \"" + id + "\"");
}

}  // namespace fpforge
