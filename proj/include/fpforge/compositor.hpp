#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fpforge/gray_image.hpp"
#include "fpforge/rng.hpp"

namespace fpforge {

enum class TextureOrigin { kFile, kProcedural };

struct TextureSource {
  std::string id;
  GrayImage image;
  TextureOrigin origin = TextureOrigin::kProcedural;
};

struct BlendConfig {
  double alpha = 0.45;  // foreground (fingerprint) weight
};

enum class TextureKind { kStripes, kChecker, kPerlinLike, kSpeckle };

const char* to_string(TextureKind kind);

// Binary PGM (P5) or PPM (P6), 8-bit, maxval 255. PPM collapses to gray via
// luma 0.299 R + 0.587 G + 0.114 B. Intensities map to [0,1] as v/255.
// Throws ParseError naming the offending header field.
GrayImage load_image(std::span<const std::uint8_t> bytes);

// Canonical P5 encoding: "P5\n<w> <h>\n255\n" + rows, one newline after
// maxval, intensities quantized as round(v * 255).
std::vector<std::uint8_t> encode_pgm(const GrayImage& img);

GrayImage read_image_file(const std::filesystem::path& path);
void write_pgm_file(const std::filesystem::path& path, const GrayImage& img);

// width x height window from the texture: random crop when the texture is
// large enough, otherwise tiled with a random phase. Texture must be at
// least 32x32.
GrayImage prepare_background(const TextureSource& tex, int width, int height, Rng& rng);

// Per-pixel alpha * fg + (1 - alpha) * bg, evaluated exactly as written.
GrayImage alpha_blend(const GrayImage& fg, const GrayImage& bg, const BlendConfig& cfg);

// Deterministic fallback textures; values span at least [0.2, 0.8].
TextureSource procedural_texture(TextureKind kind, std::uint64_t seed, int width, int height);

}  // namespace fpforge
