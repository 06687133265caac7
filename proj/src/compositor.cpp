#include "fpforge/compositor.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

namespace fpforge {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

bool is_pnm_space(std::uint8_t c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

struct HeaderCursor {
  std::span<const std::uint8_t> bytes;
  std::size_t pos = 0;

  void skip_space() {
    while (pos < bytes.size() && is_pnm_space(bytes[pos])) ++pos;
  }

  // One decimal token; `field` names the header field in errors.
  int read_int(const char* field) {
    skip_space();
    if (pos >= bytes.size() || bytes[pos] < '0' || bytes[pos] > '9')
      throw ParseError(std::string("pnm header: bad ") + field);
    long value = 0;
    while (pos < bytes.size() && bytes[pos] >= '0' && bytes[pos] <= '9') {
      value = value * 10 + (bytes[pos] - '0');
      if (value > 1'000'000'000L) throw ParseError(std::string("pnm header: bad ") + field);
      ++pos;
    }
    return static_cast<int>(value);
  }
};

}  // namespace

const char* to_string(TextureKind kind) {
  switch (kind) {
    case TextureKind::kStripes: return "stripes";
    case TextureKind::kChecker: return "checker";
    case TextureKind::kPerlinLike: return "perlin-like";
    case TextureKind::kSpeckle: return "speckle";
  }
  return "stripes";
}

GrayImage load_image(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6'))
    throw ParseError("pnm header: bad magic number");
  const bool color = bytes[1] == '6';

  HeaderCursor cur{bytes, 2};
  const int width = cur.read_int("width");
  const int height = cur.read_int("height");
  const int maxval = cur.read_int("maxval");
  if (width < 1 || height < 1) throw ParseError("pnm header: bad dimensions");
  if (maxval != 255) throw ParseError("pnm header: maxval must be 255");

  // Exactly one whitespace byte separates the header from the payload.
  if (cur.pos >= bytes.size() || !is_pnm_space(bytes[cur.pos]))
    throw ParseError("pnm header: missing separator before payload");
  ++cur.pos;

  const std::size_t channels = color ? 3 : 1;
  const std::size_t expected =
      static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * channels;
  if (bytes.size() - cur.pos < expected) throw ParseError("pnm payload: truncated");

  GrayImage img(width, height, 0.0);
  const std::uint8_t* p = bytes.data() + cur.pos;
  if (color) {
    for (std::size_t i = 0; i < img.size(); ++i) {
      const double r = p[3 * i] / 255.0;
      const double g = p[3 * i + 1] / 255.0;
      const double b = p[3 * i + 2] / 255.0;
      img.pixels[i] = 0.299 * r + 0.587 * g + 0.114 * b;
    }
  } else {
    for (std::size_t i = 0; i < img.size(); ++i) img.pixels[i] = p[i] / 255.0;
  }
  return img;
}

std::vector<std::uint8_t> encode_pgm(const GrayImage& img) {
  std::string header = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + img.size());
  for (double v : img.pixels) {
    const long q = std::lround(std::clamp(v, 0.0, 1.0) * 255.0);
    out.push_back(static_cast<std::uint8_t>(q));
  }
  return out;
}

GrayImage read_image_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image file: " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return load_image(bytes);
}

void write_pgm_file(const std::filesystem::path& path, const GrayImage& img) {
  const std::vector<std::uint8_t> bytes = encode_pgm(img);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open image file for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to image file: " + path.string());
}

GrayImage prepare_background(const TextureSource& tex, int width, int height, Rng& rng) {
  const GrayImage& src = tex.image;
  if (src.width < 32 || src.height < 32)
    throw InvalidArgument("prepare_background: texture must be at least 32x32");

  GrayImage out(width, height, 0.0);
  if (src.width >= width && src.height >= height) {
    const int ox = static_cast<int>(rng.uniform_int(0, src.width - width));
    const int oy = static_cast<int>(rng.uniform_int(0, src.height - height));
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) out.at(x, y) = src.at(x + ox, y + oy);
    return out;
  }

  // Texture smaller than the target in some dimension: tile with random phase.
  const int ox = static_cast<int>(rng.uniform_int(0, src.width - 1));
  const int oy = static_cast<int>(rng.uniform_int(0, src.height - 1));
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) out.at(x, y) = src.at((x + ox) % src.width, (y + oy) % src.height);
  return out;
}

GrayImage alpha_blend(const GrayImage& fg, const GrayImage& bg, const BlendConfig& cfg) {
  require_same_size(fg, bg, "alpha_blend");
  if (cfg.alpha < 0.0 || cfg.alpha > 1.0) throw InvalidArgument("alpha_blend: alpha must be in [0,1]");
  GrayImage out(fg.width, fg.height, 0.0);
  const double a = cfg.alpha;
  for (std::size_t i = 0; i < fg.size(); ++i)
    out.pixels[i] = a * fg.pixels[i] + (1.0 - a) * bg.pixels[i];
  return out;
}

namespace {

// Hash-based value noise, bilinearly interpolated per octave.
double value_noise(std::uint64_t seed, int octave, double x, double y) {
  const auto lattice = [seed, octave](int ix, int iy) {
    std::uint64_t h = seed ^ (static_cast<std::uint64_t>(octave) << 56);
    h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(ix)) * 0x9e3779b97f4a7c15ULL;
    h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(iy)) * 0xd1342543de82ef95ULL;
    std::uint64_t s = h;
    return static_cast<double>(splitmix64_next(s) >> 11) * 0x1.0p-53;
  };
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const double fx = x - x0;
  const double fy = y - y0;
  const double sx = fx * fx * (3.0 - 2.0 * fx);
  const double sy = fy * fy * (3.0 - 2.0 * fy);
  const double top = lattice(x0, y0) + sx * (lattice(x0 + 1, y0) - lattice(x0, y0));
  const double bot = lattice(x0, y0 + 1) + sx * (lattice(x0 + 1, y0 + 1) - lattice(x0, y0 + 1));
  return top + sy * (bot - top);
}

}  // namespace

TextureSource procedural_texture(TextureKind kind, std::uint64_t seed, int width, int height) {
  TextureSource tex;
  tex.id = std::string("proc_") + to_string(kind) + "_" + std::to_string(seed);
  tex.origin = TextureOrigin::kProcedural;
  GrayImage img(width, height, 0.0);
  Rng rng(mix_seed(seed, 0x7465787475726500ULL + static_cast<std::uint64_t>(kind)));

  switch (kind) {
    case TextureKind::kStripes: {
      const double angle = rng.uniform(0.0, kTwoPi);
      const double period = rng.uniform(6.0, 24.0);
      const double phase = rng.uniform(0.0, kTwoPi);
      const double cx = std::cos(angle);
      const double cy = std::sin(angle);
      double lo = 1e9, hi = -1e9;
      for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
          const double v = std::sin(kTwoPi * (x * cx + y * cy) / period + phase);
          img.at(x, y) = v;
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
      }
      const double span = std::max(hi - lo, 1e-12);
      for (double& p : img.pixels) p = 0.15 + 0.7 * (p - lo) / span;
      break;
    }
    case TextureKind::kChecker: {
      // Fixed period 8 (4-px cells) so the tile structure is predictable.
      for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
          img.at(x, y) = (((x / 4) + (y / 4)) % 2 == 0) ? 0.15 : 0.85;
      break;
    }
    case TextureKind::kPerlinLike: {
      const double base_scale = rng.uniform(12.0, 32.0);
      double lo = 1e9, hi = -1e9;
      for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
          double v = 0.0;
          double amp = 1.0;
          double scale = base_scale;
          for (int oct = 0; oct < 4; ++oct) {
            v += amp * value_noise(seed, oct, x / scale, y / scale);
            amp *= 0.5;
            scale *= 0.5;
          }
          img.at(x, y) = v;
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
      }
      const double span = std::max(hi - lo, 1e-12);
      for (double& p : img.pixels) p = 0.1 + 0.8 * (p - lo) / span;
      break;
    }
    case TextureKind::kSpeckle: {
      for (double& p : img.pixels) p = rng.uniform(0.1, 0.9);
      break;
    }
  }
  img.clamp01();
  tex.image = std::move(img);
  return tex;
}

}  // namespace fpforge
