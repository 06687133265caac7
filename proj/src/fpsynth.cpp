#include "fpforge/fpsynth.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

namespace fpforge {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Orientation bins for the Gabor pass; kernels are precomputed per bin.
constexpr int kOrientationBins = 16;

double wrap_orientation(double theta) {
  theta = std::fmod(theta, kPi);
  if (theta < 0.0) theta += kPi;
  if (theta >= kPi) theta -= kPi;
  return theta;
}

struct Kernel {
  int half = 0;
  std::vector<double> taps;  // (2*half+1)^2
};

// Oriented Gabor tap set: gaussian envelope elongated along the ridge flow,
// cosine carrier across it. Zero-mean so repeated passes stay bandpass.
Kernel make_gabor_kernel(double theta, double period) {
  const double sigma_u = 0.40 * period;  // across ridges
  const double sigma_v = 0.55 * period;  // along ridges
  Kernel k;
  k.half = static_cast<int>(std::ceil(1.8 * sigma_v));
  const int n = 2 * k.half + 1;
  k.taps.assign(static_cast<std::size_t>(n) * n, 0.0);

  const double nx = -std::sin(theta);
  const double ny = std::cos(theta);
  const double fx = std::cos(theta);
  const double fy = std::sin(theta);

  double sum = 0.0;
  for (int dy = -k.half; dy <= k.half; ++dy) {
    for (int dx = -k.half; dx <= k.half; ++dx) {
      const double u = dx * nx + dy * ny;
      const double v = dx * fx + dy * fy;
      const double env = std::exp(-0.5 * (u * u / (sigma_u * sigma_u) + v * v / (sigma_v * sigma_v)));
      const double tap = env * std::cos(2.0 * kPi * u / period);
      k.taps[static_cast<std::size_t>(dy + k.half) * n + (dx + k.half)] = tap;
      sum += tap;
    }
  }
  const double mean = sum / (static_cast<double>(n) * n);
  for (double& t : k.taps) t -= mean;
  return k;
}

// Soft elliptical print mask, 1 inside, 0 outside, ~6 px feather.
std::vector<double> make_print_mask(int w, int h) {
  std::vector<double> mask(static_cast<std::size_t>(w) * h, 0.0);
  const double cx = 0.5 * (w - 1);
  const double cy = 0.5 * (h - 1);
  const double rx = 0.44 * w;
  const double ry = 0.46 * h;
  const double feather = 6.0 / std::min(rx, ry);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double ex = (x - cx) / rx;
      const double ey = (y - cy) / ry;
      const double r = std::sqrt(ex * ex + ey * ey);
      const double m = std::clamp((1.0 - r) / feather + 0.5, 0.0, 1.0);
      mask[static_cast<std::size_t>(y) * w + x] = m;
    }
  }
  return mask;
}

void gabor_pass(std::vector<double>& field, int w, int h,
                const std::vector<int>& bin_of, const std::vector<Kernel>& kernels,
                const std::vector<double>& mask) {
  std::vector<double> out(field.size(), 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t idx = static_cast<std::size_t>(y) * w + x;
      if (mask[idx] <= 0.001) continue;
      const Kernel& k = kernels[bin_of[idx]];
      const int n = 2 * k.half + 1;
      const int y0 = std::max(0, y - k.half);
      const int y1 = std::min(h - 1, y + k.half);
      const int x0 = std::max(0, x - k.half);
      const int x1 = std::min(w - 1, x + k.half);
      double acc = 0.0;
      for (int yy = y0; yy <= y1; ++yy) {
        const double* src = &field[static_cast<std::size_t>(yy) * w];
        const double* tap = &k.taps[static_cast<std::size_t>(yy - y + k.half) * n + (x0 - x + k.half)];
        for (int xx = x0; xx <= x1; ++xx) acc += src[xx] * tap[xx - x0];
      }
      out[idx] = acc;
    }
  }
  field.swap(out);
}

void normalize_and_squash(std::vector<double>& field, const std::vector<double>& mask) {
  double sum_sq = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < field.size(); ++i) {
    if (mask[i] > 0.001) {
      sum_sq += field[i] * field[i];
      ++count;
    }
  }
  const double rms = std::sqrt(sum_sq / std::max<std::size_t>(count, 1)) + 1e-9;
  for (double& v : field) v = std::tanh(1.6 * v / rms);
}

void draw_segment(GrayImage& img, double x1, double y1, double x2, double y2, double stroke_width) {
  const double r = 0.5 * stroke_width;
  const int x_lo = std::max(0, static_cast<int>(std::floor(std::min(x1, x2) - r - 1.0)));
  const int x_hi = std::min(img.width - 1, static_cast<int>(std::ceil(std::max(x1, x2) + r + 1.0)));
  const int y_lo = std::max(0, static_cast<int>(std::floor(std::min(y1, y2) - r - 1.0)));
  const int y_hi = std::min(img.height - 1, static_cast<int>(std::ceil(std::max(y1, y2) + r + 1.0)));
  const double dx = x2 - x1;
  const double dy = y2 - y1;
  const double len_sq = dx * dx + dy * dy;
  for (int y = y_lo; y <= y_hi; ++y) {
    for (int x = x_lo; x <= x_hi; ++x) {
      double t = 0.0;
      if (len_sq > 0.0) t = std::clamp(((x - x1) * dx + (y - y1) * dy) / len_sq, 0.0, 1.0);
      const double px = x1 + t * dx;
      const double py = y1 + t * dy;
      const double dist_sq = (x - px) * (x - px) + (y - py) * (y - py);
      if (dist_sq <= r * r) img.at(x, y) = 1.0;
    }
  }
}

}  // namespace

const char* to_string(PatternClass cls) {
  switch (cls) {
    case PatternClass::kArch: return "arch";
    case PatternClass::kLoop: return "loop";
    case PatternClass::kWhorl: return "whorl";
  }
  return "arch";
}

PatternClass pattern_class_from_string(const std::string& name) {
  if (name == "arch") return PatternClass::kArch;
  if (name == "loop") return PatternClass::kLoop;
  if (name == "whorl") return PatternClass::kWhorl;
  throw ParseError("unknown pattern class: \"" + name + "\"");
}

OrientationField make_orientation_field(PatternClass cls, int width, int height, Rng& rng) {
  OrientationField field;
  field.width = width;
  field.height = height;
  field.pattern_class = cls;
  field.angles.assign(static_cast<std::size_t>(width) * height, 0.0);

  const double base = rng.uniform(-0.15, 0.15);

  if (cls == PatternClass::kArch) {
    // No singular point: ridge flow arcs over a crest, horizontal at the sides.
    const double bend = rng.uniform(0.6, 1.4);
    const double crest_y = rng.uniform(0.35, 0.55) * height;
    for (int y = 0; y < height; ++y) {
      const double fall = std::exp(-0.5 * std::pow((y - crest_y) / (0.45 * height), 2.0));
      for (int x = 0; x < width; ++x) {
        const double u = (2.0 * x / std::max(1, width - 1)) - 1.0;  // [-1, 1]
        // Ridges tilt up on the left flank, level at the crest column,
        // down on the right flank.
        const double slope = -bend * std::sin(0.5 * kPi * u) * fall;
        field.at(x, y) = wrap_orientation(std::atan(slope) + base);
      }
    }
    return field;
  }

  // Loop: one core. Whorl: two cores. Half the winding of arg(z - core) per core.
  struct Core { double x, y; };
  std::vector<Core> cores;
  if (cls == PatternClass::kLoop) {
    cores.push_back({rng.uniform(0.40, 0.60) * width, rng.uniform(0.35, 0.50) * height});
  } else {
    cores.push_back({rng.uniform(0.38, 0.50) * width, rng.uniform(0.32, 0.44) * height});
    cores.push_back({rng.uniform(0.50, 0.62) * width, rng.uniform(0.50, 0.62) * height});
  }
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double theta = base;
      for (const Core& c : cores) theta += 0.5 * std::atan2(y - c.y, x - c.x);
      field.at(x, y) = wrap_orientation(theta);
    }
  }
  return field;
}

GrayImage generate_master(std::uint64_t seed, int width, int height, PatternClass cls) {
  if (width < 64 || height < 64)
    throw InvalidArgument("generate_master: dimensions must be at least 64x64");

  Rng rng(mix_seed(seed, 0x6d61737465720000ULL + static_cast<std::uint64_t>(cls)));

  const double period = rng.uniform(6.0, 12.0);
  OrientationField field = make_orientation_field(cls, width, height, rng);
  const int iterations = static_cast<int>(rng.uniform_int(4, 8));

  const std::vector<double> mask = make_print_mask(width, height);

  // Sparse seed blobs in a signed working field.
  std::vector<double> work(static_cast<std::size_t>(width) * height, 0.0);
  const int blob_count = std::max(40, width * height / 400);
  for (int i = 0; i < blob_count; ++i) {
    const int bx = static_cast<int>(rng.uniform_int(0, width - 1));
    const int by = static_cast<int>(rng.uniform_int(0, height - 1));
    const double sign = rng.next_double() < 0.5 ? -1.0 : 1.0;
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int x = bx + dx;
        const int y = by + dy;
        if (x >= 0 && x < width && y >= 0 && y < height)
          work[static_cast<std::size_t>(y) * width + x] = sign;
      }
    }
  }

  std::vector<Kernel> kernels;
  kernels.reserve(kOrientationBins);
  for (int b = 0; b < kOrientationBins; ++b)
    kernels.push_back(make_gabor_kernel((b + 0.5) * kPi / kOrientationBins, period));

  std::vector<int> bin_of(work.size(), 0);
  for (std::size_t i = 0; i < field.angles.size(); ++i) {
    int b = static_cast<int>(field.angles[i] / kPi * kOrientationBins);
    bin_of[i] = std::clamp(b, 0, kOrientationBins - 1);
  }

  for (int it = 0; it < iterations; ++it) {
    gabor_pass(work, width, height, bin_of, kernels, mask);
    normalize_and_squash(work, mask);
  }

  GrayImage img(width, height, 1.0);
  for (std::size_t i = 0; i < work.size(); ++i) {
    const double ridge = 0.5 - 0.5 * std::tanh(2.5 * work[i]);  // +1 -> dark ridge
    img.pixels[i] = mask[i] * ridge + (1.0 - mask[i]) * 1.0;
  }
  img.clamp01();
  return img;
}

DistortionParams sample_distortion(Rng& rng) {
  DistortionParams p;
  p.blur_sigma = rng.uniform(0.0, 2.5);
  p.noise_sigma = rng.uniform(0.0, 0.25);
  p.rotation_deg = rng.uniform(-10.0, 10.0);
  p.translate_x = static_cast<int>(rng.uniform_int(-10, 10));
  p.translate_y = static_cast<int>(rng.uniform_int(-10, 10));
  p.scratch_count = static_cast<int>(rng.uniform_int(0, 8));
  p.scratch_width_px = rng.uniform(0.8, 2.5);
  p.occlusion_fraction = rng.uniform(0.0, 0.15);
  return p;
}

namespace {

GrayImage rotate_bilinear(const GrayImage& img, double degrees) {
  const double rad = degrees * kPi / 180.0;
  const double c = std::cos(rad);
  const double s = std::sin(rad);
  const double cx = 0.5 * (img.width - 1);
  const double cy = 0.5 * (img.height - 1);
  GrayImage out(img.width, img.height, 1.0);

  auto sample = [&](int x, int y) -> double {
    if (x < 0 || x >= img.width || y < 0 || y >= img.height) return 1.0;
    return img.at(x, y);
  };

  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      // Inverse map: output pixel pulled from the source frame.
      const double dx = x - cx;
      const double dy = y - cy;
      const double sx = c * dx + s * dy + cx;
      const double sy = -s * dx + c * dy + cy;
      const int x0 = static_cast<int>(std::floor(sx));
      const int y0 = static_cast<int>(std::floor(sy));
      const double fx = sx - x0;
      const double fy = sy - y0;
      const double v00 = sample(x0, y0);
      const double v10 = sample(x0 + 1, y0);
      const double v01 = sample(x0, y0 + 1);
      const double v11 = sample(x0 + 1, y0 + 1);
      out.at(x, y) = (1.0 - fy) * ((1.0 - fx) * v00 + fx * v10) + fy * ((1.0 - fx) * v01 + fx * v11);
    }
  }
  return out;
}

GrayImage translate_image(const GrayImage& img, int tx, int ty) {
  GrayImage out(img.width, img.height, 1.0);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const int sx = x - tx;
      const int sy = y - ty;
      if (sx >= 0 && sx < img.width && sy >= 0 && sy < img.height) out.at(x, y) = img.at(sx, sy);
    }
  }
  return out;
}

void occlude_patches(GrayImage& img, double fraction, Rng& rng) {
  const std::int64_t target = static_cast<std::int64_t>(fraction * img.width * img.height);
  std::int64_t painted = 0;
  while (painted < target) {
    const int max_w = std::min(40, img.width);
    const int max_h = std::min(40, img.height);
    const int rw = static_cast<int>(rng.uniform_int(std::min(8, max_w), max_w));
    const int rh = static_cast<int>(rng.uniform_int(std::min(8, max_h), max_h));
    const int x0 = static_cast<int>(rng.uniform_int(0, img.width - rw));
    const int y0 = static_cast<int>(rng.uniform_int(0, img.height - rh));
    for (int y = y0; y < y0 + rh; ++y)
      for (int x = x0; x < x0 + rw; ++x) img.at(x, y) = 1.0;
    painted += static_cast<std::int64_t>(rw) * rh;
  }
}

GrayImage gaussian_blur(const GrayImage& img, double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> weights(radius + 1);
  double norm = 0.0;
  for (int i = 0; i <= radius; ++i) {
    weights[i] = std::exp(-0.5 * (i * i) / (sigma * sigma));
    norm += (i == 0) ? weights[i] : 2.0 * weights[i];
  }
  for (double& w : weights) w /= norm;

  // Separable, clamp-to-edge borders.
  GrayImage tmp(img.width, img.height, 0.0);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      double acc = weights[0] * img.at(x, y);
      for (int i = 1; i <= radius; ++i) {
        const int xl = std::max(0, x - i);
        const int xr = std::min(img.width - 1, x + i);
        acc += weights[i] * (img.at(xl, y) + img.at(xr, y));
      }
      tmp.at(x, y) = acc;
    }
  }
  GrayImage out(img.width, img.height, 0.0);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      double acc = weights[0] * tmp.at(x, y);
      for (int i = 1; i <= radius; ++i) {
        const int yt = std::max(0, y - i);
        const int yb = std::min(img.height - 1, y + i);
        acc += weights[i] * (tmp.at(x, yt) + tmp.at(x, yb));
      }
      out.at(x, y) = acc;
    }
  }
  return out;
}

}  // namespace

GrayImage apply_distortion(const GrayImage& master, const DistortionParams& params, Rng& rng) {
  GrayImage work = master;
  if (params.rotation_deg != 0.0) work = rotate_bilinear(work, params.rotation_deg);
  if (params.translate_x != 0 || params.translate_y != 0)
    work = translate_image(work, params.translate_x, params.translate_y);
  if (params.occlusion_fraction > 0.0) occlude_patches(work, params.occlusion_fraction, rng);
  if (params.blur_sigma > 0.0) work = gaussian_blur(work, params.blur_sigma);
  if (params.noise_sigma > 0.0) {
    for (double& p : work.pixels) p += rng.normal(0.0, params.noise_sigma);
  }
  work.clamp01();
  return work;
}

GrayImage add_scratches(const GrayImage& img, Rng& rng, int count, double width_px) {
  if (count < 0) throw InvalidArgument("add_scratches: count must be >= 0");
  GrayImage out = img;
  const double seg_min = 0.10 * std::min(img.width, img.height);
  const double seg_max = 0.25 * std::min(img.width, img.height);
  for (int k = 0; k < count; ++k) {
    const int segments = static_cast<int>(rng.uniform_int(3, 6));
    double x = rng.uniform(0.0, img.width - 1.0);
    double y = rng.uniform(0.0, img.height - 1.0);
    double angle = rng.uniform(0.0, 2.0 * kPi);
    for (int s = 0; s < segments; ++s) {
      const double len = rng.uniform(seg_min, seg_max);
      const double x2 = x + len * std::cos(angle);
      const double y2 = y + len * std::sin(angle);
      draw_segment(out, x, y, x2, y2, width_px);
      x = x2;
      y = y2;
      angle += rng.uniform(-0.7, 0.7);
    }
  }
  return out;
}

}  // namespace fpforge
