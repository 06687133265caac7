#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "fpforge/errors.hpp"

namespace fpforge {

// Row-major grayscale image with intensities in [0, 1].
// Convention everywhere: 0 = ridge black, 1 = valley / background white.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<double> pixels;

  GrayImage() = default;

  GrayImage(int w, int h, double fill = 0.0) : width(w), height(h) {
    if (w < 1 || h < 1) throw InvalidArgument("GrayImage dimensions must be >= 1");
    pixels.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill);
  }

  double& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  double at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }

  std::size_t size() const { return pixels.size(); }

  void clamp01() {
    for (double& p : pixels) p = std::clamp(p, 0.0, 1.0);
  }
};

inline void require_same_size(const GrayImage& a, const GrayImage& b, const char* what) {
  if (a.width != b.width || a.height != b.height)
    throw InvalidArgument(std::string(what) + ": image dimensions differ");
}

}  // namespace fpforge
