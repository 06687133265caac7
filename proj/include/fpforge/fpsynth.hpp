#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fpforge/gray_image.hpp"
#include "fpforge/rng.hpp"

namespace fpforge {

enum class PatternClass { kArch, kLoop, kWhorl };

const char* to_string(PatternClass cls);
PatternClass pattern_class_from_string(const std::string& name);

// Per-pixel ridge-flow angles in [0, pi). Orientations, not directions.
struct OrientationField {
  int width = 0;
  int height = 0;
  std::vector<double> angles;
  PatternClass pattern_class = PatternClass::kArch;

  double& at(int x, int y) { return angles[static_cast<std::size_t>(y) * width + x]; }
  double at(int x, int y) const { return angles[static_cast<std::size_t>(y) * width + x]; }
};

// One noisy sample's distortion recipe. Ranges enforced by sample_distortion:
// rotation in [-10, 10] degrees, translation components in [-10, 10] px,
// blur_sigma in [0, 2.5], noise_sigma in [0, 0.25], scratch_count in {0..8},
// occlusion_fraction in [0, 0.15].
struct DistortionParams {
  double blur_sigma = 0.0;
  double noise_sigma = 0.0;
  double rotation_deg = 0.0;
  int translate_x = 0;
  int translate_y = 0;
  int scratch_count = 0;
  double scratch_width_px = 1.0;
  double occlusion_fraction = 0.0;
};

// Smooth ridge-flow field for the pattern class: arch has no singular point,
// loop one core, whorl two cores.
OrientationField make_orientation_field(PatternClass cls, int width, int height, Rng& rng);

// Procedural master print: orientation field + seeded blobs + iterated
// oriented Gabor filtering, softly binarized, masked to an elliptical print
// area. Deterministic in (seed, width, height, cls). Requires width and
// height >= 64.
GrayImage generate_master(std::uint64_t seed, int width, int height, PatternClass cls);

DistortionParams sample_distortion(Rng& rng);

// Pipeline order: rotate -> translate -> occlude patches -> blur -> additive
// gaussian noise, clamped to [0,1]. Regions exposed by the geometric stages
// are filled with background white 1.0. Scratches are a separate op.
GrayImage apply_distortion(const GrayImage& master, const DistortionParams& params, Rng& rng);

// Paints `count` random polylines (3-6 segments) of hard-edged stroke width
// width_px with intensity 1.0.
GrayImage add_scratches(const GrayImage& img, Rng& rng, int count, double width_px);

}  // namespace fpforge
