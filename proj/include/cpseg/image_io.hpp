#pragma once

#include <string>

#include "cpseg/grid.hpp"

namespace cpseg {

/// 8-bit PNG -> mask. Foreground iff first-channel value >= 128.
BinaryMask load_mask(const std::string& path);

/// Mask -> 8-bit grayscale PNG, background 0 / foreground 255.
void save_mask(const BinaryMask& mask, const std::string& path);

/// 8-bit grayscale PNG -> [0,1] grid (value / 255).
ProbabilityMap load_gray(const std::string& path);

/// [0,1] grid -> 8-bit grayscale PNG (rounded to nearest).
void save_gray(const ProbabilityMap& img, const std::string& path);

/// CPLR raster: "CPLR" magic, u32le height, u32le width, f32le row-major payload.
/// Values outside [0,1] by more than 1e-6 trigger a warning on stderr; all are clamped.
ProbabilityMap load_prob(const std::string& path);
void save_prob(const ProbabilityMap& prob, const std::string& path);

/// False-color heatmap of an arbitrary real grid: linear ramp, min -> blue, max -> red.
void save_heatmap(const std::vector<double>& values, int height, int width, const std::string& path);

} // namespace cpseg
